//! Numerical laboratory for complex interpolation of weighted Sobolev spaces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod discrete;
pub mod error;
pub mod fields;
pub mod interp;
pub mod norms;
pub mod optimize;
pub mod par;
pub mod quadrature;
pub mod scenario;
pub mod studies;
pub mod sampling;
pub mod weights;

pub use error::{LabError, Result};
