//! Compact and smooth approximation: `‖φ − φξ_n‖` and `‖φ − η_n∗φ‖` sweeps.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fields::{cutoff_xi, difference, mollify, multiply, TestFunction};
use crate::norms::{lp_norm, w1p_norm, NormReport};
use crate::par;
use crate::quadrature::QuadratureSpec;
use crate::weights::Weight;

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub n: u32,
    pub error: NormReport,
}

/// `‖φ − φξ_n‖_{W^{1,p}(ν)}` for each `n`.
pub fn cutoff_sweep(phi: &TestFunction, nu: &Weight, p: f64, ns: &[u32], spec: &QuadratureSpec) -> Result<Vec<SweepPoint>> {
    let out = par::map_slice(ns, |&n| -> Result<SweepPoint> {
        let xi = cutoff_xi(n, phi.dim())?;
        let cut = multiply(phi, xi.field())?;
        let error = w1p_norm(&difference(phi, &cut)?, nu, p, spec)?;
        Ok(SweepPoint { n, error })
    });
    out.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MollifierNorm {
    L1,
    W11,
}

/// Lattice step used for `mollify(φ, n, ·)` when none is given: `1/(16n)`.
pub fn default_grid_step(n: u32) -> f64 {
    1.0 / (16.0 * n as f64)
}

/// `‖φ − η_n∗φ‖` in `L¹(ν)` or `W^{1,1}(ν)` for each `n`.
pub fn mollifier_sweep(
    phi: &TestFunction,
    nu: &Weight,
    norm: MollifierNorm,
    ns: &[u32],
    grid_step: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<Vec<SweepPoint>> {
    if phi.dim() > 2 {
        return Err(LabError::InvalidParameter(format!("mollifier sweep is limited to d <= 2, got {}", phi.dim())));
    }
    let out = par::map_slice(ns, |&n| -> Result<SweepPoint> {
        let h = grid_step.unwrap_or_else(|| default_grid_step(n));
        let diff = difference(phi, &mollify(phi, n, h)?)?;
        let error = match norm {
            MollifierNorm::L1 => lp_norm(diff.field(), nu, 1.0, spec)?,
            MollifierNorm::W11 => w1p_norm(&diff, nu, 1.0, spec)?,
        };
        Ok(SweepPoint { n, error })
    });
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_bump, make_hat};
    use crate::weights::make_catalog_weight;

    #[test]
    fn cutoff_error_vanishes_once_support_is_covered() {
        let phi = make_hat(&[0.0], 2.0, 1.0, 1.0).unwrap();
        let one = make_catalog_weight("one", &[], 1).unwrap();
        let s = cutoff_sweep(&phi, &one, 1.0, &[1, 2, 4], &QuadratureSpec::default_for(1)).unwrap();
        assert!(s[0].error.value > 0.0);
        assert_eq!(s[2].error.value, 0.0);
        assert!(s[1].error.value <= s[0].error.value);
    }

    #[test]
    fn mollifier_error_decays() {
        let phi = make_bump(&[0.0], 1.0, 1.0).unwrap();
        let one = make_catalog_weight("one", &[], 1).unwrap();
        let spec = QuadratureSpec::default_for(1).with_rel_tol(1e-6);
        let s = mollifier_sweep(&phi, &one, MollifierNorm::L1, &[4, 8], None, &spec).unwrap();
        assert!(s[0].error.value > 2.0 * s[1].error.value, "{} {}", s[0].error.value, s[1].error.value);
    }
}
