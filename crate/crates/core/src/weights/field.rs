use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{LabError, Result};

pub type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
pub type GradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Relative scale of the central finite-difference step, `h = scale * (1 + |x|)`.
pub const DEFAULT_FD_SCALE: f64 = 1e-5;

/// A `d`-long scratch slice on the stack when `d <= 8`.
pub(crate) fn scratch<'a>(d: usize, stack: &'a mut [f64; 8], heap: &'a mut Vec<f64>) -> &'a mut [f64] {
    if d <= 8 {
        &mut stack[..d]
    } else {
        heap.resize(d, 0.0);
        heap.as_mut_slice()
    }
}

/// Euclidean length.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// `(Σ |v_k|^p)^{1/p}`.
pub fn norm_p(v: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        v.iter().map(|c| c.abs()).sum()
    } else if p == 2.0 {
        norm2(v)
    } else {
        v.iter().map(|c| c.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Axis-aligned box `[lo_0, hi_0] × … × [lo_{d-1}, hi_{d-1}]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(LabError::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.is_empty() {
            return Err(LabError::InvalidParameter("box must have at least one axis".into()));
        }
        for (axis, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !(l < h) || !l.is_finite() || !h.is_finite() {
                return Err(LabError::EmptyBox { axis, lo: l, hi: h });
            }
        }
        Ok(Self { lo, hi })
    }

    /// `[-r, r]^dim`.
    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    /// `center ± half_width` on every axis.
    pub fn around(center: &[f64], half_width: f64) -> Result<Self> {
        Self::new(
            center.iter().map(|c| c - half_width).collect(),
            center.iter().map(|c| c + half_width).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    pub fn expanded(&self, margin: f64) -> Self {
        Self {
            lo: self.lo.iter().map(|v| v - margin).collect(),
            hi: self.hi.iter().map(|v| v + margin).collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }

    /// Overlap of two boxes, `None` when it is empty.
    pub fn intersection(&self, other: &Self) -> Option<Self> {
        let lo: Vec<f64> = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect();
        let hi: Vec<f64> = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect();
        Self::new(lo, hi).ok()
    }

    /// Largest `|coordinate|` reached by the box.
    pub fn outer_radius(&self) -> f64 {
        self.lo.iter().chain(&self.hi).fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l).powi(2)).sum::<f64>().sqrt()
    }

    /// Maps a point of the unit cube onto the box.
    pub fn map_unit(&self, u: &[f64], out: &mut [f64]) {
        for k in 0..self.dim() {
            out[k] = self.lo[k] + u[k] * (self.hi[k] - self.lo[k]);
        }
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((c, lo), hi) in x.iter_mut().zip(&self.lo).zip(&self.hi) {
            *c = c.clamp(*lo, *hi);
        }
    }

    /// All `2^d` corners followed by the center.
    pub fn corners_and_center(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = Vec::with_capacity((1 << d) + 1);
        for mask in 0..(1usize << d) {
            out.push((0..d).map(|k| if mask >> k & 1 == 1 { self.hi[k] } else { self.lo[k] }).collect());
        }
        out.push((0..d).map(|k| 0.5 * (self.lo[k] + self.hi[k])).collect());
        out
    }
}

/// A real-valued function on `R^d` with an optional analytic gradient and
/// optional compact support box.
///
/// Outside the support box (when present) the value and gradient are exactly 0.
/// Without an analytic gradient a central finite difference with step
/// `h = fd_scale * (1 + |x|)` is used on every axis.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradFn>>,
    support: Option<AxisBox>,
    breaks: Vec<Vec<f64>>,
    label: String,
    fd_scale: f64,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("analytic_gradient", &self.gradient.is_some())
            .field("support", &self.support)
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(dim: usize, label: impl Into<String>, value: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        assert!(dim > 0, "dimension must be positive");
        Self {
            dim,
            value: Arc::new(value),
            gradient: None,
            support: None,
            breaks: vec![Vec::new(); dim],
            label: label.into(),
            fd_scale: DEFAULT_FD_SCALE,
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(dim, format!("const({c})"), move |_| c).with_gradient(|_, g| g.fill(0.0))
    }

    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn without_gradient(mut self) -> Self {
        self.gradient = None;
        self
    }

    pub fn with_support(mut self, support: AxisBox) -> Self {
        assert_eq!(support.dim(), self.dim, "support dimension");
        self.support = Some(support);
        self
    }

    /// Adds per-axis coordinates where the field (or its gradient) is not smooth.
    /// Quadrature uses them as panel boundaries.
    pub fn with_breaks(mut self, breaks: Vec<Vec<f64>>) -> Self {
        assert_eq!(breaks.len(), self.dim, "one break list per axis");
        for (mine, extra) in self.breaks.iter_mut().zip(breaks) {
            mine.extend(extra);
            mine.sort_by(|a, b| a.partial_cmp(b).unwrap());
            mine.dedup();
        }
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_fd_scale(mut self, scale: f64) -> Self {
        self.fd_scale = scale;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support(&self) -> Option<&AxisBox> {
        self.support.as_ref()
    }

    pub fn breaks(&self) -> &[Vec<f64>] {
        &self.breaks
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub(crate) fn shared_value(&self) -> Arc<ValueFn> {
        Arc::clone(&self.value)
    }

    pub(crate) fn shared_gradient(&self) -> Option<Arc<GradFn>> {
        self.gradient.clone()
    }

    fn outside(&self, x: &[f64]) -> bool {
        self.support.as_ref().is_some_and(|s| !s.contains(x))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        if self.outside(x) {
            0.0
        } else {
            (self.value)(x)
        }
    }

    /// Writes `∇f(x)` into `out`; analytic when available, otherwise central differences.
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        if self.outside(x) {
            out.fill(0.0);
            return;
        }
        match &self.gradient {
            Some(g) => g(x, out),
            None => self.fd_gradient(x, out),
        }
    }

    pub fn fd_step(&self, x: &[f64]) -> f64 {
        self.fd_scale * (1.0 + norm2(x))
    }

    /// Central finite-difference gradient, regardless of any analytic gradient.
    pub fn fd_gradient(&self, x: &[f64], out: &mut [f64]) {
        let h = self.fd_step(x);
        let mut stack = [0.0; 8];
        let mut heap = Vec::new();
        let y = scratch(self.dim, &mut stack, &mut heap);
        y.copy_from_slice(x);
        for k in 0..self.dim {
            y[k] = x[k] + h;
            let fp = self.value(y);
            y[k] = x[k] - h;
            let fm = self.value(y);
            y[k] = x[k];
            out[k] = (fp - fm) / (2.0 * h);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_box_rejected() {
        assert!(matches!(AxisBox::new(vec![1.0], vec![1.0]), Err(LabError::EmptyBox { .. })));
        assert!(AxisBox::new(vec![0.0, 2.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn support_zeroes_value_and_gradient() {
        let f = ScalarField::new(1, "x", |x| x[0])
            .with_gradient(|_, g| g[0] = 1.0)
            .with_support(AxisBox::cube(1, 1.0).unwrap());
        assert_eq!(f.value(&[0.5]), 0.5);
        assert_eq!(f.value(&[1.5]), 0.0);
        let mut g = [9.0];
        f.gradient(&[-3.0], &mut g);
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn fd_fallback_matches_polynomial() {
        let f = ScalarField::new(2, "p", |x| x[0] * x[0] + 3.0 * x[1]);
        let mut g = [0.0; 2];
        f.gradient(&[0.7, -2.0], &mut g);
        assert!((g[0] - 1.4).abs() < 1e-8);
        assert!((g[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn corners_and_center() {
        let b = AxisBox::new(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap();
        let pts = b.corners_and_center();
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[4], vec![0.0, 1.0]);
    }
}
