use super::field::{norm2, scratch, ScalarField};
use crate::error::{LabError, Result};
use crate::sampling::Halton;

/// A strictly positive weight function, stored through its logarithm.
///
/// Keeping `ln ω` rather than `ω` makes ratios, powers and the interpolation
/// weight `ω₀^{1−θ}ω₁^θ` exact in log space and avoids overflow of `r_ω`
/// where one of the weights underflows.
#[derive(Clone, Debug)]
pub struct Weight {
    log: ScalarField,
}

/// Probe points used by the positivity check on construction.
fn probe_points(dim: usize) -> Vec<Vec<f64>> {
    if dim <= 3 {
        let ticks: Vec<f64> = (0..9).map(|i| -4.0 + i as f64).chain([0.37, 2.5, 6.1]).collect();
        let mut pts = vec![Vec::new()];
        for _ in 0..dim {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    ticks.iter().map(move |t| {
                        let mut q = p.clone();
                        q.push(*t);
                        q
                    })
                })
                .collect();
        }
        pts
    } else {
        let mut h = Halton::new(dim.min(12), 0);
        let mut u = vec![0.0; dim];
        (0..1024)
            .map(|_| {
                h.next_point(&mut u);
                u.iter().map(|v| 8.0 * v - 4.0).collect()
            })
            .collect()
    }
}

impl Weight {
    /// Builds a weight from `ln ω`, checking positivity (finite logarithm) on a probe grid.
    pub fn from_log(log: ScalarField) -> Result<Self> {
        for x in probe_points(log.dim()) {
            let v = log.value(&x);
            if !v.is_finite() {
                return Err(LabError::NotPositive { label: log.label().to_string(), point: x });
            }
        }
        Ok(Self { log })
    }

    pub(crate) fn from_log_unchecked(log: ScalarField) -> Self {
        Self { log }
    }

    pub fn dim(&self) -> usize {
        self.log.dim()
    }

    pub fn label(&self) -> &str {
        self.log.label()
    }

    pub fn log_field(&self) -> &ScalarField {
        &self.log
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.log.has_analytic_gradient()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.log.value(x).exp()
    }

    pub fn log_value(&self, x: &[f64]) -> f64 {
        self.log.value(x)
    }

    /// `∇ ln ω(x) = ∇ω(x) / ω(x)`.
    pub fn log_gradient(&self, x: &[f64], out: &mut [f64]) {
        self.log.gradient(x, out);
    }

    /// `∇ω(x)`.
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.log.gradient(x, out);
        let w = self.value(x);
        out.iter_mut().for_each(|g| *g *= w);
    }

    /// The weight as an ordinary scalar field `x ↦ ω(x)`.
    pub fn field(&self) -> ScalarField {
        let lv = self.log.shared_value();
        let f = ScalarField::new(self.dim(), self.label().to_string(), move |x| lv(x).exp());
        match self.log.shared_gradient() {
            Some(lg) => {
                let lv = self.log.shared_value();
                f.with_gradient(move |x, out| {
                    lg(x, out);
                    let w = lv(x).exp();
                    out.iter_mut().for_each(|g| *g *= w);
                })
            }
            None => f,
        }
    }

    /// `ω^s`.
    pub fn pow(&self, s: f64) -> Weight {
        self.affine_log(s, 0.0, format!("({})^{s}", self.label()))
    }

    /// `c·ω` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Weight> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(LabError::InvalidParameter(format!("scale factor must be positive, got {c}")));
        }
        Ok(self.affine_log(1.0, c.ln(), format!("{c}*{}", self.label())))
    }

    fn affine_log(&self, s: f64, shift: f64, label: String) -> Weight {
        let lv = self.log.shared_value();
        let log = ScalarField::new(self.dim(), label, move |x| s * lv(x) + shift)
            .with_breaks(self.log.breaks().to_vec());
        let log = match self.log.shared_gradient() {
            Some(lg) => log.with_gradient(move |x, out| {
                lg(x, out);
                out.iter_mut().for_each(|g| *g *= s);
            }),
            None => log,
        };
        Weight::from_log_unchecked(log)
    }

    /// `ω^a · η^b`, computed in log space.
    pub fn log_combination(&self, a: f64, other: &Weight, b: f64) -> Result<Weight> {
        if other.dim() != self.dim() {
            return Err(LabError::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let (l0, l1) = (self.log.shared_value(), other.log.shared_value());
        let label = format!("({})^{a}*({})^{b}", self.label(), other.label());
        let mut breaks = self.log.breaks().to_vec();
        for (mine, theirs) in breaks.iter_mut().zip(other.log.breaks()) {
            mine.extend(theirs.iter().copied());
        }
        let log = ScalarField::new(self.dim(), label, move |x| {
            let (u, v) = (l0(x), l1(x));
            // skip a zero-coefficient term so it cannot leak a NaN
            match (a == 0.0, b == 0.0) {
                (true, true) => 0.0,
                (true, false) => b * v,
                (false, true) => a * u,
                (false, false) => a * u + b * v,
            }
        })
        .with_breaks(breaks);
        let log = match (self.log.shared_gradient(), other.log.shared_gradient()) {
            (Some(g0), Some(g1)) => {
                let d = self.dim();
                log.with_gradient(move |x, out| {
                    let mut stack = [0.0; 8];
                    let mut heap = Vec::new();
                    let tmp = scratch(d, &mut stack, &mut heap);
                    g0(x, out);
                    g1(x, tmp);
                    for k in 0..d {
                        out[k] = a * out[k] + b * tmp[k];
                    }
                })
            }
            _ => log,
        };
        Ok(Weight::from_log_unchecked(log))
    }

    pub fn product(&self, other: &Weight) -> Result<Weight> {
        self.log_combination(1.0, other, 1.0)
    }

    pub fn quotient(&self, other: &Weight) -> Result<Weight> {
        self.log_combination(1.0, other, -1.0)
    }
}

/// Two weights `(ω₀, ω₁)` on the same `R^d`.
#[derive(Clone, Debug)]
pub struct WeightPair {
    pub w0: Weight,
    pub w1: Weight,
}

impl WeightPair {
    pub fn new(w0: Weight, w1: Weight) -> Result<Self> {
        if w0.dim() != w1.dim() {
            return Err(LabError::DimensionMismatch { expected: w0.dim(), got: w1.dim() });
        }
        Ok(Self { w0, w1 })
    }

    pub fn dim(&self) -> usize {
        self.w0.dim()
    }

    pub fn label(&self) -> String {
        format!("({}, {})", self.w0.label(), self.w1.label())
    }

    /// `(ω₁, ω₀)`.
    pub fn swapped(&self) -> WeightPair {
        WeightPair { w0: self.w1.clone(), w1: self.w0.clone() }
    }

    pub fn weight(&self, j: usize) -> &Weight {
        if j == 0 {
            &self.w0
        } else {
            &self.w1
        }
    }

    /// `ln r_ω(x) = ln ω₀(x) − ln ω₁(x)`.
    pub fn log_ratio(&self, x: &[f64]) -> f64 {
        self.w0.log_value(x) - self.w1.log_value(x)
    }

    /// `r_ω(x) = ω₀(x) / ω₁(x)`.
    pub fn ratio(&self, x: &[f64]) -> f64 {
        self.log_ratio(x).exp()
    }

    /// `ln r_ω` as a scalar field, with gradient `∇ln ω₀ − ∇ln ω₁`.
    pub fn log_ratio_field(&self) -> ScalarField {
        let r = self.w0.quotient(&self.w1).expect("pair dimensions already checked");
        r.log.with_label(format!("log r[{}]", self.label()))
    }

    /// `∇ log r_ω(x)`, written into `out`.
    pub fn log_ratio_grad(&self, x: &[f64], out: &mut [f64]) {
        let mut stack = [0.0; 8];
        let mut heap = Vec::new();
        let tmp = scratch(self.dim(), &mut stack, &mut heap);
        self.w0.log_gradient(x, out);
        self.w1.log_gradient(x, tmp);
        out.iter_mut().zip(tmp.iter()).for_each(|(a, b)| *a -= b);
    }

    /// `ω_θ = ω₀^{1−θ} ω₁^θ` for `θ ∈ (0,1)`.
    pub fn omega_theta(&self, theta: f64) -> Result<Weight> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(LabError::InvalidParameter(format!("theta must lie in (0,1), got {theta}")));
        }
        self.omega_theta_closed(theta)
    }

    /// `ω_θ` for `θ ∈ [0,1]`; the endpoints return `ω₀` and `ω₁`.
    pub fn omega_theta_closed(&self, theta: f64) -> Result<Weight> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(LabError::InvalidParameter(format!("theta must lie in [0,1], got {theta}")));
        }
        if theta == 0.0 {
            return Ok(self.w0.clone());
        }
        if theta == 1.0 {
            return Ok(self.w1.clone());
        }
        let w = self.w0.log_combination(1.0 - theta, &self.w1, theta)?;
        let label = format!("omega_{theta}[{}]", self.label());
        Ok(Weight::from_log_unchecked(w.log.with_label(label)))
    }
}

/// `|∇ log r_ω(x)|` (Euclidean length).
pub fn log_ratio_grad_norm(pair: &WeightPair, x: &[f64], scratch: &mut [f64]) -> f64 {
    pair.log_ratio_grad(x, scratch);
    norm2(scratch)
}
