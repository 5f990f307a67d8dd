//! Weighted Lebesgue and Sobolev norms, the `|∇log r_ω|` seminorm, `M(θ,q)`
//! and the Hölder embedding check.
//!
//! Gradient parts use the component-wise sum `Σ_k ∫|∂_kφ|^p ω`, while
//! `|∇log r_ω|` is always the Euclidean length.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::fields::TestFunction;
use crate::quadrature::{integrate, IntegralResult, QuadratureSpec, Region, Status};
use crate::weights::{norm2, scratch, ScalarField, Weight, WeightPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormKind {
    Lp,
    W1p,
    Wcal,
    Seminorm,
    Mtq,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub kind: NormKind,
    pub exponent: f64,
    pub value: f64,
    pub components: BTreeMap<String, f64>,
    pub status: Status,
    pub integrals: BTreeMap<String, IntegralResult>,
}

impl NormReport {
    fn from_parts(kind: NormKind, exponent: f64, parts: Vec<(&str, IntegralResult)>) -> Self {
        let mut status = Status::Converged;
        let mut total = 0.0;
        let mut components = BTreeMap::new();
        let mut integrals = BTreeMap::new();
        for (name, r) in parts {
            status = status.combine(r.status);
            total += r.value;
            components.insert(name.to_string(), r.value.max(0.0).powf(1.0 / exponent));
            integrals.insert(name.to_string(), r);
        }
        Self { kind, exponent, value: total.max(0.0).powf(1.0 / exponent), components, status, integrals }
    }

    /// `value^p`.
    pub fn powered(&self) -> f64 {
        self.value.powf(self.exponent)
    }
}

/// Outcome of a sampled inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub status: Status,
}

impl InequalityCheck {
    pub fn new(lhs: f64, rhs: f64, rel_slack: f64, status: Status) -> Self {
        Self { lhs, rhs, holds: lhs <= rhs + rel_slack * rhs.abs(), status }
    }

    /// `Some(holds)` unless an input diverged.
    pub fn verdict(&self) -> Option<bool> {
        (self.status != Status::Divergent).then_some(self.holds)
    }

    pub fn ratio(&self) -> f64 {
        if self.rhs == 0.0 {
            if self.lhs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.lhs / self.rhs
        }
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(LabError::InvalidParameter(format!("exponent must lie in [1, inf), got {p}")));
    }
    Ok(())
}

pub(crate) fn check_theta_open(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(LabError::InvalidParameter(format!("theta must lie in (0, 1), got {theta}")));
    }
    Ok(())
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(LabError::DimensionMismatch { expected: a, got: b });
    }
    Ok(())
}

fn region_for(f: &ScalarField, w: &Weight) -> Region {
    Region::of_field(f).with_breaks(w.log_field().breaks())
}

/// `(∫ |φ|^p ω dx)^{1/p}`.
pub fn lp_norm(phi: &ScalarField, w: &Weight, p: f64, spec: &QuadratureSpec) -> Result<NormReport> {
    check_exponent(p)?;
    check_dims(phi.dim(), w.dim())?;
    let r = integrate(phi.dim(), |x| phi.value(x).abs().powf(p) * w.value(x), &region_for(phi, w), spec)?;
    Ok(NormReport::from_parts(NormKind::Lp, p, vec![("function", r)]))
}

/// `(Σ_i ∫ |F_i|^p ω dx)^{1/p}` for a vector field writing its components into the buffer.
pub fn lp_norm_vector<F>(dim: usize, components: usize, f: F, region: &Region, w: &Weight, p: f64, spec: &QuadratureSpec) -> Result<NormReport>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    check_exponent(p)?;
    check_dims(dim, w.dim())?;
    let region = region.clone().with_breaks(w.log_field().breaks());
    let r = integrate(
        dim,
        |x| {
            let mut s = [0.0; 8];
            let mut h = Vec::new();
            let v = scratch(components, &mut s, &mut h);
            f(x, v);
            v.iter().map(|c| c.abs().powf(p)).sum::<f64>() * w.value(x)
        },
        &region,
        spec,
    )?;
    Ok(NormReport::from_parts(NormKind::Lp, p, vec![("function", r)]))
}

fn gradient_part(phi: &TestFunction, w: &Weight, p: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
    integrate(
        phi.dim(),
        |x| {
            let mut s = [0.0; 8];
            let mut h = Vec::new();
            let g = scratch(x.len(), &mut s, &mut h);
            phi.gradient(x, g);
            g.iter().map(|c| c.abs().powf(p)).sum::<f64>() * w.value(x)
        },
        &region_for(phi.field(), w),
        spec,
    )
}

/// `(‖φ‖^p_{L^p(ω)} + ‖∇φ‖^p_{L^p(ω)})^{1/p}`.
pub fn w1p_norm(phi: &TestFunction, w: &Weight, p: f64, spec: &QuadratureSpec) -> Result<NormReport> {
    let f = lp_norm(phi.field(), w, p, spec)?;
    let g = gradient_part(phi, w, p, spec)?;
    let f = f.integrals.into_values().next().expect("function part");
    Ok(NormReport::from_parts(NormKind::W1p, p, vec![("function", f), ("gradient", g)]))
}

fn seminorm_integral(phi: &TestFunction, pair: &WeightPair, w_theta: &Weight, p: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
    let region = region_for(phi.field(), w_theta).with_breaks(pair.weight(0).log_field().breaks());
    integrate(
        phi.dim(),
        |x| {
            let v = phi.value(x);
            if v == 0.0 {
                return 0.0;
            }
            let mut s = [0.0; 8];
            let mut h = Vec::new();
            let g = scratch(x.len(), &mut s, &mut h);
            pair.log_ratio_grad(x, g);
            (v.abs() * norm2(g)).powf(p) * w_theta.value(x)
        },
        &region,
        spec,
    )
}

/// `(∫ |φ|^p |∇log r_ω|^p ω_θ dx)^{1/p}`.
pub fn grad_seminorm(phi: &TestFunction, pair: &WeightPair, theta: f64, p: f64, spec: &QuadratureSpec) -> Result<NormReport> {
    check_exponent(p)?;
    check_theta_open(theta)?;
    check_dims(phi.dim(), pair.dim())?;
    let w_theta = pair.omega_theta(theta)?;
    let r = seminorm_integral(phi, pair, &w_theta, p, spec)?;
    Ok(NormReport::from_parts(NormKind::Seminorm, p, vec![("seminorm", r)]))
}

/// `(‖φ‖^p_{W^{1,p}(ω_θ)} + ‖φ∇log r_ω‖^p_{L^p(ω_θ)})^{1/p}`.
pub fn wcal_norm(phi: &TestFunction, pair: &WeightPair, theta: f64, p: f64, spec: &QuadratureSpec) -> Result<NormReport> {
    check_theta_open(theta)?;
    check_dims(phi.dim(), pair.dim())?;
    let w_theta = pair.omega_theta(theta)?;
    let w = w1p_norm(phi, &w_theta, p, spec)?;
    let s = seminorm_integral(phi, pair, &w_theta, p, spec)?;
    let mut parts: Vec<(&str, IntegralResult)> = Vec::new();
    let mut ints = w.integrals.into_iter();
    let (_, f) = ints.next().expect("function part");
    let (_, g) = ints.next().expect("gradient part");
    parts.push(("function", f));
    parts.push(("gradient", g));
    parts.push(("seminorm", s));
    Ok(NormReport::from_parts(NormKind::Wcal, p, parts))
}

/// `M(θ,q) = (∫ |∇log r_ω|^q ω_θ dx)^{1/q}` over `R^d`, with `θ ∈ [0,1]`.
pub fn m_theta_q(pair: &WeightPair, theta: f64, q: f64, spec: &QuadratureSpec) -> Result<NormReport> {
    check_exponent(q)?;
    let w_theta = pair.omega_theta_closed(theta)?;
    let region = Region::whole()
        .with_breaks(pair.weight(0).log_field().breaks())
        .with_breaks(pair.weight(1).log_field().breaks());
    let r = integrate(
        pair.dim(),
        |x| {
            let mut s = [0.0; 8];
            let mut h = Vec::new();
            let g = scratch(x.len(), &mut s, &mut h);
            pair.log_ratio_grad(x, g);
            let n = norm2(g);
            if n == 0.0 {
                0.0
            } else {
                n.powf(q) * w_theta.value(x)
            }
        },
        &region,
        spec,
    )?;
    Ok(NormReport::from_parts(NormKind::Mtq, q, vec![("moment", r)]))
}

/// `‖φ∇log r_ω‖_{L^p(ω_θ)} ≤ M(θ,q)·‖φ‖_{L^{qp/(q−p)}(ω_θ)}`.
pub fn holder_embedding_check(
    phi: &TestFunction,
    pair: &WeightPair,
    theta: f64,
    p: f64,
    q: f64,
    spec: &QuadratureSpec,
    whole_spec: &QuadratureSpec,
) -> Result<InequalityCheck> {
    if !(q > p) {
        return Err(LabError::InvalidParameter(format!("need q > p, got q = {q}, p = {p}")));
    }
    let semi = grad_seminorm(phi, pair, theta, p, spec)?;
    let m = m_theta_q(pair, theta, q, whole_spec)?;
    let w_theta = pair.omega_theta(theta)?;
    let conj = q * p / (q - p);
    let l = lp_norm(phi.field(), &w_theta, conj, spec)?;
    let status = semi.status.combine(m.status).combine(l.status);
    let status = if m.status != Status::Converged && status != Status::Divergent { Status::Inconclusive } else { status };
    Ok(InequalityCheck::new(semi.value, m.value * l.value, 1e-8, status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_bump, make_hat};
    use crate::weights::parse_weight;

    fn spec1() -> QuadratureSpec {
        QuadratureSpec::default_for(1)
    }

    fn pair(a: &str, b: &str, d: usize) -> WeightPair {
        WeightPair::new(parse_weight(a, d).unwrap(), parse_weight(b, d).unwrap()).unwrap()
    }

    #[test]
    fn bump_l1_and_w12() {
        let b = make_bump(&[0.0], 1.0, 1.0).unwrap();
        let one = parse_weight("one", 1).unwrap();
        let l1 = lp_norm(b.field(), &one, 1.0, &spec1()).unwrap();
        assert!((l1.value - 16.0 / 15.0).abs() < 1e-12);
        // ∫(1−x²)⁴ = 256/315, ∫16x²(1−x²)² = 256/105
        let w = w1p_norm(&b, &one, 2.0, &spec1()).unwrap();
        let exact = (256.0 / 315.0 + 256.0 / 105.0f64).sqrt();
        assert!((w.value - exact).abs() < 1e-8 * exact);
        let f = w.components["function"];
        let g = w.components["gradient"];
        assert!((w.value.powi(2) - f * f - g * g).abs() < 1e-12 * w.value.powi(2));
    }

    #[test]
    fn exp_lin_seminorm_is_twice_lp() {
        let b = make_bump(&[0.3], 1.0, 1.0).unwrap();
        let pr = pair("one", "exp_lin:a=2", 1);
        let s = grad_seminorm(&b, &pr, 0.5, 1.0, &spec1()).unwrap();
        let wt = pr.omega_theta(0.5).unwrap();
        let l = lp_norm(b.field(), &wt, 1.0, &spec1()).unwrap();
        assert!((s.value - 2.0 * l.value).abs() < 1e-12 * s.value);
        let trivial = grad_seminorm(&b, &pair("one", "one", 1), 0.5, 2.0, &spec1()).unwrap();
        assert_eq!(trivial.value, 0.0);
    }

    #[test]
    fn m_theta_q_gaussian_moment() {
        let pr = pair("one", "gauss:a=1", 1);
        let m = m_theta_q(&pr, 0.5, 2.0, &spec1()).unwrap();
        let exact = (4.0 * (2.0 * std::f64::consts::PI).sqrt()).sqrt();
        assert_eq!(m.status, Status::Converged);
        assert!((m.value - exact).abs() < 1e-9 * exact);
        let div = m_theta_q(&pair("one", "exp_lin:a=1", 1), 0.0, 1.0, &spec1()).unwrap();
        assert_eq!(div.status, Status::Divergent);
    }

    #[test]
    fn holder_holds_for_gauss() {
        let b = make_bump(&[0.0], 1.0, 1.0).unwrap();
        let pr = pair("one", "gauss:a=1", 1);
        let c = holder_embedding_check(&b, &pr, 0.5, 1.0, 2.0, &spec1(), &spec1()).unwrap();
        assert_eq!(c.verdict(), Some(true));
        assert!(c.ratio() < 1.0);
    }

    #[test]
    fn domination_and_homogeneity() {
        let h = make_hat(&[0.0], 1.0, 0.5, 1.0).unwrap();
        let one = parse_weight("one", 1).unwrap();
        let g = parse_weight("gauss:a=1", 1).unwrap();
        let a = lp_norm(h.field(), &g, 2.0, &spec1()).unwrap();
        let b = lp_norm(h.field(), &one, 2.0, &spec1()).unwrap();
        assert!(a.value <= b.value);
        let two = one.scaled(2.0).unwrap();
        let w1 = w1p_norm(&h, &one, 1.0, &spec1()).unwrap();
        let w2 = w1p_norm(&h, &two, 1.0, &spec1()).unwrap();
        assert!((w2.value - 2.0 * w1.value).abs() < 1e-14 * w2.value);
    }
}
