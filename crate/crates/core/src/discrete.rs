//! Interpolation on finite weighted measure spaces, where every norm is an
//! exact finite sum.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::norms::{check_exponent, check_theta_open, InequalityCheck};
use crate::par;
use crate::quadrature::Status;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteCouple {
    pub w0: Vec<f64>,
    pub w1: Vec<f64>,
    pub p0: f64,
    pub p1: f64,
}

impl DiscreteCouple {
    pub fn new(w0: Vec<f64>, w1: Vec<f64>, p0: f64, p1: f64) -> Result<Self> {
        if w0.is_empty() || w0.len() != w1.len() {
            return Err(LabError::DimensionMismatch { expected: w0.len(), got: w1.len() });
        }
        if let Some(bad) = w0.iter().chain(&w1).find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(LabError::InvalidParameter(format!("discrete weights must be positive and finite, got {bad}")));
        }
        check_exponent(p0)?;
        check_exponent(p1)?;
        Ok(Self { w0, w1, p0, p1 })
    }

    pub fn len(&self) -> usize {
        self.w0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w0.is_empty()
    }
}

/// `1/p_θ = (1−θ)/p₀ + θ/p₁` and `w_θ^{1/p_θ} = w₀^{(1−θ)/p₀} w₁^{θ/p₁}`.
pub fn sw_weight(couple: &DiscreteCouple, theta: f64) -> Result<(f64, Vec<f64>)> {
    check_theta_open(theta)?;
    let inv = (1.0 - theta) / couple.p0 + theta / couple.p1;
    let p = 1.0 / inv;
    let w = couple
        .w0
        .iter()
        .zip(&couple.w1)
        .map(|(a, b)| (p * ((1.0 - theta) / couple.p0 * a.ln() + theta / couple.p1 * b.ln())).exp())
        .collect();
    Ok((p, w))
}

/// `(Σ |φ_i|^p w_i)^{1/p}`.
pub fn weighted_lp(phi: &[Complex64], w: &[f64], p: f64) -> f64 {
    phi.iter().zip(w).map(|(f, wi)| f.norm().powf(p) * wi).sum::<f64>().powf(1.0 / p)
}

/// Times at which boundary norms of explicit families are evaluated.
pub const BOUNDARY_TIMES: [f64; 4] = [0.0, 0.5, 2.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EqualityCheck {
    pub target: f64,
    pub achieved: f64,
}

impl EqualityCheck {
    pub fn rel_error(&self) -> f64 {
        if self.target == 0.0 {
            self.achieved.abs()
        } else {
            (self.target - self.achieved).abs() / self.target
        }
    }
}

/// Compares `‖φ‖_{ℓ^p(w_θ)}` with the F-norm of `f(z) = φ·(w₀/w₁)^{(z−θ)/p}`,
/// whose boundary norms are evaluated on both lines at [`BOUNDARY_TIMES`].
pub fn sw_equality_check(couple: &DiscreteCouple, theta: f64, phi: &[Complex64]) -> Result<EqualityCheck> {
    if couple.p0 != couple.p1 {
        return Err(LabError::InvalidParameter("equality check needs p0 = p1".into()));
    }
    if phi.len() != couple.len() {
        return Err(LabError::DimensionMismatch { expected: couple.len(), got: phi.len() });
    }
    let p = couple.p0;
    let (_, w_theta) = sw_weight(couple, theta)?;
    let target = weighted_lp(phi, &w_theta, p);
    let log_r: Vec<f64> = couple.w0.iter().zip(&couple.w1).map(|(a, b)| a.ln() - b.ln()).collect();
    let mut achieved: f64 = 0.0;
    for j in 0..2 {
        let w = if j == 0 { &couple.w0 } else { &couple.w1 };
        for &t in &BOUNDARY_TIMES {
            let z = Complex64::new(j as f64, t);
            let f: Vec<Complex64> = phi.iter().zip(&log_r).map(|(v, lr)| v * ((z - theta) / p * lr).exp()).collect();
            achieved = achieved.max(weighted_lp(&f, w, p));
        }
    }
    Ok(EqualityCheck { target, achieved })
}

/// Boundary norms of the explicit family for mixed exponents,
/// `f_i(z) = ‖φ‖^{1−pα(z)} sgn φ_i |φ_i|^{pα(z)} w_θ^{α(z)} w₀^{−(1−z)/p₀} w₁^{−z/p₁}`
/// with `α(z) = (1−z)/p₀ + z/p₁`. Returns the target `‖φ‖_{ℓ^{p_θ}(w_θ)}` and the
/// largest boundary norm; the family passes through `φ` at `z = θ`.
pub fn calderon_family_check(couple: &DiscreteCouple, theta: f64, phi: &[Complex64]) -> Result<EqualityCheck> {
    if phi.len() != couple.len() {
        return Err(LabError::DimensionMismatch { expected: couple.len(), got: phi.len() });
    }
    let (p, w_theta) = sw_weight(couple, theta)?;
    let target = weighted_lp(phi, &w_theta, p);
    if target == 0.0 {
        return Ok(EqualityCheck { target, achieved: 0.0 });
    }
    let (p0, p1) = (couple.p0, couple.p1);
    let family = |z: Complex64| -> Vec<Complex64> {
        let alpha = (1.0 - z) / p0 + z / p1;
        phi.iter()
            .enumerate()
            .map(|(i, v)| {
                let m = v.norm();
                if m == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let log = (1.0 - p * alpha) * target.ln()
                    + p * alpha * m.ln()
                    + alpha * w_theta[i].ln()
                    - (1.0 - z) / p0 * couple.w0[i].ln()
                    - z / p1 * couple.w1[i].ln();
                (v / m) * log.exp()
            })
            .collect()
    };
    let mut achieved: f64 = 0.0;
    for j in 0..2 {
        let (w, pj) = if j == 0 { (&couple.w0, p0) } else { (&couple.w1, p1) };
        for &t in &BOUNDARY_TIMES {
            achieved = achieved.max(weighted_lp(&family(Complex64::new(j as f64, t)), w, pj));
        }
    }
    let at_theta = family(Complex64::new(theta, 0.0));
    let miss = at_theta.iter().zip(phi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let scale = phi.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if miss > 1e-9 * scale {
        return Err(LabError::InvalidParameter(format!("family misses phi at theta by {miss}")));
    }
    Ok(EqualityCheck { target, achieved })
}

/// Induced norm on `ℓ¹(w)`: `max_j (1/w_j) Σ_i |T_ij| w_i`.
pub fn weighted_l1_opnorm(t: &DMatrix<f64>, w: &[f64]) -> Result<f64> {
    if t.nrows() != w.len() || t.ncols() != w.len() {
        return Err(LabError::DimensionMismatch { expected: w.len(), got: t.nrows().max(t.ncols()) });
    }
    let mut best: f64 = 0.0;
    for j in 0..t.ncols() {
        let col: f64 = (0..t.nrows()).map(|i| t[(i, j)].abs() * w[i]).sum();
        best = best.max(col / w[j]);
    }
    Ok(best)
}

/// `‖T‖_{ℓ¹(w_θ)} ≤ ‖T‖_{ℓ¹(w₀)}^{1−θ} ‖T‖_{ℓ¹(w₁)}^θ` with absolute slack `1e-12`.
pub fn opnorm_interpolation_check(t: &DMatrix<f64>, couple: &DiscreteCouple, theta: f64) -> Result<InequalityCheck> {
    if couple.p0 != 1.0 || couple.p1 != 1.0 {
        return Err(LabError::InvalidParameter("operator check needs p0 = p1 = 1".into()));
    }
    let (_, w_theta) = sw_weight(couple, theta)?;
    let lhs = weighted_l1_opnorm(t, &w_theta)?;
    let rhs = weighted_l1_opnorm(t, &couple.w0)?.powf(1.0 - theta) * weighted_l1_opnorm(t, &couple.w1)?.powf(theta);
    Ok(InequalityCheck { lhs, rhs, holds: lhs <= rhs + 1e-12, status: Status::Converged })
}

/// `e^{A}` by scaling and squaring with a Taylor series truncated at `1e-13`.
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() {
        return Err(LabError::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    let n = a.nrows();
    let norm1 = (0..n).map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    if !norm1.is_finite() {
        return Err(LabError::Overflow("generator has non-finite entries".into()));
    }
    let mut s = 0;
    while norm1 / 2f64.powi(s) > 0.5 {
        s += 1;
    }
    let scaled = a / 2f64.powi(s);
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=60 {
        term = &term * &scaled / k as f64;
        result += &term;
        let tn = term.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if tn <= 1e-13 * result.iter().map(|v| v.abs()).fold(0.0, f64::max) {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    if result.iter().any(|v| !v.is_finite()) {
        return Err(LabError::Overflow(format!("e^A overflowed after {s} squarings")));
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub t: f64,
    pub measured: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemigroupReport {
    pub theta: f64,
    pub t0: f64,
    pub rows: Vec<DecayRow>,
    pub all_hold: bool,
}

/// Checks `‖T(t)g‖_{ℓ¹(w_θ)} ≤ ‖T(t−t₀)‖_{w₀}^{1−θ}‖T(t−t₀)‖_{w₁}^θ ‖T(t₀)g‖_{ℓ¹(w_θ)}`
/// for `T(t) = e^{tL}` at every requested time.
pub fn semigroup_decay_study(
    l: &DMatrix<f64>,
    w0: &[f64],
    w1: &[f64],
    theta: f64,
    t0: f64,
    times: &[f64],
    g: &[f64],
) -> Result<SemigroupReport> {
    let couple = DiscreteCouple::new(w0.to_vec(), w1.to_vec(), 1.0, 1.0)?;
    if g.len() != couple.len() || l.nrows() != couple.len() {
        return Err(LabError::DimensionMismatch { expected: couple.len(), got: g.len() });
    }
    if !(t0 > 0.0) {
        return Err(LabError::InvalidParameter(format!("t0 must be positive, got {t0}")));
    }
    if let Some(t) = times.iter().find(|t| !(**t > t0)) {
        return Err(LabError::InvalidParameter(format!("times must exceed t0 = {t0}, got {t}")));
    }
    let (_, w_theta) = sw_weight(&couple, theta)?;
    let gv = nalgebra::DVector::from_column_slice(g);
    let l1 = |v: &nalgebra::DVector<f64>| v.iter().zip(&w_theta).map(|(a, w)| a.abs() * w).sum::<f64>();
    let head = l1(&(expm(&(l * t0))? * &gv));
    let rows = times
        .iter()
        .map(|&t| -> Result<DecayRow> {
            let measured = l1(&(expm(&(l * t))? * &gv));
            let tail = expm(&(l * (t - t0)))?;
            let bound = weighted_l1_opnorm(&tail, w0)?.powf(1.0 - theta) * weighted_l1_opnorm(&tail, w1)?.powf(theta) * head;
            Ok(DecayRow { t, measured, bound, holds: measured <= bound * (1.0 + 1e-10) + 1e-300 })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_hold = rows.iter().all(|r| r.holds);
    Ok(SemigroupReport { theta, t0, rows, all_hold })
}

/// Tridiagonal `(1, −2, 1)` Laplacian with Dirichlet ends.
pub fn laplacian_1d(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -2.0
        } else if i.abs_diff(j) == 1 {
            1.0
        } else {
            0.0
        }
    })
}

fn instance_rng(seed: u64, instance: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (instance as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| (rng.gen_range(-3.0..3.0f64)).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub instances: usize,
    pub failures: usize,
    pub worst: f64,
}

/// Random couples and random complex `φ`; `worst` is the largest relative gap
/// between target and achieved. Equal exponents use [`sw_equality_check`],
/// mixed ones [`calderon_family_check`].
pub fn sw_random_suite(n: usize, p0: f64, p1: f64, instances: usize, seed: u64, tol: f64) -> Result<SuiteSummary> {
    let results = par::map_collect(instances, |i| -> Result<f64> {
        let mut rng = instance_rng(seed, i);
        let couple = DiscreteCouple::new(random_weights(&mut rng, n), random_weights(&mut rng, n), p0, p1)?;
        let theta = rng.gen_range(0.05..0.95);
        let phi: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let check = if p0 == p1 { sw_equality_check(&couple, theta, &phi)? } else { calderon_family_check(&couple, theta, &phi)? };
        Ok(check.rel_error())
    });
    let errs = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SuiteSummary {
        instances,
        failures: errs.iter().filter(|e| **e > tol).count(),
        worst: errs.iter().copied().fold(0.0, f64::max),
    })
}

/// Random `n×n` matrices (nonnegative or signed) with random positive weights
/// checked at every `θ`; `worst` is the largest `lhs − rhs`.
pub fn opnorm_random_suite(n: usize, instances: usize, thetas: &[f64], signed: bool, seed: u64) -> Result<SuiteSummary> {
    let results = par::map_collect(instances, |i| -> Result<(usize, f64)> {
        let mut rng = instance_rng(seed, i);
        let lo = if signed { -1.0 } else { 0.0 };
        let t = DMatrix::from_fn(n, n, |_, _| rng.gen_range(lo..1.0));
        let couple = DiscreteCouple::new(random_weights(&mut rng, n), random_weights(&mut rng, n), 1.0, 1.0)?;
        let mut fails = 0;
        let mut worst = f64::NEG_INFINITY;
        for &theta in thetas {
            let c = opnorm_interpolation_check(&t, &couple, theta)?;
            if !c.holds {
                fails += 1;
            }
            worst = worst.max(c.lhs - c.rhs);
        }
        Ok((fails, worst))
    });
    let rs = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SuiteSummary {
        instances: instances * thetas.len(),
        failures: rs.iter().map(|r| r.0).sum(),
        worst: rs.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hand_example() {
        let couple = DiscreteCouple::new(vec![1.0, 4.0], vec![1.0, 1.0], 2.0, 2.0).unwrap();
        let (p, w) = sw_weight(&couple, 0.5).unwrap();
        assert_eq!(p, 2.0);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 2.0).abs() < 1e-15);
        let e = sw_equality_check(&couple, 0.5, &[c(1.0), c(1.0)]).unwrap();
        assert!((e.target - 3f64.sqrt()).abs() < 1e-12);
        assert!((e.achieved - 3f64.sqrt()).abs() < 1e-12);
        let z = sw_equality_check(&couple, 0.5, &[c(0.0), c(0.0)]).unwrap();
        assert_eq!((z.target, z.achieved), (0.0, 0.0));
    }

    #[test]
    fn mixed_exponent_weight() {
        let couple = DiscreteCouple::new(vec![2.0, 0.5], vec![3.0, 1.5], 1.0, 2.0).unwrap();
        let (p, w) = sw_weight(&couple, 0.5).unwrap();
        assert!((p - 4.0 / 3.0).abs() < 1e-15);
        for (i, wi) in w.iter().enumerate() {
            let direct = couple.w0[i].powf(0.5) * couple.w1[i].powf(0.25);
            assert!((wi.powf(1.0 / p) - direct).abs() < 1e-14);
        }
        let phi = [Complex64::new(0.3, -0.4), c(1.2)];
        let e = calderon_family_check(&couple, 0.5, &phi).unwrap();
        assert!(e.rel_error() < 1e-12, "{e:?}");
    }

    #[test]
    fn opnorm_examples() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(weighted_l1_opnorm(&id, &[1.0, 5.0, 0.1]).unwrap(), 1.0);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0]));
        assert_eq!(weighted_l1_opnorm(&d, &[1.0, 1.0]).unwrap(), 3.0);
    }

    #[test]
    fn expm_scalar_and_zero() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(expm(&z).unwrap(), DMatrix::identity(3, 3));
        let m = expm(&(DMatrix::<f64>::identity(2, 2) * -1.5)).unwrap();
        assert!((m[(0, 0)] - (-1.5f64).exp()).abs() < 1e-14);
        assert!(m[(0, 1)] == 0.0);
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let r = expm(&rot).unwrap();
        assert!((r[(0, 0)] - 1f64.cos()).abs() < 1e-13 && (r[(1, 0)] - 1f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn semigroup_trivial_generators() {
        let g = [1.0, -2.0, 0.5];
        let w0 = [1.0, 2.0, 3.0];
        let w1 = [0.5, 0.25, 4.0];
        let r = semigroup_decay_study(&DMatrix::zeros(3, 3), &w0, &w1, 0.5, 0.5, &[1.0, 2.0], &g).unwrap();
        assert!(r.all_hold);
        for row in &r.rows {
            assert!((row.measured - row.bound).abs() < 1e-14 * row.bound);
        }
        let r = semigroup_decay_study(&(DMatrix::identity(3, 3) * -1.0), &w0, &w1, 0.3, 0.5, &[1.0, 3.0], &g).unwrap();
        assert!(r.all_hold);
    }
}
