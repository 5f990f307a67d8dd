//! Worked examples: the oscillatory counterexample weight, the appendix pair
//! `(1, e^{−√(1+|x|²)−sin(e^{|x|²})})`, and the homogeneous 1-D isometry.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::fields::{make_hat, TestFunction};
use crate::norms::{check_exponent, check_theta_open, grad_seminorm, lp_norm, w1p_norm, NormReport};
use crate::par;
use crate::quadrature::{integrate, integrate_radial_1d, IntegralResult, QuadratureSpec, Region, Status, TracePoint};
use crate::weights::{check_equivalence, estimate_lipschitz, make_catalog_weight, AxisBox, Weight, WeightPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Quadrature,
    Sampled,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub status: Status,
    pub source: Source,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TracePoint>,
}

impl Quantity {
    pub fn exact(value: f64) -> Self {
        Self { value, status: Status::Converged, source: Source::Exact, trace: Vec::new() }
    }

    pub fn sampled(value: f64) -> Self {
        Self { value, status: Status::Converged, source: Source::Sampled, trace: Vec::new() }
    }
}

impl From<IntegralResult> for Quantity {
    fn from(r: IntegralResult) -> Self {
        Self { value: r.value, status: r.status, source: Source::Quadrature, trace: r.trace }
    }
}

impl From<&NormReport> for Quantity {
    fn from(r: &NormReport) -> Self {
        Self { value: r.value, status: r.status, source: Source::Quadrature, trace: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub id: String,
    pub text: String,
    pub verdict: bool,
    pub backing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub quantities: BTreeMap<String, Quantity>,
    pub claims: Vec<Claim>,
}

impl StudyReport {
    fn new(study: &str) -> Self {
        Self { study: study.to_string(), quantities: BTreeMap::new(), claims: Vec::new() }
    }

    fn put(&mut self, name: impl Into<String>, q: impl Into<Quantity>) {
        self.quantities.insert(name.into(), q.into());
    }

    fn claim(&mut self, id: &str, text: &str, verdict: bool, backing: &[&str]) {
        debug_assert!(backing.iter().all(|b| self.quantities.contains_key(*b)), "{id} backed by missing quantity");
        self.claims.push(Claim {
            id: id.to_string(),
            text: text.to_string(),
            verdict,
            backing: backing.iter().map(|b| b.to_string()).collect(),
        });
    }

    pub fn quantity(&self, name: &str) -> Option<&Quantity> {
        self.quantities.get(name)
    }

    pub fn verdict(&self, id: &str) -> Option<bool> {
        self.claims.iter().find(|c| c.id == id).map(|c| c.verdict)
    }
}

/// `|S^{d−1}|`.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 2.0) * sphere_area(d - 2),
    }
}

fn osc_value(alpha: f64, beta: f64, r: f64) -> f64 {
    let q = 1.0 / (1.0 + r * r);
    q.powf(alpha) * (1.0 + r.powf(beta).sin() + q)
}

fn osc_radial_derivative(alpha: f64, beta: f64, r: f64) -> f64 {
    let q = 1.0 / (1.0 + r * r);
    let b = 1.0 + r.powf(beta).sin() + q;
    let db = beta * r.powf(beta - 1.0) * r.powf(beta).cos() - 2.0 * r * q * q;
    -2.0 * alpha * r * q.powf(alpha + 1.0) * b + q.powf(alpha) * db
}

fn one_d(lo: f64, hi: f64) -> Result<Region> {
    Ok(Region::compact(AxisBox::new(vec![lo], vec![hi])?))
}

/// `ω = (1+|x|²)^{−α}(1 + sin|x|^β + 1/(1+|x|²))`: integrability of `ω`, the
/// reduced gradient integral `∫₁^∞ y^{(d−1−2α)/β}|cos y| dy`, and for `d ≤ 3` a
/// direct-quadrature bracket of `∫|∇ω|^p ω^{1−p}` over `[−1,1]^d` between the
/// balls of radius 1 and `√d`.
pub fn counterexample_study(alpha: f64, beta: f64, d: usize, p: f64) -> Result<StudyReport> {
    if !(alpha > 0.0) || !(beta > 0.0) || d == 0 {
        return Err(LabError::InvalidParameter(format!("need alpha, beta > 0 and d >= 1, got ({alpha}, {beta}, {d})")));
    }
    check_exponent(p)?;
    let mut rep = StudyReport::new("counterexample");
    let area = sphere_area(d);
    let dm1 = d as f64 - 1.0;
    let df = d as f64;

    let near = integrate(1, |x| x[0].powf(dm1) * osc_value(alpha, beta, x[0]), &one_d(0.0, 1.0)?, &QuadratureSpec::default_for(1))?;
    // r = y^{1/β} on [1, ∞)
    let tail = integrate_radial_1d(
        |y| {
            let r2 = y.powf(2.0 / beta);
            let q = 1.0 / (1.0 + r2);
            y.powf(df / beta - 1.0) / beta * q.powf(alpha) * (1.0 + y.sin() + q)
        },
        &QuadratureSpec::radial_default().with_rel_tol(1e-2),
    )?;
    let mut omega = tail.clone();
    omega.value = area * (near.value + tail.value);
    omega.error_estimate *= area;
    omega.trace.iter_mut().for_each(|t| t.value = area * (near.value + t.value));
    let integrable = omega.status == Status::Converged;
    rep.put("omega_integral", omega);

    let exponent = (dm1 - 2.0 * alpha) / beta;
    rep.put("reduced_exponent", Quantity::exact(exponent));
    let reduced = integrate_radial_1d(|y| y.powf(exponent) * y.cos().abs(), &QuadratureSpec::radial_default())?;
    let grad_divergent = reduced.is_divergent();
    rep.put("gradient_reduced", reduced);

    rep.claim("omega_integrable", "omega is integrable on R^d", integrable, &["omega_integral"]);
    rep.claim(
        "integrability_rule",
        "omega is integrable exactly when alpha > d/2",
        integrable == (alpha > df / 2.0),
        &["omega_integral"],
    );
    rep.claim("gradient_divergent", "the reduced gradient integral is infinite", grad_divergent, &["gradient_reduced"]);
    rep.claim(
        "gradient_rule",
        "the reduced gradient integral diverges exactly when (d-1-2 alpha)/beta >= -1",
        grad_divergent == (exponent >= -1.0),
        &["gradient_reduced", "reduced_exponent"],
    );
    rep.claim(
        "counterexample",
        "omega is integrable while its gradient is not",
        integrable && grad_divergent,
        &["omega_integral", "gradient_reduced"],
    );

    if d <= 3 {
        let w = make_catalog_weight("oscillatory", &[alpha, beta], d)?;
        let integrand = |g: f64, v: f64| g.abs().powf(p) * v.powf(1.0 - p);
        let spec = QuadratureSpec { rel_tol: 1e-4, max_nodes: 4_000_000, ..QuadratureSpec::default_for(d) };
        let cube = integrate(
            d,
            |x| {
                let mut g = [0.0; 3];
                w.gradient(x, &mut g[..d]);
                integrand(g[..d].iter().map(|v| v * v).sum::<f64>().sqrt(), w.value(x))
            },
            &Region::compact(AxisBox::cube(d, 1.0)?),
            &spec,
        )?;
        let ball = |rho: f64| -> Result<IntegralResult> {
            let mut r = integrate(
                1,
                |x| x[0].powf(dm1) * integrand(osc_radial_derivative(alpha, beta, x[0]), osc_value(alpha, beta, x[0])),
                &one_d(0.0, rho)?,
                &QuadratureSpec::default_for(1).with_rel_tol(1e-10),
            )?;
            r.value *= area;
            Ok(r)
        };
        let inner = ball(1.0)?;
        let outer = ball(df.sqrt())?;
        let holds = inner.value <= cube.value * (1.0 + 1e-3) && cube.value <= outer.value * (1.0 + 1e-3);
        rep.put("gradient_cube", cube);
        rep.put("gradient_ball_inner", inner);
        rep.put("gradient_ball_outer", outer);
        rep.claim(
            "direct_cross_check",
            "direct quadrature over [-1,1]^d lies between the radial ball integrals",
            holds,
            &["gradient_cube", "gradient_ball_inner", "gradient_ball_outer"],
        );
    }
    Ok(rep)
}

/// Half-widths of the hat sweep in [`appendix_osc_study`].
pub const HAT_SWEEP: [f64; 4] = [2.0, 4.0, 8.0, 16.0];

/// `(1, appendix_osc)` in one dimension.
pub fn appendix_pair() -> Result<WeightPair> {
    WeightPair::new(make_catalog_weight("one", &[], 1)?, make_catalog_weight("appendix_osc", &[], 1)?)
}

/// Checks on the appendix pair: equivalence to `e^{−√(1+x²)}`, unbounded slope
/// of `log r_ω`, integrability of `ω_θ`, and the seminorm of wide hats growing
/// while their `W^{1,p}(ω_θ)` norms settle.
pub fn appendix_osc_study(p: f64, theta: f64) -> Result<StudyReport> {
    check_exponent(p)?;
    check_theta_open(theta)?;
    let mut rep = StudyReport::new("appendix-osc");
    let pair = appendix_pair()?;
    let osc = pair.weight(1).clone();
    let rho = make_catalog_weight("exp_norm", &[], 1)?;
    let e = std::f64::consts::E;

    let (lo, hi) = check_equivalence(&osc, &rho, &AxisBox::cube(1, 8.0)?, 10_000, 7)?;
    rep.put("ratio_min", Quantity::sampled(lo));
    rep.put("ratio_max", Quantity::sampled(hi));
    rep.claim(
        "equivalence",
        "appendix_osc / exp_norm stays in [1/e, e]",
        lo >= (1.0 - 1e-12) / e && hi <= e * (1.0 + 1e-12),
        &["ratio_min", "ratio_max"],
    );

    let log_r = pair.log_ratio_field();
    let mut lips = Vec::new();
    for hw in [2.0, 4.0, 8.0] {
        let l = estimate_lipschitz(&log_r, &AxisBox::cube(1, hw)?, 4000, 11)?;
        rep.put(format!("lipschitz_{hw}"), Quantity::sampled(l));
        lips.push(l);
    }
    rep.claim(
        "lipschitz_unbounded",
        "the slope of log r grows at least tenfold from half-width 2 to 8",
        lips[0] < lips[1] && lips[1] < lips[2] && lips[2] >= 10.0 * lips[0],
        &["lipschitz_2", "lipschitz_4", "lipschitz_8"],
    );

    let w_theta = pair.omega_theta(theta)?;
    let majorant = integrate(1, |x| (theta * (1.0 - (1.0 + x[0] * x[0]).sqrt())).exp(), &Region::whole(), &QuadratureSpec::default_for(1))?;
    let majorant_ok = majorant.status == Status::Converged;
    rep.put("omega_theta_majorant", majorant);
    let spec = QuadratureSpec { rel_tol: 1e-4, max_nodes: 2_000_000, ..QuadratureSpec::default_for(1) };
    // e^{−θ|x|} is below e^{−20θ} past |x| = 40
    let limit = integrate(1, |x| w_theta.value(x), &Region::compact(AxisBox::cube(1, 40.0)?), &spec)?;
    let limit_norm = limit.value.powf(1.0 / p);
    rep.put("omega_theta_integral", limit);
    rep.claim(
        "omega_theta_integrable",
        "omega_theta is dominated by the integrable e^theta e^{-theta sqrt(1+x^2)}",
        majorant_ok,
        &["omega_theta_majorant"],
    );

    let sweep = par::map_slice(&HAT_SWEEP, |&r| -> Result<(NormReport, NormReport)> {
        let hat = make_hat(&[0.0], r, 1.0, 1.0)?;
        Ok((grad_seminorm(&hat, &pair, theta, p, &spec)?, w1p_norm(&hat, &w_theta, p, &spec)?))
    });
    let sweep = sweep.into_iter().collect::<Result<Vec<_>>>()?;
    let mut semi_names = Vec::new();
    let mut w1p_names = Vec::new();
    for (r, (s, w)) in HAT_SWEEP.iter().zip(&sweep) {
        semi_names.push(format!("seminorm_hat_{r}"));
        w1p_names.push(format!("w1p_hat_{r}"));
        rep.put(semi_names.last().unwrap().clone(), s);
        rep.put(w1p_names.last().unwrap().clone(), w);
    }
    let limit_status = rep.quantities["omega_theta_integral"].status;
    rep.put("w1p_limit", Quantity { value: limit_norm, status: limit_status, source: Source::Quadrature, trace: Vec::new() });
    let semis: Vec<f64> = sweep.iter().map(|(s, _)| s.value).collect();
    let w1ps: Vec<f64> = sweep.iter().map(|(_, w)| w.value).collect();
    let semi_refs: Vec<&str> = semi_names.iter().map(String::as_str).collect();
    let mut w1p_refs: Vec<&str> = w1p_names.iter().map(String::as_str).collect();
    w1p_refs.push("w1p_limit");
    rep.claim(
        "seminorm_grows",
        "the log r seminorm of the wide hats increases strictly along the sweep",
        semis.windows(2).all(|w| w[1] > w[0]),
        &semi_refs,
    );
    let last = *w1ps.last().unwrap();
    rep.claim(
        "w1p_stabilizes",
        "the W1p(omega_theta) norm of the widest hat is within 1% of the norm of 1",
        (last - limit_norm).abs() <= 0.01 * limit_norm,
        &w1p_refs,
    );
    rep.claim(
        "w1p_bounded",
        "every hat norm stays below 2^{1/p} times the norm of 1",
        w1ps.iter().all(|v| *v <= 1.01 * limit_norm * 2f64.powf(1.0 / p)),
        &w1p_refs,
    );
    Ok(rep)
}

/// Relative gap between `‖G′‖_{L^p(ω)}` and `‖g‖_{L^p(ω)}` for `G = ∫₀^x g` on a grid of step `h`.
fn homog_residual(g: &TestFunction, w: &Weight, p: f64, h: f64, target: f64) -> Result<(f64, f64)> {
    let s = g.support();
    let lo = s.lo()[0].min(0.0);
    let hi = s.hi()[0].max(0.0);
    let k0 = (lo / h).floor() as i64;
    let k1 = (hi / h).ceil() as i64;
    if (k1 - k0) as f64 > 1e8 {
        return Err(LabError::GridTooCoarse(format!("grid step {h} needs more than 1e8 cells")));
    }
    let xs: Vec<f64> = (k0..=k1).map(|k| k as f64 * h).collect();
    let gs: Vec<f64> = xs.iter().map(|x| g.value(&[*x])).collect();
    let zero = (-k0) as usize;
    let mut big_g = vec![0.0; xs.len()];
    for i in zero + 1..xs.len() {
        big_g[i] = big_g[i - 1] + 0.5 * h * (gs[i - 1] + gs[i]);
    }
    for i in (0..zero).rev() {
        big_g[i] = big_g[i + 1] - 0.5 * h * (gs[i] + gs[i + 1]);
    }
    let cells = par::map_collect(xs.len() - 1, |i| {
        let d = (big_g[i + 1] - big_g[i]) / h;
        d.abs().powf(p) * w.value(&[0.5 * (xs[i] + xs[i + 1])]) * h
    });
    let value = par::ordered_sum(&cells).powf(1.0 / p);
    let residual = if target == 0.0 { value.abs() } else { (value - target).abs() / target };
    Ok((value, residual))
}

/// `‖G′‖_{L^p(ω)} = ‖g‖_{L^p(ω)}` for `G(x) = ∫₀^x g`, with `G` built by the
/// cumulative trapezoid rule and `G′` recovered by differencing; repeated at
/// `h/2` to expose the `O(h²)` grid error.
pub fn homog1d_check(g: &TestFunction, w: &Weight, p: f64, grid_step: f64) -> Result<StudyReport> {
    check_exponent(p)?;
    if g.dim() != 1 || w.dim() != 1 {
        return Err(LabError::DimensionMismatch { expected: 1, got: g.dim().max(w.dim()) });
    }
    if !(grid_step > 0.0) {
        return Err(LabError::InvalidParameter(format!("grid step must be positive, got {grid_step}")));
    }
    let mut rep = StudyReport::new("homog1d");
    let norm = lp_norm(g.field(), w, p, &QuadratureSpec::default_for(1).with_rel_tol(1e-12))?;
    let target = norm.value;
    let (value, residual) = homog_residual(g, w, p, grid_step, target)?;
    if residual > 1e-3 {
        return Err(LabError::GridTooCoarse(format!("reconstruction residual {residual:.3e} at grid step {grid_step}")));
    }
    let (value_half, residual_half) = homog_residual(g, w, p, 0.5 * grid_step, target)?;
    rep.put("g_norm", &norm);
    rep.put("primitive_seminorm", Quantity::exact(value));
    rep.put("primitive_seminorm_half", Quantity::exact(value_half));
    rep.put("residual", Quantity::exact(residual));
    rep.put("residual_half", Quantity::exact(residual_half));
    rep.claim(
        "isometry",
        "the primitive's seminorm matches the norm of g within grid_step^2",
        residual <= grid_step * grid_step,
        &["g_norm", "primitive_seminorm", "residual"],
    );
    rep.claim(
        "second_order",
        "halving the grid step cuts the residual at least 3.5 times or it is at roundoff",
        residual_half <= 1e-12 || residual >= 3.5 * residual_half,
        &["residual", "residual_half"],
    );
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_bump;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn radial_derivative_matches_catalog_gradient() {
        let w = make_catalog_weight("oscillatory", &[1.5, 2.5], 1).unwrap();
        for r in [0.3, 0.9, 1.7, 2.4] {
            let mut g = [0.0];
            w.gradient(&[r], &mut g);
            assert!((g[0] - osc_radial_derivative(1.5, 2.5, r)).abs() < 1e-12 * (1.0 + g[0].abs()));
            assert!((w.value(&[r]) - osc_value(1.5, 2.5, r)).abs() < 1e-14);
        }
    }

    #[test]
    fn homog_zero_and_plain_hat() {
        let one = make_catalog_weight("one", &[], 1).unwrap();
        let hat = make_hat(&[0.3], 0.5, 0.25, 2.0).unwrap();
        let r = homog1d_check(&hat, &one, 1.0, 1e-3).unwrap();
        // ∫|g| = 2·(2·0.5 + 0.25)
        assert!((r.quantity("g_norm").unwrap().value - 2.5).abs() < 1e-12);
        assert!(r.quantity("residual").unwrap().value < 1e-10);
        assert_eq!(r.verdict("isometry"), Some(true));
        let zero = hat.scaled(0.0);
        let r = homog1d_check(&zero, &one, 2.0, 1e-2).unwrap();
        assert_eq!(r.quantity("primitive_seminorm").unwrap().value, 0.0);
    }

    #[test]
    fn homog_bump_gauss() {
        let g = make_bump(&[0.2], 1.0, 1.0).unwrap();
        let w = make_catalog_weight("gauss", &[1.0], 1).unwrap();
        let r = homog1d_check(&g, &w, 2.0, 1e-3).unwrap();
        assert!(r.quantity("residual").unwrap().value < 1e-6);
        assert_eq!(r.verdict("second_order"), Some(true));
        assert!(matches!(homog1d_check(&g, &w, 2.0, 0.5), Err(LabError::GridTooCoarse(_))));
    }
}
