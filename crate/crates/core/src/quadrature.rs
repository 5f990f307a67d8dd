//! Tensor Gauss–Legendre quadrature on nested boxes, with convergence and
//! divergence classification of truncated integrals.
//!
//! Whole-space integrals are accumulated ring by ring: step `k` adds every
//! tensor panel whose outermost axis interval lies in `[R_{k-1}, R_k]`, so the
//! partial value after step `k` is the integral over `[-R_k, R_k]^d`.
//! Compactly supported integrands are integrated over their support box with
//! successive panel doublings instead.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::par;
use crate::weights::{AxisBox, ScalarField};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the `n`-point rule by Newton iteration on `P_n`.
    pub fn compute(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rule with `n` nodes.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard.entry(n).or_insert_with(|| Arc::new(GaussLegendre::compute(n))).clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Converged,
    Divergent,
    Inconclusive,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Divergent => "divergent",
            Status::Inconclusive => "inconclusive",
        }
    }

    /// Combined status of several quantities: divergent dominates, then inconclusive.
    pub fn combine(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Divergent, _) | (_, Divergent) => Divergent,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Converged,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub radius: f64,
    pub nodes: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub status: Status,
    pub trace: Vec<TracePoint>,
}

impl IntegralResult {
    /// An exact value with no quadrature behind it.
    pub fn exact(value: f64) -> Self {
        Self { value, error_estimate: 0.0, status: Status::Converged, trace: Vec::new() }
    }

    pub fn is_divergent(&self) -> bool {
        self.status == Status::Divergent
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub radii: Vec<f64>,
    pub points_per_axis: usize,
    pub rel_tol: f64,
    pub growth_threshold: f64,
    /// Upper bound on the total number of integrand evaluations.
    #[serde(default = "default_max_nodes")]
    pub max_nodes: usize,
}

fn default_max_nodes() -> usize {
    20_000_000
}

impl QuadratureSpec {
    /// Radii `2^k` for `k = 0..=20` with a dimension-dependent rule size.
    pub fn default_for(dim: usize) -> Self {
        let points_per_axis = match dim {
            1 => 64,
            2 => 48,
            _ => 24,
        };
        Self {
            radii: (0..=20).map(|k| 2f64.powi(k)).collect(),
            points_per_axis,
            rel_tol: 1e-8,
            growth_threshold: 1.5,
            max_nodes: default_max_nodes(),
        }
    }

    /// Radii `10^k` for `k = 1..=6` on `[1, R]`, 16 points per quarter period.
    pub fn radial_default() -> Self {
        Self {
            radii: (1..=6).map(|k| 10f64.powi(k)).collect(),
            points_per_axis: 16,
            rel_tol: 1e-4,
            growth_threshold: 1.5,
            max_nodes: 50_000_000,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_points(mut self, points_per_axis: usize) -> Self {
        self.points_per_axis = points_per_axis;
        self
    }

    pub fn with_radii(mut self, radii: Vec<f64>) -> Self {
        self.radii = radii;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() {
            return Err(LabError::InvalidParameter("quadrature needs at least one radius".into()));
        }
        if self.radii[0] <= 0.0 || self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::InvalidParameter(format!(
                "radii must be positive and strictly increasing, got {:?}",
                self.radii
            )));
        }
        if self.points_per_axis == 0 {
            return Err(LabError::InvalidParameter("points_per_axis must be positive".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(LabError::InvalidParameter(format!("rel_tol must lie in (0, 1e-2], got {}", self.rel_tol)));
        }
        if !(self.growth_threshold > 1.0) {
            return Err(LabError::InvalidParameter(format!(
                "growth_threshold must exceed 1, got {}",
                self.growth_threshold
            )));
        }
        Ok(())
    }
}

/// Integration domain hints: an optional support box and per-axis break points
/// where the integrand may fail to be smooth.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Region {
    pub support: Option<AxisBox>,
    pub breaks: Vec<Vec<f64>>,
}

impl Region {
    pub fn whole() -> Self {
        Self::default()
    }

    pub fn compact(support: AxisBox) -> Self {
        Self { support: Some(support), breaks: Vec::new() }
    }

    pub fn of_field(f: &ScalarField) -> Self {
        Self { support: f.support().cloned(), breaks: f.breaks().to_vec() }
    }

    /// Adds break points, axis by axis.
    pub fn with_breaks(mut self, extra: &[Vec<f64>]) -> Self {
        if self.breaks.len() < extra.len() {
            self.breaks.resize(extra.len(), Vec::new());
        }
        for (axis, b) in extra.iter().enumerate() {
            self.breaks[axis].extend_from_slice(b);
            self.breaks[axis].sort_by(f64::total_cmp);
            self.breaks[axis].dedup();
        }
        self
    }

    /// Joins the break points of several fields.
    pub fn merge(mut self, other: &Region) -> Self {
        self = self.with_breaks(&other.breaks);
        self.support = match (self.support.take(), other.support.clone()) {
            (Some(a), Some(b)) => Some(a.intersection(&b).unwrap_or(a)),
            (a, b) => a.or(b),
        };
        self
    }

    fn axis_breaks(&self, axis: usize) -> &[f64] {
        self.breaks.get(axis).map(Vec::as_slice).unwrap_or(&[])
    }
}

type Interval = (f64, f64);

/// Splits `[a, b]` at every break strictly inside it.
fn split_interval(a: f64, b: f64, breaks: &[f64]) -> Vec<Interval> {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(b);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Sum of `f` over the tensor Gauss–Legendre nodes of one panel.
fn panel_sum<F>(panel: &[Interval], rule: &GaussLegendre, f: &F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let d = panel.len();
    let n = rule.len();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let half: Vec<f64> = panel.iter().map(|(a, b)| 0.5 * (b - a)).collect();
    let mid: Vec<f64> = panel.iter().map(|(a, b)| 0.5 * (a + b)).collect();
    let mut sum = 0.0;
    loop {
        let mut w = 1.0;
        for k in 0..d {
            x[k] = mid[k] + half[k] * rule.nodes[idx[k]];
            w *= half[k] * rule.weights[idx[k]];
        }
        let v = f(&x);
        if !v.is_finite() {
            return Err(LabError::NonFinite { value: v, point: x });
        }
        sum += w * v;
        let mut k = 0;
        loop {
            if k == d {
                return Ok(sum);
            }
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn sum_panels<F>(panels: &[Vec<Interval>], rule: &GaussLegendre, f: &F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let partials = par::map_slice(panels, |p| panel_sum(p, rule, f));
    let mut total = 0.0;
    for p in partials {
        total += p?;
    }
    Ok(total)
}

fn tensor_panels(axes: &[Vec<Interval>]) -> Vec<Vec<Interval>> {
    let mut out: Vec<Vec<Interval>> = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |iv| {
                    let mut q = p.clone();
                    q.push(*iv);
                    q
                })
            })
            .collect();
    }
    out
}

/// Per-axis intervals of a compact box at refinement `level`.
fn compact_axes(support: &AxisBox, region: &Region, level: u32) -> Vec<Vec<Interval>> {
    (0..support.dim())
        .map(|axis| {
            let (a, b) = (support.lo()[axis], support.hi()[axis]);
            let mut breaks = region.axis_breaks(axis).to_vec();
            breaks.push(0.0);
            let base = split_interval(a, b, &breaks);
            let m0 = 4usize.div_ceil(base.len());
            let m = m0 << level;
            base.iter()
                .flat_map(|&(lo, hi)| {
                    let h = (hi - lo) / m as f64;
                    (0..m).map(move |i| {
                        let l = lo + h * i as f64;
                        let r = if i + 1 == m { hi } else { lo + h * (i + 1) as f64 };
                        (l, r)
                    })
                })
                .collect()
        })
        .collect()
}

fn compact_node_count(axes: &[Vec<Interval>], ppa: usize) -> usize {
    axes.iter().map(|a| a.len() * ppa).product()
}

/// Materialized tensor nodes of one compact refinement level, in panel order.
#[derive(Debug, Clone)]
pub struct NodeSet {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    panel_starts: Vec<usize>,
}

impl NodeSet {
    pub fn build(support: &AxisBox, region: &Region, ppa: usize, level: u32) -> Self {
        let rule = gauss_legendre(ppa);
        let d = support.dim();
        let panels = tensor_panels(&compact_axes(support, region, level));
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut panel_starts = Vec::with_capacity(panels.len() + 1);
        for panel in &panels {
            panel_starts.push(weights.len());
            let half: Vec<f64> = panel.iter().map(|(a, b)| 0.5 * (b - a)).collect();
            let mid: Vec<f64> = panel.iter().map(|(a, b)| 0.5 * (a + b)).collect();
            let mut idx = vec![0usize; d];
            loop {
                let mut w = 1.0;
                for k in 0..d {
                    points.push(mid[k] + half[k] * rule.nodes[idx[k]]);
                    w *= half[k] * rule.weights[idx[k]];
                }
                weights.push(w);
                let mut k = 0;
                while k < d {
                    idx[k] += 1;
                    if idx[k] < ppa {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
        }
        panel_starts.push(weights.len());
        Self { dim: d, points, weights, panel_starts }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// `Σ_i f(i)` with per-panel partial sums reduced in panel order; matches
    /// the reduction order of [`integrate`] on the same level.
    pub fn sum<F>(&self, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let n_panels = self.panel_starts.len() - 1;
        let partials = par::map_collect(n_panels, |p| {
            (self.panel_starts[p]..self.panel_starts[p + 1]).fold(0.0, |acc, i| acc + f(i))
        });
        par::ordered_sum(&partials)
    }
}

/// Number of nodes of compact refinement `level`.
pub fn compact_level_nodes(support: &AxisBox, region: &Region, ppa: usize, level: u32) -> usize {
    compact_node_count(&compact_axes(support, region, level), ppa)
}

/// Convergence test after a new partial value was appended to `values`: the
/// last increment is within `rel_tol` of the (nonzero) partial value and no
/// larger than the one before.
fn converged(values: &[f64], rel_tol: f64) -> bool {
    let k = values.len() - 1;
    if k == 0 || values[k] == 0.0 {
        return false;
    }
    let d0 = (values[k] - values[k - 1]).abs();
    let d1 = if k == 1 { values[0].abs() } else { (values[k - 1] - values[k - 2]).abs() };
    d0 <= rel_tol * values[k].abs() && d0 <= d1
}

/// Divergence test on the final three partial values: growth by `growth`
/// over the last two steps, or increments that no longer decay.
fn divergent(values: &[f64], rel_tol: f64, growth: f64) -> bool {
    let k = values.len();
    if k < 4 {
        return false;
    }
    let (s0, s1, s2, s3) = (values[k - 4], values[k - 3], values[k - 2], values[k - 1]);
    if s1 > 0.0 && s3 >= growth * s1 {
        return true;
    }
    let (d1, d2, d3) = (s1 - s0, s2 - s1, s3 - s2);
    d3 >= d2 && d2 >= d1 && d1 > rel_tol * s3.abs()
}

fn finish_truncated(trace: Vec<TracePoint>, values: &[f64], spec: &QuadratureSpec) -> IntegralResult {
    let status = divergent(values, spec.rel_tol, spec.growth_threshold).then_some(Status::Divergent);
    finish(trace, status)
}

fn finish(trace: Vec<TracePoint>, status: Option<Status>) -> IntegralResult {
    let n = trace.len();
    let value = trace.last().map(|t| t.value).unwrap_or(0.0);
    let error_estimate = if n >= 2 { (trace[n - 1].value - trace[n - 2].value).abs() } else { value.abs() };
    // an integrand that vanished on every radius is exactly zero
    let status = status.or_else(|| (n > 0 && trace.iter().all(|t| t.value == 0.0)).then_some(Status::Converged));
    IntegralResult { value, error_estimate, status: status.unwrap_or(Status::Inconclusive), trace }
}

/// Integrates `f ≥ 0` over `R^d`, or over `region.support` when present.
pub fn integrate<F>(dim: usize, f: F, region: &Region, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    spec.validate()?;
    if dim == 0 {
        return Err(LabError::InvalidParameter("dimension must be positive".into()));
    }
    if let Some(s) = &region.support {
        if s.dim() != dim {
            return Err(LabError::DimensionMismatch { expected: dim, got: s.dim() });
        }
        return integrate_compact(&f, s, region, spec);
    }
    let rule = gauss_legendre(spec.points_per_axis);
    let per_panel = spec.points_per_axis.pow(dim as u32);
    // axis intervals of every ring, per axis
    let rings: Vec<Vec<Vec<Interval>>> = (0..dim)
        .map(|axis| {
            let br = region.axis_breaks(axis);
            spec.radii
                .iter()
                .enumerate()
                .map(|(m, &r)| {
                    if m == 0 {
                        let mut v = split_interval(-r, 0.0, br);
                        v.extend(split_interval(0.0, r, br));
                        v
                    } else {
                        let r0 = spec.radii[m - 1];
                        let mut v = split_interval(-r, -r0, br);
                        v.extend(split_interval(r0, r, br));
                        v
                    }
                })
                .collect()
        })
        .collect();
    let mut trace = Vec::new();
    let mut values = Vec::new();
    let mut total = 0.0;
    let mut nodes_used = 0usize;
    for (k, &radius) in spec.radii.iter().enumerate() {
        // tensor panels whose outermost ring index equals k
        let mut panels: Vec<Vec<Interval>> = vec![Vec::new()];
        let mut at_k: Vec<bool> = vec![false];
        for axis_rings in rings.iter() {
            let mut next = Vec::new();
            let mut next_flag = Vec::new();
            for (p, flag) in panels.iter().zip(&at_k) {
                for (m, ring) in axis_rings.iter().enumerate().take(k + 1) {
                    for iv in ring {
                        let mut q = p.clone();
                        q.push(*iv);
                        next.push(q);
                        next_flag.push(*flag || m == k);
                    }
                }
            }
            panels = next;
            at_k = next_flag;
        }
        let step: Vec<Vec<Interval>> = panels.into_iter().zip(at_k).filter(|(_, f)| *f).map(|(p, _)| p).collect();
        let step_nodes = step.len() * per_panel;
        if nodes_used + step_nodes > spec.max_nodes && !values.is_empty() {
            return Ok(finish_truncated(trace, &values, spec));
        }
        nodes_used += step_nodes;
        total += sum_panels(&step, &rule, &f)?;
        values.push(total);
        trace.push(TracePoint { radius, nodes: nodes_used, value: total });
        if converged(&values, spec.rel_tol) {
            return Ok(finish(trace, Some(Status::Converged)));
        }
    }
    Ok(finish_truncated(trace, &values, spec))
}

fn integrate_compact<F>(f: &F, support: &AxisBox, region: &Region, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let rule = gauss_legendre(spec.points_per_axis);
    let radius = support.outer_radius();
    let mut trace: Vec<TracePoint> = Vec::new();
    for level in 0u32.. {
        let axes = compact_axes(support, region, level);
        let nodes = compact_node_count(&axes, spec.points_per_axis);
        if trace.len() >= 2 && nodes > spec.max_nodes {
            break;
        }
        let value = sum_panels(&tensor_panels(&axes), &rule, f)?;
        trace.push(TracePoint { radius, nodes, value });
        if let [.., a, b] = trace.as_slice() {
            if (b.value - a.value).abs() <= spec.rel_tol * b.value.abs() {
                return Ok(finish(trace, Some(Status::Converged)));
            }
        }
    }
    Ok(finish(trace, None))
}

/// Integrates `g` over `[1, R_k]` for each radius, with panels cut at the
/// multiples of `π/2` so every zero of `cos` and `sin` is a panel edge.
pub fn integrate_radial_1d<G>(g: G, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    G: Fn(f64) -> f64 + Sync,
{
    spec.validate()?;
    if spec.radii[0] <= 1.0 {
        return Err(LabError::InvalidParameter(format!("radial radii must exceed 1, got {}", spec.radii[0])));
    }
    let rule = gauss_legendre(spec.points_per_axis);
    let f = |x: &[f64]| g(x[0]);
    let mut trace = Vec::new();
    let mut values = Vec::new();
    let mut total = 0.0;
    let mut nodes_used = 0usize;
    let mut lo = 1.0;
    for &radius in &spec.radii {
        let first = (lo / FRAC_PI_2).floor() as u64 + 1;
        let last = (radius / FRAC_PI_2).ceil() as u64;
        let mut cuts = vec![lo];
        cuts.extend((first..last).map(|m| m as f64 * FRAC_PI_2).filter(|&c| c > lo && c < radius));
        cuts.push(radius);
        let panels: Vec<Vec<Interval>> = cuts.windows(2).map(|w| vec![(w[0], w[1])]).collect();
        let step_nodes = panels.len() * spec.points_per_axis;
        if nodes_used + step_nodes > spec.max_nodes && !values.is_empty() {
            return Ok(finish_truncated(trace, &values, spec));
        }
        nodes_used += step_nodes;
        total += sum_panels(&panels, &rule, &f)?;
        values.push(total);
        trace.push(TracePoint { radius, nodes: nodes_used, value: total });
        if converged(&values, spec.rel_tol) {
            return Ok(finish(trace, Some(Status::Converged)));
        }
        lo = radius;
    }
    Ok(finish_truncated(trace, &values, spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 64] {
            let rule = GaussLegendre::compute(n);
            let sum_w: f64 = rule.weights.iter().sum();
            assert!((sum_w - 2.0).abs() < 1e-13, "n={n} sum={sum_w}");
            for deg in 0..(2 * n) {
                let q: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} {q} vs {exact}");
            }
        }
    }

    #[test]
    fn nodes_are_sorted_and_inside() {
        let rule = GaussLegendre::compute(48);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(rule.nodes.iter().all(|x| x.abs() < 1.0));
    }

    #[test]
    fn gaussian_whole_line() {
        let r = integrate(1, |x| (-x[0] * x[0]).exp(), &Region::whole(), &QuadratureSpec::default_for(1)).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-10 * r.value);
    }

    #[test]
    fn gaussian_plane() {
        let r = integrate(2, |x| (-(x[0] * x[0] + x[1] * x[1])).exp(), &Region::whole(), &QuadratureSpec::default_for(2))
            .unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!((r.value - std::f64::consts::PI).abs() < 1e-10 * r.value);
    }

    #[test]
    fn slow_tail_is_divergent() {
        let r = integrate(1, |x| (1.0 + x[0] * x[0]).powf(-0.4), &Region::whole(), &QuadratureSpec::default_for(1))
            .unwrap();
        assert_eq!(r.status, Status::Divergent);
    }

    #[test]
    fn off_center_mass_is_not_divergent() {
        let r = integrate(1, |x| (-(x[0] - 5.0).powi(2)).exp(), &Region::whole(), &QuadratureSpec::default_for(1))
            .unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn zero_integrand_converges() {
        let r = integrate(2, |_| 0.0, &Region::whole(), &QuadratureSpec::default_for(2).with_radii(vec![1.0, 2.0, 4.0]))
            .unwrap();
        assert_eq!((r.value, r.status), (0.0, Status::Converged));
    }

    #[test]
    fn polynomial_on_support_is_exact() {
        let support = AxisBox::cube(1, 1.0).unwrap();
        let f = |x: &[f64]| (1.0 - x[0] * x[0]).powi(2);
        let r = integrate(1, f, &Region::compact(support), &QuadratureSpec::default_for(1)).unwrap();
        assert!((r.value - 16.0 / 15.0).abs() < 1e-12);
        assert_eq!(r.status, Status::Converged);
    }

    #[test]
    fn non_finite_value_reports_node() {
        let support = AxisBox::cube(1, 1.0).unwrap();
        let err = integrate(1, |_| f64::NAN, &Region::compact(support), &QuadratureSpec::default_for(1)).unwrap_err();
        assert!(matches!(err, LabError::NonFinite { .. }));
    }

    #[test]
    fn radial_examples() {
        let spec = QuadratureSpec::radial_default();
        let r = integrate_radial_1d(|y| y.cos().abs() / y, &spec).unwrap();
        assert_eq!(r.status, Status::Divergent);
        let r = integrate_radial_1d(|y| y.cos().abs() / (y * y), &spec).unwrap();
        assert_eq!(r.status, Status::Converged);
        let r = integrate_radial_1d(|y| y.cos().abs() * y.powf(-1.05), &spec).unwrap();
        assert_ne!(r.status, Status::Divergent);
    }

    #[test]
    fn node_set_matches_integrate() {
        let support = AxisBox::cube(2, 1.5).unwrap();
        let region = Region::compact(support.clone()).with_breaks(&[vec![0.5], vec![-0.25]]);
        let spec = QuadratureSpec::default_for(2).with_points(8);
        let f = |x: &[f64]| (x[0] - 0.5).abs() * (1.0 + x[1] * x[1]);
        let r = integrate(2, f, &region, &spec).unwrap();
        let level = (r.trace.len() - 1) as u32;
        let ns = NodeSet::build(&support, &region, 8, level);
        assert_eq!(ns.len(), r.trace.last().unwrap().nodes);
        let s = ns.sum(|i| ns.weight(i) * f(ns.point(i)));
        assert_eq!(s, r.value);
    }

    #[test]
    fn spec_validation() {
        let mut s = QuadratureSpec::default_for(1);
        s.radii = vec![2.0, 1.0];
        assert!(s.validate().is_err());
        assert!(QuadratureSpec::default_for(1).with_rel_tol(0.5).validate().is_err());
    }
}
