//! Scenario runner: JSON config in, one JSON report per scenario plus a
//! summary CSV out.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::approx::{cutoff_sweep, mollifier_sweep, MollifierNorm, SweepPoint};
use crate::discrete::{laplacian_1d, opnorm_random_suite, semigroup_decay_study, sw_random_suite};
use crate::error::{LabError, Result};
use crate::fields::{parse_test_function, TestFunction};
use crate::interp::{boundary_identity_error, cp_constant_with_argmin, sandwich_from, FamilyEvaluator, FamilyParams, NodeOptions};
use crate::norms::{grad_seminorm, lp_norm, m_theta_q, w1p_norm, wcal_norm, NormReport};
use crate::par;
use crate::quadrature::{QuadratureSpec, Status};
use crate::studies::{appendix_osc_study, counterexample_study, homog1d_check, Quantity, StudyReport};
use crate::weights::{parse_weight, Weight, WeightPair};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Norm,
    VerifyMain,
    Cp,
    SteinweissDiscrete,
    OpnormInterp,
    Semigroup,
    Counterexample,
    AppendixOsc,
    Homog1d,
    ApproxSweep,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::Norm,
        Kind::VerifyMain,
        Kind::Cp,
        Kind::SteinweissDiscrete,
        Kind::OpnormInterp,
        Kind::Semigroup,
        Kind::Counterexample,
        Kind::AppendixOsc,
        Kind::Homog1d,
        Kind::ApproxSweep,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Norm => "norm",
            Kind::VerifyMain => "verify-main",
            Kind::Cp => "cp",
            Kind::SteinweissDiscrete => "steinweiss-discrete",
            Kind::OpnormInterp => "opnorm-interp",
            Kind::Semigroup => "semigroup",
            Kind::Counterexample => "counterexample",
            Kind::AppendixOsc => "appendix-osc",
            Kind::Homog1d => "homog1d",
            Kind::ApproxSweep => "approx-sweep",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    /// Verdicts not listed here are expected to be true.
    #[serde(default)]
    pub verdicts: BTreeMap<String, bool>,
    /// Quantity statuses to check; unlisted statuses are not checked.
    #[serde(default)]
    pub statuses: BTreeMap<String, Status>,
}

impl Expect {
    fn is_empty(&self) -> bool {
        self.verdicts.is_empty() && self.statuses.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub kind: Kind,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Expect::is_empty")]
    pub expect: Expect,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub scenarios: Vec<Scenario>,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub id: String,
    pub kind: Kind,
    pub seed: u64,
    pub params: Value,
    pub quantities: BTreeMap<String, Quantity>,
    pub verdicts: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Expect::is_empty")]
    pub expect: Expect,
    pub key: String,
    pub passed: bool,
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Results of one scenario before comparison against `expect`.
#[derive(Debug, Default)]
struct Outcome {
    quantities: BTreeMap<String, Quantity>,
    verdicts: BTreeMap<String, bool>,
    key: String,
}

impl Outcome {
    fn keyed(key: &str) -> Self {
        Self { key: key.to_string(), ..Default::default() }
    }

    fn put(&mut self, name: impl Into<String>, q: Quantity) {
        self.quantities.insert(name.into(), q);
    }

    fn verdict(&mut self, name: &str, v: bool) {
        self.verdicts.insert(name.to_string(), v);
    }

    fn norm(&mut self, prefix: &str, r: &NormReport) {
        self.put(prefix, Quantity::from(r));
        for (k, v) in &r.integrals {
            self.put(format!("{prefix}.{k}"), Quantity::from(v.clone()));
        }
    }

    fn study(rep: StudyReport, key: &str) -> Self {
        let mut o = Outcome::keyed(key);
        o.quantities = rep.quantities;
        for c in rep.claims {
            o.verdicts.insert(c.id, c.verdict);
        }
        o
    }

    fn sweep(&mut self, points: &[SweepPoint]) {
        for s in points {
            self.put(format!("error_n{}", s.n), Quantity::from(&s.error));
        }
    }
}

fn quantity_with(value: f64, status: Status) -> Quantity {
    Quantity { status, ..Quantity::exact(value) }
}

fn one() -> usize {
    1
}
fn one_f() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn two() -> f64 {
    2.0
}
fn bump() -> String {
    "bump".into()
}
fn weight_one() -> String {
    "one".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormParams {
    norm: String,
    #[serde(default = "one")]
    d: usize,
    #[serde(default = "bump")]
    phi: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w1: Option<String>,
    #[serde(default = "one_f")]
    p: f64,
    #[serde(default = "half")]
    theta: f64,
    #[serde(default = "two")]
    q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points_per_axis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_nodes: Option<usize>,
}

impl NormParams {
    fn spec(&self) -> QuadratureSpec {
        let mut s = QuadratureSpec::default_for(self.d);
        if let Some(t) = self.rel_tol {
            s.rel_tol = t;
        }
        if let Some(n) = self.points_per_axis {
            s.points_per_axis = n;
        }
        if let Some(m) = self.max_nodes {
            s.max_nodes = m;
        }
        s
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MainParams {
    #[serde(default = "one")]
    d: usize,
    w0: String,
    w1: String,
    #[serde(default = "bump")]
    phi: String,
    #[serde(default = "one_f")]
    p: f64,
    #[serde(default = "half")]
    theta: f64,
    #[serde(default = "MainParams::default_ts")]
    boundary_ts: Vec<f64>,
    #[serde(default = "half")]
    boundary_beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    node_rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_nodes: Option<usize>,
}

impl MainParams {
    fn default_ts() -> Vec<f64> {
        vec![0.0, 0.5, 1.0, 2.0, 4.0]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CpParams {
    p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SwParams {
    #[serde(default = "SwParams::default_n")]
    n: usize,
    #[serde(default = "two")]
    p0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p1: Option<f64>,
    #[serde(default = "SwParams::default_instances")]
    instances: usize,
    #[serde(default = "SwParams::default_tol")]
    tol: f64,
}

impl SwParams {
    fn default_n() -> usize {
        8
    }
    fn default_instances() -> usize {
        100
    }
    fn default_tol() -> f64 {
        1e-10
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpParams {
    #[serde(default = "OpParams::default_n")]
    n: usize,
    #[serde(default = "OpParams::default_instances")]
    instances: usize,
    #[serde(default = "OpParams::default_thetas")]
    thetas: Vec<f64>,
    #[serde(default)]
    signed: bool,
}

impl OpParams {
    fn default_n() -> usize {
        6
    }
    fn default_instances() -> usize {
        1000
    }
    fn default_thetas() -> Vec<f64> {
        vec![0.25, 0.5, 0.75]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SemigroupParams {
    #[serde(default = "SemigroupParams::default_n")]
    n: usize,
    #[serde(default = "SemigroupParams::default_generator")]
    generator: String,
    #[serde(default = "half")]
    theta: f64,
    #[serde(default = "half")]
    t0: f64,
    #[serde(default = "SemigroupParams::default_times")]
    times: Vec<f64>,
    #[serde(default = "SemigroupParams::default_decay")]
    w1_decay: f64,
}

impl SemigroupParams {
    fn default_n() -> usize {
        32
    }
    fn default_generator() -> String {
        "laplacian".into()
    }
    fn default_times() -> Vec<f64> {
        vec![1.0, 2.0, 4.0, 8.0, 16.0]
    }
    fn default_decay() -> f64 {
        8.0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CounterParams {
    alpha: f64,
    beta: f64,
    #[serde(default = "one")]
    d: usize,
    #[serde(default = "one_f")]
    p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AppendixParams {
    #[serde(default = "one_f")]
    p: f64,
    #[serde(default = "half")]
    theta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HomogParams {
    #[serde(default = "bump")]
    g: String,
    #[serde(default = "weight_one")]
    weight: String,
    #[serde(default = "one_f")]
    p: f64,
    #[serde(default = "HomogParams::default_step")]
    grid_step: f64,
}

impl HomogParams {
    fn default_step() -> f64 {
        1e-3
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepParams {
    mode: String,
    #[serde(default = "one")]
    d: usize,
    phi: String,
    #[serde(default = "weight_one")]
    weight: String,
    #[serde(default = "one_f")]
    p: f64,
    #[serde(default = "SweepParams::default_ns")]
    ns: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_step: Option<f64>,
    #[serde(default = "SweepParams::default_norm")]
    norm: MollifierNorm,
    #[serde(default = "SweepParams::default_tol")]
    rel_tol: f64,
}

impl SweepParams {
    fn default_ns() -> Vec<u32> {
        vec![4, 8, 16, 32]
    }
    fn default_norm() -> MollifierNorm {
        MollifierNorm::L1
    }
    fn default_tol() -> f64 {
        1e-6
    }
}

/// A validated scenario: typed parameters with catalog entries resolved.
enum Job {
    Norm(NormParams, TestFunction, Option<Weight>, Option<WeightPair>),
    Main(MainParams, TestFunction, WeightPair),
    Cp(CpParams),
    Sw(SwParams),
    Op(OpParams),
    Semigroup(SemigroupParams),
    Counter(CounterParams),
    Appendix(AppendixParams),
    Homog(HomogParams, TestFunction, Weight),
    Sweep(SweepParams, TestFunction, Weight),
}

struct Prepared {
    scenario: Scenario,
    seed: u64,
    resolved: Value,
    job: Job,
}

fn typed<T: for<'de> Deserialize<'de> + Serialize>(sc: &Scenario) -> Result<(T, Value)> {
    let obj: serde_json::Map<String, Value> = sc.params.clone().into_iter().collect();
    let t: T = serde_json::from_value(Value::Object(obj))
        .map_err(|e| LabError::Config(format!("scenario `{}` ({}): {e}", sc.id, sc.kind.as_str())))?;
    let v = serde_json::to_value(&t).map_err(|e| LabError::Config(e.to_string()))?;
    Ok((t, v))
}

fn pair_of(w0: &str, w1: &str, d: usize) -> Result<WeightPair> {
    WeightPair::new(parse_weight(w0, d)?, parse_weight(w1, d)?)
}

fn need<'a>(v: &'a Option<String>, what: &str, norm: &str) -> Result<&'a str> {
    v.as_deref().ok_or_else(|| LabError::Config(format!("norm `{norm}` needs `{what}`")))
}

fn prepare(sc: &Scenario, run_seed: u64) -> Result<Prepared> {
    let (job, resolved) = match sc.kind {
        Kind::Norm => {
            let (p, v): (NormParams, _) = typed(sc)?;
            let phi = parse_test_function(&p.phi, p.d)?;
            let (w, pair) = match p.norm.as_str() {
                "lp" | "w1p" => (Some(parse_weight(need(&p.weight, "weight", &p.norm)?, p.d)?), None),
                "seminorm" | "wcal" | "mtq" => {
                    (None, Some(pair_of(need(&p.w0, "w0", &p.norm)?, need(&p.w1, "w1", &p.norm)?, p.d)?))
                }
                other => return Err(LabError::Config(format!("unknown norm `{other}`"))),
            };
            p.spec().validate()?;
            (Job::Norm(p, phi, w, pair), v)
        }
        Kind::VerifyMain => {
            let (p, v): (MainParams, _) = typed(sc)?;
            let phi = parse_test_function(&p.phi, p.d)?;
            let pair = pair_of(&p.w0, &p.w1, p.d)?;
            FamilyParams::new(p.boundary_beta, p.theta, p.p)?;
            (Job::Main(p, phi, pair), v)
        }
        Kind::Cp => {
            let (p, v) = typed(sc)?;
            (Job::Cp(p), v)
        }
        Kind::SteinweissDiscrete => {
            let (p, v) = typed(sc)?;
            (Job::Sw(p), v)
        }
        Kind::OpnormInterp => {
            let (p, v) = typed(sc)?;
            (Job::Op(p), v)
        }
        Kind::Semigroup => {
            let (p, v): (SemigroupParams, _) = typed(sc)?;
            if !["laplacian", "zero", "minus-identity"].contains(&p.generator.as_str()) {
                return Err(LabError::Config(format!("unknown generator `{}`", p.generator)));
            }
            (Job::Semigroup(p), v)
        }
        Kind::Counterexample => {
            let (p, v) = typed(sc)?;
            (Job::Counter(p), v)
        }
        Kind::AppendixOsc => {
            let (p, v) = typed(sc)?;
            (Job::Appendix(p), v)
        }
        Kind::Homog1d => {
            let (p, v): (HomogParams, _) = typed(sc)?;
            let g = parse_test_function(&p.g, 1)?;
            let w = parse_weight(&p.weight, 1)?;
            (Job::Homog(p, g, w), v)
        }
        Kind::ApproxSweep => {
            let (p, v): (SweepParams, _) = typed(sc)?;
            if !["cutoff", "mollify"].contains(&p.mode.as_str()) {
                return Err(LabError::Config(format!("unknown sweep mode `{}`", p.mode)));
            }
            let phi = parse_test_function(&p.phi, p.d)?;
            let w = parse_weight(&p.weight, p.d)?;
            (Job::Sweep(p, phi, w), v)
        }
    };
    Ok(Prepared { scenario: sc.clone(), seed: sc.seed.unwrap_or(run_seed), resolved, job })
}

fn execute(job: &Job, seed: u64) -> Result<Outcome> {
    match job {
        Job::Norm(p, phi, w, pair) => {
            let spec = p.spec();
            let r = match p.norm.as_str() {
                "lp" => lp_norm(phi.field(), w.as_ref().unwrap(), p.p, &spec)?,
                "w1p" => w1p_norm(phi, w.as_ref().unwrap(), p.p, &spec)?,
                "seminorm" => grad_seminorm(phi, pair.as_ref().unwrap(), p.theta, p.p, &spec)?,
                "wcal" => wcal_norm(phi, pair.as_ref().unwrap(), p.theta, p.p, &spec)?,
                _ => m_theta_q(pair.as_ref().unwrap(), p.theta, p.q, &spec)?,
            };
            let mut o = Outcome::keyed("norm");
            o.norm("norm", &r);
            Ok(o)
        }
        Job::Main(p, phi, pair) => {
            let mut opts = NodeOptions::default_for(p.d);
            if let Some(t) = p.node_rel_tol {
                opts.rel_tol = t;
            }
            if let Some(m) = p.max_nodes {
                opts.max_nodes = m;
            }
            let ev = FamilyEvaluator::new(phi, pair, p.theta, p.p, &opts)?;
            let s = sandwich_from(&ev)?;
            let mut o = Outcome::keyed("family_upper");
            o.put("lower", quantity_with(s.lower, s.status));
            o.put("family_upper", quantity_with(s.family_upper, s.status));
            o.put("wcal", quantity_with(s.wcal, s.status));
            o.put("cp_wcal", quantity_with(s.cp * s.wcal, s.status));
            o.put("cp", Quantity::exact(s.cp));
            o.put("argmin_beta", Quantity::exact(s.argmin_beta));
            o.put("nodes", Quantity::exact(s.nodes as f64));
            o.verdict("left", s.verdict_left);
            o.verdict("right", s.verdict_right);
            let params = FamilyParams::new(p.boundary_beta, p.theta, p.p)?;
            let spec = QuadratureSpec { rel_tol: 1e-6, max_nodes: 2_000_000, ..QuadratureSpec::default_for(p.d) };
            let (err, status) = boundary_identity_error(phi, pair, &params, &p.boundary_ts, &spec)?;
            o.put("boundary_identity_error", quantity_with(err, status));
            o.verdict("boundary_identity", err <= 1e-10);
            Ok(o)
        }
        Job::Cp(p) => {
            let (cp, beta) = cp_constant_with_argmin(p.p)?;
            let mut o = Outcome::keyed("cp");
            o.put("cp", Quantity::exact(cp));
            o.put("argmin_beta", Quantity::exact(beta));
            o.verdict("exceeds_two", cp > 2.0);
            Ok(o)
        }
        Job::Sw(p) => {
            let s = sw_random_suite(p.n, p.p0, p.p1.unwrap_or(p.p0), p.instances, seed, p.tol)?;
            let mut o = Outcome::keyed("worst_rel_error");
            o.put("worst_rel_error", Quantity::exact(s.worst));
            o.put("failures", Quantity::exact(s.failures as f64));
            o.verdict("all_equal", s.failures == 0);
            Ok(o)
        }
        Job::Op(p) => {
            let s = opnorm_random_suite(p.n, p.instances, &p.thetas, p.signed, seed)?;
            let mut o = Outcome::keyed("worst_gap");
            o.put("worst_gap", Quantity::exact(s.worst));
            o.put("checks", Quantity::exact(s.instances as f64));
            o.put("failures", Quantity::exact(s.failures as f64));
            o.verdict("all_hold", s.failures == 0);
            Ok(o)
        }
        Job::Semigroup(p) => {
            let n = p.n;
            let l = match p.generator.as_str() {
                "laplacian" => laplacian_1d(n),
                "zero" => DMatrix::zeros(n, n),
                _ => -DMatrix::<f64>::identity(n, n),
            };
            let w0 = vec![1.0; n];
            let w1: Vec<f64> = (0..n).map(|i| (-(i as f64 - (n / 2) as f64).abs() / p.w1_decay).exp()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = semigroup_decay_study(&l, &w0, &w1, p.theta, p.t0, &p.times, &g)?;
            let mut o = Outcome::keyed("worst_ratio");
            let mut worst: f64 = 0.0;
            for row in &r.rows {
                o.put(format!("measured_t{}", row.t), Quantity::exact(row.measured));
                o.put(format!("bound_t{}", row.t), Quantity::exact(row.bound));
                worst = worst.max(row.measured / row.bound);
            }
            o.put("worst_ratio", Quantity::exact(worst));
            o.verdict("all_hold", r.all_hold);
            Ok(o)
        }
        Job::Counter(p) => Ok(Outcome::study(counterexample_study(p.alpha, p.beta, p.d, p.p)?, "gradient_reduced")),
        Job::Appendix(p) => Ok(Outcome::study(appendix_osc_study(p.p, p.theta)?, "seminorm_hat_16")),
        Job::Homog(p, g, w) => Ok(Outcome::study(homog1d_check(g, w, p.p, p.grid_step)?, "residual")),
        Job::Sweep(p, phi, w) => {
            let spec = QuadratureSpec::default_for(p.d).with_rel_tol(p.rel_tol);
            let mut o = Outcome::keyed(&format!("error_n{}", p.ns.last().copied().unwrap_or(0)));
            let points = if p.mode == "cutoff" {
                cutoff_sweep(phi, w, p.p, &p.ns, &spec)?
            } else {
                mollifier_sweep(phi, w, p.norm, &p.ns, p.grid_step, &spec)?
            };
            o.sweep(&points);
            let errs: Vec<f64> = points.iter().map(|s| s.error.value).collect();
            o.verdict("non_increasing", errs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
            if let (Some(first), Some(last)) = (errs.first(), errs.last()) {
                if p.mode == "cutoff" {
                    o.verdict("vanishes", *last < 1e-3 * first);
                } else {
                    o.verdict("halves", errs.windows(2).all(|w| w[1] <= 0.5 * w[0]));
                }
            }
            Ok(o)
        }
    }
}

fn judge(out: &Outcome, expect: &Expect) -> Vec<String> {
    let mut failures = Vec::new();
    for (name, v) in &out.verdicts {
        let want = expect.verdicts.get(name).copied().unwrap_or(true);
        if *v != want {
            failures.push(format!("verdict `{name}` is {v}, expected {want}"));
        }
    }
    for name in expect.verdicts.keys() {
        if !out.verdicts.contains_key(name) {
            failures.push(format!("verdict `{name}` was not produced"));
        }
    }
    for (name, want) in &expect.statuses {
        match out.quantities.get(name) {
            Some(q) if q.status == *want => {}
            Some(q) => failures.push(format!("status of `{name}` is {}, expected {}", q.status.as_str(), want.as_str())),
            None => failures.push(format!("quantity `{name}` was not produced")),
        }
    }
    failures
}

fn run_prepared(p: &Prepared) -> Report {
    let sc = &p.scenario;
    let (out, error) = match execute(&p.job, p.seed) {
        Ok(o) => (o, None),
        Err(e) => (Outcome::default(), Some(e.to_string())),
    };
    let failures = if error.is_some() { Vec::new() } else { judge(&out, &sc.expect) };
    Report {
        version: VERSION,
        id: sc.id.clone(),
        kind: sc.kind,
        seed: p.seed,
        params: p.resolved.clone(),
        passed: error.is_none() && failures.is_empty(),
        quantities: out.quantities,
        verdicts: out.verdicts,
        expect: sc.expect.clone(),
        key: out.key,
        failures,
        error,
    }
}

/// Validates every scenario (unique ids, known parameters, resolvable
/// catalog entries) and then runs them in parallel. Validation errors are
/// returned before anything runs; evaluation errors are recorded per report.
pub fn run_config(config: &Config, seed_override: Option<u64>) -> Result<Vec<Report>> {
    let run_seed = seed_override.or(config.seed).unwrap_or(0);
    let mut seen = BTreeSet::new();
    for sc in &config.scenarios {
        if !seen.insert(sc.id.as_str()) {
            return Err(LabError::Config(format!("duplicate scenario id `{}`", sc.id)));
        }
        if sc.id.is_empty() || sc.id.contains(['/', '\\']) {
            return Err(LabError::Config(format!("scenario id `{}` is not a valid file stem", sc.id)));
        }
    }
    let prepared = config.scenarios.iter().map(|sc| prepare(sc, run_seed)).collect::<Result<Vec<_>>>()?;
    Ok(par::map_slice(&prepared, run_prepared))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    VerdictFailure = 1,
    ParseError = 2,
    EvaluationError = 3,
}

pub fn exit_code(reports: &[Report]) -> ExitCode {
    if reports.iter().any(|r| r.error.is_some()) {
        ExitCode::EvaluationError
    } else if reports.iter().any(|r| !r.passed) {
        ExitCode::VerdictFailure
    } else {
        ExitCode::Ok
    }
}

/// Writes `<id>.report.json` for every report and `summary.csv`.
pub fn write_outputs(reports: &[Report], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let io = |e: std::io::Error| LabError::Config(format!("{}: {e}", out_dir.display()));
    fs::create_dir_all(out_dir).map_err(io)?;
    let mut written = Vec::new();
    for r in reports {
        let path = out_dir.join(format!("{}.report.json", r.id));
        fs::write(&path, r.to_json()).map_err(io)?;
        written.push(path);
    }
    let path = out_dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| LabError::Config(e.to_string()))?;
    let csv_err = |e: csv::Error| LabError::Config(e.to_string());
    w.write_record(["id", "kind", "key", "value", "status", "verdict"]).map_err(csv_err)?;
    for r in reports {
        let (value, status) = match r.quantities.get(&r.key) {
            Some(q) => (format!("{:e}", q.value), q.status.as_str().to_string()),
            None => (String::new(), String::new()),
        };
        let verdict = if r.error.is_some() {
            "error"
        } else if r.passed {
            "pass"
        } else {
            "fail"
        };
        w.write_record([r.id.as_str(), r.kind.as_str(), r.key.as_str(), &value, &status, verdict]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| LabError::Config(e.to_string()))?;
    written.push(path);
    Ok(written)
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool when `None`.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    if let Some(n) = jobs {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            return pool.install(f);
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(json: &str) -> Config {
        Config::from_json(json).unwrap()
    }

    #[test]
    fn empty_config_passes() {
        let r = run_config(&config(r#"{"scenarios": []}"#), None).unwrap();
        assert!(r.is_empty());
        assert_eq!(exit_code(&r), ExitCode::Ok);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in Kind::ALL {
            assert_eq!(Kind::parse(k.as_str()), Some(k));
            assert_eq!(serde_json::to_value(k).unwrap(), Value::String(k.as_str().into()));
        }
    }

    #[test]
    fn parse_failures() {
        assert!(Config::from_json("{").is_err());
        let dup = config(r#"{"scenarios": [{"id": "a", "kind": "cp", "params": {"p": 1}}, {"id": "a", "kind": "cp", "params": {"p": 2}}]}"#);
        assert!(run_config(&dup, None).is_err());
        let unknown = config(r#"{"scenarios": [{"id": "a", "kind": "norm", "params": {"norm": "lp", "weight": "nope"}}]}"#);
        assert!(run_config(&unknown, None).is_err());
        let extra = config(r#"{"scenarios": [{"id": "a", "kind": "cp", "params": {"p": 1, "zzz": 3}}]}"#);
        assert!(run_config(&extra, None).is_err());
    }

    #[test]
    fn negative_control_fails_with_id() {
        let c = config(
            r#"{"scenarios": [{"id": "gauss-mass", "kind": "norm",
                "params": {"norm": "mtq", "w0": "one", "w1": "gauss:a=1", "theta": 0.5, "q": 2},
                "expect": {"statuses": {"norm": "divergent"}}}]}"#,
        );
        let r = run_config(&c, None).unwrap();
        assert_eq!(exit_code(&r), ExitCode::VerdictFailure);
        assert_eq!(r[0].id, "gauss-mass");
        assert!(r[0].failures[0].contains("norm"));
    }

    #[test]
    fn evaluation_error_is_reported() {
        let c = config(r#"{"scenarios": [{"id": "bad", "kind": "cp", "params": {"p": 0.5}}]}"#);
        let r = run_config(&c, None).unwrap();
        assert_eq!(exit_code(&r), ExitCode::EvaluationError);
        assert!(r[0].error.is_some());
    }

    #[test]
    fn cp_report_is_resolved() {
        let c = config(r#"{"seed": 3, "scenarios": [{"id": "cp1", "kind": "cp", "params": {"p": 1}}]}"#);
        let r = run_config(&c, None).unwrap();
        assert!(r[0].passed);
        assert_eq!(r[0].seed, 3);
        assert!((r[0].quantities["cp"].value - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let json = r[0].to_json();
        assert!(json.contains("\"version\""));
        assert_eq!(run_config(&c, Some(9)).unwrap()[0].seed, 9);
    }
}
