//! Compactly supported test functions: bumps, tensor hats, the cutoff family
//! `ξ_n`, products with their weak gradients, and lattice mollification.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::quadrature::gauss_legendre;
use crate::weights::{norm2, parse_entry, scratch, AxisBox, ScalarField};

/// A Lipschitz function with compact support.
#[derive(Clone, Debug)]
pub struct TestFunction {
    field: ScalarField,
    lipschitz_bound: Option<f64>,
}

impl TestFunction {
    /// Wraps a field that carries a support box.
    pub fn new(field: ScalarField, lipschitz_bound: Option<f64>) -> Result<Self> {
        if field.support().is_none() {
            return Err(LabError::InvalidParameter(format!("test function `{}` needs a support box", field.label())));
        }
        Ok(Self { field, lipschitz_bound })
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn label(&self) -> &str {
        self.field.label()
    }

    pub fn support(&self) -> &AxisBox {
        self.field.support().expect("test functions carry a support box")
    }

    pub fn lipschitz_bound(&self) -> Option<f64> {
        self.lipschitz_bound
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.field.value(x)
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.field.gradient(x, out)
    }

    /// `λφ`.
    pub fn scaled(&self, lambda: f64) -> TestFunction {
        let f = self.field.clone();
        let g = self.field.clone();
        let field = ScalarField::new(self.dim(), format!("{}*{lambda}", self.label()), move |x| lambda * f.value(x))
            .with_gradient(move |x, out| {
                g.gradient(x, out);
                out.iter_mut().for_each(|v| *v *= lambda);
            })
            .with_support(self.support().clone())
            .with_breaks(self.field.breaks().to_vec());
        TestFunction { field, lipschitz_bound: self.lipschitz_bound.map(|l| l * lambda.abs()) }
    }
}

/// `height·(1 − |x−c|²/r²)²` inside the ball of radius `r`, 0 outside.
pub fn make_bump(center: &[f64], radius: f64, height: f64) -> Result<TestFunction> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(LabError::InvalidParameter(format!("bump radius must be positive, got {radius}")));
    }
    let d = center.len();
    if d == 0 {
        return Err(LabError::InvalidParameter("bump needs a non-empty center".into()));
    }
    let c: Arc<[f64]> = center.into();
    let c2 = Arc::clone(&c);
    let inv_r2 = 1.0 / (radius * radius);
    let field = ScalarField::new(d, format!("bump(r={radius},h={height})"), move |x| {
        let s = x.iter().zip(c.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * inv_r2;
        if s < 1.0 {
            height * (1.0 - s) * (1.0 - s)
        } else {
            0.0
        }
    })
    .with_gradient(move |x, g| {
        let s = x.iter().zip(c2.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * inv_r2;
        for k in 0..x.len() {
            g[k] = if s < 1.0 { -4.0 * height * (1.0 - s) * (x[k] - c2[k]) * inv_r2 } else { 0.0 };
        }
    })
    .with_support(AxisBox::around(center, radius)?);
    // max of 4h(1−ρ²)ρ/r is at ρ = 1/√3
    let lip = 8.0 * height.abs() / (3.0 * 3f64.sqrt() * radius);
    TestFunction::new(field, Some(lip))
}

fn hat_profile(s: f64, plateau: f64, ramp: f64) -> (f64, f64) {
    let a = s.abs();
    if a <= plateau {
        (1.0, 0.0)
    } else if a < plateau + ramp {
        ((plateau + ramp - a) / ramp, -s.signum() / ramp)
    } else {
        (0.0, 0.0)
    }
}

/// Tensor-product hat: `height` on the cube `|x_k − c_k| ≤ plateau`, falling
/// linearly to 0 over `ramp` on every axis.
pub fn make_hat(center: &[f64], plateau: f64, ramp: f64, height: f64) -> Result<TestFunction> {
    if !(plateau >= 0.0) || !(ramp > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "hat needs plateau >= 0 and ramp > 0, got ({plateau}, {ramp})"
        )));
    }
    let d = center.len();
    if d == 0 {
        return Err(LabError::InvalidParameter("hat needs a non-empty center".into()));
    }
    let c: Arc<[f64]> = center.into();
    let c2 = Arc::clone(&c);
    let breaks = center
        .iter()
        .map(|&ck| vec![ck - plateau - ramp, ck - plateau, ck + plateau, ck + plateau + ramp])
        .collect();
    let field = ScalarField::new(d, format!("hat(plateau={plateau},ramp={ramp},h={height})"), move |x| {
        height * x.iter().zip(c.iter()).map(|(a, b)| hat_profile(a - b, plateau, ramp).0).product::<f64>()
    })
    .with_gradient(move |x, g| {
        let mut vals = [0.0; 8];
        let mut ders = [0.0; 8];
        let mut vh = Vec::new();
        let mut dh = Vec::new();
        let v = scratch(x.len(), &mut vals, &mut vh);
        let dv = scratch(x.len(), &mut ders, &mut dh);
        for k in 0..x.len() {
            (v[k], dv[k]) = hat_profile(x[k] - c2[k], plateau, ramp);
        }
        for k in 0..x.len() {
            let others: f64 = (0..x.len()).filter(|&j| j != k).map(|j| v[j]).product();
            g[k] = height * dv[k] * others;
        }
    })
    .with_support(AxisBox::around(center, plateau + ramp)?)
    .with_breaks(breaks);
    let lip = height.abs() * (d as f64).sqrt() / ramp;
    TestFunction::new(field, Some(lip))
}

/// `ξ_n`: 1 on `|x| < n`, `2 − |x|/n` on `n < |x| < 2n`, 0 beyond.
pub fn cutoff_xi(n: u32, d: usize) -> Result<TestFunction> {
    if n == 0 {
        return Err(LabError::InvalidParameter("cutoff needs n >= 1".into()));
    }
    if d == 0 {
        return Err(LabError::InvalidParameter("dimension must be positive".into()));
    }
    let nf = n as f64;
    let field = ScalarField::new(d, format!("cutoff(n={n})"), move |x| {
        let r = norm2(x);
        if r <= nf {
            1.0
        } else if r < 2.0 * nf {
            2.0 - r / nf
        } else {
            0.0
        }
    })
    .with_gradient(move |x, g| {
        let r = norm2(x);
        // the spheres |x| = n, 2n carry gradient 0
        let on_annulus = r > nf && r < 2.0 * nf;
        for k in 0..x.len() {
            g[k] = if on_annulus { -x[k] / (nf * r) } else { 0.0 };
        }
    })
    .with_support(AxisBox::cube(d, 2.0 * nf)?)
    .with_breaks(vec![vec![-2.0 * nf, -nf, nf, 2.0 * nf]; d]);
    TestFunction::new(field, Some(1.0 / nf))
}

/// Pointwise product `φξ` with gradient `ξ∇φ + φ∇ξ`; the support is `φ`'s.
pub fn multiply(phi: &TestFunction, xi: &ScalarField) -> Result<TestFunction> {
    if phi.dim() != xi.dim() {
        return Err(LabError::DimensionMismatch { expected: phi.dim(), got: xi.dim() });
    }
    let (a, b) = (phi.field.clone(), xi.clone());
    let (ga, gb) = (phi.field.clone(), xi.clone());
    let d = phi.dim();
    let field = ScalarField::new(d, format!("{}*{}", phi.label(), xi.label()), move |x| a.value(x) * b.value(x))
        .with_gradient(move |x, g| {
            let mut s1 = [0.0; 8];
            let mut h1 = Vec::new();
            let gxi = scratch(x.len(), &mut s1, &mut h1);
            ga.gradient(x, g);
            gb.gradient(x, gxi);
            let (pv, xv) = (ga.value(x), gb.value(x));
            for k in 0..x.len() {
                g[k] = xv * g[k] + pv * gxi[k];
            }
        })
        .with_support(phi.support().clone())
        .with_breaks(phi.field.breaks().to_vec())
        .with_breaks(clip_breaks(xi.breaks(), phi.support()));
    TestFunction::new(field, None)
}

/// `a − b` with gradient `∇a − ∇b`; the support is the union of both.
pub fn difference(a: &TestFunction, b: &TestFunction) -> Result<TestFunction> {
    if a.dim() != b.dim() {
        return Err(LabError::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let (fa, fb) = (a.field.clone(), b.field.clone());
    let (ga, gb) = (a.field.clone(), b.field.clone());
    let field = ScalarField::new(a.dim(), format!("{}-{}", a.label(), b.label()), move |x| fa.value(x) - fb.value(x))
        .with_gradient(move |x, g| {
            let mut s1 = [0.0; 8];
            let mut h1 = Vec::new();
            let gb_out = scratch(x.len(), &mut s1, &mut h1);
            ga.gradient(x, g);
            gb.gradient(x, gb_out);
            for k in 0..x.len() {
                g[k] -= gb_out[k];
            }
        })
        .with_support(a.support().union(b.support()))
        .with_breaks(a.field.breaks().to_vec())
        .with_breaks(b.field.breaks().to_vec())
        .with_breaks(edges(a.support()))
        .with_breaks(edges(b.support()));
    let lip = a.lipschitz_bound.zip(b.lipschitz_bound).map(|(x, y)| x + y);
    TestFunction::new(field, lip)
}

fn edges(b: &AxisBox) -> Vec<Vec<f64>> {
    b.lo().iter().zip(b.hi()).map(|(l, h)| vec![*l, *h]).collect()
}

fn clip_breaks(breaks: &[Vec<f64>], support: &AxisBox) -> Vec<Vec<f64>> {
    (0..support.dim())
        .map(|k| {
            breaks
                .get(k)
                .map(|b| b.iter().copied().filter(|&t| t > support.lo()[k] && t < support.hi()[k]).collect())
                .unwrap_or_default()
        })
        .collect()
}

fn eta_raw(s2: f64) -> f64 {
    if s2 < 1.0 {
        (-1.0 / (1.0 - s2)).exp()
    } else {
        0.0
    }
}

/// `∫_{B₁} e^{−1/(1−|x|²)} dx` in dimension `d`.
fn eta_mass(d: usize) -> f64 {
    let rule = gauss_legendre(32);
    let panels = 64;
    let mut radial = 0.0;
    for p in 0..panels {
        let (a, b) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let r = m + h * t;
            radial += h * w * r.powi(d as i32 - 1) * eta_raw(r * r);
        }
    }
    // |S^{d-1}| = 2π^{d/2}/Γ(d/2), for d = 1, 2
    let sphere = match d {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => unreachable!("mollification is limited to d <= 2"),
    };
    sphere * radial
}

/// Lattice convolution `Σ_k φ(y_k) η_n(x − y_k) h^d` with `y_k = k·h`.
///
/// `η(x) = c·e^{−1/(1−|x|²)}` on the unit ball, `η_n(x) = n^d η(nx)`.
pub fn mollify(phi: &TestFunction, n: u32, grid_step: f64) -> Result<TestFunction> {
    let d = phi.dim();
    if d > 2 {
        return Err(LabError::InvalidParameter(format!("mollification is limited to d <= 2, got d = {d}")));
    }
    if n == 0 {
        return Err(LabError::InvalidParameter("mollifier needs n >= 1".into()));
    }
    let nf = n as f64;
    if !(grid_step > 0.0) || grid_step > 1.0 / (4.0 * nf) {
        return Err(LabError::GridTooCoarse(format!("grid_step {grid_step} exceeds 1/(4n) = {}", 1.0 / (4.0 * nf))));
    }
    let h = grid_step;
    let support = phi.support().clone();
    let lo: Vec<i64> = support.lo().iter().map(|v| (v / h).floor() as i64).collect();
    let hi: Vec<i64> = support.hi().iter().map(|v| (v / h).ceil() as i64).collect();
    let extent: Vec<usize> = lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as usize).collect();
    let total: usize = extent.iter().product();
    let mut samples = vec![0.0; total];
    let mut y = vec![0.0; d];
    for (idx, s) in samples.iter_mut().enumerate() {
        let mut rem = idx;
        for k in 0..d {
            y[k] = (lo[k] + (rem % extent[k]) as i64) as f64 * h;
            rem /= extent[k];
        }
        *s = phi.value(&y);
    }
    let scale = nf.powi(d as i32) * h.powi(d as i32) / eta_mass(d);
    let lattice = Arc::new(Lattice { lo, extent, samples, h, n: nf, scale });
    let (lv, lg) = (Arc::clone(&lattice), Arc::clone(&lattice));
    let field = ScalarField::new(d, format!("mollify({},n={n})", phi.label()), move |x| lv.convolve(x, None))
        .with_gradient(move |x, g| {
            lg.convolve(x, Some(g));
        })
        .with_support(support.expanded(1.0 / nf));
    TestFunction::new(field, None)
}

struct Lattice {
    lo: Vec<i64>,
    extent: Vec<usize>,
    samples: Vec<f64>,
    h: f64,
    n: f64,
    scale: f64,
}

impl Lattice {
    /// Value of the convolution at `x`; the gradient goes to `grad` when given.
    fn convolve(&self, x: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let d = x.len();
        let r = 1.0 / self.n;
        let mut k_lo = [0i64; 2];
        let mut k_hi = [0i64; 2];
        for k in 0..d {
            k_lo[k] = ((x[k] - r) / self.h).floor().max(self.lo[k] as f64) as i64;
            k_hi[k] = ((x[k] + r) / self.h).ceil().min((self.lo[k] + self.extent[k] as i64 - 1) as f64) as i64;
            if k_lo[k] > k_hi[k] {
                if let Some(g) = grad.as_deref_mut() {
                    g.fill(0.0);
                }
                return 0.0;
            }
        }
        let mut value = 0.0;
        let mut gsum = [0.0; 2];
        let mut k = k_lo;
        loop {
            let mut idx = 0usize;
            let mut stride = 1usize;
            let mut s2 = 0.0;
            let mut u = [0.0; 2];
            for a in 0..d {
                idx += (k[a] - self.lo[a]) as usize * stride;
                stride *= self.extent[a];
                u[a] = self.n * (x[a] - k[a] as f64 * self.h);
                s2 += u[a] * u[a];
            }
            let phi = self.samples[idx];
            if phi != 0.0 && s2 < 1.0 {
                let e = eta_raw(s2);
                value += phi * e;
                if grad.is_some() {
                    // ∂/∂x_a η(n(x−y)) = η · (−2 u_a/(1−s²)²) · n
                    let f = -2.0 * e / ((1.0 - s2) * (1.0 - s2));
                    for a in 0..d {
                        gsum[a] += phi * f * u[a] * self.n;
                    }
                }
            }
            let mut a = 0;
            loop {
                if a == d {
                    if let Some(g) = grad {
                        for b in 0..d {
                            g[b] = gsum[b] * self.scale;
                        }
                    }
                    return value * self.scale;
                }
                k[a] += 1;
                if k[a] <= k_hi[a] {
                    break;
                }
                k[a] = k_lo[a];
                a += 1;
            }
        }
    }
}

fn vector_param(map: &BTreeMap<String, f64>, key: &str, dim: usize, default: f64) -> Vec<f64> {
    if let Some(v) = map.get(key) {
        return vec![*v; dim];
    }
    (0..dim).map(|k| map.get(&format!("{key}{k}")).copied().unwrap_or(default)).collect()
}

fn check_keys(name: &str, map: &BTreeMap<String, f64>, allowed: &[&str], dim: usize) -> Result<()> {
    for k in map.keys() {
        let base = k.trim_end_matches(|c: char| c.is_ascii_digit());
        let indexed_ok = base != k && base == "center" && k[base.len()..].parse::<usize>().is_ok_and(|i| i < dim);
        if !allowed.contains(&k.as_str()) && !indexed_ok {
            return Err(LabError::Config(format!("test function `{name}` has no parameter `{k}`")));
        }
    }
    Ok(())
}

/// Parses `"bump:center=0,radius=1,height=1"`, `"hat:plateau=2,ramp=1"` or
/// `"cutoff:n=4"`. A scalar `center` is broadcast; `center0`, `center1`, …
/// set single coordinates.
pub fn parse_test_function(spec: &str, dim: usize) -> Result<TestFunction> {
    let (name, map) = parse_entry(spec)?;
    let get = |k: &str, default: f64| map.get(k).copied().unwrap_or(default);
    match name.as_str() {
        "bump" => {
            check_keys(&name, &map, &["center", "radius", "height"], dim)?;
            make_bump(&vector_param(&map, "center", dim, 0.0), get("radius", 1.0), get("height", 1.0))
        }
        "hat" => {
            check_keys(&name, &map, &["center", "plateau", "ramp", "height"], dim)?;
            make_hat(&vector_param(&map, "center", dim, 0.0), get("plateau", 0.0), get("ramp", 1.0), get("height", 1.0))
        }
        "cutoff" => {
            check_keys(&name, &map, &["n"], dim)?;
            let n = get("n", 1.0);
            if n < 1.0 || n.fract() != 0.0 {
                return Err(LabError::InvalidParameter(format!("cutoff needs an integer n >= 1, got {n}")));
            }
            cutoff_xi(n as u32, dim)
        }
        other => Err(LabError::UnknownCatalogEntry(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadratureSpec, Region};

    #[test]
    fn bump_values() {
        let b = make_bump(&[0.0], 1.0, 1.0).unwrap();
        assert_eq!(b.value(&[0.0]), 1.0);
        let mut g = [1.0];
        b.gradient(&[1.0], &mut g);
        assert_eq!((b.value(&[1.0]), g[0]), (0.0, 0.0));
        assert!(make_bump(&[0.0], 0.0, 1.0).is_err());
        let r = integrate(1, |x| b.value(x), &Region::of_field(b.field()), &QuadratureSpec::default_for(1)).unwrap();
        assert!((r.value - 16.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_values() {
        let xi = cutoff_xi(1, 1).unwrap();
        assert_eq!(xi.value(&[1.5]), 0.5);
        assert_eq!(cutoff_xi(3, 2).unwrap().value(&[7.0, 0.0]), 0.0);
        for d in 1..=3 {
            let xi = cutoff_xi(2, d).unwrap();
            let x: Vec<f64> = (0..d).map(|k| 3.0 / (d as f64).sqrt() * if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let mut g = vec![0.0; d];
            xi.gradient(&x, &mut g);
            for p in [1.0, 2.0] {
                let lp: f64 = g.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
                assert!(lp <= (d as f64).powf(1.0 / p) / 2.0 + 1e-15);
            }
        }
    }

    #[test]
    fn hat_gradient_matches_finite_differences() {
        let h = make_hat(&[0.2, -0.1], 0.5, 1.0, 2.0).unwrap();
        for x in [[0.9, 0.0], [-0.8, 0.3], [0.1, 1.1], [1.3, -1.2]] {
            let (mut ga, mut gf) = ([0.0; 2], [0.0; 2]);
            h.gradient(&x, &mut ga);
            h.field().fd_gradient(&x, &mut gf);
            for k in 0..2 {
                assert!((ga[k] - gf[k]).abs() < 1e-6, "{x:?} {ga:?} {gf:?}");
            }
        }
    }

    #[test]
    fn product_with_cutoff() {
        let b = make_bump(&[0.0], 2.0, 1.0).unwrap();
        let xi = cutoff_xi(1, 1).unwrap();
        let p = multiply(&b, xi.field()).unwrap();
        let x = [1.5];
        let (mut ga, mut gf) = ([0.0], [0.0]);
        p.gradient(&x, &mut ga);
        p.field().fd_gradient(&x, &mut gf);
        assert!((ga[0] - gf[0]).abs() < 1e-5 * ga[0].abs().max(1.0));
        let inner = make_bump(&[0.0], 0.9, 1.0).unwrap();
        let same = multiply(&inner, xi.field()).unwrap();
        for t in [-0.7, 0.0, 0.3, 0.85] {
            assert_eq!(same.value(&[t]), inner.value(&[t]));
        }
    }

    #[test]
    fn mollifier_mass_and_support() {
        let b = make_bump(&[0.0], 1.0, 1.0).unwrap();
        let m = mollify(&b, 4, 1.0 / 64.0).unwrap();
        let r = integrate(1, |x| m.value(x), &Region::of_field(m.field()), &QuadratureSpec::default_for(1).with_rel_tol(1e-6))
            .unwrap();
        assert!((r.value - 16.0 / 15.0).abs() < 1e-4, "{}", r.value);
        let hat = make_hat(&[0.0], 1.0, 0.01, 1.0).unwrap();
        let m = mollify(&hat, 8, 1.0 / 64.0).unwrap();
        assert_eq!(m.value(&[1.01 + 2.0 / 8.0]), 0.0);
        assert!(matches!(mollify(&b, 4, 0.1), Err(LabError::GridTooCoarse(_))));
    }

    #[test]
    fn mollifier_gradient_matches_finite_differences() {
        let b = make_bump(&[0.0, 0.0], 1.0, 1.0).unwrap();
        let m = mollify(&b, 4, 1.0 / 32.0).unwrap();
        let x = [0.3, -0.2];
        let (mut ga, mut gf) = ([0.0; 2], [0.0; 2]);
        m.gradient(&x, &mut ga);
        m.field().fd_gradient(&x, &mut gf);
        for k in 0..2 {
            assert!((ga[k] - gf[k]).abs() < 1e-6, "{ga:?} {gf:?}");
        }
    }

    #[test]
    fn parse_examples() {
        let b = parse_test_function("bump:center=0,radius=1,height=1", 2).unwrap();
        assert_eq!(b.value(&[0.0, 0.0]), 1.0);
        let c = parse_test_function("cutoff:n=4", 1).unwrap();
        assert_eq!(c.value(&[6.0]), 0.5);
        let h = parse_test_function("hat:center0=1,plateau=1,ramp=1", 2).unwrap();
        assert_eq!(h.value(&[1.5, 0.5]), 1.0);
        assert!(parse_test_function("hat:width=1", 1).is_err());
        assert!(parse_test_function("spike", 1).is_err());
    }
}
