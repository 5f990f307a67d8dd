//! Weight functions, the catalog, and sampled probes (bounds, Lipschitz, equivalence).

mod catalog;
mod field;
mod weight;

pub use catalog::{make_catalog_weight, parameter_names, parse_entry, parse_weight, staircase_value};
pub use field::{norm2, norm_p, AxisBox, GradFn, ScalarField, ValueFn, DEFAULT_FD_SCALE};
pub(crate) use field::scratch;
pub use weight::{log_ratio_grad_norm, Weight, WeightPair};

use crate::error::{LabError, Result};
use crate::sampling::Halton;

/// Sampled `min`/`max` of a weight on a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub m: f64,
    pub big_m: f64,
}

impl Bounds {
    /// Compact boundedness holds on the box when `0 < m` and `M < ∞`.
    pub fn satisfied(&self) -> bool {
        self.m > 0.0 && self.big_m.is_finite()
    }
}

/// Calls `visit` on the box corners, its center and `n` Halton points.
pub fn for_each_sample(k: &AxisBox, n: usize, seed: u64, mut visit: impl FnMut(&[f64])) {
    for p in k.corners_and_center() {
        visit(&p);
    }
    let d = k.dim();
    let hd = d.min(12);
    let mut h = Halton::new(hd, seed);
    let mut u = vec![0.0; d];
    let mut x = vec![0.0; d];
    for i in 0..n {
        h.next_point(&mut u[..hd]);
        // coordinates past the Halton range cycle through shifted copies
        for j in hd..d {
            u[j] = (u[j % hd] + 0.618_033_988_749_895 * (j / hd) as f64 + i as f64 * 1e-9).fract();
        }
        k.map_unit(&u, &mut x);
        visit(&x);
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(LabError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Sampled `m(K,ω) = inf ω` and `M(K,ω) = sup ω`.
pub fn check_compact_boundedness(w: &Weight, k: &AxisBox, n_samples: usize, seed: u64) -> Result<Bounds> {
    check_dim(w.dim(), k.dim())?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for_each_sample(k, n_samples, seed, |x| {
        let l = w.log_value(x);
        lo = lo.min(l);
        hi = hi.max(l);
    });
    Ok(Bounds { m: lo.exp(), big_m: hi.exp() })
}

/// Lower estimate of the Lipschitz constant of `f` on `k` from sampled pairs.
///
/// Each pair couples a Halton point with a partner at a dyadic offset, so both
/// long-range and local slopes are probed.
pub fn estimate_lipschitz(f: &ScalarField, k: &AxisBox, n_pairs: usize, seed: u64) -> Result<f64> {
    check_dim(f.dim(), k.dim())?;
    let d = k.dim();
    let diam = k.diameter();
    let mut dir_gen = Halton::new(d.min(12), seed ^ 0x9e37_79b9);
    let mut dir = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut best: f64 = 0.0;
    let mut i = 0usize;
    for_each_sample(k, n_pairs, seed, |x| {
        dir_gen.next_point(&mut dir[..d.min(12)]);
        for v in dir.iter_mut() {
            *v = 2.0 * *v - 1.0;
        }
        let len = norm2(&dir).max(1e-12);
        let delta = diam * 0.5_f64.powi((i % 24) as i32 + 1);
        i += 1;
        for j in 0..d {
            y[j] = x[j] + delta * dir[j] / len;
        }
        k.clamp(&mut y);
        let dist = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if dist > 0.0 {
            let slope = (f.value(x) - f.value(&y)).abs() / dist;
            if slope.is_finite() {
                best = best.max(slope);
            }
        }
    });
    Ok(best)
}

/// Sampled `(min, max)` of `w/ρ` on `k`.
pub fn check_equivalence(w: &Weight, rho: &Weight, k: &AxisBox, n_samples: usize, seed: u64) -> Result<(f64, f64)> {
    check_dim(w.dim(), rho.dim())?;
    check_dim(w.dim(), k.dim())?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for_each_sample(k, n_samples, seed, |x| {
        let l = w.log_value(x) - rho.log_value(x);
        lo = lo.min(l);
        hi = hi.max(l);
    });
    Ok((lo.exp(), hi.exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(spec: &str, d: usize) -> Weight {
        parse_weight(spec, d).unwrap()
    }

    #[test]
    fn bounds_of_constant_and_gauss() {
        let k = AxisBox::cube(2, 3.0).unwrap();
        let b = check_compact_boundedness(&w("one", 2), &k, 100, 1).unwrap();
        assert_eq!((b.m, b.big_m), (1.0, 1.0));
        let k = AxisBox::cube(1, 2.0).unwrap();
        let b = check_compact_boundedness(&w("gauss:a=1", 1), &k, 500, 1).unwrap();
        assert!((b.m - (-4.0f64).exp()).abs() < 1e-15);
        assert_eq!(b.big_m, 1.0);
        assert!(b.satisfied());
    }

    #[test]
    fn staircase_bounds() {
        let s = w("staircase", 1);
        let k = AxisBox::new(vec![2.5], vec![3.5]).unwrap();
        let b = check_compact_boundedness(&s, &k, 1000, 3).unwrap();
        assert_eq!((b.m, b.big_m), (2.0, 4.0));
        let k = AxisBox::new(vec![2.2], vec![2.9]).unwrap();
        let b = check_compact_boundedness(&s, &k, 1000, 3).unwrap();
        assert_eq!((b.m, b.big_m), (2.0, 2.0));
    }

    #[test]
    fn lipschitz_of_abs() {
        let f = ScalarField::new(1, "abs", |x| x[0].abs());
        let k = AxisBox::cube(1, 1.0).unwrap();
        let l = estimate_lipschitz(&f, &k, 10_000, 7).unwrap();
        assert!(l > 0.99 && l <= 1.0, "{l}");
    }

    #[test]
    fn equivalence_examples() {
        let k = AxisBox::cube(1, 3.0).unwrap();
        let g1 = w("gauss:a=1", 1);
        assert_eq!(check_equivalence(&g1, &g1, &k, 100, 0).unwrap(), (1.0, 1.0));
        let (c, big_c) = check_equivalence(&g1, &w("gauss:a=2", 1), &k, 100, 0).unwrap();
        assert_eq!(c, 1.0);
        assert!((big_c - 9.0f64.exp()).abs() < 1e-9 * 9.0f64.exp());
    }

    #[test]
    fn dimension_mismatch() {
        let k = AxisBox::cube(2, 1.0).unwrap();
        assert!(check_compact_boundedness(&w("one", 1), &k, 10, 0).is_err());
    }
}
