//! Golden-section search for one-dimensional minimization.

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt 5 - 1) / 2

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Minimizes a unimodal `f` on `[lo, hi]` until the bracket is narrower than `xtol`.
///
/// The returned point is the best evaluated point, including both ends of the
/// initial bracket, so a minimum sitting on the boundary is found too.
pub fn golden_section_min<F>(mut f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut best = Minimum { x: a, value: f(a), evaluations: 1 };
    let fb = f(b);
    best.evaluations += 1;
    if fb < best.value {
        best.x = b;
        best.value = fb;
    }

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    best.evaluations += 2;

    let mut iter = 0;
    while (b - a) > xtol && iter < max_iter {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        best.evaluations += 1;
        iter += 1;
    }

    for (x, v) in [(c, fc), (d, fd)] {
        if v < best.value {
            best.x = x;
            best.value = v;
        }
    }
    best
}

/// Maximizes `f` on `[lo, hi]`; the returned `value` is the maximum.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    let m = golden_section_min(|x| -f(x), lo, hi, xtol, max_iter);
    Minimum { value: -m.value, ..m }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_vertex() {
        let m = golden_section_min(|x| (x - 0.3).powi(2) + 1.0, -2.0, 5.0, 1e-12, 500);
        assert!((m.x - 0.3).abs() < 1e-6);
        assert!((m.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finds_kink_minimum() {
        let m = golden_section_min(|x| (x - 1.25).abs() * 300.0, 0.0, 4.0, 1e-13, 500);
        assert!(m.value < 1e-9);
    }

    #[test]
    fn boundary_minimum() {
        let m = golden_section_min(|x| x, 1.0, 2.0, 1e-10, 500);
        assert_eq!(m.x, 1.0);
    }

    #[test]
    fn maximize() {
        let m = golden_section_max(|x| -(x + 1.0).powi(2), -3.0, 3.0, 1e-10, 500);
        assert!((m.x + 1.0).abs() < 1e-5);
        assert!(m.value.abs() < 1e-10);
    }
}
