//! The fixed catalog of weight functions, addressable by name.
//!
//! All formulas are radial in `r = |x|`:
//!
//! | name           | ω(x)                                                  |
//! |----------------|-------------------------------------------------------|
//! | `one`          | 1                                                     |
//! | `gauss`        | e^{−a r²}                                             |
//! | `exp_lin`      | e^{−a r}                                              |
//! | `exp_norm`     | e^{−√(1+r²)}                                          |
//! | `poly`         | (1+r²)^{−α}                                           |
//! | `oscillatory`  | (1+r²)^{−α} (1 + sin(r^β) + 1/(1+r²))                 |
//! | `appendix_osc` | e^{−√(1+r²) − sin(e^{r²})}                            |
//! | `staircase`    | d = 1 only, piecewise constant (see [`staircase_value`]) |

use std::collections::BTreeMap;

use super::field::{norm2, ScalarField};
use super::weight::Weight;
use crate::error::{LabError, Result};

/// Parameter names of each catalog entry, in positional order.
pub fn parameter_names(name: &str) -> Option<&'static [&'static str]> {
    Some(match name {
        "one" | "exp_norm" | "appendix_osc" | "staircase" => &[],
        "gauss" | "exp_lin" => &["a"],
        "poly" => &["alpha"],
        "oscillatory" => &["alpha", "beta"],
        _ => return None,
    })
}

/// Splits `"name:k=v,k=v"` into the name and its key/value map.
pub fn parse_entry(spec: &str) -> Result<(String, BTreeMap<String, f64>)> {
    let spec = spec.trim();
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n.trim(), r.trim()),
        None => (spec, ""),
    };
    if name.is_empty() {
        return Err(LabError::Config(format!("empty catalog name in `{spec}`")));
    }
    let mut params = BTreeMap::new();
    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| LabError::Config(format!("expected key=value, got `{item}` in `{spec}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| LabError::Config(format!("bad number `{v}` in `{spec}`")))?;
        params.insert(k.trim().to_string(), v);
    }
    Ok((name.to_string(), params))
}

/// Parses a weight such as `"oscillatory:alpha=1,beta=2"`.
pub fn parse_weight(spec: &str, dim: usize) -> Result<Weight> {
    let (name, map) = parse_entry(spec)?;
    let names = parameter_names(&name).ok_or_else(|| LabError::UnknownCatalogEntry(name.clone()))?;
    for k in map.keys() {
        if !names.contains(&k.as_str()) {
            return Err(LabError::Config(format!("weight `{name}` has no parameter `{k}`")));
        }
    }
    let params = names
        .iter()
        .map(|k| map.get(*k).copied().ok_or_else(|| LabError::Config(format!("weight `{name}` needs `{k}`"))))
        .collect::<Result<Vec<_>>>()?;
    make_catalog_weight(&name, &params, dim)
}

fn expect_params(name: &str, params: &[f64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(LabError::InvalidParameter(format!(
            "weight `{name}` takes {n} parameter(s), got {}",
            params.len()
        )));
    }
    if let Some(bad) = params.iter().find(|v| !v.is_finite()) {
        return Err(LabError::InvalidParameter(format!("weight `{name}`: non-finite parameter {bad}")));
    }
    Ok(())
}

fn origin_breaks(dim: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0]; dim]
}

/// Piecewise staircase on `(0, ∞)`: `n+1` on `(2n, 2n+1]` and `(n+1)²` on `(2n+1, 2n+2]`;
/// extended by 1 on `x ≤ 0`.
pub fn staircase_value(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let m = x.ceil() - 1.0; // x ∈ (m, m+1]
    let n = (m / 2.0).floor();
    if m as i64 % 2 == 0 {
        n + 1.0
    } else {
        (n + 1.0) * (n + 1.0)
    }
}

/// Builds a catalog weight from its name and positional parameters.
pub fn make_catalog_weight(name: &str, params: &[f64], dim: usize) -> Result<Weight> {
    if dim == 0 {
        return Err(LabError::InvalidParameter("dimension must be positive".into()));
    }
    let log = match name {
        "one" => {
            expect_params(name, params, 0)?;
            ScalarField::new(dim, "one", |_| 0.0).with_gradient(|_, g| g.fill(0.0))
        }
        "gauss" => {
            expect_params(name, params, 1)?;
            let a = params[0];
            ScalarField::new(dim, format!("gauss(a={a})"), move |x| -a * x.iter().map(|c| c * c).sum::<f64>())
                .with_gradient(move |x, g| {
                    for k in 0..x.len() {
                        g[k] = -2.0 * a * x[k];
                    }
                })
        }
        "exp_lin" => {
            expect_params(name, params, 1)?;
            let a = params[0];
            ScalarField::new(dim, format!("exp_lin(a={a})"), move |x| -a * norm2(x))
                .with_gradient(move |x, g| {
                    let r = norm2(x);
                    for k in 0..x.len() {
                        g[k] = if r > 0.0 { -a * x[k] / r } else { 0.0 };
                    }
                })
                .with_breaks(origin_breaks(dim))
        }
        "exp_norm" => {
            expect_params(name, params, 0)?;
            ScalarField::new(dim, "exp_norm", |x| -(1.0 + x.iter().map(|c| c * c).sum::<f64>()).sqrt())
                .with_gradient(|x, g| {
                    let s = (1.0 + x.iter().map(|c| c * c).sum::<f64>()).sqrt();
                    for k in 0..x.len() {
                        g[k] = -x[k] / s;
                    }
                })
        }
        "poly" => {
            expect_params(name, params, 1)?;
            let alpha = params[0];
            if alpha <= 0.0 {
                return Err(LabError::InvalidParameter(format!("poly needs alpha > 0, got {alpha}")));
            }
            ScalarField::new(dim, format!("poly(alpha={alpha})"), move |x| {
                -alpha * x.iter().map(|c| c * c).sum::<f64>().ln_1p()
            })
            .with_gradient(move |x, g| {
                let q = 1.0 / (1.0 + x.iter().map(|c| c * c).sum::<f64>());
                for k in 0..x.len() {
                    g[k] = -2.0 * alpha * x[k] * q;
                }
            })
        }
        "oscillatory" => {
            expect_params(name, params, 2)?;
            let (alpha, beta) = (params[0], params[1]);
            if alpha <= 0.0 || beta <= 0.0 {
                return Err(LabError::InvalidParameter(format!(
                    "oscillatory needs alpha > 0 and beta > 0, got ({alpha}, {beta})"
                )));
            }
            ScalarField::new(dim, format!("oscillatory(alpha={alpha},beta={beta})"), move |x| {
                let r2 = x.iter().map(|c| c * c).sum::<f64>();
                let s = r2.sqrt().powf(beta);
                let bracket = 1.0 + s.sin() + 1.0 / (1.0 + r2);
                -alpha * r2.ln_1p() + bracket.ln()
            })
            .with_gradient(move |x, g| {
                let r2 = x.iter().map(|c| c * c).sum::<f64>();
                let r = r2.sqrt();
                let q = 1.0 / (1.0 + r2);
                let s = r.powf(beta);
                let bracket = 1.0 + s.sin() + q;
                // d/dr (r^β) = β r^{β−1}; radial direction x/r (taken as 0 at the origin)
                let radial = if r > 0.0 { beta * r.powf(beta - 1.0) * s.cos() / r } else { 0.0 };
                for k in 0..x.len() {
                    let d_bracket = radial * x[k] - 2.0 * x[k] * q * q;
                    g[k] = -2.0 * alpha * x[k] * q + d_bracket / bracket;
                }
            })
            .with_breaks(origin_breaks(dim))
        }
        "appendix_osc" => {
            expect_params(name, params, 0)?;
            // e^{|x|²} overflows for |x|² > ~709; the oscillating factor is dropped there,
            // where ω is below e^{-26}.
            ScalarField::new(dim, "appendix_osc", |x| {
                let r2 = x.iter().map(|c| c * c).sum::<f64>();
                let phase = r2.exp();
                let osc = if phase.is_finite() { phase.sin() } else { 0.0 };
                -(1.0 + r2).sqrt() - osc
            })
            .with_gradient(|x, g| {
                let r2 = x.iter().map(|c| c * c).sum::<f64>();
                let s = (1.0 + r2).sqrt();
                let phase = r2.exp();
                let osc = if phase.is_finite() { 2.0 * phase * phase.cos() } else { 0.0 };
                for k in 0..x.len() {
                    g[k] = -x[k] / s - x[k] * osc;
                }
            })
        }
        "staircase" => {
            expect_params(name, params, 0)?;
            if dim != 1 {
                return Err(LabError::InvalidParameter(format!("staircase is defined for d = 1 only, got d = {dim}")));
            }
            ScalarField::new(1, "staircase", |x| staircase_value(x[0]).ln())
        }
        other => return Err(LabError::UnknownCatalogEntry(other.to_string())),
    };
    Weight::from_log(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn one_is_constant() {
        let w = make_catalog_weight("one", &[], 2).unwrap();
        assert_eq!(w.value(&[3.0, 4.0]), 1.0);
    }

    #[test]
    fn oscillatory_at_origin() {
        let w = parse_weight("oscillatory:alpha=1,beta=2", 1).unwrap();
        assert!(close(w.value(&[0.0]), 2.0, 1e-15));
    }

    #[test]
    fn appendix_osc_at_origin() {
        let w = make_catalog_weight("appendix_osc", &[], 1).unwrap();
        let expected = (-1.0 - 1.0_f64.sin()).exp();
        assert!(close(w.value(&[0.0]), expected, 1e-15));
    }

    #[test]
    fn errors() {
        assert!(matches!(make_catalog_weight("nope", &[], 1), Err(LabError::UnknownCatalogEntry(_))));
        assert!(make_catalog_weight("poly", &[0.0], 1).is_err());
        assert!(make_catalog_weight("poly", &[-1.0], 1).is_err());
        assert!(make_catalog_weight("staircase", &[], 2).is_err());
        assert!(parse_weight("gauss", 1).is_err());
        assert!(parse_weight("gauss:b=1", 1).is_err());
    }

    #[test]
    fn staircase_levels() {
        assert_eq!(staircase_value(0.5), 1.0);
        assert_eq!(staircase_value(1.0), 1.0);
        assert_eq!(staircase_value(1.5), 1.0);
        assert_eq!(staircase_value(2.5), 2.0);
        assert_eq!(staircase_value(3.0), 2.0);
        assert_eq!(staircase_value(3.5), 4.0);
        assert_eq!(staircase_value(4.5), 3.0);
        assert_eq!(staircase_value(5.5), 9.0);
        let w = make_catalog_weight("staircase", &[], 1).unwrap();
        assert!(!w.has_analytic_gradient());
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let specs = [
            "gauss:a=1.3",
            "exp_lin:a=2",
            "exp_norm",
            "poly:alpha=1.5",
            "oscillatory:alpha=1,beta=2",
            "oscillatory:alpha=2,beta=3",
            "appendix_osc",
        ];
        for dim in 1..=3 {
            for spec in specs {
                let w = parse_weight(spec, dim).unwrap();
                for i in 0..20 {
                    let x: Vec<f64> = (0..dim).map(|k| (0.13 + 0.071 * (i * (k + 2)) as f64) % 2.4 - 1.2).collect();
                    if spec == "appendix_osc" && x.iter().map(|c| c * c).sum::<f64>() > 2.0 {
                        // finite differences cannot resolve the phase e^{|x|²} further out
                        continue;
                    }
                    let mut ga = vec![0.0; dim];
                    let mut gf = vec![0.0; dim];
                    w.log_gradient(&x, &mut ga);
                    w.log_field().fd_gradient(&x, &mut gf);
                    for k in 0..dim {
                        let scale = ga[k].abs().max(1.0);
                        assert!((ga[k] - gf[k]).abs() < 1e-4 * scale, "{spec} d={dim} x={x:?} {ga:?} vs {gf:?}");
                    }
                }
            }
        }
    }
}
