//! Distribution specs: `uniform`, `uniform-nonzero`, `point:k`, or an
//! explicit list `p0,p1,...`.

use sumprod_core::Pmf;

use crate::error::{CliError, CliResult};

const SUM_TOLERANCE: f64 = 1e-9;

pub fn parse_dist(spec: &str, q: usize) -> CliResult<Pmf<f64>> {
    let bad = |msg: String| CliError::usage(format!("distribution '{spec}': {msg}"));
    let spec_t = spec.trim();
    let pmf = match spec_t {
        "uniform" => Pmf::uniform(q)?,
        "uniform-nonzero" => {
            let nz: Vec<usize> = (1..q).collect();
            Pmf::uniform_on(q, &nz)?
        }
        s if s.starts_with("point:") => {
            let k: usize = s["point:".len()..]
                .trim()
                .parse()
                .map_err(|_| bad("point index is not a number".into()))?;
            if k >= q {
                return Err(bad(format!("point {k} is outside 0..{q}")));
            }
            Pmf::point(q, k)?
        }
        s => {
            let probs = s
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("'{}' is not a number", t.trim())))
                })
                .collect::<CliResult<Vec<f64>>>()?;
            if probs.len() != q {
                return Err(bad(format!(
                    "{} entries given, the alphabet has {q}",
                    probs.len()
                )));
            }
            if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
                return Err(bad(format!("entry {p} is not a probability")));
            }
            let sum: f64 = probs.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(bad(format!("entries sum to {sum}, not 1")));
            }
            Pmf::from_weights(probs)?
        }
    };
    Ok(pmf)
}

/// `p0` on zero and the rest spread evenly; the default noise law.
pub fn biased_toward_zero(q: usize, p0: f64) -> Pmf<f64> {
    let rest = (1.0 - p0) / (q - 1) as f64;
    Pmf::new((0..q).map(|i| if i == 0 { p0 } else { rest }).collect())
        .expect("valid by construction")
}
