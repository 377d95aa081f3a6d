//! Strong error of the interpolated skew walk, measured on embedded walks: the
//! walk at scale `n` is read off a fine reference walk at its successive passage
//! times through the lattice `Z / n`.

use rand::RngCore;

use super::report::{Target, ToleranceRule, ValidationReport};
use crate::error::{Error, Result};
use crate::numerics::mean_and_se;
use crate::rng::{open_unit, par_map_paths, RngStream};
use crate::skew::SkewParameter;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateOptions {
    pub horizon: f64,
    pub replications: usize,
    pub eval_points: usize,
    /// Minimal ratio between the reference scale and the largest `n`.
    pub min_ratio: u32,
    /// Required upper bound on the fitted log-log slope.
    pub slope_bound: f64,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            replications: 1000,
            eval_points: 256,
            min_ratio: 16,
            slope_bound: -0.35,
        }
    }
}

struct Embedded {
    ratio: i64,
    anchor: i64,
    values: Vec<i64>,
    needed: usize,
}

/// `|X^n_t - X_t|` at the evaluation times, one row per `n`.
fn replication<R: RngCore>(alpha: f64, n_list: &[u32], reference_n: u32, opts: &RateOptions, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let big_n = reference_n as f64;
    let fine_steps = (big_n * big_n * opts.horizon).ceil() as usize;
    let eval_idx: Vec<f64> = (1..=opts.eval_points)
        .map(|j| j as f64 * opts.horizon / opts.eval_points as f64)
        .collect();
    let mut fine_at = vec![0.0; opts.eval_points];
    let mut emb: Vec<Embedded> = n_list
        .iter()
        .map(|&n| Embedded {
            ratio: (reference_n / n) as i64,
            anchor: 0,
            values: vec![0],
            needed: (n as f64 * n as f64 * opts.horizon).ceil() as usize + 2,
        })
        .collect();
    let cap = 64 * fine_steps;
    let mut s: i64 = 0;
    let mut prev: i64;
    let mut next_eval = 0;
    let mut bits = 0u64;
    let mut left = 0u32;
    let mut k = 0usize;
    loop {
        // fine step k -> k+1
        let before = s;
        if s == 0 {
            s = if open_unit(rng) < alpha { 1 } else { -1 };
        } else {
            if left == 0 {
                bits = rng.next_u64();
                left = 64;
            }
            s += if bits & 1 == 1 { 1 } else { -1 };
            bits >>= 1;
            left -= 1;
        }
        k += 1;
        prev = before;
        while next_eval < opts.eval_points {
            let pos = eval_idx[next_eval] * big_n * big_n;
            if pos > k as f64 {
                break;
            }
            let w = pos - (k - 1) as f64;
            fine_at[next_eval] = ((1.0 - w) * prev as f64 + w * s as f64) / big_n;
            next_eval += 1;
        }
        let mut done = next_eval == opts.eval_points;
        for e in emb.iter_mut() {
            if e.values.len() < e.needed {
                if (s - e.anchor).abs() == e.ratio {
                    e.anchor = s;
                    e.values.push(s);
                }
                done &= e.values.len() >= e.needed;
            }
        }
        if done {
            break;
        }
        if k > cap {
            return Err(Error::Invalid("embedded walks did not complete".into()));
        }
    }
    let rows = emb
        .iter()
        .zip(n_list)
        .map(|(e, &n)| {
            let n2 = n as f64 * n as f64;
            eval_idx
                .iter()
                .zip(&fine_at)
                .map(|(&t, &xf)| {
                    let pos = t * n2;
                    let i = pos.floor() as usize;
                    let w = pos - i as f64;
                    let c = ((1.0 - w) * e.values[i] as f64 + w * e.values[i + 1] as f64) / big_n;
                    (c - xf).abs()
                })
                .collect()
        })
        .collect();
    Ok(rows)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `sup_t E|X^n_t - X_t|` for every `n` in `n_list`, and the fitted rate. The report
/// passes when the slope is at most `opts.slope_bound`; `monotone` is 1 when the
/// errors strictly decrease along `n_list`.
pub fn convergence_rate(
    alpha: SkewParameter,
    n_list: &[u32],
    reference_n: u32,
    opts: &RateOptions,
    rng: RngStream,
) -> Result<ValidationReport> {
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::Invalid("n_list must be ascending with at least two positive entries".into()));
    }
    let max_n = *n_list.last().unwrap();
    if reference_n < opts.min_ratio.saturating_mul(max_n) {
        return Err(Error::ReferenceTooCoarse {
            reference: reference_n,
            n: max_n,
        });
    }
    if let Some(&n) = n_list.iter().find(|&&n| reference_n % n != 0) {
        return Err(Error::Invalid(format!("reference scale {reference_n} is not a multiple of {n}")));
    }
    if opts.replications == 0 || opts.eval_points == 0 {
        return Err(Error::EmptySample);
    }
    let a = alpha.alpha();
    let reps = par_map_paths(rng, opts.replications, |_, s| replication(a, n_list, reference_n, opts, &mut s.rng()));
    let reps = reps.into_iter().collect::<Result<Vec<_>>>()?;
    let mut sup = Vec::with_capacity(n_list.len());
    let mut sup_se = Vec::with_capacity(n_list.len());
    for (i, _) in n_list.iter().enumerate() {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for j in 0..opts.eval_points {
            let col: Vec<f64> = reps.iter().map(|r| r[i][j]).collect();
            let (m, se) = mean_and_se(&col);
            if m > best.0 {
                best = (m, se);
            }
        }
        sup.push(best.0);
        sup_se.push(best.1);
    }
    let xs: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let slope = loglog_slope(&xs, &sup);
    let monotone = sup.windows(2).all(|w| w[1] < w[0]);
    let mut r = ValidationReport::new(
        "convergence_rate",
        Target::Value(opts.slope_bound),
        slope,
        None,
        None,
        ToleranceRule::AtMost,
        Some(rng.seed),
        opts.replications,
    )
    .with_detail("reference_n", reference_n as f64)
    .with_detail("monotone", if monotone { 1.0 } else { 0.0 });
    for ((n, e), se) in n_list.iter().zip(&sup).zip(&sup_se) {
        r = r.with_detail(format!("error_n{n}"), *e).with_detail(format!("se_n{n}"), *se);
    }
    Ok(r)
}
