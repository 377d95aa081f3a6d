use super::report::{Target, ToleranceRule, ValidationReport};
use crate::error::{Error, Result};
use crate::numerics::{mean_and_se, pairwise_sum};
use crate::path::SampledPath;
use crate::skew::SkewParameter;

/// Bandwidth estimates of the one-sided and symmetric local times at 0, and the
/// maximal residual of `X = x0 + B + beta L` when the noise is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalTimeEstimate {
    pub plus: f64,
    pub minus: f64,
    pub symmetric: f64,
    pub residual: Option<f64>,
}

/// Streaming estimator over a uniform grid (left-point rule, zeros split evenly).
#[derive(Debug, Clone)]
pub struct LocalTimeAccumulator {
    eps: f64,
    dt: f64,
    x0: f64,
    beta: Option<f64>,
    plus_time: f64,
    minus_time: f64,
    b: f64,
    residual: f64,
    started: bool,
}

impl LocalTimeAccumulator {
    /// `beta` enables the residual; then every `push` after the first needs its increment.
    pub fn new(eps: f64, dt: f64, x0: f64, beta: Option<f64>) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::OutOfRange { name: "eps", value: eps });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::OutOfRange { name: "dt", value: dt });
        }
        Ok(Self {
            eps,
            dt,
            x0,
            beta,
            plus_time: 0.0,
            minus_time: 0.0,
            b: 0.0,
            residual: 0.0,
            started: false,
        })
    }

    /// Feeds `X_k` and the increment `dB` that led to it (ignored for `k = 0`).
    #[inline]
    pub fn push(&mut self, x: f64, db: f64) {
        if self.started {
            self.b += db;
            if let Some(beta) = self.beta {
                let l = (self.plus_time + self.minus_time) / (2.0 * self.eps);
                self.residual = self.residual.max((x - self.x0 - self.b - beta * l).abs());
            }
        }
        self.started = true;
        // occupation of [t_k, t_k + dt) is attributed to X_k
        if x.abs() <= self.eps {
            if x > 0.0 {
                self.plus_time += self.dt;
            } else if x < 0.0 {
                self.minus_time += self.dt;
            } else {
                self.plus_time += 0.5 * self.dt;
                self.minus_time += 0.5 * self.dt;
            }
        }
    }

    pub fn finish(&self) -> LocalTimeEstimate {
        let plus = self.plus_time / self.eps;
        let minus = self.minus_time / self.eps;
        LocalTimeEstimate {
            plus,
            minus,
            symmetric: 0.5 * (plus + minus),
            residual: self.beta.map(|_| self.residual),
        }
    }
}

/// Estimates for one path. The occupation of the last grid point is not counted.
pub fn path_local_time(path: &SampledPath, eps: f64, beta: Option<f64>) -> Result<LocalTimeEstimate> {
    let dt = path.uniform_dt().ok_or(Error::NonUniformPath(0))?;
    let noise = match beta {
        Some(_) => Some(path.noise().ok_or(Error::MissingNoise(0))?),
        None => None,
    };
    let mut acc = LocalTimeAccumulator::new(eps, dt, path.initial(), beta)?;
    let v = path.values();
    for k in 0..v.len() {
        if k + 1 == v.len() && beta.is_none() {
            break;
        }
        let db = match (k, noise) {
            (0, _) | (_, None) => 0.0,
            (_, Some(n)) => n[k - 1],
        };
        acc.push(v[k], db);
    }
    let mut e = acc.finish();
    if beta.is_some() {
        // the last point was pushed for its residual only
        let x = v[v.len() - 1];
        if x.abs() <= eps {
            let w = dt / eps;
            if x > 0.0 {
                e.plus -= w;
            } else if x < 0.0 {
                e.minus -= w;
            } else {
                e.plus -= 0.5 * w;
                e.minus -= 0.5 * w;
            }
            e.symmetric = 0.5 * (e.plus + e.minus);
        }
    }
    Ok(e)
}

/// Ratio-of-means estimate of `sum(num) / sum(den)` with a delta-method standard error.
pub fn ratio_estimate(num: &[f64], den: &[f64]) -> (f64, f64) {
    let n = num.len() as f64;
    let r = pairwise_sum(num) / pairwise_sum(den);
    let resid: Vec<f64> = num.iter().zip(den).map(|(a, b)| a - r * b).collect();
    let (_, se_resid) = mean_and_se(&resid);
    let mean_den = pairwise_sum(den) / n;
    (r, se_resid / mean_den)
}

/// One-sided ratio report from per-path estimates: `L+/L0` against `2 alpha`
/// with a 5% relative tolerance; the `L-/L0` ratio is a detail.
pub fn local_time_report(
    estimates: &[LocalTimeEstimate],
    alpha: SkewParameter,
    eps: f64,
    seed: Option<u64>,
) -> Result<ValidationReport> {
    if estimates.is_empty() {
        return Err(Error::EmptySample);
    }
    let plus: Vec<f64> = estimates.iter().map(|e| e.plus).collect();
    let minus: Vec<f64> = estimates.iter().map(|e| e.minus).collect();
    let sym: Vec<f64> = estimates.iter().map(|e| e.symmetric).collect();
    let (rp, sp) = ratio_estimate(&plus, &sym);
    let (rm, sm) = ratio_estimate(&minus, &sym);
    let a = alpha.alpha();
    let mut r = ValidationReport::new(
        "local_time_ratio",
        Target::Value(2.0 * a),
        rp,
        Some(sp),
        None,
        ToleranceRule::Relative { tol: 0.05 },
        seed,
        estimates.len(),
    )
    .with_detail("eps", eps)
    .with_detail("ratio_minus", rm)
    .with_detail("ratio_minus_se", sm)
    .with_detail("target_minus", 2.0 - 2.0 * a)
    .with_detail("mean_symmetric", pairwise_sum(&sym) / sym.len() as f64);
    if let Some(res) = estimates.iter().map(|e| e.residual).collect::<Option<Vec<f64>>>() {
        r = r
            .with_detail("residual_p95", quantile(&res, 0.95))
            .with_detail("residual_fraction_below_0.05", fraction_at_most(&res, 0.05));
    }
    Ok(r)
}

pub fn local_time_statistics(paths: &[SampledPath], alpha: SkewParameter, eps: f64, seed: Option<u64>) -> Result<ValidationReport> {
    let beta = paths.iter().all(|p| p.noise().is_some()).then_some(alpha.beta());
    let est = paths
        .iter()
        .enumerate()
        .map(|(i, p)| path_local_time(p, eps, beta).map_err(|e| reindex(e, i)))
        .collect::<Result<Vec<_>>>()?;
    local_time_report(&est, alpha, eps, seed)
}

fn reindex(e: Error, i: usize) -> Error {
    match e {
        Error::NonUniformPath(_) => Error::NonUniformPath(i),
        Error::MissingNoise(_) => Error::MissingNoise(i),
        other => other,
    }
}

fn quantile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let i = ((q * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1;
    s[i]
}

fn fraction_at_most(v: &[f64], thr: f64) -> f64 {
    v.iter().filter(|&&r| r <= thr).count() as f64 / v.len() as f64
}

/// Residual check from per-path residuals: the fraction at most `threshold` must
/// reach `required`.
pub fn residual_report(residuals: &[f64], threshold: f64, required: f64, seed: Option<u64>) -> Result<ValidationReport> {
    if residuals.is_empty() {
        return Err(Error::EmptySample);
    }
    let f = fraction_at_most(residuals, threshold);
    let n = residuals.len() as f64;
    Ok(ValidationReport::new(
        "sde_residual",
        Target::Value(required),
        f,
        Some((f * (1.0 - f) / n).sqrt()),
        None,
        ToleranceRule::AtLeast,
        seed,
        residuals.len(),
    )
    .with_detail("threshold", threshold)
    .with_detail("residual_p95", quantile(residuals, 0.95))
    .with_detail("residual_median", quantile(residuals, 0.5)))
}

/// `max_t |X_t - x0 - B_t - beta L_t|` per path; requires the noise record.
pub fn sde_residual_statistics(
    paths: &[SampledPath],
    alpha: SkewParameter,
    eps: f64,
    threshold: f64,
    seed: Option<u64>,
) -> Result<ValidationReport> {
    let mut res = Vec::with_capacity(paths.len());
    for (i, p) in paths.iter().enumerate() {
        if p.noise().is_none() {
            return Err(Error::MissingNoise(i));
        }
        let e = path_local_time(p, eps, Some(alpha.beta())).map_err(|e| reindex(e, i))?;
        res.push(e.residual.unwrap_or(f64::NAN));
    }
    residual_report(&res, threshold, 0.95, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_is_mean_of_sides() {
        let p = SampledPath::uniform(0.0, 0.5, vec![0.0, 0.05, -0.05, 0.2, 0.0]).unwrap();
        let e = path_local_time(&p, 0.1, None).unwrap();
        // times: 0 -> half each, 0.05 -> plus, -0.05 -> minus, 0.2 outside, last dropped
        assert!((e.plus - 0.75 / 0.1).abs() < 1e-12);
        assert!((e.minus - 0.75 / 0.1).abs() < 1e-12);
        assert!((e.symmetric - 7.5).abs() < 1e-12);
    }

    #[test]
    fn residual_needs_noise() {
        let p = SampledPath::uniform(0.0, 0.5, vec![0.0, 0.1]).unwrap();
        assert!(matches!(
            sde_residual_statistics(&[p], SkewParameter::brownian(), 0.1, 0.05, None),
            Err(Error::MissingNoise(0))
        ));
    }

    #[test]
    fn residual_zero_for_brownian_noise() {
        let noise = vec![0.1, -0.3, 0.05];
        let vals = vec![1.0, 1.1, 0.8, 0.85];
        let p = SampledPath::uniform(0.0, 0.1, vals).unwrap().with_noise(noise).unwrap();
        let e = path_local_time(&p, 0.01, Some(0.0)).unwrap();
        assert!(e.residual.unwrap() < 1e-12);
    }

    #[test]
    fn ratio_of_means() {
        let (r, se) = ratio_estimate(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]);
        assert_eq!(r, 2.0);
        assert!(se > 0.0);
    }
}
