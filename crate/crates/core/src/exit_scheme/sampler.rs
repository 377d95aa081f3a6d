//! Exact exit samplers built on the killed-interval series.

use serde::{Deserialize, Serialize};

use super::series::KilledInterval;
use crate::error::{Error, Result};
use crate::numerics::brent;
use crate::rng::{open_unit, RngStream};
use crate::skew::SkewParameter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitSample {
    Exit { time: f64, side: Side },
    /// Still inside at the horizon; `position` is where the path is then.
    Survived { position: f64 },
}

/// Smallest `t` with `g(t) >= target` for a nondecreasing `g` on `(0, inf)`,
/// bracketed inside `(0, cap]`.
fn invert_time<G: Fn(f64) -> Result<f64>>(g: G, target: f64, scale: f64, cap: f64) -> Result<f64> {
    let mut lo = (1e-4 * scale).min(cap * 0.5);
    let mut shrink = 0;
    while g(lo)? >= target {
        lo *= 1.0 / 16.0;
        shrink += 1;
        if shrink > 250 {
            return Ok(lo);
        }
    }
    let mut hi = if cap.is_finite() { cap } else { scale };
    let mut grow = 0;
    while g(hi)? < target {
        if cap.is_finite() {
            return Err(Error::RootBracket {
                lo,
                hi,
                f_lo: g(lo)? - target,
                f_hi: g(hi)? - target,
            });
        }
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::RootIterations(grow));
        }
    }
    let f = |t: f64| g(t).map(|v| v - target).unwrap_or(f64::NAN);
    brent(f, lo, hi, 1e-13 * scale)
}

impl KilledInterval {
    /// Joint draw of the exit (time, side), or the position at `t_max` if the path
    /// survives, from a single uniform.
    pub fn sample_with_uniform(&self, v: f64, t_max: Option<f64>) -> Result<ExitSample> {
        let w = self.width();
        let scale = w * w;
        let (p_right, p_left) = match t_max {
            Some(t) => (self.exit_right_cdf(t)?, self.exit_left_cdf(t)?),
            None => {
                let pr = self.offset() / w;
                (pr, 1.0 - pr)
            }
        };
        let cap = t_max.unwrap_or(f64::INFINITY);
        if v < p_right {
            let time = invert_time(|t| self.exit_right_cdf(t), v, scale, cap)?;
            return Ok(ExitSample::Exit { time, side: Side::Right });
        }
        if v < p_right + p_left || t_max.is_none() {
            let target = (v - p_right).min(p_left * (1.0 - f64::EPSILON));
            let time = invert_time(|t| self.exit_left_cdf(t), target, scale, cap)?;
            return Ok(ExitSample::Exit { time, side: Side::Left });
        }
        let t = cap;
        let target = v - p_right - p_left;
        let surv = self.killed_cdf(t, w)?;
        let target = target.min(surv * (1.0 - 1e-15));
        let z = brent(|z| self.killed_cdf(t, z).unwrap_or(f64::NAN) - target, 0.0, w, 1e-13 * w)?;
        Ok(ExitSample::Survived {
            position: self.left() + z,
        })
    }

    pub fn sample(&self, rng: &mut impl rand::RngCore, t_max: Option<f64>) -> Result<ExitSample> {
        self.sample_with_uniform(open_unit(rng), t_max)
    }
}

/// Exit of a skew Brownian motion from `(-h, h)` started at 0, or its position
/// at `t_max` if it is still inside. `|X|` moves like `|B|`, and the sign of each
/// excursion is an independent Bernoulli(alpha).
pub fn interval_exit_sample(h: f64, alpha: SkewParameter, t_max: Option<f64>, rng: RngStream) -> Result<ExitSample> {
    sample_skew_exit(h, alpha, t_max, &mut rng.rng())
}

pub fn sample_skew_exit(
    h: f64,
    alpha: SkewParameter,
    t_max: Option<f64>,
    rng: &mut impl rand::RngCore,
) -> Result<ExitSample> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::OutOfRange { name: "h", value: h });
    }
    if let Some(t) = t_max {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
    }
    let k = KilledInterval::new(-h, h, 0.0)?;
    let v = open_unit(rng);
    let positive = open_unit(rng) < alpha.alpha();
    // fold the Brownian draw onto |B| and attach the excursion sign
    Ok(match k.sample_with_uniform(v, t_max)? {
        ExitSample::Exit { time, .. } => ExitSample::Exit {
            time,
            side: if positive { Side::Right } else { Side::Left },
        },
        ExitSample::Survived { position } => {
            let m = position.abs();
            ExitSample::Survived {
                position: if positive { m } else { -m },
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::mean_and_se;

    fn sk(a: f64) -> SkewParameter {
        SkewParameter::from_alpha(a).unwrap()
    }

    #[test]
    fn mean_exit_time_and_side() {
        let mut rng = RngStream::new(17, 0).rng();
        let n = 100_000;
        let mut times = Vec::with_capacity(n);
        let mut right = 0usize;
        for _ in 0..n {
            match sample_skew_exit(1.0, sk(0.7), None, &mut rng).unwrap() {
                ExitSample::Exit { time, side } => {
                    times.push(time);
                    right += (side == Side::Right) as usize;
                }
                ExitSample::Survived { .. } => unreachable!(),
            }
        }
        let (m, se) = mean_and_se(&times);
        assert!((m - 1.0).abs() < 3.0 * se, "m={m} se={se}");
        let p = right as f64 / n as f64;
        assert!((p - 0.7).abs() < 3.0 * (0.21 / n as f64).sqrt());
    }

    #[test]
    fn asymmetric_interval_side_and_time() {
        // from 0.2 in (0, 1): P[right] = 0.2, E[tau | right] = (1 - 0.04)/3
        let k = KilledInterval::new(0.0, 1.0, 0.2).unwrap();
        let mut rng = RngStream::new(3, 9).rng();
        let n = 60_000;
        let mut rt = Vec::new();
        for _ in 0..n {
            if let ExitSample::Exit { time, side: Side::Right } = k.sample(&mut rng, None).unwrap() {
                rt.push(time);
            }
        }
        let p = rt.len() as f64 / n as f64;
        assert!((p - 0.2).abs() < 3.0 * (0.16 / n as f64).sqrt());
        let (m, se) = mean_and_se(&rt);
        assert!((m - 0.32).abs() < 3.0 * se, "m={m} se={se}");
    }

    #[test]
    fn horizon_branch_probabilities() {
        let k = KilledInterval::new(-1.0, 1.0, 0.0).unwrap();
        let surv = k.survival(0.5).unwrap();
        let mut rng = RngStream::new(1, 2).rng();
        let n = 50_000;
        let mut alive = 0;
        for _ in 0..n {
            match k.sample(&mut rng, Some(0.5)).unwrap() {
                ExitSample::Survived { position } => {
                    assert!(position.abs() < 1.0);
                    alive += 1;
                }
                ExitSample::Exit { time, .. } => assert!(time <= 0.5),
            }
        }
        let p = alive as f64 / n as f64;
        assert!((p - surv).abs() < 3.0 * (surv * (1.0 - surv) / n as f64).sqrt());
    }

    #[test]
    fn uniform_inversion_is_monotone() {
        let k = KilledInterval::new(-1.0, 2.0, 0.5).unwrap();
        let mut last = 0.0;
        for i in 1..50 {
            let v = i as f64 / 50.0 * (0.5 / 3.0);
            if let ExitSample::Exit { time, side } = k.sample_with_uniform(v, None).unwrap() {
                assert_eq!(side, Side::Right);
                assert!(time >= last);
                last = time;
            }
        }
    }

    #[test]
    fn rejects_bad_half_width() {
        assert!(interval_exit_sample(0.0, sk(0.5), None, RngStream::new(0, 0)).is_err());
        assert!(interval_exit_sample(1.0, sk(0.5), Some(-1.0), RngStream::new(0, 0)).is_err());
    }
}
