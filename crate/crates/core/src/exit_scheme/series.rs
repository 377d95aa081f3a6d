//! Brownian motion killed on leaving `(a, b)`: images series for small times,
//! eigenfunction series for large times.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{norm_cdf, norm_pdf};

/// Terms below this magnitude end a series.
pub const TRUNCATION: f64 = 1e-14;
/// Switch between the two forms at `t / w^2 = 1/8`, i.e. `t / h^2 = 1/2` for half-width `h`.
pub const SWITCH: f64 = 0.125;
const MAX_TERMS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesForm {
    Images,
    Eigen,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KilledInterval {
    a: f64,
    w: f64,
    u: f64,
}

fn sum_images<F: Fn(f64) -> f64>(ratio: f64, term: F) -> Result<f64> {
    // term(k) summed over all integers k, outward from 0
    let mut s = term(0.0);
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        let t = term(kf) + term(-kf);
        s += t;
        if t.abs() < TRUNCATION && k >= 2 {
            return Ok(s);
        }
    }
    Err(Error::Series(ratio))
}

fn sum_eigen<F: Fn(f64) -> f64>(ratio: f64, step: usize, term: F) -> Result<f64> {
    let mut s = 0.0;
    let mut n = 1;
    let mut count = 0;
    while count < MAX_TERMS {
        let t = term(n as f64);
        s += t;
        // decay bound: the exponential factor alone
        let decay = (-(n as f64).powi(2) * PI * PI * ratio / 2.0).exp();
        if decay < TRUNCATION * 1e-2 || (t.abs() < TRUNCATION && decay < TRUNCATION) {
            return Ok(s);
        }
        n += step;
        count += 1;
    }
    Err(Error::Series(ratio))
}

impl KilledInterval {
    pub fn new(a: f64, b: f64, x: f64) -> Result<Self> {
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(Error::DegenerateInterval { a, b });
        }
        if !(a < x && x < b) {
            return Err(Error::OutsideInterval { x, a, b });
        }
        Ok(Self { a, w: b - a, u: x - a })
    }

    pub fn width(&self) -> f64 {
        self.w
    }

    /// Offset of the start from the left end.
    pub fn offset(&self) -> f64 {
        self.u
    }

    pub fn left(&self) -> f64 {
        self.a
    }

    fn pick(&self, t: f64) -> SeriesForm {
        if t / (self.w * self.w) < SWITCH {
            SeriesForm::Images
        } else {
            SeriesForm::Eigen
        }
    }

    fn check_t(t: f64) -> Result<()> {
        if t.is_finite() && t > 0.0 {
            Ok(())
        } else {
            Err(Error::NonPositiveTime(t))
        }
    }

    /// `P_x[tau > t]`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        Self::check_t(t)?;
        self.survival_form(t, self.pick(t))
    }

    pub fn survival_form(&self, t: f64, form: SeriesForm) -> Result<f64> {
        Self::check_t(t)?;
        let (w, u) = (self.w, self.u);
        let ratio = t / (w * w);
        let v = match form {
            SeriesForm::Images => {
                let s = t.sqrt();
                sum_images(ratio, |k| {
                    let sh = 2.0 * k * w;
                    (norm_cdf((w - u + sh) / s) - norm_cdf((-u + sh) / s))
                        - (norm_cdf((w + u + sh) / s) - norm_cdf((u + sh) / s))
                })?
            }
            SeriesForm::Eigen => sum_eigen(ratio, 2, |n| {
                4.0 / (n * PI) * (n * PI * u / w).sin() * (-n * n * PI * PI * ratio / 2.0).exp()
            })?,
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// `P_x[tau <= t, exit at b]`.
    pub fn exit_right_cdf(&self, t: f64) -> Result<f64> {
        Self::check_t(t)?;
        self.exit_right_form(t, self.pick(t))
    }

    pub fn exit_right_form(&self, t: f64, form: SeriesForm) -> Result<f64> {
        Self::check_t(t)?;
        let (w, u) = (self.w, self.u);
        let ratio = t / (w * w);
        let v = match form {
            SeriesForm::Images => {
                let r2t = (2.0 * t).sqrt();
                sum_images(ratio, |k| {
                    let d = (w - u) + 2.0 * k * w;
                    d.signum() * libm::erfc(d.abs() / r2t)
                })?
            }
            SeriesForm::Eigen => {
                let tail = sum_eigen(ratio, 1, |n| {
                    let sign = if (n as u64) % 2 == 1 { 1.0 } else { -1.0 };
                    2.0 / (n * PI) * sign * (n * PI * u / w).sin() * (-n * n * PI * PI * ratio / 2.0).exp()
                })?;
                u / w - tail
            }
        };
        Ok(v.clamp(0.0, u / w))
    }

    /// `P_x[tau <= t, exit at a]`.
    pub fn exit_left_cdf(&self, t: f64) -> Result<f64> {
        self.mirrored().exit_right_cdf(t)
    }

    fn mirrored(&self) -> Self {
        Self {
            a: self.a,
            w: self.w,
            u: self.w - self.u,
        }
    }

    /// `P_x[tau > t, B_t <= a + z]` for `z` in `[0, w]`.
    pub fn killed_cdf(&self, t: f64, z: f64) -> Result<f64> {
        Self::check_t(t)?;
        let z = z.clamp(0.0, self.w);
        let (w, u) = (self.w, self.u);
        let ratio = t / (w * w);
        let v = match self.pick(t) {
            SeriesForm::Images => {
                let s = t.sqrt();
                sum_images(ratio, |k| {
                    let sh = 2.0 * k * w;
                    (norm_cdf((z - u + sh) / s) - norm_cdf((-u + sh) / s))
                        - (norm_cdf((z + u + sh) / s) - norm_cdf((u + sh) / s))
                })?
            }
            SeriesForm::Eigen => sum_eigen(ratio, 1, |n| {
                2.0 / (n * PI)
                    * (n * PI * u / w).sin()
                    * (1.0 - (n * PI * z / w).cos())
                    * (-n * n * PI * PI * ratio / 2.0).exp()
            })?,
        };
        Ok(v.max(0.0))
    }

    /// Sub-probability density of `B_t` at `a + z` on `{tau > t}`.
    pub fn killed_density(&self, t: f64, z: f64) -> Result<f64> {
        Self::check_t(t)?;
        let (w, u) = (self.w, self.u);
        let ratio = t / (w * w);
        let v = match self.pick(t) {
            SeriesForm::Images => {
                let s = t.sqrt();
                sum_images(ratio, |k| {
                    let sh = 2.0 * k * w;
                    (norm_pdf((z - u + sh) / s) - norm_pdf((z + u + sh) / s)) / s
                })?
            }
            SeriesForm::Eigen => sum_eigen(ratio, 1, |n| {
                2.0 / w * (n * PI * u / w).sin() * (n * PI * z / w).sin() * (-n * n * PI * PI * ratio / 2.0).exp()
            })?,
        };
        Ok(v.max(0.0))
    }
}
