//! Closed-form transition law of the skew Brownian motion.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{brent, integrate_split, norm_cdf, norm_sf};
use crate::rng::{open_unit, RngStream};
use crate::skew::SkewParameter;

#[inline]
fn heat_kernel(t: f64, z: f64) -> f64 {
    (-z * z / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

fn check_time(t: f64) -> Result<f64> {
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err(Error::NonPositiveTime(t))
    }
}

/// Transition density `q(t, x, y)`. The value at `y = 0` is the right limit.
pub fn transition_density(t: f64, x: f64, y: f64, skew: SkewParameter) -> Result<f64> {
    check_time(t)?;
    Ok(density_unchecked(t, x, y, skew.beta()))
}

#[inline]
fn density_unchecked(t: f64, x: f64, y: f64, beta: f64) -> f64 {
    let sy = if y >= 0.0 { 1.0 } else { -1.0 };
    let same_side = (x >= 0.0 && y >= 0.0) || (x <= 0.0 && y < 0.0);
    if same_side {
        heat_kernel(t, x - y) + sy * beta * heat_kernel(t, x.abs() + y.abs())
    } else {
        (1.0 + sy * beta) * heat_kernel(t, x - y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionDensityModel {
    pub skew: SkewParameter,
}

impl TransitionDensityModel {
    pub fn new(skew: SkewParameter) -> Self {
        Self { skew }
    }

    pub fn density(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        transition_density(t, x, y, self.skew)
    }

    pub fn cdf(&self, t: f64, x: f64) -> Result<TransitionCdf> {
        TransitionCdf::new(t, x, self.skew)
    }

    pub fn semigroup(&self, t: f64, phi: &dyn Fn(f64) -> f64, x: f64) -> Result<f64> {
        semigroup_apply(t, phi, x, self.skew)
    }
}

/// Distribution function of `X_t` given `X_0 = x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionCdf {
    t: f64,
    x: f64,
    s: f64,
    beta: f64,
}

impl TransitionCdf {
    pub fn new(t: f64, x: f64, skew: SkewParameter) -> Result<Self> {
        check_time(t)?;
        if !x.is_finite() {
            return Err(Error::OutOfRange { name: "x", value: x });
        }
        Ok(Self {
            t,
            x,
            s: t.sqrt(),
            beta: skew.beta(),
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn start(&self) -> f64 {
        self.x
    }

    /// `P[X_t <= z]`.
    pub fn cdf(&self, z: f64) -> f64 {
        if z == f64::INFINITY {
            return 1.0;
        }
        if z < 0.0 {
            norm_cdf((z - self.x) / self.s) - self.beta * norm_cdf((z - self.x.abs()) / self.s)
        } else {
            1.0 - self.sf(z)
        }
    }

    /// `P[X_t > z]` for `z >= 0`, and `1 - cdf(z)` otherwise.
    pub fn sf(&self, z: f64) -> f64 {
        if z >= 0.0 {
            norm_sf((z - self.x) / self.s) + self.beta * norm_sf((z + self.x.abs()) / self.s)
        } else {
            1.0 - self.cdf(z)
        }
    }

    /// Inverse distribution function by bracketed root finding, `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::OutOfRange { name: "u", value: u });
        }
        let reach = 40.0 * self.s + self.x.abs();
        let f_neg = self.cdf(-f64::MIN_POSITIVE);
        if u < f_neg {
            brent(|z| self.cdf(z) - u, -reach, 0.0, 1e-12)
        } else {
            let tail = 1.0 - u;
            brent(|z| tail - self.sf(z), 0.0, reach, 1e-12)
        }
    }

    pub fn sample(&self, rng: &mut impl rand::RngCore) -> Result<f64> {
        self.quantile(open_unit(rng))
    }
}

/// Distribution function of `X_t` from `x` together with one exact draw.
pub fn transition_cdf_and_sample(
    t: f64,
    x: f64,
    skew: SkewParameter,
    rng: RngStream,
) -> Result<(TransitionCdf, f64)> {
    let cdf = TransitionCdf::new(t, x, skew)?;
    let draw = cdf.sample(&mut rng.rng())?;
    Ok((cdf, draw))
}

/// `E_x[phi(X_t)]` by adaptive quadrature against the transition density.
pub fn semigroup_apply(t: f64, phi: &dyn Fn(f64) -> f64, x: f64, skew: SkewParameter) -> Result<f64> {
    check_time(t)?;
    let s = t.sqrt();
    let beta = skew.beta();
    let lo = x.min(-x.abs()) - 12.0 * s;
    let hi = x.max(x.abs()) + 12.0 * s;
    let mut pts: Vec<f64> = vec![lo, hi, 0.0, x, -x.abs(), x.abs()];
    let mut k = lo;
    while k < hi {
        pts.push(k);
        k += s;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    integrate_split(|y| phi(y) * density_unchecked(t, x, y, beta), &pts, 1e-10)
}
