use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Skewness of a skew Brownian motion: `alpha` is the probability of a positive
/// excursion, `beta = q = 2 alpha - 1` the local-time weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkewParameter {
    alpha: f64,
    beta: f64,
    q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkewSpec {
    Alpha(f64),
    Beta(f64),
    Q(f64),
    FluxPair { a_plus: f64, a_minus: f64 },
}

pub fn make_skew(spec: SkewSpec) -> Result<SkewParameter> {
    match spec {
        SkewSpec::Alpha(a) => SkewParameter::from_alpha(a),
        SkewSpec::Beta(b) => SkewParameter::from_beta("beta", b),
        SkewSpec::Q(q) => SkewParameter::from_beta("q", q),
        SkewSpec::FluxPair { a_plus, a_minus } => {
            for (name, v) in [("a_plus", a_plus), ("a_minus", a_minus)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::OutOfRange { name, value: v });
                }
            }
            SkewParameter::from_alpha(a_plus / (a_plus + a_minus))
        }
    }
}

impl SkewParameter {
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
            });
        }
        let beta = 2.0 * alpha - 1.0;
        Ok(Self { alpha, beta, q: beta })
    }

    fn from_beta(name: &'static str, beta: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::OutOfRange { name, value: beta });
        }
        Self::from_alpha(0.5 * (1.0 + beta))
    }

    pub fn brownian() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.0,
            q: 0.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Weight of the half-line containing `z` in the symmetrizing measure
    /// (`alpha` on `z >= 0`, `1 - alpha` below).
    pub fn side_weight(&self, z: f64) -> f64 {
        if z >= 0.0 {
            self.alpha
        } else {
            1.0 - self.alpha
        }
    }

    pub fn is_reflecting(&self) -> bool {
        self.alpha == 0.0 || self.alpha == 1.0
    }
}

impl<'de> Deserialize<'de> for SkewParameter {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            alpha: f64,
        }
        let raw = Raw::deserialize(d)?;
        SkewParameter::from_alpha(raw.alpha).map_err(serde::de::Error::custom)
    }
}
