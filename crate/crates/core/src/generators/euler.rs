use rand::RngCore;

use super::step_count;
use crate::coeffs::{PiecewiseDiffusion, PiecewiseFunction};
use crate::error::{Error, Result};
use crate::path::SampledPath;
use crate::rng::{std_normal, RngStream};
use crate::transform::{legall_function, sde_from_divergence, AtomicLeGall, LeGallFunction, SkewSDE};

#[derive(Debug, Clone)]
pub enum EulerModel {
    Sde(SkewSDE),
    Divergence(PiecewiseDiffusion),
}

impl From<SkewSDE> for EulerModel {
    fn from(s: SkewSDE) -> Self {
        Self::Sde(s)
    }
}

impl From<PiecewiseDiffusion> for EulerModel {
    fn from(c: PiecewiseDiffusion) -> Self {
        Self::Divergence(c)
    }
}

#[derive(Debug, Clone)]
enum SpaceMap {
    Atomic(AtomicLeGall),
    General(LeGallFunction),
}

/// Euler-Maruyama on `Y = F(X)`, where `F` is the Le Gall map of the local-time
/// measure, so `dY = f(X) sigma(X) dB + f(X) drift(X) dt` has no singular term.
#[derive(Debug, Clone)]
pub struct EulerScheme {
    dt: f64,
    sqrt_dt: f64,
    map: SpaceMap,
    sigma: PiecewiseFunction,
    drift: PiecewiseFunction,
    // sigma = 1 and drift = 0 everywhere
    pure: bool,
}

impl EulerScheme {
    pub fn new(model: &EulerModel, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::OutOfRange { name: "dt", value: dt });
        }
        let sde = match model {
            EulerModel::Sde(s) => s.clone(),
            EulerModel::Divergence(c) => sde_from_divergence(c)?,
        };
        let lg = legall_function(sde.nu())?;
        let map = match lg.atomic_map() {
            Some(m) => SpaceMap::Atomic(m),
            None => SpaceMap::General(lg),
        };
        let pure = sde.sigma().pieces().iter().all(|p| p.as_constant() == Some(1.0))
            && sde.drift().pieces().iter().all(|p| p.as_constant() == Some(0.0));
        Ok(Self {
            dt,
            sqrt_dt: dt.sqrt(),
            map,
            sigma: sde.sigma().clone(),
            drift: sde.drift().clone(),
            pure,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    #[inline]
    fn forward(&self, x: f64) -> f64 {
        match &self.map {
            SpaceMap::Atomic(m) => m.forward(x),
            SpaceMap::General(g) => g.big_f(x),
        }
    }

    #[inline]
    fn inverse(&self, y: f64) -> Result<(f64, f64)> {
        match &self.map {
            SpaceMap::Atomic(m) => Ok(m.inverse(y)),
            SpaceMap::General(g) => {
                let x = g.big_f_inverse(y)?;
                Ok((x, g.f(x)))
            }
        }
    }

    /// Steps from `x0` to `horizon`, calling `obs(k, X_k, dB_k)` where `dB_k` is the
    /// Gaussian increment that produced step `k` (zero for `k = 0`). Returns `X_T`.
    pub fn run<R: RngCore>(&self, horizon: f64, x0: f64, rng: &mut R, mut obs: impl FnMut(usize, f64, f64)) -> Result<f64> {
        let steps = step_count(horizon, self.dt)?;
        let mut y = self.forward(x0);
        let (mut x, mut f) = self.inverse(y)?;
        obs(0, x, 0.0);
        for k in 1..=steps {
            let db = self.sqrt_dt * std_normal(rng);
            if self.pure {
                y += f * db;
            } else {
                y += f * (self.sigma.eval(x) * db + self.drift.eval(x) * self.dt);
            }
            if !y.is_finite() {
                return Err(Error::StepOverflow(k));
            }
            (x, f) = self.inverse(y)?;
            obs(k, x, db);
        }
        Ok(x)
    }

    pub fn path<R: RngCore>(&self, horizon: f64, x0: f64, rng: &mut R) -> Result<SampledPath> {
        let steps = step_count(horizon, self.dt)?;
        let mut values = Vec::with_capacity(steps + 1);
        let mut noise = Vec::with_capacity(steps);
        self.run(horizon, x0, rng, |k, x, db| {
            values.push(x);
            if k > 0 {
                noise.push(db);
            }
        })?;
        SampledPath::uniform(0.0, self.dt, values)?.with_noise(noise)
    }
}

/// One Euler path with its noise record. Calls with the same `rng` share the noise,
/// whatever the model.
pub fn gen_euler(model: &EulerModel, dt: f64, horizon: f64, x0: f64, rng: RngStream) -> Result<SampledPath> {
    EulerScheme::new(model, dt)?.path(horizon, x0, &mut rng.rng())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{validate_piecewise, DiffusionCoefficients};
    use crate::skew::SkewParameter;

    #[test]
    fn brownian_is_exact() {
        let m: EulerModel = SkewSDE::skew_brownian(SkewParameter::brownian()).unwrap().into();
        let p = gen_euler(&m, 0.01, 1.0, 0.25, RngStream::new(1, 1)).unwrap();
        let noise = p.noise().unwrap();
        let mut b = 0.25;
        for (k, &x) in p.values().iter().enumerate().skip(1) {
            b += noise[k - 1];
            assert!((x - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shared_noise_across_models() {
        let m1: EulerModel = SkewSDE::skew_brownian(SkewParameter::from_alpha(0.6).unwrap()).unwrap().into();
        let m2: EulerModel = SkewSDE::skew_brownian(SkewParameter::from_alpha(0.8).unwrap()).unwrap().into();
        let r = RngStream::new(9, 3);
        let p1 = gen_euler(&m1, 0.001, 1.0, 0.0, r).unwrap();
        let p2 = gen_euler(&m2, 0.001, 1.0, 0.0, r).unwrap();
        assert_eq!(p1.noise(), p2.noise());
    }

    #[test]
    fn away_from_interface_increments_are_noise() {
        let m: EulerModel = SkewSDE::skew_brownian(SkewParameter::from_alpha(0.7).unwrap()).unwrap().into();
        let p = gen_euler(&m, 1e-4, 0.01, 5.0, RngStream::new(2, 0)).unwrap();
        let x = p.values();
        let nz = p.noise().unwrap();
        for k in 1..x.len() {
            assert!((x[k] - x[k - 1] - nz[k - 1]).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_frequency() {
        let alpha = 0.7;
        let s = EulerScheme::new(&SkewSDE::skew_brownian(SkewParameter::from_alpha(alpha).unwrap()).unwrap().into(), 1e-3).unwrap();
        let n = 10_000;
        let pos = (0..n)
            .filter(|&i| s.run(1.0, 0.0, &mut RngStream::new(3, i).rng(), |_, _, _| {}).unwrap() >= 0.0)
            .count();
        let f = pos as f64 / n as f64;
        assert!((f - alpha).abs() < 4.0 * (alpha * (1.0 - alpha) / n as f64).sqrt() + 0.01, "{f}");
    }

    #[test]
    fn divergence_model_runs() {
        let c = validate_piecewise(DiffusionCoefficients::two_piece(1.0, 4.0)).unwrap();
        let p = gen_euler(&c.into(), 1e-3, 0.5, 0.0, RngStream::new(4, 0)).unwrap();
        assert_eq!(p.len(), 501);
        assert!(p.values().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn horizon_must_be_multiple_of_step() {
        let m: EulerModel = SkewSDE::skew_brownian(SkewParameter::brownian()).unwrap().into();
        assert!(gen_euler(&m, 0.3, 1.0, 0.0, RngStream::new(0, 0)).is_err());
    }
}
