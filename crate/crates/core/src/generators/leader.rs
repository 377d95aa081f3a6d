use rand::RngCore;

use super::step_count;
use crate::error::{Error, Result};
use crate::path::SampledPath;
use crate::rng::{std_normal, RngStream};
use crate::skew::SkewParameter;

#[derive(Debug, Clone)]
pub struct LeaderPath {
    /// `X` with the increments of `B = Z1 - Z2` as noise record.
    pub path: SampledPath,
    /// `L = (1 + gamma) U1` on the same grid.
    pub local_time: Vec<f64>,
}

/// Follow-the-leader construction with micro-step `delta`. Each step advances the
/// clock of `B1` when `B2 > gamma B1` and the clock of `B2` otherwise. Calls
/// `obs(k, X_k, L_k, dB_k)` and returns `X_T`.
pub fn follow_leader_run<R: RngCore>(
    delta: f64,
    horizon: f64,
    alpha: SkewParameter,
    rng: &mut R,
    mut obs: impl FnMut(usize, f64, f64, f64),
) -> Result<f64> {
    if alpha.is_reflecting() {
        return Err(Error::GeneratorAlpha {
            generator: "follow_leader",
            alpha: alpha.alpha(),
        });
    }
    let steps = step_count(horizon, delta)?;
    let beta = alpha.beta();
    let gamma = (1.0 + beta) / (1.0 - beta);
    let sd = delta.sqrt();
    let (mut z1, mut z2, mut u1) = (0.0f64, 0.0f64, 0.0f64);
    let mut x = 0.0;
    obs(0, 0.0, 0.0, 0.0);
    for k in 1..=steps {
        let xi = sd * std_normal(rng);
        let db = if z2 > gamma * z1 {
            z1 += xi;
            u1 = u1.max(z1);
            xi
        } else {
            z2 += xi;
            -xi
        };
        x = (gamma * u1 - z2) - (u1 - z1);
        obs(k, x, (1.0 + gamma) * u1, db);
    }
    Ok(x)
}

pub fn gen_follow_leader_with_local_time(delta: f64, horizon: f64, alpha: SkewParameter, rng: RngStream) -> Result<LeaderPath> {
    let steps = step_count(horizon, delta)?;
    let mut values = Vec::with_capacity(steps + 1);
    let mut local_time = Vec::with_capacity(steps + 1);
    let mut noise = Vec::with_capacity(steps);
    follow_leader_run(delta, horizon, alpha, &mut rng.rng(), |k, x, l, db| {
        values.push(x);
        local_time.push(l);
        if k > 0 {
            noise.push(db);
        }
    })?;
    Ok(LeaderPath {
        path: SampledPath::uniform(0.0, delta, values)?.with_noise(noise)?,
        local_time,
    })
}

pub fn gen_follow_leader(delta: f64, horizon: f64, alpha: SkewParameter, rng: RngStream) -> Result<SampledPath> {
    Ok(gen_follow_leader_with_local_time(delta, horizon, alpha, rng)?.path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_reflecting() {
        for a in [0.0, 1.0] {
            let s = SkewParameter::from_alpha(a).unwrap();
            assert!(matches!(
                gen_follow_leader(1e-3, 1.0, s, RngStream::new(0, 0)),
                Err(Error::GeneratorAlpha { .. })
            ));
        }
    }

    #[test]
    fn decomposition_x_equals_b_plus_beta_l() {
        let s = SkewParameter::from_alpha(0.7).unwrap();
        let lp = gen_follow_leader_with_local_time(1e-3, 1.0, s, RngStream::new(1, 0)).unwrap();
        let mut b = 0.0;
        let nz = lp.path.noise().unwrap();
        for k in 1..lp.path.len() {
            b += nz[k - 1];
            let r = lp.path.values()[k] - b - s.beta() * lp.local_time[k];
            assert!(r.abs() < 1e-10, "k={k} r={r}");
        }
    }

    #[test]
    fn local_time_grows_only_near_zero() {
        let s = SkewParameter::from_alpha(0.6).unwrap();
        let delta = 1e-4;
        let lp = gen_follow_leader_with_local_time(delta, 1.0, s, RngStream::new(2, 0)).unwrap();
        let x = lp.path.values();
        for k in 1..x.len() {
            let dl = lp.local_time[k] - lp.local_time[k - 1];
            assert!(dl >= 0.0);
            if dl > 0.0 {
                // within one step of the origin
                assert!(x[k].abs().min(x[k - 1].abs()) <= 8.0 * delta.sqrt(), "k={k}");
            }
        }
    }

    #[test]
    fn symmetric_case_marginal_variance() {
        let s = SkewParameter::brownian();
        let n = 2000;
        let xs: Vec<f64> = (0..n)
            .map(|i| follow_leader_run(1e-3, 1.0, s, &mut RngStream::new(3, i).rng(), |_, _, _, _| {}).unwrap())
            .collect();
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((m2 - 1.0).abs() < 0.1, "{m2}");
    }
}
