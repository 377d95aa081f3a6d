//! Path constructions for skew Brownian motion. Every generator returns a
//! uniform-grid [`SampledPath`](crate::SampledPath); streaming variants with an
//! observer callback avoid storing long paths in large Monte Carlo runs.

mod euler;
mod leader;
mod walk;

pub use euler::{gen_euler, EulerModel, EulerScheme};
pub use leader::{follow_leader_run, gen_follow_leader, gen_follow_leader_with_local_time, LeaderPath};
pub use walk::{
    coupled_walk_run, excursion_flip_run, gen_coupled_walk_pair, gen_excursion_flip, gen_random_walk, walk_run,
    WalkSpec, ZeroStepLaw,
};

/// Number of uniform steps of size `dt` covering `horizon`; `dt` must divide it.
pub(crate) fn step_count(horizon: f64, dt: f64) -> crate::Result<usize> {
    use crate::Error;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::NonPositiveTime(horizon));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::OutOfRange { name: "dt", value: dt });
    }
    let r = horizon / dt;
    let n = r.round();
    if (r - n).abs() > 1e-6 * r.max(1.0) || n < 1.0 {
        return Err(Error::Invalid(format!("step {dt} does not divide horizon {horizon}")));
    }
    if n > 1e10 {
        return Err(Error::StepOverflow(usize::MAX));
    }
    Ok(n as usize)
}

/// Cheap source of fair bits, 64 per generator call.
#[derive(Debug, Default)]
pub(crate) struct BitSource {
    buf: u64,
    left: u32,
}

impl BitSource {
    #[inline(always)]
    pub(crate) fn next<R: rand::RngCore>(&mut self, rng: &mut R) -> bool {
        if self.left == 0 {
            self.buf = rng.next_u64();
            self.left = 64;
        }
        let b = self.buf & 1 == 1;
        self.buf >>= 1;
        self.left -= 1;
        b
    }
}
