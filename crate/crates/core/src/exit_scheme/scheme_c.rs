//! Exact event-driven simulation of a Brownian motion with skew points on a grid.

use rand::RngCore;

use super::sampler::{sample_skew_exit, ExitSample, Side};
use super::series::KilledInterval;
use super::{ExitGrid, SkeletonPath};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::skew::SkewParameter;
use crate::transform::BrownianReduction;

#[derive(Debug, Clone)]
pub struct SchemeC {
    grid: ExitGrid,
}

enum Step {
    Moved { dt: f64, right: bool },
    Stopped { position: f64 },
}

impl SchemeC {
    pub fn new(grid: ExitGrid) -> Self {
        Self { grid }
    }

    /// Checks that every skew point of `reduction` is on the grid with its weight.
    pub fn for_reduction(reduction: &BrownianReduction, grid: ExitGrid) -> Result<Self> {
        for p in reduction.skew_points() {
            let i = grid.index_of(p.y).ok_or(Error::SkewPointOffGrid(p.y))?;
            if (grid.beta_at(i) - p.beta).abs() > 1e-12 {
                return Err(Error::SkewPointOffGrid(p.y));
            }
        }
        Ok(Self { grid })
    }

    pub fn grid(&self) -> &ExitGrid {
        &self.grid
    }

    fn start_index(&self, y0: f64) -> Result<i64> {
        self.grid.index_of(y0).map(|i| i as i64).ok_or(Error::StartOffGrid(y0))
    }

    fn step<R: RngCore>(&self, i: i64, t_max: Option<f64>, rng: &mut R) -> Result<Step> {
        let y = self.grid.position(i);
        let beta = self.grid.beta_of(i);
        let sample = if beta != 0.0 {
            let h = self.grid.position(i + 1) - y;
            let alpha = SkewParameter::from_alpha(0.5 * (1.0 + beta))?;
            match sample_skew_exit(h, alpha, t_max, rng)? {
                ExitSample::Survived { position } => ExitSample::Survived { position: y + position },
                e => e,
            }
        } else {
            let k = KilledInterval::new(self.grid.position(i - 1), self.grid.position(i + 1), y)?;
            k.sample(rng, t_max)?
        };
        Ok(match sample {
            ExitSample::Exit { time, side } => Step::Moved {
                dt: time,
                right: side == Side::Right,
            },
            ExitSample::Survived { position } => Step::Stopped { position },
        })
    }

    /// Skeleton up to `horizon`, with the position at the horizon as terminal value.
    pub fn run<R: RngCore>(&self, horizon: f64, y0: f64, rng: &mut R) -> Result<SkeletonPath> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::NonPositiveTime(horizon));
        }
        let mut i = self.start_index(y0)?;
        let mut t = 0.0;
        let mut events = vec![(0.0, self.grid.position(i))];
        loop {
            match self.step(i, Some(horizon - t), rng)? {
                Step::Moved { dt, right } => {
                    i += if right { 1 } else { -1 };
                    let nt = t + dt;
                    t = if nt > t { nt.min(horizon) } else { t + f64::EPSILON * t.max(1.0) };
                    if t >= horizon {
                        // exit exactly at the horizon
                        events.push((horizon, self.grid.position(i)));
                        return Ok(SkeletonPath {
                            events,
                            terminal: None,
                            absorbed: false,
                        });
                    }
                    events.push((t, self.grid.position(i)));
                }
                Step::Stopped { position } => {
                    return Ok(SkeletonPath {
                        events,
                        terminal: Some((horizon, position)),
                        absorbed: false,
                    });
                }
            }
        }
    }

    /// Value at `horizon` only.
    pub fn terminal<R: RngCore>(&self, horizon: f64, y0: f64, rng: &mut R) -> Result<f64> {
        let mut i = self.start_index(y0)?;
        let mut t = 0.0;
        loop {
            match self.step(i, Some(horizon - t), rng)? {
                Step::Moved { dt, right } => {
                    i += if right { 1 } else { -1 };
                    t += dt;
                    if t >= horizon {
                        return Ok(self.grid.position(i));
                    }
                }
                Step::Stopped { position } => return Ok(position),
            }
        }
    }

    /// Runs until the chain reaches `lo` or `hi` (grid points); returns `(time, position)`.
    pub fn run_until_exit<R: RngCore>(&self, y0: f64, lo: f64, hi: f64, rng: &mut R) -> Result<(f64, f64)> {
        let (ilo, ihi) = (
            self.grid.index_of(lo).ok_or(Error::StartOffGrid(lo))? as i64,
            self.grid.index_of(hi).ok_or(Error::StartOffGrid(hi))? as i64,
        );
        let mut i = self.start_index(y0)?;
        if !(ilo < i && i < ihi) {
            return Err(Error::OutsideInterval { x: y0, a: lo, b: hi });
        }
        let mut t = 0.0;
        while ilo < i && i < ihi {
            match self.step(i, None, rng)? {
                Step::Moved { dt, right } => {
                    t += dt;
                    i += if right { 1 } else { -1 };
                }
                Step::Stopped { .. } => unreachable!("no horizon"),
            }
        }
        Ok((t, self.grid.position(i)))
    }
}

/// Skeleton of `Y = G(X)` on `grid` (in `Y` coordinates) from `y0` up to `horizon`.
/// Map positions back with [`BrownianReduction::g_inverse`] when needed.
pub fn gen_scheme_c(
    reduction: &BrownianReduction,
    grid: &ExitGrid,
    horizon: f64,
    y0: f64,
    rng: RngStream,
) -> Result<SkeletonPath> {
    SchemeC::for_reduction(reduction, grid.clone())?.run(horizon, y0, &mut rng.rng())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::TransitionCdf;
    use crate::transform::BrownianReduction;

    #[test]
    fn skeleton_neighbours_and_times() {
        let s = SkewParameter::from_alpha(0.7).unwrap();
        let red = BrownianReduction::skew_brownian(s).unwrap();
        let grid = ExitGrid::uniform(-2.0, 2.0, 0.25, &[(0.0, s.beta())]).unwrap();
        let p = gen_scheme_c(&red, &grid, 1.0, 0.0, RngStream::new(4, 4)).unwrap();
        for w in p.events.windows(2) {
            assert!(w[1].0 > w[0].0);
            assert!(((w[1].1 - w[0].1).abs() - 0.25).abs() < 1e-12);
        }
        assert!(p.terminal.is_some() || p.events.last().unwrap().0 == 1.0);
    }

    #[test]
    fn rejects_grid_missing_skew_point() {
        let s = SkewParameter::from_alpha(0.7).unwrap();
        let red = BrownianReduction::skew_brownian(s).unwrap();
        let grid = ExitGrid::uniform(-2.0, 2.0, 0.25, &[]).unwrap();
        assert!(gen_scheme_c(&red, &grid, 1.0, 0.0, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn sbm_marginal_matches_density() {
        let s = SkewParameter::from_alpha(0.7).unwrap();
        let grid = ExitGrid::uniform(-3.0, 3.0, 0.5, &[(0.0, s.beta())]).unwrap();
        let sc = SchemeC::new(grid);
        let mut rng = RngStream::new(8, 1).rng();
        let n = 20_000;
        let mut xs: Vec<f64> = (0..n).map(|_| sc.terminal(1.0, 0.0, &mut rng).unwrap()).collect();
        xs.sort_by(f64::total_cmp);
        let cdf = TransitionCdf::new(1.0, 0.0, s).unwrap();
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf.cdf(x);
                (f - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - f)
            })
            .fold(0.0, f64::max);
        assert!(d * (n as f64).sqrt() < 1.628, "d={d}");
    }
}
