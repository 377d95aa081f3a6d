//! Grid Markov chain with scale-function transition probabilities and a clock
//! advanced by side-conditional mean exit times.

use rand::RngCore;

use super::SkeletonPath;
use crate::coeffs::PiecewiseDiffusion;
use crate::error::{Error, Result};
use crate::rng::{open_unit, RngStream};
use crate::scale_speed::{ExitSide, ScaleSource, ScaleSpeedModel};

#[derive(Debug, Clone)]
pub struct SchemeE {
    grid: Vec<f64>,
    p_right: Vec<f64>,
    t_right: Vec<f64>,
    t_left: Vec<f64>,
}

impl SchemeE {
    pub fn new(coeffs: &PiecewiseDiffusion, grid: Vec<f64>) -> Result<Self> {
        if grid.len() < 3 {
            return Err(Error::Invalid("scheme E needs at least three grid points".into()));
        }
        for (i, p) in grid.iter().enumerate() {
            if !p.is_finite() || (i > 0 && grid[i - 1] >= *p) {
                return Err(Error::GridOrder(i));
            }
        }
        let model = ScaleSpeedModel::build(ScaleSource::Diffusion(coeffs.clone()))?;
        Self::from_model(&model, grid)
    }

    pub fn from_model(model: &ScaleSpeedModel, grid: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        let mut p_right = vec![f64::NAN; n];
        let mut t_right = vec![f64::NAN; n];
        let mut t_left = vec![f64::NAN; n];
        for i in 1..n - 1 {
            let (a, x, b) = (grid[i - 1], grid[i], grid[i + 1]);
            let r = model.exit_time_moments(x, a, b, ExitSide::Right)?;
            let l = model.exit_time_moments(x, a, b, ExitSide::Left)?;
            p_right[i] = r.side_probability;
            t_right[i] = r.conditional_mean;
            t_left[i] = l.conditional_mean;
        }
        Ok(Self {
            grid,
            p_right,
            t_right,
            t_left,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// `(P[right], E[clock | right], E[clock | left])` at interior node `i`.
    pub fn transition(&self, i: usize) -> (f64, f64, f64) {
        (self.p_right[i], self.t_right[i], self.t_left[i])
    }

    fn index_of(&self, x: f64) -> Result<usize> {
        let span = (self.grid[self.grid.len() - 1] - self.grid[0]).max(1.0);
        self.grid
            .iter()
            .position(|&p| (p - x).abs() <= 1e-12 * span)
            .ok_or(Error::StartOffGrid(x))
    }

    #[inline]
    fn step<R: RngCore>(&self, i: usize, rng: &mut R) -> (usize, f64) {
        if open_unit(rng) < self.p_right[i] {
            (i + 1, self.t_right[i])
        } else {
            (i - 1, self.t_left[i])
        }
    }

    /// Chain up to `horizon`; stops early (flagged `absorbed`) at an end of the grid.
    pub fn run<R: RngCore>(&self, horizon: f64, x0: f64, rng: &mut R) -> Result<SkeletonPath> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::NonPositiveTime(horizon));
        }
        let mut i = self.index_of(x0)?;
        let mut t = 0.0;
        let mut events = vec![(0.0, self.grid[i])];
        let last = self.grid.len() - 1;
        loop {
            if i == 0 || i == last {
                return Ok(SkeletonPath {
                    events,
                    terminal: None,
                    absorbed: true,
                });
            }
            let (j, dt) = self.step(i, rng);
            if t + dt > horizon {
                return Ok(SkeletonPath {
                    events,
                    terminal: Some((horizon, self.grid[i])),
                    absorbed: false,
                });
            }
            t += dt;
            i = j;
            events.push((t, self.grid[i]));
        }
    }

    /// Runs until `lo` or `hi` is reached; returns `(clock, position)`.
    pub fn run_until_exit<R: RngCore>(&self, x0: f64, lo: f64, hi: f64, rng: &mut R) -> Result<(f64, f64)> {
        let (ilo, ihi) = (self.index_of(lo)?, self.index_of(hi)?);
        let mut i = self.index_of(x0)?;
        if !(ilo < i && i < ihi) {
            return Err(Error::OutsideInterval { x: x0, a: lo, b: hi });
        }
        let mut t = 0.0;
        while ilo < i && i < ihi {
            let (j, dt) = self.step(i, rng);
            t += dt;
            i = j;
        }
        Ok((t, self.grid[i]))
    }
}

pub fn gen_scheme_e(
    coeffs: &PiecewiseDiffusion,
    grid: &[f64],
    horizon: f64,
    x0: f64,
    rng: RngStream,
) -> Result<SkeletonPath> {
    SchemeE::new(coeffs, grid.to_vec())?.run(horizon, x0, &mut rng.rng())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{validate_piecewise, DiffusionCoefficients};
    use crate::skew::SkewParameter;

    #[test]
    fn brownian_uniform_grid() {
        let bm = validate_piecewise(DiffusionCoefficients::brownian()).unwrap();
        let grid: Vec<f64> = (-10..=10).map(|k| k as f64 * 0.1).collect();
        let e = SchemeE::new(&bm, grid).unwrap();
        for i in 1..20 {
            let (p, tr, tl) = e.transition(i);
            assert!((p - 0.5).abs() < 1e-14);
            assert!((tr - 0.01).abs() < 1e-14);
            assert!((tl - 0.01).abs() < 1e-14);
        }
    }

    #[test]
    fn sbm_side_probability_at_origin() {
        let s = SkewParameter::from_alpha(0.7).unwrap();
        let c = validate_piecewise(DiffusionCoefficients::skew_brownian(s)).unwrap();
        let grid = vec![-1.0, -0.5, 0.0, 0.5, 1.0];
        let e = SchemeE::new(&c, grid).unwrap();
        assert!((e.transition(2).0 - 0.7).abs() < 1e-15);
    }

    #[test]
    fn nonuniform_grid_accepted() {
        let c = validate_piecewise(DiffusionCoefficients::two_piece(1.0, 3.0)).unwrap();
        let grid = vec![-1.0, -0.4, 0.0, 0.1, 0.35, 1.0];
        let p = gen_scheme_e(&c, &grid, 0.5, 0.0, RngStream::new(2, 2)).unwrap();
        assert!(p.events.windows(2).all(|w| w[1].0 > w[0].0));
    }
}
