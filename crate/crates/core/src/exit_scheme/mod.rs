//! Exact exit-time sampling on intervals and event-driven grid schemes for
//! diffusions with discontinuous coefficients.

mod sampler;
mod scheme_c;
mod scheme_e;
mod series;

use serde::{Deserialize, Serialize};

pub use sampler::{interval_exit_sample, sample_skew_exit, ExitSample, Side};
pub use scheme_c::{gen_scheme_c, SchemeC};
pub use scheme_e::{gen_scheme_e, SchemeE};
pub use series::{KilledInterval, SeriesForm, SWITCH, TRUNCATION};

use crate::error::{Error, Result};
use crate::path::SampledPath;
use crate::transform::BrownianReduction;

const GRID_TOL: f64 = 1e-12;

/// Ascending points; every skew point is an interior point with equidistant neighbours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitGrid {
    points: Vec<f64>,
    /// `beta` at each point (0 away from skew points)
    betas: Vec<f64>,
}

fn check_ascending(points: &[f64]) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::Invalid("a grid needs at least two points".into()));
    }
    for (i, p) in points.iter().enumerate() {
        if !p.is_finite() || (i > 0 && points[i - 1] >= *p) {
            return Err(Error::GridOrder(i));
        }
    }
    Ok(())
}

impl ExitGrid {
    /// `skew_points` are `(location, beta)` pairs that must sit on the grid.
    pub fn new(points: Vec<f64>, skew_points: &[(f64, f64)]) -> Result<Self> {
        check_ascending(&points)?;
        let mut betas = vec![0.0; points.len()];
        let span = points[points.len() - 1] - points[0];
        for &(y, beta) in skew_points {
            if !(beta > -1.0 && beta < 1.0) {
                return Err(Error::AtomWeight { at: y, weight: beta });
            }
            let i = points
                .iter()
                .position(|&p| (p - y).abs() <= GRID_TOL * span.max(1.0))
                .ok_or(Error::SkewPointOffGrid(y))?;
            if i == 0 || i + 1 == points.len() {
                return Err(Error::SkewPointOffGrid(y));
            }
            let (l, r) = (points[i] - points[i - 1], points[i + 1] - points[i]);
            if (l - r).abs() > GRID_TOL * l.max(r) {
                return Err(Error::GridSymmetry {
                    point: y,
                    left: l,
                    right: r,
                });
            }
            betas[i] = beta;
        }
        Ok(Self { points, betas })
    }

    /// Uniform grid `lo, lo + step, ..` up to `hi`.
    pub fn uniform(lo: f64, hi: f64, step: f64, skew_points: &[(f64, f64)]) -> Result<Self> {
        if !(step > 0.0 && hi > lo) {
            return Err(Error::OutOfRange { name: "step", value: step });
        }
        let n = ((hi - lo) / step).round() as usize;
        let pts = (0..=n).map(|k| lo + k as f64 * step).collect();
        Self::new(pts, skew_points)
    }

    /// Points `i * step` for `|i * step| <= half_width`; exact multiples, so 0 is a node.
    pub fn symmetric(half_width: f64, step: f64, skew_points: &[(f64, f64)]) -> Result<Self> {
        if !(step > 0.0 && half_width >= step) {
            return Err(Error::OutOfRange { name: "step", value: step });
        }
        let k = (half_width / step + 1e-9).floor() as i64;
        Self::new((-k..=k).map(|i| i as f64 * step).collect(), skew_points)
    }

    /// Grid in `Y` space for a Brownian reduction: each skew point gets symmetric
    /// neighbours, and gaps are filled with steps of at most `max_step` out to `±extent`.
    pub fn for_reduction(reduction: &BrownianReduction, max_step: f64, extent: f64) -> Result<Self> {
        if !(max_step > 0.0 && extent > 0.0) {
            return Err(Error::OutOfRange { name: "max_step", value: max_step });
        }
        let sp: Vec<(f64, f64)> = reduction.skew_points().iter().map(|p| (p.y, p.beta)).collect();
        let ys: Vec<f64> = sp.iter().map(|p| p.0).collect();
        let lo = ys.first().map_or(-extent, |&y| (y - max_step).min(-extent));
        let hi = ys.last().map_or(extent, |&y| (y + max_step).max(extent));
        // neighbour distance at each skew point
        let d: Vec<f64> = (0..ys.len())
            .map(|j| {
                let gl = if j == 0 { f64::INFINITY } else { ys[j] - ys[j - 1] };
                let gr = if j + 1 == ys.len() { f64::INFINITY } else { ys[j + 1] - ys[j] };
                max_step.min(gl / 2.0).min(gr / 2.0)
            })
            .collect();
        let mut pts = Vec::new();
        let fill = |pts: &mut Vec<f64>, a: f64, b: f64| {
            // a is already pushed; push interior points and b
            let n = ((b - a) / max_step).ceil().max(1.0) as usize;
            for k in 1..=n {
                pts.push(if k == n { b } else { a + (b - a) * k as f64 / n as f64 });
            }
        };
        pts.push(lo);
        let mut cursor = lo;
        for (j, &y) in ys.iter().enumerate() {
            let left = y - d[j];
            if left > cursor {
                fill(&mut pts, cursor, left);
            }
            pts.push(y);
            pts.push(y + d[j]);
            cursor = y + d[j];
        }
        if hi > cursor {
            fill(&mut pts, cursor, hi);
        }
        pts.dedup_by(|a, b| (*a - *b).abs() <= GRID_TOL * max_step);
        Self::new(pts, &sp)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn beta_at(&self, i: usize) -> f64 {
        self.betas[i]
    }

    pub fn index_of(&self, y: f64) -> Option<usize> {
        let span = (self.points[self.points.len() - 1] - self.points[0]).max(1.0);
        self.points.iter().position(|&p| (p - y).abs() <= GRID_TOL * span)
    }

    /// Position of node `i`, extrapolating the outermost spacing beyond the ends.
    #[inline]
    pub fn position(&self, i: i64) -> f64 {
        let n = self.points.len() as i64;
        if i < 0 {
            self.points[0] + i as f64 * (self.points[1] - self.points[0])
        } else if i >= n {
            let last = self.points[(n - 1) as usize];
            last + (i - n + 1) as f64 * (last - self.points[(n - 2) as usize])
        } else {
            self.points[i as usize]
        }
    }

    #[inline]
    pub fn beta_of(&self, i: i64) -> f64 {
        if i >= 0 && (i as usize) < self.points.len() {
            self.betas[i as usize]
        } else {
            0.0
        }
    }
}

/// Path recorded at exit events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonPath {
    /// `(time, grid position)`, starting with `(0, x0)`
    pub events: Vec<(f64, f64)>,
    /// `(T, value)` when the horizon was reached inside an interval
    pub terminal: Option<(f64, f64)>,
    /// the chain stopped at an end of a finite grid before the horizon
    pub absorbed: bool,
}

impl SkeletonPath {
    pub fn last_value(&self) -> f64 {
        match self.terminal {
            Some((_, v)) => v,
            None => self.events.last().map_or(f64::NAN, |e| e.1),
        }
    }

    pub fn map_positions<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            events: self.events.iter().map(|&(t, y)| (t, f(y))).collect(),
            terminal: self.terminal.map(|(t, y)| (t, f(y))),
            absorbed: self.absorbed,
        }
    }

    /// First event time at which `|position - center| >= level`.
    pub fn first_exit(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        self.events.iter().copied().find(|&(_, y)| y <= lo || y >= hi)
    }

    /// Events plus the terminal point as a skeleton-flagged path; linear interpolation
    /// of it is a plotting aid, not the conditional law between events.
    pub fn to_sampled_path(&self) -> Result<SampledPath> {
        let mut t: Vec<f64> = self.events.iter().map(|e| e.0).collect();
        let mut v: Vec<f64> = self.events.iter().map(|e| e.1).collect();
        if let Some((tt, vv)) = self.terminal {
            if tt > *t.last().unwrap_or(&f64::NEG_INFINITY) {
                t.push(tt);
                v.push(vv);
            }
        }
        SampledPath::events(t, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{validate_piecewise, DiffusionCoefficients};
    use crate::transform::brownian_reduction;

    #[test]
    fn grid_symmetry_enforced() {
        assert!(ExitGrid::new(vec![-1.0, 0.0, 1.0], &[(0.0, 0.3)]).is_ok());
        assert!(matches!(
            ExitGrid::new(vec![-1.0, 0.0, 2.0], &[(0.0, 0.3)]),
            Err(Error::GridSymmetry { .. })
        ));
        assert_eq!(
            ExitGrid::new(vec![-1.0, 0.5, 1.0], &[(0.0, 0.3)]).unwrap_err(),
            Error::SkewPointOffGrid(0.0)
        );
        assert_eq!(ExitGrid::new(vec![0.0, 0.0], &[]).unwrap_err(), Error::GridOrder(1));
    }

    #[test]
    fn extrapolated_positions() {
        let g = ExitGrid::uniform(-1.0, 1.0, 0.5, &[]).unwrap();
        assert_eq!(g.position(-2), -2.0);
        assert_eq!(g.position(6), 2.0);
        assert_eq!(g.position(2), 0.0);
    }

    #[test]
    fn grid_for_reduction_is_valid() {
        let c = DiffusionCoefficients::piecewise_constant(
            vec![-0.3, 0.0, 0.05],
            &[1.0, 2.0, 0.5, 3.0],
            &[1.0, 1.0, 2.0, 1.0],
            &[0.0; 4],
        );
        let r = brownian_reduction(&validate_piecewise(c).unwrap(), false).unwrap();
        let g = ExitGrid::for_reduction(&r, 0.1, 2.0).unwrap();
        for p in r.skew_points() {
            assert!(g.index_of(p.y).is_some());
        }
        let pts = g.points();
        assert!(pts.windows(2).all(|w| w[1] - w[0] <= 0.1 + 1e-12));
    }
}
