use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeGrid {
    Uniform { t0: f64, dt: f64 },
    Events(Vec<f64>),
}

/// Values on a time grid, with the optional Gaussian increments that drove them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    grid: TimeGrid,
    values: Vec<f64>,
    noise: Option<Vec<f64>>,
    skeleton: bool,
}

impl SampledPath {
    pub fn uniform(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::OutOfRange { name: "dt", value: dt });
        }
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Self {
            grid: TimeGrid::Uniform { t0, dt },
            values,
            noise: None,
            skeleton: false,
        })
    }

    pub fn events(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Invalid("times and values differ in length".into()));
        }
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(i) = (1..times.len()).find(|&i| times[i] <= times[i - 1]) {
            return Err(Error::Invalid(format!("event times not increasing at index {i}")));
        }
        Ok(Self {
            grid: TimeGrid::Events(times),
            values,
            noise: None,
            skeleton: true,
        })
    }

    /// Attaches the driving increments; `noise[k]` drives step `k -> k+1`.
    pub fn with_noise(mut self, noise: Vec<f64>) -> Result<Self> {
        if noise.len() + 1 != self.values.len() {
            return Err(Error::Invalid("noise record length must be len - 1".into()));
        }
        self.noise = Some(noise);
        Ok(self)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn noise(&self) -> Option<&[f64]> {
        self.noise.as_deref()
    }

    pub fn is_skeleton(&self) -> bool {
        self.skeleton
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        match &self.grid {
            TimeGrid::Uniform { t0, dt } => t0 + i as f64 * dt,
            TimeGrid::Events(t) => t[i],
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn uniform_dt(&self) -> Option<f64> {
        match self.grid {
            TimeGrid::Uniform { dt, .. } => Some(dt),
            TimeGrid::Events(_) => None,
        }
    }

    pub fn initial(&self) -> f64 {
        self.values[0]
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Linear interpolation between grid values; constant beyond the ends.
    /// For skeleton paths this is a plotting aid, not the conditional law.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.len();
        let (t_first, t_last) = (self.time(0), self.time(n - 1));
        if t <= t_first {
            return self.values[0];
        }
        if t >= t_last {
            return self.values[n - 1];
        }
        let i = match &self.grid {
            TimeGrid::Uniform { t0, dt } => (((t - t0) / dt).floor() as usize).min(n - 2),
            TimeGrid::Events(ts) => ts.partition_point(|&s| s <= t) - 1,
        };
        let (ta, tb) = (self.time(i), self.time(i + 1));
        let w = (t - ta) / (tb - ta);
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }
}
