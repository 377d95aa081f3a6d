use std::f64::consts::FRAC_2_PI;

use serde::{Deserialize, Serialize};

use super::ks::{ks_one_sample, ks_pvalue};
use super::report::{Target, ToleranceRule, ValidationReport, KS_C_1PCT};
use crate::error::{Error, Result};
use crate::path::SampledPath;
use crate::skew::SkewParameter;

/// Law of the fraction of `[0, 1]` spent non-negative by SBM started at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupationLaw {
    pub alpha: SkewParameter,
}

impl OccupationLaw {
    pub fn new(alpha: SkewParameter) -> Self {
        Self { alpha }
    }

    /// `(2/pi) arcsin sqrt(x / (x + r^2 (1 - x)))` with `r = alpha / (1 - alpha)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return if self.alpha.alpha() == 0.0 { 1.0 } else { 0.0 };
        }
        if x >= 1.0 {
            return 1.0;
        }
        let a = self.alpha.alpha();
        if a == 0.0 {
            return 1.0;
        }
        if a == 1.0 {
            return 0.0;
        }
        let r = a / (1.0 - a);
        FRAC_2_PI * (x / (x + r * r * (1.0 - x))).sqrt().asin()
    }
}

#[inline]
fn side_weight(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x == 0.0 {
        0.5
    } else {
        0.0
    }
}

/// Trapezoidal time fraction with `X >= 0` on a uniform grid; zeros count one half.
#[derive(Debug, Clone, Default)]
pub struct OccupationAccumulator {
    prev: Option<f64>,
    total: f64,
    intervals: usize,
}

impl OccupationAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        let w = side_weight(x);
        if let Some(p) = self.prev {
            self.total += 0.5 * (p + w);
            self.intervals += 1;
        }
        self.prev = Some(w);
    }

    pub fn fraction(&self) -> f64 {
        if self.intervals == 0 {
            f64::NAN
        } else {
            self.total / self.intervals as f64
        }
    }
}

pub fn occupation_fraction(path: &SampledPath) -> f64 {
    let mut acc = OccupationAccumulator::new();
    path.values().iter().for_each(|&x| acc.push(x));
    acc.fraction()
}

/// KS of occupation fractions against [`OccupationLaw`].
pub fn occupation_report(fractions: &[f64], alpha: SkewParameter, seed: Option<u64>) -> Result<ValidationReport> {
    let law = OccupationLaw::new(alpha);
    let d = ks_one_sample(fractions, |x| law.cdf(x))?;
    let n = fractions.len() as f64;
    Ok(ValidationReport::new(
        "occupation_law",
        Target::Cdf(format!("occupation law alpha={}", alpha.alpha())),
        d,
        None,
        Some(d),
        ToleranceRule::KsCritical { c: KS_C_1PCT, n_eff: n },
        seed,
        fractions.len(),
    )
    .with_detail("p_value", ks_pvalue(d, n)))
}

pub fn occupation_statistics(paths: &[SampledPath], alpha: SkewParameter, seed: Option<u64>) -> Result<ValidationReport> {
    if paths.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut fr = Vec::with_capacity(paths.len());
    for (i, p) in paths.iter().enumerate() {
        if p.initial() != 0.0 {
            return Err(Error::NotStartedAtZero(i));
        }
        if p.uniform_dt().is_none() {
            return Err(Error::NonUniformPath(i));
        }
        fr.push(occupation_fraction(p));
    }
    occupation_report(&fr, alpha, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn law(a: f64) -> OccupationLaw {
        OccupationLaw::new(SkewParameter::from_alpha(a).unwrap())
    }

    #[test]
    fn arcsine_at_half() {
        let l = law(0.5);
        assert!((l.cdf(0.5) - 0.5).abs() < 1e-15);
        for x in [0.1, 0.3, 0.9] {
            assert!((l.cdf(x) - FRAC_2_PI * x.sqrt().asin()).abs() < 1e-15);
        }
    }

    #[test]
    fn reference_value() {
        assert!((law(0.7).cdf(0.5) - 0.257_762_116_818_313).abs() < 1e-12);
    }

    #[test]
    fn reflection_identity_grid() {
        for k in 1..=9 {
            let a = k as f64 / 10.0;
            for j in 1..100 {
                let x = j as f64 / 100.0;
                assert!((law(a).cdf(x) + law(1.0 - a).cdf(1.0 - x) - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn accumulator_half_ties() {
        let mut acc = OccupationAccumulator::new();
        for x in [0.0, 1.0, 0.0, -1.0, 0.0] {
            acc.push(x);
        }
        assert!((acc.fraction() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonzero_start() {
        let p = SampledPath::uniform(0.0, 0.1, vec![0.1, 0.2]).unwrap();
        assert!(matches!(
            occupation_statistics(&[p], SkewParameter::brownian(), None),
            Err(Error::NotStartedAtZero(0))
        ));
    }

    proptest! {
        #[test]
        fn cdf_monotone(a in 0.01f64..0.99, x in 0.0f64..1.0, dx in 1e-6f64..0.5) {
            let l = law(a);
            prop_assert!(l.cdf((x + dx).min(1.0)) >= l.cdf(x));
        }
    }
}
