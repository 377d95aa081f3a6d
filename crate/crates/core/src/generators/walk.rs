use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::BitSource;
use crate::error::{Error, Result};
use crate::path::SampledPath;
use crate::rng::{open_unit, RngStream};
use crate::skew::SkewParameter;

/// Integer law of the step taken from 0, with bounded support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroStepLaw {
    values: Vec<i64>,
    probs: Vec<f64>,
}

impl ZeroStepLaw {
    pub fn new(values: Vec<i64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::ZeroStepLaw("values and probabilities must be non-empty and of equal length"));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::ZeroStepLaw("probabilities must be finite and non-negative"));
        }
        if (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::ZeroStepLaw("probabilities must sum to 1"));
        }
        let law = Self { values, probs };
        if law.mean_abs() <= 0.0 {
            return Err(Error::ZeroStepLaw("the law must charge a nonzero value"));
        }
        Ok(law)
    }

    fn mean_abs(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(v, p)| v.unsigned_abs() as f64 * p).sum()
    }

    /// `E[Z+] / E[|Z|]`.
    pub fn effective_alpha(&self) -> f64 {
        let pos: f64 = self.values.iter().zip(&self.probs).map(|(v, p)| (*v).max(0) as f64 * p).sum();
        pos / self.mean_abs()
    }

    #[inline]
    fn draw(&self, u: f64) -> i64 {
        let mut acc = 0.0;
        for (v, p) in self.values.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return *v;
            }
        }
        *self.values.last().unwrap()
    }
}

/// Skew random walk at scale `n`: space step `1/n`, time step `1/n^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSpec {
    pub n: u32,
    pub horizon: f64,
    pub alpha: SkewParameter,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub zero_step_law: Option<ZeroStepLaw>,
}

impl WalkSpec {
    pub fn new(n: u32, horizon: f64, alpha: SkewParameter, x0: f64) -> Result<Self> {
        let spec = Self {
            n,
            horizon,
            alpha,
            x0,
            zero_step_law: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_zero_step_law(mut self, law: ZeroStepLaw) -> Self {
        self.zero_step_law = Some(law);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::OutOfRange { name: "n", value: 0.0 });
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::NonPositiveTime(self.horizon));
        }
        self.start_index()?;
        Ok(())
    }

    /// Skewness actually realised by the walk.
    pub fn effective_alpha(&self) -> f64 {
        match &self.zero_step_law {
            Some(z) => z.effective_alpha(),
            None => self.alpha.alpha(),
        }
    }

    pub fn steps(&self) -> usize {
        let n2 = self.n as f64 * self.n as f64;
        (n2 * self.horizon - 1e-9).ceil().max(1.0) as usize
    }

    pub fn dt(&self) -> f64 {
        1.0 / (self.n as f64 * self.n as f64)
    }

    pub fn start_index(&self) -> Result<i64> {
        let s = self.x0 * self.n as f64;
        if !s.is_finite() || (s - s.round()).abs() > 1e-9 {
            return Err(Error::StartOffGrid(self.x0));
        }
        Ok(s.round() as i64)
    }
}

/// Runs the lattice walk, calling `obs(k, S_k)` for `k = 0..=steps`; returns `S_steps`.
/// Off 0 one fair bit says "away from 0" or "towards 0"; at 0 a full uniform is drawn.
/// Walks that differ only in their zero rule therefore have equal `|S_k|` on one stream.
pub fn walk_run<R: RngCore>(spec: &WalkSpec, rng: &mut R, mut obs: impl FnMut(usize, i64)) -> Result<i64> {
    spec.validate()?;
    let steps = spec.steps();
    let alpha = spec.alpha.alpha();
    let mut s = spec.start_index()?;
    let mut bits = BitSource::default();
    obs(0, s);
    for k in 1..=steps {
        if s == 0 {
            let u = open_unit(rng);
            s = match &spec.zero_step_law {
                Some(z) => z.draw(u),
                None if u < alpha => 1,
                None => -1,
            };
        } else if bits.next(rng) {
            s += s.signum();
        } else {
            s -= s.signum();
        }
        obs(k, s);
    }
    Ok(s)
}

pub fn gen_random_walk(spec: &WalkSpec, rng: RngStream) -> Result<SampledPath> {
    spec.validate()?;
    let inv_n = 1.0 / spec.n as f64;
    let mut values = Vec::with_capacity(spec.steps() + 1);
    walk_run(spec, &mut rng.rng(), |_, s| values.push(s as f64 * inv_n))?;
    SampledPath::uniform(0.0, spec.dt(), values)
}

/// Reflected walk whose excursions away from 0 get independent signs, `+` with
/// probability `alpha`. Signs come from a separate child stream.
pub fn excursion_flip_run<R: RngCore>(
    n: u32,
    horizon: f64,
    alpha: SkewParameter,
    walk_rng: &mut R,
    sign_rng: &mut R,
    mut obs: impl FnMut(usize, i64),
) -> Result<i64> {
    let spec = WalkSpec::new(n, horizon, alpha, 0.0)?;
    let mut r: i64 = 0;
    let mut sign: i64 = 1;
    let mut bits = BitSource::default();
    obs(0, 0);
    for k in 1..=spec.steps() {
        if r == 0 {
            r = 1;
            sign = if open_unit(sign_rng) < alpha.alpha() { 1 } else { -1 };
        } else if bits.next(walk_rng) {
            r += 1;
        } else {
            r -= 1;
        }
        obs(k, sign * r);
    }
    Ok(sign * r)
}

pub fn gen_excursion_flip(n: u32, horizon: f64, alpha: SkewParameter, rng: RngStream) -> Result<SampledPath> {
    let spec = WalkSpec::new(n, horizon, alpha, 0.0)?;
    let inv_n = 1.0 / n as f64;
    let mut values = Vec::with_capacity(spec.steps() + 1);
    excursion_flip_run(
        n,
        horizon,
        alpha,
        &mut rng.substream(0).rng(),
        &mut rng.substream(1).rng(),
        |_, s| values.push(s as f64 * inv_n),
    )?;
    SampledPath::uniform(0.0, spec.dt(), values)
}

fn check_pair(alpha1: SkewParameter, alpha2: SkewParameter, x1: f64, x2: f64, spec: &WalkSpec) -> Result<(i64, i64)> {
    spec.validate()?;
    if alpha1.alpha() > alpha2.alpha() || x1 > x2 {
        return Err(Error::CouplingOrder);
    }
    let n = spec.n as f64;
    let idx = |x: f64| {
        let s = x * n;
        if !s.is_finite() || (s - s.round()).abs() > 1e-9 {
            Err(Error::StartOffGrid(x))
        } else {
            Ok(s.round() as i64)
        }
    };
    let (s1, s2) = (idx(x1)?, idx(x2)?);
    if (s2 - s1).rem_euclid(2) != 0 {
        return Err(Error::ParityMismatch { x1, x2 });
    }
    Ok((s1, s2))
}

/// Two walks on one uniform per step: off 0 both go up iff `U < 1/2`, at 0 walk `i`
/// goes up iff `U < alpha_i`. Calls `obs(k, S1_k, S2_k)`.
pub fn coupled_walk_run<R: RngCore>(
    alpha1: SkewParameter,
    alpha2: SkewParameter,
    x1: f64,
    x2: f64,
    spec: &WalkSpec,
    rng: &mut R,
    mut obs: impl FnMut(usize, i64, i64),
) -> Result<(i64, i64)> {
    let (mut s1, mut s2) = check_pair(alpha1, alpha2, x1, x2, spec)?;
    let (a1, a2) = (alpha1.alpha(), alpha2.alpha());
    let step = |s: i64, a: f64, u: f64| {
        let p = if s == 0 { a } else { 0.5 };
        if u < p {
            s + 1
        } else {
            s - 1
        }
    };
    obs(0, s1, s2);
    for k in 1..=spec.steps() {
        let u = open_unit(rng);
        s1 = step(s1, a1, u);
        s2 = step(s2, a2, u);
        obs(k, s1, s2);
    }
    Ok((s1, s2))
}

/// Monotone coupling of two skew walks; the `alpha` and `x0` fields of `spec` are
/// replaced by the per-walk values.
pub fn gen_coupled_walk_pair(
    alpha1: SkewParameter,
    alpha2: SkewParameter,
    x1: f64,
    x2: f64,
    spec: &WalkSpec,
    rng: RngStream,
) -> Result<(SampledPath, SampledPath)> {
    let inv_n = 1.0 / spec.n as f64;
    let cap = spec.steps() + 1;
    let (mut v1, mut v2) = (Vec::with_capacity(cap), Vec::with_capacity(cap));
    coupled_walk_run(alpha1, alpha2, x1, x2, spec, &mut rng.rng(), |_, a, b| {
        v1.push(a as f64 * inv_n);
        v2.push(b as f64 * inv_n);
    })?;
    Ok((
        SampledPath::uniform(0.0, spec.dt(), v1)?,
        SampledPath::uniform(0.0, spec.dt(), v2)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sk(a: f64) -> SkewParameter {
        SkewParameter::from_alpha(a).unwrap()
    }

    #[test]
    fn alpha_one_never_negative() {
        let spec = WalkSpec::new(20, 1.0, sk(1.0), 0.0).unwrap();
        for i in 0..50 {
            let p = gen_random_walk(&spec, RngStream::new(1, i)).unwrap();
            assert!(p.values().iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn interpolation_grid() {
        let spec = WalkSpec::new(10, 1.0, sk(0.7), 0.3).unwrap();
        let p = gen_random_walk(&spec, RngStream::new(2, 0)).unwrap();
        assert_eq!(p.len(), 101);
        assert_eq!(p.uniform_dt(), Some(0.01));
        assert!((p.initial() - 0.3).abs() < 1e-15);
        for w in p.values().windows(2) {
            assert!(((w[1] - w[0]).abs() - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn off_grid_start_rejected() {
        assert!(matches!(WalkSpec::new(10, 1.0, sk(0.5), 0.15), Err(Error::StartOffGrid(_))));
    }

    #[test]
    fn sign_frequency_small_sample() {
        let spec = WalkSpec::new(30, 1.0, sk(0.7), 0.0).unwrap();
        let n = 20_000;
        let mut pos = 0.0;
        for i in 0..n {
            let s = walk_run(&spec, &mut RngStream::new(3, i).rng(), |_, _| {}).unwrap();
            pos += if s > 0 { 1.0 } else if s == 0 { 0.5 } else { 0.0 };
        }
        let f = pos / n as f64;
        assert!((f - 0.7).abs() < 4.0 * (0.21f64 / n as f64).sqrt(), "{f}");
    }

    #[test]
    fn zero_step_law_effective_alpha() {
        let z = ZeroStepLaw::new(vec![2, -1], vec![0.5, 0.5]).unwrap();
        assert!((z.effective_alpha() - 2.0 / 3.0).abs() < 1e-15);
        assert!(ZeroStepLaw::new(vec![0], vec![1.0]).is_err());
        assert!(ZeroStepLaw::new(vec![1, -1], vec![0.6, 0.6]).is_err());
        let spec = WalkSpec::new(10, 1.0, sk(0.5), 0.0).unwrap().with_zero_step_law(z);
        let p = gen_random_walk(&spec, RngStream::new(4, 0)).unwrap();
        assert_eq!(p.len(), 101);
    }

    #[test]
    fn excursion_flip_alpha_one_is_reflected() {
        let p = gen_excursion_flip(15, 1.0, sk(1.0), RngStream::new(5, 0)).unwrap();
        assert!(p.values().iter().all(|&x| x >= 0.0));
        assert!(p.values().iter().any(|&x| x > 0.0));
    }

    #[test]
    fn excursion_signs_constant_between_zeros() {
        let p = gen_excursion_flip(15, 2.0, sk(0.4), RngStream::new(6, 0)).unwrap();
        for w in p.values().windows(2) {
            assert!(w[0] * w[1] >= 0.0);
        }
    }

    #[test]
    fn coupled_identical_when_equal() {
        let spec = WalkSpec::new(10, 2.0, sk(0.7), 0.0).unwrap();
        let (a, b) = gen_coupled_walk_pair(sk(0.7), sk(0.7), 0.0, 0.0, &spec, RngStream::new(7, 0)).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn coupled_pair_errors() {
        let spec = WalkSpec::new(10, 1.0, sk(0.7), 0.0).unwrap();
        let r = RngStream::new(0, 0);
        assert!(matches!(
            gen_coupled_walk_pair(sk(0.3), sk(0.7), 0.0, 0.1, &spec, r),
            Err(Error::ParityMismatch { .. })
        ));
        assert!(matches!(
            gen_coupled_walk_pair(sk(0.8), sk(0.7), 0.0, 0.0, &spec, r),
            Err(Error::CouplingOrder)
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn reflected_modulus_identity(alpha in 0.0f64..=1.0, seed in any::<u64>()) {
            let a = WalkSpec::new(12, 1.0, sk(alpha), 0.0).unwrap();
            let h = WalkSpec::new(12, 1.0, sk(0.5), 0.0).unwrap();
            let pa = gen_random_walk(&a, RngStream::new(seed, 0)).unwrap();
            let ph = gen_random_walk(&h, RngStream::new(seed, 0)).unwrap();
            for (x, y) in pa.values().iter().zip(ph.values()) {
                prop_assert_eq!(x.abs(), y.abs());
            }
        }

        #[test]
        fn coupled_order_every_step(a1 in 0.0f64..=1.0, da in 0.0f64..=1.0, k1 in -6i64..6, dk in 0i64..4, seed in any::<u64>()) {
            let a2 = (a1 + da).min(1.0);
            let spec = WalkSpec::new(5, 4.0, sk(0.5), 0.0).unwrap();
            let (x1, x2) = (k1 as f64 / 5.0, (k1 + 2 * dk) as f64 / 5.0);
            coupled_walk_run(sk(a1), sk(a2), x1, x2, &spec, &mut RngStream::new(seed, 1).rng(), |_, s1, s2| {
                assert!(s1 <= s2);
            }).unwrap();
        }
    }
}
