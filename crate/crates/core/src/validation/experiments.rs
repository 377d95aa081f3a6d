//! Batch drivers shared by the acceptance suite and the command line. Each one
//! simulates with per-path child streams of the given `RngStream` and reduces the
//! results in path order, so reports do not depend on the worker count.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::coupling::{bound_report, coalescence_report, l1_bound_skew, order_report};
use super::local_time::{local_time_report, residual_report, LocalTimeAccumulator, LocalTimeEstimate};
use super::marginal::{gof_marginal, gof_marginal_lattice, sign_test};
use super::occupation::{occupation_report, OccupationAccumulator, OccupationLaw};
use super::report::{Target, ToleranceRule, ValidationReport};
use crate::coeffs::{validate_piecewise, DiffusionCoefficients};
use crate::density::{semigroup_apply, transition_density, TransitionCdf};
use crate::error::{Error, Result};
use crate::exit_scheme::{ExitGrid, SchemeC, SchemeE};
use crate::generators::{
    coupled_walk_run, excursion_flip_run, follow_leader_run, walk_run, BitSource, EulerModel, EulerScheme, WalkSpec,
};
use crate::measure::SignedAtomicMeasure;
use crate::numerics::mean_and_se;
use crate::pde::{pde_vs_density, InitialFn, PdeComparison};
use crate::rng::{open_unit, par_map_paths, RngStream};
use crate::scale_speed::{ExitSide, ScaleSource, ScaleSpeedModel};
use crate::skew::{make_skew, SkewParameter, SkewSpec};
use crate::transform::{brownian_reduction, legall_function, recovered_atom, SkewSDE};

/// A simulator of skew Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorKind {
    Walk { n: u32 },
    ExcursionFlip { n: u32 },
    Euler { dt: f64 },
    FollowLeader { delta: f64 },
    /// Exact exit-time scheme on a grid of step `h` with a skew node at 0.
    SchemeC { h: f64 },
    /// Inversion of the closed-form transition law.
    Exact,
}

impl GeneratorKind {
    pub fn label(&self) -> String {
        match self {
            Self::Walk { n } => format!("walk_n{n}"),
            Self::ExcursionFlip { n } => format!("excursion_flip_n{n}"),
            Self::Euler { dt } => format!("euler_dt{dt}"),
            Self::FollowLeader { delta } => format!("follow_leader_delta{delta}"),
            Self::SchemeC { h } => format!("scheme_c_h{h}"),
            Self::Exact => "exact".into(),
        }
    }

    /// Spacing of the terminal lattice for walk generators.
    pub fn lattice_spacing(&self) -> Option<f64> {
        match self {
            Self::Walk { n } | Self::ExcursionFlip { n } => Some(2.0 / *n as f64),
            _ => None,
        }
    }
}

fn seed_of(rng: &RngStream) -> Option<u64> {
    Some(rng.seed)
}

fn collect<T>(v: Vec<Result<T>>) -> Result<Vec<T>> {
    v.into_iter().collect()
}

pub(crate) fn skew_grid(alpha: SkewParameter, h: f64) -> Result<ExitGrid> {
    ExitGrid::symmetric(1.0, h, &[(0.0, alpha.beta())])
}

fn euler_for(alpha: SkewParameter, dt: f64) -> Result<EulerScheme> {
    EulerScheme::new(&EulerModel::Sde(SkewSDE::skew_brownian(alpha)?), dt)
}

/// `count` independent samples of `X_horizon` started at `x0`.
pub fn terminal_sample(
    kind: GeneratorKind,
    alpha: SkewParameter,
    horizon: f64,
    x0: f64,
    count: usize,
    rng: RngStream,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::EmptySample);
    }
    let from_origin = |name: &'static str| {
        if x0 != 0.0 {
            Err(Error::Invalid(format!("{name} starts at 0 only")))
        } else {
            Ok(())
        }
    };
    let out = match kind {
        GeneratorKind::Walk { n } => {
            let spec = WalkSpec::new(n, horizon, alpha, x0)?;
            spec.validate()?;
            let inv = 1.0 / n as f64;
            par_map_paths(rng, count, |_, s| walk_run(&spec, &mut s.rng(), |_, _| {}).map(|k| k as f64 * inv))
        }
        GeneratorKind::ExcursionFlip { n } => {
            from_origin("excursion_flip")?;
            WalkSpec::new(n, horizon, alpha, 0.0)?.validate()?;
            let inv = 1.0 / n as f64;
            par_map_paths(rng, count, |_, s| {
                let (mut w, mut g) = (s.substream(0).rng(), s.substream(1).rng());
                excursion_flip_run(n, horizon, alpha, &mut w, &mut g, |_, _| {}).map(|k| k as f64 * inv)
            })
        }
        GeneratorKind::Euler { dt } => {
            let e = euler_for(alpha, dt)?;
            par_map_paths(rng, count, |_, s| e.run(horizon, x0, &mut s.rng(), |_, _, _| {}))
        }
        GeneratorKind::FollowLeader { delta } => {
            from_origin("follow_leader")?;
            par_map_paths(rng, count, |_, s| follow_leader_run(delta, horizon, alpha, &mut s.rng(), |_, _, _, _| {}))
        }
        GeneratorKind::SchemeC { h } => {
            let c = SchemeC::new(skew_grid(alpha, h)?);
            par_map_paths(rng, count, |_, s| c.terminal(horizon, x0, &mut s.rng()))
        }
        GeneratorKind::Exact => {
            let law = TransitionCdf::new(horizon, x0, alpha)?;
            par_map_paths(rng, count, |_, s| law.sample(&mut s.rng()))
        }
    };
    collect(out)
}

/// Sign frequency of `X_horizon` from 0 against `alpha`, and the KS test of the
/// same sample against the closed-form marginal.
pub fn sign_and_marginal(
    kind: GeneratorKind,
    alpha: SkewParameter,
    horizon: f64,
    count: usize,
    rng: RngStream,
) -> Result<(ValidationReport, ValidationReport)> {
    let seed = seed_of(&rng);
    let xs = terminal_sample(kind, alpha, horizon, 0.0, count, rng)?;
    let sign = sign_test(&format!("sign_law/{}", kind.label()), &xs, alpha.alpha(), 0.0, seed)?
        .with_detail("alpha", alpha.alpha());
    let mut ks = match kind.lattice_spacing() {
        Some(d) => gof_marginal_lattice(&xs, d, horizon, 0.0, alpha, seed)?,
        None => gof_marginal(&xs, horizon, 0.0, alpha, seed)?,
    };
    ks.name = format!("marginal_law/{}", kind.label());
    Ok((sign, ks.with_detail("alpha", alpha.alpha())))
}

/// Closed-form identities of the transition density at a few points.
pub fn density_identities(alpha: SkewParameter) -> Result<Vec<ValidationReport>> {
    let q = |t: f64, x: f64, y: f64| transition_density(t, x, y, alpha);
    let a = alpha.alpha();

    let mut mass_err = 0.0f64;
    for &(t, x) in &[(0.1, 0.0), (1.0, 0.5), (3.0, -2.0), (0.5, 1e-3)] {
        let m = semigroup_apply(t, &|_| 1.0, x, alpha)?;
        mass_err = mass_err.max((m - 1.0).abs());
    }
    let mut balance = 0.0f64;
    for &(t, x, y) in &[(0.3, 0.4, -0.7), (1.0, -1.2, 0.1), (2.5, 0.9, 2.2), (0.05, -0.1, 0.05), (1.0, 0.0, 0.3)] {
        let l = alpha.side_weight(x) * q(t, x, y)?;
        let r = alpha.side_weight(y) * q(t, y, x)?;
        balance = balance.max((l - r).abs());
    }
    let mut ck = 0.0f64;
    for &(s, t, x, y) in &[(0.3, 0.5, 0.2, -0.4), (1.0, 0.25, -0.5, 0.6), (0.5, 0.5, 0.0, 0.0)] {
        let lhs = semigroup_apply(s, &|z| q(t, z, y).unwrap_or(f64::NAN), x, alpha)?;
        ck = ck.max((lhs - q(s + t, x, y)?).abs());
    }
    // one-sided second-order differences of u = P_t phi at 0, two steps
    let phi = |y: f64| (-(y - 0.4) * (y - 0.4) / 0.5).exp();
    let u = |x: f64| semigroup_apply(0.6, &phi, x, alpha);
    let mismatch = |h: f64| -> Result<f64> {
        let u0 = u(0.0)?;
        let dp = (-3.0 * u0 + 4.0 * u(h)? - u(2.0 * h)?) / (2.0 * h);
        let dm = (3.0 * u0 - 4.0 * u(-h)? + u(-2.0 * h)?) / (2.0 * h);
        Ok((a * dp - (1.0 - a) * dm).abs())
    };
    let (m1, m2) = (mismatch(0.04)?, mismatch(0.02)?);
    let order = (m1 / m2).log2();

    let exact = |name: &str, est: f64, tol: f64| {
        ValidationReport::new(name, Target::Value(0.0), est, None, None, ToleranceRule::Absolute { tol }, None, 1)
            .with_detail("alpha", a)
    };
    Ok(vec![
        exact("density_conservation", mass_err, 1e-8),
        exact("density_detailed_balance", balance, 1e-13),
        exact("density_chapman_kolmogorov", ck, 1e-7),
        ValidationReport::new(
            "density_flux_order",
            Target::Value(1.8),
            if m2 == 0.0 { f64::INFINITY } else { order },
            None,
            None,
            ToleranceRule::AtLeast,
            None,
            2,
        )
        .with_detail("mismatch_h0.04", m1)
        .with_detail("mismatch_h0.02", m2)
        .with_detail("alpha", a),
    ])
}

/// Which simulation provides the exit from `(-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExitKind {
    /// Walk with steps `1/n` run until `|S| = n`.
    Walk { n: u32 },
    SchemeC { h: f64 },
    SchemeE { h: f64 },
}

impl ExitKind {
    pub fn label(&self) -> String {
        match self {
            Self::Walk { n } => format!("walk_n{n}"),
            Self::SchemeC { h } => format!("scheme_c_h{h}"),
            Self::SchemeE { h } => format!("scheme_e_h{h}"),
        }
    }
}

/// Walk from 0 until `|S| = n`; returns `(steps, S)`.
fn walk_until_exit<R: RngCore>(n: u32, alpha: f64, rng: &mut R) -> (u64, i64) {
    let n = n as i64;
    let mut bits = BitSource::default();
    let (mut s, mut k) = (0i64, 0u64);
    while s.abs() < n {
        s = if s == 0 {
            if open_unit(rng) < alpha {
                1
            } else {
                -1
            }
        } else if bits.next(rng) {
            s + 1
        } else {
            s - 1
        };
        k += 1;
    }
    (k, s)
}

/// `(time, exit position)` pairs for exits of `(-1, 1)` from 0.
pub fn exit_sample(kind: ExitKind, alpha: SkewParameter, count: usize, rng: RngStream) -> Result<Vec<(f64, f64)>> {
    if count == 0 {
        return Err(Error::EmptySample);
    }
    let out = match kind {
        ExitKind::Walk { n } => {
            if n == 0 {
                return Err(Error::OutOfRange { name: "n", value: 0.0 });
            }
            let inv = 1.0 / n as f64;
            par_map_paths(rng, count, |_, s| {
                let (k, pos) = walk_until_exit(n, alpha.alpha(), &mut s.rng());
                Ok((k as f64 * inv * inv, pos as f64 * inv))
            })
        }
        ExitKind::SchemeC { h } => {
            let c = SchemeC::new(skew_grid(alpha, h)?);
            par_map_paths(rng, count, |_, s| c.run_until_exit(0.0, -1.0, 1.0, &mut s.rng()))
        }
        ExitKind::SchemeE { h } => {
            let coeffs = validate_piecewise(DiffusionCoefficients::skew_brownian(alpha))?;
            let grid = skew_grid(alpha, h)?.points().to_vec();
            let e = SchemeE::new(&coeffs, grid)?;
            par_map_paths(rng, count, |_, s| e.run_until_exit(0.0, -1.0, 1.0, &mut s.rng()))
        }
    };
    collect(out)
}

/// Frequency of exits at `+1` against `alpha`.
pub fn hitting(kind: ExitKind, alpha: SkewParameter, count: usize, rng: RngStream) -> Result<ValidationReport> {
    let seed = seed_of(&rng);
    let ex = exit_sample(kind, alpha, count, rng)?;
    let up: Vec<f64> = ex.iter().map(|&(_, p)| if p > 0.0 { 1.0 } else { -1.0 }).collect();
    Ok(sign_test(&format!("hitting/{}", kind.label()), &up, alpha.alpha(), 0.0, seed)?.with_detail("alpha", alpha.alpha()))
}

/// Mean exit time of `(-1, 1)` against 1.
pub fn exit_time(kind: ExitKind, alpha: SkewParameter, count: usize, rng: RngStream) -> Result<ValidationReport> {
    let seed = seed_of(&rng);
    let ex = exit_sample(kind, alpha, count, rng)?;
    let t: Vec<f64> = ex.iter().map(|e| e.0).collect();
    let (m, se) = mean_and_se(&t);
    Ok(ValidationReport::new(
        format!("exit_time/{}", kind.label()),
        Target::Value(1.0),
        m,
        Some(se),
        None,
        ToleranceRule::WithinSigma { k: 3.0, allowance: 0.0 },
        seed,
        count,
    )
    .with_detail("alpha", alpha.alpha()))
}

/// Scale-function hitting probability of `+1` before `-1` from 0, and `E tau = L^2`
/// by Green quadrature for each half-width.
pub fn exit_identities(alpha: SkewParameter, half_widths: &[f64]) -> Result<Vec<ValidationReport>> {
    let m = ScaleSpeedModel::build(ScaleSource::Skew(alpha))?;
    let p = m.hitting_probability(0.0, -1.0, 1.0)?;
    let mut out = vec![ValidationReport::new(
        "hitting/scale_function",
        Target::Value(alpha.alpha()),
        p,
        None,
        None,
        ToleranceRule::Absolute { tol: 1e-14 },
        None,
        1,
    )];
    for &l in half_widths {
        let e = m.exit_time_moments(0.0, -l, l, ExitSide::Either)?.mean;
        out.push(
            ValidationReport::new(
                format!("exit_time/green_L{l}"),
                Target::Value(l * l),
                e,
                None,
                None,
                ToleranceRule::Absolute { tol: 1e-10 },
                None,
                1,
            )
            .with_detail("alpha", alpha.alpha()),
        );
    }
    Ok(out)
}

/// One rung of the local-time refinement ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderLevel {
    pub eps: f64,
    pub dt: f64,
}

pub const DEFAULT_LADDER: [LadderLevel; 3] = [
    LadderLevel { eps: 0.2, dt: 1e-2 },
    LadderLevel { eps: 0.1, dt: 1e-3 },
    LadderLevel { eps: 0.05, dt: 2.5e-5 },
];

fn euler_local_times(
    alpha: SkewParameter,
    eps: f64,
    dt: f64,
    horizon: f64,
    beta: Option<f64>,
    count: usize,
    rng: RngStream,
) -> Result<Vec<LocalTimeEstimate>> {
    let e = euler_for(alpha, dt)?;
    collect(par_map_paths(rng, count, |_, s| {
        let mut acc = LocalTimeAccumulator::new(eps, dt, 0.0, beta)?;
        e.run(horizon, 0.0, &mut s.rng(), |_, x, db| acc.push(x, db))?;
        Ok(acc.finish())
    }))
}

/// Local-time ratio on the finest level plus a trend report over all levels (fresh
/// paths per level): the largest increase of the relative error of `L+/L0` from one
/// level to the next must not exceed 0. Per-level ratios are trend details.
pub fn local_time_ladder(
    alpha: SkewParameter,
    levels: &[LadderLevel],
    horizon: f64,
    count: usize,
    rng: RngStream,
) -> Result<Vec<ValidationReport>> {
    if levels.len() < 2 {
        return Err(Error::Invalid("a ladder needs at least two levels".into()));
    }
    let seed = seed_of(&rng);
    let mut reports = Vec::new();
    let mut errs = Vec::new();
    for (k, lv) in levels.iter().enumerate() {
        let est = euler_local_times(alpha, lv.eps, lv.dt, horizon, None, count, rng.substream(k as u64))?;
        let r = local_time_report(&est, alpha, lv.eps, seed)?.with_detail("dt", lv.dt);
        errs.push((r.estimate / r.target.value() - 1.0).abs());
        reports.push(r);
    }
    let worst = errs.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let mut trend = ValidationReport::new(
        "local_time_trend",
        Target::Value(0.0),
        worst,
        None,
        None,
        ToleranceRule::AtMost,
        seed,
        count * levels.len(),
    );
    for (k, (e, r)) in errs.iter().zip(&reports).enumerate() {
        trend = trend
            .with_detail(format!("ratio_{k}"), r.estimate)
            .with_detail(format!("relative_error_{k}"), *e);
    }
    // only the finest level is held to the tolerance; coarser ones feed the trend
    let mut last = reports.pop().expect("at least two levels");
    last.name = "local_time_ratio/final".into();
    Ok(vec![last, trend])
}

/// Fraction of Euler paths whose residual `max |X - B - beta L|` is at most `threshold`.
pub fn sde_residual(
    alpha: SkewParameter,
    dt: f64,
    eps: f64,
    threshold: f64,
    horizon: f64,
    count: usize,
    rng: RngStream,
) -> Result<ValidationReport> {
    let seed = seed_of(&rng);
    let est = euler_local_times(alpha, eps, dt, horizon, Some(alpha.beta()), count, rng)?;
    let res: Vec<f64> = est.iter().map(|e| e.residual.unwrap_or(f64::NAN)).collect();
    Ok(residual_report(&res, threshold, 0.95, seed)?
        .with_detail("dt", dt)
        .with_detail("eps", eps)
        .with_detail("alpha", alpha.alpha()))
}

/// KS of walk occupation fractions of `[0, inf)` over `[0, 1]` against the closed
/// form, with the reflection identity of the CDF as a detail.
pub fn occupation(alpha: SkewParameter, n: u32, count: usize, rng: RngStream) -> Result<ValidationReport> {
    let seed = seed_of(&rng);
    let spec = WalkSpec::new(n, 1.0, alpha, 0.0)?;
    spec.validate()?;
    let fr = collect(par_map_paths(rng, count, |_, s| {
        let mut acc = OccupationAccumulator::new();
        walk_run(&spec, &mut s.rng(), |_, k| acc.push(k as f64))?;
        Ok(acc.fraction())
    }))?;
    let mut r = occupation_report(&fr, alpha, seed)?;
    r.name = format!("occupation_law/walk_n{n}");
    Ok(r.with_detail("alpha", alpha.alpha()).with_detail("reflection_error", occupation_reflection_error(alpha)?))
}

/// `max |F_alpha(x) + F_{1-alpha}(1-x) - 1|` over a grid of `x`.
pub fn occupation_reflection_error(alpha: SkewParameter) -> Result<f64> {
    let (f, g) = (OccupationLaw::new(alpha), OccupationLaw::new(SkewParameter::from_alpha(1.0 - alpha.alpha())?));
    Ok((0..=1000)
        .map(|i| {
            let x = i as f64 / 1000.0;
            (f.cdf(x) + g.cdf(1.0 - x) - 1.0).abs()
        })
        .fold(0.0, f64::max))
}

/// Order check over monotone-coupled walk pairs started at 0.
pub fn coupling_order(
    alpha1: SkewParameter,
    alpha2: SkewParameter,
    n: u32,
    horizon: f64,
    count: usize,
    rng: RngStream,
) -> Result<ValidationReport> {
    let seed = seed_of(&rng);
    let spec = WalkSpec::new(n, horizon, alpha1, 0.0)?;
    let v = collect(par_map_paths(rng, count, |_, s| {
        let mut bad = 0usize;
        coupled_walk_run(alpha1, alpha2, 0.0, 0.0, &spec, &mut s.rng(), |_, a, b| bad += (a > b) as usize)?;
        Ok(bad)
    }))?;
    Ok(order_report(v.iter().sum(), count * (spec.steps() + 1), count, seed)
        .with_detail("alpha1", alpha1.alpha())
        .with_detail("alpha2", alpha2.alpha()))
}

/// Fraction of coupled pairs (same `alpha`, starts `x1 < x2`) that have met by each
/// horizon; passes when it strictly increases.
pub fn coalescence(
    alpha: SkewParameter,
    n: u32,
    x1: f64,
    x2: f64,
    horizons: &[f64],
    count: usize,
    rng: RngStream,
) -> Result<ValidationReport> {
    if horizons.is_empty() || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("horizons must be ascending".into()));
    }
    let seed = seed_of(&rng);
    let spec = WalkSpec::new(n, *horizons.last().unwrap(), alpha, 0.0)?;
    let dt = spec.dt();
    let meet = collect(par_map_paths(rng, count, |_, s| {
        let mut first: Option<usize> = None;
        coupled_walk_run(alpha, alpha, x1, x2, &spec, &mut s.rng(), |k, a, b| {
            if first.is_none() && a == b {
                first = Some(k);
            }
        })?;
        Ok(first.map(|k| k as f64 * dt))
    }))?;
    let fr: Vec<f64> = horizons
        .iter()
        .map(|&h| meet.iter().filter(|m| m.is_some_and(|t| t <= h + 0.5 * dt)).count() as f64 / count as f64)
        .collect();
    Ok(coalescence_report(horizons, &fr, count, seed)?.with_detail("alpha", alpha.alpha()))
}

/// `E|X^1_t - X^2_t|` for two skew Brownian motions from 0 driven by the same Euler
/// noise, against `|beta1 - beta2| int_0^t p_s(0) ds` with a `sqrt(dt)` allowance.
pub fn l1_skew(beta1: f64, beta2: f64, dt: f64, horizon: f64, count: usize, rng: RngStream) -> Result<ValidationReport> {
    let seed = seed_of(&rng);
    let (s1, s2) = (make_skew(SkewSpec::Beta(beta1))?, make_skew(SkewSpec::Beta(beta2))?);
    let (e1, e2) = (euler_for(s1, dt)?, euler_for(s2, dt)?);
    let d = collect(par_map_paths(rng, count, |_, s| {
        let a = e1.run(horizon, 0.0, &mut s.rng(), |_, _, _| {})?;
        let b = e2.run(horizon, 0.0, &mut s.rng(), |_, _, _| {})?;
        Ok((a - b).abs())
    }))?;
    let bound = l1_bound_skew(beta1, beta2, horizon, 0.0);
    let mut r = bound_report("l1_bound_skew", &d, bound, dt.sqrt(), seed);
    r.name = format!("l1_bound_skew/{beta1}_{beta2}");
    Ok(r.with_detail("dt", dt))
}

/// Three-way check at `(t, x0)`: refinement order of the finite-volume solution
/// against the semigroup, then Monte Carlo `E phi(X_t)` against both.
pub fn pde_triangle(
    alpha: SkewParameter,
    t: f64,
    x0: f64,
    kind: GeneratorKind,
    count: usize,
    rng: RngStream,
) -> Result<Vec<ValidationReport>> {
    let seed = seed_of(&rng);
    let phi = |x: f64| (-(x - 0.2) * (x - 0.2) / 0.5).exp();
    let initial: InitialFn = Arc::new(phi);
    let cmp = PdeComparison::default();
    let probes = [-1.0, -0.3, 0.0, 0.4, 1.2, x0];
    let order = pde_vs_density(alpha, &initial, t, &probes, &cmp)?;
    let extent = probes.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let field = cmp.solve_level(alpha, &initial, t, extent, cmp.levels - 1)?;
    let u_pde = field.final_value(x0);
    let u_sg = semigroup_apply(t, &phi, x0, alpha)?;
    let xs = terminal_sample(kind, alpha, t, x0, count, rng)?;
    let ys: Vec<f64> = xs.iter().map(|&x| phi(x)).collect();
    let (m, se) = mean_and_se(&ys);
    let mc = |name: &str, target: f64, allowance: f64| {
        ValidationReport::new(
            format!("{name}/{}", kind.label()),
            Target::Value(target),
            m,
            Some(se),
            None,
            ToleranceRule::WithinSigma { k: 3.0, allowance },
            seed,
            count,
        )
    };
    Ok(vec![
        order,
        mc("mc_vs_pde", u_pde, (u_pde - u_sg).abs()).with_detail("pde_gap", (u_pde - u_sg).abs()),
        mc("mc_vs_semigroup", u_sg, 0.0),
    ])
}

/// Reduction of the two-piece medium `a = (1, 4)` and round trips of the Le Gall
/// function on random atom sets drawn from `rng`.
pub fn transform_checks(sets: usize, rng: RngStream) -> Result<Vec<ValidationReport>> {
    let c = validate_piecewise(DiffusionCoefficients::two_piece(1.0, 4.0))?;
    let red = brownian_reduction(&c, false)?;
    let pts = red.skew_points();
    if pts.len() != 1 {
        return Err(Error::Invalid(format!("expected one skew point, found {}", pts.len())));
    }
    let beta = pts[0].beta;
    let model = ScaleSpeedModel::build(ScaleSource::Diffusion(c))?;
    let mismatch = red.push_forward_mismatch(&model)?;
    let seed = seed_of(&rng);
    let errs = collect(par_map_paths(rng, sets, |_, s| {
        let mut g = s.rng();
        let k = 1 + (g.next_u32() % 6) as usize;
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(k);
        while atoms.len() < k {
            let x = -5.0 + 10.0 * open_unit(&mut g);
            let w = -0.95 + 1.9 * open_unit(&mut g);
            if atoms.iter().all(|a| (a.0 - x).abs() > 1e-3) {
                atoms.push((x, w));
            }
        }
        let nu = SignedAtomicMeasure::new(atoms, None)?;
        let lg = legall_function(&nu)?;
        Ok(nu
            .atoms()
            .iter()
            .map(|&(x, w)| (recovered_atom(lg.f(x), lg.f_left(x)) - w).abs())
            .fold(0.0, f64::max))
    }))?;
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    Ok(vec![
        ValidationReport::new(
            "reduction_skew_point",
            Target::Value(1.0 / 3.0),
            beta,
            None,
            None,
            ToleranceRule::Absolute { tol: 1e-15 },
            None,
            1,
        )
        .with_detail("push_forward_mismatch", mismatch),
        ValidationReport::new(
            "push_forward_mismatch",
            Target::Value(0.0),
            mismatch,
            None,
            None,
            ToleranceRule::Absolute { tol: 1e-14 },
            None,
            1,
        ),
        ValidationReport::new(
            "legall_round_trip",
            Target::Value(0.0),
            worst,
            None,
            None,
            ToleranceRule::Absolute { tol: 1e-10 },
            seed,
            sets,
        ),
    ])
}
