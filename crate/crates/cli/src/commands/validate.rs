use serde::Serialize;
use skewsim::validation::experiments::{
    coalescence, coupling_order, density_identities, exit_identities, exit_time, hitting, l1_skew, local_time_ladder,
    occupation, pde_triangle, sde_residual, sign_and_marginal, transform_checks, DEFAULT_LADDER,
};
use skewsim::validation::{rescaling_limit, RescalingOptions, ValidationReport};
use skewsim::{Piece, PiecewiseFunction, RngStream, SkewParameter};

use crate::config::{
    default_workers, exit_kind, generator_kind, nonzero, positive, resolve_seed, GeneratorName, Suite, ValidateArgs,
};
use crate::error::CliError;
use crate::output::write_json;

#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub command: &'static str,
    pub suite: Suite,
    pub alpha: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub generator: GeneratorName,
    pub n: u32,
    pub dt: f64,
    pub delta: f64,
    pub h: f64,
    pub t: f64,
    pub eps: f64,
    pub threshold: f64,
    pub paths: usize,
    pub seed: Option<u64>,
    pub workers: usize,
    pub output: Option<String>,
}

struct SuiteDefaults {
    generator: GeneratorName,
    n: u32,
    dt: f64,
    paths: usize,
}

fn defaults(suite: Suite) -> SuiteDefaults {
    let d = |generator, n, dt, paths| SuiteDefaults { generator, n, dt, paths };
    match suite {
        Suite::SignLaw | Suite::MarginalLaw => d(GeneratorName::Walk, 200, 1e-4, 100_000),
        Suite::Density => d(GeneratorName::Exact, 1, 0.0, 1),
        Suite::Hitting | Suite::ExitTime => d(GeneratorName::SchemeC, 50, 0.0, 100_000),
        Suite::LocalTime => d(GeneratorName::Euler, 1, 0.0, 10_000),
        Suite::Residual => d(GeneratorName::Euler, 1, 1e-4, 2_000),
        Suite::Occupation => d(GeneratorName::Walk, 500, 0.0, 100_000),
        Suite::Coupling => d(GeneratorName::Walk, 50, 0.0, 100_000),
        Suite::Coalescence => d(GeneratorName::Walk, 10, 0.0, 10_000),
        Suite::L1 => d(GeneratorName::Euler, 1, 1e-3, 20_000),
        Suite::Rescaling => d(GeneratorName::Euler, 50, 1e-2, 100_000),
        Suite::Pde => d(GeneratorName::SchemeC, 200, 1e-3, 100_000),
        Suite::Transform => d(GeneratorName::Exact, 1, 0.0, 1_000),
    }
}

pub fn resolve(a: &ValidateArgs) -> Result<Resolved, CliError> {
    let suite = a.suite.ok_or_else(|| CliError::Config("suite: required".into()))?;
    let d = defaults(suite);
    let seed = if suite.is_stochastic() { Some(resolve_seed(a.seed)?) } else { a.seed };
    Ok(Resolved {
        command: "validate",
        suite,
        alpha: a.alpha.unwrap_or(0.7),
        alpha2: a.alpha2.unwrap_or(0.8),
        beta1: a.beta1.unwrap_or(0.2),
        beta2: a.beta2.unwrap_or(0.6),
        generator: a.generator.unwrap_or(d.generator),
        n: nonzero("n", a.n.unwrap_or(d.n) as usize)? as u32,
        dt: a.dt.unwrap_or(if d.dt > 0.0 { d.dt } else { 1e-3 }),
        delta: a.delta.unwrap_or(1e-3),
        h: a.h.unwrap_or(0.1),
        t: positive("t", a.t.unwrap_or(1.0))?,
        eps: positive("eps", a.eps.unwrap_or(0.01))?,
        threshold: positive("threshold", a.threshold.unwrap_or(0.05))?,
        paths: nonzero("paths", a.paths.unwrap_or(d.paths))?,
        seed,
        workers: nonzero("workers", a.workers.unwrap_or_else(default_workers))?,
        output: a.output.as_ref().map(|p| p.display().to_string()),
    })
}

fn bump() -> skewsim::Result<PiecewiseFunction> {
    PiecewiseFunction::new(
        vec![-1.0, 1.0],
        vec![Piece::Constant(0.0), Piece::Constant(3f64.ln() / 4.0), Piece::Constant(0.0)],
    )
}

pub fn reports(r: &Resolved) -> Result<Vec<ValidationReport>, CliError> {
    let alpha = SkewParameter::from_alpha(r.alpha)?;
    let rng = RngStream::new(r.seed.unwrap_or(0), 0);
    let gen = || generator_kind(r.generator, Some(r.n), Some(r.dt), Some(r.delta), Some(r.h));
    Ok(match r.suite {
        Suite::SignLaw => vec![sign_and_marginal(gen()?, alpha, r.t, r.paths, rng)?.0],
        Suite::MarginalLaw => vec![sign_and_marginal(gen()?, alpha, r.t, r.paths, rng)?.1],
        Suite::Density => density_identities(alpha)?,
        Suite::Hitting => {
            let mut v = exit_identities(alpha, &[])?;
            v.push(hitting(exit_kind(r.generator, Some(r.n), Some(r.h))?, alpha, r.paths, rng)?);
            v
        }
        Suite::ExitTime => {
            let mut v = exit_identities(alpha, &[1.0])?.split_off(1);
            v.push(exit_time(exit_kind(r.generator, Some(r.n), Some(r.h))?, alpha, r.paths, rng)?);
            v
        }
        Suite::LocalTime => local_time_ladder(alpha, &DEFAULT_LADDER, r.t, r.paths, rng)?,
        Suite::Residual => vec![sde_residual(alpha, r.dt, r.eps, r.threshold, r.t, r.paths, rng)?],
        Suite::Occupation => vec![occupation(alpha, r.n, r.paths, rng)?],
        Suite::Coupling => {
            let upper = SkewParameter::from_alpha(r.alpha2)?;
            vec![coupling_order(alpha, upper, r.n, r.t, r.paths, rng)?]
        }
        Suite::Coalescence => {
            let hs = [r.t, 4.0 * r.t, 16.0 * r.t];
            vec![coalescence(alpha, r.n, -0.5, 0.5, &hs, r.paths, rng)?]
        }
        Suite::L1 => vec![l1_skew(r.beta1, r.beta2, r.dt, r.t, r.paths, rng)?],
        Suite::Rescaling => {
            let opts = RescalingOptions {
                horizon: r.t,
                dt_inside: r.dt,
                ..Default::default()
            };
            vec![rescaling_limit(&bump()?, r.n, r.paths, &opts, rng)?]
        }
        Suite::Pde => pde_triangle(alpha, r.t, 0.0, gen()?, r.paths, rng)?,
        Suite::Transform => transform_checks(r.paths, rng)?,
    })
}

/// Prints one row per report and writes the JSON; `Ok(true)` when all pass.
pub fn run(r: &Resolved) -> Result<bool, CliError> {
    let reps = reports(r)?;
    for rep in &reps {
        println!("{}", rep.summary_line());
    }
    let name = serde_json::to_value(r.suite).expect("suite serializes");
    let out = r.output.clone().unwrap_or_else(|| format!("{}.json", name.as_str().unwrap_or("report")));
    write_json(Some(std::path::Path::new(&out)), r, "reports", &reps)?;
    Ok(reps.iter().all(|x| x.pass))
}
