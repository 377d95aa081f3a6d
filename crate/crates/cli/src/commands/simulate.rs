use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;

use serde::Serialize;
use skewsim::coeffs::{validate_piecewise, DiffusionCoefficients};
use skewsim::exit_scheme::{gen_scheme_c, gen_scheme_e, ExitGrid, SkeletonPath};
use skewsim::generators::{gen_euler, gen_excursion_flip, gen_follow_leader, gen_random_walk, EulerModel, WalkSpec};
use skewsim::numerics::mean_and_se;
use skewsim::transform::{BrownianReduction, SkewSDE};
use skewsim::validation::sign_frequency;
use skewsim::{RngStream, SampledPath, SkewParameter};

use crate::config::{default_workers, nonzero, positive, resolve_seed, GeneratorName, SimulateArgs};
use crate::error::CliError;
use crate::output::{num, sink, write_json};

#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub command: &'static str,
    pub generator: GeneratorName,
    pub alpha: f64,
    pub n: Option<u32>,
    pub dt: Option<f64>,
    pub delta: Option<f64>,
    pub h: Option<f64>,
    pub t: f64,
    pub x0: f64,
    pub paths: usize,
    pub seed: u64,
    pub workers: usize,
    pub output: Option<String>,
    pub summary: Option<String>,
}

pub fn resolve(a: &SimulateArgs) -> Result<Resolved, CliError> {
    let generator = a.generator.ok_or_else(|| CliError::Config("generator: required".into()))?;
    let (mut n, mut dt, mut delta, mut h) = (None, None, None, None);
    match generator {
        GeneratorName::Walk | GeneratorName::ExcursionFlip => n = Some(nonzero("n", a.n.unwrap_or(200) as usize)? as u32),
        GeneratorName::Euler => dt = Some(positive("dt", a.dt.unwrap_or(1e-3))?),
        GeneratorName::FollowLeader => delta = Some(positive("delta", a.delta.unwrap_or(1e-3))?),
        GeneratorName::SchemeC | GeneratorName::SchemeE => h = Some(positive("h", a.h.unwrap_or(0.1))?),
        GeneratorName::Exact => {
            return Err(CliError::Config(
                "generator: exact samples marginals only; pick a path generator".into(),
            ))
        }
    }
    Ok(Resolved {
        command: "simulate",
        generator,
        alpha: a.alpha.unwrap_or(0.5),
        n,
        dt,
        delta,
        h,
        t: positive("t", a.t.unwrap_or(1.0))?,
        x0: a.x0.unwrap_or(0.0),
        paths: nonzero("paths", a.paths.unwrap_or(1))?,
        seed: resolve_seed(a.seed)?,
        workers: nonzero("workers", a.workers.unwrap_or_else(default_workers))?,
        output: a.output.as_ref().map(|p| p.display().to_string()),
        summary: a.summary.as_ref().map(|p| p.display().to_string()),
    })
}

enum Generated {
    Sampled(SampledPath),
    Skeleton(SkeletonPath),
}

impl Generated {
    fn terminal(&self) -> f64 {
        match self {
            Self::Sampled(p) => p.terminal(),
            Self::Skeleton(s) => s.last_value(),
        }
    }
}

/// Paths `range` of the run; path `i` always uses child stream `i`.
fn generate(r: &Resolved, alpha: SkewParameter, range: Range<usize>) -> Result<Vec<Generated>, CliError> {
    let base = RngStream::new(r.seed, 0);
    let map = |f: &(dyn Fn(RngStream) -> skewsim::Result<Generated> + Sync)| -> Vec<skewsim::Result<Generated>> {
        range.clone().into_par_iter().map(|i| f(base.substream(i as u64))).collect()
    };
    let (t, x0) = (r.t, r.x0);
    let out: Vec<skewsim::Result<Generated>> = match r.generator {
        GeneratorName::Walk => {
            let spec = WalkSpec::new(r.n.unwrap_or(200), t, alpha, x0)?;
            spec.validate()?;
            map(&|s| gen_random_walk(&spec, s).map(Generated::Sampled))
        }
        GeneratorName::ExcursionFlip => {
            let n = r.n.unwrap_or(200);
            if x0 != 0.0 {
                return Err(CliError::Config("x0: excursion_flip starts at 0".into()));
            }
            map(&|s| gen_excursion_flip(n, t, alpha, s).map(Generated::Sampled))
        }
        GeneratorName::Euler => {
            let model = EulerModel::Sde(SkewSDE::skew_brownian(alpha)?);
            let dt = r.dt.unwrap_or(1e-3);
            map(&|s| gen_euler(&model, dt, t, x0, s).map(Generated::Sampled))
        }
        GeneratorName::FollowLeader => {
            if x0 != 0.0 {
                return Err(CliError::Config("x0: follow_leader starts at 0".into()));
            }
            let delta = r.delta.unwrap_or(1e-3);
            map(&|s| gen_follow_leader(delta, t, alpha, s).map(Generated::Sampled))
        }
        GeneratorName::SchemeC => {
            let h = r.h.unwrap_or(0.1);
            let red = BrownianReduction::skew_brownian(alpha)?;
            let grid = ExitGrid::symmetric(x0.abs() + 1.0, h, &[(0.0, alpha.beta())])?;
            map(&|s| gen_scheme_c(&red, &grid, t, x0, s).map(Generated::Skeleton))
        }
        GeneratorName::SchemeE => {
            let h = r.h.unwrap_or(0.1);
            let coeffs = validate_piecewise(DiffusionCoefficients::skew_brownian(alpha))?;
            // wide enough that absorption at the ends before t is negligible
            let grid = ExitGrid::symmetric(x0.abs() + 8.0 * t.sqrt() + h, h, &[])?.points().to_vec();
            map(&|s| gen_scheme_e(&coeffs, &grid, t, x0, s).map(Generated::Skeleton))
        }
        GeneratorName::Exact => unreachable!("rejected by resolve"),
    };
    Ok(out.into_iter().collect::<skewsim::Result<Vec<_>>>()?)
}

const CHUNK: usize = 256;

fn write_rows(w: &mut dyn Write, first_id: usize, paths: &[Generated]) -> std::io::Result<()> {
    for (k, p) in paths.iter().enumerate() {
        let id = first_id + k;
        match p {
            Generated::Sampled(s) => {
                for (i, x) in s.values().iter().enumerate() {
                    writeln!(w, "{id},{},{}", num(s.time(i)), num(*x))?;
                }
            }
            Generated::Skeleton(s) => {
                for (i, &(t, x)) in s.events.iter().enumerate() {
                    let ev = if i == 0 { "start" } else { "exit" };
                    writeln!(w, "{id},{},{},{ev}", num(t), num(x))?;
                }
                if let Some((t, x)) = s.terminal {
                    writeln!(w, "{id},{},{},horizon", num(t), num(x))?;
                }
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Summary {
    paths: usize,
    terminal_mean: f64,
    terminal_se: f64,
    sign_frequency: f64,
}

pub fn run(r: &Resolved) -> Result<(), CliError> {
    let alpha = SkewParameter::from_alpha(r.alpha)?;
    let mut w = sink(r.output.as_deref().map(std::path::Path::new))?;
    let skeleton = matches!(r.generator, GeneratorName::SchemeC | GeneratorName::SchemeE);
    writeln!(w, "{}", if skeleton { "path_id,t,x,event" } else { "path_id,t,x" })?;
    let mut term = Vec::with_capacity(r.paths);
    let mut start = 0;
    while start < r.paths {
        let end = (start + CHUNK).min(r.paths);
        let paths = generate(r, alpha, start..end)?;
        write_rows(&mut *w, start, &paths)?;
        term.extend(paths.iter().map(Generated::terminal));
        start = end;
    }
    w.flush()?;
    if let Some(p) = r.summary.as_deref() {
        let (m, se) = mean_and_se(&term);
        let s = Summary {
            paths: term.len(),
            terminal_mean: m,
            terminal_se: se,
            sign_frequency: sign_frequency(&term)?,
        };
        write_json(Some(std::path::Path::new(p)), r, "summary", &s)?;
    }
    Ok(())
}
