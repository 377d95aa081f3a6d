//! Command arguments. Every flag has a config-file key of the same name; flags
//! win over file values. Files are TOML and unknown keys are rejected.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use skewsim::validation::experiments::{ExitKind, GeneratorKind};

use crate::error::CliError;

pub const SEED_ENV: &str = "SKEWSIM_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum GeneratorName {
    Walk,
    ExcursionFlip,
    Euler,
    FollowLeader,
    SchemeC,
    SchemeE,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Suite {
    #[value(alias = "corollary3")]
    #[serde(alias = "corollary3")]
    SignLaw,
    MarginalLaw,
    Density,
    Hitting,
    ExitTime,
    LocalTime,
    Residual,
    Occupation,
    Coupling,
    Coalescence,
    L1,
    Rescaling,
    Pde,
    Transform,
}

impl Suite {
    pub fn is_stochastic(self) -> bool {
        !matches!(self, Suite::Density)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SchemeName {
    Implicit,
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum InitialName {
    Gaussian,
    Step,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub generator: Option<GeneratorName>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Walk resolution: steps of size 1/n every 1/n^2.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Grid step of the exit-time schemes.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON summary destination.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DensityArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub y: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Upper skewness of the coupling suite.
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long, value_enum)]
    pub generator: Option<GeneratorName>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// JSON report destination.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PdeArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_enum)]
    pub initial: Option<InitialName>,
    /// Centre of the Gaussian initial condition, or the jump of the step.
    #[arg(long)]
    pub center: Option<f64>,
    /// Variance of the Gaussian initial condition.
    #[arg(long)]
    pub variance: Option<f64>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeName>,
    #[arg(long)]
    pub keep_every: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RateArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<u32>>,
    #[arg(long)]
    pub reference_n: Option<u32>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Reads `file` strictly as `T`, then lays the flags given on the command line
/// over it.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = file else {
        return Ok(flags_only(flags));
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    let from_file: T = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
    let mut base = serde_json::to_value(&from_file).expect("config serializes");
    let over = serde_json::to_value(flags).expect("flags serialize");
    if let (Some(b), Some(o)) = (base.as_object_mut(), over.as_object()) {
        for (k, v) in o {
            if !v.is_null() {
                b.insert(k.clone(), v.clone());
            }
        }
    }
    serde_json::from_value(base).map_err(|e| CliError::Config(e.to_string()))
}

fn flags_only<T: Serialize + DeserializeOwned>(flags: &T) -> T {
    serde_json::from_value(serde_json::to_value(flags).expect("flags serialize")).expect("round trip")
}

/// Flag or file seed, else `SKEWSIM_SEED`.
pub fn resolve_seed(seed: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}: not an unsigned 64-bit integer: {v:?}"))),
        Err(_) => Err(CliError::Config(format!("seed: required for this command (flag, config key or {SEED_ENV})"))),
    }
}

pub fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name}: must be positive, got {v}")))
    }
}

pub fn nonzero(name: &str, v: usize) -> Result<usize, CliError> {
    if v > 0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name}: must be at least 1")))
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Generator from its name and the resolution keys; absent keys take defaults.
pub fn generator_kind(
    name: GeneratorName,
    n: Option<u32>,
    dt: Option<f64>,
    delta: Option<f64>,
    h: Option<f64>,
) -> Result<GeneratorKind, CliError> {
    Ok(match name {
        GeneratorName::Walk => GeneratorKind::Walk { n: walk_n(n)? },
        GeneratorName::ExcursionFlip => GeneratorKind::ExcursionFlip { n: walk_n(n)? },
        GeneratorName::Euler => GeneratorKind::Euler { dt: positive("dt", dt.unwrap_or(1e-3))? },
        GeneratorName::FollowLeader => GeneratorKind::FollowLeader {
            delta: positive("delta", delta.unwrap_or(1e-3))?,
        },
        GeneratorName::SchemeC => GeneratorKind::SchemeC { h: positive("h", h.unwrap_or(0.1))? },
        GeneratorName::Exact => GeneratorKind::Exact,
        GeneratorName::SchemeE => {
            return Err(CliError::Config(
                "generator: scheme_e has no terminal sampler here; use it with simulate, hitting or exit_time".into(),
            ))
        }
    })
}

pub fn exit_kind(name: GeneratorName, n: Option<u32>, h: Option<f64>) -> Result<ExitKind, CliError> {
    Ok(match name {
        GeneratorName::Walk => ExitKind::Walk { n: walk_n(n)? },
        GeneratorName::SchemeC => ExitKind::SchemeC { h: positive("h", h.unwrap_or(0.1))? },
        GeneratorName::SchemeE => ExitKind::SchemeE { h: positive("h", h.unwrap_or(0.1))? },
        other => {
            return Err(CliError::Config(format!(
                "generator: {other:?} cannot run until exit; use walk, scheme_c or scheme_e"
            )))
        }
    })
}

fn walk_n(n: Option<u32>) -> Result<u32, CliError> {
    match n.unwrap_or(200) {
        0 => Err(CliError::Config("n: must be at least 1".into())),
        v => Ok(v),
    }
}
