use serde::Serialize;
use skewsim::validation::{convergence_rate, RateOptions, ValidationReport};
use skewsim::{RngStream, SkewParameter};

use crate::config::{default_workers, nonzero, resolve_seed, RateArgs};
use crate::error::CliError;
use crate::output::write_json;

#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub command: &'static str,
    pub alpha: f64,
    pub n_list: Vec<u32>,
    pub reference_n: u32,
    pub replications: usize,
    pub seed: u64,
    pub workers: usize,
    pub output: Option<String>,
}

pub fn resolve(a: &RateArgs) -> Result<Resolved, CliError> {
    Ok(Resolved {
        command: "rate",
        alpha: a.alpha.unwrap_or(0.7),
        n_list: a.n_list.clone().unwrap_or_else(|| vec![10, 20, 40, 80]),
        reference_n: a.reference_n.unwrap_or(1280),
        replications: nonzero("replications", a.replications.unwrap_or(1000))?,
        seed: resolve_seed(a.seed)?,
        workers: nonzero("workers", a.workers.unwrap_or_else(default_workers))?,
        output: a.output.as_ref().map(|p| p.display().to_string()),
    })
}

pub fn report(r: &Resolved) -> Result<ValidationReport, CliError> {
    let opts = RateOptions {
        replications: r.replications,
        ..Default::default()
    };
    let alpha = SkewParameter::from_alpha(r.alpha)?;
    Ok(convergence_rate(alpha, &r.n_list, r.reference_n, &opts, RngStream::new(r.seed, 0))?)
}

/// Prints the report row and writes JSON (stdout when no output is set).
pub fn run(r: &Resolved) -> Result<bool, CliError> {
    let rep = report(r)?;
    if r.output.is_some() {
        println!("{}", rep.summary_line());
    }
    write_json(r.output.as_deref().map(std::path::Path::new), r, "reports", &[&rep])?;
    Ok(rep.pass)
}
