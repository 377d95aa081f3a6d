use std::io::Write;
use std::sync::Arc;

use serde::Serialize;
use skewsim::pde::{solve_on_nodes, uniform_nodes, InitialFn, SolveOptions, TimeScheme, TransmissionProblem};
use skewsim::SkewParameter;

use crate::config::{nonzero, positive, InitialName, PdeArgs, SchemeName};
use crate::error::CliError;
use crate::output::{num, sink};

#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub command: &'static str,
    pub alpha: f64,
    pub t: f64,
    pub nx: usize,
    pub nt: usize,
    pub radius: f64,
    pub initial: InitialName,
    pub center: f64,
    pub variance: f64,
    pub scheme: SchemeName,
    pub keep_every: usize,
    pub output: Option<String>,
}

pub fn resolve(a: &PdeArgs) -> Result<Resolved, CliError> {
    let t = positive("t", a.t.unwrap_or(1.0))?;
    let center = a.center.unwrap_or(0.0);
    let radius = match a.radius {
        Some(r) => positive("radius", r)?,
        None => TransmissionProblem::far_field_radius(t, center, 1.0).max(center.abs() + 1.0),
    };
    let nx = a.nx.unwrap_or(401);
    let nt = a.nt.unwrap_or(200);
    if nx < 2 || nt < 2 {
        return Err(CliError::Config(format!("nx, nt: need at least 2 (got {nx}, {nt})")));
    }
    Ok(Resolved {
        command: "pde",
        alpha: a.alpha.unwrap_or(0.5),
        t,
        nx,
        nt,
        radius,
        initial: a.initial.unwrap_or(InitialName::Gaussian),
        center,
        variance: positive("variance", a.variance.unwrap_or(0.25))?,
        scheme: a.scheme.unwrap_or(SchemeName::Implicit),
        keep_every: nonzero("keep-every", a.keep_every.unwrap_or(1))?,
        output: a.output.as_ref().map(|p| p.display().to_string()),
    })
}

/// Writes `t,x,u` rows for the kept time levels. With an odd `nx` the node set
/// is symmetric, so the interface at 0 is on the grid.
pub fn run(r: &Resolved) -> Result<(), CliError> {
    let alpha = SkewParameter::from_alpha(r.alpha)?;
    let (c, v) = (r.center, r.variance);
    let initial: InitialFn = match r.initial {
        InitialName::Gaussian => Arc::new(move |x: f64| (-(x - c) * (x - c) / (2.0 * v)).exp()),
        InitialName::Step => Arc::new(move |x: f64| if x >= c { 1.0 } else { 0.0 }),
    };
    let problem = TransmissionProblem::skew(alpha, initial, r.t, r.radius)?;
    let opts = SolveOptions {
        scheme: match r.scheme {
            SchemeName::Implicit => TimeScheme::ImplicitEuler,
            SchemeName::CrankNicolson => TimeScheme::Theta(0.5),
        },
        keep_every: r.keep_every,
        startup_steps: if r.scheme == SchemeName::CrankNicolson { 2 } else { 0 },
    };
    let field = solve_on_nodes(&problem, uniform_nodes(-r.radius, r.radius, r.nx), r.nt, &opts)?;
    let mut w = sink(r.output.as_deref().map(std::path::Path::new))?;
    writeln!(w, "t,x,u")?;
    for (t, level) in field.times.iter().zip(&field.levels) {
        for (x, u) in field.nodes.iter().zip(level) {
            writeln!(w, "{},{},{}", num(*t), num(*x), num(*u))?;
        }
    }
    w.flush()?;
    Ok(())
}
