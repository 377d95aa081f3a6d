use serde::Serialize;
use skewsim::density::{transition_density, TransitionCdf};
use skewsim::SkewParameter;

use crate::config::{positive, DensityArgs};
use crate::error::CliError;
use crate::output::write_json;

#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub command: &'static str,
    pub alpha: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub output: Option<String>,
}

pub fn resolve(a: &DensityArgs) -> Result<Resolved, CliError> {
    let need = |name: &str, v: Option<f64>| v.ok_or_else(|| CliError::Config(format!("{name}: required")));
    Ok(Resolved {
        command: "density",
        alpha: a.alpha.unwrap_or(0.5),
        t: positive("t", need("t", a.t)?)?,
        x: need("x", a.x)?,
        y: need("y", a.y)?,
        output: a.output.as_ref().map(|p| p.display().to_string()),
    })
}

#[derive(Serialize)]
struct Values {
    density: f64,
    cdf: f64,
}

/// Prints `q(t, x, y)`; with `output`, also writes it with the CDF at `y` as JSON.
pub fn run(r: &Resolved) -> Result<(), CliError> {
    let s = SkewParameter::from_alpha(r.alpha)?;
    let d = transition_density(r.t, r.x, r.y, s)?;
    println!("{d:.12}");
    if let Some(p) = r.output.as_deref() {
        let cdf = TransitionCdf::new(r.t, r.x, s)?.cdf(r.y);
        write_json(Some(std::path::Path::new(p)), r, "values", &Values { density: d, cdf })?;
    }
    Ok(())
}
