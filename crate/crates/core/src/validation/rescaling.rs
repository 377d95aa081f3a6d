//! Sign frequency of `n^{-1} X_{n^2 t}` for `dX = dB + b(X) dt` with integrable `b`.

use std::sync::Arc;

use rand::RngCore;

use super::marginal::sign_frequency;
use super::report::{Target, ToleranceRule, ValidationReport};
use crate::coeffs::{validate_piecewise, DiffusionCoefficients, Piece, PiecewiseFunction};
use crate::error::{Error, Result};
use crate::numerics::integrate_split;
use crate::pde::{solve_on_nodes, SolveOptions, TimeScheme, TransmissionProblem};
use crate::rng::{par_map_paths, std_normal, RngStream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescalingOptions {
    /// Rescaled time at which the sign is read.
    pub horizon: f64,
    /// Euler step inside the support of `b`; outside, `X` is Brownian and the
    /// passage back to the support is sampled exactly.
    pub dt_inside: f64,
    /// Solve the backward equation for the exact finite-`n` frequency and use its
    /// distance to the limit as the bias allowance.
    pub pde_allowance: bool,
    /// Spatial step of that solve near the support.
    pub pde_h: f64,
}

impl Default for RescalingOptions {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            dt_inside: 1e-2,
            pde_allowance: true,
            pde_h: 0.02,
        }
    }
}

/// `e^kappa / (1 + e^kappa)`.
pub fn rescaling_target(kappa: f64) -> f64 {
    1.0 / (1.0 + (-kappa).exp())
}

/// Support `[lo, hi]` of `b` (widened to contain 0) and `kappa = 2 int b`.
fn support_and_kappa(b: &PiecewiseFunction) -> Result<(f64, f64, f64)> {
    let pcs = b.pieces();
    let outer_zero = |p: &Piece| p.as_constant() == Some(0.0);
    if !outer_zero(&pcs[0]) || !outer_zero(&pcs[pcs.len() - 1]) {
        return Err(Error::NonIntegrableDrift("drift must vanish outside a bounded interval"));
    }
    let bp = b.breakpoints();
    if bp.is_empty() {
        return Ok((0.0, 0.0, 0.0));
    }
    let (lo, hi) = (bp[0], bp[bp.len() - 1]);
    let integral = integrate_split(|x| b.eval(x), bp, 1e-12)?;
    if !integral.is_finite() {
        return Err(Error::NonIntegrableDrift("integral of the drift is not finite"));
    }
    Ok((lo.min(0.0), hi.max(0.0), 2.0 * integral))
}

fn terminal_sign<R: RngCore>(b: &PiecewiseFunction, lo: f64, hi: f64, total: f64, dt: f64, rng: &mut R) -> f64 {
    let (mut x, mut t) = (0.0f64, 0.0f64);
    while t < total {
        if x >= lo && x <= hi {
            let h = dt.min(total - t);
            x += b.eval(x) * h + h.sqrt() * std_normal(rng);
            t += h;
        } else {
            // Brownian outside the support: exact first passage back to it
            let (d, edge) = if x > hi { (x - hi, hi) } else { (lo - x, lo) };
            let z = std_normal(rng);
            let tau = (d / z) * (d / z);
            if t + tau >= total {
                break;
            }
            t += tau;
            x = edge;
        }
    }
    x
}

/// Exact `P_0[X_{n^2 horizon} >= 0]` from the backward equation on a graded grid.
fn finite_n_frequency(b: &PiecewiseFunction, total: f64, h: f64) -> Result<f64> {
    let bp = b.breakpoints().to_vec();
    let core = bp.iter().fold(1.0f64, |m, x| m.max(x.abs())) + 2.0;
    let core = (core / h).ceil() * h;
    let radius = TransmissionProblem::far_field_radius(total, core, 1.0);
    let m = (core / h).round() as i64;
    let mut nodes: Vec<f64> = (-m..=m).map(|i| i as f64 * h).collect();
    let mut right = Vec::new();
    let (mut x, mut step) = (core, h);
    while x < radius {
        step *= 1.03;
        x += step;
        right.push(x);
    }
    let left: Vec<f64> = right.iter().rev().map(|v| -v).collect();
    nodes.splice(0..0, left);
    nodes.extend(right);
    let n_pieces = b.pieces().len();
    let coeffs = validate_piecewise(DiffusionCoefficients {
        breakpoints: bp,
        a: vec![Piece::Constant(1.0); n_pieces],
        rho: vec![Piece::Constant(1.0); n_pieces],
        b: b.pieces().to_vec(),
    })?;
    let domain = (nodes[0], nodes[nodes.len() - 1]);
    let step = Arc::new(|x: f64| if x > 0.0 { 1.0 } else if x == 0.0 { 0.5 } else { 0.0 });
    // many small implicit steps while the initial jump is sharp, then Crank-Nicolson
    let early = (total * 1e-3).min(1.0);
    let first = solve_on_nodes(
        &TransmissionProblem::new(coeffs.clone(), step, early, domain)?,
        nodes.clone(),
        200,
        &SolveOptions {
            scheme: TimeScheme::ImplicitEuler,
            keep_every: usize::MAX,
            startup_steps: 0,
        },
    )?;
    let start = Arc::new(move |x: f64| first.final_value(x));
    let f2 = solve_on_nodes(
        &TransmissionProblem::new(coeffs, start, total - early, domain)?,
        nodes,
        4000,
        &SolveOptions {
            scheme: TimeScheme::Theta(0.5),
            keep_every: usize::MAX,
            startup_steps: 0,
        },
    )?;
    Ok(f2.final_value(0.0))
}

/// Sign frequency of the rescaled process at `opts.horizon` against
/// `e^kappa / (1 + e^kappa)`, `kappa = 2 int b`.
pub fn rescaling_limit(
    b: &PiecewiseFunction,
    n: u32,
    sample_size: usize,
    opts: &RescalingOptions,
    rng: RngStream,
) -> Result<ValidationReport> {
    if sample_size == 0 {
        return Err(Error::EmptySample);
    }
    if n == 0 {
        return Err(Error::OutOfRange { name: "n", value: 0.0 });
    }
    let (lo, hi, kappa) = support_and_kappa(b)?;
    let total = n as f64 * n as f64 * opts.horizon;
    let ends = par_map_paths(rng, sample_size, |_, s| terminal_sign(b, lo, hi, total, opts.dt_inside, &mut s.rng()));
    let f = sign_frequency(&ends)?;
    let target = rescaling_target(kappa);
    let se = (target * (1.0 - target) / sample_size as f64).sqrt();
    let finite = if opts.pde_allowance {
        Some(finite_n_frequency(b, total, opts.pde_h)?)
    } else {
        None
    };
    let allowance = finite.map(|p| (p - target).abs()).unwrap_or(0.0);
    let mut r = ValidationReport::new(
        "rescaling_limit",
        Target::Value(target),
        f,
        Some(se),
        None,
        ToleranceRule::WithinSigma { k: 3.0, allowance },
        Some(rng.seed),
        sample_size,
    )
    .with_detail("kappa", kappa)
    .with_detail("n", n as f64)
    .with_detail("dt_inside", opts.dt_inside);
    if let Some(p) = finite {
        r = r.with_detail("finite_n_frequency", p).with_detail("z_vs_finite_n", (f - p) / se);
    }
    Ok(r)
}
