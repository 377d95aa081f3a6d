//! Finite-volume solver for `u_t = (rho/2)(a u')' + b u'` with interfaces at the
//! coefficient jumps. Each face carries one flux `a (u_{i+1} - u_i) / h`, so the
//! transmission condition at an interface is part of the assembly.

mod compare;

use std::fmt;
use std::sync::Arc;

pub use compare::{pde_vs_density, PdeComparison};

use crate::coeffs::{validate_piecewise, DiffusionCoefficients, PiecewiseDiffusion};
use crate::error::{Error, Result};
use crate::numerics::solve_tridiagonal;
use crate::skew::SkewParameter;

pub type InitialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Standard normal quantile for a two-sided tail of `1e-8`.
const TAIL_Z: f64 = 5.730_728_868_2;

#[derive(Clone)]
pub struct TransmissionProblem {
    coeffs: PiecewiseDiffusion,
    initial: InitialFn,
    horizon: f64,
    domain: (f64, f64),
}

impl fmt::Debug for TransmissionProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransmissionProblem")
            .field("coeffs", &self.coeffs)
            .field("horizon", &self.horizon)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl TransmissionProblem {
    pub fn new(coeffs: PiecewiseDiffusion, initial: InitialFn, horizon: f64, domain: (f64, f64)) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::NonPositiveTime(horizon));
        }
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::DegenerateInterval { a: lo, b: hi });
        }
        Ok(Self {
            coeffs,
            initial,
            horizon,
            domain,
        })
    }

    /// Skew Brownian motion as the divergence-form medium `a = alpha` on the right,
    /// `1 - alpha` on the left, `rho = 1 / a`, on `[-radius, radius]`.
    pub fn skew(alpha: SkewParameter, initial: InitialFn, horizon: f64, radius: f64) -> Result<Self> {
        let c = validate_piecewise(DiffusionCoefficients::skew_brownian(alpha))?;
        Self::new(c, initial, horizon, (-radius, radius))
    }

    /// Half-width beyond `extent` at which a Gaussian with variance `horizon * var_rate`
    /// has two-sided tail mass below `1e-8`.
    pub fn far_field_radius(horizon: f64, extent: f64, var_rate: f64) -> f64 {
        extent.abs() + TAIL_Z * (horizon * var_rate).sqrt()
    }

    pub fn coeffs(&self) -> &PiecewiseDiffusion {
        &self.coeffs
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn initial(&self, x: f64) -> f64 {
        (self.initial)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeScheme {
    ImplicitEuler,
    /// `theta = 1/2` is Crank-Nicolson.
    Theta(f64),
}

impl TimeScheme {
    fn theta(self) -> f64 {
        match self {
            Self::ImplicitEuler => 1.0,
            Self::Theta(t) => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub scheme: TimeScheme,
    /// Keep every `keep_every`-th time level (the last level is always kept).
    pub keep_every: usize,
    /// Number of leading steps replaced by two implicit Euler half steps each,
    /// which damps the start-up oscillation of Crank-Nicolson on data that does
    /// not satisfy the interface condition.
    pub startup_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            scheme: TimeScheme::ImplicitEuler,
            keep_every: 1,
            startup_steps: 0,
        }
    }
}

/// Spatial operator on a fixed node set.
#[derive(Debug, Clone)]
pub struct Assembly {
    nodes: Vec<f64>,
    /// control-volume masses `int 1/rho`
    mass: Vec<f64>,
    /// `a` on each segment
    seg_a: Vec<f64>,
    /// `b / rho` on each segment
    seg_drift: Vec<f64>,
}

impl Assembly {
    pub fn new(coeffs: &PiecewiseDiffusion, nodes: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        if n < 3 {
            return Err(Error::GridOrder(n));
        }
        for i in 1..n {
            if !(nodes[i] > nodes[i - 1]) || !nodes[i].is_finite() {
                return Err(Error::GridOrder(i));
            }
        }
        let (lo, hi) = (nodes[0], nodes[n - 1]);
        let tol = 1e-9 * (hi - lo);
        for &bp in coeffs.breakpoints() {
            if bp > lo && bp < hi {
                let j = nodes.partition_point(|&x| x < bp - tol);
                if j >= n || (nodes[j] - bp).abs() > tol {
                    return Err(Error::InterfaceOffGrid(bp));
                }
            }
        }
        let mut seg_a = Vec::with_capacity(n - 1);
        let mut seg_drift = Vec::with_capacity(n - 1);
        let mut seg_w = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let mid = 0.5 * (nodes[i] + nodes[i + 1]);
            let (a, r, b) = (coeffs.a(mid), coeffs.rho(mid), coeffs.b(mid));
            seg_a.push(a);
            seg_drift.push(b / r);
            seg_w.push((nodes[i + 1] - nodes[i]) / r);
        }
        let mut mass = vec![0.0; n];
        for i in 0..n {
            let l = if i > 0 { seg_w[i - 1] } else { 0.0 };
            let r = if i + 1 < n { seg_w[i] } else { 0.0 };
            mass[i] = 0.5 * (l + r);
        }
        Ok(Self {
            nodes,
            mass,
            seg_a,
            seg_drift,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Flux `a u'` on segment `i`.
    pub fn flux(&self, u: &[f64], i: usize) -> f64 {
        self.seg_a[i] * (u[i + 1] - u[i]) / (self.nodes[i + 1] - self.nodes[i])
    }

    /// `(K u)_i`: the integrated operator on the control volume of interior node `i`.
    pub fn apply(&self, u: &[f64], i: usize) -> f64 {
        let (fl, fr) = (self.flux(u, i - 1), self.flux(u, i));
        0.5 * (fr - fl) + 0.5 * (self.seg_drift[i - 1] * (u[i] - u[i - 1]) + self.seg_drift[i] * (u[i + 1] - u[i]))
    }

    // row i of K as (lower, diag, upper)
    fn row(&self, i: usize) -> (f64, f64, f64) {
        let hl = self.nodes[i] - self.nodes[i - 1];
        let hr = self.nodes[i + 1] - self.nodes[i];
        let l = 0.5 * self.seg_a[i - 1] / hl - 0.5 * self.seg_drift[i - 1];
        let r = 0.5 * self.seg_a[i] / hr + 0.5 * self.seg_drift[i];
        (l, -(l + r), r)
    }

    /// Residual of the discrete balance at node `i` between two levels of the
    /// theta scheme. It vanishes up to rounding for the solver's own output.
    pub fn balance_residual(&self, u_old: &[f64], u_new: &[f64], i: usize, dt: f64, theta: f64) -> f64 {
        self.mass[i] * (u_new[i] - u_old[i]) / dt - theta * self.apply(u_new, i) - (1.0 - theta) * self.apply(u_old, i)
    }

    /// One theta step with Dirichlet values kept at both ends.
    pub fn step(&self, u: &[f64], dt: f64, theta: f64) -> Result<Vec<f64>> {
        let n = self.nodes.len();
        let (mut lo, mut di, mut up, mut rhs) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        di[0] = 1.0;
        rhs[0] = u[0];
        di[n - 1] = 1.0;
        rhs[n - 1] = u[n - 1];
        for i in 1..n - 1 {
            let (l, d, r) = self.row(i);
            lo[i] = -theta * dt * l;
            di[i] = self.mass[i] - theta * dt * d;
            up[i] = -theta * dt * r;
            rhs[i] = self.mass[i] * u[i] + (1.0 - theta) * dt * (l * u[i - 1] + d * u[i] + r * u[i + 1]);
            if di[i] <= 0.0 {
                return Err(Error::IllConditioned(i));
            }
        }
        solve_tridiagonal(&lo, &di, &up, &rhs)
    }
}

/// Space-time solution; `levels[k]` holds `u(times[k], nodes)`.
#[derive(Debug, Clone)]
pub struct Field {
    pub nodes: Vec<f64>,
    pub times: Vec<f64>,
    pub levels: Vec<Vec<f64>>,
}

impl Field {
    pub fn last(&self) -> &[f64] {
        self.levels.last().expect("at least one level")
    }

    /// Linear interpolation in space at level `k`.
    pub fn interpolate(&self, k: usize, x: f64) -> f64 {
        let u = &self.levels[k];
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return u[0];
        }
        if x >= self.nodes[n - 1] {
            return u[n - 1];
        }
        let j = self.nodes.partition_point(|&y| y <= x).min(n - 1);
        let (x0, x1) = (self.nodes[j - 1], self.nodes[j]);
        let w = (x - x0) / (x1 - x0);
        (1.0 - w) * u[j - 1] + w * u[j]
    }

    pub fn final_value(&self, x: f64) -> f64 {
        self.interpolate(self.levels.len() - 1, x)
    }
}

pub fn uniform_nodes(lo: f64, hi: f64, nx: usize) -> Vec<f64> {
    let h = (hi - lo) / (nx - 1) as f64;
    (0..nx).map(|i| if i + 1 == nx { hi } else { lo + i as f64 * h }).collect()
}

/// Implicit Euler on `nx` uniform nodes and `nt` uniform time steps.
pub fn solve_transmission(problem: &TransmissionProblem, nx: usize, nt: usize) -> Result<Field> {
    if nx < 2 || nt < 2 {
        return Err(Error::Invalid("nx and nt must be at least 2".into()));
    }
    let (lo, hi) = problem.domain;
    solve_on_nodes(problem, uniform_nodes(lo, hi, nx), nt, &SolveOptions::default())
}

pub fn solve_on_nodes(problem: &TransmissionProblem, nodes: Vec<f64>, nt: usize, opts: &SolveOptions) -> Result<Field> {
    if nt == 0 {
        return Err(Error::Invalid("nt must be positive".into()));
    }
    let theta = opts.scheme.theta();
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::OutOfRange { name: "theta", value: theta });
    }
    let asm = Assembly::new(&problem.coeffs, nodes)?;
    let dt = problem.horizon / nt as f64;
    let mut u: Vec<f64> = asm.nodes.iter().map(|&x| problem.initial(x)).collect();
    let keep = opts.keep_every.max(1);
    let mut field = Field {
        nodes: asm.nodes.clone(),
        times: vec![0.0],
        levels: vec![u.clone()],
    };
    for k in 1..=nt {
        if k <= opts.startup_steps {
            u = asm.step(&u, 0.5 * dt, 1.0)?;
            u = asm.step(&u, 0.5 * dt, 1.0)?;
        } else {
            u = asm.step(&u, dt, theta)?;
        }
        if k % keep == 0 || k == nt {
            field.times.push(k as f64 * dt);
            field.levels.push(u.clone());
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(c: f64, s: f64) -> InitialFn {
        Arc::new(move |x: f64| (-(x - c) * (x - c) / (2.0 * s * s)).exp())
    }

    fn skew(a: f64) -> SkewParameter {
        SkewParameter::from_alpha(a).unwrap()
    }

    #[test]
    fn constants_preserved() {
        let p = TransmissionProblem::skew(skew(0.7), Arc::new(|_| 1.0), 1.0, 6.0).unwrap();
        let f = solve_transmission(&p, 121, 50).unwrap();
        for lvl in &f.levels {
            assert!(lvl.iter().all(|v| (v - 1.0).abs() < 1e-13));
        }
    }

    #[test]
    fn positive_half_line_tends_to_alpha() {
        let alpha = 0.7;
        let p = TransmissionProblem::skew(skew(alpha), Arc::new(|x| if x >= 0.0 { 1.0 } else { 0.0 }), 1.0, 12.0).unwrap();
        let f = solve_transmission(&p, 2401, 400).unwrap();
        assert!((f.final_value(0.0) - alpha).abs() < 2e-3, "{}", f.final_value(0.0));
    }

    #[test]
    fn interface_off_grid_rejected() {
        let p = TransmissionProblem::skew(skew(0.7), Arc::new(|_| 1.0), 1.0, 6.0).unwrap();
        assert!(matches!(solve_transmission(&p, 120, 10), Err(Error::InterfaceOffGrid(_))));
    }

    #[test]
    fn maximum_principle() {
        let init: InitialFn = Arc::new(|x: f64| (3.0 * x).sin() * (-x * x).exp());
        let p = TransmissionProblem::skew(skew(0.8), init.clone(), 0.5, 6.0).unwrap();
        let f = solve_on_nodes(&p, uniform_nodes(-6.0, 6.0, 241), 40, &SolveOptions::default()).unwrap();
        let (mn, mx) = f.levels[0].iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        for lvl in &f.levels {
            assert!(lvl.iter().all(|&v| v >= mn - 1e-14 && v <= mx + 1e-14));
        }
    }

    #[test]
    fn weighted_mass_conserved() {
        let p = TransmissionProblem::skew(skew(0.7), gaussian(0.3, 0.4), 1.0, 10.0).unwrap();
        let asm = Assembly::new(p.coeffs(), uniform_nodes(-10.0, 10.0, 401)).unwrap();
        let f = solve_on_nodes(&p, asm.nodes().to_vec(), 100, &SolveOptions::default()).unwrap();
        let m = |u: &[f64]| u.iter().zip(asm.mass()).map(|(a, b)| a * b).sum::<f64>();
        let m0 = m(&f.levels[0]);
        for lvl in &f.levels {
            assert!((m(lvl) - m0).abs() < 1e-10);
        }
    }

    #[test]
    fn flux_balance_at_interface_exact() {
        let p = TransmissionProblem::skew(skew(0.2), gaussian(-0.2, 0.5), 0.5, 6.0).unwrap();
        let nodes = uniform_nodes(-6.0, 6.0, 241);
        let asm = Assembly::new(p.coeffs(), nodes.clone()).unwrap();
        let i0 = nodes.iter().position(|&x| x.abs() < 1e-12).unwrap();
        for &theta in &[1.0, 0.5] {
            let opts = SolveOptions {
                scheme: TimeScheme::Theta(theta),
                keep_every: 1,
                startup_steps: 0,
            };
            let f = solve_on_nodes(&p, nodes.clone(), 20, &opts).unwrap();
            let dt = 0.5 / 20.0;
            for k in 1..f.levels.len() {
                let r = asm.balance_residual(&f.levels[k - 1], &f.levels[k], i0, dt, theta);
                assert!(r.abs() < 1e-12, "theta={theta} k={k} r={r}");
            }
        }
    }

    #[test]
    fn brownian_matches_heat_kernel() {
        let c = validate_piecewise(DiffusionCoefficients::brownian()).unwrap();
        let p = TransmissionProblem::new(c, gaussian(0.0, 1.0), 1.0, (-10.0, 10.0)).unwrap();
        let opts = SolveOptions {
            scheme: TimeScheme::Theta(0.5),
            keep_every: 1000,
            startup_steps: 2,
        };
        let f = solve_on_nodes(&p, uniform_nodes(-10.0, 10.0, 801), 200, &opts).unwrap();
        // u(1, x) = exp(-x^2/4) / sqrt(2)
        for x in [-1.0, 0.0, 0.5, 2.0] {
            let exact = (-x * x / 4.0f64).exp() / 2f64.sqrt();
            assert!((f.final_value(x) - exact).abs() < 1e-4);
        }
    }

    #[test]
    fn drift_moves_mass() {
        let c = validate_piecewise(DiffusionCoefficients::piecewise_constant(vec![], &[1.0], &[1.0], &[0.5])).unwrap();
        let p = TransmissionProblem::new(c, Arc::new(|x: f64| x), 1.0, (-10.0, 10.0)).unwrap();
        let f = solve_transmission(&p, 201, 20).unwrap();
        // E[x + B_1 + 0.5] = x + 0.5
        assert!((f.final_value(0.0) - 0.5).abs() < 1e-10);
    }
}
