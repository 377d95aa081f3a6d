//! Local-time removal and Brownian reduction.
//!
//! `f_nu(x) = exp(-2 nu_c((-inf, x])) prod_{y <= x} (1 - nu{y})/(1 + nu{y})` and
//! `F_nu(x) = int_0^x f_nu` turn `dX = sigma dB + drift dt + int nu(dy) dL^y` into an
//! SDE without local time for `Y = F_nu(X)`.

use std::sync::Arc;

use crate::coeffs::{probe_points, Piece, PiecewiseDiffusion, PiecewiseFunction};
use crate::error::{Error, Result};
use crate::measure::SignedAtomicMeasure;
use crate::numerics::{brent, integrate};
use crate::scale_speed::{ScaleSource, ScaleSpeedModel};
use crate::skew::SkewParameter;

/// `dX = sigma(X) dB + drift(X) dt + sum_i nu_i dL^{x_i}(X)` with symmetric local times.
#[derive(Debug, Clone)]
pub struct SkewSDE {
    sigma: PiecewiseFunction,
    drift: PiecewiseFunction,
    nu: SignedAtomicMeasure,
}

impl SkewSDE {
    pub fn new(sigma: PiecewiseFunction, drift: PiecewiseFunction, nu: SignedAtomicMeasure) -> Result<Self> {
        let bp = sigma.breakpoints();
        for i in 0..sigma.pieces().len() {
            let lo = if i == 0 { f64::NEG_INFINITY } else { bp[i - 1] };
            let hi = if i == bp.len() { f64::INFINITY } else { bp[i] };
            let piece = &sigma.pieces()[i];
            let probes = match piece.as_constant() {
                Some(_) => vec![if lo.is_finite() { lo } else { hi.min(0.0) }],
                None => probe_points(lo, hi),
            };
            for x in probes {
                let v = piece.eval(x);
                if !v.is_finite() {
                    return Err(Error::NonFinite { coefficient: "sigma", at: x });
                }
                if v <= 0.0 {
                    return Err(Error::Ellipticity {
                        coefficient: "sigma",
                        at: x,
                        value: v,
                    });
                }
            }
        }
        Ok(Self { sigma, drift, nu })
    }

    /// `dX = dB + beta dL^0`.
    pub fn skew_brownian(skew: SkewParameter) -> Result<Self> {
        if skew.is_reflecting() {
            return Err(Error::AtomWeight {
                at: 0.0,
                weight: skew.beta(),
            });
        }
        Self::new(
            PiecewiseFunction::constant(1.0),
            PiecewiseFunction::constant(0.0),
            SignedAtomicMeasure::point(0.0, skew.beta())?,
        )
    }

    pub fn sigma(&self) -> &PiecewiseFunction {
        &self.sigma
    }

    pub fn drift(&self) -> &PiecewiseFunction {
        &self.drift
    }

    pub fn nu(&self) -> &SignedAtomicMeasure {
        &self.nu
    }
}

#[derive(Debug, Clone, Copy)]
struct LgSegment {
    lo: f64,
    hi: f64,
    anchor: f64,
    f_anchor: f64,
    big_f_anchor: f64,
    constant: bool,
}

/// `f_nu` and `F_nu` for a measure in the admissible class.
#[derive(Debug, Clone)]
pub struct LeGallFunction {
    nu: SignedAtomicMeasure,
    knots: Vec<f64>,
    segments: Vec<LgSegment>,
}

pub fn legall_function(nu: &SignedAtomicMeasure) -> Result<LeGallFunction> {
    LeGallFunction::new(nu.clone())
}

impl LeGallFunction {
    pub fn new(nu: SignedAtomicMeasure) -> Result<Self> {
        let mut knots: Vec<f64> = nu.atoms().iter().map(|a| a.0).collect();
        if let Some(c) = nu.continuous() {
            knots.push(c.support.0);
            knots.push(c.support.1);
        }
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let m = knots.len() + 1;
        let span = |i: usize| {
            (
                if i == 0 { f64::NEG_INFINITY } else { knots[i - 1] },
                if i + 1 == m { f64::INFINITY } else { knots[i] },
            )
        };
        let home = knots.partition_point(|&k| k <= 0.0);
        let mut segments: Vec<LgSegment> = (0..m)
            .map(|i| {
                let (lo, hi) = span(i);
                let anchor = if i == home {
                    0.0
                } else if i > home {
                    lo
                } else {
                    hi
                };
                let constant = match nu.continuous() {
                    None => true,
                    Some(c) => hi <= c.support.0 || lo >= c.support.1,
                };
                LgSegment {
                    lo,
                    hi,
                    anchor,
                    f_anchor: 0.0,
                    big_f_anchor: 0.0,
                    constant,
                }
            })
            .collect();
        // f at the anchor of every segment from its definition
        for seg in segments.iter_mut() {
            let x = seg.anchor;
            let mut log_f = -2.0 * nu.continuous_mass_up_to(x)?;
            for &(y, w) in nu.atoms() {
                // anchors at a segment's right end take the left limit
                let counts = if x == seg.hi { y < x } else { y <= x };
                if counts {
                    log_f += ((1.0 - w) / (1.0 + w)).ln();
                }
            }
            seg.f_anchor = log_f.exp();
        }
        let mut lg = Self {
            nu,
            knots,
            segments: vec![],
        };
        for i in home + 1..m {
            let x = segments[i].anchor;
            segments[i].big_f_anchor = lg.big_f_in(&segments[i - 1], x)?;
        }
        for i in (0..home).rev() {
            let x = segments[i].anchor;
            segments[i].big_f_anchor = lg.big_f_in(&segments[i + 1], x)?;
        }
        lg.segments = segments;
        Ok(lg)
    }

    pub fn measure(&self) -> &SignedAtomicMeasure {
        &self.nu
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn continuous_between(&self, a: f64, b: f64) -> Result<f64> {
        match self.nu.continuous() {
            None => Ok(0.0),
            Some(c) => {
                let d = c.density.clone();
                integrate(move |y| d(y), a, b, 1e-14)
            }
        }
    }

    fn f_in(&self, seg: &LgSegment, x: f64) -> f64 {
        if seg.constant {
            seg.f_anchor
        } else {
            seg.f_anchor * (-2.0 * self.continuous_between(seg.anchor, x).unwrap_or(f64::NAN)).exp()
        }
    }

    fn big_f_in(&self, seg: &LgSegment, x: f64) -> Result<f64> {
        if seg.constant {
            Ok(seg.big_f_anchor + seg.f_anchor * (x - seg.anchor))
        } else {
            Ok(seg.big_f_anchor + integrate(|y| self.f_in(seg, y), seg.anchor, x, 1e-14)?)
        }
    }

    #[inline]
    fn segment_index(&self, x: f64) -> usize {
        crate::coeffs::piece_index(&self.knots, x)
    }

    /// Right-continuous `f_nu(x)`.
    pub fn f(&self, x: f64) -> f64 {
        let seg = &self.segments[self.segment_index(x)];
        self.f_in(seg, x)
    }

    /// Left limit `f_nu(x-)`.
    pub fn f_left(&self, x: f64) -> f64 {
        let i = self.segment_index(x);
        if i > 0 && self.knots[i - 1] == x {
            self.f_in(&self.segments[i - 1], x)
        } else {
            self.f_in(&self.segments[i], x)
        }
    }

    pub fn big_f(&self, x: f64) -> f64 {
        let seg = &self.segments[self.segment_index(x)];
        self.big_f_in(seg, x).unwrap_or(f64::NAN)
    }

    pub fn big_f_inverse(&self, y: f64) -> Result<f64> {
        // F is increasing, so segment images are ordered
        let mut idx = self.segments.len() - 1;
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.hi.is_finite() && y < self.big_f_in(seg, seg.hi)? {
                idx = i;
                break;
            }
        }
        let seg = self.segments[idx];
        if seg.constant {
            return Ok(seg.anchor + (y - seg.big_f_anchor) / seg.f_anchor);
        }
        brent(|x| self.big_f_in(&seg, x).unwrap_or(f64::NAN) - y, seg.lo, seg.hi, 1e-12)
    }

    /// Fast evaluator for measures with atoms only (used in stepping loops).
    pub fn atomic_map(&self) -> Option<AtomicLeGall> {
        if self.nu.continuous().is_some() {
            return None;
        }
        let x_knots = self.knots.clone();
        let y_knots: Vec<f64> = x_knots.iter().map(|&k| self.big_f(k)).collect();
        let slopes: Vec<f64> = self.segments.iter().map(|s| s.f_anchor).collect();
        Some(AtomicLeGall {
            x_knots,
            y_knots,
            slopes,
        })
    }
}

/// Piecewise-linear `F_nu` of a purely atomic measure.
#[derive(Debug, Clone)]
pub struct AtomicLeGall {
    x_knots: Vec<f64>,
    y_knots: Vec<f64>,
    slopes: Vec<f64>,
}

impl AtomicLeGall {
    #[inline]
    fn base(&self, i: usize) -> (f64, f64) {
        // reference point of segment i: its left knot, or the right knot for the first
        if i == 0 {
            match self.x_knots.first() {
                Some(&k) => (k, self.y_knots[0]),
                None => (0.0, 0.0),
            }
        } else {
            (self.x_knots[i - 1], self.y_knots[i - 1])
        }
    }

    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        self.slopes[crate::coeffs::piece_index(&self.x_knots, x)]
    }

    #[inline]
    pub fn forward(&self, x: f64) -> f64 {
        let i = crate::coeffs::piece_index(&self.x_knots, x);
        let (x0, y0) = self.base(i);
        y0 + self.slopes[i] * (x - x0)
    }

    /// Returns `(F^{-1}(y), f(F^{-1}(y)))`.
    #[inline]
    pub fn inverse(&self, y: f64) -> (f64, f64) {
        let i = crate::coeffs::piece_index(&self.y_knots, y);
        let (x0, y0) = self.base(i);
        let s = self.slopes[i];
        (x0 + (y - y0) / s, s)
    }
}

/// Atom weight recovered from a jump of `f`: `-(f(x) - f(x-))/(f(x) + f(x-))`.
pub fn recovered_atom(f_right: f64, f_left: f64) -> f64 {
    -(f_right - f_left) / (f_right + f_left)
}

/// Continuous mass of `(a, b]` recovered from `f`, after removing the jumps at `jumps`
/// (points in `(a, b]` given as `(f(x-), f(x))`).
pub fn recovered_continuous_mass(f_a: f64, f_b: f64, jumps: &[(f64, f64)]) -> f64 {
    let jump_log: f64 = jumps.iter().map(|&(l, r)| (r / l).ln()).sum();
    -0.5 * ((f_b / f_a).ln() - jump_log)
}

/// Coefficients of the SDE whose solution is the diffusion generated by
/// `(rho/2)(a u')' + b u'`: `sigma = sqrt(a rho)`, `drift = a' rho / 2 + b`, and an atom
/// `(a+ - a-)/(a+ + a-)` at every jump of `a`.
pub fn sde_from_divergence(coeffs: &PiecewiseDiffusion) -> Result<SkewSDE> {
    let m = coeffs.num_pieces();
    let mut sigma = Vec::with_capacity(m);
    let mut drift = Vec::with_capacity(m);
    for i in 0..m {
        let (a, r, b) = (
            coeffs.a_piece(i).clone(),
            coeffs.rho_piece(i).clone(),
            coeffs.b_piece(i).clone(),
        );
        if !a.has_derivative() {
            return Err(Error::MissingDerivative("a"));
        }
        sigma.push(match (a.as_constant(), r.as_constant()) {
            (Some(ac), Some(rc)) => Piece::Constant((ac * rc).sqrt()),
            _ => {
                let (a, r) = (a.clone(), r.clone());
                Piece::smooth(move |x| (a.eval(x) * r.eval(x)).sqrt())
            }
        });
        drift.push(match (a.as_constant(), b.as_constant()) {
            (Some(_), Some(bc)) => Piece::Constant(bc),
            _ => Piece::smooth(move |x| 0.5 * a.derivative(x).unwrap_or(f64::NAN) * r.eval(x) + b.eval(x)),
        });
    }
    let bp = coeffs.breakpoints().to_vec();
    let atoms: Vec<(f64, f64)> = (0..bp.len())
        .map(|k| {
            let (am, ap) = coeffs.a_jump(k);
            (bp[k], (ap - am) / (ap + am))
        })
        .collect();
    SkewSDE::new(
        PiecewiseFunction::new(bp.clone(), sigma)?,
        PiecewiseFunction::new(bp, drift)?,
        SignedAtomicMeasure::new(atoms, None)?,
    )
}

/// A point where `Y = G(X)` behaves like a skew Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SkewPoint {
    /// location in `Y` space
    pub y: f64,
    /// location in `X` space
    pub x: f64,
    pub beta: f64,
}

impl SkewPoint {
    pub fn skew(&self) -> SkewParameter {
        SkewParameter::from_alpha(0.5 * (1.0 + self.beta)).unwrap_or(SkewParameter::brownian())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionOptions {
    pub remove_drift: bool,
    /// Width of the cells on which drift-modified coefficients are frozen.
    pub cell_width: f64,
    /// Window `[-R, R]` outside which the drift exponent is frozen.
    pub window: Option<f64>,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self {
            remove_drift: false,
            cell_width: 1e-3,
            window: None,
        }
    }
}

/// `Y = G(X)` with `G(x) = int_0^x dz / sqrt(a rho)`; `Y` is a Brownian motion with
/// skew points.
#[derive(Debug, Clone)]
pub struct BrownianReduction {
    x_knots: Vec<f64>,
    y_knots: Vec<f64>,
    slopes: Vec<f64>,
    skew_points: Vec<SkewPoint>,
    drift_sign: Option<f64>,
    window: Option<f64>,
}

pub fn brownian_reduction(coeffs: &PiecewiseDiffusion, remove_drift: bool) -> Result<BrownianReduction> {
    brownian_reduction_with(
        coeffs,
        &ReductionOptions {
            remove_drift,
            ..Default::default()
        },
    )
}

fn constant_of(p: &Piece, coefficient: &'static str, piece: usize) -> Result<f64> {
    p.as_constant().ok_or(Error::NotPiecewiseConstant { coefficient, piece })
}

pub fn brownian_reduction_with(coeffs: &PiecewiseDiffusion, opts: &ReductionOptions) -> Result<BrownianReduction> {
    if !opts.remove_drift {
        if coeffs.has_drift() {
            return Err(Error::DriftPresent);
        }
        let m = coeffs.num_pieces();
        let mut a = Vec::with_capacity(m);
        let mut r = Vec::with_capacity(m);
        for i in 0..m {
            a.push(constant_of(coeffs.a_piece(i), "a", i)?);
            r.push(constant_of(coeffs.rho_piece(i), "rho", i)?);
        }
        return Ok(BrownianReduction::from_cells(coeffs.breakpoints().to_vec(), &a, &r, None, None));
    }
    if !(opts.cell_width.is_finite() && opts.cell_width > 0.0) {
        return Err(Error::OutOfRange {
            name: "cell_width",
            value: opts.cell_width,
        });
    }
    let model = ScaleSpeedModel::build(ScaleSource::Diffusion(coeffs.clone()))?;
    let m = coeffs.num_pieces();
    // pieces with varying a, rho or b are cut into cells; unbounded ones need the window
    let mut cuts: Vec<f64> = coeffs.breakpoints().to_vec();
    for i in 0..m {
        let (lo, hi) = coeffs.piece_span(i);
        let varying = !coeffs.piece_is_constant(i) || coeffs.b_piece(i).as_constant() != Some(0.0);
        if !varying {
            continue;
        }
        let (l, h) = match opts.window {
            Some(w) => (lo.max(-w), hi.min(w)),
            None => {
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::NonIntegrableDrift("b"));
                }
                (lo, hi)
            }
        };
        if l >= h {
            continue;
        }
        let cells = ((h - l) / opts.cell_width).ceil().max(1.0) as usize;
        for k in 0..=cells {
            cuts.push(l + (h - l) * k as f64 / cells as f64);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let rep = |j: usize| -> f64 {
        // representative point of cell j
        let lo = if j == 0 { f64::NEG_INFINITY } else { cuts[j - 1] };
        let hi = if j == cuts.len() { f64::INFINITY } else { cuts[j] };
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo,
            (false, true) => hi - f64::EPSILON * hi.abs().max(1.0),
            (false, false) => 0.0,
        }
    };
    let probes: Vec<f64> = (0..=cuts.len()).map(rep).collect();
    // decide the sign of the exponent by matching scale derivatives
    let mismatch = |s: f64| -> Result<f64> {
        let mut worst = 0.0f64;
        for &x in &probes {
            let h = model.h(x)?;
            let s_new = 1.0 / (coeffs.a(x) * (s * h).exp());
            let s_orig = model.scale_derivative(x)?;
            worst = worst.max((s_new / s_orig - 1.0).abs());
        }
        Ok(worst)
    };
    let (m_plus, m_minus) = (mismatch(1.0)?, mismatch(-1.0)?);
    let sign = if m_plus <= m_minus { 1.0 } else { -1.0 };
    let best = m_plus.min(m_minus);
    if best > 1e-12 {
        return Err(Error::DriftSign(best));
    }
    let mut a = Vec::with_capacity(probes.len());
    let mut r = Vec::with_capacity(probes.len());
    for &x in &probes {
        let h = model.h(x)?;
        a.push(coeffs.a(x) * (sign * h).exp());
        r.push(coeffs.rho(x) * (-sign * h).exp());
    }
    Ok(BrownianReduction::from_cells(cuts, &a, &r, Some(sign), opts.window))
}

impl BrownianReduction {
    fn from_cells(x_knots: Vec<f64>, a: &[f64], rho: &[f64], drift_sign: Option<f64>, window: Option<f64>) -> Self {
        let slopes: Vec<f64> = a.iter().zip(rho).map(|(a, r)| 1.0 / (a * r).sqrt()).collect();
        let ratios: Vec<f64> = a.iter().zip(rho).map(|(a, r)| (a / r).sqrt()).collect();
        let home = x_knots.partition_point(|&k| k <= 0.0);
        let mut y_knots = vec![0.0; x_knots.len()];
        // G(0) = 0; integrate outwards
        for k in home..x_knots.len() {
            let from = if k == home { 0.0 } else { x_knots[k - 1] };
            let base = if k == home { 0.0 } else { y_knots[k - 1] };
            y_knots[k] = base + slopes[k] * (x_knots[k] - from);
        }
        for k in (0..home).rev() {
            let from = if k + 1 == home { 0.0 } else { x_knots[k + 1] };
            let base = if k + 1 == home { 0.0 } else { y_knots[k + 1] };
            y_knots[k] = base - slopes[k + 1] * (from - x_knots[k]);
        }
        let skew_points = (0..x_knots.len())
            .filter_map(|k| {
                let (rm, rp) = (ratios[k], ratios[k + 1]);
                let beta = (rp - rm) / (rp + rm);
                (beta != 0.0).then_some(SkewPoint {
                    y: y_knots[k],
                    x: x_knots[k],
                    beta,
                })
            })
            .collect();
        Self {
            x_knots,
            y_knots,
            slopes,
            skew_points,
            drift_sign,
            window,
        }
    }

    /// Reduction of a skew Brownian motion: `G` is the identity and `0` is a skew point.
    pub fn skew_brownian(skew: SkewParameter) -> Result<Self> {
        let c = crate::coeffs::validate_piecewise(crate::coeffs::DiffusionCoefficients::skew_brownian(skew))?;
        brownian_reduction(&c, false)
    }

    pub fn skew_points(&self) -> &[SkewPoint] {
        &self.skew_points
    }

    /// `+1` when `(a e^h, rho e^-h)` reproduced the scale function, `-1` for the opposite.
    pub fn drift_sign(&self) -> Option<f64> {
        self.drift_sign
    }

    pub fn localization_window(&self) -> Option<f64> {
        self.window
    }

    #[inline]
    fn base(&self, i: usize) -> (f64, f64) {
        if self.x_knots.is_empty() {
            (0.0, 0.0)
        } else if i == 0 {
            (self.x_knots[0], self.y_knots[0])
        } else {
            (self.x_knots[i - 1], self.y_knots[i - 1])
        }
    }

    pub fn g(&self, x: f64) -> f64 {
        let i = crate::coeffs::piece_index(&self.x_knots, x);
        let (x0, y0) = self.base(i);
        y0 + self.slopes[i] * (x - x0)
    }

    pub fn g_inverse(&self, y: f64) -> f64 {
        let i = crate::coeffs::piece_index(&self.y_knots, y);
        let (x0, y0) = self.base(i);
        x0 + (y - y0) / self.slopes[i]
    }

    /// Largest deviation between each skew point's `beta` and the one implied by the
    /// slope ratio of `S o G^{-1}` across it, `S` taken from `model`.
    pub fn push_forward_mismatch(&self, model: &ScaleSpeedModel) -> Result<f64> {
        let mut worst = 0.0f64;
        for p in &self.skew_points {
            let k = self.x_knots.iter().position(|&x| x == p.x).unwrap_or(0);
            let (gl, gr) = (self.slopes[k], self.slopes[k + 1]);
            let eps = 1e-9 * p.x.abs().max(1.0);
            let sp_right = model.scale_derivative(p.x)?;
            // left derivative: exact on a constant piece, O(eps) on a smooth one
            let sp_left = model.scale_derivative(p.x - eps)?;
            // slopes of S o G^{-1} on either side; the ratio is (1 - alpha)/alpha
            let ratio = (sp_right / gr) / (sp_left / gl);
            let alpha = 1.0 / (1.0 + ratio);
            worst = worst.max(((2.0 * alpha - 1.0) - p.beta).abs());
        }
        Ok(worst)
    }
}

/// Piecewise-linear increasing map with `F(0) = 0`.
#[derive(Debug, Clone)]
pub struct PiecewiseLinearMap {
    knots: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PushForwardRoute {
    /// Ito-Tanaka on `F(X)` with the local-time conversion at kinks.
    ItoTanaka,
    /// Jumps of the derivative of the scale function of `F(X)`.
    ScaleFunction,
}

impl PiecewiseLinearMap {
    pub fn new(knots: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if slopes.len() != knots.len() + 1 {
            return Err(Error::PieceCount {
                coefficient: "slopes",
                expected: knots.len() + 1,
                got: slopes.len(),
            });
        }
        if let Some(i) = (1..knots.len()).find(|&i| knots[i] <= knots[i - 1]) {
            return Err(Error::NonAscendingBreakpoints { index: i });
        }
        if slopes.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::Invalid("slopes must be positive".into()));
        }
        Ok(Self { knots, slopes })
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.slopes[crate::coeffs::piece_index(&self.knots, x)]
    }

    pub fn slope_left(&self, x: f64) -> f64 {
        let i = crate::coeffs::piece_index(&self.knots, x);
        if i > 0 && self.knots[i - 1] == x {
            self.slopes[i - 1]
        } else {
            self.slopes[i]
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        let pts = [&self.knots[..], &[0.0, x]].concat();
        let mut sorted = pts.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let (lo, hi) = if x >= 0.0 { (0.0, x) } else { (x, 0.0) };
        let mut acc = 0.0;
        for w in sorted.windows(2) {
            if w[0] >= lo && w[1] <= hi {
                acc += self.slope(w[0]) * (w[1] - w[0]);
            }
        }
        if x >= 0.0 {
            acc
        } else {
            -acc
        }
    }

    /// Local-time weights of `F(X)` when `X` carries `nu`.
    pub fn push_forward_atoms(&self, nu: &SignedAtomicMeasure, route: PushForwardRoute) -> Result<Vec<(f64, f64)>> {
        if nu.continuous().is_some() {
            return Err(Error::Invalid("push-forward is defined for atomic measures".into()));
        }
        let mut locs: Vec<f64> = nu.atoms().iter().map(|a| a.0).chain(self.knots.iter().copied()).collect();
        locs.sort_by(f64::total_cmp);
        locs.dedup();
        let lg = match route {
            PushForwardRoute::ScaleFunction => Some(LeGallFunction::new(nu.clone())?),
            PushForwardRoute::ItoTanaka => None,
        };
        let mut out = Vec::new();
        for x in locs {
            let (fm, fp) = (self.slope_left(x), self.slope(x));
            let w = match route {
                PushForwardRoute::ItoTanaka => {
                    let v = nu.atom_at(x);
                    ((fp + fm) * v + fp - fm) / (fp * (1.0 + v) + fm * (1.0 - v))
                }
                PushForwardRoute::ScaleFunction => {
                    let lg = lg.as_ref().expect("built above");
                    let gm = lg.f_left(x) / fm;
                    let gp = lg.f(x) / fp;
                    (gm - gp) / (gm + gp)
                }
            };
            if w != 0.0 {
                out.push((self.apply(x), w));
            }
        }
        Ok(out)
    }
}

/// Constant-valued evaluator, convenient for building smooth pieces in tests and configs.
pub fn constant_fn(c: f64) -> crate::coeffs::ScalarFn {
    Arc::new(move |_| c)
}
