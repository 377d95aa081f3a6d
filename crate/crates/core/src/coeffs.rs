//! Piecewise coefficient descriptions for `L = (rho/2)(a u')' + b u'`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::skew::SkewParameter;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One smooth piece of a coefficient.
#[derive(Clone)]
pub enum Piece {
    Constant(f64),
    Smooth {
        value: ScalarFn,
        derivative: Option<ScalarFn>,
    },
}

impl fmt::Debug for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Piece::Constant(c) => write!(f, "Constant({c})"),
            Piece::Smooth { derivative, .. } => {
                write!(f, "Smooth {{ derivative: {} }}", derivative.is_some())
            }
        }
    }
}

impl Piece {
    pub fn smooth(value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Piece::Smooth {
            value: Arc::new(value),
            derivative: None,
        }
    }

    pub fn smooth_with_derivative(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Piece::Smooth {
            value: Arc::new(value),
            derivative: Some(Arc::new(derivative)),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Piece::Constant(c) => *c,
            Piece::Smooth { value, .. } => value(x),
        }
    }

    pub fn derivative(&self, x: f64) -> Option<f64> {
        match self {
            Piece::Constant(_) => Some(0.0),
            Piece::Smooth { derivative, .. } => derivative.as_ref().map(|d| d(x)),
        }
    }

    pub fn has_derivative(&self) -> bool {
        match self {
            Piece::Constant(_) => true,
            Piece::Smooth { derivative, .. } => derivative.is_some(),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Piece::Constant(c) => Some(*c),
            Piece::Smooth { .. } => None,
        }
    }
}

/// A function given by one piece per interval `(-inf, x_0), [x_0, x_1), ..., [x_{m-1}, inf)`.
#[derive(Debug, Clone)]
pub struct PiecewiseFunction {
    breakpoints: Vec<f64>,
    pieces: Vec<Piece>,
}

impl PiecewiseFunction {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Piece>) -> Result<Self> {
        check_breakpoints(&breakpoints)?;
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::PieceCount {
                coefficient: "function",
                expected: breakpoints.len() + 1,
                got: pieces.len(),
            });
        }
        Ok(Self { breakpoints, pieces })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            breakpoints: vec![],
            pieces: vec![Piece::Constant(c)],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    #[inline]
    pub fn piece_index(&self, x: f64) -> usize {
        piece_index(&self.breakpoints, x)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// Left limit at `x`.
    pub fn eval_left(&self, x: f64) -> f64 {
        let i = self.piece_index(x);
        if i > 0 && self.breakpoints[i - 1] == x {
            self.pieces[i - 1].eval(x)
        } else {
            self.pieces[i].eval(x)
        }
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.pieces.iter().all(|p| p.as_constant().is_some())
    }
}

/// Index of the piece containing `x` (right-continuous convention).
#[inline]
pub fn piece_index(breakpoints: &[f64], x: f64) -> usize {
    match breakpoints.len() {
        0 => 0,
        1 => (x >= breakpoints[0]) as usize,
        _ => breakpoints.partition_point(|&b| b <= x),
    }
}

fn check_breakpoints(bp: &[f64]) -> Result<()> {
    for (i, x) in bp.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite {
                coefficient: "breakpoints",
                at: *x,
            });
        }
        if i > 0 && bp[i - 1] >= *x {
            return Err(Error::NonAscendingBreakpoints { index: i });
        }
    }
    Ok(())
}

/// Unvalidated coefficient description.
#[derive(Debug, Clone)]
pub struct DiffusionCoefficients {
    pub breakpoints: Vec<f64>,
    pub a: Vec<Piece>,
    pub rho: Vec<Piece>,
    pub b: Vec<Piece>,
}

impl DiffusionCoefficients {
    /// Piecewise-constant coefficients.
    pub fn piecewise_constant(breakpoints: Vec<f64>, a: &[f64], rho: &[f64], b: &[f64]) -> Self {
        let pc = |v: &[f64]| v.iter().map(|&c| Piece::Constant(c)).collect();
        Self {
            breakpoints,
            a: pc(a),
            rho: pc(rho),
            b: pc(b),
        }
    }

    pub fn brownian() -> Self {
        Self::piecewise_constant(vec![], &[1.0], &[1.0], &[0.0])
    }

    /// Two-piece medium with a jump at 0, `rho = 1`, no drift.
    pub fn two_piece(a_left: f64, a_right: f64) -> Self {
        Self::piecewise_constant(vec![0.0], &[a_left, a_right], &[1.0, 1.0], &[0.0, 0.0])
    }

    /// Divergence-form coefficients of the skew Brownian motion:
    /// `a = alpha` on `x >= 0`, `1 - alpha` below, and `rho = 1/a`.
    pub fn skew_brownian(skew: SkewParameter) -> Self {
        let (am, ap) = (1.0 - skew.alpha(), skew.alpha());
        Self::piecewise_constant(vec![0.0], &[am, ap], &[1.0 / am, 1.0 / ap], &[0.0, 0.0])
    }
}

/// Coefficients that passed [`validate_piecewise`], with their ellipticity bounds.
#[derive(Debug, Clone)]
pub struct PiecewiseDiffusion {
    breakpoints: Vec<f64>,
    a: Vec<Piece>,
    rho: Vec<Piece>,
    b: Vec<Piece>,
    lambda_lo: f64,
    lambda_hi: f64,
}

/// Points at which smooth pieces are checked: a lattice over bounded pieces and a
/// geometric sweep into unbounded ones.
pub(crate) fn probe_points(lo: f64, hi: f64) -> Vec<f64> {
    const N: usize = 256;
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (0..=N).map(|k| lo + (hi - lo) * k as f64 / N as f64).filter(|&x| x < hi).collect(),
        (true, false) => {
            let mut v = vec![lo];
            v.extend((0..60).map(|k| lo + 1e-3 * 1.4f64.powi(k)));
            v
        }
        (false, true) => (0..60).map(|k| hi - 1e-3 * 1.4f64.powi(k)).collect(),
        (false, false) => {
            let mut v = vec![0.0];
            for k in 0..60 {
                let d = 1e-3 * 1.4f64.powi(k);
                v.push(d);
                v.push(-d);
            }
            v
        }
    }
}

pub fn validate_piecewise(c: DiffusionCoefficients) -> Result<PiecewiseDiffusion> {
    check_breakpoints(&c.breakpoints)?;
    let m = c.breakpoints.len() + 1;
    for (name, v) in [("a", &c.a), ("rho", &c.rho), ("b", &c.b)] {
        if v.len() != m {
            return Err(Error::PieceCount {
                coefficient: name,
                expected: m,
                got: v.len(),
            });
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..m {
        let left = if i == 0 { f64::NEG_INFINITY } else { c.breakpoints[i - 1] };
        let right = if i + 1 == m { f64::INFINITY } else { c.breakpoints[i] };
        let probes = probe_points(left, right);
        for (name, piece) in [("a", &c.a[i]), ("rho", &c.rho[i]), ("b", &c.b[i])] {
            let sample: Vec<(f64, f64)> = match piece.as_constant() {
                Some(v) => vec![(if left.is_finite() { left } else { right.min(0.0) }, v)],
                None => probes.iter().map(|&x| (x, piece.eval(x))).collect(),
            };
            for (x, v) in sample {
                if !v.is_finite() {
                    return Err(Error::NonFinite { coefficient: name, at: x });
                }
                if name == "b" {
                    hi = hi.max(v.abs());
                } else {
                    if v <= 0.0 {
                        return Err(Error::Ellipticity {
                            coefficient: name,
                            at: x,
                            value: v,
                        });
                    }
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
    }
    Ok(PiecewiseDiffusion {
        breakpoints: c.breakpoints,
        a: c.a,
        rho: c.rho,
        b: c.b,
        lambda_lo: lo,
        lambda_hi: hi,
    })
}

impl PiecewiseDiffusion {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lambda_lo, self.lambda_hi)
    }

    pub fn num_pieces(&self) -> usize {
        self.a.len()
    }

    #[inline]
    pub fn piece_index(&self, x: f64) -> usize {
        piece_index(&self.breakpoints, x)
    }

    /// `(left, right)` end of piece `i`.
    pub fn piece_span(&self, i: usize) -> (f64, f64) {
        let l = if i == 0 { f64::NEG_INFINITY } else { self.breakpoints[i - 1] };
        let r = if i + 1 == self.a.len() { f64::INFINITY } else { self.breakpoints[i] };
        (l, r)
    }

    pub fn a_piece(&self, i: usize) -> &Piece {
        &self.a[i]
    }

    pub fn rho_piece(&self, i: usize) -> &Piece {
        &self.rho[i]
    }

    pub fn b_piece(&self, i: usize) -> &Piece {
        &self.b[i]
    }

    #[inline]
    pub fn a(&self, x: f64) -> f64 {
        self.a[self.piece_index(x)].eval(x)
    }

    #[inline]
    pub fn rho(&self, x: f64) -> f64 {
        self.rho[self.piece_index(x)].eval(x)
    }

    #[inline]
    pub fn b(&self, x: f64) -> f64 {
        self.b[self.piece_index(x)].eval(x)
    }

    /// `(a(x-), a(x+))` at breakpoint index `k`.
    pub fn a_jump(&self, k: usize) -> (f64, f64) {
        let x = self.breakpoints[k];
        (self.a[k].eval(x), self.a[k + 1].eval(x))
    }

    pub fn rho_jump(&self, k: usize) -> (f64, f64) {
        let x = self.breakpoints[k];
        (self.rho[k].eval(x), self.rho[k + 1].eval(x))
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.a.iter().chain(&self.rho).all(|p| p.as_constant().is_some())
    }

    pub fn has_drift(&self) -> bool {
        self.b.iter().any(|p| p.as_constant() != Some(0.0))
    }

    /// Piece `i` is constant in all three coefficients.
    pub fn piece_is_constant(&self, i: usize) -> bool {
        self.a[i].as_constant().is_some()
            && self.rho[i].as_constant().is_some()
            && self.b[i].as_constant().is_some()
    }

    pub fn to_coefficients(&self) -> DiffusionCoefficients {
        DiffusionCoefficients {
            breakpoints: self.breakpoints.clone(),
            a: self.a.clone(),
            rho: self.rho.clone(),
            b: self.b.clone(),
        }
    }
}
