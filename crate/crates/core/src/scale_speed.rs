//! Scale function, speed measure, Green function and exit-time moments for
//! `L = (rho/2)(a u')' + b u'`, written as `L = (1/2) d/dV d/dS` with
//! `S' = exp(-h)/a`, `V' = exp(h)/rho` and `h(x) = 2 int_0^x b/(a rho)`.

use serde::{Deserialize, Serialize};

use crate::coeffs::{validate_piecewise, DiffusionCoefficients, PiecewiseDiffusion};
use crate::error::{Error, Result};
use crate::numerics::{brent, integrate, integrate_split};
use crate::skew::SkewParameter;

const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub enum ScaleSource {
    Skew(SkewParameter),
    Diffusion(PiecewiseDiffusion),
}

#[derive(Debug, Clone, Copy)]
enum PieceForm {
    /// constant a, rho and k = 2b/(a rho)
    Constant { a: f64, rho: f64, k: f64 },
    General,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    anchor: f64,
    h0: f64,
    s0: f64,
    v0: f64,
    form: PieceForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitSide {
    Either,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitMoments {
    /// `E_x[tau]`.
    pub mean: f64,
    /// Probability of the requested side (1 for `Either`).
    pub side_probability: f64,
    /// `E_x[tau | exit on side]` (equal to `mean` for `Either`).
    pub conditional_mean: f64,
}

#[derive(Debug, Clone)]
pub struct ScaleSpeedModel {
    source: ScaleSource,
    coeffs: PiecewiseDiffusion,
    segments: Vec<Segment>,
    kappa: f64,
    lambda: f64,
    lambda_v: f64,
}

fn expm1_over(k: f64, d: f64) -> f64 {
    // (exp(k d) - 1)/k, continuous at k = 0
    if k == 0.0 {
        d
    } else {
        (k * d).exp_m1() / k
    }
}

impl ScaleSpeedModel {
    pub fn build(source: ScaleSource) -> Result<Self> {
        let coeffs = match &source {
            ScaleSource::Skew(s) => validate_piecewise(DiffusionCoefficients::skew_brownian(*s))?,
            ScaleSource::Diffusion(d) => d.clone(),
        };
        let m = coeffs.num_pieces();
        let home = coeffs.piece_index(0.0);
        let mut segments: Vec<Segment> = (0..m)
            .map(|i| {
                let (lo, hi) = coeffs.piece_span(i);
                let anchor = if i == home {
                    0.0
                } else if i > home {
                    lo
                } else {
                    hi
                };
                let form = if coeffs.piece_is_constant(i) {
                    let a = coeffs.a_piece(i).eval(anchor);
                    let rho = coeffs.rho_piece(i).eval(anchor);
                    let b = coeffs.b_piece(i).eval(anchor);
                    PieceForm::Constant { a, rho, k: 2.0 * b / (a * rho) }
                } else {
                    PieceForm::General
                };
                Segment {
                    lo,
                    hi,
                    anchor,
                    h0: 0.0,
                    s0: 0.0,
                    v0: 0.0,
                    form,
                }
            })
            .collect();
        let mut model = Self {
            source,
            coeffs,
            segments: vec![],
            kappa: 1.0,
            lambda: 0.0,
            lambda_v: 0.0,
        };
        // propagate anchor values outward from the piece holding 0
        for i in home + 1..m {
            let prev = segments[i - 1];
            let x = segments[i].anchor;
            let (h, s, v) = model.raw_in_segment(&prev, i - 1, x)?;
            segments[i].h0 = h;
            segments[i].s0 = s;
            segments[i].v0 = v;
        }
        for i in (0..home).rev() {
            let next = segments[i + 1];
            let x = segments[i].anchor;
            let (h, s, v) = model.raw_in_segment(&next, i + 1, x)?;
            segments[i].h0 = h;
            segments[i].s0 = s;
            segments[i].v0 = v;
        }
        model.segments = segments;
        Ok(model)
    }

    pub fn source(&self) -> &ScaleSource {
        &self.source
    }

    pub fn coefficients(&self) -> &PiecewiseDiffusion {
        &self.coeffs
    }

    /// Affine reparametrization `(kappa S + lambda, V/kappa + lambda_v)`; all
    /// hitting probabilities and exit-time moments are invariant under it.
    pub fn rescaled(&self, kappa: f64, lambda: f64, lambda_v: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::OutOfRange { name: "kappa", value: kappa });
        }
        let mut m = self.clone();
        m.kappa = self.kappa * kappa;
        m.lambda = kappa * self.lambda + lambda;
        m.lambda_v = self.lambda_v / kappa + lambda_v;
        Ok(m)
    }

    fn h_general(&self, seg: &Segment, idx: usize, x: f64) -> Result<f64> {
        let (a, r, b) = (self.coeffs.a_piece(idx), self.coeffs.rho_piece(idx), self.coeffs.b_piece(idx));
        let g = |y: f64| 2.0 * b.eval(y) / (a.eval(y) * r.eval(y));
        Ok(seg.h0 + integrate(g, seg.anchor, x, QUAD_TOL)?)
    }

    /// Unscaled `(h, S, V)` at `x` using the representation of segment `idx`.
    fn raw_in_segment(&self, seg: &Segment, idx: usize, x: f64) -> Result<(f64, f64, f64)> {
        let d = x - seg.anchor;
        match seg.form {
            PieceForm::Constant { a, rho, k } => {
                let h = seg.h0 + k * d;
                let s = seg.s0 + (-seg.h0).exp() / a * expm1_over(-k, d);
                let v = seg.v0 + seg.h0.exp() / rho * expm1_over(k, d);
                Ok((h, s, v))
            }
            PieceForm::General => {
                let a = self.coeffs.a_piece(idx);
                let r = self.coeffs.rho_piece(idx);
                let h = self.h_general(seg, idx, x)?;
                let s = seg.s0
                    + integrate(
                        |y| (-self.h_general(seg, idx, y).unwrap_or(f64::NAN)).exp() / a.eval(y),
                        seg.anchor,
                        x,
                        QUAD_TOL,
                    )?;
                let v = seg.v0
                    + integrate(
                        |y| self.h_general(seg, idx, y).unwrap_or(f64::NAN).exp() / r.eval(y),
                        seg.anchor,
                        x,
                        QUAD_TOL,
                    )?;
                Ok((h, s, v))
            }
        }
    }

    fn raw(&self, x: f64) -> Result<(f64, f64, f64)> {
        let i = self.coeffs.piece_index(x);
        self.raw_in_segment(&self.segments[i], i, x)
    }

    pub fn h(&self, x: f64) -> Result<f64> {
        let i = self.coeffs.piece_index(x);
        let seg = &self.segments[i];
        match seg.form {
            PieceForm::Constant { k, .. } => Ok(seg.h0 + k * (x - seg.anchor)),
            PieceForm::General => self.h_general(seg, i, x),
        }
    }

    pub fn scale(&self, x: f64) -> Result<f64> {
        Ok(self.kappa * self.raw(x)?.1 + self.lambda)
    }

    pub fn speed(&self, x: f64) -> Result<f64> {
        Ok(self.raw(x)?.2 / self.kappa + self.lambda_v)
    }

    /// `S'(x)` (right derivative at breakpoints).
    pub fn scale_derivative(&self, x: f64) -> Result<f64> {
        Ok(self.kappa * (-self.h(x)?).exp() / self.coeffs.a(x))
    }

    /// Density of the speed measure, `V'(x)`.
    pub fn speed_density(&self, x: f64) -> Result<f64> {
        Ok(self.h(x)?.exp() / self.coeffs.rho(x) / self.kappa)
    }

    pub fn scale_inverse(&self, s: f64) -> Result<f64> {
        let target = (s - self.lambda) / self.kappa;
        // locate the segment by its raw S range
        let mut idx = self.segments.len() - 1;
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.hi.is_finite() && target < self.raw_in_segment(seg, i, seg.hi)?.1 {
                idx = i;
                break;
            }
        }
        let seg = self.segments[idx];
        match seg.form {
            PieceForm::Constant { a, k, .. } => {
                let w = a * seg.h0.exp() * (target - seg.s0);
                let d = if k == 0.0 {
                    w
                } else {
                    let z = k * w;
                    if z >= 1.0 {
                        return Err(Error::OutOfRange { name: "scale value", value: s });
                    }
                    -(-z).ln_1p() / k
                };
                Ok(seg.anchor + d)
            }
            PieceForm::General => {
                let f = |x: f64| self.raw_in_segment(&seg, idx, x).map(|r| r.1 - target).unwrap_or(f64::NAN);
                let mut lo = if seg.lo.is_finite() { seg.lo } else { seg.anchor - 1.0 };
                let mut hi = if seg.hi.is_finite() { seg.hi } else { seg.anchor + 1.0 };
                let mut grow = 1.0;
                while f(lo) > 0.0 && !seg.lo.is_finite() {
                    grow *= 2.0;
                    lo = seg.anchor - grow;
                    if grow > 1e12 {
                        break;
                    }
                }
                grow = 1.0;
                while f(hi) < 0.0 && !seg.hi.is_finite() {
                    grow *= 2.0;
                    hi = seg.anchor + grow;
                    if grow > 1e12 {
                        break;
                    }
                }
                brent(f, lo, hi, 1e-14)
            }
        }
    }

    fn check_interval(x: f64, a: f64, b: f64) -> Result<()> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::DegenerateInterval { a, b });
        }
        if !(a < x && x < b) {
            return Err(Error::OutsideInterval { x, a, b });
        }
        Ok(())
    }

    /// `P_x[hit b before a]`.
    pub fn hitting_probability(&self, x: f64, a: f64, b: f64) -> Result<f64> {
        Self::check_interval(x, a, b)?;
        let (sa, sx, sb) = (self.scale(a)?, self.scale(x)?, self.scale(b)?);
        Ok((sx - sa) / (sb - sa))
    }

    /// Green function of the interval `(a, b)` with respect to the speed measure.
    pub fn green(&self, x: f64, y: f64, a: f64, b: f64) -> Result<f64> {
        if !(a < b) {
            return Err(Error::DegenerateInterval { a, b });
        }
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let (sa, sb) = (self.scale(a)?, self.scale(b)?);
        Ok(2.0 * (self.scale(lo)? - sa) * (sb - self.scale(hi)?) / (sb - sa))
    }

    fn split_points(&self, x: f64, a: f64, b: f64) -> Vec<f64> {
        let mut pts = vec![a, x, b];
        pts.extend(self.coeffs.breakpoints().iter().copied().filter(|&p| p > a && p < b));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `int_a^b G(x, y) w(y) V'(y) dy`.
    fn green_integral<W: Fn(f64) -> f64>(&self, x: f64, a: f64, b: f64, weight: W) -> Result<f64> {
        let (sa, sx, sb) = (self.scale(a)?, self.scale(x)?, self.scale(b)?);
        let scale = ((sb - sa) * (self.speed(b)? - self.speed(a)?)).abs().max(1e-300);
        let pts = self.split_points(x, a, b);
        let integrand = |y: f64| -> f64 {
            let sy = match self.scale(y) {
                Ok(v) => v,
                Err(_) => return f64::NAN,
            };
            let g = if y <= x {
                2.0 * (sy - sa) * (sb - sx) / (sb - sa)
            } else {
                2.0 * (sx - sa) * (sb - sy) / (sb - sa)
            };
            g * weight(y) * self.speed_density(y).unwrap_or(f64::NAN)
        };
        integrate_split(integrand, &pts, 1e-14 * scale)
    }

    pub fn exit_time_moments(&self, x: f64, a: f64, b: f64, side: ExitSide) -> Result<ExitMoments> {
        Self::check_interval(x, a, b)?;
        let mean = self.green_integral(x, a, b, |_| 1.0)?;
        let (sa, sb) = (self.scale(a)?, self.scale(b)?);
        let v = |y: f64| (self.scale(y).unwrap_or(f64::NAN) - sa) / (sb - sa);
        let vx = v(x);
        let (p, cond) = match side {
            ExitSide::Either => (1.0, mean),
            ExitSide::Right => (vx, self.green_integral(x, a, b, v)? / vx),
            ExitSide::Left => (1.0 - vx, self.green_integral(x, a, b, |y| 1.0 - v(y))? / (1.0 - vx)),
        };
        Ok(ExitMoments {
            mean,
            side_probability: p,
            conditional_mean: cond,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::Piece;
    use proptest::prelude::*;

    fn sbm(a: f64) -> ScaleSpeedModel {
        ScaleSpeedModel::build(ScaleSource::Skew(SkewParameter::from_alpha(a).unwrap())).unwrap()
    }

    fn diffusion(c: DiffusionCoefficients) -> ScaleSpeedModel {
        ScaleSpeedModel::build(ScaleSource::Diffusion(validate_piecewise(c).unwrap())).unwrap()
    }

    #[test]
    fn sbm_closed_form() {
        for &a in &[0.2, 0.5, 0.7] {
            let m = sbm(a);
            assert!((m.scale(1.0).unwrap() - 1.0 / a).abs() < 1e-15);
            assert!((m.scale(-1.0).unwrap() + 1.0 / (1.0 - a)).abs() < 1e-15);
            assert!((m.speed(2.0).unwrap() - 2.0 * a).abs() < 1e-15);
            assert!((m.speed(-2.0).unwrap() + 2.0 * (1.0 - a)).abs() < 1e-15);
            assert_eq!(m.scale(0.0).unwrap(), 0.0);
            assert_eq!(m.speed(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn reflecting_sbm_rejected() {
        let r = ScaleSpeedModel::build(ScaleSource::Skew(SkewParameter::from_alpha(1.0).unwrap()));
        assert!(matches!(r, Err(Error::Ellipticity { .. })));
    }

    #[test]
    fn brownian_natural_scale() {
        let m = diffusion(DiffusionCoefficients::brownian());
        for &x in &[-3.0, -0.5, 0.0, 1.25] {
            assert_eq!(m.scale(x).unwrap(), x);
            assert_eq!(m.speed(x).unwrap(), x);
        }
    }

    fn bump_drift() -> DiffusionCoefficients {
        let k = 3f64.ln() / 4.0;
        DiffusionCoefficients::piecewise_constant(
            vec![-1.0, 1.0],
            &[1.0; 3],
            &[1.0; 3],
            &[0.0, k, 0.0],
        )
    }

    #[test]
    fn bump_drift_total_exponent() {
        let m = diffusion(bump_drift());
        let dh = m.h(5.0).unwrap() - m.h(-5.0).unwrap();
        assert!((dh - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn hitting_examples() {
        assert!((sbm(0.3).hitting_probability(0.0, -1.0, 1.0).unwrap() - 0.3).abs() < 1e-15);
        let bm = diffusion(DiffusionCoefficients::brownian());
        assert_eq!(bm.hitting_probability(0.5, -1.0, 1.0).unwrap(), 0.75);
        assert!((sbm(0.75).hitting_probability(0.5, -1.0, 1.0).unwrap() - 0.875).abs() < 1e-15);
        assert!(matches!(
            bm.hitting_probability(2.0, -1.0, 1.0),
            Err(Error::OutsideInterval { .. })
        ));
    }

    #[test]
    fn exit_time_examples() {
        let bm = diffusion(DiffusionCoefficients::brownian());
        let e = bm.exit_time_moments(0.5, 0.0, 1.0, ExitSide::Either).unwrap();
        assert!((e.mean - 0.25).abs() < 1e-14);
        for &a in &[0.1, 0.5, 0.7, 0.95] {
            for &l in &[0.5, 1.0, 3.0] {
                let e = sbm(a).exit_time_moments(0.0, -l, l, ExitSide::Either).unwrap();
                assert!((e.mean - l * l).abs() < 1e-10 * l * l);
            }
        }
        assert!(matches!(
            bm.exit_time_moments(0.0, 1.0, 1.0, ExitSide::Either),
            Err(Error::DegenerateInterval { .. })
        ));
    }

    #[test]
    fn conditional_exit_brownian() {
        // E_x[tau | right] on (0,1) is (1 - x^2)/3
        let bm = diffusion(DiffusionCoefficients::brownian());
        for &x in &[0.1, 0.5, 0.8] {
            let e = bm.exit_time_moments(x, 0.0, 1.0, ExitSide::Right).unwrap();
            assert!((e.side_probability - x).abs() < 1e-15);
            assert!((e.conditional_mean - (1.0 - x * x) / 3.0).abs() < 1e-12);
            let l = bm.exit_time_moments(x, 0.0, 1.0, ExitSide::Left).unwrap();
            let y = 1.0 - x;
            assert!((l.conditional_mean - (1.0 - y * y) / 3.0).abs() < 1e-12);
            // total expectation
            let tot = e.side_probability * e.conditional_mean + l.side_probability * l.conditional_mean;
            assert!((tot - e.mean).abs() < 1e-12);
        }
    }

    #[test]
    fn rescaling_invariance() {
        let m = diffusion(DiffusionCoefficients::two_piece(1.0, 4.0));
        let base_h = m.hitting_probability(0.3, -1.0, 2.0).unwrap();
        let base_e = m.exit_time_moments(0.3, -1.0, 2.0, ExitSide::Right).unwrap();
        for &k in &[0.1, 10.0] {
            let r = m.rescaled(k, 2.5, -7.0).unwrap();
            assert!((r.hitting_probability(0.3, -1.0, 2.0).unwrap() - base_h).abs() < 1e-14);
            let e = r.exit_time_moments(0.3, -1.0, 2.0, ExitSide::Right).unwrap();
            assert!((e.mean - base_e.mean).abs() < 1e-11);
            assert!((e.conditional_mean - base_e.conditional_mean).abs() < 1e-11);
        }
    }

    #[test]
    fn flux_continuity_at_breakpoints() {
        let c = DiffusionCoefficients::piecewise_constant(
            vec![-0.5, 1.0],
            &[2.0, 0.5, 3.0],
            &[1.0, 2.0, 0.7],
            &[0.3, -0.2, 0.1],
        );
        let m = diffusion(c);
        for (k, &x) in m.coefficients().breakpoints().iter().enumerate() {
            let (am, ap) = m.coefficients().a_jump(k);
            let hx = m.h(x).unwrap();
            let s = |y: f64| m.scale(y).unwrap();
            let d = 1e-6;
            let left = am * (s(x) - s(x - d)) / d;
            let right = ap * (s(x + d) - s(x)) / d;
            assert!((ap * m.scale_derivative(x).unwrap() - (-hx).exp()).abs() < 1e-15);
            assert!((left - right).abs() < 1e-5, "{left} {right}");
        }
    }

    #[test]
    fn harmonic_inside_pieces() {
        let c = DiffusionCoefficients::piecewise_constant(
            vec![0.0],
            &[1.0, 3.0],
            &[2.0, 0.5],
            &[0.4, -0.7],
        );
        let m = diffusion(c.clone());
        let d = validate_piecewise(c).unwrap();
        let lsx = |x: f64, h: f64| {
            let s = |y| m.scale(y).unwrap();
            let d2 = (s(x + h) - 2.0 * s(x) + s(x - h)) / (h * h);
            let d1 = (s(x + h) - s(x - h)) / (2.0 * h);
            0.5 * d.rho(x) * d.a(x) * d2 + d.b(x) * d1
        };
        for &x in &[-1.0, -0.3, 0.4, 2.0] {
            let (r1, r2) = (lsx(x, 1e-2).abs(), lsx(x, 5e-3).abs());
            assert!(r1 < 1e-4);
            assert!(r2 < r1 / 3.0 || r2 < 1e-9, "x={x} {r1} {r2}");
        }
    }

    #[test]
    fn general_pieces_match_constant_form() {
        let c = DiffusionCoefficients::piecewise_constant(
            vec![-1.0, 0.5],
            &[2.0, 0.5, 3.0],
            &[1.0, 2.0, 0.7],
            &[0.3, -0.2, 0.1],
        );
        let mut g = c.clone();
        g.a = vec![Piece::smooth(|_| 2.0), Piece::smooth(|_| 0.5), Piece::smooth(|_| 3.0)];
        g.b = vec![Piece::smooth(|_| 0.3), Piece::smooth(|_| -0.2), Piece::smooth(|_| 0.1)];
        let (mc, mg) = (diffusion(c), diffusion(g));
        for &x in &[-3.0, -1.0, -0.2, 0.0, 0.5, 0.9, 2.5] {
            assert!((mc.scale(x).unwrap() - mg.scale(x).unwrap()).abs() < 1e-11);
            assert!((mc.speed(x).unwrap() - mg.speed(x).unwrap()).abs() < 1e-11);
            let s = mg.scale(x).unwrap();
            assert!((mg.scale_inverse(s).unwrap() - x).abs() < 1e-11);
        }
    }

    proptest! {
        #[test]
        fn green_symmetric(x in -0.99f64..0.99, y in -0.99f64..0.99, a in 0.05f64..0.95) {
            let m = sbm(a);
            let g1 = m.green(x, y, -1.0, 1.0).unwrap();
            let g2 = m.green(y, x, -1.0, 1.0).unwrap();
            prop_assert_eq!(g1, g2);
        }

        #[test]
        fn scale_inverse_round_trip(x in -50.0f64..50.0, a in 0.05f64..0.95) {
            let m = sbm(a);
            let back = m.scale_inverse(m.scale(x).unwrap()).unwrap();
            prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0));
        }

        #[test]
        fn drift_scale_round_trip(x in -4.0f64..4.0) {
            let c = DiffusionCoefficients::piecewise_constant(
                vec![-1.0, 1.0], &[1.0, 2.0, 0.5], &[1.0, 1.5, 1.0], &[0.2, -0.4, 0.3]);
            let m = diffusion(c);
            let back = m.scale_inverse(m.scale(x).unwrap()).unwrap();
            prop_assert!((back - x).abs() <= 1e-12);
        }
    }
}
