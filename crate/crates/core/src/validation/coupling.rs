use super::report::{Target, ToleranceRule, ValidationReport};
use crate::error::{Error, Result};
use crate::numerics::{mean_and_se, norm_sf};
use crate::path::SampledPath;

/// `I(t, x) = int_0^t (2 pi s)^{-1/2} exp(-x^2 / 2s) ds`
/// `= sqrt(2t/pi) exp(-x^2/2t) - |x| erfc(|x| / sqrt(2t))`.
pub fn local_time_integral(t: f64, x: f64) -> f64 {
    let ax = x.abs();
    (2.0 * t / std::f64::consts::PI).sqrt() * (-x * x / (2.0 * t)).exp() - 2.0 * ax * norm_sf(ax / t.sqrt())
}

/// Bound on `E|X1_t - X2_t|` for one start `x` and parameters `beta1`, `beta2`.
pub fn l1_bound_skew(beta1: f64, beta2: f64, t: f64, x: f64) -> f64 {
    (beta1 - beta2).abs() * local_time_integral(t, x)
}

/// Bound on `E|X1_t - X2_t|` for one `beta` and starts `x1`, `x2`.
pub fn l1_bound_start(beta: f64, x1: f64, x2: f64, t: f64) -> f64 {
    (x1 - x2).abs() + beta.abs() * (local_time_integral(t, x1) - local_time_integral(t, x2)).abs()
}

/// Bound on `E|L_t(X1) - L_t(X2)|` for one `beta` and starts `x1`, `x2`.
pub fn local_time_bound_start(beta: f64, x1: f64, x2: f64, t: f64) -> f64 {
    (x1 - x2).abs() / beta.abs() + (local_time_integral(t, x1) - local_time_integral(t, x2)).abs()
}

#[derive(Debug, Clone, PartialEq)]
pub enum CouplingParams {
    /// Pathwise order `X1 <= X2` at every grid time (lattice pairs).
    Order,
    /// Fraction of pairs that have met by each horizon.
    Coalescence { horizons: Vec<f64> },
    /// Same start, parameters `beta1`, `beta2`.
    L1Skew { beta1: f64, beta2: f64, x: f64, t: f64, allowance: f64 },
    /// Same parameter, starts `x1`, `x2`.
    L1Start { beta: f64, x1: f64, x2: f64, t: f64, allowance: f64 },
    /// Local-time distance for the same pairing, with `L = (X - x - B) / beta`.
    LocalTimeStart { beta: f64, x1: f64, x2: f64, t: f64, allowance: f64 },
}

pub fn order_violations(a: &SampledPath, b: &SampledPath) -> usize {
    a.values().iter().zip(b.values()).filter(|(x, y)| x > y).count()
}

/// First grid time at which the two paths coincide, if any.
pub fn meeting_time(a: &SampledPath, b: &SampledPath) -> Option<f64> {
    a.values().iter().zip(b.values()).position(|(x, y)| x == y).map(|i| a.time(i))
}

fn check_noise(a: &SampledPath, b: &SampledPath) -> Result<()> {
    match (a.noise(), b.noise()) {
        (Some(x), Some(y)) if x == y => Ok(()),
        (Some(_), Some(_)) => Err(Error::NotCoupled("pairs are driven by different noise")),
        _ => Err(Error::NotCoupled("pairs carry no noise record")),
    }
}

/// Noise-coupled pair: `L_t = (X_t - x - B_t) / beta`.
fn tanaka_local_time(p: &SampledPath, t: f64, beta: f64) -> f64 {
    let b_t: f64 = {
        let dt = p.uniform_dt().unwrap_or(1.0);
        let k = ((t / dt).round() as usize).min(p.len() - 1);
        p.noise().map(|n| n[..k].iter().sum()).unwrap_or(0.0)
    };
    (p.value_at(t) - p.initial() - b_t) / beta
}

/// Mean distance against `bound` with a `3 sigma + allowance` margin.
pub fn bound_report(name: &str, dist: &[f64], bound: f64, allowance: f64, seed: Option<u64>) -> ValidationReport {
    let (m, se) = mean_and_se(dist);
    ValidationReport::new(
        name,
        Target::Value(bound),
        m,
        Some(se),
        None,
        ToleranceRule::AtMostSigma { k: 3.0, allowance },
        seed,
        dist.len(),
    )
}

pub fn coupling_checks(pairs: &[(SampledPath, SampledPath)], params: &CouplingParams, seed: Option<u64>) -> Result<ValidationReport> {
    if pairs.is_empty() {
        return Err(Error::EmptySample);
    }
    match params {
        CouplingParams::Order => {
            let v: usize = pairs.iter().map(|(a, b)| order_violations(a, b)).sum();
            let steps: usize = pairs.iter().map(|(a, _)| a.len()).sum();
            Ok(order_report(v, steps, pairs.len(), seed))
        }
        CouplingParams::Coalescence { horizons } => {
            if horizons.is_empty() || horizons.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Invalid("horizons must be ascending".into()));
            }
            let meet: Vec<Option<f64>> = pairs.iter().map(|(a, b)| meeting_time(a, b)).collect();
            let fr: Vec<f64> = horizons
                .iter()
                .map(|&h| meet.iter().filter(|m| m.is_some_and(|t| t <= h)).count() as f64 / pairs.len() as f64)
                .collect();
            coalescence_report(horizons, &fr, pairs.len(), seed)
        }
        CouplingParams::L1Skew { beta1, beta2, x, t, allowance } => {
            let mut d = Vec::with_capacity(pairs.len());
            for (a, b) in pairs {
                check_noise(a, b)?;
                d.push((a.value_at(*t) - b.value_at(*t)).abs());
            }
            Ok(bound_report("l1_bound_skew", &d, l1_bound_skew(*beta1, *beta2, *t, *x), *allowance, seed))
        }
        CouplingParams::L1Start { beta, x1, x2, t, allowance } => {
            let mut d = Vec::with_capacity(pairs.len());
            for (a, b) in pairs {
                check_noise(a, b)?;
                d.push((a.value_at(*t) - b.value_at(*t)).abs());
            }
            Ok(bound_report("l1_bound_start", &d, l1_bound_start(*beta, *x1, *x2, *t), *allowance, seed))
        }
        CouplingParams::LocalTimeStart { beta, x1, x2, t, allowance } => {
            if *beta == 0.0 {
                return Err(Error::OutOfRange { name: "beta", value: 0.0 });
            }
            let mut d = Vec::with_capacity(pairs.len());
            for (a, b) in pairs {
                check_noise(a, b)?;
                d.push((tanaka_local_time(a, *t, *beta) - tanaka_local_time(b, *t, *beta)).abs());
            }
            Ok(bound_report(
                "local_time_bound_start",
                &d,
                local_time_bound_start(*beta, *x1, *x2, *t),
                *allowance,
                seed,
            ))
        }
    }
}

/// Coalescence fractions by horizon; passes when they strictly increase. The
/// estimate is the smallest increment.
/// Exact check: no point where the lower path exceeds the upper one.
pub fn order_report(violations: usize, points: usize, pairs: usize, seed: Option<u64>) -> ValidationReport {
    ValidationReport::new(
        "coupling_order",
        Target::Value(0.0),
        violations as f64,
        None,
        None,
        ToleranceRule::AtMost,
        seed,
        pairs,
    )
    .with_detail("points_checked", points as f64)
}

pub fn coalescence_report(horizons: &[f64], fractions: &[f64], pairs: usize, seed: Option<u64>) -> Result<ValidationReport> {
    if horizons.len() != fractions.len() || fractions.is_empty() {
        return Err(Error::Invalid("one fraction per horizon".into()));
    }
    let min_inc = fractions.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mut r = ValidationReport::new(
        "coalescence",
        Target::Value(0.0),
        min_inc,
        None,
        None,
        ToleranceRule::Above,
        seed,
        pairs,
    );
    for (h, f) in horizons.iter().zip(fractions) {
        r = r.with_detail(format!("fraction_t{h}"), *f);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;

    #[test]
    fn integral_closed_form() {
        for &(t, x) in &[(1.0, 0.0), (1.0, 0.5), (2.0, -1.3), (0.3, 0.1)] {
            let q = integrate(|s: f64| (-x * x / (2.0 * s)).exp() / (2.0 * std::f64::consts::PI * s).sqrt(), 0.0, t, 1e-12).unwrap();
            assert!((local_time_integral(t, x) - q).abs() < 1e-9, "t={t} x={x}");
        }
    }

    #[test]
    fn bound_at_origin() {
        assert!((l1_bound_skew(0.2, 0.6, 1.0, 0.0) - 0.319_153_824).abs() < 1e-8);
    }

    #[test]
    fn identical_pairs_zero_distance() {
        let p = SampledPath::uniform(0.0, 0.5, vec![0.0, 0.3, -0.1]).unwrap().with_noise(vec![0.3, -0.4]).unwrap();
        let r = coupling_checks(
            &[(p.clone(), p.clone()), (p.clone(), p)],
            &CouplingParams::L1Skew { beta1: 0.1, beta2: 0.1, x: 0.0, t: 1.0, allowance: 0.0 },
            None,
        )
        .unwrap();
        assert_eq!(r.estimate, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn uncoupled_rejected() {
        let a = SampledPath::uniform(0.0, 0.5, vec![0.0, 0.3]).unwrap().with_noise(vec![0.3]).unwrap();
        let b = SampledPath::uniform(0.0, 0.5, vec![0.0, 0.2]).unwrap().with_noise(vec![0.2]).unwrap();
        let r = coupling_checks(
            &[(a, b)],
            &CouplingParams::L1Skew { beta1: 0.1, beta2: 0.2, x: 0.0, t: 1.0, allowance: 0.0 },
            None,
        );
        assert!(matches!(r, Err(Error::NotCoupled(_))));
    }

    #[test]
    fn order_and_meeting() {
        let a = SampledPath::uniform(0.0, 1.0, vec![0.0, 1.0, 0.0]).unwrap();
        let b = SampledPath::uniform(0.0, 1.0, vec![2.0, 0.0, 0.0]).unwrap();
        assert_eq!(order_violations(&a, &b), 1);
        assert_eq!(meeting_time(&a, &b), Some(2.0));
    }
}
