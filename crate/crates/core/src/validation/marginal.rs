use super::ks::{ks_lattice, ks_one_sample, ks_pvalue, ks_two_sample};
use super::report::{Target, ToleranceRule, ValidationReport, KS_C_1PCT};
use crate::density::TransitionCdf;
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;
use crate::skew::SkewParameter;

/// Fraction of non-negative values; exact zeros count one half.
pub fn sign_frequency(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let w: Vec<f64> = values
        .iter()
        .map(|&x| if x > 0.0 { 1.0 } else if x == 0.0 { 0.5 } else { 0.0 })
        .collect();
    Ok(pairwise_sum(&w) / values.len() as f64)
}

/// Binomial z-test of a sign frequency against `p`; `allowance` absorbs a stated bias.
pub fn sign_test(name: &str, values: &[f64], p: f64, allowance: f64, seed: Option<u64>) -> Result<ValidationReport> {
    let f = sign_frequency(values)?;
    let n = values.len();
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let z = if se > 0.0 { (f - p) / se } else { 0.0 };
    Ok(ValidationReport::new(
        name,
        Target::Value(p),
        f,
        Some(se),
        Some(z),
        ToleranceRule::WithinSigma { k: 3.0, allowance },
        seed,
        n,
    ))
}

fn gof_impl(samples: &[f64], t: f64, x0: f64, alpha: SkewParameter, spacing: Option<f64>, seed: Option<u64>) -> Result<ValidationReport> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let law = TransitionCdf::new(t, x0, alpha)?;
    let d = match spacing {
        Some(h) => ks_lattice(samples, h, |z| law.cdf(z))?,
        None => ks_one_sample(samples, |z| law.cdf(z))?,
    };
    let n = samples.len() as f64;
    let p_pos = law.sf(0.0);
    let f = sign_frequency(samples)?;
    let se = (p_pos * (1.0 - p_pos) / n).sqrt();
    Ok(ValidationReport::new(
        "gof_marginal",
        Target::Cdf(format!("transition law t={t} x0={x0} alpha={}", alpha.alpha())),
        d,
        None,
        Some(d),
        ToleranceRule::KsCritical { c: KS_C_1PCT, n_eff: n },
        seed,
        samples.len(),
    )
    .with_detail("p_value", ks_pvalue(d, n))
    .with_detail("sign_frequency", f)
    .with_detail("sign_target", p_pos)
    .with_detail("sign_z", if se > 0.0 { (f - p_pos) / se } else { 0.0 }))
}

/// KS of i.i.d. samples of `X_t` from `x0` against the closed-form law, with the
/// sign-frequency z-score as a detail.
pub fn gof_marginal(samples: &[f64], t: f64, x0: f64, alpha: SkewParameter, seed: Option<u64>) -> Result<ValidationReport> {
    gof_impl(samples, t, x0, alpha, None, seed)
}

/// As [`gof_marginal`] for samples on a lattice of the given spacing.
pub fn gof_marginal_lattice(
    samples: &[f64],
    spacing: f64,
    t: f64,
    x0: f64,
    alpha: SkewParameter,
    seed: Option<u64>,
) -> Result<ValidationReport> {
    gof_impl(samples, t, x0, alpha, Some(spacing), seed)
}

pub fn ks_two_sample_report(name: &str, a: &[f64], b: &[f64], seed: Option<u64>) -> Result<ValidationReport> {
    let (d, ne) = ks_two_sample(a, b)?;
    Ok(ValidationReport::new(
        name,
        Target::Cdf("second sample".into()),
        d,
        None,
        Some(d),
        ToleranceRule::KsCritical { c: KS_C_1PCT, n_eff: ne },
        seed,
        a.len() + b.len(),
    )
    .with_detail("p_value", ks_pvalue(d, ne)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn draws(alpha: f64, n: usize, seed: u64) -> Vec<f64> {
        let law = TransitionCdf::new(1.0, 0.0, SkewParameter::from_alpha(alpha).unwrap()).unwrap();
        let mut rng = RngStream::new(seed, 0).rng();
        (0..n).map(|_| law.sample(&mut rng).unwrap()).collect()
    }

    #[test]
    fn ties_count_half() {
        assert_eq!(sign_frequency(&[0.0, 1.0, -1.0, 0.0]).unwrap(), 0.5);
    }

    #[test]
    fn own_sampler_passes_most_seeds() {
        let s = SkewParameter::from_alpha(0.7).unwrap();
        let mut passes = 0;
        for seed in 0..100 {
            let xs = draws(0.7, 400, seed);
            if gof_marginal(&xs, 1.0, 0.0, s, Some(seed)).unwrap().pass {
                passes += 1;
            }
        }
        assert!(passes >= 97, "{passes}");
    }

    #[test]
    fn wrong_law_fails() {
        let xs = draws(0.5, 5000, 1);
        let r = gof_marginal(&xs, 1.0, 0.0, SkewParameter::from_alpha(0.8).unwrap(), None).unwrap();
        assert!(!r.pass);
        assert!(r.detail("sign_z").unwrap() < -3.0);
    }
}
