//! Kolmogorov-Smirnov statistics, including a lattice-aware variant.

use crate::error::{Error, Result};
use crate::numerics::kolmogorov_pvalue;

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Invalid("NaN in sample".into()));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `sup |F_n - F|` with ties handled by comparing at both sides of each jump.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let v = sorted(samples)?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        let x = v[i];
        let mut j = i;
        while j < v.len() && v[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((j as f64 / n - f).abs()).max((f - i as f64 / n).abs());
        i = j;
    }
    Ok(d)
}

/// KS distance for samples living on a lattice of the given `spacing` against a
/// continuous `cdf`: each atom is compared with the mass of its cell
/// `(x - spacing/2, x + spacing/2]`, the continuity correction for lattice data.
pub fn ks_lattice(samples: &[f64], spacing: f64, cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::OutOfRange { name: "spacing", value: spacing });
    }
    let v = sorted(samples)?;
    let n = v.len() as f64;
    let h = 0.5 * spacing;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        let x = v[i];
        let mut j = i;
        while j < v.len() && v[j] == x {
            j += 1;
        }
        d = d.max((j as f64 / n - cdf(x + h)).abs()).max((i as f64 / n - cdf(x - h)).abs());
        i = j;
    }
    Ok(d)
}

/// Two-sample KS distance and its effective size `n m / (n + m)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok((d, n * m / (n + m)))
}

pub fn ks_pvalue(d: f64, n_eff: f64) -> f64 {
    kolmogorov_pvalue(d, n_eff)
}
