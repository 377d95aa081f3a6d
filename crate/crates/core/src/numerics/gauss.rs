use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal density.
pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function, accurate in both tails.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `1 - norm_cdf(z)` without cancellation.
pub fn norm_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// Limiting distribution function of `sqrt(N) * D_N` for the one-sample KS statistic.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 1.0 {
        let c = -PI * PI / (8.0 * x * x);
        let mut s = 0.0;
        for k in 1..=20 {
            let m = (2 * k - 1) as f64;
            let term = (c * m * m).exp();
            s += term;
            if term < 1e-300 {
                break;
            }
        }
        (2.0 * PI).sqrt() / x * s
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * x * x).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        1.0 - 2.0 * s
    }
}

/// Asymptotic p-value of a KS statistic `d` computed from an effective sample size `n_eff`.
pub fn kolmogorov_pvalue(d: f64, n_eff: f64) -> f64 {
    (1.0 - kolmogorov_cdf(d * n_eff.sqrt())).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((norm_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((norm_cdf(-1.959_963_984_540_054) - 0.025).abs() < 1e-15);
        assert!((norm_sf(8.0) - 6.220_960_574_271_785e-16).abs() < 1e-28);
        assert!((norm_cdf(-8.0) - norm_sf(8.0)).abs() < 1e-30);
    }

    #[test]
    fn kolmogorov_series_branches_meet() {
        let lo = kolmogorov_cdf(1.0 - 1e-12);
        let hi = kolmogorov_cdf(1.0);
        assert!((lo - hi).abs() < 1e-10);
    }

    #[test]
    fn kolmogorov_critical_constants() {
        // classical 1% and 5% points
        assert!((1.0 - kolmogorov_cdf(1.628) - 0.01).abs() < 2e-4);
        assert!((1.0 - kolmogorov_cdf(1.358) - 0.05).abs() < 2e-4);
    }
}
