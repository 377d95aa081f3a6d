use super::{solve_on_nodes, Field, uniform_nodes, InitialFn, SolveOptions, TimeScheme, TransmissionProblem};
use crate::density::semigroup_apply;
use crate::error::{Error, Result};
use crate::skew::SkewParameter;
use crate::validation::{Target, ToleranceRule, ValidationReport};

#[derive(Debug, Clone, PartialEq)]
pub struct PdeComparison {
    /// Coarsest spatial step; each level halves it.
    pub h0: f64,
    pub levels: usize,
    pub scheme: TimeScheme,
    /// Required empirical order.
    pub min_order: f64,
}

impl Default for PdeComparison {
    fn default() -> Self {
        Self {
            h0: 0.1,
            levels: 3,
            scheme: TimeScheme::Theta(0.5),
            min_order: 1.8,
        }
    }
}

impl PdeComparison {
    /// Max and mean gaps at the probes, one pair per level.
    pub fn gaps(&self, alpha: SkewParameter, initial: &InitialFn, t: f64, probes: &[f64]) -> Result<Vec<(f64, f64)>> {
        if probes.is_empty() {
            return Err(Error::EmptySample);
        }
        if self.levels < 2 {
            return Err(Error::Invalid("at least two refinement levels".into()));
        }
        let reference: Vec<f64> = probes
            .iter()
            .map(|&x| semigroup_apply(t, &|y| initial(y), x, alpha))
            .collect::<Result<_>>()?;
        let extent = probes.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut out = Vec::with_capacity(self.levels);
        for k in 0..self.levels {
            let field = self.solve_level(alpha, initial, t, extent, k)?;
            let g: Vec<f64> = probes
                .iter()
                .zip(&reference)
                .map(|(&x, r)| (field.final_value(x) - r).abs())
                .collect();
            out.push((g.iter().cloned().fold(0.0, f64::max), g.iter().sum::<f64>() / g.len() as f64));
        }
        Ok(out)
    }

    /// Solution at refinement level `k` (step `h0 / 2^k`) on a domain wide enough for
    /// probes within `extent` of the origin.
    pub fn solve_level(&self, alpha: SkewParameter, initial: &InitialFn, t: f64, extent: f64, k: usize) -> Result<Field> {
        let r_min = TransmissionProblem::far_field_radius(t, extent, 1.0).max(extent + 1.0);
        let radius = (r_min / self.h0).ceil() * self.h0;
        let problem = TransmissionProblem::skew(alpha, initial.clone(), t, radius)?;
        let h = self.h0 / (1u64 << k) as f64;
        let cells = (2.0 * radius / h).round() as usize;
        let nt = (t / h).ceil() as usize;
        let opts = SolveOptions {
            scheme: self.scheme,
            keep_every: usize::MAX,
            startup_steps: 2,
        };
        solve_on_nodes(&problem, uniform_nodes(-radius, radius, cells + 1), nt, &opts)
    }
}

/// Finite-volume solution against the closed-form semigroup at the probes. The
/// estimate is the smallest observed order of the max gap between levels.
pub fn pde_vs_density(
    alpha: SkewParameter,
    initial: &InitialFn,
    t: f64,
    probes: &[f64],
    cmp: &PdeComparison,
) -> Result<ValidationReport> {
    let gaps = cmp.gaps(alpha, initial, t, probes)?;
    let orders: Vec<f64> = gaps.windows(2).map(|w| (w[0].0 / w[1].0).log2()).collect();
    let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut r = ValidationReport::new(
        "pde_vs_density",
        Target::Value(cmp.min_order),
        min_order,
        None,
        None,
        ToleranceRule::AtLeast,
        None,
        probes.len(),
    );
    for (k, (mx, mean)) in gaps.iter().enumerate() {
        r = r.with_detail(format!("max_gap_{k}"), *mx).with_detail(format!("mean_gap_{k}"), *mean);
    }
    for (k, o) in orders.iter().enumerate() {
        r = r.with_detail(format!("order_{k}"), *o);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn second_order_for_skew_medium() {
        let init: InitialFn = Arc::new(|x: f64| (-(x - 0.2) * (x - 0.2) / 0.5).exp());
        let r = pde_vs_density(
            SkewParameter::from_alpha(0.7).unwrap(),
            &init,
            0.5,
            &[-1.0, -0.3, 0.0, 0.4, 1.2],
            &PdeComparison::default(),
        )
        .unwrap();
        assert!(r.pass, "{:?}", r.details);
    }
}
