//! Estimators and tests tying simulated paths to closed-form laws.

mod coupling;
pub mod experiments;
mod ks;
mod local_time;
mod marginal;
mod occupation;
mod rate;
mod report;
mod rescaling;

pub use coupling::{
    bound_report, coalescence_report, coupling_checks, l1_bound_skew, l1_bound_start, local_time_bound_start, local_time_integral,
    meeting_time, order_report, order_violations, CouplingParams,
};
pub use ks::{ks_lattice, ks_one_sample, ks_pvalue, ks_two_sample};
pub use local_time::{
    local_time_report, local_time_statistics, path_local_time, ratio_estimate, residual_report, sde_residual_statistics,
    LocalTimeAccumulator, LocalTimeEstimate,
};
pub use marginal::{gof_marginal, gof_marginal_lattice, ks_two_sample_report, sign_frequency, sign_test};
pub use occupation::{occupation_fraction, occupation_report, occupation_statistics, OccupationAccumulator, OccupationLaw};
pub use rate::{convergence_rate, loglog_slope, RateOptions};
pub use report::{Target, ToleranceRule, ValidationReport, KS_C_1PCT, KS_C_5PCT};
pub use rescaling::{rescaling_limit, rescaling_target, RescalingOptions};
