//! Numerical building blocks shared by the analytic modules.

pub mod gauss;
pub mod quad;
pub mod roots;
pub mod sum;
pub mod tridiag;

pub use gauss::{kolmogorov_cdf, kolmogorov_pvalue, norm_cdf, norm_pdf, norm_sf};
pub use quad::{integrate, integrate_split};
pub use roots::brent;
pub use sum::{mean_and_se, pairwise_sum};
pub use tridiag::solve_tridiagonal;
