//! Simulation and verification toolkit for skew Brownian motion and
//! one-dimensional diffusions with discontinuous coefficients.

pub mod coeffs;
pub mod density;
pub mod error;
pub mod exit_scheme;
pub mod generators;
pub mod measure;
pub mod numerics;
pub mod path;
pub mod pde;
pub mod rng;
pub mod scale_speed;
pub mod skew;
pub mod transform;
pub mod validation;

pub use coeffs::{validate_piecewise, DiffusionCoefficients, Piece, PiecewiseDiffusion, PiecewiseFunction};
pub use error::{Error, Result};
pub use measure::{ContinuousPart, SignedAtomicMeasure};
pub use path::{SampledPath, TimeGrid};
pub use rng::RngStream;
pub use skew::{make_skew, SkewParameter, SkewSpec};
