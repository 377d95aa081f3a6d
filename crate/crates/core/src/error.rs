use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` out of range: {value}")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("ellipticity violated: {coefficient}({at}) = {value}")]
    Ellipticity {
        coefficient: &'static str,
        at: f64,
        value: f64,
    },

    #[error("non-finite value in {coefficient} at x = {at}")]
    NonFinite { coefficient: &'static str, at: f64 },

    #[error("breakpoints are not strictly ascending at index {index}")]
    NonAscendingBreakpoints { index: usize },

    #[error("piece count mismatch for {coefficient}: expected {expected}, got {got}")]
    PieceCount {
        coefficient: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("x = {x} is outside the open interval ({a}, {b})")]
    OutsideInterval { x: f64, a: f64, b: f64 },

    #[error("degenerate interval ({a}, {b})")]
    DegenerateInterval { a: f64, b: f64 },

    #[error("root bracket failure on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    RootBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("root finder did not converge after {0} iterations")]
    RootIterations(usize),

    #[error("quadrature did not reach tolerance {tol:e} (estimate {error:e}) on [{a}, {b}]")]
    Quadrature { a: f64, b: f64, tol: f64, error: f64 },

    #[error("exit-time series did not converge for t/h^2 = {0}")]
    Series(f64),

    #[error("atom weight {weight} at {at} has modulus >= 1")]
    AtomWeight { at: f64, weight: f64 },

    #[error("duplicate atom location {0}")]
    DuplicateAtom(f64),

    #[error("coefficient `{0}` has a smooth piece without a derivative")]
    MissingDerivative(&'static str),

    #[error("coefficients must be piecewise constant (piece {piece} of `{coefficient}` is not); enable drift removal or refine")]
    NotPiecewiseConstant {
        coefficient: &'static str,
        piece: usize,
    },

    #[error("drift is present; enable drift removal for the Brownian reduction")]
    DriftPresent,

    #[error("drift removal needs a localization window: `{0}` is not integrable on an unbounded piece")]
    NonIntegrableDrift(&'static str),

    #[error("scale-function check failed for the drift transform (mismatch {0:e})")]
    DriftSign(f64),

    #[error("grid is not ascending at index {0}")]
    GridOrder(usize),

    #[error("grid is asymmetric around skew point {point}: neighbours at distance {left} and {right}")]
    GridSymmetry { point: f64, left: f64, right: f64 },

    #[error("skew point {0} is not a grid point")]
    SkewPointOffGrid(f64),

    #[error("start {0} is not a grid point")]
    StartOffGrid(f64),

    #[error("interface {0} does not lie on the spatial grid")]
    InterfaceOffGrid(f64),

    #[error("start points {x1} and {x2} have different lattice parity")]
    ParityMismatch { x1: f64, x2: f64 },

    #[error("coupling requires alpha1 <= alpha2 and x1 <= x2")]
    CouplingOrder,

    #[error("generator `{generator}` does not accept alpha = {alpha}")]
    GeneratorAlpha { generator: &'static str, alpha: f64 },

    #[error("Euler step produced a non-finite state at step {0}")]
    StepOverflow(usize),

    #[error("empty sample")]
    EmptySample,

    #[error("path {0} does not start at 0")]
    NotStartedAtZero(usize),

    #[error("path {0} carries no noise record")]
    MissingNoise(usize),

    #[error("path {0} is not on a uniform grid")]
    NonUniformPath(usize),

    #[error("reference scale {reference} is too coarse for n = {n} (ratio must be >= 16)")]
    ReferenceTooCoarse { reference: u32, n: u32 },

    #[error("paths are not noise-coupled: {0}")]
    NotCoupled(&'static str),

    #[error("invalid zero-step law: {0}")]
    ZeroStepLaw(&'static str),

    #[error("tridiagonal system is singular or ill-conditioned at row {0}")]
    IllConditioned(usize),

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

