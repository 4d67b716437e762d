//! Spectral Wiener-chaos solver for the heat equation on `(0, pi)` with
//! Neumann boundary conditions and multiplicative space-only Gaussian white
//! noise in the Wick interpretation.
//!
//! The solver expands the solution over the Cameron-Martin basis indexed by
//! multi-indices, solves the resulting lower-triangular propagator system
//! exactly in a cosine spectral basis with an exponential-polynomial time
//! representation, and ships a verification harness: closed-form simplex
//! integrals with factorial-decay bounds, Monte Carlo moment checks, an
//! exactly solvable additive-noise benchmark, and Holder-exponent estimation
//! from increment second moments.
//!
//! ```
//! use wickheat_core::{solve_propagator, MultiIndex, SolveOptions, SpectralFunction};
//!
//! // constant initial data, chaos order 2, 8 cosine modes, 3 noise modes
//! let u0 = SpectralFunction::mode(1, 8);
//! let field = solve_propagator(&u0, 2, 8, 3, &SolveOptions::default()).unwrap();
//!
//! // the coefficient forced by the second noise mode has the closed form
//! // (1 - e^{-t}) / sqrt(pi) on cosine mode 2
//! let alpha = MultiIndex::unit(2);
//! let value = field.eval_coefficient(&alpha, 1.0, 0.0).unwrap();
//! let expected = (1.0 - (-1.0f64).exp()) * (2.0 / std::f64::consts::PI).sqrt()
//!     / std::f64::consts::PI.sqrt();
//! assert!((value - expected).abs() < 1e-14);
//! ```

pub mod chaos_index;
pub mod linalg;
pub mod oracles;
pub mod propagator;
pub mod quad;
pub mod regularity;
pub mod simplex_integrals;
pub mod special;
pub mod spectral_basis;
pub mod stochastic_field;

pub use chaos_index::{
    chaos_basis_eval, enumerate_multiindices, enumerate_up_to, hermite, wick_product,
    CharacteristicSet, ChaosExpansion, MultiIndex, WickProduct,
};
pub use propagator::{
    positivity_certificate, solve_fundamental, solve_propagator, ChaosField, ExpPoly,
    FundamentalField, PositivityReport, SolveOptions,
};
pub use regularity::{
    additive_increment_curves, kolmogorov_exponent, space_increment_curve,
    time_increment_curve, Axis, IncrementCurve, KolmogorovReport, SlopeFit,
};
pub use simplex_integrals::{
    factorial_decay_bound, simplex_integral, truncation_tail_estimate, FactorialDecayReport,
    SimplexIntegralSpec, TailEstimate,
};
pub use spectral_basis::{
    heat_kernel, kernel_bounds_check, r_gamma_kernel, triple_product, CosineBasis, HeatKernel,
    KernelBoundsReport, KernelValue, SpectralFunction, TripleProductTable,
};
pub use stochastic_field::{
    exact_second_moment, exact_variance, lq_norm, sample_field, AdditiveSolution, FieldSampler,
    GaussianDraw, LqNormReport,
};

use thiserror::Error as ThisError;

/// Crate-wide error type.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("no characteristic set for order 0")]
    ZeroOrderCharacteristicSet,

    #[error("draw does not cover multi-index support (needs mode {needed}, draw has {available})")]
    DrawTooShort { needed: usize, available: usize },

    #[error("kernel requires positive time (got t = {0})")]
    NonPositiveTime(f64),

    #[error("kernel evaluation refused below the resolution floor {min_time} (got t = {t}); raise the truncation and lower the floor explicitly")]
    TimeBelowResolution { t: f64, min_time: f64 },

    #[error("kernel not square-integrable (gamma = {0} <= 1/2)")]
    KernelNotSquareIntegrable(f64),

    #[error("budget exceeded: solve would allocate {count} coefficient slots, cap is {cap}")]
    BudgetExceeded { count: usize, cap: usize },

    #[error("multi-index {alpha} outside truncation (order cap {order_cap}, noise modes {noise_modes})")]
    OutsideTruncation {
        alpha: String,
        order_cap: u32,
        noise_modes: usize,
    },

    #[error("{parameter} = {value} violates {bound}")]
    ParameterOutOfRange {
        parameter: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("need at least two orders to extrapolate")]
    TailNeedsTwoOrders,

    #[error("positivity certificate requires non-negative data (grid min = {0})")]
    NegativeInitialData(f64),

    #[error("lags must be positive and strictly decreasing")]
    BadLagGrid,

    #[error("lag leaves the interval: x + h = {0} outside (0, pi)")]
    LagOutsideInterval(f64),

    #[error("curve not in scaling regime (log10 residual {residual:.4} exceeds gate {gate})")]
    NotInScalingRegime { residual: f64, gate: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
