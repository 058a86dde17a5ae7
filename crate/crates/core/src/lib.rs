//! Pricing and calibration engine for polynomial Ornstein-Uhlenbeck
//! stochastic volatility models.
//!
//! The volatility process is σ_t = g₀(t)·p(X_t) with p a (truncated) power
//! series and X an Ornstein-Uhlenbeck process; g₀ normalizes the spot
//! variance to a forward variance curve ξ₀. Fourier-Laplace transforms of
//! the log price and integrated variance satisfy an infinite-dimensional
//! complex Riccati system, truncated and solved here by a quasi-implicit
//! scheme; on top sit Lewis-formula vanilla pricing with a Heston control
//! variate, Laplace-inversion volatility swaps, VIX futures and options by
//! Gaussian quadrature, Monte Carlo oracles, and Nelder-Mead calibration.
//!
//! All numerics are generic over the floating scalar (f32/f64) through the
//! [`scalar::Scalar`] trait; the type aliases at the crate root fix f64,
//! which every shipped binary uses.

pub mod calibration;
pub mod error;
pub mod linalg;
pub mod models;
pub mod montecarlo;
pub mod neldermead;
pub mod oulaw;
pub mod powerseries;
pub mod pricing;
pub mod quadrature;
pub mod riccati;
pub mod scalar;
pub mod transforms;
pub mod validation;
pub mod vix;

pub use error::{Error, Result};

/// f64 power series.
pub type PowerSeries = powerseries::PowerSeries<f64>;
/// f64 OU parameters.
pub type OUParams = oulaw::OUParams<f64>;
/// f64 forward variance curve.
pub type ForwardVarianceCurve = oulaw::ForwardVarianceCurve<f64>;
/// f64 model specification.
pub type ModelSpec = models::ModelSpec<f64>;
/// f64 Riccati configuration.
pub type RiccatiConfig = riccati::RiccatiConfig<f64>;
/// f64 Riccati solution.
pub type RiccatiSolution = riccati::RiccatiSolution<f64>;
/// f64 Heston parameters.
pub type HestonParams = pricing::HestonParams<f64>;
/// f64 quadrature rule.
pub type QuadratureRule = quadrature::QuadratureRule<f64>;
/// f64 complex number.
pub type Cplx = num_complex::Complex<f64>;
