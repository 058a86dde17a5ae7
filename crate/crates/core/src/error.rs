//! Crate-wide error type.
//!
//! Numerical failure is a first-class outcome here: the truncated Riccati
//! system can blow up, quadrature can break price bounds, and implied-vol
//! inversion can be handed an out-of-bracket price. All of these surface as
//! typed errors carrying enough context to localize the failure.

use thiserror::Error;

/// Everything that can go wrong inside the engine.
#[derive(Debug, Error)]
pub enum Error {
    /// The Riccati step matrix J lost invertibility (pivot below threshold).
    #[error("singular step matrix at time step {step} (|pivot| = {pivot:.3e} < {threshold:.3e})")]
    SingularStep {
        step: usize,
        pivot: f64,
        threshold: f64,
    },

    /// A solver state turned NaN/Inf — the truncated system blew up.
    #[error("non-finite Riccati state at time step {step} of {total} (tau = {tau:.6})")]
    NonFinite { step: usize, total: usize, tau: f64 },

    /// exp(Σ ψ_k x^k) would overflow.
    #[error("characteristic functional overflow: Re(exponent) = {re_exponent:.3e} > 700")]
    Overflow { re_exponent: f64 },

    /// A quantity that must be real carries a non-negligible imaginary part.
    #[error("non-real result: |Im| = {imag:.3e} exceeds tolerance {tol:.1e}")]
    NonReal { imag: f64, tol: f64 },

    /// A characteristic-function value broke its a-priori modulus bound
    /// (|phi| <= 1 on the strip Im(u) in [-1, 0]); the truncated system
    /// has left its domain of validity even though the value is finite.
    #[error("characteristic function modulus {modulus:.3e} exceeds its bound 1 at u = {u_re:.6}")]
    ModulusBound { u_re: f64, modulus: f64 },

    /// A call price left the static no-arbitrage corridor (S-K)^+ <= C <= S.
    #[error(
        "price bounds violated: C = {price:.6e} outside [{lower:.6e}, {upper:.6e}] \
         for strike {strike} at maturity {maturity}"
    )]
    BoundsViolated {
        price: f64,
        lower: f64,
        upper: f64,
        strike: f64,
        maturity: f64,
    },

    /// VIX^2 evaluated negative beyond tolerance at a quadrature node.
    #[error("negative VIX^2 = {value:.3e} at quadrature node y = {node:.4} (tolerance -1e-12)")]
    NegativeVariance { node: f64, value: f64 },

    /// Implied-vol inversion given a price outside ((S-K)^+, S).
    #[error("implied vol out of bounds: price {price:.6e} not inside ({lower:.6e}, {upper:.6e})")]
    OutOfBounds {
        price: f64,
        lower: f64,
        upper: f64,
    },

    /// Control-variate fit failed; callers fall back to plain pricing.
    #[error("control variate fit failed: {reason}")]
    FitFailed { reason: String },

    /// Calibration hit its evaluation budget before the simplex collapsed.
    #[error("calibration did not converge: {evals} evaluations, simplex diameter {diameter:.3e}")]
    NotConverged { evals: usize, diameter: f64 },

    /// Structurally invalid input (bad parameters, malformed quotes, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A batch evaluation failed at one node; carries the failing argument.
    #[error("batch node {index} (u = {u_re:.6}{u_im:+.6}i) failed: {source}")]
    BatchNode {
        index: usize,
        u_re: f64,
        u_im: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Convenience constructor for [`Error::InvalidInput`].
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
