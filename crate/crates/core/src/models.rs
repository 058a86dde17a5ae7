//! Concrete model constructors: quintic OU, truncated one-factor Bergomi,
//! and Stein-Stein, all instances of σ_t = g0(t) p(X_t) with X an OU
//! process and dB = ρ dW + sqrt(1-ρ²) dW⊥.

use crate::error::{Error, Result};
use crate::oulaw::{expected_p_squared, ForwardVarianceCurve, OUParams};
use crate::powerseries::PowerSeries;
use crate::scalar::Scalar;

/// How g0 is defined.
#[derive(Debug, Clone, PartialEq)]
pub enum Normalization<T: Scalar> {
    /// g0(t) = sqrt(ξ0(t) / E[p²(X_t)]): the model matches the forward
    /// variance curve by construction.
    ForwardVariance,
    /// User-supplied bounded g0 as a piecewise-linear table (t, g0(t));
    /// constant extrapolation outside the knot range.
    RawTable { knots: Vec<(T, T)> },
}

/// Immutable model specification: OU driver, volatility series, leverage
/// correlation, forward-variance curve, normalization mode, and spot.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec<T: Scalar> {
    pub ou: OUParams<T>,
    pub p: PowerSeries<T>,
    pub rho: T,
    pub xi0: ForwardVarianceCurve<T>,
    pub normalization: Normalization<T>,
    pub spot: T,
}

impl<T: Scalar> ModelSpec<T> {
    /// Validate the cross-field invariants.
    pub fn validated(self) -> Result<Self> {
        if self.rho.abs() > T::one() {
            return Err(Error::invalid(format!("|rho| must be <= 1, got {}", self.rho)));
        }
        if !(self.spot > T::zero()) {
            return Err(Error::invalid(format!("spot must be > 0, got {}", self.spot)));
        }
        if self.p.is_zero() {
            return Err(Error::invalid("volatility series p must be nonzero"));
        }
        Ok(self)
    }

    /// g0(t) under the configured normalization.
    pub fn g0(&self, t: T) -> Result<T> {
        match &self.normalization {
            Normalization::ForwardVariance => {
                let xi = self.xi0.value(t);
                if xi < T::zero() {
                    return Err(Error::invalid(format!("xi0({t}) < 0")));
                }
                let ep2 = expected_p_squared(&self.ou, &self.p, t)?;
                if !(ep2 > T::zero()) {
                    return Err(Error::invalid(format!(
                        "E[p^2(X_t)] = {ep2} not positive at t = {t}"
                    )));
                }
                Ok((xi / ep2).sqrt())
            }
            Normalization::RawTable { knots } => Ok(interp_table(knots, t)),
        }
    }

    /// g0(t)^2, the quantity the Riccati forcing actually consumes.
    pub fn g0_squared(&self, t: T) -> Result<T> {
        match &self.normalization {
            Normalization::ForwardVariance => {
                let xi = self.xi0.value(t);
                let ep2 = expected_p_squared(&self.ou, &self.p, t)?;
                if !(ep2 > T::zero()) {
                    return Err(Error::invalid(format!(
                        "E[p^2(X_t)] = {ep2} not positive at t = {t}"
                    )));
                }
                Ok(xi / ep2)
            }
            Normalization::RawTable { .. } => {
                let g = self.g0(t)?;
                Ok(g * g)
            }
        }
    }

    /// E[σ_t²] = g0(t)² E[p²(X_t)] — equals ξ0(t) in normalized mode but is
    /// also well defined for raw-g0 models.
    pub fn expected_var(&self, t: T) -> Result<T> {
        let ep2 = expected_p_squared(&self.ou, &self.p, t)?;
        Ok(self.g0_squared(t)? * ep2)
    }

    /// ∫_0^T E[σ_t²] dt. Exact (curve integral) in normalized mode,
    /// 64-point Gauss-Legendre otherwise.
    pub fn expected_total_var(&self, horizon: T) -> Result<T> {
        match &self.normalization {
            Normalization::ForwardVariance => Ok(self.xi0.integral(horizon)),
            Normalization::RawTable { .. } => {
                let rule = crate::quadrature::gauss_legendre::<T>(64)?;
                let mut acc = T::zero();
                let half = T::of(0.5);
                for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let t = half * horizon * (x + T::one());
                    acc += w * self.expected_var(t)?;
                }
                Ok(acc * half * horizon)
            }
        }
    }
}

/// Quintic OU model: p(x) = p0 + p1 x + p3 x³ + p5 x⁵ with the fast-scale
/// OU driver b = α/ε, c = ε^α, a = 0, X_0 = 0 and forward-variance
/// normalization.
#[allow(clippy::too_many_arguments)]
pub fn quintic_ou<T: Scalar>(
    rho: T,
    alpha: T,
    eps: T,
    p0: T,
    p1: T,
    p3: T,
    p5: T,
    xi0: ForwardVarianceCurve<T>,
    spot: T,
) -> Result<ModelSpec<T>> {
    if !(eps > T::zero()) {
        return Err(Error::invalid(format!("eps must be > 0, got {eps}")));
    }
    if alpha > T::zero() {
        return Err(Error::invalid(format!("alpha must be <= 0, got {alpha}")));
    }
    for (name, v) in [("p0", p0), ("p1", p1), ("p3", p3), ("p5", p5)] {
        if v < T::zero() {
            return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
        }
    }
    let b = alpha / eps;
    // ε^α with α <= 0 via exp(α ln ε) — well defined for ε > 0.
    let c = (alpha * eps.ln()).exp();
    let ou = OUParams::new(T::zero(), b, c, T::zero())?;
    let p = PowerSeries::new(vec![p0, p1, T::zero(), p3, T::zero(), p5])?;
    ModelSpec {
        ou,
        p,
        rho,
        xi0,
        normalization: Normalization::ForwardVariance,
        spot,
    }
    .validated()
}

/// Truncated one-factor Bergomi: p_k = η^k / (2^k k!) for k = 0..N, same
/// OU driver as the quintic model, forward-variance normalization.
pub fn bergomi_truncated<T: Scalar>(
    rho: T,
    alpha: T,
    eps: T,
    eta: T,
    n: usize,
    xi0: ForwardVarianceCurve<T>,
    spot: T,
) -> Result<ModelSpec<T>> {
    if !(eps > T::zero()) {
        return Err(Error::invalid(format!("eps must be > 0, got {eps}")));
    }
    if n < 1 {
        return Err(Error::invalid("Bergomi truncation level N must be >= 1"));
    }
    if n > 32 {
        return Err(Error::invalid(
            "Bergomi truncation level N > 32 rejected (factorial underflow territory)",
        ));
    }
    let b = alpha / eps;
    let c = (alpha * eps.ln()).exp();
    let ou = OUParams::new(T::zero(), b, c, T::zero())?;
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut term = T::one(); // η^k / (2^k k!), k = 0
    coeffs.push(term);
    for k in 1..=n {
        term = term * eta / (T::of(2.0) * T::of(k as f64));
        coeffs.push(term);
    }
    let p = PowerSeries::new(coeffs)?;
    ModelSpec {
        ou,
        p,
        rho,
        xi0,
        normalization: Normalization::ForwardVariance,
        spot,
    }
    .validated()
}

/// Stein-Stein model: p(x) = x with a user-supplied bounded g0 table.
pub fn stein_stein<T: Scalar>(
    rho: T,
    a: T,
    b: T,
    c: T,
    x0: T,
    g0_table: Vec<(T, T)>,
    spot: T,
) -> Result<ModelSpec<T>> {
    let ou = OUParams::new(a, b, c, x0)?;
    let p = PowerSeries::new(vec![T::zero(), T::one()])?;
    if g0_table.is_empty() {
        return Err(Error::invalid("Stein-Stein g0 table must be nonempty"));
    }
    ModelSpec {
        ou,
        p,
        rho,
        // ξ0 is unused in raw mode; store a flat zero curve for completeness.
        xi0: ForwardVarianceCurve::flat(T::zero()),
        normalization: Normalization::RawTable { knots: g0_table },
        spot,
    }
    .validated()
}

fn interp_table<T: Scalar>(knots: &[(T, T)], t: T) -> T {
    match knots {
        [] => T::zero(),
        [(_, v)] => *v,
        _ => {
            if t <= knots[0].0 {
                return knots[0].1;
            }
            for w in knots.windows(2) {
                let (t0, v0) = w[0];
                let (t1, v1) = w[1];
                if t <= t1 {
                    if t1 == t0 {
                        return v1;
                    }
                    let lam = (t - t0) / (t1 - t0);
                    return v0 + lam * (v1 - v0);
                }
            }
            knots.last().unwrap().1
        }
    }
}
