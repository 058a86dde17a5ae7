//! Exact Gaussian law of the Ornstein-Uhlenbeck driver and the moment
//! machinery behind the forward-variance normalization g0 and the VIX
//! conditioning.

use crate::error::{Error, Result};
use crate::powerseries::PowerSeries;
use crate::scalar::Scalar;

/// Threshold below which |b t| is treated as zero and the b -> 0 limits of
/// the OU mean/variance formulas are used instead (avoids catastrophic
/// cancellation in (e^{bt}-1)/b).
const B_SMALL: f64 = 1e-8;

/// Parameters of dX_t = (a + b X_t) dt + c dW_t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OUParams<T: Scalar> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub x0: T,
}

impl<T: Scalar> OUParams<T> {
    pub fn new(a: T, b: T, c: T, x0: T) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c), ("x0", x0)] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("OU parameter {name} must be finite")));
            }
        }
        if c.is_zero() {
            return Err(Error::invalid("OU diffusion coefficient c must be nonzero"));
        }
        Ok(OUParams { a, b, c, x0 })
    }

    /// Mean and variance of X_t given X_0 = x0.
    ///
    /// mean = e^{bt} x0 + a (e^{bt}-1)/b, var = c^2 (e^{2bt}-1)/(2b), with
    /// the stable b -> 0 limits mean = x0 + a t, var = c^2 t.
    pub fn mean_var(&self, t: T) -> (T, T) {
        self.conditional_law(T::zero(), t, self.x0)
    }

    /// Law of X_t given X_s = y for s <= t (Gaussian; variance is
    /// independent of y).
    pub fn conditional_law(&self, s: T, t: T, y: T) -> (T, T) {
        let dt = t - s;
        let b = self.b;
        if (b * dt).abs() < T::of(B_SMALL) {
            // Brownian-with-drift limit.
            let mean = y + self.a * dt;
            let var = self.c * self.c * dt;
            return (mean, var);
        }
        let ebt = (b * dt).exp();
        let mean = ebt * y + self.a * (ebt - T::one()) / b;
        let e2bt = (T::of(2.0) * b * dt).exp();
        let var = self.c * self.c * (e2bt - T::one()) / (T::of(2.0) * b);
        (mean, var)
    }
}

/// Raw moments M_0..M_n of a Gaussian with the given mean and variance,
/// via the recursion M_k = mean*M_{k-1} + (k-1)*var*M_{k-2}.
pub fn gaussian_moments<T: Scalar>(mean: T, var: T, n: usize) -> Result<Vec<T>> {
    if var < T::zero() {
        return Err(Error::invalid(format!(
            "gaussian_moments needs var >= 0, got {var}"
        )));
    }
    let mut m = Vec::with_capacity(n + 1);
    m.push(T::one());
    if n >= 1 {
        m.push(mean);
    }
    for k in 2..=n {
        let mk = mean * m[k - 1] + T::of((k - 1) as f64) * var * m[k - 2];
        m.push(mk);
    }
    Ok(m)
}

/// Term structure of forward variance ξ0(t) = E[σ_t^2].
#[derive(Debug, Clone, PartialEq)]
pub enum ForwardVarianceCurve<T: Scalar> {
    /// Constant level (variance units).
    Flat { level: T },
    /// ξ0(t) = v0 e^{-k t} + vinf (1 - e^{-k t}).
    Parametric { v0: T, k: T, vinf: T },
    /// Right-continuous step function through the given knots
    /// (t_i, v_i); before the first knot the first value applies.
    Piecewise { knots: Vec<(T, T)> },
}

impl<T: Scalar> ForwardVarianceCurve<T> {
    pub fn flat(level: T) -> Self {
        ForwardVarianceCurve::Flat { level }
    }

    /// Point evaluation ξ0(t).
    pub fn value(&self, t: T) -> T {
        match self {
            ForwardVarianceCurve::Flat { level } => *level,
            ForwardVarianceCurve::Parametric { v0, k, vinf } => {
                let decay = (-*k * t).exp();
                *v0 * decay + *vinf * (T::one() - decay)
            }
            ForwardVarianceCurve::Piecewise { knots } => {
                let mut v = knots.first().map(|&(_, v)| v).unwrap_or_else(T::zero);
                for &(ti, vi) in knots {
                    if t >= ti {
                        v = vi;
                    } else {
                        break;
                    }
                }
                v
            }
        }
    }

    /// Exact ∫_0^T ξ0(t) dt per curve kind.
    pub fn integral(&self, horizon: T) -> T {
        match self {
            ForwardVarianceCurve::Flat { level } => *level * horizon,
            ForwardVarianceCurve::Parametric { v0, k, vinf } => {
                if k.abs() < T::of(B_SMALL) {
                    return *v0 * horizon;
                }
                let decay = (T::one() - (-*k * horizon).exp()) / *k;
                *vinf * horizon + (*v0 - *vinf) * decay
            }
            ForwardVarianceCurve::Piecewise { knots } => {
                if knots.is_empty() {
                    return T::zero();
                }
                let mut acc = T::zero();
                let mut prev_t = T::zero();
                let mut prev_v = knots[0].1;
                for &(ti, vi) in knots {
                    if ti >= horizon {
                        break;
                    }
                    if ti > prev_t {
                        acc += prev_v * (ti - prev_t);
                        prev_t = ti;
                    }
                    prev_v = vi;
                }
                acc + prev_v * (horizon - prev_t)
            }
        }
    }

    /// Validate nonnegativity of the curve on [0, horizon] (sampled).
    pub fn validate(&self, horizon: T) -> Result<()> {
        let n = 64;
        for i in 0..=n {
            let t = horizon * T::of(i as f64 / n as f64);
            if self.value(t) < T::zero() {
                return Err(Error::invalid(format!(
                    "forward variance curve negative at t = {t}"
                )));
            }
        }
        Ok(())
    }
}

/// E[p^2(X_t)] under the exact OU law at time t: Σ_k (p*p)_k M_k with M the
/// Gaussian raw moments. Exact for polynomial p (no quadrature involved).
pub fn expected_p_squared<T: Scalar>(
    ou: &OUParams<T>,
    p: &PowerSeries<T>,
    t: T,
) -> Result<T> {
    let psq = p.convolve(p, 2 * p.degree());
    expected_series(ou, &psq, t)
}

/// E[s(X_t)] for an arbitrary truncated series s under the OU law at t.
pub fn expected_series<T: Scalar>(ou: &OUParams<T>, s: &PowerSeries<T>, t: T) -> Result<T> {
    let (mean, var) = ou.mean_var(t);
    let moments = gaussian_moments(mean, var, s.degree())?;
    let mut acc = T::zero();
    for (k, m) in moments.iter().enumerate() {
        acc += s.coeff(k) * *m;
    }
    Ok(acc)
}
