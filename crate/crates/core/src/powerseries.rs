//! Truncated power-series algebra.
//!
//! The volatility function p(x) = Σ p_k x^k, its square p*p, and the
//! Romano-Touzi change-of-variables series are all plain coefficient
//! vectors; this module owns that arithmetic. Truncation is explicit at
//! every product: the Riccati solver treats all indices above its level M
//! as zero, and the same convention applies here.

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Scalar};

/// Dense truncated power series with real coefficients.
///
/// `coeffs[k]` is the coefficient of x^k; the degree is `coeffs.len() - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<T: Scalar> {
    coeffs: Vec<T>,
}

impl<T: Scalar> PowerSeries<T> {
    /// Build from a coefficient vector (index k = coefficient of x^k).
    ///
    /// Rejects empty and non-finite input: a series with NaN coefficients
    /// poisons everything downstream silently, so it is stopped here.
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("power series needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("power series coefficients must be finite"));
        }
        Ok(PowerSeries { coeffs })
    }

    /// Series from `f64` literals (convenience for constructors and tests).
    pub fn from_f64(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| T::of(c)).collect())
    }

    /// Constant series p(x) = c.
    pub fn constant(c: T) -> Self {
        PowerSeries { coeffs: vec![c] }
    }

    /// Coefficient of x^k (zero beyond the stored degree).
    #[inline]
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).copied().unwrap_or_else(T::zero)
    }

    /// Borrow the dense coefficient slice.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Degree (length of the coefficient vector minus one).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// True if every coefficient is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Cauchy product truncated to degree `trunc` (result length trunc+1,
    /// zero-padded if the exact product is shorter).
    pub fn convolve(&self, other: &Self, trunc: usize) -> Self {
        let mut out = vec![T::zero(); trunc + 1];
        for (l, &pl) in self.coeffs.iter().enumerate() {
            if l > trunc {
                break;
            }
            for (m, &qm) in other.coeffs.iter().enumerate() {
                let k = l + m;
                if k > trunc {
                    break;
                }
                out[k] += pl * qm;
            }
        }
        PowerSeries { coeffs: out }
    }

    /// Formal derivative: coefficient k of the result is (k+1) p_{k+1}.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return PowerSeries::constant(T::zero());
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &pk)| T::of(k as f64) * pk)
            .collect();
        PowerSeries { coeffs }
    }

    /// Formal antiderivative with zero constant term: coefficient k is
    /// p_{k-1}/k for k >= 1.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(T::zero());
        for (k, &pk) in self.coeffs.iter().enumerate() {
            coeffs.push(pk / T::of((k + 1) as f64));
        }
        PowerSeries { coeffs }
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, x: Cplx<T>) -> Cplx<T> {
        let mut acc = Cplx::new(T::zero(), T::zero());
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + Cplx::new(c, T::zero());
        }
        acc
    }

    /// Horner evaluation at a real point.
    pub fn eval_real(&self, x: T) -> T {
        let mut acc = T::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Multiply every coefficient by a real scalar.
    pub fn scale(&self, s: T) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// Coefficient-wise sum, sized to the longer operand.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        PowerSeries { coeffs }
    }

    /// Growth diagnostic (|p_k| (k-1)!!)^{1/k} for k = kmin..=degree, with
    /// (-1)!! = 0!! = 1. The volatility series must be "negligible to double
    /// factorial" for the model to be well posed; on truncated data this is
    /// a diagnostic sequence, not a certificate.
    pub fn double_factorial_diagnostic(&self, kmin: usize) -> Result<Vec<T>> {
        if kmin < 1 {
            return Err(Error::invalid("double-factorial diagnostic needs kmin >= 1"));
        }
        let mut out = Vec::new();
        // (k-1)!! grows fast; accumulate in log space for stability.
        let mut log_dfact = 0.0f64; // log((k-1)!!), starting at k=1: 0!! = 1
        for k in 1..=self.degree() {
            if k >= 2 {
                log_dfact += ((k - 1) as f64).ln();
            }
            if k >= kmin {
                let pk = self.coeff(k).as_f64().abs();
                let val = if pk == 0.0 {
                    0.0
                } else {
                    ((pk.ln() + log_dfact) / k as f64).exp()
                };
                out.push(T::of(val));
            }
        }
        Ok(out)
    }
}

/// The four series of the Romano-Touzi-style change of variables used by the
/// discretized (jump) Riccati system: p1 = p*p, p2 = r1, p3 = -r2, q = r2,
/// where r1(x) = -(1/c)((a+bx)p(x) + c^2 p'(x)/2) and r2 = (1/c) ∫ p.
#[derive(Debug, Clone)]
pub struct RomanoTouziSeries<T: Scalar> {
    pub p1: PowerSeries<T>,
    pub p2: PowerSeries<T>,
    pub p3: PowerSeries<T>,
    pub q: PowerSeries<T>,
}

/// Compute the change-of-variables series for drift a + bx and diffusion c.
///
/// All outputs are truncated to degree `trunc`.
pub fn romano_touzi_series<T: Scalar>(
    p: &PowerSeries<T>,
    a: T,
    b: T,
    c: T,
    trunc: usize,
) -> Result<RomanoTouziSeries<T>> {
    if c.is_zero() {
        return Err(Error::invalid("change of variables requires c != 0"));
    }
    let half = T::of(0.5);
    let dp = p.derivative();
    // (a + bx) p(x) = a p + b (x * p); shifting coefficients implements x*p.
    let mut xp = vec![T::zero(); p.degree() + 2];
    for k in 0..=p.degree() {
        xp[k + 1] = p.coeff(k);
    }
    let xp = PowerSeries::new(xp)?;
    let drift_p = p.scale(a).add(&xp.scale(b));
    let r1 = drift_p.add(&dp.scale(half * c * c)).scale(-c.recip());
    let r2 = p.antiderivative().scale(c.recip());

    let truncate = |s: &PowerSeries<T>| {
        let coeffs: Vec<T> = (0..=trunc).map(|k| s.coeff(k)).collect();
        PowerSeries { coeffs }
    };
    Ok(RomanoTouziSeries {
        p1: truncate(&p.convolve(p, trunc)),
        p2: truncate(&r1),
        p3: truncate(&r2.scale(-T::one())),
        q: truncate(&r2),
    })
}
