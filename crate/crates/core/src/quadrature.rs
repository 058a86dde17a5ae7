//! Gaussian quadrature rules: Legendre, Laguerre (weights folded with e^{+x}),
//! and Hermite (physicists' convention, weight e^{-x²}).
//!
//! Nodes are found by Newton iteration on stable recurrences. For Laguerre
//! the classical polynomials overflow long before n = 128, so the iteration
//! runs on the exponentially scaled functions ℓ_k(x) = L_k(x) e^{-x/2},
//! which satisfy the same three-term recurrence and stay O(1) on the node
//! range; the folded weights come out of the Christoffel sum
//! w_i e^{x_i} = 1 / Σ_k ℓ_k(x_i)² with no large intermediate at all.

use crate::error::{Error, Result};
use crate::scalar::{sc, Scalar};

/// Which classical rule a [`QuadratureRule`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    GaussLegendre,
    GaussLaguerre,
    GaussHermite,
}

/// Nodes and weights of an n-point rule.
///
/// Conventions: Legendre integrates ∫_{-1}^{1} f; Laguerre stores folded
/// weights so Σ w_i f(x_i) ≈ ∫_0^∞ f (the e^{-x} factor is absorbed);
/// Hermite integrates ∫_{-∞}^{∞} f(x) e^{-x²} dx.
#[derive(Debug, Clone)]
pub struct QuadratureRule<T: Scalar> {
    pub kind: QuadratureKind,
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ w_i f(x_i).
    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Substitute u = s·x: nodes become s·x_i and weights s·w_i. On a
    /// half-line rule this compresses (s < 1) or stretches (s > 1) the
    /// covered range, trading far-tail reach for node density — useful when
    /// the integrand is known to be negligible beyond a finite cutoff.
    pub fn scaled(&self, s: T) -> QuadratureRule<T> {
        QuadratureRule {
            kind: self.kind,
            nodes: self.nodes.iter().map(|&x| s * x).collect(),
            weights: self.weights.iter().map(|&w| s * w).collect(),
        }
    }
}

fn newton_tol<T: Scalar>() -> T {
    T::epsilon() * sc::<T>(50.0)
}

/// n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre<T: Scalar>(n: usize) -> Result<QuadratureRule<T>> {
    if n == 0 || n > 1024 {
        return Err(Error::invalid(format!("Legendre node count {n} out of range 1..=1024")));
    }
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let m = (n + 1) / 2;
    let nf = n as f64;
    for i in 0..m {
        // Tricomi-style initial guess, then Newton on P_n.
        let mut z = sc::<T>((std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos());
        for _ in 0..100 {
            let (pn, pn1) = legendre_pair(n, z);
            // P'_n(z) = n (z P_n - P_{n-1}) / (z² - 1)
            let pp = sc::<T>(nf) * (z * pn - pn1) / (z * z - T::one());
            let dz = pn / pp;
            z = z - dz;
            if dz.abs() <= newton_tol::<T>() * (T::one() + z.abs()) {
                break;
            }
        }
        let (pn, pn1) = legendre_pair(n, z);
        let pp = sc::<T>(nf) * (z * pn - pn1) / (z * z - T::one());
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = sc::<T>(2.0) / ((T::one() - z * z) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok(QuadratureRule {
        kind: QuadratureKind::GaussLegendre,
        nodes,
        weights,
    })
}

/// (P_n(z), P_{n-1}(z)) by upward recurrence.
fn legendre_pair<T: Scalar>(n: usize, z: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = z;
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 1..n {
        let kf = sc::<T>(k as f64);
        let two_k_plus_1 = sc::<T>((2 * k + 1) as f64);
        let p2 = (two_k_plus_1 * z * p1 - kf * p0) / sc::<T>((k + 1) as f64);
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// n-point Gauss-Laguerre rule with folded weights: Σ w_i f(x_i) ≈ ∫_0^∞ f.
pub fn gauss_laguerre<T: Scalar>(n: usize) -> Result<QuadratureRule<T>> {
    if n == 0 || n > 256 {
        return Err(Error::invalid(format!("Laguerre node count {n} out of range 1..=256")));
    }
    let nf = n as f64;
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let mut z = T::zero();
    let mut z_prev = T::zero();
    for i in 0..n {
        // Stroud-Secrest style initial guesses.
        let guess = if i == 0 {
            sc::<T>(3.0 / (1.0 + 2.4 * nf))
        } else if i == 1 {
            z + sc::<T>(15.0 / (1.0 + 2.5 * nf))
        } else {
            let step = sc::<T>((1.0 + 2.55 * (i as f64 - 1.0)) / (1.9 * (i as f64 - 1.0)));
            z + step * (z - z_prev)
        };
        z_prev = z;
        z = guess;
        for _ in 0..100 {
            let (ln, ln1) = scaled_laguerre_pair(n, z);
            // ℓ'_n = n(ℓ_n - ℓ_{n-1})/x - ℓ_n/2, same roots as L_n.
            let lp = sc::<T>(nf) * (ln - ln1) / z - ln * sc::<T>(0.5);
            let dz = ln / lp;
            z = z - dz;
            if dz.abs() <= newton_tol::<T>() * (T::one() + z.abs()) {
                break;
            }
        }
        nodes[i] = z;
        // Folded weight via the Christoffel sum on scaled functions.
        weights[i] = christoffel_laguerre(n, z).recip();
    }
    Ok(QuadratureRule {
        kind: QuadratureKind::GaussLaguerre,
        nodes,
        weights,
    })
}

/// (ℓ_n(z), ℓ_{n-1}(z)) with ℓ_k = L_k e^{-z/2}.
fn scaled_laguerre_pair<T: Scalar>(n: usize, z: T) -> (T, T) {
    let scale = (-z * sc::<T>(0.5)).exp();
    let mut l0 = scale;
    let mut l1 = (T::one() - z) * scale;
    if n == 0 {
        return (l0, T::zero());
    }
    for k in 1..n {
        let kf = sc::<T>(k as f64);
        let l2 = ((sc::<T>((2 * k + 1) as f64) - z) * l1 - kf * l0) / sc::<T>((k + 1) as f64);
        l0 = l1;
        l1 = l2;
    }
    (l1, l0)
}

/// Σ_{k=0}^{n-1} ℓ_k(z)² — reciprocal of the folded Gauss-Laguerre weight.
fn christoffel_laguerre<T: Scalar>(n: usize, z: T) -> T {
    let scale = (-z * sc::<T>(0.5)).exp();
    let mut l0 = scale;
    let mut l1 = (T::one() - z) * scale;
    let mut acc = l0 * l0;
    if n >= 2 {
        acc += l1 * l1;
        for k in 1..(n - 1) {
            let kf = sc::<T>(k as f64);
            let l2 =
                ((sc::<T>((2 * k + 1) as f64) - z) * l1 - kf * l0) / sc::<T>((k + 1) as f64);
            l0 = l1;
            l1 = l2;
            acc += l1 * l1;
        }
    }
    acc
}

/// n-point Gauss-Hermite rule (physicists'): Σ w_i f(x_i) ≈ ∫ f(x) e^{-x²} dx.
pub fn gauss_hermite<T: Scalar>(n: usize) -> Result<QuadratureRule<T>> {
    if n == 0 || n > 256 {
        return Err(Error::invalid(format!("Hermite node count {n} out of range 1..=256")));
    }
    let nf = n as f64;
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let m = (n + 1) / 2;
    let mut z = T::zero();
    let mut z_prev = T::zero();
    for i in 0..m {
        // Initial guesses for the descending positive roots.
        let guess = if i == 0 {
            sc::<T>((2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0))
        } else if i == 1 {
            z - sc::<T>(1.14 * nf.powf(0.426)) / z
        } else if i == 2 {
            sc::<T>(1.86) * z - sc::<T>(0.86) * z_prev
        } else if i == 3 {
            sc::<T>(1.91) * z - sc::<T>(0.91) * z_prev
        } else {
            sc::<T>(2.0) * z - z_prev
        };
        z_prev = z;
        z = guess;
        for _ in 0..100 {
            let (hn, hn1) = hermite_orthonormal_pair(n, z);
            // h̃'_n = sqrt(2n) h̃_{n-1}
            let hp = sc::<T>((2.0 * nf).sqrt()) * hn1;
            let dz = hn / hp;
            z = z - dz;
            if dz.abs() <= newton_tol::<T>() * (T::one() + z.abs()) {
                break;
            }
        }
        // Christoffel sum over orthonormal h̃_0..h̃_{n-1}.
        let w = christoffel_hermite(n, z).recip();
        nodes[i] = z;
        weights[i] = w;
        nodes[n - 1 - i] = -z;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // Odd rule: central node exactly at zero.
        nodes[m - 1] = T::zero();
        weights[m - 1] = christoffel_hermite(n, T::zero()).recip();
    }
    // Ascending node order.
    nodes.reverse();
    weights.reverse();
    Ok(QuadratureRule {
        kind: QuadratureKind::GaussHermite,
        nodes,
        weights,
    })
}

/// (h̃_n(z), h̃_{n-1}(z)) for orthonormal Hermite functions w.r.t. e^{-x²}.
fn hermite_orthonormal_pair<T: Scalar>(n: usize, z: T) -> (T, T) {
    let pi_m4 = sc::<T>(std::f64::consts::PI.powf(-0.25));
    let mut h0 = pi_m4;
    let mut h1 = sc::<T>(std::f64::consts::SQRT_2) * z * pi_m4;
    if n == 0 {
        return (h0, T::zero());
    }
    for k in 1..n {
        let kf = k as f64;
        let h2 = z * sc::<T>((2.0 / (kf + 1.0)).sqrt()) * h1
            - sc::<T>((kf / (kf + 1.0)).sqrt()) * h0;
        h0 = h1;
        h1 = h2;
    }
    (h1, h0)
}

/// Σ_{k=0}^{n-1} h̃_k(z)².
fn christoffel_hermite<T: Scalar>(n: usize, z: T) -> T {
    let pi_m4 = sc::<T>(std::f64::consts::PI.powf(-0.25));
    let mut h0 = pi_m4;
    let mut h1 = sc::<T>(std::f64::consts::SQRT_2) * z * pi_m4;
    let mut acc = h0 * h0;
    if n >= 2 {
        acc += h1 * h1;
        for k in 1..(n - 1) {
            let kf = k as f64;
            let h2 = z * sc::<T>((2.0 / (kf + 1.0)).sqrt()) * h1
                - sc::<T>((kf / (kf + 1.0)).sqrt()) * h0;
            h0 = h1;
            h1 = h2;
            acc += h1 * h1;
        }
    }
    acc
}
