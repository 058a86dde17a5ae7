//! VIX futures and options by one-dimensional Gaussian quadrature over the
//! terminal factor X_T.
//!
//! VIX²(y) = (1/Δ) ∫_T^{T+Δ} g₀²(t) · E[p²(X_t) | X_T = y] dt. Given
//! X_T = y, each later X_t is Gaussian with mean affine in y and a variance
//! independent of y, so the conditional expectation of the polynomial p² is
//! itself a polynomial in y via the Gaussian moment recursion; the time
//! integral is evaluated coefficient-wise by Gauss-Legendre. Futures and
//! options then reduce to integrals of functions of √VIX²(y) against the
//! exact Gaussian law of X_T, evaluated by Gauss-Hermite.

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::quadrature::{gauss_legendre, QuadratureRule};
use crate::scalar::{sc, Scalar};

/// Standard VIX window: 30 calendar days.
pub fn default_delta<T: Scalar>() -> T {
    sc::<T>(30.0) / sc::<T>(365.0)
}

/// Gauss-Legendre node count for the window integral.
const TIME_NODES: usize = 64;

/// Tolerance on negative VIX² values at quadrature nodes: anything below
/// −1e−12 (variance units) is a genuine violation, not roundoff.
const NEG_VAR_TOL: f64 = -1e-12;

/// VIX² as a real polynomial in y = X_T (variance units), with its window.
#[derive(Debug, Clone)]
pub struct VixSquaredPoly<T: Scalar> {
    /// Coefficients of VIX²(y), ascending powers of y.
    pub coeffs: Vec<T>,
    /// Futures maturity T.
    pub t: T,
    /// VIX window Δ.
    pub delta: T,
}

impl<T: Scalar> VixSquaredPoly<T> {
    /// Evaluate VIX²(y) by Horner's rule.
    pub fn eval(&self, y: T) -> T {
        let mut acc = T::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * y + c;
        }
        acc
    }
}

/// Gaussian raw moments M_0..M_n as polynomials in y for a mean affine in
/// y (mean = a + b·y) and variance v, via the moment recursion
/// M_k = mean·M_{k−1} + (k−1)·v·M_{k−2} carried out on coefficient vectors.
fn moment_polys<T: Scalar>(a: T, b: T, v: T, n: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    out.push(vec![T::one()]);
    if n == 0 {
        return out;
    }
    out.push(vec![a, b]);
    for k in 2..=n {
        let mut next = vec![T::zero(); k + 1];
        for (i, &c) in out[k - 1].iter().enumerate() {
            next[i] += a * c;
            next[i + 1] += b * c;
        }
        let kv = sc::<T>((k - 1) as f64) * v;
        for (i, &c) in out[k - 2].iter().enumerate() {
            next[i] += kv * c;
        }
        out.push(next);
    }
    out
}

/// Build the VIX² polynomial for the given futures maturity and window.
pub fn vix_squared_poly<T: Scalar>(
    model: &ModelSpec<T>,
    t: T,
    delta: T,
) -> Result<VixSquaredPoly<T>> {
    if !(t > T::zero()) || !(delta > T::zero()) {
        return Err(Error::invalid("VIX maturity and window must be > 0"));
    }
    let deg2 = 2 * model.p.degree();
    let q = model.p.convolve(&model.p, deg2 + 1);
    let leg = gauss_legendre::<T>(TIME_NODES)?;
    let half = sc::<T>(0.5);
    let mut coeffs = vec![T::zero(); deg2 + 1];
    for (&x, &w) in leg.nodes.iter().zip(&leg.weights) {
        let tt = t + delta * half * (x + T::one());
        let wt = w * half; // affine map factor delta/2 cancels against 1/delta
        let g2 = model.g0_squared(tt)?;
        let (a0, v) = model.ou.conditional_law(t, tt, T::zero());
        let (a1, _) = model.ou.conditional_law(t, tt, T::one());
        let slope = a1 - a0;
        let mp = moment_polys(a0, slope, v, deg2);
        for k in 0..=deg2 {
            let qk = q.coeff(k);
            if qk == T::zero() {
                continue;
            }
            let f = wt * g2 * qk;
            for (i, &c) in mp[k].iter().enumerate() {
                coeffs[i] += f * c;
            }
        }
    }
    Ok(VixSquaredPoly { coeffs, t, delta })
}

/// √VIX²(y) and normalized weight at each Gauss-Hermite node of the exact
/// law of X_T.
fn vix_nodes<T: Scalar>(
    model: &ModelSpec<T>,
    poly: &VixSquaredPoly<T>,
    quad: &QuadratureRule<T>,
) -> Result<Vec<(T, T)>> {
    let (mean, var) = model.ou.mean_var(poly.t);
    let sd = var.max(T::zero()).sqrt();
    let sqrt2 = sc::<T>(2.0).sqrt();
    let inv_sqrt_pi = T::one() / sc::<T>(std::f64::consts::PI).sqrt();
    let mut out = Vec::with_capacity(quad.nodes.len());
    for (&x, &w) in quad.nodes.iter().zip(&quad.weights) {
        let y = mean + sqrt2 * sd * x;
        let v2 = poly.eval(y);
        if v2.as_f64() < NEG_VAR_TOL {
            return Err(Error::NegativeVariance {
                node: y.as_f64(),
                value: v2.as_f64(),
            });
        }
        out.push((v2.max(T::zero()).sqrt(), w * inv_sqrt_pi));
    }
    Ok(out)
}

/// VIX futures price E[√VIX²(X_T)].
pub fn vix_future<T: Scalar>(
    model: &ModelSpec<T>,
    t: T,
    delta: T,
    quad: &QuadratureRule<T>,
) -> Result<T> {
    let poly = vix_squared_poly(model, t, delta)?;
    let mut acc = T::zero();
    for (vix, w) in vix_nodes(model, &poly, quad)? {
        acc += w * vix;
    }
    Ok(acc)
}

/// VIX call option price E[(√VIX²(X_T) − K)⁺], undiscounted.
pub fn vix_option<T: Scalar>(
    model: &ModelSpec<T>,
    t: T,
    delta: T,
    k: T,
    quad: &QuadratureRule<T>,
) -> Result<T> {
    if k < T::zero() {
        return Err(Error::invalid("VIX option strike must be >= 0"));
    }
    let poly = vix_squared_poly(model, t, delta)?;
    let mut acc = T::zero();
    for (vix, w) in vix_nodes(model, &poly, quad)? {
        acc += w * (vix - k).max(T::zero());
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::oulaw::ForwardVarianceCurve;
    use crate::quadrature::gauss_hermite;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn quintic() -> ModelSpec<f64> {
        models::quintic_ou(
            -0.65,
            -0.6,
            1.0 / 52.0,
            0.01,
            1.0,
            0.214,
            0.227,
            ForwardVarianceCurve::flat(0.025),
            100.0,
        )
        .unwrap()
    }

    /// Deterministic vol (p ≡ 1): VIX² is the flat forward variance and the
    /// future is its square root, independent of y.
    #[test]
    fn deterministic_vol_flat_curve() {
        let model = models::ModelSpec {
            ou: crate::oulaw::OUParams::new(0.0, -1.0, 1.0, 0.0).unwrap(),
            p: crate::powerseries::PowerSeries::from_f64(&[1.0]).unwrap(),
            rho: 0.0,
            xi0: ForwardVarianceCurve::flat(0.025),
            normalization: models::Normalization::ForwardVariance,
            spot: 100.0,
        }
        .validated()
        .unwrap();
        let poly = vix_squared_poly(&model, 1.0 / 12.0, default_delta()).unwrap();
        assert_abs_diff_eq!(poly.eval(0.0), 0.025, epsilon = 1e-12);
        assert_abs_diff_eq!(poly.eval(2.5), 0.025, epsilon = 1e-12);
        let h = gauss_hermite::<f64>(64).unwrap();
        let fut = vix_future(&model, 1.0 / 12.0, default_delta(), &h).unwrap();
        assert_abs_diff_eq!(fut, 0.025f64.sqrt(), epsilon = 1e-12);
        // 0.158114 to the printed precision
        assert_abs_diff_eq!(fut, 0.158114, epsilon = 5e-7);
    }

    /// Jensen: E[√VIX²] ≤ √E[VIX²], and E[VIX²] is the window-averaged
    /// forward variance by the normalization identity.
    #[test]
    fn future_respects_jensen_bound() {
        let model = quintic();
        let t = 1.0 / 12.0;
        let h = gauss_hermite::<f64>(64).unwrap();
        let fut = vix_future(&model, t, default_delta(), &h).unwrap();
        assert!(fut > 0.0);
        assert!(fut <= 0.025f64.sqrt() + 1e-8);
    }

    /// The VIX² polynomial is nonnegative out to 8 standard deviations of
    /// X_T and the future lies inside the node-range envelope of √VIX².
    #[test]
    fn poly_nonnegative_and_future_in_envelope() {
        let model = quintic();
        let t = 1.0 / 12.0;
        let poly = vix_squared_poly(&model, t, default_delta()).unwrap();
        let (mean, var) = model.ou.mean_var(t);
        let sd = var.sqrt();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=400 {
            let y = mean + sd * (-8.0 + 16.0 * i as f64 / 400.0);
            let v2 = poly.eval(y);
            assert!(v2 >= 0.0, "VIX²({y}) = {v2} < 0");
            lo = lo.min(v2.sqrt());
            hi = hi.max(v2.sqrt());
        }
        let h = gauss_hermite::<f64>(64).unwrap();
        let fut = vix_future(&model, t, default_delta(), &h).unwrap();
        assert!(lo <= fut && fut <= hi);
    }

    /// K = 0 reduces the option to the future; prices are non-increasing and
    /// convex in K and vanish for far strikes.
    #[test]
    fn option_strike_structure() {
        let model = quintic();
        let t = 1.0 / 12.0;
        let h = gauss_hermite::<f64>(64).unwrap();
        let fut = vix_future(&model, t, default_delta(), &h).unwrap();
        let at0 = vix_option(&model, t, default_delta(), 0.0, &h).unwrap();
        assert_abs_diff_eq!(at0, fut, epsilon = 1e-14);
        let ks: Vec<f64> = (0..30).map(|i| 0.02 + 0.01 * i as f64).collect();
        let ps: Vec<f64> = ks
            .iter()
            .map(|&k| vix_option(&model, t, default_delta(), k, &h).unwrap())
            .collect();
        for w in ps.windows(2) {
            assert!(w[1] <= w[0] + 1e-14);
        }
        for w in ps.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-12);
        }
        // Quintic vol gives VIX ~ |y|^5 in the far tail, so the decay in K
        // has a Gaussian argument of only K^{1/5}: the limit needs a strike
        // far beyond any market level before it is numerically dead.
        let mid = vix_option(&model, t, default_delta(), 5.0, &h).unwrap();
        let far = vix_option(&model, t, default_delta(), 50.0, &h).unwrap();
        assert!(mid < 1e-6);
        assert!(far < mid);
        assert!(far < 1e-10);
    }

    /// Hermite refinement 64 → 96 leaves the future unchanged to 1e−8.
    #[test]
    fn hermite_refinement() {
        let model = quintic();
        let t = 1.0 / 12.0;
        let h64 = gauss_hermite::<f64>(64).unwrap();
        let h96 = gauss_hermite::<f64>(96).unwrap();
        let f64_ = vix_future(&model, t, default_delta(), &h64).unwrap();
        let f96 = vix_future(&model, t, default_delta(), &h96).unwrap();
        assert!((f64_ - f96).abs() < 1e-8);
    }

    /// Conditioned Monte Carlo oracle: given X_T = y the later factor path
    /// is an OU started at y, so (1/Δ)∫ g₀² E[p²(X_t)|X_T=y] dt can be
    /// estimated by exact-transition simulation from y. The polynomial must
    /// sit inside the MC confidence band.
    #[test]
    fn conditioned_mc_oracle() {
        let model = quintic();
        let t = 1.0 / 12.0;
        let delta = default_delta();
        let poly = vix_squared_poly(&model, t, delta).unwrap();
        for &y in &[0.0f64, 1.0, -2.0] {
            let steps = 64usize;
            let paths = 20_000usize;
            let dt = delta / steps as f64;
            let mut rng = ChaCha8Rng::seed_from_u64(90210 + y.abs() as u64);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..paths {
                let mut x = y;
                let mut acc = 0.0;
                for i in 0..steps {
                    // left-point rectangle on g0² p²(X); exact OU update
                    let tt = t + i as f64 * dt;
                    let g2 = model.g0_squared(tt).unwrap();
                    let p = model.p.eval_real(x);
                    acc += g2 * p * p * dt;
                    let (m, v) = model.ou.conditional_law(tt, tt + dt, x);
                    let z: f64 = StandardNormal.sample(&mut rng);
                    x = m + v.sqrt() * z;
                }
                let est = acc / delta;
                sum += est;
                sumsq += est * est;
            }
            let mean = sum / paths as f64;
            let var = (sumsq - sum * sum / paths as f64) / (paths as f64 - 1.0);
            let se = (var / paths as f64).sqrt();
            let exact = poly.eval(y);
            // 4 se plus a small allowance for the rectangle-rule time bias
            assert!(
                (exact - mean).abs() < 4.0 * se + 2e-4,
                "y={y}: poly {exact} vs MC {mean} ± {se}"
            );
        }
    }
}
