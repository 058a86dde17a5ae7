//! Monte Carlo simulation of the terminal state (log return, integrated
//! variance, driver endpoint) under σ_t = g0(t) p(X_t) dynamics.
//!
//! Scheme: the OU driver steps with its exact Gaussian transition, drawn
//! jointly with the Brownian increment ΔW that drives the price (the OU
//! innovation is regressed on ΔW and the residual drawn independently, so
//! the pair (X, W) is exact). The log price uses left-point Euler:
//! Δlog S = −½σ²Δ + σ(ρ ΔW + √(1−ρ²) ΔW⊥), and the integrated variance
//! accumulates σ²Δ on the same left endpoints.
//!
//! Reproducibility: path pairs are numbered, and pair i draws from the
//! ChaCha stream i of a fixed seed. Results are bit-identical for any
//! thread count, and antithetic legs reuse the same normals with flipped
//! signs. All normals are drawn in f64 and converted, so the draw sequence
//! does not depend on the scalar type either.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::oulaw::{ForwardVarianceCurve, OUParams};
use crate::scalar::{sc, Scalar};

/// Path-generation settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    /// Total path count. With antithetic sampling this must be even; the
    /// estimators then average `paths / 2` independent pairs.
    pub paths: usize,
    /// Time steps per year; a maturity T uses ceil(steps_per_year · T)
    /// steps (at least one).
    pub steps_per_year: usize,
    /// Seed for the ChaCha substream family.
    pub seed: u64,
    /// Mirror every path's normals into a second, antithetic path.
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            paths: 100_000,
            steps_per_year: 2000,
            seed: 4242,
            antithetic: true,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.paths < 2 {
            return Err(Error::invalid("need at least 2 paths"));
        }
        if self.antithetic && self.paths % 2 != 0 {
            return Err(Error::invalid("antithetic sampling needs an even path count"));
        }
        if self.steps_per_year == 0 {
            return Err(Error::invalid("steps_per_year must be >= 1"));
        }
        Ok(())
    }

    fn n_steps<T: Scalar>(&self, t: T) -> usize {
        let raw = (sc::<T>(self.steps_per_year as f64) * t).ceil().as_f64() as usize;
        raw.max(1)
    }
}

/// A point estimate with its standard error (over independent pairs).
#[derive(Debug, Clone, Copy)]
pub struct McEstimate<T: Scalar> {
    pub value: T,
    pub stderr: T,
}

impl<T: Scalar> McEstimate<T> {
    /// 95% confidence interval `value ± 1.96 stderr`.
    pub fn ci95(&self) -> (T, T) {
        let half = sc::<T>(1.96) * self.stderr;
        (self.value - half, self.value + half)
    }
}

/// Terminal simulation output, one entry per path. Antithetic partners sit
/// at indices 2i and 2i+1.
#[derive(Debug, Clone)]
pub struct McTerminal<T: Scalar> {
    pub log_return: Vec<T>,
    pub integrated_var: Vec<T>,
    pub x_terminal: Vec<T>,
    /// 2 when antithetic, 1 otherwise; estimators average this many
    /// consecutive paths into one independent observation.
    pub paths_per_pair: usize,
}

impl<T: Scalar> McTerminal<T> {
    fn estimate(&self, mut payoff: impl FnMut(usize) -> T) -> McEstimate<T> {
        let ppp = self.paths_per_pair;
        let n_pairs = self.log_return.len() / ppp;
        let mut sum = T::zero();
        let mut sum_sq = T::zero();
        for pair in 0..n_pairs {
            let mut acc = T::zero();
            for leg in 0..ppp {
                acc += payoff(pair * ppp + leg);
            }
            let obs = acc / sc::<T>(ppp as f64);
            sum += obs;
            sum_sq += obs * obs;
        }
        let n = sc::<T>(n_pairs as f64);
        let mean = sum / n;
        let var = ((sum_sq / n - mean * mean) * n / (n - T::one())).max(T::zero());
        McEstimate {
            value: mean,
            stderr: (var / n).sqrt(),
        }
    }

    /// Undiscounted call price estimate for the given spot and strike.
    pub fn call_price(&self, spot: T, strike: T) -> McEstimate<T> {
        self.estimate(|i| (spot * self.log_return[i].exp() - strike).max(T::zero()))
    }

    /// Volatility-swap strike estimate E[√(V_T / T)].
    pub fn vol_swap_rate(&self, t: T) -> McEstimate<T> {
        self.estimate(|i| (self.integrated_var[i] / t).sqrt())
    }

    /// Sample mean of e^{log return} — should sit near 1 (martingale).
    pub fn martingale_check(&self) -> McEstimate<T> {
        self.estimate(|i| self.log_return[i].exp())
    }
}

/// Exact-transition constants for one OU step of width `dt`, with the
/// innovation split into its ΔW regression and an orthogonal residual.
struct StepLaw<T: Scalar> {
    ebd: T,     // e^{bΔ}
    drift: T,   // a (e^{bΔ} − 1)/b
    beta_w: T,  // Cov(I, ΔW)/Δ, I = ∫ e^{b(Δ−s)} dW_s
    s_perp: T,  // √(Var I − Cov²/Δ)
    sqrt_dt: T,
}

impl<T: Scalar> StepLaw<T> {
    fn new(ou: &OUParams<T>, dt: T) -> Self {
        let b = ou.b;
        let (ebd, em1_over_b, v_i) = if b.abs() > sc::<T>(1e-14) {
            let e = (b * dt).exp();
            ((e), (e - T::one()) / b, ((b * dt * sc::<T>(2.0)).exp() - T::one()) / (b + b))
        } else {
            (T::one(), dt, dt)
        };
        let c_iw = em1_over_b;
        let beta_w = c_iw / dt;
        let resid = (v_i - c_iw * c_iw / dt).max(T::zero());
        StepLaw {
            ebd,
            drift: ou.a * em1_over_b,
            beta_w,
            s_perp: resid.sqrt(),
            sqrt_dt: dt.sqrt(),
        }
    }
}

/// Core path engine: `vol_at(step, x)` returns σ at the left endpoint of
/// step `step` given driver value x.
fn simulate_with<T, F>(
    ou: &OUParams<T>,
    rho: T,
    vol_at: F,
    t: T,
    cfg: &McConfig,
) -> Result<McTerminal<T>>
where
    T: Scalar,
    F: Fn(usize, T) -> T + Sync,
{
    cfg.validate()?;
    if !(t > T::zero()) {
        return Err(Error::invalid("maturity must be > 0"));
    }
    if rho.abs() > T::one() {
        return Err(Error::invalid("|rho| must be <= 1"));
    }
    let n_steps = cfg.n_steps(t);
    let dt = t / sc::<T>(n_steps as f64);
    let law = StepLaw::new(ou, dt);
    let rho_perp = (T::one() - rho * rho).max(T::zero()).sqrt();
    let c = ou.c;

    let ppp = if cfg.antithetic { 2 } else { 1 };
    let n_pairs = cfg.paths / ppp;

    let rows: Vec<[T; 6]> = (0..n_pairs)
        .into_par_iter()
        .map(|pair| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(pair as u64);
            let mut x = [ou.x0; 2];
            let mut log_s = [T::zero(); 2];
            let mut int_var = [T::zero(); 2];
            for step in 0..n_steps {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                let z3: f64 = StandardNormal.sample(&mut rng);
                let draws = [sc::<T>(z1), sc::<T>(z2), sc::<T>(z3)];
                for leg in 0..ppp {
                    let sign = if leg == 0 { T::one() } else { -T::one() };
                    let (z1, z2, z3) = (sign * draws[0], sign * draws[1], sign * draws[2]);
                    let dw = law.sqrt_dt * z1;
                    let sigma = vol_at(step, x[leg]);
                    let var = sigma * sigma;
                    int_var[leg] += var * dt;
                    log_s[leg] += var * sc::<T>(-0.5) * dt
                        + sigma * (rho * dw + rho_perp * law.sqrt_dt * z3);
                    x[leg] = law.ebd * x[leg]
                        + law.drift
                        + c * (law.beta_w * dw + law.s_perp * z2);
                }
            }
            [log_s[0], int_var[0], x[0], log_s[1], int_var[1], x[1]]
        })
        .collect();

    let n_out = n_pairs * ppp;
    let mut log_return = Vec::with_capacity(n_out);
    let mut integrated_var = Vec::with_capacity(n_out);
    let mut x_terminal = Vec::with_capacity(n_out);
    for row in rows {
        for leg in 0..ppp {
            log_return.push(row[3 * leg]);
            integrated_var.push(row[3 * leg + 1]);
            x_terminal.push(row[3 * leg + 2]);
        }
    }
    Ok(McTerminal {
        log_return,
        integrated_var,
        x_terminal,
        paths_per_pair: ppp,
    })
}

/// Simulate a [`ModelSpec`] to maturity `t`. The g0 profile is precomputed
/// on the step grid, so per-step work is one series evaluation.
pub fn simulate_model<T: Scalar>(
    model: &ModelSpec<T>,
    t: T,
    cfg: &McConfig,
) -> Result<McTerminal<T>> {
    let n_steps = cfg.n_steps(t);
    let dt = t / sc::<T>(n_steps as f64);
    let mut g0 = Vec::with_capacity(n_steps);
    for i in 0..n_steps {
        g0.push(model.g0(dt * sc::<T>(i as f64))?);
    }
    let p = &model.p;
    simulate_with(&model.ou, model.rho, |i, x| g0[i] * p.eval_real(x), t, cfg)
}

/// Simulate the un-truncated one-factor Bergomi model
/// σ_t² = ξ0(t) e^{η X_t} / E[e^{η X_t}] (exact lognormal normalization),
/// the reference dynamics that the truncated polynomial model approximates.
pub fn simulate_exact_bergomi<T: Scalar>(
    ou: &OUParams<T>,
    rho: T,
    eta: T,
    xi0: &ForwardVarianceCurve<T>,
    t: T,
    cfg: &McConfig,
) -> Result<McTerminal<T>> {
    if !(eta > T::zero()) {
        return Err(Error::invalid("eta must be > 0"));
    }
    let n_steps = cfg.n_steps(t);
    let dt = t / sc::<T>(n_steps as f64);
    let half = sc::<T>(0.5);
    let mut scale = Vec::with_capacity(n_steps);
    for i in 0..n_steps {
        let ti = dt * sc::<T>(i as f64);
        let xi = xi0.value(ti);
        if xi < T::zero() {
            return Err(Error::invalid(format!("xi0({}) < 0", ti.as_f64())));
        }
        let (mean, var) = ou.mean_var(ti);
        // E[e^{ηX}] = e^{ημ + η²v/2}; σ = √ξ0 e^{ηx/2} / √E[e^{ηX}].
        let log_norm = eta * mean + eta * eta * var * half;
        scale.push(xi.sqrt() * (-half * log_norm).exp());
    }
    simulate_with(
        ou,
        rho,
        |i, x| scale[i] * (half * eta * x).exp(),
        t,
        cfg,
    )
}
