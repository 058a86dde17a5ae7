//! Derivative-free simplex minimization (Nelder-Mead) with the classic
//! coefficient set: reflection 1, expansion 2, contraction 1/2, shrink 1/2.
//!
//! Used both for the Heston control-variate fit and for model calibration;
//! neither has usable gradients (the objective goes through the Riccati
//! solver), so a simplex method is the right tool.

use crate::scalar::{sc, Scalar};

/// Stopping rules and bookkeeping limits.
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadConfig {
    /// Hard cap on objective evaluations.
    pub max_evals: usize,
    /// Stop when the simplex diameter (max vertex distance, sup norm)
    /// falls below this.
    pub diameter_tol: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig {
            max_evals: 2000,
            diameter_tol: 1e-6,
        }
    }
}

/// Outcome of one minimization run.
#[derive(Debug, Clone)]
pub struct NelderMeadResult<T: Scalar> {
    /// Best point found.
    pub x: Vec<T>,
    /// Objective at the best point.
    pub value: T,
    /// Number of objective evaluations spent.
    pub evals: usize,
    /// Final simplex diameter.
    pub diameter: T,
    /// True if the diameter tolerance was reached within budget.
    pub converged: bool,
    /// (evaluation count, best value so far) after each accepted move.
    pub trace: Vec<(usize, f64)>,
}

/// Order values with NaN pushed last so a misbehaving objective cannot make
/// the simplex adopt an undefined vertex.
fn better<T: Scalar>(a: T, b: T) -> bool {
    match (a.is_nan(), b.is_nan()) {
        (false, true) => true,
        (true, _) => false,
        _ => a < b,
    }
}

fn diameter<T: Scalar>(simplex: &[Vec<T>]) -> T {
    let mut d = T::zero();
    for i in 0..simplex.len() {
        for j in (i + 1)..simplex.len() {
            for (a, b) in simplex[i].iter().zip(simplex[j].iter()) {
                let gap = (*a - *b).abs();
                if gap > d {
                    d = gap;
                }
            }
        }
    }
    d
}

/// Minimize `f` starting from `start`, with per-coordinate initial simplex
/// offsets `steps` (a zero step is replaced by a small absolute one).
pub fn minimize<T: Scalar, F: FnMut(&[T]) -> T>(
    mut f: F,
    start: &[T],
    steps: &[T],
    cfg: &NelderMeadConfig,
) -> NelderMeadResult<T> {
    assert_eq!(start.len(), steps.len(), "start/steps dimension mismatch");
    let dim = start.len();
    let n_vertices = dim + 1;
    let mut evals = 0usize;
    let mut trace = Vec::new();

    let mut eval = |x: &[T], evals: &mut usize| -> T {
        *evals += 1;
        f(x)
    };

    // Initial simplex: start plus one offset vertex per coordinate.
    let mut simplex: Vec<Vec<T>> = Vec::with_capacity(n_vertices);
    simplex.push(start.to_vec());
    for i in 0..dim {
        let mut v = start.to_vec();
        let step = if steps[i].is_zero() {
            sc::<T>(0.05)
        } else {
            steps[i]
        };
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<T> = simplex
        .iter()
        .map(|v| eval(v, &mut evals))
        .collect();

    let half = sc::<T>(0.5);
    let two = sc::<T>(2.0);

    loop {
        // Sort vertices by objective, best first.
        let mut order: Vec<usize> = (0..n_vertices).collect();
        order.sort_by(|&a, &b| {
            if better(values[a], values[b]) {
                std::cmp::Ordering::Less
            } else if better(values[b], values[a]) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        });
        let reorder_s: Vec<Vec<T>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let reorder_v: Vec<T> = order.iter().map(|&i| values[i]).collect();
        simplex = reorder_s;
        values = reorder_v;
        trace.push((evals, values[0].as_f64()));

        let diam = diameter(&simplex);
        if diam.as_f64() < cfg.diameter_tol || evals >= cfg.max_evals {
            return NelderMeadResult {
                x: simplex[0].clone(),
                value: values[0],
                evals,
                diameter: diam,
                converged: diam.as_f64() < cfg.diameter_tol,
                trace,
            };
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![T::zero(); dim];
        for v in simplex.iter().take(n_vertices - 1) {
            for (c, x) in centroid.iter_mut().zip(v.iter()) {
                *c += *x;
            }
        }
        let inv = sc::<T>(1.0 / dim as f64);
        for c in centroid.iter_mut() {
            *c *= inv;
        }
        let worst = simplex[n_vertices - 1].clone();
        let f_best = values[0];
        let f_second_worst = values[n_vertices - 2];
        let f_worst = values[n_vertices - 1];

        let blend = |alpha: T| -> Vec<T> {
            centroid
                .iter()
                .zip(worst.iter())
                .map(|(&c, &w)| c + alpha * (c - w))
                .collect()
        };

        // Reflection.
        let x_r = blend(T::one());
        let f_r = eval(&x_r, &mut evals);

        if better(f_r, f_best) {
            // Expansion.
            let x_e = blend(two);
            let f_e = eval(&x_e, &mut evals);
            if better(f_e, f_r) {
                simplex[n_vertices - 1] = x_e;
                values[n_vertices - 1] = f_e;
            } else {
                simplex[n_vertices - 1] = x_r;
                values[n_vertices - 1] = f_r;
            }
            continue;
        }
        if better(f_r, f_second_worst) {
            simplex[n_vertices - 1] = x_r;
            values[n_vertices - 1] = f_r;
            continue;
        }

        // Contraction: outside if the reflected point improved on the worst,
        // inside otherwise.
        let (x_c, reference) = if better(f_r, f_worst) {
            (blend(half), f_r)
        } else {
            (blend(-half), f_worst)
        };
        let f_c = eval(&x_c, &mut evals);
        if better(f_c, reference) {
            simplex[n_vertices - 1] = x_c;
            values[n_vertices - 1] = f_c;
            continue;
        }

        // Shrink toward the best vertex.
        let best = simplex[0].clone();
        for i in 1..n_vertices {
            let shrunk: Vec<T> = best
                .iter()
                .zip(simplex[i].iter())
                .map(|(&b, &x)| b + half * (x - b))
                .collect();
            values[i] = eval(&shrunk, &mut evals);
            simplex[i] = shrunk;
            if evals >= cfg.max_evals {
                break;
            }
        }
    }
}
