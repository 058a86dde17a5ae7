//! Focused scratch probe (removed before release).
//!
//! Final frozen-profile validation: all 8 acceptance slices under the
//! production configuration (Richardson with per-node fallback, M=48,
//! k_max=15, per-maturity npy and Laguerre scale), z-scored against
//! 400k-path MC at the pinned criterion settings, plus the 128-vs-192
//! quadrature refinement at every slice.

use polyou::models::{self, ModelSpec};
use polyou::montecarlo::{self, McConfig, McTerminal};
use polyou::oulaw::ForwardVarianceCurve;
use polyou::pricing;
use polyou::quadrature;
use polyou::transforms::TransformConfig;

const SPOT: f64 = 100.0;

fn strikes() -> Vec<f64> {
    (0..9).map(|i| SPOT * (-0.3 + 0.05625 * i as f64).exp()).collect()
}

fn mc_exact(model: &ModelSpec<f64>, bergomi: bool, t: f64, cfg: &McConfig) -> McTerminal<f64> {
    if bergomi {
        montecarlo::simulate_exact_bergomi(
            &model.ou,
            model.rho,
            1.2,
            &ForwardVarianceCurve::flat(0.025),
            t,
            cfg,
        )
        .unwrap()
    } else {
        montecarlo::simulate_model(model, t, cfg).unwrap()
    }
}

fn main() {
    let quintic = models::quintic_ou(
        -0.65,
        -0.6,
        1.0 / 52.0,
        0.01,
        1.0,
        0.214,
        0.227,
        ForwardVarianceCurve::flat(0.025),
        SPOT,
    )
    .unwrap();
    let bergomi = models::bergomi_truncated(
        -0.7,
        -0.7,
        1.0 / 52.0,
        1.2,
        8,
        ForwardVarianceCurve::flat(0.025),
        SPOT,
    )
    .unwrap();

    let ks = strikes();
    let lag128 = quadrature::gauss_laguerre::<f64>(128).unwrap();
    let lag192 = quadrature::gauss_laguerre::<f64>(192).unwrap();

    let mats = [0.1, 0.25, 0.5, 1.0];
    let quintic_npy = [400usize, 400, 1000, 1500];
    let quintic_beta = [1.0f64, 1.0, 1.0, 1.0];
    let bergomi_npy = [600usize, 600, 1000, 1000];
    let bergomi_beta = [0.5f64, 0.5, 0.5, 1.0];

    for (mname, model, is_b, npys, betas) in [
        ("quintic", &quintic, false, &quintic_npy, &quintic_beta),
        ("bergomi", &bergomi, true, &bergomi_npy, &bergomi_beta),
    ] {
        for (i, &t) in mats.iter().enumerate() {
            let cfg = TransformConfig { m: 48, n_per_year: npys[i], k_max: 15, richardson: true };
            let r128 = lag128.scaled(betas[i]);
            let r192 = lag192.scaled(betas[i]);
            let p = match pricing::smile(model, &ks, t, &cfg, &r128, None) {
                Ok(p) => p,
                Err(e) => {
                    println!("{mname} T={t}: 128 ERR {e}");
                    continue;
                }
            };
            let refine = match pricing::smile(model, &ks, t, &cfg, &r192, None) {
                Ok(q) => p
                    .iter()
                    .zip(&q)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0f64, f64::max),
                Err(e) => {
                    println!("{mname} T={t}: 192 ERR {e}");
                    f64::NAN
                }
            };
            let mc_cfg = McConfig { paths: 400_000, steps_per_year: 2000, seed: 4242, antithetic: true };
            let sim = mc_exact(model, is_b, t, &mc_cfg);
            print!("{mname} T={t:<4} npy={:<4} beta={:<3} refine={refine:.2e} z:", npys[i], betas[i]);
            for (j, &k) in ks.iter().enumerate() {
                let est = sim.call_price(SPOT, k);
                print!(" {:+5.2}", (p[j] - est.value) / (2.0 * est.stderr));
            }
            println!();
        }
    }
}
