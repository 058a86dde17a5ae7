//! Scratch harness used while tuning solver settings. Not part of the
//! shipped surface; removed before release.

use std::time::Instant;

use polyou::models;
use polyou::oulaw::ForwardVarianceCurve;
use polyou::pricing;
use polyou::quadrature::gauss_laguerre;
use polyou::scalar::Cplx;
use polyou::transforms::{self, TransformConfig};

fn quintic() -> polyou::ModelSpec {
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

fn main() {
    // 1. Black-Scholes degeneracy through the Lewis pipeline.
    let det = models::ModelSpec {
        ou: polyou::OUParams::new(0.0, -1.0, 1.0, 0.0).unwrap(),
        p: polyou::powerseries::PowerSeries::constant(1.0),
        rho: 0.0,
        xi0: ForwardVarianceCurve::flat(0.04),
        normalization: models::Normalization::ForwardVariance,
        spot: 100.0,
    }
    .validated()
    .unwrap();
    let cfg = TransformConfig::default();
    let quad = gauss_laguerre::<f64>(128).unwrap();
    let price = pricing::lewis_call(&det, 100.0, 1.0, &cfg, &quad, None).unwrap();
    let bs = pricing::bs_call(100.0, 100.0, 1.0, 0.2);
    println!("BS degeneracy: lewis={price:.10} bs={bs:.10} err={:.3e}", (price - bs).abs());

    // 2. Quintic CF on the Lewis line u - i/2 at frozen reference points
    //    (T=1): expect ~5.3e-4 / 1.6e-3 / 7.4e-4 at M=48 n=1000 plain.
    let model = quintic();
    let refs = [(5.0, 0.848273), (20.0, 0.353018), (40.0, 0.103067)];
    for (m, npy, rich) in [(32usize, 200usize, true), (48, 1000, false), (48, 1000, true)] {
        let cfg = TransformConfig {
            m,
            n_per_year: npy,
            k_max: 15,
            richardson: rich,
        };
        let t0 = Instant::now();
        let mut line = format!("quintic T=1 M={m} n/y={npy} rich={rich}:");
        for &(u, target) in &refs {
            match transforms::cf_logreturn(&model, Cplx::new(u, -0.5), 1.0, &cfg) {
                Ok(phi) => {
                    line += &format!(" |phi({u})| err={:.2e}", (phi.norm() - target).abs());
                }
                Err(e) => {
                    line += &format!(" phi({u}) ERR {e}");
                }
            }
        }
        println!("{line}  [{:?}]", t0.elapsed());
    }

    // 2b. Failure frontier in u for the Laguerre-128 node set, per maturity,
    //     for both smile models. "bad" = hard error OR |phi| > 1 + 1e-9.
    let bergomi = models::bergomi_truncated(
        -0.7,
        -0.7,
        1.0 / 52.0,
        1.2,
        8,
        ForwardVarianceCurve::flat(0.025),
        100.0,
    )
    .unwrap();
    let lag = gauss_laguerre::<f64>(128).unwrap();
    // Scan EXACT candidate node sets: cleanliness only matters at the nodes
    // actually evaluated, and instability pockets are narrow in u.
    let scan = |name: &str, mdl: &polyou::ModelSpec, nodes: &[f64], t: f64, npy: usize, m: usize| {
        let cfg = TransformConfig {
            m,
            n_per_year: npy,
            k_max: 15,
            richardson: false,
        };
        let mut first_bad = None;
        let mut n_err = 0;
        let mut n_mod = 0;
        let mut last_mod = 0.0;
        let mut mid_mod = 0.0;
        for (i, &u) in nodes.iter().enumerate() {
            match transforms::cf_logreturn(mdl, Cplx::new(u, -0.5), t, &cfg) {
                Ok(phi) if phi.norm() <= 1.0 + 1e-9 => {
                    if i == nodes.len() - 1 {
                        last_mod = phi.norm();
                    }
                    if i == nodes.len() * 3 / 4 {
                        mid_mod = phi.norm();
                    }
                }
                Ok(_) => {
                    n_mod += 1;
                    if first_bad.is_none() {
                        first_bad = Some(u);
                    }
                }
                Err(_) => {
                    n_err += 1;
                    if first_bad.is_none() {
                        first_bad = Some(u);
                    }
                }
            }
        }
        println!(
            "scan {name} T={t} npy={npy} M={m} umax={:.1}: first_bad={first_bad:?} err/mod={n_err}/{n_mod}, |phi|(3/4)={mid_mod:.2e} |phi|(max)={last_mod:.2e}",
            nodes.last().unwrap()
        );
    };
    for (t, npy) in [(0.1, 400usize), (0.25, 400), (0.5, 1000), (1.0, 1500)] {
        scan("quintic", &model, &lag.nodes, t, npy, 48);
    }
    let lag192 = gauss_laguerre::<f64>(192).unwrap();
    for (t, npy) in [(0.5, 1000usize), (1.0, 1500)] {
        scan("quintic192", &model, &lag192.nodes, t, npy, 48);
    }
    for beta in [0.3, 0.4, 0.5] {
        let set = lag.scaled(beta);
        for (t, npy) in [(0.1, 400usize), (0.1, 600), (0.25, 400), (0.25, 600), (0.5, 1000)] {
            for m in [32usize, 48] {
                scan(&format!("bergomi8 b={beta}"), &bergomi, &set.nodes, t, npy, m);
            }
        }
    }
    {
        let set = lag.scaled(1.0);
        for (t, npy, m) in [(1.0, 1000usize, 48), (1.0, 1000, 32)] {
            scan("bergomi8 b=1", &bergomi, &set.nodes, t, npy, m);
        }
    }

    // 2d. Smile quadrature refinement, per model/maturity profile:
    //     (a) literal unscaled Laguerre 128 vs 192,
    //     (b) same-range refinement (192 rescaled onto the 128 range).
    let strikes: Vec<f64> = (0..9)
        .map(|i| 100.0 * (-0.3 + 0.45 * (i as f64) / 8.0).exp())
        .collect();
    let lag192 = gauss_laguerre::<f64>(192).unwrap();
    println!(
        "lag max nodes: 128 -> {:.1}, 192 -> {:.1}",
        lag.nodes[127], lag192.nodes[191]
    );
    let profiles: [(&str, &polyou::ModelSpec, [usize; 4], [f64; 4]); 2] = [
        ("quintic", &model, [400, 400, 1000, 1500], [1.0, 1.0, 1.0, 1.0]),
        ("bergomi8", &bergomi, [400, 400, 1000, 1000], [0.5, 0.55, 0.5, 1.0]),
    ];
    for (name, mdl, npys, betas) in profiles {
        for (i, &t) in [0.1, 0.25, 0.5, 1.0].iter().enumerate() {
            let cfg = TransformConfig {
                m: 48,
                n_per_year: npys[i],
                k_max: 15,
                richardson: false,
            };
            let beta = betas[i];
            let q128 = lag.scaled(beta);
            let q192u = lag192.scaled(beta);
            let q192s = lag192.scaled(beta * lag.nodes[127] / lag192.nodes[191]);
            let t0 = Instant::now();
            let p128 = pricing::smile(mdl, &strikes, t, &cfg, &q128, None);
            let p192u = pricing::smile(mdl, &strikes, t, &cfg, &q192u, None);
            let p192s = pricing::smile(mdl, &strikes, t, &cfg, &q192s, None);
            let diff = |a: &Result<Vec<f64>, polyou::Error>, b: &Result<Vec<f64>, polyou::Error>| {
                match (a, b) {
                    (Ok(x), Ok(y)) => format!(
                        "{:.3e}",
                        x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
                    ),
                    (Err(e), _) => format!("L:{e}"),
                    (_, Err(e)) => format!("R:{e}"),
                }
            };
            println!(
                "refine {name} T={t} beta={beta}: unscaled|d|={} samerange|d|={}  [{:?}]",
                diff(&p128, &p192u),
                diff(&p128, &p192s),
                t0.elapsed()
            );
        }
    }

    // 3. MC vs Fourier smiles (criterion 5/6 shape): per-maturity profile,
    //    z-scores of the Fourier IV inside the MC price CI.
    {
        use polyou::montecarlo::{self, McConfig};
        let mc_cfg = McConfig {
            paths: 100_000,
            steps_per_year: 2000,
            seed: 4242,
            antithetic: true,
        };
        let spot = 100.0;
        let ks: Vec<f64> = (0..9)
            .map(|i| spot * (-0.3 + 0.45 * (i as f64) / 8.0).exp())
            .collect();
        // quintic profile
        for (t, npy, beta) in [(0.1, 400usize, 1.0), (0.25, 400, 1.0), (0.5, 1000, 1.0), (1.0, 1500, 1.0)] {
            let cfg = TransformConfig { m: 48, n_per_year: npy, k_max: 15, richardson: false };
            let q = lag.scaled(beta);
            let t0 = Instant::now();
            let four = pricing::smile(&model, &ks, t, &cfg, &q, None).unwrap();
            let t1 = Instant::now();
            let paths = montecarlo::simulate_model(&model, t, &mc_cfg).unwrap();
            let mg = paths.martingale_check();
            let mut line = format!("mc-q T={t}: z=");
            let mut worst: f64 = 0.0;
            for (i, &k) in ks.iter().enumerate() {
                let est = paths.call_price(spot, k);
                let z = (four[i] - est.value) / est.stderr;
                worst = worst.max(z.abs());
                line += &format!(" {z:+.2}");
            }
            println!(
                "{line}  worst={worst:.2} mart={:+.1e}±{:.1e}  [four {:?}, mc {:?}]",
                mg.value - 1.0,
                mg.stderr,
                t1 - t0,
                t1.elapsed()
            );
        }
        // bergomi truncated Fourier vs EXACT bergomi MC
        for (t, npy, beta) in [(0.1, 600usize, 0.3), (0.25, 600, 0.3), (0.5, 1000, 0.5), (1.0, 1000, 1.0)] {
            let cfg = TransformConfig { m: 48, n_per_year: npy, k_max: 15, richardson: false };
            let q = lag.scaled(beta);
            let t0 = Instant::now();
            let four = pricing::smile(&bergomi, &ks, t, &cfg, &q, None).unwrap();
            let t1 = Instant::now();
            let paths = montecarlo::simulate_exact_bergomi(
                &bergomi.ou,
                -0.7,
                1.2,
                &ForwardVarianceCurve::flat(0.025),
                t,
                &mc_cfg,
            )
            .unwrap();
            let mg = paths.martingale_check();
            let mut line = format!("mc-b T={t}: z=");
            let mut worst: f64 = 0.0;
            for (i, &k) in ks.iter().enumerate() {
                let est = paths.call_price(spot, k);
                let z = (four[i] - est.value) / est.stderr;
                worst = worst.max(z.abs());
                line += &format!(" {z:+.2}");
            }
            println!(
                "{line}  worst={worst:.2} mart={:+.1e}±{:.1e}  [four {:?}, mc {:?}]",
                mg.value - 1.0,
                mg.stderr,
                t1 - t0,
                t1.elapsed()
            );
        }
    }

    // 2c. Laplace stability at large arguments (tail-certificate probe):
    //     F(s) = E[exp(-s * int sigma^2)]; our API takes u = s*T.
    for t in [0.1, 1.0] {
        let cfg = TransformConfig {
            m: 48,
            n_per_year: if t < 0.5 { 400 } else { 1000 },
            k_max: 15,
            richardson: false,
        };
        for s in [100.0, 500.0, 2000.0, 10000.0, 64000.0] {
            let r = transforms::laplace_integrated_var(&model, s * t, t, &cfg);
            match r {
                Ok(v) => println!("laplace T={t} s={s}: F={v:.6e} bound=sqrt={:.3e}", v.sqrt()),
                Err(e) => println!("laplace T={t} s={s}: ERR {e}"),
            }
        }
    }

    // 3. ATM call at T=1 vs frozen MC reference 0.045212 (price/spot units).
    let cfg_fine = TransformConfig {
        m: 48,
        n_per_year: 1000,
        k_max: 15,
        richardson: false,
    };
    let t0 = Instant::now();
    let price = match pricing::lewis_call(&model, 100.0, 1.0, &cfg_fine, &quad, None) { Ok(p) => p, Err(e) => { println!("ATM pricing ERR: {e}"); f64::NAN } };
    println!(
        "quintic ATM T=1: price/spot={:.6} ref=0.045212 diff={:.2e}  [{:?}]",
        price / 100.0,
        (price / 100.0 - 0.045212).abs(),
        t0.elapsed()
    );

    // 4. Martingality exactness.
    let phi0 = transforms::cf_logreturn(&model, Cplx::new(0.0, 0.0), 1.0, &cfg).unwrap();
    let phim = transforms::cf_logreturn(&model, Cplx::new(0.0, -1.0), 1.0, &cfg).unwrap();
    println!(
        "phi(0)-1 = {:.3e}, phi(-i)-1 = {:.3e}",
        (phi0 - Cplx::new(1.0, 0.0)).norm(),
        (phim - Cplx::new(1.0, 0.0)).norm()
    );

    // 5. Laplace transform sanity on the deterministic model.
    let lap = transforms::laplace_integrated_var(&det, 5.0, 1.0, &cfg).unwrap();
    println!(
        "laplace det u=5: {lap:.12} vs exp(-0.2)={:.12} err={:.2e}",
        (-0.2f64).exp(),
        (lap - (-0.2f64).exp()).abs()
    );
}
