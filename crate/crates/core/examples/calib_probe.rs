//! Scratch probe (removed before release): rehearse the synthetic-recovery
//! acceptance procedure end to end — quintic truth quotes at two maturities,
//! 20%-perturbed start, full simplex budget — and report RMSE/evals/runtime.

use polyou::calibration::{
    calibrate, synthetic_spx_quotes, CalibrationProblem, ModelFamily, PricingProfile,
};
use polyou::neldermead::NelderMeadConfig;
use polyou::oulaw::ForwardVarianceCurve;
use std::time::Instant;

const SPOT: f64 = 100.0;

fn strike_grid(t: f64) -> Vec<f64> {
    let half = 1.5 * 0.16 * t.sqrt();
    (0..11)
        .map(|i| SPOT * (-half + 2.0 * half * i as f64 / 10.0).exp())
        .collect()
}

fn main() {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build_global()
        .unwrap();

    let family = ModelFamily::QuinticOu {
        eps: 1.0 / 52.0,
        xi0: ForwardVarianceCurve::flat(0.025),
        spot: SPOT,
    };
    let truth = vec![-0.65, -0.6, 0.01, 1.0, 0.214, 0.227];
    let model = family.build(&truth).unwrap();
    let profile = PricingProfile::<f64>::standard().unwrap();

    let mut quotes =
        synthetic_spx_quotes(&model, 0.25, &strike_grid(0.25), 0.005, &profile).unwrap();
    quotes.extend(synthetic_spx_quotes(&model, 0.5, &strike_grid(0.5), 0.005, &profile).unwrap());
    let problem = CalibrationProblem::new(family, quotes).unwrap();

    // 20% perturbation, mixed directions so the ridge-flat overall p-scale
    // is not the only thing that moved.
    let start: Vec<f64> = vec![
        -0.65 * 1.2,
        -0.6 * 0.8,
        0.01 * 1.2,
        1.0 * 0.8,
        0.214 * 1.2,
        0.227 * 0.8,
    ];
    let theta0 = problem.params_to_theta(&start).unwrap();
    println!("objective at start = {:.6e}", problem.objective(&theta0));

    let nm = NelderMeadConfig {
        max_evals: 2000,
        diameter_tol: 1e-6,
    };
    let t0 = Instant::now();
    let (_, report) = calibrate(&problem, &start, &problem.default_steps(), &nm).unwrap();
    let dt = t0.elapsed().as_secs_f64();

    println!(
        "evals={} converged={} diameter={:.2e} objective={:.6e}",
        report.evals, report.converged, report.diameter, report.objective
    );
    println!(
        "rmse = {:.4} vol points ({:.2} bp)  runtime {:.1}s",
        report.rmse_vol_points,
        report.rmse_vol_points * 100.0,
        dt
    );
    println!("params: {:?}", report.params);
    let worst = report
        .fits
        .iter()
        .filter_map(|f| f.residual())
        .fold(0.0f64, |a, r| a.max(r.abs()));
    println!("worst |residual| = {:.2} bp", worst * 1e4);
}
