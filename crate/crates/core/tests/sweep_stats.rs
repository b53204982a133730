//! Statistical behaviour of the Monte-Carlo sweeps: estimator consistency
//! under replication doubling, batch scaling of the standard error,
//! monotonicity in `n` and in `p`, and the separation between reference
//! error and the coarse-scheme errors it is held against.

use roughdrift::convergence::{
    coupling_gap_sweep, fit_points, milstein_supgap_sweep, rate_fit, scheme_error_sweep, GridPolicy,
};
use roughdrift::drift::DriftModel;
use roughdrift::paths::sample_brownian;
use roughdrift::schemes::{euler, SchemeKind};
use roughdrift::streams::{stream_rng, StreamRole};

#[test]
fn euler_errors_decrease_across_the_sweep() {
    let model = DriftModel::weierstrass(0.5).unwrap();
    let est =
        scheme_error_sweep(&model, 0.0, SchemeKind::Euler, &[8, 32, 128], 1.0, 300, 31, 64).unwrap();
    let first = &est[0];
    let last = &est[est.len() - 1];
    assert!(
        last.mean_error <= first.mean_error + 2.0 * (first.std_error + last.std_error),
        "errors did not decrease: {} -> {}",
        first.mean_error,
        last.mean_error
    );
    // and a crude fit already shows decay
    let fit = rate_fit(&fit_points(&est)).unwrap();
    assert!(fit.slope > 0.3, "slope {}", fit.slope);
}

#[test]
fn estimator_is_consistent_under_replication_doubling() {
    let model = DriftModel::weierstrass(0.5).unwrap();
    // the jackknife standard error is itself noisy at 20 batches, so the
    // sqrt(2) shrink under doubling is checked on a geometric mean over
    // seeds rather than a single run
    let mut log_ratio = 0.0;
    for seed in [33, 133, 233] {
        let small =
            scheme_error_sweep(&model, 0.0, SchemeKind::Euler, &[16], 1.0, 400, seed, 64).unwrap();
        let large =
            scheme_error_sweep(&model, 0.0, SchemeKind::Euler, &[16], 1.0, 800, seed, 64).unwrap();
        let gap = (small[0].mean_error - large[0].mean_error).abs();
        let tol = 3.0 * (small[0].std_error + large[0].std_error);
        assert!(gap < tol, "seed {seed}: estimates moved {gap} with tolerance {tol}");
        log_ratio += (small[0].std_error / large[0].std_error).ln();
    }
    let ratio = (log_ratio / 3.0).exp();
    assert!((1.0..=2.0).contains(&ratio), "mean se shrink {ratio}, expected near sqrt(2)");
}

#[test]
fn estimates_are_nondecreasing_in_p() {
    let model = DriftModel::weierstrass(0.5).unwrap();
    let mut previous = 0.0;
    for p in [1.0, 2.0, 4.0] {
        let est =
            scheme_error_sweep(&model, 0.0, SchemeKind::Euler, &[16], p, 400, 35, 64).unwrap();
        assert!(
            est[0].mean_error >= previous - 3.0 * est[0].std_error,
            "p = {p}: {} after {previous}",
            est[0].mean_error
        );
        previous = est[0].mean_error;
    }
}

#[test]
fn reference_self_error_is_separated_from_coarse_errors() {
    // replacing the reference by its half-resolution version moves the
    // estimate by far less than the coarse-scheme error under study
    let model = DriftModel::weierstrass(0.5).unwrap();
    let reps = 300u64;
    let n_coarse = 16usize;
    let master_n = 64 * n_coarse;
    let mut self_gap = 0.0;
    let mut coarse_gap = 0.0;
    for rep in 0..reps {
        let mut rng = stream_rng(36, rep, StreamRole::GridIncrements);
        let w = sample_brownian(master_n, &mut rng).unwrap();
        let full = euler(&model, 0.0, &w, master_n, false).unwrap().endpoint;
        let half = euler(&model, 0.0, &w, master_n / 2, false).unwrap().endpoint;
        let coarse = euler(&model, 0.0, &w, n_coarse, false).unwrap().endpoint;
        self_gap += (full - half).abs();
        coarse_gap += (full - coarse).abs();
    }
    assert!(
        coarse_gap >= 4.0 * self_gap,
        "separation factor {} below 4",
        coarse_gap / self_gap
    );
}

#[test]
fn milstein_supgap_sweep_produces_decreasing_errors() {
    let model = DriftModel::weierstrass(0.5).unwrap();
    let est = milstein_supgap_sweep(&model, 0.0, &[8, 64], 1.0, 150, 37, 64).unwrap();
    assert!(est[0].mean_error > est[1].mean_error);
    assert!(est.iter().all(|e| e.range_breach_count == 0));
}

#[test]
fn coupling_gap_decreases_on_augmented_grids() {
    let model = DriftModel::weierstrass(0.5).unwrap();
    let est = coupling_gap_sweep(
        &model,
        0.0,
        &[4, 16, 64],
        1.0,
        400,
        38,
        64,
        &GridPolicy::UniformAugmented,
    )
    .unwrap();
    let fit = rate_fit(&fit_points(&est)).unwrap();
    assert!(fit.slope > 0.3, "coupling gap slope {}", fit.slope);
    // half the measured gap is the advertised lower-bound form
    for e in &est {
        assert_eq!(e.lower_bound_proxy(), 0.5 * e.mean_error);
    }
}

#[test]
fn sweep_pipeline_smoke_report() {
    // prints a compact picture of both sweeps; assertions are loose, the
    // tight bands live in the acceptance suite
    let model = DriftModel::weierstrass(0.5).unwrap();
    let est = scheme_error_sweep(
        &model,
        0.0,
        SchemeKind::Euler,
        &[16, 32, 64, 128, 256],
        1.0,
        300,
        39,
        64,
    )
    .unwrap();
    for e in &est {
        println!(
            "euler    n={:4}  err={:.6e}  se={:.2e}  reps={}",
            e.n, e.mean_error, e.std_error, e.replications
        );
    }
    let fit = rate_fit(&fit_points(&est)).unwrap();
    println!("euler fitted slope {:.3} (r2 {:.4}, ci {:.3})", fit.slope, fit.r_squared, fit.slope_ci);
    assert!(fit.slope > 0.4 && fit.slope < 1.1);

    let est = coupling_gap_sweep(
        &model,
        0.0,
        &[8, 16, 32, 64],
        1.0,
        400,
        40,
        64,
        &GridPolicy::UniformAugmented,
    )
    .unwrap();
    for e in &est {
        println!(
            "coupling n={:4}  gap={:.6e}  se={:.2e}  half-gap={:.6e}",
            e.n,
            e.mean_error,
            e.std_error,
            e.lower_bound_proxy()
        );
    }
    let fit = rate_fit(&fit_points(&est)).unwrap();
    println!(
        "coupling fitted slope {:.3} (r2 {:.4}, ci {:.3})",
        fit.slope, fit.r_squared, fit.slope_ci
    );
    assert!(fit.slope > 0.4 && fit.slope < 1.1);
}
