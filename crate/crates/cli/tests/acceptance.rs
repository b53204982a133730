//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (visible with `cargo test -- --nocapture`). Tolerances and bands
//! are pinned here, not configurable.
//!
//! The heavy rate studies (criteria 1-4) run the pinned Monte-Carlo
//! budgets and take a few minutes each on a desktop.

use roughdrift::drift::DriftModel;
use roughdrift::paths::{bridge_cross_variance, sample_coupled_interval};
use roughdrift::regularity::{gagliardo_seminorm, probe_at_scale};
use roughdrift::spectral::{a_function, a_function_with_order};
use roughdrift::streams::{stream_rng, StreamRole};
use roughdrift_cli::{execute, ExperimentConfig};

use rand::Rng;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!("acceptance {criterion}: {} - {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{criterion}: {detail}");
}

fn config(command: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(command).unwrap();
    c.seed = 7;
    c.alpha = Some(0.5);
    c
}

/// Criterion 1: Euler endpoint rate for the Weierstrass drift.
/// alpha = 0.5, p = 1, n in {16..1024}, M = 2000, master ratio 2^6;
/// fitted slope in [0.60, 0.90] with r^2 >= 0.95.
#[test]
fn criterion_01_euler_endpoint_rate() {
    let mut c = config("rate-euler");
    c.p = 1.0;
    c.n_list = vec![16, 32, 64, 128, 256, 512, 1024];
    c.reps = 2000;
    c.master_ratio = 64;
    let outcome = execute(&c).unwrap();
    let detail = outcome
        .checks
        .iter()
        .map(|ch| format!("{} ({})", ch.name, ch.detail))
        .collect::<Vec<_>>()
        .join("; ");
    report("criterion 01 (euler endpoint rate)", outcome.all_passed(), &detail);
}

/// Criterion 2: sup-norm rate of the Milstein-type scheme for the
/// transformed SDE, same regime, slope in [0.60, 0.95].
#[test]
fn criterion_02_milstein_supnorm_rate() {
    let mut c = config("rate-milstein");
    c.p = 1.0;
    c.n_list = vec![16, 32, 64, 128, 256, 512, 1024];
    c.reps = 2000;
    c.master_ratio = 64;
    let outcome = execute(&c).unwrap();
    let detail = outcome.checks[0].detail.clone();
    report("criterion 02 (milstein sup-norm rate)", outcome.all_passed(), &detail);
}

/// Criterion 3: coupled-solution gap decay on uniform augmented grids.
/// alpha = 0.5, p = 1, n in {16..256}, M = 4000; slope in [0.60, 0.90].
#[test]
fn criterion_03_coupling_gap_decay() {
    let mut c = config("coupling-gap");
    c.p = 1.0;
    c.n_list = vec![16, 32, 64, 128, 256];
    c.reps = 4000;
    let outcome = execute(&c).unwrap();
    let detail = outcome.checks[0].detail.clone();
    report("criterion 03 (coupling-gap decay)", outcome.all_passed(), &detail);
}

/// Criterion 4: coupling gap for the Sobolev-type drift.
/// alpha = 0.5, beta = 1.0, p = 2; polynomial slope in [0.60, 0.95].
///
/// The raw log-log slope of this family mixes the polynomial exponent
/// with the drift's slowly varying log factor (the mixture sits at ~0.95
/// for every affordable window, for the theoretical curve as much as for
/// the measurement). The assertion therefore targets the polynomial
/// exponent with the family's own log weight substituted out; the log
/// exponent itself is declared unresolvable at desk scale.
#[test]
fn criterion_04_sobolev_coupling_gap() {
    let mut c = config("coupling-gap");
    c.beta = Some(1.0);
    c.p = 2.0;
    c.n_list = vec![16, 32, 64, 128, 256];
    c.reps = 4000;
    let outcome = execute(&c).unwrap();
    let detail = format!("{} (log factor declared unresolvable)", outcome.checks[0].detail);
    report("criterion 04 (sobolev coupling gap)", outcome.all_passed(), &detail);
}

/// Criterion 5: the exact spectral identity on the grid
/// (j, delta) in {1,2,4} x {0.05, 0.1} with M = 10^4: |z| <= 3 in at
/// least 5 of 6 cells and |z| <= 4 in all.
#[test]
fn criterion_05_spectral_identity() {
    let mut c = config("spectral-identity");
    c.j_list = vec![1, 2, 4];
    c.delta_list = vec![0.05, 0.1];
    c.reps = 10_000;
    let outcome = execute(&c).unwrap();
    let detail = outcome
        .checks
        .iter()
        .map(|ch| ch.detail.clone())
        .collect::<Vec<_>>()
        .join("; ");
    report("criterion 05 (spectral identity)", outcome.all_passed(), &detail);
}

/// Criterion 6: the cross-variance formula
/// Var(W_t - Wtilde_u) = (u-t) + 2(t-t_lo)(t_hi-u)/(t_hi-t_lo)
/// within 4 Monte-Carlo standard errors at 10 random (t, u) triples,
/// M = 10^4.
#[test]
fn criterion_06_cross_variance_formula() {
    let reps = 10_000u64;
    let substeps = 256usize;
    let mut pick = stream_rng(7, 0, StreamRole::Probe(6));
    let mut worst_z = 0.0f64;
    for triple in 0..10u64 {
        let t_lo = 0.6 * pick.random::<f64>();
        let span = 0.05 + 0.25 * pick.random::<f64>();
        let i = 1 + (pick.random::<f64>() * (substeps - 2) as f64) as usize;
        let j = i + (pick.random::<f64>() * (substeps - i) as f64) as usize;
        let dt = span / substeps as f64;
        let (t, u) = (t_lo + i as f64 * dt, t_lo + j as f64 * dt);
        let expect = bridge_cross_variance(t_lo, t_lo + span, t, u).unwrap();

        let mut sum_sq = 0.0;
        for rep in 0..reps {
            let mut rng_w = stream_rng(1000 + triple, rep, StreamRole::GridIncrements);
            let mut rng_b = stream_rng(1000 + triple, rep, StreamRole::BridgeCoupled(0));
            let (w, wt) = sample_coupled_interval(span, substeps, &mut rng_w, &mut rng_b).unwrap();
            let gap = w[i] - wt[j];
            sum_sq += gap * gap;
        }
        let var = sum_sq / reps as f64;
        let se = expect * (2.0 / reps as f64).sqrt();
        let z = if expect > 0.0 { (var - expect).abs() / se } else { var.abs() };
        worst_z = worst_z.max(z);
    }
    report(
        "criterion 06 (cross-variance formula)",
        worst_z <= 4.0,
        &format!("worst |z| = {worst_z:.3} over 10 triples at M = {reps}"),
    );
}

/// Criterion 7: transform property suite -- round trips at 1e-8, the
/// bi-Lipschitz sandwich with c1 = e^(-2 sup|T|), c2 = e^(+2 sup|T|) on
/// 10^4 pairs, b' = -2 mu o G^{-1} against finite differences, and the
/// constant-drift closed form at 1e-8.
#[test]
fn criterion_07_transform_property_suite() {
    let c = config("transform-check");
    let outcome = execute(&c).unwrap();
    let detail = outcome
        .checks
        .iter()
        .map(|ch| format!("{} {}", ch.name, if ch.pass { "ok" } else { "FAILED" }))
        .collect::<Vec<_>>()
        .join("; ");
    report("criterion 07 (transform property suite)", outcome.all_passed(), &detail);
}

/// Criterion 8: the A-kernel. A(0) = 0 exactly, 0 <= A <= 1/2 on a
/// log-spaced sweep, and the golden value at x = 4 stable to 1e-8 across
/// quadrature orders.
#[test]
fn criterion_08_a_function() {
    const A4: f64 = 0.089363390203532565; // 40-digit adaptive quadrature
    let exact_zero = a_function(0.0).unwrap() == 0.0;
    let mut bounded = true;
    for k in -40..=40 {
        let a = a_function((k as f64 / 2.0).exp2()).unwrap();
        bounded &= (0.0..=0.5).contains(&a);
    }
    let mut stable = (a_function(4.0).unwrap() - A4).abs() <= 1e-8;
    for order in [64, 128, 256] {
        stable &= (a_function_with_order(4.0, order).unwrap() - A4).abs() <= 1e-8;
    }
    report(
        "criterion 08 (A-function)",
        exact_zero && bounded && stable,
        &format!(
            "A(0) exact zero: {exact_zero}; 0 <= A <= 1/2 on sweep: {bounded}; golden A(4) stable across orders 64/128/256: {stable}"
        ),
    );
}

/// Criterion 9: regularity probes. The Hölder probe of the Weierstrass
/// drift stabilises at the matched exponent and diverges at alpha + 0.3;
/// the Gagliardo estimate of the unit-interval indicator is stable for
/// (alpha, p) = (0.25, 2) and divergent under refinement for (0.75, 2).
#[test]
fn criterion_09_regularity_probes() {
    let mu = DriftModel::weierstrass(0.5).unwrap();
    let f = |x: f64| mu.eval(x).unwrap();
    let domain = (0.0, 2.0 * std::f64::consts::PI);
    let at = |alpha: f64, k: i32| {
        probe_at_scale(f, alpha, domain, (-k as f64).exp2() * domain.1, 20_000, 7).unwrap()
    };
    let matched_ratio = at(0.5, 18) / at(0.5, 6);
    let overshoot_ratio = at(0.8, 18) / at(0.8, 6);
    let holder_ok = matched_ratio < 3.0 && overshoot_ratio > 4.0;

    let indicator = |x: f64| if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 };
    let member_coarse = gagliardo_seminorm(indicator, 0.25, 2.0, (0.0, 1.0), 512).unwrap();
    let member_fine = gagliardo_seminorm(indicator, 0.25, 2.0, (0.0, 1.0), 1024).unwrap();
    let member_ratio = member_fine / member_coarse;
    let outside_coarse = gagliardo_seminorm(indicator, 0.75, 2.0, (0.0, 1.0), 512).unwrap();
    let outside_fine = gagliardo_seminorm(indicator, 0.75, 2.0, (0.0, 1.0), 1024).unwrap();
    let outside_ratio = outside_fine / outside_coarse;
    let gagliardo_ok = (0.9..=1.1).contains(&member_ratio) && outside_ratio > 1.25;

    report(
        "criterion 09 (regularity probes)",
        holder_ok && gagliardo_ok,
        &format!(
            "holder matched ratio {matched_ratio:.2} (<3), overshoot ratio {overshoot_ratio:.2} (>4); indicator gagliardo refinement: member {member_ratio:.3} in [0.9,1.1], non-member {outside_ratio:.3} > 1.25"
        ),
    );
}

/// Criterion 10: determinism. Every subcommand, run twice with identical
/// configuration and seed, emits byte-identical CSV, independently of the
/// worker thread count.
#[test]
fn criterion_10_byte_identical_reruns() {
    let mut configs = Vec::new();
    for command in [
        "rate-euler",
        "rate-milstein",
        "coupling-gap",
        "spectral-identity",
        "transform-check",
        "regularity",
    ] {
        let mut c = config(command);
        match command {
            "rate-euler" | "rate-milstein" => {
                c.n_list = vec![8, 16, 32];
                c.reps = 30;
            }
            "coupling-gap" => {
                c.n_list = vec![4, 8, 16];
                c.reps = 30;
                c.dump_paths = true;
            }
            "spectral-identity" => {
                c.reps = 200;
                c.j_list = vec![0, 1, 2]; // includes the trivial j = 0 row
            }
            "regularity" => {
                c.samples = 10_000;
                c.grid_n = 128;
            }
            _ => {}
        }
        c.assertions = false; // tiny budgets; only the bytes matter here
        configs.push(c);
    }

    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let quad = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let mut all_equal = true;
    for c in &configs {
        let one = single.install(|| execute(c)).unwrap();
        let two = single.install(|| execute(c)).unwrap();
        let four = quad.install(|| execute(c)).unwrap();
        let same = one.csv == two.csv
            && one.csv == four.csv
            && one.extra_files == two.extra_files
            && one.extra_files == four.extra_files;
        if !same {
            all_equal = false;
            println!("  determinism broke for {}", c.command);
        }
    }
    report(
        "criterion 10 (byte-identical reruns)",
        all_equal,
        "all six subcommands byte-identical across reruns and thread counts 1 vs 4",
    );
}
