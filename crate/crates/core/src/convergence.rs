//! Monte-Carlo error estimation and empirical convergence rates.
//!
//! Three seeded sweeps feed the rate studies:
//!
//! - [`scheme_error_sweep`]: endpoint `L^p` gap between a scheme at `n`
//!   steps and the fine-grid reference on the same path,
//! - [`milstein_supgap_sweep`]: sup-norm gap between the Milstein-type
//!   scheme and the transformed reference trajectory,
//! - [`coupling_gap_sweep`]: the gap `E|X_1 - Xtilde_1|^p` between the
//!   solutions driven by a coupled path pair, the quantity whose decay rate
//!   `(1+alpha)/2` no grid-based method can beat.
//!
//! Every sweep runs replications in parallel on counter-based streams and
//! reduces them in replication order, so results are bitwise independent
//! of the thread count. Standard errors come from a jackknife over 20
//! contiguous batches.
//!
//! The coupling gap is reported as measured; the certified lower-bound
//! form is half of it ([`ErrorEstimate::lower_bound_proxy`]) and nothing
//! here claims the intractable infimum over all grid-based methods.

use rayon::prelude::*;

use crate::drift::DriftModel;
use crate::paths::{sample_brownian, sample_coupled_pair, TimeGrid};
use crate::schemes::{euler, milstein_transformed, reference_trajectory, SchemeKind};
use crate::streams::{stream_rng, StreamRole};
use crate::transform::build_transform;
use crate::{Error, Result};

/// Default working interval half-width for transform tables built inside
/// sweeps: covers the 1-second diffusion range beyond six standard
/// deviations plus the bounded drift displacement.
pub const WORKING_HALF_WIDTH: f64 = 8.0;

/// Default node count for transform tables built inside sweeps.
pub const TRANSFORM_NODES: usize = 4096;

/// Number of jackknife batches.
const JACKKNIFE_BATCHES: usize = 20;

/// A Monte-Carlo `L^p` error estimate at one step count.
#[derive(Clone, Debug)]
pub struct ErrorEstimate {
    /// Scheme resolution this estimate belongs to.
    pub n: usize,
    /// Moment order `p >= 1`.
    pub p: f64,
    /// `(mean |gap|^p)^(1/p)` over the surviving replications.
    pub mean_error: f64,
    /// Jackknife-over-batches standard error of `mean_error`.
    pub std_error: f64,
    /// Replications that entered the estimate.
    pub replications: usize,
    /// Replications dropped because a table lookup left its working range.
    pub range_breach_count: usize,
}

impl ErrorEstimate {
    /// Half the measured coupling gap: the certified lower-bound form.
    /// The smallest achievable error itself is never claimed, only this
    /// proxy.
    pub fn lower_bound_proxy(&self) -> f64 {
        0.5 * self.mean_error
    }
}

/// Grid choice for [`coupling_gap_sweep`].
#[derive(Clone, Debug)]
pub enum GridPolicy {
    /// Augmented grids with no extra points, one per requested `n`.
    UniformAugmented,
    /// Caller-supplied grids, paired with `n_list` by position.
    Grids(Vec<TimeGrid>),
}

fn check_sweep_args(n_list: &[usize], p: f64, replications: usize, master_ratio: usize) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::invalid("n_list must not be empty"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::invalid("n_list must be strictly increasing and positive"));
    }
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    if replications < 2 {
        return Err(Error::invalid("need at least 2 replications"));
    }
    if master_ratio < 64 {
        return Err(Error::invalid(format!(
            "master ratio must be at least 2^6 = 64, got {master_ratio}"
        )));
    }
    Ok(())
}

/// `(mean |g|^p)^(1/p)` with jackknife standard error over contiguous
/// batches, from per-replication gaps in replication order.
fn estimate_from_gaps(n: usize, p: f64, gaps: &[f64], breaches: usize) -> ErrorEstimate {
    let m = gaps.len();
    let powered: Vec<f64> = gaps.iter().map(|g| g.abs().powf(p)).collect();
    let total: f64 = powered.iter().sum();
    let mean_error = (total / m as f64).powf(1.0 / p);

    let batches = JACKKNIFE_BATCHES.min(m);
    let mut std_error = 0.0;
    if batches >= 2 {
        let mut batch_sums = vec![0.0f64; batches];
        let mut batch_sizes = vec![0usize; batches];
        for (i, v) in powered.iter().enumerate() {
            let b = i * batches / m;
            batch_sums[b] += v;
            batch_sizes[b] += 1;
        }
        let mut theta = Vec::with_capacity(batches);
        for b in 0..batches {
            let rest = (total - batch_sums[b]) / (m - batch_sizes[b]) as f64;
            theta.push(rest.max(0.0).powf(1.0 / p));
        }
        let mean_theta: f64 = theta.iter().sum::<f64>() / batches as f64;
        let var: f64 = theta.iter().map(|t| (t - mean_theta) * (t - mean_theta)).sum();
        std_error = ((batches - 1) as f64 / batches as f64 * var).sqrt();
    }

    ErrorEstimate { n, p, mean_error, std_error, replications: m, range_breach_count: breaches }
}

/// Endpoint `L^p` error of a scheme against the same-path fine reference,
/// for each `n` in `n_list`. The master grid has `master_ratio * max(n)`
/// steps and one reference run per replication serves every `n`.
///
/// For [`SchemeKind::MilsteinTransformed`] the scheme runs in transformed
/// space started at `G(x0)` and the endpoint is pulled back through
/// `G^{-1}` before comparison; replications whose lookups leave the
/// transform table are dropped and counted.
pub fn scheme_error_sweep(
    model: &DriftModel,
    x0: f64,
    kind: SchemeKind,
    n_list: &[usize],
    p: f64,
    replications: usize,
    seed: u64,
    master_ratio: usize,
) -> Result<Vec<ErrorEstimate>> {
    check_sweep_args(n_list, p, replications, master_ratio)?;
    let n_max = *n_list.last().unwrap();
    if n_list.iter().any(|&n| n_max % n != 0) {
        return Err(Error::invalid("every n in n_list must divide the largest one"));
    }
    let master_n = master_ratio
        .checked_mul(n_max)
        .ok_or_else(|| Error::invalid("master grid size overflows"))?;

    let table = match kind {
        SchemeKind::MilsteinTransformed => Some(build_transform(
            model,
            (x0 - WORKING_HALF_WIDTH, x0 + WORKING_HALF_WIDTH),
            TRANSFORM_NODES,
        )?),
        SchemeKind::Euler => None,
        SchemeKind::ReferenceEuler => {
            return Err(Error::invalid("the reference cannot be swept against itself"));
        }
    };
    let y0 = table.as_ref().map(|t| t.forward(x0)).transpose()?;

    let per_rep: Vec<Vec<Option<f64>>> = (0..replications as u64)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Option<f64>>> {
            let mut rng = stream_rng(seed, rep, StreamRole::GridIncrements);
            let w = sample_brownian(master_n, &mut rng)?;
            let reference = euler(model, x0, &w, master_n, false)?.endpoint;
            let mut gaps = Vec::with_capacity(n_list.len());
            for &n in n_list {
                let gap = match kind {
                    SchemeKind::Euler => {
                        Some((reference - euler(model, x0, &w, n, false)?.endpoint).abs())
                    }
                    SchemeKind::MilsteinTransformed => {
                        let table = table.as_ref().unwrap();
                        match milstein_transformed(table, model, y0.unwrap(), &w, n, false)
                            .and_then(|run| table.inverse(run.endpoint))
                        {
                            Ok(x_end) => Some((reference - x_end).abs()),
                            Err(Error::OutOfRange { .. }) => None,
                            Err(e) => return Err(e),
                        }
                    }
                    SchemeKind::ReferenceEuler => unreachable!(),
                };
                gaps.push(gap);
            }
            Ok(gaps)
        })
        .collect::<Result<_>>()?;

    Ok(collect_estimates(n_list, p, &per_rep))
}

/// Sup-norm `L^p` error of the time-continuous Milstein-type scheme
/// against the transformed fine reference `G(X^ref_t)` on the master grid.
pub fn milstein_supgap_sweep(
    model: &DriftModel,
    x0: f64,
    n_list: &[usize],
    p: f64,
    replications: usize,
    seed: u64,
    master_ratio: usize,
) -> Result<Vec<ErrorEstimate>> {
    check_sweep_args(n_list, p, replications, master_ratio)?;
    let n_max = *n_list.last().unwrap();
    if n_list.iter().any(|&n| n_max % n != 0) {
        return Err(Error::invalid("every n in n_list must divide the largest one"));
    }
    let master_n = master_ratio
        .checked_mul(n_max)
        .ok_or_else(|| Error::invalid("master grid size overflows"))?;
    let table = build_transform(
        model,
        (x0 - WORKING_HALF_WIDTH, x0 + WORKING_HALF_WIDTH),
        TRANSFORM_NODES,
    )?;
    let y0 = table.forward(x0)?;

    let per_rep: Vec<Vec<Option<f64>>> = (0..replications as u64)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Option<f64>>> {
            let mut rng = stream_rng(seed, rep, StreamRole::GridIncrements);
            let w = sample_brownian(master_n, &mut rng)?;
            let x_ref = reference_trajectory(model, x0, &w)?;
            // transformed reference; a breach drops the whole replication
            let mut y_ref = Vec::with_capacity(x_ref.len());
            let mut breached = false;
            for &x in &x_ref {
                match table.forward(x) {
                    Ok(y) => y_ref.push(y),
                    Err(Error::OutOfRange { .. }) => {
                        breached = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if breached {
                return Ok(vec![None; n_list.len()]);
            }
            let mut gaps = Vec::with_capacity(n_list.len());
            for &n in n_list {
                match milstein_transformed(&table, model, y0, &w, n, true) {
                    Ok(run) => {
                        let tr = run.trajectory.as_ref().unwrap();
                        let sup = tr
                            .iter()
                            .zip(&y_ref)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max);
                        gaps.push(Some(sup));
                    }
                    Err(Error::OutOfRange { .. }) => gaps.push(None),
                    Err(e) => return Err(e),
                }
            }
            Ok(gaps)
        })
        .collect::<Result<_>>()?;

    Ok(collect_estimates(n_list, p, &per_rep))
}

/// The coupled-solution gap `(E|X_1 - Xtilde_1|^p)^(1/p)` for each `n`:
/// both endpoints are fine-grid Euler on the two legs of a coupled path
/// pair with grid from `grid_policy`. The master grid has
/// `master_ratio * max(n)` steps and must contain every grid (for
/// augmented grids: `8n` divides the master size).
pub fn coupling_gap_sweep(
    model: &DriftModel,
    x0: f64,
    n_list: &[usize],
    p: f64,
    replications: usize,
    seed: u64,
    master_ratio: usize,
    grid_policy: &GridPolicy,
) -> Result<Vec<ErrorEstimate>> {
    check_sweep_args(n_list, p, replications, master_ratio)?;
    let n_max = *n_list.last().unwrap();
    let master_n = master_ratio
        .checked_mul(n_max)
        .ok_or_else(|| Error::invalid("master grid size overflows"))?;
    let grids: Vec<TimeGrid> = match grid_policy {
        GridPolicy::UniformAugmented => n_list
            .iter()
            .map(|&n| TimeGrid::augmented(n, &[]))
            .collect::<Result<_>>()?,
        GridPolicy::Grids(gs) => {
            if gs.len() != n_list.len() {
                return Err(Error::invalid("one grid per n in n_list is required"));
            }
            gs.clone()
        }
    };
    // validate nesting up front rather than inside the parallel loop
    for g in &grids {
        g.indices_in_master(master_n)?;
    }

    let per_rep: Vec<Vec<Option<f64>>> = (0..replications as u64)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Option<f64>>> {
            let mut gaps = Vec::with_capacity(grids.len());
            for grid in &grids {
                let pair = sample_coupled_pair(master_n, grid, seed, rep)?;
                let x1 = euler(model, x0, pair.w(), master_n, false)?.endpoint;
                let x1_tilde = euler(model, x0, pair.w_tilde(), master_n, false)?.endpoint;
                gaps.push(Some((x1 - x1_tilde).abs()));
            }
            Ok(gaps)
        })
        .collect::<Result<_>>()?;

    Ok(collect_estimates(n_list, p, &per_rep))
}

fn collect_estimates(n_list: &[usize], p: f64, per_rep: &[Vec<Option<f64>>]) -> Vec<ErrorEstimate> {
    n_list
        .iter()
        .enumerate()
        .map(|(col, &n)| {
            let mut gaps = Vec::with_capacity(per_rep.len());
            let mut breaches = 0usize;
            for row in per_rep {
                match row[col] {
                    Some(g) => gaps.push(g),
                    None => breaches += 1,
                }
            }
            estimate_from_gaps(n, p, &gaps, breaches)
        })
        .collect()
}

/// Ordinary least squares on `(ln n, ln error)`.
#[derive(Clone, Debug)]
pub struct RateFit {
    /// The fitted `(n, error)` points.
    pub points: Vec<(f64, f64)>,
    /// Decay exponent `r` in `error ~ C n^(-r)`; positive when errors fall.
    pub slope: f64,
    /// `ln C`.
    pub intercept: f64,
    pub r_squared: f64,
    /// 95% half-width for `slope` from the residual variance.
    pub slope_ci: f64,
}

/// Two-sided 97.5% Student-t quantiles for df = 1..30; 1.96 beyond.
const T_975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160,
    2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056,
    2.052, 2.048, 2.045, 2.042,
];

/// Fit `error ~ C n^(-slope)` by least squares in log-log coordinates.
pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::invalid(format!("rate fit needs >= 3 points, got {}", points.len())));
    }
    if points.windows(2).any(|w| w[0].0 >= w[1].0) || points[0].0 <= 0.0 {
        return Err(Error::invalid("n values must be positive and strictly increasing"));
    }
    if points.iter().any(|&(_, e)| !(e > 0.0)) {
        return Err(Error::invalid("errors must be positive for a log-log fit"));
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, e)| e.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / k;
    let y_mean = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let b = sxy / sxx;
    let intercept = y_mean - b * x_mean;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + b * x);
            r * r
        })
        .sum();
    let sst: f64 = ys.iter().map(|y| (y - y_mean) * (y - y_mean)).sum();
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else if ssr < 1e-28 { 1.0 } else { 0.0 };
    let df = points.len() - 2;
    let se = (ssr / df as f64 / sxx).sqrt();
    let t = if df <= 30 { T_975[df - 1] } else { 1.96 };
    Ok(RateFit {
        points: points.to_vec(),
        slope: -b,
        intercept,
        r_squared,
        slope_ci: t * se,
    })
}

/// [`rate_fit`] with the pre-asymptotic window policy: when the full fit
/// explains less than 98% of the variance and at least four points remain,
/// the smallest `n` is dropped once and the fit repeated. The boolean
/// records whether the drop happened.
pub fn rate_fit_with_window(points: &[(f64, f64)]) -> Result<(RateFit, bool)> {
    let full = rate_fit(points)?;
    if full.r_squared < 0.98 && points.len() >= 4 {
        Ok((rate_fit(&points[1..])?, true))
    } else {
        Ok((full, false))
    }
}

/// Convenience: pair estimates with their step counts for fitting.
pub fn fit_points(estimates: &[ErrorEstimate]) -> Vec<(f64, f64)> {
    estimates.iter().map(|e| (e.n as f64, e.mean_error)).collect()
}

/// Multiply each error by `(ln(n+1))^beta`, removing the known
/// slowly-varying factor the log-weighted drift family carries, so that a
/// power-law fit of the result measures the polynomial exponent.
///
/// The logarithmic exponent itself is far below Monte-Carlo resolution at
/// desk scale -- over `n` in the hundreds the factor bends the raw log-log
/// slope by ~0.2, an order of magnitude above the fit noise, while
/// doubling `n` a dozen more times would be needed to separate candidate
/// log powers. The family's own `beta` is substituted, never fitted.
pub fn deweight_log_factor(points: &[(f64, f64)], beta: f64) -> Vec<(f64, f64)> {
    points
        .iter()
        .map(|&(n, e)| (n, e * (n + 1.0).ln().powf(beta)))
        .collect()
}
