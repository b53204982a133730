//! Brownian paths and the grid-coupled companion motion.
//!
//! For a discretization `pi = {t_1, ..., t_n}` of `[0, 1]` (with `t_0 = 0`)
//! the driving path decomposes as `W = Wbar + B`, where `Wbar` is the
//! piecewise-linear interpolation of `W` at the grid points and `B` is a
//! chain of independent Brownian bridges. Replacing the bridges by fresh
//! independent copies `Btilde` yields a second Brownian motion
//!
//! ```text
//!     Wtilde = Wbar + Btilde
//! ```
//!
//! that agrees with `W` at every grid point -- bitwise, not approximately --
//! yet carries independent fluctuation between them. The gap between the
//! SDE solutions driven by `W` and by `Wtilde` is the engine behind the
//! lower-bound experiments in [`crate::convergence`].
//!
//! Sampling is hierarchical: grid-point values first (their own stream),
//! then the bridges (one stream per interval). Refining the master grid
//! therefore never changes grid-point values, and the coupled bridges are
//! independent of the driving path by construction.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::streams::{stream_rng, StreamRole};
use crate::{Error, Result};

/// Which grid family a [`TimeGrid`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridClass {
    /// An arbitrary discretization `0 < t_1 < ... < t_n = 1`.
    Plain,
    /// The augmented family with parameter `n`: `5n` points after `t_0`
    /// containing the full lattice `j/(4n)`, `j = 1..4n`.
    Augmented,
}

/// A discretization of `[0, 1]`; the stored points include `t_0 = 0` and
/// end exactly at `1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
    class: GridClass,
    /// The `n` parameter: number of inner points for plain grids, the
    /// augmentation parameter for augmented grids.
    n: usize,
}

impl TimeGrid {
    /// Plain grid from the inner points `t_1 < ... < t_n = 1`.
    pub fn plain(inner: Vec<f64>) -> Result<TimeGrid> {
        if inner.is_empty() {
            return Err(Error::invalid("a time grid needs at least t_1 = 1"));
        }
        if *inner.last().unwrap() != 1.0 {
            return Err(Error::invalid("the last grid point must be exactly 1"));
        }
        if inner[0] <= 0.0 {
            return Err(Error::invalid("grid points must be positive"));
        }
        if inner.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("grid points must be strictly increasing"));
        }
        let n = inner.len();
        let mut points = Vec::with_capacity(n + 1);
        points.push(0.0);
        points.extend_from_slice(&inner);
        Ok(TimeGrid { points, class: GridClass::Plain, n })
    }

    /// Equidistant plain grid `{1/n, 2/n, ..., 1}`.
    pub fn uniform(n: usize) -> Result<TimeGrid> {
        if n == 0 {
            return Err(Error::invalid("n must be >= 1"));
        }
        let denom = n as f64;
        TimeGrid::plain((1..=n).map(|j| j as f64 / denom).collect())
    }

    /// Augmented grid with parameter `n`: the lattice `j/(4n)`, the caller's
    /// `extra` points, and deterministic fillers to exactly `5n` points
    /// after `t_0`.
    ///
    /// Fillers are midpoints of the largest remaining gaps, leftmost first.
    /// Every gap bounded by extras is strictly shorter than `1/(4n)`, so a
    /// filler always halves an intact lattice cell and lands on the refined
    /// lattice `(2j+1)/(8n)` -- which keeps augmented grids exactly
    /// representable inside any master grid whose size is a multiple of
    /// `8n`.
    pub fn augmented(n: usize, extra: &[f64]) -> Result<TimeGrid> {
        if n == 0 {
            return Err(Error::invalid("n must be >= 1"));
        }
        let cells = 4 * n;
        let denom = cells as f64;
        let mandatory: Vec<f64> = (1..=cells).map(|j| j as f64 / denom).collect();

        let mut extras: Vec<f64> = Vec::new();
        for &e in extra {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::invalid(format!("extra point {e} outside (0, 1)")));
            }
            if mandatory.binary_search_by(|m| m.total_cmp(&e)).is_ok() {
                continue; // already a lattice point
            }
            extras.push(e);
        }
        extras.sort_by(f64::total_cmp);
        extras.dedup();
        if extras.len() > n {
            return Err(Error::invalid(format!(
                "{} distinct extra points cannot embed into an augmented grid with n = {n}",
                extras.len()
            )));
        }

        let mut cell_taken = vec![false; cells];
        for &e in &extras {
            let j = ((e * denom).floor() as usize).min(cells - 1);
            cell_taken[j] = true;
        }
        let mut points = Vec::with_capacity(5 * n + 1);
        points.push(0.0);
        points.extend_from_slice(&mandatory);
        points.extend_from_slice(&extras);
        let fill_denom = (2 * cells) as f64;
        let mut needed = n - extras.len();
        for (j, taken) in cell_taken.iter().enumerate() {
            if needed == 0 {
                break;
            }
            if !taken {
                points.push((2 * j + 1) as f64 / fill_denom);
                needed -= 1;
            }
        }
        points.sort_by(f64::total_cmp);
        debug_assert_eq!(points.len(), 5 * n + 1);
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        Ok(TimeGrid { points, class: GridClass::Augmented, n })
    }

    /// All grid points including `t_0 = 0`.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Inner points `t_1, ..., t_n` (without `t_0`).
    pub fn inner_points(&self) -> &[f64] {
        &self.points[1..]
    }

    pub fn class(&self) -> GridClass {
        self.class
    }

    /// The grid parameter `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of intervals.
    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }

    /// Largest interval length.
    pub fn max_spacing(&self) -> f64 {
        self.points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Indices of the grid points inside the uniform master grid with
    /// `master_n` steps. Every grid point must be bitwise equal to a master
    /// time `k / master_n`; the grid is rejected otherwise.
    pub fn indices_in_master(&self, master_n: usize) -> Result<Vec<usize>> {
        let denom = master_n as f64;
        let mut indices = Vec::with_capacity(self.points.len());
        for &t in &self.points {
            let k = (t * denom).round() as usize;
            if k > master_n || k as f64 / denom != t {
                return Err(Error::invalid(format!(
                    "grid point {t} does not lie on the master grid with {master_n} steps"
                )));
            }
            indices.push(k);
        }
        Ok(indices)
    }
}

/// Times `k / master_n`, `k = 0..=master_n`.
pub fn master_times(master_n: usize) -> Vec<f64> {
    let denom = master_n as f64;
    (0..=master_n).map(|k| k as f64 / denom).collect()
}

/// Sample a Brownian path on the uniform master grid: `W_0 = 0` and i.i.d.
/// `N(0, 1/master_n)` increments drawn from `rng`.
pub fn sample_brownian<R: Rng>(master_n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if master_n == 0 {
        return Err(Error::invalid("master_n must be >= 1"));
    }
    let sqrt_dt = (1.0 / master_n as f64).sqrt();
    let mut w = Vec::with_capacity(master_n + 1);
    w.push(0.0);
    let mut cur = 0.0;
    for _ in 0..master_n {
        let z: f64 = rng.sample(StandardNormal);
        cur += sqrt_dt * z;
        w.push(cur);
    }
    Ok(w)
}

/// Piecewise-linear interpolation of `path` at the points of `pi`,
/// evaluated on the whole master grid. Grid-point values are copied, not
/// recomputed, so the interpolation is exact there.
pub fn piecewise_linear(path: &[f64], pi: &TimeGrid) -> Result<Vec<f64>> {
    let master_n = path.len().checked_sub(1).filter(|&n| n > 0).ok_or_else(|| {
        Error::invalid("path must hold at least two master values")
    })?;
    let indices = pi.indices_in_master(master_n)?;
    let times = master_times(master_n);
    let mut out = vec![0.0; path.len()];
    for win in indices.windows(2) {
        let (ia, ib) = (win[0], win[1]);
        let (ta, tb) = (times[ia], times[ib]);
        let len = tb - ta;
        out[ia] = path[ia];
        for k in ia + 1..ib {
            let t = times[k];
            out[k] = (t - ta) / len * path[ib] + (tb - t) / len * path[ia];
        }
    }
    let last = *indices.last().unwrap();
    out[last] = path[last];
    Ok(out)
}

/// A driving path and its grid-coupled companion on a shared master grid.
#[derive(Clone, Debug)]
pub struct CoupledPathPair {
    times: Vec<f64>,
    w: Vec<f64>,
    w_tilde: Vec<f64>,
    pi: TimeGrid,
    pi_indices: Vec<usize>,
}

impl CoupledPathPair {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// The original Brownian motion on the master grid.
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// The coupled Brownian motion: equal to `w` at every point of `pi`,
    /// independent bridges elsewhere.
    pub fn w_tilde(&self) -> &[f64] {
        &self.w_tilde
    }

    pub fn pi(&self) -> &TimeGrid {
        &self.pi
    }

    /// Master-grid indices of the coupling points.
    pub fn pi_indices(&self) -> &[usize] {
        &self.pi_indices
    }

    pub fn master_n(&self) -> usize {
        self.times.len() - 1
    }
}

/// Left-to-right conditional sampling of a standard Brownian bridge pinned
/// to 0 at `times[from]` and `times[to]`, written into `out` at the
/// interior indices.
fn fill_bridge<R: Rng>(out: &mut [f64], times: &[f64], from: usize, to: usize, rng: &mut R) {
    let t_end = times[to];
    let mut prev = 0.0;
    let mut t_prev = times[from];
    for k in from + 1..to {
        let t = times[k];
        let remaining = t_end - t_prev;
        let mean = prev * (t_end - t) / remaining;
        let var = (t - t_prev) * (t_end - t) / remaining;
        let z: f64 = rng.sample(StandardNormal);
        prev = mean + var.sqrt() * z;
        t_prev = t;
        out[k] = prev;
    }
}

/// Sample the coupled pair `(W, Wtilde)` for the grid `pi` on the uniform
/// master grid with `master_n` steps.
///
/// Construction order: the grid-point increments of `W` first (stream
/// `GridIncrements`), then per interval one bridge for `W` (streams
/// `BridgeOriginal(i)`) and one fresh, independent bridge for `Wtilde`
/// (streams `BridgeCoupled(i)`). Coupling-point values of `Wtilde` are
/// copied from `W`, so the coupling equality is bitwise.
pub fn sample_coupled_pair(
    master_n: usize,
    pi: &TimeGrid,
    seed: u64,
    replication: u64,
) -> Result<CoupledPathPair> {
    if master_n == 0 {
        return Err(Error::invalid("master_n must be >= 1"));
    }
    let pi_indices = pi.indices_in_master(master_n)?;
    let times = master_times(master_n);

    // grid-point values of W
    let mut rng = stream_rng(seed, replication, StreamRole::GridIncrements);
    let mut w_pi = Vec::with_capacity(pi_indices.len());
    w_pi.push(0.0);
    for win in pi_indices.windows(2) {
        let dt = times[win[1]] - times[win[0]];
        let z: f64 = rng.sample(StandardNormal);
        w_pi.push(w_pi.last().unwrap() + dt.sqrt() * z);
    }

    // piecewise-linear skeleton through the grid-point values
    let mut w = vec![0.0; times.len()];
    let mut w_tilde = vec![0.0; times.len()];
    for (i, win) in pi_indices.windows(2).enumerate() {
        let (ia, ib) = (win[0], win[1]);
        let (ta, tb) = (times[ia], times[ib]);
        let len = tb - ta;
        for k in ia + 1..ib {
            let t = times[k];
            let skeleton = (t - ta) / len * w_pi[i + 1] + (tb - t) / len * w_pi[i];
            w[k] = skeleton;
            w_tilde[k] = skeleton;
        }
    }

    // independent bridges on top of the shared skeleton
    let mut bridge = vec![0.0; times.len()];
    for (i, win) in pi_indices.windows(2).enumerate() {
        let (ia, ib) = (win[0], win[1]);
        let mut rng_b = stream_rng(seed, replication, StreamRole::BridgeOriginal(i));
        fill_bridge(&mut bridge, &times, ia, ib, &mut rng_b);
        for k in ia + 1..ib {
            w[k] += bridge[k];
        }
        let mut rng_bt = stream_rng(seed, replication, StreamRole::BridgeCoupled(i));
        fill_bridge(&mut bridge, &times, ia, ib, &mut rng_bt);
        for k in ia + 1..ib {
            w_tilde[k] += bridge[k];
        }
    }

    // exact coupling at the grid points
    for (i, &idx) in pi_indices.iter().enumerate() {
        w[idx] = w_pi[i];
        w_tilde[idx] = w_pi[i];
    }

    Ok(CoupledPathPair { times, w, w_tilde, pi: pi.clone(), pi_indices })
}

/// Coupled pair restricted to a single coupling interval of length `span`,
/// on a uniform sub-grid with `substeps` steps, both paths started at 0.
/// Returns `(w, w_tilde)` with `w[0] = w_tilde[0] = 0` and
/// `w[substeps] = w_tilde[substeps]`.
pub fn sample_coupled_interval<R: Rng>(
    span: f64,
    substeps: usize,
    rng_w: &mut R,
    rng_bridge: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(span > 0.0) {
        return Err(Error::invalid("interval length must be positive"));
    }
    if substeps < 2 {
        return Err(Error::invalid("need at least 2 substeps"));
    }
    let dt = span / substeps as f64;
    let sqrt_dt = dt.sqrt();
    let mut w = Vec::with_capacity(substeps + 1);
    w.push(0.0);
    let mut cur = 0.0;
    for _ in 0..substeps {
        let z: f64 = rng_w.sample(StandardNormal);
        cur += sqrt_dt * z;
        w.push(cur);
    }
    let end = cur;
    let times: Vec<f64> = (0..=substeps).map(|k| k as f64 * dt).collect();
    let mut w_tilde = vec![0.0; substeps + 1];
    for (k, &t) in times.iter().enumerate() {
        w_tilde[k] = t / span * end;
    }
    let mut bridge = vec![0.0; substeps + 1];
    fill_bridge(&mut bridge, &times, 0, substeps, rng_bridge);
    for k in 1..substeps {
        w_tilde[k] += bridge[k];
    }
    w_tilde[substeps] = end;
    Ok((w, w_tilde))
}

/// Variance of `W_t - Wtilde_u` for `t_lo <= t <= u <= t_hi` within one
/// coupling interval `[t_lo, t_hi]`:
///
/// ```text
///     (u - t) + 2 (t - t_lo)(t_hi - u) / (t_hi - t_lo).
/// ```
pub fn bridge_cross_variance(t_lo: f64, t_hi: f64, t: f64, u: f64) -> Result<f64> {
    if !(t_lo < t_hi) {
        return Err(Error::invalid("interval must have positive length"));
    }
    if !(t_lo <= t && t <= u && u <= t_hi) {
        return Err(Error::invalid(format!(
            "need t_lo <= t <= u <= t_hi, got t_lo={t_lo}, t={t}, u={u}, t_hi={t_hi}"
        )));
    }
    Ok((u - t) + 2.0 * (t - t_lo) * (t_hi - u) / (t_hi - t_lo))
}
