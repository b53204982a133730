//! Numerical integrators for the SDE and its drift-removed transform.
//!
//! Three schemes, all reading the driving path only at master-grid times:
//!
//! - equidistant Euler for the original SDE,
//!   `X_{(i+1)/n} = X_{i/n} + mu(X_{i/n})/n + (W_{(i+1)/n} - W_{i/n})`,
//! - the time-continuous Milstein-type scheme for the transformed SDE
//!   `dY = b(Y) dW`,
//!   `Y_t = Y_k + b(Y_k)(W_t - W_k) + 1/2 (b b')(Y_k)((W_t - W_k)^2 - (t - k/n))`
//!   on each step `(k/n, (k+1)/n]`,
//! - fine-grid Euler on the full master grid as the reference proxy for the
//!   exact solution.
//!
//! State is carried as `x0 + W_t + accumulated correction`, so a zero-drift
//! (resp. unit-diffusion) path telescopes to `x0 + W_t` exactly and schemes
//! run on coupled paths agree bitwise wherever the paths do.

use crate::drift::DriftModel;
use crate::transform::TransformTable;
use crate::{Error, Result};

/// Scheme selector used by sweeps and CSV metadata.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    Euler,
    MilsteinTransformed,
    ReferenceEuler,
}

impl SchemeKind {
    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Euler => "euler",
            SchemeKind::MilsteinTransformed => "milstein-transformed",
            SchemeKind::ReferenceEuler => "reference-euler",
        }
    }
}

/// Output of one scheme run on one driving path.
#[derive(Clone, Debug)]
pub struct SchemeRun {
    pub kind: SchemeKind,
    pub steps: usize,
    pub initial: f64,
    pub endpoint: f64,
    /// Values on the master grid when trajectory storage was requested.
    pub trajectory: Option<Vec<f64>>,
    /// Range breaches encountered; successful runs report 0 (breaching
    /// runs surface as [`Error::OutOfRange`] and are counted by the caller).
    pub range_breach_count: usize,
}

fn check_divides(master_n: usize, n: usize) -> Result<()> {
    if n == 0 || master_n % n != 0 {
        return Err(Error::invalid(format!(
            "scheme steps {n} must divide the master grid size {master_n}"
        )));
    }
    Ok(())
}

/// Equidistant Euler scheme with `n` steps on the master-grid path `w`.
pub fn euler(
    model: &DriftModel,
    x0: f64,
    w: &[f64],
    n: usize,
    store_trajectory: bool,
) -> Result<SchemeRun> {
    let master_n = w.len().checked_sub(1).filter(|&m| m > 0).ok_or_else(|| {
        Error::invalid("driving path must hold at least two master values")
    })?;
    check_divides(master_n, n)?;
    let stride = master_n / n;
    let dt = 1.0 / n as f64;
    let mut trajectory = store_trajectory.then(|| vec![0.0; w.len()]);

    // X_k = x0 + W_k + drift accumulator
    let mut drift_acc = 0.0;
    let mut x = x0 + w[0];
    if let Some(tr) = trajectory.as_mut() {
        tr[0] = x;
    }
    for step in 0..n {
        let slope = model.eval(x)?;
        if let Some(tr) = trajectory.as_mut() {
            // time-continuous Euler between the knots
            for k in step * stride + 1..(step + 1) * stride {
                let tau = (k - step * stride) as f64 / master_n as f64;
                tr[k] = x0 + drift_acc + slope * tau + w[k];
            }
        }
        drift_acc += slope * dt;
        x = x0 + drift_acc + w[(step + 1) * stride];
        if let Some(tr) = trajectory.as_mut() {
            tr[(step + 1) * stride] = x;
        }
    }
    Ok(SchemeRun {
        kind: SchemeKind::Euler,
        steps: n,
        initial: x0,
        endpoint: x,
        trajectory,
        range_breach_count: 0,
    })
}

/// Time-continuous Milstein-type scheme with `n` steps for the transformed
/// SDE, driven by the master-grid path `w` and started at
/// `y0 = G(x0)`. Returns the values on the whole master grid.
///
/// Table lookups that leave the working range surface as
/// [`Error::OutOfRange`]; callers treat the replication as breached.
pub fn milstein_transformed(
    table: &TransformTable,
    model: &DriftModel,
    y0: f64,
    w: &[f64],
    n: usize,
    store_trajectory: bool,
) -> Result<SchemeRun> {
    let master_n = w.len().checked_sub(1).filter(|&m| m > 0).ok_or_else(|| {
        Error::invalid("driving path must hold at least two master values")
    })?;
    check_divides(master_n, n)?;
    let stride = master_n / n;
    let dt_master = 1.0 / master_n as f64;
    let mut trajectory = store_trajectory.then(|| vec![0.0; w.len()]);

    // Y_t = y0 + W_t + correction accumulator; the correction collects
    // (b - 1) dW and the Milstein term, so b = 1, b' = 0 telescopes to
    // y0 + W_t exactly.
    let mut corr = 0.0;
    let mut y = y0 + w[0];
    if let Some(tr) = trajectory.as_mut() {
        tr[0] = y;
    }
    for step in 0..n {
        let b = table.diffusion_b(y)?;
        let bp = table.diffusion_b_prime(model, y)?;
        let half_bbp = 0.5 * b * bp;
        let knot = step * stride;
        let w_knot = w[knot];
        if let Some(tr) = trajectory.as_mut() {
            for k in knot + 1..knot + stride {
                let dw = w[k] - w_knot;
                let tau = (k - knot) as f64 * dt_master;
                tr[k] = y0 + corr + w[k] + (b - 1.0) * dw + half_bbp * (dw * dw - tau);
            }
        }
        let dw = w[knot + stride] - w_knot;
        corr += (b - 1.0) * dw + half_bbp * (dw * dw - stride as f64 * dt_master);
        y = y0 + corr + w[knot + stride];
        if let Some(tr) = trajectory.as_mut() {
            tr[knot + stride] = y;
        }
    }
    Ok(SchemeRun {
        kind: SchemeKind::MilsteinTransformed,
        steps: n,
        initial: y0,
        endpoint: y,
        trajectory,
        range_breach_count: 0,
    })
}

/// Fine-grid Euler endpoint on the full master grid, used as the proxy for
/// the exact solution. `compared_n` lists the scheme resolutions the
/// reference will be held against; the master grid must be at least `2^6`
/// times finer than each of them.
pub fn reference_solution(model: &DriftModel, x0: f64, w: &[f64], compared_n: &[usize]) -> Result<f64> {
    let master_n = w.len().checked_sub(1).filter(|&m| m > 0).ok_or_else(|| {
        Error::invalid("driving path must hold at least two master values")
    })?;
    for &n in compared_n {
        check_divides(master_n, n)?;
        if master_n / n < 64 {
            return Err(Error::invalid(format!(
                "reference ratio {}/{n} below the required 2^6",
                master_n
            )));
        }
    }
    Ok(euler(model, x0, w, master_n, false)?.endpoint)
}

/// Fine-grid Euler trajectory on the full master grid.
pub fn reference_trajectory(model: &DriftModel, x0: f64, w: &[f64]) -> Result<Vec<f64>> {
    let master_n = w.len().checked_sub(1).filter(|&m| m > 0).ok_or_else(|| {
        Error::invalid("driving path must hold at least two master values")
    })?;
    Ok(euler(model, x0, w, master_n, true)?.trajectory.unwrap())
}
