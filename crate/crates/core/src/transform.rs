//! The drift-removing space transform.
//!
//! For a drift `mu` with bounded antiderivative the map
//!
//! ```text
//!     G(x) = int_0^x exp(-2 T(y)) dy,      T(y) = int_0^y mu(z) dz,
//! ```
//!
//! is a bi-Lipschitz bijection with `G' = exp(-2T)` pinched between
//! `c1 = exp(-2 sup|T|)` and `c2 = exp(+2 sup|T|)`. Applying `G` to the SDE
//! solution removes the drift and leaves the diffusion coefficient
//! `b = G' o G^{-1}`, whose weak derivative is `b' = -2 mu o G^{-1}`.
//!
//! [`TransformTable`] tabulates `T` and `G` on a working interval by
//! cumulative composite Simpson, anchored at the node `x = 0`, and answers
//! queries by shape-preserving cubic Hermite interpolation. `T` is computed
//! once and reused for `b = exp(-2 T o G^{-1})` rather than differentiating
//! the `G` table. Queries outside the working interval return
//! [`Error::OutOfRange`]; the table never extrapolates.

use std::io::{BufRead, Write};

use crate::drift::DriftModel;
use crate::{Error, Result};

/// Tabulated transform with certified derivative bounds.
///
/// Immutable after construction; all queries are pure.
#[derive(Clone, Debug)]
pub struct TransformTable {
    nodes: Vec<f64>,
    t_values: Vec<f64>,
    g_values: Vec<f64>,
    /// Hermite slopes for G: `exp(-2T)` at the nodes, monotonicity-limited.
    g_slopes: Vec<f64>,
    /// Hermite slopes for T: the drift at the nodes.
    t_slopes: Vec<f64>,
    c1: f64,
    c2: f64,
    sup_t: f64,
    refinement_error: f64,
}

struct RawTable {
    nodes: Vec<f64>,
    t_values: Vec<f64>,
    g_values: Vec<f64>,
    mu_nodes: Vec<f64>,
    sup_t: f64,
}

/// Build the transform table for `model` on `working_interval` with
/// `nodes_n` grid nodes. The interval must contain 0; the inner integral
/// `T` and the outer integral `G` are both computed by composite Simpson
/// anchored at the zero node, and the interpolation error is estimated by a
/// doubled-resolution rebuild (recorded in
/// [`TransformTable::refinement_error`]).
pub fn build_transform(
    model: &DriftModel,
    working_interval: (f64, f64),
    nodes_n: usize,
) -> Result<TransformTable> {
    let (lo, hi) = working_interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(format!("working interval [{lo}, {hi}] is empty or non-finite")));
    }
    if !(lo <= 0.0 && 0.0 <= hi) {
        return Err(Error::invalid("working interval must contain 0"));
    }
    if nodes_n < 64 {
        return Err(Error::invalid(format!("nodes_n must be >= 64, got {nodes_n}")));
    }

    let (n_left, n_right) = split_cells(lo, hi, nodes_n - 1);
    let coarse = build_raw(model, lo, hi, n_left, n_right)?;
    let fine = build_raw(model, lo, hi, 2 * n_left, 2 * n_right)?;
    let mut refinement_error = 0.0f64;
    for (i, g) in coarse.g_values.iter().enumerate() {
        debug_assert_eq!(coarse.nodes[i], fine.nodes[2 * i]);
        refinement_error = refinement_error.max((g - fine.g_values[2 * i]).abs());
    }

    let sup_t = coarse.sup_t.max(fine.sup_t);
    let c1 = (-2.0 * sup_t).exp();
    let c2 = (2.0 * sup_t).exp();

    // Monotonicity-limited Hermite slopes for G. The raw slope exp(-2T) is
    // already consistent with the secants; the Fritsch-Carlson cap keeps
    // the interpolant monotone even in degenerate cases.
    let n = coarse.nodes.len();
    let mut secants = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let w = coarse.nodes[i + 1] - coarse.nodes[i];
        let s = (coarse.g_values[i + 1] - coarse.g_values[i]) / w;
        if !(s > 0.0) {
            return Err(Error::Construction(format!(
                "tabulated G not strictly increasing near x = {}",
                coarse.nodes[i]
            )));
        }
        if s < c1 * (1.0 - 1e-9) || s > c2 * (1.0 + 1e-9) {
            return Err(Error::Construction(format!(
                "secant slope {s} escapes certified bounds [{c1}, {c2}]"
            )));
        }
        secants.push(s);
    }
    let mut g_slopes = Vec::with_capacity(n);
    for i in 0..n {
        let raw = (-2.0 * coarse.t_values[i]).exp();
        let cap = if i == 0 {
            3.0 * secants[0]
        } else if i == n - 1 {
            3.0 * secants[n - 2]
        } else {
            3.0 * secants[i - 1].min(secants[i])
        };
        g_slopes.push(raw.min(cap));
    }

    let t_slopes = coarse.mu_nodes.clone();
    Ok(TransformTable {
        nodes: coarse.nodes,
        t_values: coarse.t_values,
        g_values: coarse.g_values,
        g_slopes,
        t_slopes,
        c1,
        c2,
        sup_t,
        refinement_error,
    })
}

/// Split `cells` between `[lo, 0]` and `[0, hi]` proportionally to length.
/// Shared by the coarse build and the doubled-resolution self-check so the
/// coarse nodes reappear exactly in the doubled grid.
fn split_cells(lo: f64, hi: f64, cells: usize) -> (usize, usize) {
    let mut n_left = ((-lo / (hi - lo)) * cells as f64).round() as usize;
    if lo < 0.0 {
        n_left = n_left.max(1);
    }
    if hi > 0.0 {
        n_left = n_left.min(cells - 1);
    } else {
        n_left = cells;
    }
    (n_left, cells - n_left)
}

/// Node grid with `x = 0` as an exact grid point: two near-uniform
/// segments on `[lo, 0]` and `[0, hi]`.
fn node_grid(lo: f64, hi: f64, n_left: usize, n_right: usize) -> (Vec<f64>, usize) {
    let mut nodes = Vec::with_capacity(n_left + n_right + 1);
    for k in 0..n_left {
        nodes.push(lo * ((n_left - k) as f64 / n_left as f64));
    }
    nodes.push(0.0);
    for k in 1..=n_right {
        nodes.push(hi * (k as f64 / n_right as f64));
    }
    (nodes, n_left)
}

fn build_raw(model: &DriftModel, lo: f64, hi: f64, n_left: usize, n_right: usize) -> Result<RawTable> {
    let (nodes, zero_index) = node_grid(lo, hi, n_left, n_right);
    let n = nodes.len();

    let mu = |x: f64| model.eval(x);
    let mut mu_nodes = Vec::with_capacity(n);
    for &x in &nodes {
        mu_nodes.push(mu(x)?);
    }

    // Cumulative T by per-half-cell Simpson, anchored at the zero node so
    // T(0) = 0 holds exactly. Midpoint values of T are kept for the
    // certified bounds and the G integration.
    let mut t_values = vec![0.0; n];
    let mut t_mid = vec![0.0; n - 1];
    let half_step = |a: f64, b: f64, mu_a: f64, mu_b: f64| -> Result<f64> {
        let m = 0.5 * (a + b);
        Ok((b - a) * ((mu_a + 4.0 * mu(m)? + mu_b) / 6.0))
    };
    for i in zero_index..n - 1 {
        let m = 0.5 * (nodes[i] + nodes[i + 1]);
        let mu_m = mu(m)?;
        t_mid[i] = t_values[i] + half_step(nodes[i], m, mu_nodes[i], mu_m)?;
        t_values[i + 1] = t_mid[i] + half_step(m, nodes[i + 1], mu_m, mu_nodes[i + 1])?;
    }
    for i in (0..zero_index).rev() {
        let m = 0.5 * (nodes[i] + nodes[i + 1]);
        let mu_m = mu(m)?;
        t_mid[i] = t_values[i + 1] - half_step(m, nodes[i + 1], mu_m, mu_nodes[i + 1])?;
        t_values[i] = t_mid[i] - half_step(nodes[i], m, mu_nodes[i], mu_m)?;
    }

    let mut sup_t = 0.0f64;
    for &t in t_values.iter().chain(t_mid.iter()) {
        sup_t = sup_t.max(t.abs());
    }

    // Cumulative G over full cells with the midpoint T values.
    let mut g_values = vec![0.0; n];
    let g = |t: f64| (-2.0 * t).exp();
    for i in zero_index..n - 1 {
        let w = nodes[i + 1] - nodes[i];
        let inc = w * ((g(t_values[i]) + 4.0 * g(t_mid[i]) + g(t_values[i + 1])) / 6.0);
        g_values[i + 1] = g_values[i] + inc;
    }
    for i in (0..zero_index).rev() {
        let w = nodes[i + 1] - nodes[i];
        let inc = w * ((g(t_values[i]) + 4.0 * g(t_mid[i]) + g(t_values[i + 1])) / 6.0);
        g_values[i] = g_values[i + 1] - inc;
    }

    Ok(RawTable { nodes, t_values, g_values, mu_nodes, sup_t })
}

#[inline]
fn hermite(t: f64, w: f64, v0: f64, v1: f64, d0: f64, d1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * v0
        + (t3 - 2.0 * t2 + t) * w * d0
        + (-2.0 * t3 + 3.0 * t2) * v1
        + (t3 - t2) * w * d1
}

#[inline]
fn hermite_deriv(t: f64, w: f64, v0: f64, v1: f64, d0: f64, d1: f64) -> f64 {
    let t2 = t * t;
    (6.0 * t2 - 6.0 * t) * (v0 - v1) / w + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (3.0 * t2 - 2.0 * t) * d1
}

impl TransformTable {
    /// Certified lower bound `exp(-2 sup|T|)` on the tabulated `G'`.
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// Certified upper bound `exp(+2 sup|T|)` on the tabulated `G'`.
    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// Largest `|T|` over the tabulated nodes and midpoints.
    pub fn sup_t(&self) -> f64 {
        self.sup_t
    }

    /// Max change of tabulated `G` under a doubled-resolution rebuild.
    pub fn refinement_error(&self) -> f64 {
        self.refinement_error
    }

    pub fn working_interval(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    /// Image of the working interval under `G`.
    pub fn value_range(&self) -> (f64, f64) {
        (self.g_values[0], self.g_values[self.g_values.len() - 1])
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn cell_for(&self, x: f64) -> Result<usize> {
        let last = self.nodes.len() - 1;
        if !(x >= self.nodes[0] && x <= self.nodes[last]) {
            return Err(Error::OutOfRange { value: x, lo: self.nodes[0], hi: self.nodes[last] });
        }
        Ok(self.nodes.partition_point(|&v| v <= x).clamp(1, last) - 1)
    }

    /// `G(x)`. Strictly increasing; errors outside the working interval.
    pub fn forward(&self, x: f64) -> Result<f64> {
        let i = self.cell_for(x)?;
        let w = self.nodes[i + 1] - self.nodes[i];
        let t = (x - self.nodes[i]) / w;
        Ok(hermite(t, w, self.g_values[i], self.g_values[i + 1], self.g_slopes[i], self.g_slopes[i + 1]))
    }

    /// `G^{-1}(y)` by safeguarded Newton within the bracketing cell.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let last = self.g_values.len() - 1;
        if !(y >= self.g_values[0] && y <= self.g_values[last]) {
            return Err(Error::OutOfRange { value: y, lo: self.g_values[0], hi: self.g_values[last] });
        }
        let i = self.g_values.partition_point(|&v| v <= y).clamp(1, last) - 1;
        let w = self.nodes[i + 1] - self.nodes[i];
        let (v0, v1) = (self.g_values[i], self.g_values[i + 1]);
        let (d0, d1) = (self.g_slopes[i], self.g_slopes[i + 1]);
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let mut t = ((y - v0) / (v1 - v0)).clamp(0.0, 1.0);
        for _ in 0..80 {
            let res = hermite(t, w, v0, v1, d0, d1) - y;
            if res == 0.0 {
                break;
            }
            if res > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let slope = hermite_deriv(t, w, v0, v1, d0, d1);
            let newton = t - res / (slope * w);
            t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-17 {
                break;
            }
        }
        Ok(self.nodes[i] + t * w)
    }

    fn t_at(&self, x: f64) -> Result<f64> {
        let i = self.cell_for(x)?;
        let w = self.nodes[i + 1] - self.nodes[i];
        let t = (x - self.nodes[i]) / w;
        Ok(hermite(t, w, self.t_values[i], self.t_values[i + 1], self.t_slopes[i], self.t_slopes[i + 1]))
    }

    /// Diffusion coefficient of the transformed SDE,
    /// `b(y) = exp(-2 T(G^{-1}(y)))`, clamped to the certified band
    /// `[c1, c2]`.
    pub fn diffusion_b(&self, y: f64) -> Result<f64> {
        let x = self.inverse(y)?;
        let t = self.t_at(x)?.clamp(-self.sup_t, self.sup_t);
        Ok((-2.0 * t).exp())
    }

    /// Weak derivative of the diffusion coefficient,
    /// `b'(y) = -2 mu(G^{-1}(y))`.
    pub fn diffusion_b_prime(&self, model: &DriftModel, y: f64) -> Result<f64> {
        let x = self.inverse(y)?;
        Ok(-2.0 * model.eval(x)?)
    }

    /// Export the table as CSV (`x, T, G` columns with `#` metadata);
    /// a debugging artifact, not a load-bearing format.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# version: {}", crate::artifact_version())?;
        writeln!(out, "# c1: {}", self.c1)?;
        writeln!(out, "# c2: {}", self.c2)?;
        writeln!(out, "# sup_t: {}", self.sup_t)?;
        writeln!(out, "# refinement_error: {}", self.refinement_error)?;
        writeln!(out, "x,T,G")?;
        for i in 0..self.nodes.len() {
            writeln!(out, "{},{},{}", self.nodes[i], self.t_values[i], self.g_values[i])?;
        }
        Ok(())
    }

    /// Rebuild a queryable table from an exported CSV. Hermite slopes for
    /// `T` are recovered by central differences, so round-tripped tables
    /// agree with the original to interpolation accuracy only.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<TransformTable> {
        let mut nodes = Vec::new();
        let mut t_values = Vec::new();
        let mut g_values = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
                continue;
            }
            let mut it = line.split(',');
            let mut next = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| Error::invalid("malformed table CSV row"))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::invalid(format!("malformed table CSV number: {e}")))
            };
            nodes.push(next()?);
            t_values.push(next()?);
            g_values.push(next()?);
        }
        let n = nodes.len();
        if n < 2 {
            return Err(Error::invalid("table CSV holds fewer than 2 rows"));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) || g_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("table CSV must be strictly increasing in x and G"));
        }
        let sup_t = t_values.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let c1 = (-2.0 * sup_t).exp();
        let c2 = (2.0 * sup_t).exp();
        let mut secants = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            secants.push((g_values[i + 1] - g_values[i]) / (nodes[i + 1] - nodes[i]));
        }
        let mut g_slopes = Vec::with_capacity(n);
        let mut t_slopes = Vec::with_capacity(n);
        for i in 0..n {
            let raw = (-2.0 * t_values[i]).exp();
            let cap = if i == 0 {
                3.0 * secants[0]
            } else if i == n - 1 {
                3.0 * secants[n - 2]
            } else {
                3.0 * secants[i - 1].min(secants[i])
            };
            g_slopes.push(raw.min(cap));
            let d = if i == 0 {
                (t_values[1] - t_values[0]) / (nodes[1] - nodes[0])
            } else if i == n - 1 {
                (t_values[n - 1] - t_values[n - 2]) / (nodes[n - 1] - nodes[n - 2])
            } else {
                (t_values[i + 1] - t_values[i - 1]) / (nodes[i + 1] - nodes[i - 1])
            };
            t_slopes.push(d);
        }
        Ok(TransformTable {
            nodes,
            t_values,
            g_values,
            g_slopes,
            t_slopes,
            c1,
            c2,
            sup_t,
            refinement_error: f64::NAN,
        })
    }
}
