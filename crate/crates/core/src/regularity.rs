//! Numerical probes for Hölder and fractional-Sobolev regularity.
//!
//! Both probes are estimates, not certificates: the Hölder probe is a lower
//! estimate of the seminorm `sup |f(x)-f(y)| / |x-y|^alpha` (a finite
//! maximum can only undershoot a supremum), and the Gagliardo probe is a
//! truncated quadrature of the double integral
//! `int int |f(x)-f(y)|^p / |x-y|^(1+alpha p) dx dy`. Membership or
//! non-membership in the regularity class shows up as stabilisation or
//! divergence of the probe under refinement.

use rand::Rng;

use crate::quad::KahanSum;
use crate::streams::{stream_rng, StreamRole};
use crate::{Error, Result};

/// Dyadic offsets go down to `span * 2^-40`.
const DYADIC_LEVELS: u32 = 40;

fn check_interval(interval: (f64, f64), what: &str) -> Result<()> {
    let (lo, hi) = interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(format!("{what} must be a nonempty finite interval, got [{lo}, {hi}]")));
    }
    Ok(())
}

/// Lower estimate of the Hölder-`alpha` seminorm of `f` on `domain`,
/// maximised over `samples` pairs mixing uniform random pairs with pairs at
/// dyadic distances. For a fixed seed the pair sequence extends as
/// `samples` grows, so the probe is nondecreasing in `samples`.
pub fn holder_seminorm_probe<F: Fn(f64) -> f64>(
    f: F,
    alpha: f64,
    domain: (f64, f64),
    samples: usize,
    seed: u64,
) -> Result<f64> {
    check_interval(domain, "domain")?;
    if samples < 2 {
        return Err(Error::invalid("need at least 2 sample pairs"));
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha must be positive"));
    }
    let (lo, hi) = domain;
    let span = hi - lo;
    let mut rng = stream_rng(seed, 0, StreamRole::Probe(0));
    let mut best = 0.0f64;
    for i in 0..samples {
        let x = lo + span * rng.random::<f64>();
        let level = i as u32 % (DYADIC_LEVELS + 1);
        let y = if level == 0 {
            lo + span * rng.random::<f64>()
        } else {
            let off = span * (-(level as f64)).exp2();
            if x + off <= hi {
                x + off
            } else {
                x - off
            }
        };
        let gap = (x - y).abs();
        if gap > 0.0 {
            best = best.max((f(x) - f(y)).abs() / gap.powf(alpha));
        }
    }
    Ok(best)
}

/// Largest ratio `|f(x+d) - f(x)| / d^alpha` over `pairs` random base
/// points, at one fixed distance `d`. Running this over shrinking
/// distances gives the stabilisation / divergence evidence for Hölder
/// membership at exponent `alpha`.
pub fn probe_at_scale<F: Fn(f64) -> f64>(
    f: F,
    alpha: f64,
    domain: (f64, f64),
    distance: f64,
    pairs: usize,
    seed: u64,
) -> Result<f64> {
    check_interval(domain, "domain")?;
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha must be positive"));
    }
    let (lo, hi) = domain;
    let span = hi - lo;
    if !(distance > 0.0 && distance < span) {
        return Err(Error::invalid(format!("distance must lie in (0, span), got {distance}")));
    }
    if pairs == 0 {
        return Err(Error::invalid("need at least one pair"));
    }
    let mut rng = stream_rng(seed, 1, StreamRole::Probe(0));
    let denom = distance.powf(alpha);
    let mut best = 0.0f64;
    for _ in 0..pairs {
        let x = lo + (span - distance) * rng.random::<f64>();
        best = best.max((f(x + distance) - f(x)).abs() / denom);
    }
    Ok(best)
}

/// Midpoint tensor-grid estimate of the Gagliardo double integral of a
/// function compactly supported in `support`, over
/// `support x (support enlarged by its own length on both sides)`.
///
/// The inner and outer grids share one lattice of spacing
/// `|support| / grid_n`; the cell pair containing the diagonal `x = y` is
/// excluded symmetrically. The integrand is singular there but integrable
/// off the diagonal exactly when `f` has the claimed regularity, so
/// membership is read off a refinement study of this estimate.
pub fn gagliardo_seminorm<F: Fn(f64) -> f64>(
    f: F,
    alpha: f64,
    p: f64,
    support: (f64, f64),
    grid_n: usize,
) -> Result<f64> {
    check_interval(support, "support")?;
    if grid_n < 8 {
        return Err(Error::invalid(format!("grid_n must be >= 8, got {grid_n}")));
    }
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha must be positive"));
    }
    let (a, b) = support;
    let len = b - a;
    let dx = len / grid_n as f64;
    let y_lo = a - len;
    let exponent = 1.0 + alpha * p;
    // midpoints share one lattice; evaluate f once per lattice point
    let lattice = |j: usize| y_lo + (j as f64 + 0.5) * dx;
    let fy: Vec<f64> = (0..3 * grid_n).map(|j| f(lattice(j))).collect();
    let mut acc = KahanSum::new();
    for i in 0..grid_n {
        let x = lattice(grid_n + i);
        let fx = fy[grid_n + i];
        let mut row = KahanSum::new();
        for (j, &fyj) in fy.iter().enumerate() {
            let y = lattice(j);
            let gap = (x - y).abs();
            if gap < 0.5 * dx {
                continue; // diagonal cell, excluded symmetrically
            }
            let diff = (fx - fyj).abs();
            if diff > 0.0 {
                row.add(diff.powf(p) / gap.powf(exponent));
            }
        }
        acc.add(row.value());
    }
    Ok(acc.value() * dx * dx)
}
