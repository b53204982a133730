//! Drift coefficient families.
//!
//! The two lacunary-series drifts
//!
//! ```text
//!     mu_alpha(x)      = sum_{j>=1} 2^(-alpha j) sin(2^j x)
//!     mu_alpha_beta(x) = 1_{[-2pi, 4pi]}(x) * sum_{j>=1} j^(-beta) 2^(-alpha j) sin(2^j x)
//! ```
//!
//! are evaluated with a certified series truncation: the cut-off `J` is the
//! smallest integer whose geometric tail bound `sum_{j>J} 2^(-alpha j)` does
//! not exceed the requested `tail_tol`. Evaluation is deterministic and pure;
//! models are immutable after construction and safe to share across threads.
//!
//! The series evaluator exploits that consecutive frequencies double:
//! `sin(2^(j+1) x)` follows from `sin/cos(2^j x)` by the double-angle
//! formulas, with a fresh `sin_cos` resynchronisation every few terms to
//! stop round-off growth. Argument scaling by `2^j` is exact in binary
//! floating point, so each resynchronisation restores full accuracy.

use std::collections::BTreeMap;

use crate::cplx::Cplx;
use crate::quad::KahanSum;
use crate::{Error, Result};

/// Left end of the support of the Sobolev-type drift, `-2 pi`.
pub const SOBOLEV_SUPPORT_LO: f64 = -2.0 * std::f64::consts::PI;
/// Right end of the support of the Sobolev-type drift, `4 pi`.
pub const SOBOLEV_SUPPORT_HI: f64 = 4.0 * std::f64::consts::PI;

const SQRT_2PI: f64 = 2.5066282746310002;

/// Number of series terms between exact `sin_cos` resynchronisations.
const RESYNC_EVERY: usize = 8;

/// Which drift family a [`DriftModel`] evaluates.
#[derive(Clone, Debug, PartialEq)]
pub enum DriftKind {
    /// `mu_alpha`: bounded, `2 pi`-periodic, exactly `alpha`-Hölder.
    Weierstrass { alpha: f64 },
    /// `mu_{alpha,beta}`: the log-weighted series cut to `[-2 pi, 4 pi]`;
    /// bounded, `alpha`-Hölder and of fractional Sobolev regularity.
    WeierstrassSobolev { alpha: f64, beta: f64 },
    /// Constant drift; the classical closed-form baseline.
    Constant(f64),
    /// Zero drift; the SDE solution is `x0 + W_t`.
    Zero,
    /// Piecewise-linear interpolation of user samples, held constant
    /// outside the sampled range. Note: nothing checks the boundedness of
    /// `sup_y |int_0^y mu|` required by the transform theory for this kind.
    CustomTable { xs: Vec<f64>, ys: Vec<f64> },
}

#[derive(Clone, Copy, Debug)]
struct SeriesTerm {
    /// `2^j`, exact in f64.
    scale: f64,
    /// `2^(-alpha j)` resp. `j^(-beta) 2^(-alpha j)`.
    amplitude: f64,
}

/// A drift coefficient with certified truncation and, for the series
/// families, analytic Fourier structure.
#[derive(Clone, Debug)]
pub struct DriftModel {
    kind: DriftKind,
    truncation: usize,
    tail_tol: f64,
    terms: Vec<SeriesTerm>,
}

/// Geometric tail bound `sum_{j>J} 2^(-alpha j) = 2^(-alpha(J+1)) / (1 - 2^(-alpha))`.
pub fn series_tail_bound(alpha: f64, truncation: usize) -> f64 {
    let q = (-alpha).exp2();
    q.powi(truncation as i32 + 1) / (1.0 - q)
}

fn smallest_truncation(alpha: f64, tail_tol: f64) -> Result<usize> {
    for j in 1..=4096 {
        if series_tail_bound(alpha, j) <= tail_tol {
            return Ok(j);
        }
    }
    Err(Error::invalid(format!(
        "tail tolerance {tail_tol} unreachable for alpha {alpha} within 4096 terms"
    )))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0,1), got {alpha}")));
    }
    Ok(())
}

impl DriftModel {
    /// Default truncation tolerance; far below every statistical tolerance
    /// used by the experiments.
    pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

    pub fn weierstrass(alpha: f64) -> Result<Self> {
        Self::weierstrass_with_tail_tol(alpha, Self::DEFAULT_TAIL_TOL)
    }

    pub fn weierstrass_with_tail_tol(alpha: f64, tail_tol: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(tail_tol > 0.0) {
            return Err(Error::invalid("tail_tol must be positive"));
        }
        let truncation = smallest_truncation(alpha, tail_tol)?;
        Ok(Self::assemble(DriftKind::Weierstrass { alpha }, truncation, tail_tol))
    }

    /// Build with an explicit cut-off; `tail_tol` becomes the tail bound at `truncation`.
    pub fn weierstrass_with_truncation(alpha: f64, truncation: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if truncation == 0 {
            return Err(Error::invalid("truncation must be >= 1"));
        }
        let tol = series_tail_bound(alpha, truncation);
        Ok(Self::assemble(DriftKind::Weierstrass { alpha }, truncation, tol))
    }

    pub fn weierstrass_sobolev(alpha: f64, beta: f64) -> Result<Self> {
        Self::weierstrass_sobolev_with_tail_tol(alpha, beta, Self::DEFAULT_TAIL_TOL)
    }

    pub fn weierstrass_sobolev_with_tail_tol(alpha: f64, beta: f64, tail_tol: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(beta > 0.0) {
            return Err(Error::invalid(format!("beta must be positive, got {beta}")));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::invalid("tail_tol must be positive"));
        }
        // The log weight j^(-beta) <= 1 only shrinks the tail, so the
        // geometric bound certifies this family as well.
        let truncation = smallest_truncation(alpha, tail_tol)?;
        Ok(Self::assemble(DriftKind::WeierstrassSobolev { alpha, beta }, truncation, tail_tol))
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::invalid("constant drift must be finite"));
        }
        Ok(DriftModel { kind: DriftKind::Constant(c), truncation: 0, tail_tol: 0.0, terms: Vec::new() })
    }

    pub fn zero() -> Self {
        DriftModel { kind: DriftKind::Zero, truncation: 0, tail_tol: 0.0, terms: Vec::new() }
    }

    pub fn custom_table(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::invalid("custom table needs >= 2 matching samples"));
        }
        if xs.iter().any(|v| !v.is_finite()) || ys.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("custom table samples must be finite"));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("custom table abscissae must be strictly increasing"));
        }
        Ok(DriftModel { kind: DriftKind::CustomTable { xs, ys }, truncation: 0, tail_tol: 0.0, terms: Vec::new() })
    }

    fn assemble(kind: DriftKind, truncation: usize, tail_tol: f64) -> Self {
        let terms = match kind {
            DriftKind::Weierstrass { alpha } => (1..=truncation)
                .map(|j| SeriesTerm {
                    scale: (j as f64).exp2(),
                    amplitude: (-alpha * j as f64).exp2(),
                })
                .collect(),
            DriftKind::WeierstrassSobolev { alpha, beta } => (1..=truncation)
                .map(|j| SeriesTerm {
                    scale: (j as f64).exp2(),
                    amplitude: (j as f64).powf(-beta) * (-alpha * j as f64).exp2(),
                })
                .collect(),
            _ => Vec::new(),
        };
        DriftModel { kind, truncation, tail_tol, terms }
    }

    pub fn kind(&self) -> &DriftKind {
        &self.kind
    }

    /// Hölder exponent, where the family has one.
    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            DriftKind::Weierstrass { alpha } | DriftKind::WeierstrassSobolev { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self.kind {
            DriftKind::WeierstrassSobolev { beta, .. } => Some(beta),
            _ => None,
        }
    }

    /// Series cut-off `J` (0 for the non-series kinds).
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// Evaluate the drift. Deterministic: identical inputs give bitwise
    /// identical results.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("drift evaluated at non-finite x = {x}")));
        }
        Ok(match &self.kind {
            DriftKind::Zero => 0.0,
            DriftKind::Constant(c) => *c,
            DriftKind::Weierstrass { .. } => self.series_eval(x),
            DriftKind::WeierstrassSobolev { .. } => {
                if (SOBOLEV_SUPPORT_LO..=SOBOLEV_SUPPORT_HI).contains(&x) {
                    self.series_eval(x)
                } else {
                    0.0
                }
            }
            DriftKind::CustomTable { xs, ys } => eval_table(xs, ys, x),
        })
    }

    fn series_eval(&self, x: f64) -> f64 {
        let mut acc = KahanSum::new();
        let mut s = 0.0;
        let mut c = 0.0;
        for (idx, term) in self.terms.iter().enumerate() {
            if idx % RESYNC_EVERY == 0 {
                let (sj, cj) = (term.scale * x).sin_cos();
                s = sj;
                c = cj;
            } else {
                let s2 = 2.0 * s * c;
                let c2 = 1.0 - 2.0 * s * s;
                s = s2;
                c = c2;
            }
            acc.add(term.amplitude * s);
        }
        acc.value()
    }

    /// Upper bound on `sup |mu|`. For the series families this is the full
    /// geometric sum `2^(-alpha) / (1 - 2^(-alpha))`.
    pub fn sup_norm_bound(&self) -> f64 {
        match &self.kind {
            DriftKind::Zero => 0.0,
            DriftKind::Constant(c) => c.abs(),
            DriftKind::Weierstrass { alpha } | DriftKind::WeierstrassSobolev { alpha, .. } => {
                let q = (-alpha).exp2();
                q / (1.0 - q)
            }
            DriftKind::CustomTable { ys, .. } => ys.iter().fold(0.0, |m, y| m.max(y.abs())),
        }
    }

    /// Upper bound on `|mu(x+h) - mu(x)|` valid for every `x`, from the
    /// term-wise estimate `|sin(a) - sin(b)| <= min(2, |a-b|)`. Used by
    /// tests that probe identities (periodicity, support endpoints) which
    /// hold exactly for the real-valued function but can only be checked at
    /// floating-point argument granularity.
    pub fn oscillation_bound(&self, h: f64) -> f64 {
        let h = h.abs();
        match &self.kind {
            DriftKind::Zero | DriftKind::Constant(_) => 0.0,
            DriftKind::Weierstrass { .. } | DriftKind::WeierstrassSobolev { .. } => {
                let mut acc = KahanSum::new();
                for term in &self.terms {
                    acc.add(term.amplitude * (term.scale * h).min(2.0));
                }
                acc.value()
            }
            DriftKind::CustomTable { xs, ys } => {
                let mut max_slope = 0.0f64;
                for i in 1..xs.len() {
                    max_slope = max_slope.max(((ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1])).abs());
                }
                max_slope * h
            }
        }
    }

    /// Fourier coefficients of the analytic exponential representation, in
    /// the convention `f_hat_k = (2 pi)^(-1/2) int_0^{2pi} f(x) e^(-ikx) dx`.
    ///
    /// For the Sobolev family this is the spectrum of the underlying
    /// `2 pi`-periodic series, not of the truncated-support function. The
    /// sine terms place mass only at the dyadic frequencies `k = ±2^j`;
    /// entries are stored for `k >= 0` and negative frequencies follow from
    /// conjugate symmetry via [`FourierSpectrum::coefficient`].
    pub fn fourier_spectrum(&self, max_frequency: i64) -> Result<FourierSpectrum> {
        if max_frequency < 1 {
            return Err(Error::invalid(format!("max_frequency must be >= 1, got {max_frequency}")));
        }
        let mut entries = BTreeMap::new();
        match &self.kind {
            DriftKind::Zero => {}
            DriftKind::Constant(c) => {
                entries.insert(0, Cplx::new(c * SQRT_2PI, 0.0));
            }
            DriftKind::Weierstrass { .. } | DriftKind::WeierstrassSobolev { .. } => {
                // sin(2^j x) = (e^{i 2^j x} - e^{-i 2^j x}) / (2i), so the
                // coefficient at k = +2^j is amplitude/(2i) = -i amplitude/2.
                for (idx, term) in self.terms.iter().enumerate() {
                    let j = idx + 1;
                    if j >= 63 || (1i64 << j) > max_frequency {
                        break;
                    }
                    entries.insert(1i64 << j, Cplx::new(0.0, -0.5 * SQRT_2PI * term.amplitude));
                }
            }
            DriftKind::CustomTable { .. } => {
                return Err(Error::invalid("custom-table drifts have no analytic Fourier representation"));
            }
        }
        Ok(FourierSpectrum { max_frequency, entries })
    }
}

fn eval_table(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Fourier coefficients on `|k| <= max_frequency`, stored for `k >= 0` with
/// negative frequencies implied by conjugate symmetry (the represented
/// functions are real-valued).
#[derive(Clone, Debug)]
pub struct FourierSpectrum {
    max_frequency: i64,
    entries: BTreeMap<i64, Cplx>,
}

impl FourierSpectrum {
    pub fn empty(max_frequency: i64) -> Self {
        FourierSpectrum { max_frequency, entries: BTreeMap::new() }
    }

    pub fn max_frequency(&self) -> i64 {
        self.max_frequency
    }

    /// Coefficient at any signed frequency `k`; zero off the stored support.
    pub fn coefficient(&self, k: i64) -> Cplx {
        let stored = self.entries.get(&k.abs()).copied().unwrap_or(Cplx::ZERO);
        if k < 0 {
            stored.conj()
        } else {
            stored
        }
    }

    /// Stored entries at `k >= 0`, in increasing frequency order.
    pub fn nonnegative_entries(&self) -> impl Iterator<Item = (i64, Cplx)> + '_ {
        self.entries.iter().map(|(&k, &c)| (k, c))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: direct term-by-term summation with library sine
    /// calls only, no double-angle recurrence.
    fn naive_series(alpha: f64, beta: Option<f64>, truncation: usize, x: f64) -> f64 {
        let mut acc = KahanSum::new();
        for j in 1..=truncation {
            let amp = match beta {
                Some(b) => (j as f64).powf(-b) * (-alpha * j as f64).exp2(),
                None => (-alpha * j as f64).exp2(),
            };
            acc.add(amp * ((j as f64).exp2() * x).sin());
        }
        acc.value()
    }

    #[test]
    fn eval_at_zero_is_exactly_zero() {
        let mu = DriftModel::weierstrass(0.5).unwrap();
        assert_eq!(mu.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn eval_at_float_pi_is_zero_to_argument_granularity() {
        // sin(2^j pi) = 0 exactly for the real number pi; at the nearest
        // f64 the achievable bound is the oscillation over |fl(pi) - pi|.
        let mu = DriftModel::weierstrass(0.5).unwrap();
        let granularity = 1.2246467991473532e-16; // |fl(pi) - pi|
        let bound = mu.oscillation_bound(granularity);
        let v = mu.eval(std::f64::consts::PI).unwrap().abs();
        assert!(v <= bound, "eval(pi) = {v:e} exceeds granularity bound {bound:e}");
        assert!(bound < 1e-6);
    }

    #[test]
    fn sobolev_vanishes_outside_support() {
        let mu = DriftModel::weierstrass_sobolev(0.5, 1.0).unwrap();
        assert_eq!(mu.eval(10.0 * std::f64::consts::PI).unwrap(), 0.0);
        assert_eq!(mu.eval(-3.0 * std::f64::consts::PI).unwrap(), 0.0);
        assert!(mu.eval(1.0).unwrap() != 0.0);
    }

    #[test]
    fn truncated_eval_matches_deep_oracle() {
        let mu = DriftModel::weierstrass_with_truncation(0.5, 40).unwrap();
        let oracle = naive_series(0.5, None, 200, 1.0);
        // value cross-checked against 40-digit arithmetic
        assert!((oracle - 0.72962480589939004926).abs() < 5e-15);
        assert!((mu.eval(1.0).unwrap() - oracle).abs() <= mu.tail_tol());
    }

    #[test]
    fn default_model_matches_extended_precision_values() {
        let mu = DriftModel::weierstrass(0.5).unwrap();
        for (x, v) in [
            (1.0, 0.72962480589939004926),
            (0.5, 1.1109324875027631401),
            (2.5, -0.74288658435431626265),
            (-1.25, 0.10211643000228888638),
        ] {
            assert!(
                (mu.eval(x).unwrap() - v).abs() < 1e-12,
                "x = {x}: {} vs {v}",
                mu.eval(x).unwrap()
            );
        }
        let mu_ab = DriftModel::weierstrass_sobolev(0.5, 1.0).unwrap();
        assert!((mu_ab.eval(1.0).unwrap() - 0.59009915127491709079).abs() < 1e-12);
    }

    #[test]
    fn recurrence_matches_naive_summation() {
        let mu = DriftModel::weierstrass(0.5).unwrap();
        let mu_ab = DriftModel::weierstrass_sobolev(0.35, 1.5).unwrap();
        for i in 0..500 {
            let x = -8.0 + 16.0 * (i as f64) / 499.0;
            let a = mu.eval(x).unwrap();
            let b = naive_series(0.5, None, mu.truncation(), x);
            assert!((a - b).abs() < 1e-13, "x={x}: {a} vs {b}");
            if (SOBOLEV_SUPPORT_LO..=SOBOLEV_SUPPORT_HI).contains(&x) {
                let a = mu_ab.eval(x).unwrap();
                let b = naive_series(0.35, Some(1.5), mu_ab.truncation(), x);
                assert!((a - b).abs() < 1e-13, "sobolev x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn truncation_is_minimal() {
        for alpha in [0.25, 0.5, 0.75] {
            let mu = DriftModel::weierstrass(alpha).unwrap();
            let j = mu.truncation();
            assert!(series_tail_bound(alpha, j) <= mu.tail_tol());
            assert!(series_tail_bound(alpha, j - 1) > mu.tail_tol());
        }
    }

    #[test]
    fn periodicity_holds_to_argument_granularity() {
        let mu = DriftModel::weierstrass(0.5).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        for &x in &[0.3, 1.7, -2.2, 4.9] {
            let shifted = x + two_pi;
            // TwoSum: exact rounding error of the addition.
            let bv = shifted - x;
            let round_err = (x - (shifted - bv)) + (two_pi - bv);
            // |(shifted - x) - 2pi_exact| <= |fl(2pi) - 2pi| + |round_err|
            let granularity = 2.4492935982947064e-16 + round_err.abs();
            let bound = mu.oscillation_bound(granularity) + 2.0 * mu.tail_tol();
            let diff = (mu.eval(shifted).unwrap() - mu.eval(x).unwrap()).abs();
            assert!(diff <= bound, "x={x}: diff {diff:e} > bound {bound:e}");
        }
    }

    #[test]
    fn zero_mean_over_period_to_quadrature_tolerance() {
        // composite Simpson; the residual is quadrature error of the rough
        // integrand, not a defect of the zero-mean identity
        let mu = DriftModel::weierstrass(0.5).unwrap();
        let m = 12288;
        let h = 2.0 * std::f64::consts::PI / m as f64;
        let mut acc = KahanSum::new();
        for i in 0..m {
            let a = i as f64 * h;
            acc.add(
                h / 6.0
                    * (mu.eval(a).unwrap()
                        + 4.0 * mu.eval(a + 0.5 * h).unwrap()
                        + mu.eval(a + h).unwrap()),
            );
        }
        assert!(acc.value().abs() < 1e-4, "mean residual {}", acc.value());
    }

    #[test]
    fn sampled_sup_respects_geometric_bound() {
        let mu = DriftModel::weierstrass(0.5).unwrap();
        let bound = mu.sup_norm_bound();
        assert!((bound - 2.414213562373095).abs() < 1e-12);
        let mut max = 0.0f64;
        for i in 0..20_000 {
            let x = -10.0 + 20.0 * (i as f64) / 19_999.0;
            max = max.max(mu.eval(x).unwrap().abs());
        }
        assert!(max <= bound + 1e-12);
        assert!(max > 1.2, "sampled sup suspiciously small: {max}");
    }

    #[test]
    fn sobolev_support_endpoints_vanish_to_granularity() {
        let mu = DriftModel::weierstrass_sobolev(0.5, 1.0).unwrap();
        for edge in [SOBOLEV_SUPPORT_LO, SOBOLEV_SUPPORT_HI] {
            // the real-valued series vanishes at -2pi and 4pi; at the
            // floating-point endpoints the oscillation bound applies
            let granularity = 4.0 * 2.4492935982947064e-16;
            let bound = mu.oscillation_bound(granularity) + 2.0 * mu.tail_tol();
            let v = mu.eval(edge).unwrap().abs();
            assert!(v <= bound, "edge {edge}: {v:e} > {bound:e}");
            // continuity across the endpoint: one ulp outside gives exactly 0
            let outside = if edge < 0.0 { edge.next_down() } else { edge.next_up() };
            assert_eq!(mu.eval(outside).unwrap(), 0.0);
        }
    }

    #[test]
    fn spectrum_lives_on_dyadic_frequencies() {
        let mu = DriftModel::weierstrass(0.5).unwrap();
        let sp = mu.fourier_spectrum(3).unwrap();
        assert_eq!(sp.coefficient(3), Cplx::ZERO);
        assert_eq!(sp.coefficient(0), Cplx::ZERO);
        assert_eq!(sp.coefficient(1), Cplx::ZERO);
        let c2 = sp.coefficient(2);
        // |f_hat_2| = sqrt(2 pi)/2 * 2^(-alpha)
        let expect = 0.5 * SQRT_2PI * 0.5f64.sqrt();
        assert!((c2.abs2().sqrt() - expect).abs() < 1e-14);
        assert_eq!(c2.re, 0.0);
        assert!(c2.im < 0.0);
    }

    #[test]
    fn spectrum_conjugate_symmetry_is_exact() {
        let mu = DriftModel::weierstrass_sobolev(0.4, 2.0).unwrap();
        let sp = mu.fourier_spectrum(64).unwrap();
        for k in -64..=64i64 {
            let a = sp.coefficient(k);
            let b = sp.coefficient(-k).conj();
            assert_eq!(a, b, "k = {k}");
        }
    }

    #[test]
    fn spectrum_against_quadrature_oracle() {
        // (2 pi)^(-1/2) int_0^{2pi} mu(x) e^(-2ix) dx by trapezoid on a deep
        // truncation, compared with the analytic coefficient at k = 2.
        let alpha = 0.5;
        let m: usize = 131_072;
        let h = 2.0 * std::f64::consts::PI / m as f64;
        let mut re = KahanSum::new();
        let mut im = KahanSum::new();
        for i in 0..m {
            let x = i as f64 * h;
            let f = naive_series(alpha, None, 200, x);
            let e = Cplx::cis(-2.0 * x).scale(f);
            re.add(e.re);
            im.add(e.im);
        }
        let quad = Cplx::new(re.value() * h / SQRT_2PI, im.value() * h / SQRT_2PI);
        let analytic = DriftModel::weierstrass(alpha)
            .unwrap()
            .fourier_spectrum(2)
            .unwrap()
            .coefficient(2);
        assert!(
            quad.sub(analytic).abs2().sqrt() < 1e-5,
            "quadrature {quad:?} vs analytic {analytic:?}"
        );
    }

    #[test]
    fn constant_and_zero_kinds() {
        let c = DriftModel::constant(2.5).unwrap();
        assert_eq!(c.eval(123.0).unwrap(), 2.5);
        let sp = c.fourier_spectrum(4).unwrap();
        assert!((sp.coefficient(0).re - 2.5 * SQRT_2PI).abs() < 1e-12);
        assert_eq!(sp.coefficient(1), Cplx::ZERO);
        assert_eq!(DriftModel::zero().eval(-4.0).unwrap(), 0.0);
        assert!(DriftModel::zero().fourier_spectrum(4).unwrap().is_empty());
    }

    #[test]
    fn custom_table_interpolates_and_clamps() {
        let mu = DriftModel::custom_table(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(mu.eval(0.5).unwrap(), 1.0);
        assert_eq!(mu.eval(1.0).unwrap(), 2.0);
        assert_eq!(mu.eval(-5.0).unwrap(), 0.0);
        assert_eq!(mu.eval(9.0).unwrap(), 0.0);
        assert!(DriftModel::custom_table(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(DriftModel::custom_table(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn invalid_arguments_are_rejected() {
        assert!(DriftModel::weierstrass(0.0).is_err());
        assert!(DriftModel::weierstrass(1.0).is_err());
        assert!(DriftModel::weierstrass_sobolev(0.5, 0.0).is_err());
        let mu = DriftModel::weierstrass(0.5).unwrap();
        assert!(mu.eval(f64::NAN).is_err());
        assert!(mu.eval(f64::INFINITY).is_err());
        assert!(mu.fourier_spectrum(0).is_err());
    }

    #[test]
    fn eval_is_deterministic() {
        let mu = DriftModel::weierstrass(0.37).unwrap();
        for &x in &[0.1, -3.7, 7.77] {
            assert_eq!(mu.eval(x).unwrap().to_bits(), mu.eval(x).unwrap().to_bits());
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            /// Truncation certificate: doubling J moves the value by at
            /// most the certified tail bound.
            #[test]
            fn truncation_certificate(x in -20.0f64..20.0) {
                let coarse = DriftModel::weierstrass_with_truncation(0.5, 41).unwrap();
                let fine = DriftModel::weierstrass_with_truncation(0.5, 82).unwrap();
                let d = (coarse.eval(x).unwrap() - fine.eval(x).unwrap()).abs();
                prop_assert!(d <= coarse.tail_tol());
            }

            #[test]
            fn spectrum_symmetry(k in 1i64..100) {
                let sp = DriftModel::weierstrass(0.6).unwrap().fourier_spectrum(100).unwrap();
                prop_assert_eq!(sp.coefficient(-k), sp.coefficient(k).conj());
            }
        }
    }
}
