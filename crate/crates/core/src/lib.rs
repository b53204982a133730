//! Numerical laboratory for strong approximation of scalar SDEs
//!
//! ```text
//!     dX_t = mu(X_t) dt + dW_t,   t in [0,1],   X_0 = x0,
//! ```
//!
//! where the drift `mu` is merely Hölder continuous (Weierstrass-type
//! lacunary series) or of fractional Sobolev regularity. The crate provides
//!
//! - the drift families and their Fourier structure ([`drift`]),
//! - numerical probes for Hölder and Gagliardo seminorms ([`regularity`]),
//! - the drift-removing bi-Lipschitz space transform and the induced
//!   diffusion coefficient ([`transform`]),
//! - Brownian paths together with the grid-coupled companion motion that
//!   agrees with the original path at the grid points but carries
//!   independent bridges in between ([`paths`]),
//! - Euler and Milstein-type integrators ([`schemes`]),
//! - seeded Monte-Carlo error sweeps and log-log rate fitting
//!   ([`convergence`]),
//! - the spectral lower-bound functional built from the A-kernel and the
//!   exact per-interval identity it satisfies ([`spectral`]).
//!
//! All sampling is driven by counter-based ChaCha streams keyed by
//! `(seed, replication, role)`, so every experiment is reproducible and
//! independent of scheduling; see [`streams`].

pub mod convergence;
pub mod cplx;
pub mod drift;
pub mod paths;
pub mod quad;
pub mod regularity;
pub mod report;
pub mod schemes;
pub mod spectral;
pub mod streams;
pub mod transform;

pub use convergence::{ErrorEstimate, GridPolicy, RateFit};
pub use cplx::Cplx;
pub use drift::{DriftKind, DriftModel, FourierSpectrum};
pub use paths::{CoupledPathPair, GridClass, TimeGrid};
pub use schemes::{SchemeKind, SchemeRun};
pub use spectral::SpectralBound;
pub use transform::TransformTable;

/// Errors shared by all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// An evaluation was requested outside the mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A tabulated quantity was queried outside its working range.
    /// Tables never extrapolate; solvers treat this as a range breach.
    #[error("value {value} outside tabulated range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    /// Numerical construction of a table or rule failed its self-checks.
    #[error("construction failed: {0}")]
    Construction(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

/// Version string embedded in CSV artifacts so that every output file
/// records which build produced it.
pub fn artifact_version() -> String {
    format!("{}-{}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}
