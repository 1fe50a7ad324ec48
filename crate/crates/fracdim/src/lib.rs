//! Numerical toolkit for mixed fractional integrals of bivariate functions
//! and for box-counting dimension estimation of their graphs.
//!
//! The crate has three layers:
//!
//! * Operator evaluation ([`frac_integral`]): mixed Katugampola and mixed
//!   Hadamard fractional integrals of a continuous function on a rectangle,
//!   evaluated by tensor-product quadrature after an exact substitution that
//!   removes the endpoint singularity of the kernel. The quadrature weights
//!   absorbing the `(1 - u)^(alpha - 1)` factor live in [`special`].
//! * Graph geometry ([`surfaces`], [`boxdim`]): a catalog of test surfaces,
//!   uniform oversampled sampling, per-cell range computation, range-based
//!   box counts with sandwich bounds, and a log-log slope estimate of the
//!   box dimension.
//! * Validation ([`oracle`]): a slow, independent evaluation of the same
//!   integrals by adaptive graded-panel quadrature in the original
//!   variables. It shares nothing with the transformed evaluation path
//!   except plain Gauss-Legendre nodes, so agreement between the two routes
//!   is meaningful evidence of correctness.
//!
//! The [`cli`] module wires everything into the `fracdim` binary:
//! `integrate`, `boxdim`, `experiment`, and `verify` subcommands with
//! deterministic CSV/JSON output.
//!
//! # Conventions
//!
//! * Orders `alpha` (Katugampola) and `gamma` (Hadamard) lie in `(0, 1]`.
//! * Katugampola exponents satisfy `rho > -1`. The Hadamard operator is the
//!   `rho -> -1` limit and is implemented as its own code path; see
//!   [`frac_integral::rho_limit_gap`] for the numerical limit check.
//! * All integrals start at the lower-left corner `(a, c)` of the domain
//!   rectangle; evaluation at `x = a` or `y = c` returns exactly `0`.

pub mod boxdim;
pub mod cli;
pub mod experiment;
pub mod frac_integral;
pub mod oracle;
pub mod special;
pub mod surfaces;

pub(crate) mod text;

use thiserror::Error as ThisError;

/// Crate-wide error type.
#[derive(Debug, ThisError)]
pub enum Error {
    /// An evaluation point or argument lies outside the mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A parameter set violates a validity constraint.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    /// Sample grid and box grid do not align.
    #[error("misaligned grid: {0}")]
    Misaligned(String),
    /// Malformed textual input (CSV grid data, config files).
    #[error("parse error: {0}")]
    Parse(String),
    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
