//! Analysis toolkit for polymorphisms of Boolean functions.
//!
//! A function `f: {0,1}^n -> {0,1}` is a *polymorphism* of `g: {0,1}^m -> {0,1}`
//! when applying `g` to every row of an `n x m` bit matrix and then `f` to the
//! results always agrees with applying `f` to every column and then `g`.
//! This crate provides:
//!
//! * [`boolfn`] — truth-table Boolean functions with Fourier-analytic
//!   operations under p-biased product measures;
//! * [`compose`] — row/column compositions and exact or sampled agreement
//!   probabilities;
//! * [`classify`] — exhaustive enumeration of exact solutions, template
//!   families, case matching, and an exact multilinear identity engine;
//! * [`regularity`] — influence-regularity checks and the greedy junta /
//!   decision-tree regularization algorithms with potential guarantees;
//! * [`gaussian`] — the Gaussian analog of `(g(x), x)` and numerical
//!   list-decoding threshold bounds (arcsin upper bound, the binary-AND
//!   quadrature constant, sign-rule Monte Carlo lower estimates);
//! * [`constructions`] — lifted sign/threshold lower-bound functions and
//!   their empirical agreement and Fourier decay;
//! * [`connectivity`] — product-factor decomposition and support-graph
//!   connectivity of the reordered `(x, g(x))` distribution.
//!
//! The `polymorph` binary exposes everything behind a CLI with stable JSON
//! and CSV reports; `acceptance` hosts the end-to-end verification suite.


pub mod acceptance;
pub mod boolfn;
pub mod classify;
pub mod compose;
pub mod connectivity;
pub mod constructions;
pub mod gaussian;



pub mod regularity;
pub mod rng;

pub use boolfn::BooleanFunction;

/// Errors shared across the crate.
///
/// `SizeLimit` marks requests that are rejected because an exhaustive
/// operation would exceed its documented cost model; everything else is a
/// precondition or input-format violation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("arity {arity} exceeds maximum {max}")]
    ArityTooLarge { arity: u32, max: u32 },
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(u32, u32),
    #[error("coordinate index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: u32 },
    #[error("size limit exceeded: {what} (limit {limit})")]
    SizeLimit { what: String, limit: u64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("restriction values do not match the fixed-coordinate mask")]
    RestrictionMismatch,
    #[error("function has an irrelevant coordinate (index {index})")]
    IrrelevantCoordinate { index: usize },
    #[error("parse error at `{token}`: {reason}")]
    Parse { token: String, reason: String },
    #[error("not an exact solution")]
    NotExact,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("tolerance {tol:e} not reached within panel budget")]
    ToleranceNotReached { tol: f64 },
    #[error("covariance is not positive semidefinite")]
    NotPsd,
    #[error("round bound {bound} exceeded; the potential argument forbids this")]
    RoundBound { bound: u64 },
    #[error("value {0} outside [-1,1]")]
    ValueOutOfRange(f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to: 3 for size-limit
    /// rejections, 2 for every other precondition violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SizeLimit { .. } => 3,
            _ => 2,
        }
    }
}
