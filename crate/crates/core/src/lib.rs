//! Approximate 0-1 knapsack solver built from monotone step function algebra.
//!
//! The solver computes, for a set of weighted items and a capacity `t`, a step
//! function that underestimates the true profit curve `f(x)` (optimal profit at
//! every capacity `x <= t`) while staying within a relative gap `eps` of it at
//! `t`. All intermediate operations round down, so the returned curve is a
//! certified lower bound at every capacity, which keeps oracle testing
//! one-sided and sharp.
//!
//! Module map:
//! - [`stepfn`]: the `MonotoneStepFn` value type and its algebra (cap, lift,
//!   shift, stitch, sparsify).
//! - [`convolution`]: exact and approximate (max,+)-convolution, including the
//!   linear-time kernel for uniform pseudo-concave operands.
//! - [`preprocess`]: scaling, small-item merging, profit classes, and the
//!   top-level [`solve`] driver.
//! - [`large_a`]: solver for profit classes whose optimum is small relative to
//!   the class scale, via capped per-group exact tables.
//! - [`small_a`]: solver for the remaining classes, via proximity frames and
//!   incremental prefix/suffix tables.
//! - [`oracle`]: exact reference computations for tests and verification.
//! - [`instance`]: instance file format and seeded generators.

pub mod convolution;
pub mod instance;
pub mod large_a;
pub mod oracle;
mod par;
pub mod preprocess;
pub mod small_a;
pub mod stepfn;

pub use preprocess::{solve, Config, Item, SolveStats};
pub use stepfn::MonotoneStepFn;

use thiserror::Error;

/// Errors surfaced by construction, convolution, and pipeline entry points.
#[derive(Debug, Error)]
pub enum Error {
    #[error("breakpoint list is empty")]
    EmptyFunction,
    #[error("breakpoint x={x} exceeds domain_hi={hi}")]
    PointBeyondDomain { x: u64, hi: u64 },
    #[error("values decrease at x={x}: {prev} -> {next}")]
    DecreasingValues { x: u64, prev: u64, next: u64 },
    #[error("value range must start at A >= 1, got {0}")]
    BadLowerRange(u64),
    #[error("approximation parameter must be in (0, 1], got {0}")]
    BadEpsilon(f64),
    #[error("pieces leave a coverage gap at x={0}")]
    CoverageGap(u64),
    #[error("step quantum must be positive")]
    ZeroQuantum,
    #[error("x-break gaps decrease at break {0}; function is not pseudo-concave")]
    NotPseudoConcave(usize),
    #[error("value {v} is not a multiple of the quantum {p}")]
    NotUniform { p: u64, v: u64 },
    #[error("operand carries a -inf head where a plain staircase is required")]
    UnexpectedBottom,
    #[error("value shift by {shift} would drive value {v} negative")]
    NegativeShift { v: u64, shift: i64 },
    #[error("merge of an empty function sequence")]
    EmptyMerge,
    #[error("oracle guard exceeded: {0}")]
    OracleGuard(String),
    #[error("instance error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("class with scale {a} routed to the wrong solver (threshold {s})")]
    WrongBranch { a: u64, s: u64 },
    #[error("optimum bound coefficient {got} is below the required {need}")]
    BoundCoefficient { got: u64, need: u64 },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
