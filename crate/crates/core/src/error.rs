//! Crate-wide error type.
//!
//! Errors are grouped by how a caller should react: malformed textual input
//! (`InvalidSpec`, `InvalidInput`) is a usage problem, `Domain` and
//! `KindMismatch` reject structurally valid but meaningless requests,
//! `Overflow` signals that a value left the 128-bit element range, and
//! `BudgetExhausted` carries the partial progress of an aborted search.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A digit-set description failed validation.
    #[error("invalid digit spec: {0}")]
    InvalidSpec(String),

    /// Some other textual input (angle, set expression, observable, …) failed to parse.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Structurally valid arguments outside an operation's domain.
    #[error("{0}")]
    Domain(String),

    /// An observable was paired with a system that cannot act on it.
    #[error("observable kind does not match the system: {0}")]
    KindMismatch(String),

    /// A value exceeded the fixed 128-bit element range.
    ///
    /// Interfaces are written against arbitrary-size unsigned integers; this
    /// implementation pins them to `u128` and reports the boundary instead of
    /// wrapping.
    #[error("arithmetic overflow past the 128-bit element range")]
    Overflow,

    /// An exhaustive search ran out of its node budget. `deepest` is the
    /// widest progression-free prefix certified before the abort.
    #[error("search budget exhausted after {nodes} nodes (deepest progression-free width reached: {deepest})")]
    BudgetExhausted { nodes: u64, deepest: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
