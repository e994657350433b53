//! Weighted finite-state transducers over the tropical semiring.
//!
//! Provides the `Wfst` container plus the algorithms needed to compile and
//! search speech decoding graphs: composition with an epsilon filter,
//! weighted determinization and minimization, epsilon removal, trimming,
//! arc sorting, relabeling, n-shortest paths, and a brute-force path
//! enumeration oracle used as ground truth in tests.
//!
//! Weights live in the tropical semiring (min, +) over nats (negative
//! natural-log probabilities): `plus` picks the cheaper path, `times`
//! accumulates cost along a path.

pub mod fst;
pub mod io;
pub mod ops;
pub mod symbol;
pub mod weight;

#[cfg(feature = "test-utils")]
pub mod testing;

pub use fst::{Arc, Label, StateId, Wfst, EPSILON};
pub use symbol::{SymbolTable, SymbolTableRef};
pub use weight::TropicalWeight;

/// Errors produced by FST construction and algorithms.
#[derive(Debug, thiserror::Error)]
pub enum FstError {
    /// Symbol tables of two operands do not match where they must.
    #[error("symbol table mismatch: {0}")]
    SymbolTableMismatch(String),

    /// Subset construction exceeded the configured state budget.
    #[error("determinization exceeded state budget of {budget} states")]
    DeterminizeBudget { budget: usize },

    /// An operation requiring a deterministic input received a
    /// nondeterministic one.
    #[error("input is not deterministic: state {state} has multiple arcs with label ({ilabel}, {olabel})")]
    Nondeterministic {
        state: StateId,
        ilabel: Label,
        olabel: Label,
    },

    /// Malformed argument (invalid state id, bad label, empty machine where
    /// one is required).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// I/O failure while reading or writing an FST or symbol table.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// File contents do not conform to the expected format.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, FstError>;
