//! Decoding-graph compilation from an ARPA n-gram model, a lexicon, and a
//! CTC token inventory.
//!
//! The grammar acceptor G encodes permissible word sequences, the lexicon
//! transducer L spells words as unit sequences, and the token transducer T
//! collapses frame-level CTC labels into units. [`compile::build_search_graph`]
//! chains them into a single optimized graph the streaming decoder searches.

pub mod arpa;
pub mod compile;
pub mod grammar;
pub mod lexfst;
pub mod lexicon;
pub mod token_fst;

pub use arpa::ArpaModel;
pub use compile::{build_naive_graph, build_search_graph, SearchGraph};
pub use grammar::build_g;
pub use lexfst::build_l;
pub use lexicon::{Lexicon, TokenInventory};
pub use token_fst::{build_t, collapse_frame_labels};

/// Errors from parsing inputs or compiling graphs.
#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    /// Bad ARPA content (or a context that cannot back off).
    #[error("arpa format error: {0}")]
    ArpaFormat(String),

    /// Bad lexicon, inventory, or option combination.
    #[error("configuration error: {0}")]
    Config(String),

    /// Failure inside an FST algorithm, including the determinization
    /// budget.
    #[error(transparent)]
    Fst(#[from] fst_core::FstError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GraphError>;
