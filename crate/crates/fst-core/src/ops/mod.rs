//! FST algorithms.

mod basic;
mod compose;
mod determinize;
mod minimize;
mod paths;

pub use basic::{arcsort, relabel, rm_epsilon, trim, SortField};
pub use compose::compose;
pub use determinize::{determinize, determinize_with_budget, DEFAULT_DETERMINIZE_BUDGET};
pub use minimize::minimize;
pub use paths::{path_enumerate, path_enumerate_pairs, shortest_path, FstPath};
