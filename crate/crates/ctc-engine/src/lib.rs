//! CTC mathematics: the forward-backward loss and its gradient, prefix beam
//! search with optional shallow fusion, and incremental prefix scoring for
//! label-synchronous decoders. All probability work happens in log space.

pub mod beam;
pub mod loss;
pub mod math;
pub mod posterior;
pub mod prefix;

#[cfg(feature = "test-utils")]
pub mod oracle;

pub use beam::{prefix_beam_search, CharLmScorer, LmDistribution, SearchHit, DEFAULT_BEAM, DEFAULT_LM_WEIGHT};
pub use loss::{ctc_grad, ctc_loss, hybrid_loss, min_frames_for, DEFAULT_CTC_LOSS_WEIGHT};
pub use posterior::{normalize_rows, PosteriorMatrix};
pub use prefix::{ctc_prefix_score, CtcPrefixScorer, PrefixState};

/// Unit/label id within the token inventory. 0 is the blank in posterior
/// space; label sequences never contain it.
pub type Label = u32;

/// Collapse a label path per the CTC rule: merge adjacent repeats, then drop
/// blanks (id 0).
pub fn collapse_labels(path: &[Label]) -> Vec<Label> {
    let mut out = Vec::new();
    let mut prev: Option<Label> = None;
    for &l in path {
        if Some(l) != prev && l != 0 {
            out.push(l);
        }
        prev = Some(l);
    }
    out
}

/// Errors from CTC computations.
#[derive(Debug, thiserror::Error)]
pub enum CtcError {
    /// Matrix dimensions or file contents are wrong.
    #[error("shape error: {0}")]
    Shape(String),

    /// A posterior row is not a normalized distribution.
    #[error("frame {frame} log-sum-exps to {log_sum}, not 0")]
    Normalization { frame: usize, log_sum: f64 },

    /// The reference cannot be aligned within the available frames.
    #[error("{frames} frames cannot realize a reference needing {needed}")]
    InfeasibleAlignment { frames: usize, needed: usize },

    /// A label id outside `1..tokens`.
    #[error("label {label} invalid for an inventory of {tokens} tokens")]
    InvalidLabel { label: Label, tokens: usize },

    /// Bad parameter value.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CtcError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapse_examples() {
        assert_eq!(collapse_labels(&[0, 1, 1, 0]), vec![1]);
        assert_eq!(collapse_labels(&[1, 0, 1]), vec![1, 1]);
        assert_eq!(collapse_labels(&[1, 1, 2]), vec![1, 2]);
        assert_eq!(collapse_labels(&[]), Vec::<Label>::new());
        assert_eq!(collapse_labels(&[0, 0]), Vec::<Label>::new());
    }
}
