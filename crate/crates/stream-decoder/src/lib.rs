//! First-pass streaming decoder: token-passing Viterbi beam search over a
//! compiled graph, fed acoustic posteriors chunk by chunk, emitting n-best
//! word hypotheses with separated graph and acoustic scores.

pub mod config;
pub mod nbest;
pub mod scorer;
pub mod session;

pub use config::{BeamConfig, ChunkConfig, DEFAULT_FRAME_SHIFT_MS, DEFAULT_SUBSAMPLE};
pub use nbest::{read_nbest_text, Hypothesis, NBestList, TextHypothesis};
pub use scorer::{AcousticScorer, TablePosteriorScorer, WindowRequest};
pub use session::DecodeSession;

/// Decoder errors.
#[derive(Debug, thiserror::Error)]
pub enum DecodeError {
    /// Invalid configuration or malformed n-best text.
    #[error("configuration error: {0}")]
    Config(String),

    /// The session was already finalized.
    #[error("session already finalized")]
    SessionFinalized,

    /// No token reached a final state; the cheapest partial path is
    /// attached for diagnostics.
    #[error("no hypothesis reached a final state")]
    NoFinalState { best_partial: Box<Option<Hypothesis>> },

    /// The acoustic scorer failed or violated its contract.
    #[error("scorer error: {0}")]
    Scorer(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DecodeError>;

/// Decode a whole utterance in one shot from a posterior table: a
/// convenience wrapper building a single-window session over a
/// [`TablePosteriorScorer`].
pub fn decode_posteriors(
    utt_id: &str,
    graph: &fst_core::Wfst,
    posteriors: &ctc_engine::PosteriorMatrix,
    beam: BeamConfig,
    nbest: usize,
) -> Result<NBestList> {
    let frames = posteriors.frames() * DEFAULT_SUBSAMPLE;
    let chunks = ChunkConfig::single_shot(frames)?;
    let scorer = TablePosteriorScorer::new(posteriors.clone());
    let mut session = DecodeSession::new(utt_id, graph, &scorer, chunks, beam)?;
    session.push_frames(&vec![vec![0.0]; frames])?;
    session.finalize(nbest)
}
