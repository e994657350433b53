//! Acoustic scorer contract and fixture implementations.

use ctc_engine::PosteriorMatrix;

use crate::{DecodeError, Result};

/// One window of input feature rows handed to a scorer. The slice always
/// holds `n_left + n_center + n_right` rows; rows with no real data (before
/// the utterance start or past its end) are zero-filled.
#[derive(Debug)]
pub struct WindowRequest<'a> {
    pub features: &'a [Vec<f64>],
    pub n_left: usize,
    pub n_center: usize,
    pub n_right: usize,
    /// Absolute input-frame index of the first center frame.
    pub center_start: usize,
    /// Center frames that are real, not padding.
    pub center_valid: usize,
    pub subsample: usize,
}

/// Produces posterior rows for the center region of a window. Stateless
/// between windows and safe to share across concurrent sessions.
///
/// The returned matrix must hold exactly `n_center / subsample` rows; rows
/// that correspond to padded center frames are discarded by the caller.
pub trait AcousticScorer: Send + Sync {
    fn score_window(&self, window: &WindowRequest) -> Result<PosteriorMatrix>;
}

/// Fixture scorer backed by a precomputed posterior table: window requests
/// slice the table by absolute row index, ignoring features entirely. Rows
/// requested past the table end are uniform filler (they are always
/// discarded as padding).
#[derive(Debug, Clone)]
pub struct TablePosteriorScorer {
    table: PosteriorMatrix,
}

impl TablePosteriorScorer {
    pub fn new(table: PosteriorMatrix) -> Self {
        TablePosteriorScorer { table }
    }

    pub fn table(&self) -> &PosteriorMatrix {
        &self.table
    }
}

impl AcousticScorer for TablePosteriorScorer {
    fn score_window(&self, window: &WindowRequest) -> Result<PosteriorMatrix> {
        if window.center_start % window.subsample != 0 {
            return Err(DecodeError::Scorer(format!(
                "window start {} not aligned to subsample {}",
                window.center_start, window.subsample
            )));
        }
        let tokens = self.table.tokens();
        let first_row = window.center_start / window.subsample;
        let rows = window.n_center / window.subsample;
        let uniform = -(tokens as f64).ln();
        let mut data = Vec::with_capacity(rows * tokens);
        for r in first_row..first_row + rows {
            if r < self.table.frames() {
                data.extend_from_slice(self.table.row(r));
            } else {
                data.extend(std::iter::repeat(uniform).take(tokens));
            }
        }
        Ok(PosteriorMatrix::new_unchecked(rows, tokens, data))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ctc_engine::normalize_rows;

    #[test]
    fn table_scorer_slices_by_absolute_index() {
        let table = normalize_rows(4, 2, vec![0.0, -1.0, -1.0, 0.0, 0.0, -2.0, -2.0, 0.0]);
        let scorer = TablePosteriorScorer::new(table.clone());
        let features: Vec<Vec<f64>> = vec![vec![0.0]; 8];
        let w = WindowRequest {
            features: &features,
            n_left: 0,
            n_center: 8,
            n_right: 0,
            center_start: 8,
            center_valid: 8,
            subsample: 4,
        };
        let rows = scorer.score_window(&w).unwrap();
        assert_eq!(rows.frames(), 2);
        assert_eq!(rows.row(0), table.row(2));
        assert_eq!(rows.row(1), table.row(3));
    }

    #[test]
    fn rows_past_table_end_are_filler() {
        let table = normalize_rows(1, 2, vec![0.0, -1.0]);
        let scorer = TablePosteriorScorer::new(table);
        let features: Vec<Vec<f64>> = vec![vec![0.0]; 8];
        let w = WindowRequest {
            features: &features,
            n_left: 0,
            n_center: 8,
            n_right: 0,
            center_start: 0,
            center_valid: 4,
            subsample: 4,
        };
        let rows = scorer.score_window(&w).unwrap();
        assert_eq!(rows.frames(), 2);
        assert_eq!(rows.row(1), &[-(2f64.ln()), -(2f64.ln())]);
    }
}
