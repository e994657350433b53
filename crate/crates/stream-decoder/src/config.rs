//! Chunking and beam-search configuration.

use crate::{DecodeError, Result};

/// Chunk policy in input frames: `n_center` new frames are decoded per step
/// with `n_left` frames of history and `n_right` frames of lookahead
/// appended to the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkConfig {
    pub n_left: usize,
    pub n_center: usize,
    pub n_right: usize,
    /// Input frame shift in milliseconds.
    pub frame_shift_ms: u32,
    /// Encoder subsampling factor: one posterior row per this many input
    /// frames.
    pub subsample: usize,
}

pub const DEFAULT_FRAME_SHIFT_MS: u32 = 10;
pub const DEFAULT_SUBSAMPLE: usize = 4;

impl ChunkConfig {
    pub fn new(n_left: usize, n_center: usize, n_right: usize) -> Result<Self> {
        ChunkConfig {
            n_left,
            n_center,
            n_right,
            frame_shift_ms: DEFAULT_FRAME_SHIFT_MS,
            subsample: DEFAULT_SUBSAMPLE,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.subsample == 0 {
            return Err(DecodeError::Config("subsample must be >= 1".into()));
        }
        if self.frame_shift_ms == 0 {
            return Err(DecodeError::Config("frame shift must be positive".into()));
        }
        if self.n_center < self.subsample {
            return Err(DecodeError::Config(format!(
                "n_center {} must be at least the subsample factor {}",
                self.n_center, self.subsample
            )));
        }
        for (name, v) in [
            ("n_left", self.n_left),
            ("n_center", self.n_center),
            ("n_right", self.n_right),
        ] {
            if v % self.subsample != 0 {
                return Err(DecodeError::Config(format!(
                    "{name} {} must be a multiple of the subsample factor {}",
                    v, self.subsample
                )));
            }
        }
        Ok(self)
    }

    /// A config whose first window covers the whole utterance (offline
    /// decoding): the center spans `total_frames` rounded up to the
    /// subsample factor.
    pub fn single_shot(total_frames: usize) -> Result<Self> {
        let sub = DEFAULT_SUBSAMPLE;
        let center = total_frames.max(sub).div_ceil(sub) * sub;
        ChunkConfig::new(0, center, 0)
    }

    /// User-perceived latency: the wait for a center to fill plus its
    /// lookahead, in milliseconds. History length never matters.
    pub fn latency_ms(&self) -> u32 {
        (self.n_center + self.n_right) as u32 * self.frame_shift_ms
    }

    /// Posterior rows per full window.
    pub fn rows_per_chunk(&self) -> usize {
        self.n_center / self.subsample
    }
}

/// Search control for the first pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamConfig {
    /// Cost width in nats; tokens worse than the frame best by more are
    /// dropped. `f64::INFINITY` disables it.
    pub beam: f64,
    /// Hard cap on surviving tokens per frame.
    pub max_active: usize,
    /// Multiplier on posterior costs.
    pub acoustic_scale: f64,
    /// Extra cost per emitted word, in nats.
    pub word_insertion_penalty: f64,
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig {
            beam: 16.0,
            max_active: 10_000,
            acoustic_scale: 1.0,
            word_insertion_penalty: 0.0,
        }
    }
}

impl BeamConfig {
    pub fn unpruned() -> Self {
        BeamConfig {
            beam: f64::INFINITY,
            max_active: usize::MAX,
            ..BeamConfig::default()
        }
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.beam > 0.0) {
            return Err(DecodeError::Config(format!(
                "beam must be positive, got {}",
                self.beam
            )));
        }
        if self.max_active == 0 {
            return Err(DecodeError::Config("max_active must be >= 1".into()));
        }
        if !(self.acoustic_scale > 0.0) {
            return Err(DecodeError::Config(format!(
                "acoustic scale must be positive, got {}",
                self.acoustic_scale
            )));
        }
        Ok(self)
    }
}
