//! Frame-level log-posterior matrices.

use std::io::{BufRead, Read, Write};

use crate::math::log_sum_exp_slice;
use crate::{CtcError, Result};

const MAGIC: &[u8; 5] = b"POST1";

/// How far a row's log-sum-exp may stray from 0 before the matrix is
/// rejected at load time.
pub const ROW_NORMALIZATION_TOL: f64 = 1e-5;

/// Per-frame log-probabilities over the CTC token inventory, frame-major.
/// Column 0 is the blank.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMatrix {
    frames: usize,
    tokens: usize,
    data: Vec<f64>,
}

impl PosteriorMatrix {
    /// Build a validated matrix: every row must log-sum-exp to 0 within
    /// [`ROW_NORMALIZATION_TOL`]. Validation happens here, once, not per
    /// operation.
    pub fn new(frames: usize, tokens: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != frames * tokens {
            return Err(CtcError::Shape(format!(
                "expected {frames}x{tokens}={} values, got {}",
                frames * tokens,
                data.len()
            )));
        }
        if tokens < 2 {
            return Err(CtcError::Shape(format!(
                "need at least blank plus one unit, got {tokens} tokens"
            )));
        }
        let m = PosteriorMatrix { frames, tokens, data };
        for t in 0..frames {
            let lse = log_sum_exp_slice(m.row(t));
            if lse.abs() > ROW_NORMALIZATION_TOL {
                return Err(CtcError::Normalization { frame: t, log_sum: lse });
            }
        }
        Ok(m)
    }

    /// Build without row validation, for perturbation analyses and synthetic
    /// intermediates.
    pub fn new_unchecked(frames: usize, tokens: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), frames * tokens, "shape mismatch");
        PosteriorMatrix { frames, tokens, data }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn tokens(&self) -> usize {
        self.tokens
    }

    #[inline]
    pub fn log_prob(&self, frame: usize, token: usize) -> f64 {
        self.data[frame * self.tokens + token]
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.data[frame * self.tokens..(frame + 1) * self.tokens]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Matrix restricted to the frame range (for window slicing).
    pub fn slice_frames(&self, start: usize, end: usize) -> PosteriorMatrix {
        assert!(start <= end && end <= self.frames);
        PosteriorMatrix {
            frames: end - start,
            tokens: self.tokens,
            data: self.data[start * self.tokens..end * self.tokens].to_vec(),
        }
    }

    /// Write the binary form: magic `POST1`, little-endian u32 frames and
    /// tokens, then frames x tokens f32 log-probabilities, frame-major.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.frames as u32).to_le_bytes())?;
        w.write_all(&(self.tokens as u32).to_le_bytes())?;
        for &v in &self.data {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        Ok(())
    }

    /// Read the binary form (validated).
    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(CtcError::Shape(format!(
                "bad magic {magic:?}, expected {MAGIC:?}"
            )));
        }
        let mut buf4 = [0u8; 4];
        r.read_exact(&mut buf4)?;
        let frames = u32::from_le_bytes(buf4) as usize;
        r.read_exact(&mut buf4)?;
        let tokens = u32::from_le_bytes(buf4) as usize;
        let mut data = Vec::with_capacity(frames * tokens);
        for _ in 0..frames * tokens {
            r.read_exact(&mut buf4)?;
            data.push(f32::from_le_bytes(buf4) as f64);
        }
        Self::new(frames, tokens, data)
    }

    /// Write the text form: one frame per line, space-separated log-probs.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        for t in 0..self.frames {
            let row: Vec<String> = self.row(t).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    /// Read the text form (validated).
    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut data = Vec::new();
        let mut tokens = None;
        let mut frames = 0;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|v| {
                    v.parse::<f64>().map_err(|_| {
                        CtcError::Shape(format!("line {}: bad value {v:?}", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            match tokens {
                None => tokens = Some(row.len()),
                Some(n) if n != row.len() => {
                    return Err(CtcError::Shape(format!(
                        "line {}: expected {n} columns, got {}",
                        lineno + 1,
                        row.len()
                    )))
                }
                _ => {}
            }
            frames += 1;
            data.extend(row);
        }
        Self::new(frames, tokens.unwrap_or(0), data)
    }

    pub fn read_binary_file(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_binary(std::io::BufReader::new(f))
    }

    pub fn write_binary_file(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_binary(std::io::BufWriter::new(f))
    }
}

/// Normalize raw scores row-wise into a valid log-posterior matrix.
pub fn normalize_rows(frames: usize, tokens: usize, mut data: Vec<f64>) -> PosteriorMatrix {
    for t in 0..frames {
        let row = &mut data[t * tokens..(t + 1) * tokens];
        let lse = log_sum_exp_slice(row);
        for v in row.iter_mut() {
            *v -= lse;
        }
    }
    PosteriorMatrix::new_unchecked(frames, tokens, data)
}
