//! Incremental CTC prefix probabilities.
//!
//! The prefix probability of `g` is the total probability that the collapsed
//! output begins with `g`. It is computed frame-by-frame from the forward
//! variables of `g`, and extending `g` by one label costs a single O(frames)
//! sweep — the shape an autoregressive joint decoder needs.

use crate::math::log_sum_exp2;
use crate::posterior::PosteriorMatrix;
use crate::{CtcError, Label, Result};

/// Forward variables of one prefix against a fixed posterior matrix.
#[derive(Debug, Clone)]
pub struct PrefixState {
    /// Per frame: log prob of having emitted exactly the prefix by that
    /// frame with a blank as the frame's label.
    alpha_b: Vec<f64>,
    /// Same, with the prefix's last label as the frame's label.
    alpha_nb: Vec<f64>,
    last: Option<Label>,
    log_prefix_prob: f64,
    len: usize,
}

impl PrefixState {
    /// Log probability that the output starts with this prefix.
    pub fn log_prefix_prob(&self) -> f64 {
        self.log_prefix_prob
    }

    /// Log probability that the output equals this prefix exactly.
    pub fn complete_log_prob(&self) -> f64 {
        match (self.alpha_b.last(), self.alpha_nb.last()) {
            (Some(&b), Some(&nb)) => log_sum_exp2(b, nb),
            _ => {
                if self.len == 0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Scorer bound to one posterior matrix.
#[derive(Debug, Clone, Copy)]
pub struct CtcPrefixScorer<'a> {
    post: &'a PosteriorMatrix,
}

impl<'a> CtcPrefixScorer<'a> {
    pub fn new(post: &'a PosteriorMatrix) -> Self {
        CtcPrefixScorer { post }
    }

    /// State of the empty prefix: prefix probability one.
    pub fn initial(&self) -> PrefixState {
        let t_max = self.post.frames();
        let mut alpha_b = Vec::with_capacity(t_max);
        let mut run = 0.0;
        for t in 0..t_max {
            run += self.post.log_prob(t, 0);
            alpha_b.push(run);
        }
        PrefixState {
            alpha_b,
            alpha_nb: vec![f64::NEG_INFINITY; t_max],
            last: None,
            log_prefix_prob: 0.0,
            len: 0,
        }
    }

    /// Extend a prefix by one label, returning the new state. An infeasible
    /// extension yields a state with probability zero, not an error.
    pub fn extend(&self, state: &PrefixState, label: Label) -> Result<PrefixState> {
        if label == 0 || label as usize >= self.post.tokens() {
            return Err(CtcError::InvalidLabel {
                label,
                tokens: self.post.tokens(),
            });
        }
        let t_max = self.post.frames();
        let mut alpha_b = vec![f64::NEG_INFINITY; t_max];
        let mut alpha_nb = vec![f64::NEG_INFINITY; t_max];
        let mut psi = f64::NEG_INFINITY;
        // Mass of "prefix just finished" before each frame: blank-terminated
        // always transitions; a same-label run must cross a blank.
        let mut prev_nb = f64::NEG_INFINITY;
        let mut prev_b = f64::NEG_INFINITY;
        for t in 0..t_max {
            let phi_prev = if t == 0 {
                if state.len == 0 { 0.0 } else { f64::NEG_INFINITY }
            } else {
                let b = state.alpha_b[t - 1];
                if state.last == Some(label) {
                    b
                } else {
                    log_sum_exp2(b, state.alpha_nb[t - 1])
                }
            };
            let lp = self.post.log_prob(t, label as usize);
            alpha_nb[t] = lp + log_sum_exp2(phi_prev, prev_nb);
            alpha_b[t] = self.post.log_prob(t, 0) + log_sum_exp2(prev_b, prev_nb);
            psi = log_sum_exp2(psi, phi_prev + lp);
            prev_nb = alpha_nb[t];
            prev_b = alpha_b[t];
        }
        Ok(PrefixState {
            alpha_b,
            alpha_nb,
            last: Some(label),
            log_prefix_prob: psi,
            len: state.len + 1,
        })
    }
}

/// Prefix probability of `prefix` plus the incremental state that produced
/// it, built by repeated extension from the empty prefix.
pub fn ctc_prefix_score(post: &PosteriorMatrix, prefix: &[Label]) -> Result<(f64, PrefixState)> {
    let scorer = CtcPrefixScorer::new(post);
    let mut state = scorer.initial();
    for &label in prefix {
        state = scorer.extend(&state, label)?;
    }
    Ok((state.log_prefix_prob(), state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::ctc_loss;
    use crate::posterior::normalize_rows;
    use rand::{Rng, SeedableRng};

    fn random_posteriors(rng: &mut impl Rng, frames: usize, tokens: usize) -> PosteriorMatrix {
        let data: Vec<f64> = (0..frames * tokens).map(|_| rng.gen_range(-3.0..0.0)).collect();
        normalize_rows(frames, tokens, data)
    }

    /// Sum of exact CTC probabilities over every full sequence extending
    /// `prefix`, by enumerating all frame strings.
    fn brute_force_prefix_log_prob(post: &PosteriorMatrix, prefix: &[u32]) -> f64 {
        let mut total = f64::NEG_INFINITY;
        let t_max = post.frames();
        let k_max = post.tokens();
        let count = k_max.pow(t_max as u32);
        for mut code in 0..count {
            let mut logp = 0.0;
            let mut collapsed: Vec<u32> = Vec::new();
            let mut prev = usize::MAX;
            for t in 0..t_max {
                let k = code % k_max;
                code /= k_max;
                logp += post.log_prob(t, k);
                if k != prev && k != 0 {
                    collapsed.push(k as u32);
                }
                prev = k;
            }
            if collapsed.len() >= prefix.len() && collapsed[..prefix.len()] == *prefix {
                total = crate::math::log_sum_exp2(total, logp);
            }
        }
        total
    }

    #[test]
    fn empty_prefix_has_probability_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let m = random_posteriors(&mut rng, 4, 3);
        let (score, _) = ctc_prefix_score(&m, &[]).unwrap();
        assert_eq!(score, 0.0);
    }

    #[test]
    fn matches_bruteforce_on_small_instances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let frames = rng.gen_range(1..=5);
            let tokens = rng.gen_range(2..=4);
            let m = random_posteriors(&mut rng, frames, tokens);
            let len = rng.gen_range(0..=3usize);
            let prefix: Vec<u32> = (0..len).map(|_| rng.gen_range(1..tokens as u32)).collect();
            let (got, _) = ctc_prefix_score(&m, &prefix).unwrap();
            let want = brute_force_prefix_log_prob(&m, &prefix);
            if want == f64::NEG_INFINITY {
                assert_eq!(got, f64::NEG_INFINITY, "prefix {prefix:?}");
            } else {
                assert!((got - want).abs() < 1e-9, "prefix {prefix:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn extension_never_increases_score() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = random_posteriors(&mut rng, 5, 4);
        let scorer = CtcPrefixScorer::new(&m);
        let mut state = scorer.initial();
        let mut prev = state.log_prefix_prob();
        for label in [1u32, 2, 2, 3] {
            state = scorer.extend(&state, label).unwrap();
            assert!(state.log_prefix_prob() <= prev + 1e-12);
            prev = state.log_prefix_prob();
        }
    }

    #[test]
    fn complete_probability_matches_loss() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let frames = rng.gen_range(2..=5);
            let tokens = rng.gen_range(2..=4);
            let m = random_posteriors(&mut rng, frames, tokens);
            let len = rng.gen_range(1..=2usize);
            let labels: Vec<u32> = (0..len).map(|_| rng.gen_range(1..tokens as u32)).collect();
            if crate::loss::min_frames_for(&labels) > frames {
                continue;
            }
            let (_, state) = ctc_prefix_score(&m, &labels).unwrap();
            let loss = ctc_loss(&m, &labels).unwrap();
            assert!(
                (state.complete_log_prob() + loss).abs() < 1e-6,
                "complete {} vs -loss {}",
                state.complete_log_prob(),
                -loss
            );
        }
    }

    #[test]
    fn infeasible_prefix_scores_zero_probability() {
        let m = normalize_rows(1, 3, vec![-0.5, -1.0, -2.0]);
        let (score, _) = ctc_prefix_score(&m, &[1, 2]).unwrap();
        assert_eq!(score, f64::NEG_INFINITY);
    }
}
