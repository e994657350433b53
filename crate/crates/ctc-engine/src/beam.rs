//! Graph-free CTC prefix beam search with optional shallow fusion against a
//! character-level language model.

use std::collections::HashMap;

use crate::math::log_sum_exp2;
use crate::posterior::PosteriorMatrix;
use crate::{Label, Result};

/// Default beam width for label-synchronous searches.
pub const DEFAULT_BEAM: usize = 10;

/// Default shallow-fusion weight on the external language model.
pub const DEFAULT_LM_WEIGHT: f64 = 0.3;

/// Next-step distribution of a character-level language model.
#[derive(Debug, Clone)]
pub struct LmDistribution {
    /// Log-probability per label id; index 0 is unused and must be `-inf`.
    pub label_log_probs: Vec<f64>,
    pub eos_log_prob: f64,
}

impl LmDistribution {
    /// Uniform over `tokens - 1` labels plus end-of-sequence.
    pub fn uniform(tokens: usize) -> Self {
        let p = -((tokens) as f64).ln(); // tokens-1 labels + eos
        let mut label_log_probs = vec![p; tokens];
        label_log_probs[0] = f64::NEG_INFINITY;
        LmDistribution {
            label_log_probs,
            eos_log_prob: p,
        }
    }
}

/// A character-level LM: given a label prefix, the log-probability of each
/// next label and of ending the sequence. Returned distributions must
/// log-sum-exp to 0 within 1e-5.
pub trait CharLmScorer: Send + Sync {
    fn next_log_probs(&self, prefix: &[Label]) -> LmDistribution;
}

/// A hypothesis from [`prefix_beam_search`]: higher score is better.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchHit {
    pub labels: Vec<Label>,
    /// log P_ctc(labels) under the posteriors alone.
    pub acoustic_log_prob: f64,
    /// Cumulative raw LM log-probability including end-of-sequence; 0 when
    /// no LM was fused.
    pub lm_log_prob: f64,
    /// acoustic + lm_weight * lm, the ranking key.
    pub score: f64,
}

#[derive(Debug, Clone)]
struct Beam {
    labels: Vec<Label>,
    log_p_blank: f64,
    log_p_nonblank: f64,
    /// Cumulative LM log-prob of `labels` (no EOS yet).
    lm: f64,
    /// Next-step LM distribution from `labels`, filled lazily per prefix.
    lm_next: Option<LmDistribution>,
}

impl Beam {
    fn total(&self) -> f64 {
        log_sum_exp2(self.log_p_blank, self.log_p_nonblank)
    }
}

/// Standard CTC prefix beam search.
///
/// Maintains per-prefix blank and non-blank probabilities in log space;
/// when a language model is supplied, every label extension adds
/// `lm_weight * log P_lm(label | prefix)` to the pruning score and the
/// end-of-sequence term joins at finalization. `lm_weight == 0` skips the
/// model entirely and is bit-identical to searching without one. Ties are
/// broken toward lexicographically smaller label sequences.
///
/// Returns up to `beam` surviving prefixes, best first. Prefixes the fused
/// model makes impossible (score `-inf`) are dropped.
pub fn prefix_beam_search(
    post: &PosteriorMatrix,
    beam: usize,
    lm: Option<&dyn CharLmScorer>,
    lm_weight: f64,
) -> Result<Vec<SearchHit>> {
    if beam == 0 {
        return Err(crate::CtcError::Config("beam must be >= 1".to_string()));
    }
    let lm = if lm_weight == 0.0 { None } else { lm };
    let tokens = post.tokens();

    let mut beams: Vec<Beam> = vec![Beam {
        labels: Vec::new(),
        log_p_blank: 0.0,
        log_p_nonblank: f64::NEG_INFINITY,
        lm: 0.0,
        lm_next: None,
    }];

    for t in 0..post.frames() {
        let mut next: HashMap<Vec<Label>, Beam> = HashMap::with_capacity(beams.len() * tokens);
        for entry in &mut beams {
            if let Some(lm) = lm {
                if entry.lm_next.is_none() {
                    entry.lm_next = Some(lm.next_log_probs(&entry.labels));
                }
            }
        }
        for entry in &beams {
            let total = entry.total();
            let lp_blank = post.log_prob(t, 0);

            // Blank keeps the prefix and seals a run.
            let slot = next.entry(entry.labels.clone()).or_insert_with(|| Beam {
                labels: entry.labels.clone(),
                log_p_blank: f64::NEG_INFINITY,
                log_p_nonblank: f64::NEG_INFINITY,
                lm: entry.lm,
                lm_next: entry.lm_next.clone(),
            });
            slot.log_p_blank = log_sum_exp2(slot.log_p_blank, total + lp_blank);

            for k in 1..tokens as Label {
                let lp = post.log_prob(t, k as usize);
                let is_repeat = entry.labels.last() == Some(&k);
                if is_repeat {
                    // Same label continuing the run: prefix unchanged.
                    let slot = next.entry(entry.labels.clone()).or_insert_with(|| Beam {
                        labels: entry.labels.clone(),
                        log_p_blank: f64::NEG_INFINITY,
                        log_p_nonblank: f64::NEG_INFINITY,
                        lm: entry.lm,
                        lm_next: entry.lm_next.clone(),
                    });
                    slot.log_p_nonblank =
                        log_sum_exp2(slot.log_p_nonblank, entry.log_p_nonblank + lp);
                }
                // Extension to prefix + k: after a blank for repeats,
                // from anywhere otherwise.
                let base = if is_repeat { entry.log_p_blank } else { total };
                if base == f64::NEG_INFINITY {
                    continue;
                }
                let mut labels = entry.labels.clone();
                labels.push(k);
                let lm_cum = entry.lm
                    + entry
                        .lm_next
                        .as_ref()
                        .map_or(0.0, |d| d.label_log_probs[k as usize]);
                let slot = next.entry(labels.clone()).or_insert_with(|| Beam {
                    labels,
                    log_p_blank: f64::NEG_INFINITY,
                    log_p_nonblank: f64::NEG_INFINITY,
                    lm: lm_cum,
                    lm_next: None,
                });
                slot.log_p_nonblank = log_sum_exp2(slot.log_p_nonblank, base + lp);
            }
        }

        let mut merged: Vec<Beam> = next.into_values().collect();
        merged.sort_by(|a, b| {
            let sa = a.total() + lm_weight_term(lm_weight, lm.is_some(), a.lm);
            let sb = b.total() + lm_weight_term(lm_weight, lm.is_some(), b.lm);
            sb.total_cmp(&sa).then_with(|| a.labels.cmp(&b.labels))
        });
        merged.truncate(beam);
        beams = merged;
    }

    let mut hits: Vec<SearchHit> = beams
        .into_iter()
        .map(|entry| {
            let acoustic = entry.total();
            let lm_total = match lm {
                Some(model) => entry.lm + model.next_log_probs(&entry.labels).eos_log_prob,
                None => 0.0,
            };
            let score = acoustic + lm_weight_term(lm_weight, lm.is_some(), lm_total);
            SearchHit {
                labels: entry.labels,
                acoustic_log_prob: acoustic,
                lm_log_prob: lm_total,
                score,
            }
        })
        .filter(|h| h.score > f64::NEG_INFINITY)
        .collect();
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.labels.cmp(&b.labels)));
    Ok(hits)
}

#[inline]
fn lm_weight_term(lm_weight: f64, lm_present: bool, lm_log_prob: f64) -> f64 {
    if lm_present {
        lm_weight * lm_log_prob
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::normalize_rows;
    use rand::{Rng, SeedableRng};

    fn random_posteriors(rng: &mut impl Rng, frames: usize, tokens: usize) -> PosteriorMatrix {
        let data: Vec<f64> = (0..frames * tokens).map(|_| rng.gen_range(-3.0..0.0)).collect();
        normalize_rows(frames, tokens, data)
    }

    /// Exact CTC log-probability per label sequence by frame-string
    /// enumeration.
    fn exhaustive_scores(post: &PosteriorMatrix) -> HashMap<Vec<Label>, f64> {
        let mut scores: HashMap<Vec<Label>, f64> = HashMap::new();
        let t_max = post.frames();
        let k_max = post.tokens();
        for mut code in 0..k_max.pow(t_max as u32) {
            let mut logp = 0.0;
            let mut collapsed: Vec<Label> = Vec::new();
            let mut prev = usize::MAX;
            for t in 0..t_max {
                let k = code % k_max;
                code /= k_max;
                logp += post.log_prob(t, k);
                if k != prev && k != 0 {
                    collapsed.push(k as Label);
                }
                prev = k;
            }
            scores
                .entry(collapsed)
                .and_modify(|s| *s = log_sum_exp2(*s, logp))
                .or_insert(logp);
        }
        scores
    }

    #[test]
    fn peaky_posteriors_collapse_greedily() {
        // tokens: blank, a, b; frames spell "a a blank b"
        let big = 0.0f64;
        let small = -30.0f64;
        let rows = vec![
            [small, big, small],
            [small, big, small],
            [big, small, small],
            [small, small, big],
        ];
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        let m = normalize_rows(4, 3, data);
        for beam in [1, 4, 64] {
            let hits = prefix_beam_search(&m, beam, None, 0.0).unwrap();
            assert_eq!(hits[0].labels, vec![1, 2], "beam {beam}");
        }
    }

    #[test]
    fn exhaustive_beam_matches_bruteforce_top1() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..25 {
            let frames = rng.gen_range(2..=5);
            let tokens = rng.gen_range(2..=4);
            let m = random_posteriors(&mut rng, frames, tokens);
            let hits = prefix_beam_search(&m, 4096, None, 0.0).unwrap();
            let oracle = exhaustive_scores(&m);
            let best_score = oracle.values().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(
                (hits[0].score - best_score).abs() < 1e-9,
                "trial {trial}: {} vs {best_score}",
                hits[0].score
            );
            let top1_oracle_score = oracle[&hits[0].labels];
            assert!((top1_oracle_score - best_score).abs() < 1e-9, "trial {trial}");
        }
    }

    struct ForbidLabel(Label);
    impl CharLmScorer for ForbidLabel {
        fn next_log_probs(&self, _prefix: &[Label]) -> LmDistribution {
            let mut d = LmDistribution::uniform(4);
            d.label_log_probs[self.0 as usize] = f64::NEG_INFINITY;
            d
        }
    }

    #[test]
    fn forbidden_label_never_appears() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let m = random_posteriors(&mut rng, 5, 4);
            let hits = prefix_beam_search(&m, 16, Some(&ForbidLabel(2)), 0.5).unwrap();
            assert!(!hits.is_empty());
            for h in &hits {
                assert!(!h.labels.contains(&2), "{:?}", h.labels);
            }
        }
    }

    #[test]
    fn zero_lm_weight_is_bit_identical_to_no_lm() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let m = random_posteriors(&mut rng, 5, 4);
        let without = prefix_beam_search(&m, 8, None, 0.0).unwrap();
        let with = prefix_beam_search(&m, 8, Some(&ForbidLabel(2)), 0.0).unwrap();
        assert_eq!(without.len(), with.len());
        for (a, b) in without.iter().zip(&with) {
            assert_eq!(a.labels, b.labels);
            assert_eq!(a.score.to_bits(), b.score.to_bits());
        }
    }

    #[test]
    fn beam_zero_is_a_config_error() {
        let m = normalize_rows(1, 2, vec![-0.5, -0.9]);
        assert!(prefix_beam_search(&m, 0, None, 0.0).is_err());
    }
}
