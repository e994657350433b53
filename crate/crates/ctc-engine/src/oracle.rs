//! Brute-force CTC oracles for test suites: exhaustive enumeration of frame
//! strings, independent of the recursions they validate.

use std::collections::HashMap;

use crate::math::log_sum_exp2;
use crate::posterior::PosteriorMatrix;
use crate::{collapse_labels, Label};

/// Visit every frame string with its log-probability and collapsed labels.
fn for_each_frame_string(post: &PosteriorMatrix, mut f: impl FnMut(&[Label], f64)) {
    let t_max = post.frames();
    let k_max = post.tokens();
    let mut path = vec![0 as Label; t_max];
    let count = (k_max as u64).pow(t_max as u32);
    for mut code in 0..count {
        let mut logp = 0.0;
        for t in 0..t_max {
            let k = (code % k_max as u64) as usize;
            code /= k_max as u64;
            path[t] = k as Label;
            logp += post.log_prob(t, k);
        }
        f(&path, logp);
    }
}

/// log P_ctc(labels): the sum over all frame strings collapsing to `labels`.
pub fn exhaustive_ctc_log_prob(post: &PosteriorMatrix, labels: &[Label]) -> f64 {
    let mut total = f64::NEG_INFINITY;
    for_each_frame_string(post, |path, logp| {
        if collapse_labels(path) == labels {
            total = log_sum_exp2(total, logp);
        }
    });
    total
}

/// Exact log-probability of every label sequence the posteriors can produce.
pub fn exhaustive_sequence_scores(post: &PosteriorMatrix) -> HashMap<Vec<Label>, f64> {
    let mut scores: HashMap<Vec<Label>, f64> = HashMap::new();
    for_each_frame_string(post, |path, logp| {
        let collapsed = collapse_labels(path);
        scores
            .entry(collapsed)
            .and_modify(|s| *s = log_sum_exp2(*s, logp))
            .or_insert(logp);
    });
    scores
}

/// log P(output starts with `prefix`).
pub fn exhaustive_prefix_log_prob(post: &PosteriorMatrix, prefix: &[Label]) -> f64 {
    let mut total = f64::NEG_INFINITY;
    for_each_frame_string(post, |path, logp| {
        let collapsed = collapse_labels(path);
        if collapsed.len() >= prefix.len() && collapsed[..prefix.len()] == *prefix {
            total = log_sum_exp2(total, logp);
        }
    });
    total
}

/// Best label sequence by exact CTC probability; ties broken toward the
/// lexicographically smaller sequence.
pub fn exhaustive_best_sequence(post: &PosteriorMatrix) -> (Vec<Label>, f64) {
    let scores = exhaustive_sequence_scores(post);
    let mut best: Option<(Vec<Label>, f64)> = None;
    for (labels, score) in scores {
        let better = match &best {
            None => true,
            Some((bl, bs)) => score > *bs || (score == *bs && labels < *bl),
        };
        if better {
            best = Some((labels, score));
        }
    }
    best.expect("at least the empty sequence exists")
}
