//! CTC forward-backward loss, its exact gradient, and the hybrid loss
//! combiner.

use crate::math::{log_sum_exp2, log_sum_exp3};
use crate::posterior::PosteriorMatrix;
use crate::{CtcError, Label, Result};

/// Default mixing weight for the CTC term of the hybrid loss.
pub const DEFAULT_CTC_LOSS_WEIGHT: f64 = 0.3;

/// Fewest frames that can realize `labels`: one per label plus a separating
/// blank between equal neighbours.
pub fn min_frames_for(labels: &[Label]) -> usize {
    let dups = labels.windows(2).filter(|w| w[0] == w[1]).count();
    labels.len() + dups
}

fn validate_labels(post: &PosteriorMatrix, labels: &[Label]) -> Result<()> {
    for &y in labels {
        if y == 0 || y as usize >= post.tokens() {
            return Err(CtcError::InvalidLabel {
                label: y,
                tokens: post.tokens(),
            });
        }
    }
    let needed = min_frames_for(labels);
    if post.frames() < needed {
        return Err(CtcError::InfeasibleAlignment {
            frames: post.frames(),
            needed,
        });
    }
    Ok(())
}

/// Blank-interleaved state sequence: blank, y1, blank, y2, ..., blank.
fn extended(labels: &[Label]) -> Vec<usize> {
    let mut z = Vec::with_capacity(2 * labels.len() + 1);
    z.push(0);
    for &y in labels {
        z.push(y as usize);
        z.push(0);
    }
    z
}

fn forward(post: &PosteriorMatrix, z: &[usize]) -> Vec<Vec<f64>> {
    let t_max = post.frames();
    let s_max = z.len();
    let mut alpha = vec![vec![f64::NEG_INFINITY; s_max]; t_max];
    alpha[0][0] = post.log_prob(0, z[0]);
    if s_max > 1 {
        alpha[0][1] = post.log_prob(0, z[1]);
    }
    for t in 1..t_max {
        for (s, &label) in z.iter().enumerate() {
            let stay = alpha[t - 1][s];
            let step = if s >= 1 { alpha[t - 1][s - 1] } else { f64::NEG_INFINITY };
            let skip_ok = s >= 2 && label != 0 && z[s - 2] != label;
            let total = if skip_ok {
                log_sum_exp3(stay, step, alpha[t - 1][s - 2])
            } else {
                log_sum_exp2(stay, step)
            };
            alpha[t][s] = total + post.log_prob(t, label);
        }
    }
    alpha
}

fn backward(post: &PosteriorMatrix, z: &[usize]) -> Vec<Vec<f64>> {
    let t_max = post.frames();
    let s_max = z.len();
    let mut beta = vec![vec![f64::NEG_INFINITY; s_max]; t_max];
    beta[t_max - 1][s_max - 1] = post.log_prob(t_max - 1, z[s_max - 1]);
    if s_max > 1 {
        beta[t_max - 1][s_max - 2] = post.log_prob(t_max - 1, z[s_max - 2]);
    }
    for t in (0..t_max - 1).rev() {
        for (s, &label) in z.iter().enumerate() {
            let stay = beta[t + 1][s];
            let step = if s + 1 < s_max { beta[t + 1][s + 1] } else { f64::NEG_INFINITY };
            let skip_ok = s + 2 < s_max && z[s + 2] != 0 && z[s + 2] != label;
            let total = if skip_ok {
                log_sum_exp3(stay, step, beta[t + 1][s + 2])
            } else {
                log_sum_exp2(stay, step)
            };
            beta[t][s] = total + post.log_prob(t, label);
        }
    }
    beta
}

fn total_log_prob(alpha: &[Vec<f64>], s_max: usize) -> f64 {
    let last = alpha.last().expect("at least one frame");
    if s_max > 1 {
        log_sum_exp2(last[s_max - 1], last[s_max - 2])
    } else {
        last[s_max - 1]
    }
}

/// Negative log-probability that the posteriors collapse to `labels`,
/// summed over all frame alignments by the forward recursion in log space.
pub fn ctc_loss(post: &PosteriorMatrix, labels: &[Label]) -> Result<f64> {
    validate_labels(post, labels)?;
    if post.frames() == 0 {
        return Ok(0.0); // empty reference on zero frames: probability one
    }
    let z = extended(labels);
    let alpha = forward(post, &z);
    Ok(-total_log_prob(&alpha, z.len()))
}

/// Exact gradient of [`ctc_loss`] with respect to every log-posterior entry,
/// frame-major, via forward-backward occupancies.
pub fn ctc_grad(post: &PosteriorMatrix, labels: &[Label]) -> Result<Vec<f64>> {
    validate_labels(post, labels)?;
    let t_max = post.frames();
    let k_max = post.tokens();
    if t_max == 0 {
        return Ok(Vec::new());
    }
    let z = extended(labels);
    let alpha = forward(post, &z);
    let beta = backward(post, &z);
    let log_p = total_log_prob(&alpha, z.len());

    let mut grad = vec![0.0; t_max * k_max];
    for t in 0..t_max {
        // Path mass through (t, s) divides out the emission counted by both
        // alpha and beta.
        let mut mass_per_token = vec![f64::NEG_INFINITY; k_max];
        for (s, &label) in z.iter().enumerate() {
            let m = alpha[t][s] + beta[t][s] - post.log_prob(t, label);
            mass_per_token[label] = log_sum_exp2(mass_per_token[label], m);
        }
        for k in 0..k_max {
            if mass_per_token[k] != f64::NEG_INFINITY {
                grad[t * k_max + k] = -((mass_per_token[k] - log_p).exp());
            }
        }
    }
    Ok(grad)
}

/// Weighted combination of the CTC and attention losses:
/// `lambda * ctc + (1 - lambda) * attention`.
pub fn hybrid_loss(ctc: f64, attention: f64, lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(CtcError::Config(format!(
            "loss weight must lie in [0, 1], got {lambda}"
        )));
    }
    Ok(lambda * ctc + (1.0 - lambda) * attention)
}
