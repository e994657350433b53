//! Random machine generators for oracle-based test suites.
//!
//! Everything here is seeded and deterministic. Generated weights are
//! non-negative so Dijkstra-style searches stay valid.

use rand::Rng;

use crate::fst::{Arc, StateId, Wfst};
use crate::weight::TropicalWeight;

/// Shape controls for [`random_wfst`].
#[derive(Debug, Clone)]
pub struct RandomFstConfig {
    pub max_states: usize,
    pub max_labels: u32,
    /// Probability of adding each candidate arc.
    pub arc_density: f64,
    /// When true, arcs only go from lower to higher state ids.
    pub acyclic: bool,
    /// When true, ilabel == olabel on every arc.
    pub acceptor: bool,
    /// Probability that an arc is an epsilon arc (both labels 0).
    pub epsilon_prob: f64,
}

impl Default for RandomFstConfig {
    fn default() -> Self {
        RandomFstConfig {
            max_states: 6,
            max_labels: 3,
            arc_density: 0.35,
            acyclic: true,
            acceptor: true,
            epsilon_prob: 0.1,
        }
    }
}

/// Draw a random machine. At least two states; state 0 is the start and the
/// last state is always final, with extra finals sprinkled in, so the
/// language is rarely empty.
pub fn random_wfst<R: Rng>(rng: &mut R, cfg: &RandomFstConfig) -> Wfst {
    let n = rng.gen_range(2..=cfg.max_states.max(2));
    let mut fst = Wfst::new();
    fst.add_states(n);
    fst.set_start(0).unwrap();
    fst.set_final((n - 1) as StateId, round_weight(rng.gen_range(0.0..2.0)))
        .unwrap();
    for q in 0..n {
        if q + 1 < n && rng.gen_bool(0.15) {
            fst.set_final(q as StateId, round_weight(rng.gen_range(0.0..2.0)))
                .unwrap();
        }
        let targets: Vec<usize> = if cfg.acyclic {
            (q + 1..n).collect()
        } else {
            (0..n).collect()
        };
        for &t in &targets {
            for _ in 0..2 {
                if !rng.gen_bool(cfg.arc_density) {
                    continue;
                }
                let eps = rng.gen_bool(cfg.epsilon_prob);
                let (il, ol) = if eps {
                    (0, 0)
                } else {
                    let il = rng.gen_range(1..=cfg.max_labels);
                    let ol = if cfg.acceptor {
                        il
                    } else {
                        rng.gen_range(0..=cfg.max_labels)
                    };
                    (il, ol)
                };
                // Epsilon self-loops with weight 0 are legal but make path
                // counting tests noisy; give cycles strictly positive weight.
                let w = if eps && t == q {
                    round_weight(rng.gen_range(0.1..2.0))
                } else {
                    round_weight(rng.gen_range(0.0..4.0))
                };
                fst.add_arc(q as StateId, Arc::new(il, ol, w, t as StateId))
                    .unwrap();
            }
        }
    }
    fst
}

fn round_weight(w: f64) -> TropicalWeight {
    // Quarter steps keep hand inspection easy and sums exactly representable.
    TropicalWeight::new((w * 4.0).round() / 4.0)
}

/// Compare two weighted languages for equality within `tol`.
pub fn same_weighted_language(
    a: &std::collections::BTreeMap<Vec<u32>, f64>,
    b: &std::collections::BTreeMap<Vec<u32>, f64>,
    tol: f64,
) -> std::result::Result<(), String> {
    if a.len() != b.len() {
        return Err(format!("language sizes differ: {} vs {}", a.len(), b.len()));
    }
    for (s, wa) in a {
        match b.get(s) {
            None => return Err(format!("string {s:?} missing on one side")),
            Some(wb) if (wa - wb).abs() > tol => {
                return Err(format!("string {s:?}: weights {wa} vs {wb}"));
            }
            _ => {}
        }
    }
    Ok(())
}
