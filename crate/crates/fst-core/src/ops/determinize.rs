//! Weighted determinization by subset construction with residual weights.

use std::collections::{BTreeMap, HashMap};

use crate::fst::{Arc, SortOrder, StateId, Wfst, EPSILON};
use crate::ops::basic::epsilon_closure;
use crate::weight::TropicalWeight;
use crate::{FstError, Result};

/// Default cap on the number of subset states.
pub const DEFAULT_DETERMINIZE_BUDGET: usize = 1_000_000;

/// A determinization subset: states paired with residual costs, keyed
/// canonically so equal subsets are detected. Residuals are stored as exact
/// bit patterns; the common cost has already been pushed onto the incoming
/// arc.
type Subset = Vec<(StateId, u64)>;

fn canonical(mut members: Vec<(StateId, TropicalWeight)>) -> (Subset, TropicalWeight) {
    // Pull the common weight out so shifted copies of the same subset merge.
    let common = members
        .iter()
        .map(|&(_, w)| w)
        .fold(TropicalWeight::zero(), TropicalWeight::plus);
    let mut keyed: Vec<(StateId, u64)> = members
        .drain(..)
        .map(|(s, w)| (s, (w.value() - common.value()).to_bits()))
        .collect();
    keyed.sort_unstable();
    keyed.dedup();
    (keyed, common)
}

/// Determinize with the default state budget. See
/// [`determinize_with_budget`].
pub fn determinize(fst: &Wfst) -> Result<Wfst> {
    determinize_with_budget(fst, DEFAULT_DETERMINIZE_BUDGET)
}

/// Weighted subset determinization over paired labels.
///
/// The result has at most one arc per (state, ilabel, olabel); for acceptors
/// and for lexicon-grammar compositions carrying disambiguation symbols this
/// is also at most one arc per (state, ilabel). The weighted language is
/// preserved exactly: each subset arc carries the minimum over member
/// transitions and members keep their residual costs.
///
/// Arcs labeled (eps, eps) are folded by weighted epsilon closure while
/// subsets are expanded, so grammar backoff epsilons need no separate
/// removal pass.
///
/// Weighted determinization need not terminate on arbitrary cyclic input;
/// the subset count is capped by `budget` and exceeding it is an error.
pub fn determinize_with_budget(fst: &Wfst, budget: usize) -> Result<Wfst> {
    let mut out = Wfst::new();
    out.set_isymbols(fst.isymbols().cloned());
    out.set_osymbols(fst.osymbols().cloned());

    let Some(start) = fst.start() else {
        let s = out.add_state();
        out.set_start(s)?;
        return Ok(out);
    };

    // Cache closures; determinization revisits states constantly.
    let mut closures: Vec<Option<Vec<(StateId, TropicalWeight)>>> = vec![None; fst.num_states()];
    let closure = |s: StateId, closures: &mut Vec<Option<Vec<(StateId, TropicalWeight)>>>| {
        if closures[s as usize].is_none() {
            closures[s as usize] = Some(epsilon_closure(fst, s));
        }
        closures[s as usize].clone().unwrap()
    };

    // The start subset keeps absolute costs: there is no incoming arc to
    // carry a common weight, so nothing is pulled out.
    let mut start_subset: Subset = closure(start, &mut closures)
        .into_iter()
        .map(|(s, w)| (s, w.value().to_bits()))
        .collect();
    start_subset.sort_unstable();
    start_subset.dedup();

    let mut ids: HashMap<Subset, StateId> = HashMap::new();
    let mut stack: Vec<Subset> = Vec::new();

    let start_id = out.add_state();
    out.set_start(start_id)?;
    ids.insert(start_subset.clone(), start_id);
    stack.push(start_subset);

    while let Some(subset) = stack.pop() {
        let src = ids[&subset];

        // Final weight: min over members of residual * final.
        let mut final_w = TropicalWeight::zero();
        for &(q, bits) in &subset {
            let residual = TropicalWeight::new(f64::from_bits(bits));
            final_w = final_w.plus(residual.times(fst.final_weight(q)));
        }
        if !final_w.is_zero() {
            out.set_final(src, final_w)?;
        }

        // Gather moves per paired label across all members, folding epsilon
        // closure at the target end.
        let mut moves: BTreeMap<(u32, u32), Vec<(StateId, TropicalWeight)>> = BTreeMap::new();
        for &(q, bits) in &subset {
            let residual = TropicalWeight::new(f64::from_bits(bits));
            for arc in fst.arcs(q) {
                if arc.ilabel == EPSILON && arc.olabel == EPSILON {
                    continue; // handled by closure
                }
                let via = residual.times(arc.weight);
                for (t, c) in closure(arc.nextstate, &mut closures) {
                    moves
                        .entry((arc.ilabel, arc.olabel))
                        .or_default()
                        .push((t, via.times(c)));
                }
            }
        }

        for ((il, ol), mut members) in moves {
            // Keep only the cheapest arrival per member state.
            members.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
            members.dedup_by_key(|m| m.0);
            let (next_subset, arc_w) = canonical(members);
            let dst = match ids.get(&next_subset) {
                Some(&s) => s,
                None => {
                    if ids.len() >= budget {
                        return Err(FstError::DeterminizeBudget { budget });
                    }
                    let s = out.add_state();
                    ids.insert(next_subset.clone(), s);
                    stack.push(next_subset);
                    s
                }
            };
            out.add_arc(src, Arc::new(il, ol, arc_w, dst))?;
        }
    }

    out.set_sort_order(SortOrder::None);
    Ok(out)
}
