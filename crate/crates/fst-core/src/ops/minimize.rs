//! Minimization of deterministic machines by partition refinement.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::fst::{Arc, SortOrder, StateId, Wfst};
use crate::{FstError, Result};

/// Merge equivalent states of a deterministic machine.
///
/// States are equivalent when they have the same final weight and, for every
/// (ilabel, olabel, weight) triple, arcs into equivalent states. Refinement
/// runs to a fixed point, so duplicated suffix structure collapses. Weights
/// are compared exactly; the input must be deterministic on (ilabel, olabel)
/// pairs or a precondition error is returned.
pub fn minimize(fst: &Wfst) -> Result<Wfst> {
    let n = fst.num_states();
    if n == 0 || fst.start().is_none() {
        return Ok(fst.clone());
    }

    for q in fst.states() {
        let mut seen = HashSet::new();
        for arc in fst.arcs(q) {
            if !seen.insert((arc.ilabel, arc.olabel)) {
                return Err(FstError::Nondeterministic {
                    state: q,
                    ilabel: arc.ilabel,
                    olabel: arc.olabel,
                });
            }
        }
    }

    // Initial partition: final weight bits.
    let mut class_of: Vec<u32> = vec![0; n];
    {
        let mut by_final: HashMap<u64, u32> = HashMap::new();
        for q in fst.states() {
            let bits = fst.final_weight(q).value().to_bits();
            let next = by_final.len() as u32;
            let class = *by_final.entry(bits).or_insert(next);
            class_of[q as usize] = class;
        }
    }

    loop {
        // Signature: own class plus the sorted transition profile into
        // current classes.
        let mut sig_ids: HashMap<(u32, Vec<(u32, u32, u64, u32)>), u32> = HashMap::new();
        let mut next: Vec<u32> = vec![0; n];
        for q in fst.states() {
            let mut profile: Vec<(u32, u32, u64, u32)> = fst
                .arcs(q)
                .iter()
                .map(|a| {
                    (
                        a.ilabel,
                        a.olabel,
                        a.weight.value().to_bits(),
                        class_of[a.nextstate as usize],
                    )
                })
                .collect();
            profile.sort_unstable();
            let key = (class_of[q as usize], profile);
            let fresh = sig_ids.len() as u32;
            next[q as usize] = *sig_ids.entry(key).or_insert(fresh);
        }
        // Signatures include the old class, so classes only ever split; the
        // first-seen id assignment is canonical, making plain equality a
        // valid fixed-point test.
        let changed = class_of != next;
        class_of = next;
        if !changed {
            break;
        }
    }

    // Rebuild one state per class, keeping class ids ordered by first member
    // for reproducibility.
    let mut rep: BTreeMap<u32, StateId> = BTreeMap::new();
    for q in fst.states() {
        rep.entry(class_of[q as usize]).or_insert(q);
    }
    let mut new_id: HashMap<u32, StateId> = HashMap::new();
    let mut out = Wfst::new();
    out.set_isymbols(fst.isymbols().cloned());
    out.set_osymbols(fst.osymbols().cloned());
    let mut order: Vec<(StateId, u32)> = rep.iter().map(|(&c, &q)| (q, c)).collect();
    order.sort_unstable();
    for &(_, class) in &order {
        let s = out.add_state();
        new_id.insert(class, s);
    }
    for &(member, class) in &order {
        let src = new_id[&class];
        for arc in fst.arcs(member) {
            out.add_arc(
                src,
                Arc::new(
                    arc.ilabel,
                    arc.olabel,
                    arc.weight,
                    new_id[&class_of[arc.nextstate as usize]],
                ),
            )?;
        }
        let fw = fst.final_weight(member);
        if !fw.is_zero() {
            out.set_final(src, fw)?;
        }
    }
    out.set_start(new_id[&class_of[fst.start().unwrap() as usize]])?;
    out.set_sort_order(SortOrder::None);
    Ok(out)
}
