//! Epsilon removal, trimming, arc sorting, and relabeling.

use std::collections::VecDeque;

use crate::fst::{Arc, SortOrder, StateId, Wfst, EPSILON};
use crate::weight::TropicalWeight;

/// Label field to sort arcs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortField {
    ILabel,
    OLabel,
}

/// Return a copy of `fst` with each state's arcs sorted on the chosen label
/// field (ties broken on the other label, target state, then weight for a
/// stable, reproducible order).
pub fn arcsort(fst: &Wfst, field: SortField) -> Wfst {
    let mut out = fst.clone();
    for s in 0..out.num_states() as StateId {
        out.arcs_mut(s).sort_by(|a, b| {
            let ka = sort_key(a, field);
            let kb = sort_key(b, field);
            ka.partial_cmp(&kb).expect("weights are never NaN")
        });
    }
    out.set_sort_order(match field {
        SortField::ILabel => SortOrder::ILabel,
        SortField::OLabel => SortOrder::OLabel,
    });
    out
}

fn sort_key(a: &Arc, field: SortField) -> (u32, u32, u32, u64) {
    let (first, second) = match field {
        SortField::ILabel => (a.ilabel, a.olabel),
        SortField::OLabel => (a.olabel, a.ilabel),
    };
    (first, second, a.nextstate, a.weight.value().to_bits())
}

/// Weighted epsilon closure of `state`: min cost to every state reachable
/// through arcs labeled (eps, eps), including `state` itself at cost One.
///
/// Uses worklist relaxation, so zero-weight epsilon cycles terminate and
/// negative epsilon arcs are folded correctly as long as no negative cycle
/// exists.
pub(crate) fn epsilon_closure(fst: &Wfst, state: StateId) -> Vec<(StateId, TropicalWeight)> {
    let mut dist: Vec<Option<TropicalWeight>> = vec![None; fst.num_states()];
    dist[state as usize] = Some(TropicalWeight::one());
    let mut queue = VecDeque::new();
    queue.push_back(state);
    while let Some(q) = queue.pop_front() {
        let base = dist[q as usize].unwrap();
        for arc in fst.arcs(q) {
            if arc.ilabel != EPSILON || arc.olabel != EPSILON {
                continue;
            }
            let cand = base.times(arc.weight);
            let slot = &mut dist[arc.nextstate as usize];
            let improved = match *slot {
                None => true,
                Some(cur) => cand < cur,
            };
            if improved {
                *slot = Some(cand);
                queue.push_back(arc.nextstate);
            }
        }
    }
    dist.iter()
        .enumerate()
        .filter_map(|(s, w)| w.map(|w| (s as StateId, w)))
        .collect()
}

/// Remove arcs labeled (eps, eps), preserving the weighted language.
///
/// Costs along epsilon chains are folded into the following non-epsilon arc
/// or into final weights. Epsilon-free input comes back unchanged. States are
/// not renumbered; unreachable leftovers are the caller's concern (`trim`).
pub fn rm_epsilon(fst: &Wfst) -> Wfst {
    let mut out = Wfst::new();
    out.add_states(fst.num_states());
    out.set_isymbols(fst.isymbols().cloned());
    out.set_osymbols(fst.osymbols().cloned());
    if let Some(start) = fst.start() {
        out.set_start(start).unwrap();
    }
    for q in fst.states() {
        let mut final_w = fst.final_weight(q);
        for (p, c) in epsilon_closure(fst, q) {
            final_w = final_w.plus(c.times(fst.final_weight(p)));
            for arc in fst.arcs(p) {
                if arc.ilabel == EPSILON && arc.olabel == EPSILON {
                    continue;
                }
                out.add_arc(
                    q,
                    Arc::new(arc.ilabel, arc.olabel, c.times(arc.weight), arc.nextstate),
                )
                .unwrap();
            }
        }
        if !final_w.is_zero() {
            out.set_final(q, final_w).unwrap();
        }
    }
    out
}

/// Keep only states that are both accessible from the start and coaccessible
/// to some final state, renumbering densely.
///
/// If the language is empty the result is a single start state with no arcs
/// and no finals.
pub fn trim(fst: &Wfst) -> Wfst {
    let n = fst.num_states();
    let mut forward = vec![false; n];
    if let Some(start) = fst.start() {
        let mut queue = VecDeque::from([start]);
        forward[start as usize] = true;
        while let Some(q) = queue.pop_front() {
            for arc in fst.arcs(q) {
                if !forward[arc.nextstate as usize] {
                    forward[arc.nextstate as usize] = true;
                    queue.push_back(arc.nextstate);
                }
            }
        }
    }

    // Reverse reachability from finals over the reversed arc relation.
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for q in fst.states() {
        for arc in fst.arcs(q) {
            preds[arc.nextstate as usize].push(q);
        }
    }
    let mut backward = vec![false; n];
    let mut queue: VecDeque<StateId> = fst.finals().map(|(s, _)| s).collect();
    for &s in &queue {
        backward[s as usize] = true;
    }
    while let Some(q) = queue.pop_front() {
        for &p in &preds[q as usize] {
            if !backward[p as usize] {
                backward[p as usize] = true;
                queue.push_back(p);
            }
        }
    }

    let keep: Vec<bool> = (0..n).map(|i| forward[i] && backward[i]).collect();
    let mut remap: Vec<Option<StateId>> = vec![None; n];
    let mut out = Wfst::new();
    out.set_isymbols(fst.isymbols().cloned());
    out.set_osymbols(fst.osymbols().cloned());
    for i in 0..n {
        if keep[i] {
            remap[i] = Some(out.add_state());
        }
    }

    let start_kept = fst
        .start()
        .and_then(|s| remap[s as usize]);
    match start_kept {
        Some(s) => out.set_start(s).unwrap(),
        None => {
            let s = out.add_state();
            out.set_start(s).unwrap();
            return out;
        }
    }
    for q in fst.states() {
        let Some(nq) = remap[q as usize] else { continue };
        for arc in fst.arcs(q) {
            if let Some(nt) = remap[arc.nextstate as usize] {
                out.add_arc(nq, Arc::new(arc.ilabel, arc.olabel, arc.weight, nt))
                    .unwrap();
            }
        }
        let fw = fst.final_weight(q);
        if !fw.is_zero() {
            out.set_final(nq, fw).unwrap();
        }
    }
    out
}

/// Rewrite labels through the given maps. Pairs are `(from, to)`; labels not
/// mentioned pass through unchanged.
pub fn relabel(fst: &Wfst, input_map: &[(u32, u32)], output_map: &[(u32, u32)]) -> Wfst {
    let imap: std::collections::HashMap<u32, u32> = input_map.iter().copied().collect();
    let omap: std::collections::HashMap<u32, u32> = output_map.iter().copied().collect();
    let mut out = fst.clone();
    for s in 0..out.num_states() as StateId {
        for arc in out.arcs_mut(s).iter_mut() {
            if let Some(&to) = imap.get(&arc.ilabel) {
                arc.ilabel = to;
            }
            if let Some(&to) = omap.get(&arc.olabel) {
                arc.olabel = to;
            }
        }
    }
    out.set_sort_order(SortOrder::None);
    out
}
