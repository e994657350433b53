//! Transducer composition with an epsilon-sequencing filter.

use std::collections::HashMap;

use crate::fst::{Arc, SortOrder, StateId, Wfst, EPSILON};
use crate::{FstError, Result};

/// Filter state for epsilon handling. 0: free; 1: just moved `a` alone on an
/// output-epsilon arc; 2: just moved `b` alone on an input-epsilon arc.
type Filter = u8;

/// Compose two transducers: the result maps `x` to `z` with weight
/// `min over y of a(x, y) + b(y, z)`.
///
/// Epsilon output arcs in `a` and epsilon input arcs in `b` are threaded
/// through a three-state filter so that no interleaving of the same epsilon
/// moves is represented by more than one canonical path: a lone `a` move
/// blocks a following lone `b` move and vice versa, while a paired move is
/// only taken from the free state.
///
/// Errors if both `a.osymbols` and `b.isymbols` are attached and differ.
pub fn compose(a: &Wfst, b: &Wfst) -> Result<Wfst> {
    if let (Some(ao), Some(bi)) = (a.osymbols(), b.isymbols()) {
        if ao.as_ref() != bi.as_ref() {
            return Err(FstError::SymbolTableMismatch(
                "left output table differs from right input table".to_string(),
            ));
        }
    }

    let mut out = Wfst::new();
    out.set_isymbols(a.isymbols().cloned());
    out.set_osymbols(b.osymbols().cloned());

    let (Some(a_start), Some(b_start)) = (a.start(), b.start()) else {
        let s = out.add_state();
        out.set_start(s)?;
        return Ok(out);
    };

    // Group b's arcs by input label per state, lazily.
    let mut b_index: Vec<Option<HashMap<u32, Vec<usize>>>> = vec![None; b.num_states()];

    let mut states: HashMap<(StateId, StateId, Filter), StateId> = HashMap::new();
    let mut stack: Vec<(StateId, StateId, Filter)> = Vec::new();

    let key = (a_start, b_start, 0u8);
    let start = out.add_state();
    out.set_start(start)?;
    states.insert(key, start);
    stack.push(key);

    while let Some((qa, qb, f)) = stack.pop() {
        let src = states[&(qa, qb, f)];

        let fa = a.final_weight(qa);
        let fb = b.final_weight(qb);
        if !fa.is_zero() && !fb.is_zero() {
            out.set_final(src, fa.times(fb))?;
        }

        if b_index[qb as usize].is_none() {
            let mut map: HashMap<u32, Vec<usize>> = HashMap::new();
            for (i, arc) in b.arcs(qb).iter().enumerate() {
                map.entry(arc.ilabel).or_default().push(i);
            }
            b_index[qb as usize] = Some(map);
        }

        let push = |out: &mut Wfst,
                        states: &mut HashMap<(StateId, StateId, Filter), StateId>,
                        stack: &mut Vec<(StateId, StateId, Filter)>,
                        target: (StateId, StateId, Filter),
                        arc: Arc|
         -> Result<()> {
            let dst = match states.get(&target) {
                Some(&s) => s,
                None => {
                    let s = out.add_state();
                    states.insert(target, s);
                    stack.push(target);
                    s
                }
            };
            out.add_arc(src, Arc { nextstate: dst, ..arc })
        };

        for arc_a in a.arcs(qa) {
            if arc_a.olabel != EPSILON {
                // Real label: must match a b arc on ilabel. Allowed from any
                // filter state, resets the filter.
                let index = b_index[qb as usize].as_ref().unwrap();
                if let Some(idxs) = index.get(&arc_a.olabel) {
                    for &i in idxs {
                        let arc_b = &b.arcs(qb)[i];
                        push(
                            &mut out,
                            &mut states,
                            &mut stack,
                            (arc_a.nextstate, arc_b.nextstate, 0),
                            Arc::new(
                                arc_a.ilabel,
                                arc_b.olabel,
                                arc_a.weight.times(arc_b.weight),
                                0,
                            ),
                        )?;
                    }
                }
            } else {
                // a moves alone; blocked right after a lone b move.
                if f == 0 || f == 1 {
                    push(
                        &mut out,
                        &mut states,
                        &mut stack,
                        (arc_a.nextstate, qb, 1),
                        Arc::new(arc_a.ilabel, EPSILON, arc_a.weight, 0),
                    )?;
                }
                // Paired epsilon move, only from the free state.
                if f == 0 {
                    let index = b_index[qb as usize].as_ref().unwrap();
                    if let Some(idxs) = index.get(&EPSILON) {
                        for &i in idxs {
                            let arc_b = &b.arcs(qb)[i];
                            push(
                                &mut out,
                                &mut states,
                                &mut stack,
                                (arc_a.nextstate, arc_b.nextstate, 0),
                                Arc::new(
                                    arc_a.ilabel,
                                    arc_b.olabel,
                                    arc_a.weight.times(arc_b.weight),
                                    0,
                                ),
                            )?;
                        }
                    }
                }
            }
        }

        // b moves alone; blocked right after a lone a move.
        if f == 0 || f == 2 {
            let index = b_index[qb as usize].as_ref().unwrap();
            if let Some(idxs) = index.get(&EPSILON) {
                for &i in idxs {
                    let arc_b = &b.arcs(qb)[i];
                    push(
                        &mut out,
                        &mut states,
                        &mut stack,
                        (qa, arc_b.nextstate, 2),
                        Arc::new(EPSILON, arc_b.olabel, arc_b.weight, 0),
                    )?;
                }
            }
        }
    }

    out.set_sort_order(SortOrder::None);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{path_enumerate, path_enumerate_pairs};
    use crate::weight::TropicalWeight;

    #[test]
    fn identity_composition_preserves_language() {
        let a = Wfst::linear(&[(1, 2, 0.5), (2, 1, 0.25)]);
        let id = Wfst::identity_acceptor(3);
        let c = compose(&a, &id).unwrap();
        assert_eq!(
            path_enumerate_pairs(&a, 4),
            path_enumerate_pairs(&c, 4)
        );
    }

    #[test]
    fn empty_left_side_annihilates() {
        let mut a = Wfst::new();
        let s = a.add_state();
        a.set_start(s).unwrap();
        a.set_final(s, 0.0).unwrap();
        // no arcs from start, so a accepts only epsilon
        let b = Wfst::linear(&[(1, 1, 0.0)]);
        let c = compose(&a, &b).unwrap();
        assert!(path_enumerate(&c, 4).is_empty());
    }

    #[test]
    fn epsilon_output_left_matches_epsilon_input_right() {
        // a: 1:eps then 2:3 ; b: 3:4 with an eps:5 arc before it
        let a = Wfst::linear(&[(1, 0, 1.0), (2, 3, 0.5)]);
        let b = Wfst::linear(&[(0, 5, 0.25), (3, 4, 0.125)]);
        let c = compose(&a, &b).unwrap();
        let pairs = path_enumerate_pairs(&c, 4);
        let w = pairs.get(&(vec![1, 2], vec![5, 4])).copied().unwrap();
        assert!((w - 1.875).abs() < 1e-12);
        // exactly one composite weight for the pair; no duplicated path with
        // a different cost
        assert_eq!(pairs.len(), 1);
    }

    #[test]
    fn symbol_table_mismatch_is_an_error() {
        use crate::symbol::SymbolTable;
        let mut ta = SymbolTable::new();
        ta.add("x");
        let mut tb = SymbolTable::new();
        tb.add("y");
        let mut a = Wfst::linear(&[(1, 1, 0.0)]);
        a.set_osymbols(Some(std::sync::Arc::new(ta)));
        let mut b = Wfst::linear(&[(1, 1, 0.0)]);
        b.set_isymbols(Some(std::sync::Arc::new(tb)));
        assert!(matches!(
            compose(&a, &b),
            Err(FstError::SymbolTableMismatch(_))
        ));
    }

    #[test]
    fn weights_multiply_along_matched_arcs() {
        let a = Wfst::linear(&[(1, 2, 1.5)]);
        let mut b = Wfst::new();
        let s0 = b.add_state();
        let s1 = b.add_state();
        b.set_start(s0).unwrap();
        b.set_final(s1, TropicalWeight::new(0.75)).unwrap();
        b.add_arc(s0, Arc::new(2, 7, 2.0, s1)).unwrap();
        let c = compose(&a, &b).unwrap();
        let langs = path_enumerate(&c, 2);
        let w = langs.get(&vec![1]).copied().unwrap();
        assert!((w - 4.25).abs() < 1e-12);
    }
}
