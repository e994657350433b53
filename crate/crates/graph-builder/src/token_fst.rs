//! Token transducer: frame-level CTC labels to lexicon units.

use fst_core::{Arc, StateId, SymbolTable, SymbolTableRef, TropicalWeight, Wfst};

use crate::lexicon::{TokenInventory, BLANK};
use crate::Result;

/// Token-side ilabel for a posterior column: the blank (column 0) is label 1,
/// units shift up by one past the epsilon slot.
pub fn token_label_for_column(column: usize) -> u32 {
    column as u32 + 1
}

/// Posterior column for a token-side ilabel, if it is a real token.
pub fn column_for_token_label(label: u32) -> Option<usize> {
    if label >= 1 {
        Some(label as usize - 1)
    } else {
        None
    }
}

/// Token symbol table: `<eps>`, `<blk>`, then the units in column order.
pub fn token_table(inventory: &TokenInventory) -> SymbolTableRef {
    let mut t = SymbolTable::new();
    t.add(BLANK);
    for u in inventory.units() {
        t.add(u);
    }
    std::sync::Arc::new(t)
}

/// Build the token transducer T with fresh symbol tables and no auxiliary
/// pass-through loops.
pub fn build_t(inventory: &TokenInventory) -> Result<Wfst> {
    let mut unit_table = SymbolTable::new();
    for u in inventory.units() {
        unit_table.add(u);
    }
    build_t_with_tables(inventory, &std::sync::Arc::new(unit_table), &[])
}

/// Build T against an existing output table.
///
/// Topology per unit: a mandatory emitting arc off the shared loop state,
/// a self-loop absorbing repeated frames, blank self-loops on both ends,
/// and direct unit-to-unit transitions, realizing the CTC collapse rule
/// exactly (repeats merge, repeats across a blank do not). Every state is
/// final so an utterance may end mid-run.
///
/// `aux_ids` adds weight-free pass-through self-loops on the loop state that
/// emit the auxiliary symbols without consuming a frame, for composing
/// against a right side that still carries its markers.
pub fn build_t_with_tables(
    inventory: &TokenInventory,
    unit_table: &SymbolTableRef,
    aux_ids: &[u32],
) -> Result<Wfst> {
    let mut fst = Wfst::new();
    let loop_state = fst.add_state();
    fst.set_start(loop_state)?;
    fst.set_final(loop_state, TropicalWeight::one())?;

    let blank_label = token_label_for_column(0);
    fst.add_arc(loop_state, Arc::new(blank_label, 0, 0.0, loop_state))?;

    let unit_count = inventory.unit_count();
    let unit_states: Vec<StateId> = (0..unit_count).map(|_| fst.add_state()).collect();

    // Markers can arrive between any two frames, so the pass-through loops
    // sit on every state.
    for &aux in aux_ids {
        fst.add_arc(loop_state, Arc::new(0, aux, 0.0, loop_state))?;
        for &s in &unit_states {
            fst.add_arc(s, Arc::new(0, aux, 0.0, s))?;
        }
    }
    for (i, &s_u) in unit_states.iter().enumerate() {
        let column = i + 1;
        let tok = token_label_for_column(column);
        let unit = column as u32; // unit table id equals posterior column
        fst.add_arc(loop_state, Arc::new(tok, unit, 0.0, s_u))?;
        fst.add_arc(s_u, Arc::new(tok, 0, 0.0, s_u))?;
        fst.add_arc(s_u, Arc::new(blank_label, 0, 0.0, loop_state))?;
        fst.set_final(s_u, TropicalWeight::one())?;
        for (j, &s_v) in unit_states.iter().enumerate() {
            if i == j {
                continue;
            }
            let column_v = j + 1;
            fst.add_arc(
                s_u,
                Arc::new(
                    token_label_for_column(column_v),
                    column_v as u32,
                    0.0,
                    s_v,
                ),
            )?;
        }
    }

    fst.set_isymbols(Some(token_table(inventory)));
    fst.set_osymbols(Some(unit_table.clone()));
    Ok(fst)
}

/// Collapse a frame labeling per the CTC rule: merge runs of equal labels,
/// then drop blanks. Labels are posterior columns (blank = 0).
pub fn collapse_frame_labels(frames: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev: Option<usize> = None;
    for &f in frames {
        if Some(f) != prev && f != 0 {
            out.push(f);
        }
        prev = Some(f);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use fst_core::ops::{path_enumerate_pairs, shortest_path};

    fn inv(units: &[&str]) -> TokenInventory {
        TokenInventory::from_units(units.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    /// Run a frame labeling (posterior columns) through T and return the
    /// emitted unit columns of the single cheapest path.
    fn transduce(t: &Wfst, frames: &[usize]) -> Vec<usize> {
        let path: Vec<(u32, u32, f64)> = frames
            .iter()
            .map(|&c| {
                let l = token_label_for_column(c);
                (l, l, 0.0)
            })
            .collect();
        let linear = Wfst::linear(&path);
        let mut t_plain = t.clone();
        t_plain.set_isymbols(None); // the linear probe has no tables
        let composed = fst_core::ops::compose(&linear, &t_plain).unwrap();
        let best = shortest_path(&composed, 1);
        assert_eq!(best.len(), 1, "frames {frames:?} not accepted");
        best[0].olabels.iter().map(|&l| l as usize).collect()
    }

    #[test]
    fn blank_padded_run_collapses_to_one_unit() {
        let t = build_t(&inv(&["a", "b"])).unwrap();
        // [blk, a, a, blk] -> "a"
        assert_eq!(transduce(&t, &[0, 1, 1, 0]), vec![1]);
    }

    #[test]
    fn repeat_across_blank_is_not_merged() {
        let t = build_t(&inv(&["a", "b"])).unwrap();
        // [a, blk, a] -> "a a"
        assert_eq!(transduce(&t, &[1, 0, 1]), vec![1, 1]);
    }

    #[test]
    fn adjacent_distinct_units_both_emit() {
        let t = build_t(&inv(&["a", "b"])).unwrap();
        // [a, a, b] -> "a b"
        assert_eq!(transduce(&t, &[1, 1, 2]), vec![1, 2]);
    }

    #[test]
    fn collapse_rule_matches_exhaustively() {
        // Brute-force check against collapse_frame_labels on every frame
        // string of length <= 6 over blank plus three units.
        let t = build_t(&inv(&["a", "b", "c"])).unwrap();
        let mut by_input: std::collections::BTreeMap<Vec<u32>, Vec<Vec<u32>>> =
            std::collections::BTreeMap::new();
        for ((i, o), w) in path_enumerate_pairs(&t, 6) {
            assert!(w.abs() < 1e-12);
            by_input.entry(i).or_default().push(o);
        }
        let mut stack = vec![Vec::new()];
        let mut checked = 0usize;
        while let Some(frames) = stack.pop() {
            let expected: Vec<u32> = collapse_frame_labels(&frames)
                .iter()
                .map(|&u| u as u32)
                .collect();
            let ilabels: Vec<u32> = frames
                .iter()
                .map(|&c: &usize| token_label_for_column(c))
                .collect();
            let outputs = by_input
                .get(&ilabels)
                .unwrap_or_else(|| panic!("frames {frames:?} not accepted"));
            assert_eq!(
                outputs,
                &vec![expected],
                "frames {frames:?} map to the wrong outputs"
            );
            checked += 1;
            if frames.len() < 6 {
                for c in 0..=3usize {
                    let mut next = frames.clone();
                    next.push(c);
                    stack.push(next);
                }
            }
        }
        assert_eq!(checked, (0..=6).map(|l| 4usize.pow(l)).sum::<usize>());
    }

    #[test]
    fn aux_loops_emit_markers_without_frames() {
        let mut unit_table = SymbolTable::new();
        unit_table.add("a");
        let aux = unit_table.add("#1");
        let t = build_t_with_tables(
            &inv(&["a"]),
            &std::sync::Arc::new(unit_table),
            &[aux],
        )
        .unwrap();
        let pairs = path_enumerate_pairs(&t, 3);
        // one frame of "a" followed by the marker
        assert!(pairs.contains_key(&(vec![2], vec![1, aux])));
    }
}
