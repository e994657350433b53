//! N-shortest paths and the brute-force path enumeration oracle.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, BTreeMap};

use crate::fst::{Label, StateId, Wfst, EPSILON};
use crate::weight::TropicalWeight;

/// A start-to-final path: labels with epsilons removed, plus total weight
/// (arc weights times the final weight).
#[derive(Debug, Clone, PartialEq)]
pub struct FstPath {
    pub ilabels: Vec<Label>,
    pub olabels: Vec<Label>,
    pub weight: f64,
}

#[derive(Debug, Clone)]
struct SearchNode {
    state: Option<StateId>, // None marks the virtual superfinal
    parent: Option<usize>,
    ilabel: Label,
    olabel: Label,
}

/// The `n` lowest-weight accepting paths, sorted ascending by weight.
///
/// Distinct paths, not distinct label strings: two arcs spelling the same
/// string count twice. Requires non-negative arc weights for the best-first
/// order to be correct. Returns fewer than `n` paths when fewer exist.
pub fn shortest_path(fst: &Wfst, n: usize) -> Vec<FstPath> {
    let mut results = Vec::new();
    if n == 0 {
        return results;
    }
    let Some(start) = fst.start() else {
        return results;
    };

    let mut arena: Vec<SearchNode> = Vec::new();
    let mut heap: BinaryHeap<Reverse<(TropicalWeight, usize)>> = BinaryHeap::new();
    let mut pops: Vec<usize> = vec![0; fst.num_states()];

    arena.push(SearchNode {
        state: Some(start),
        parent: None,
        ilabel: EPSILON,
        olabel: EPSILON,
    });
    heap.push(Reverse((TropicalWeight::one(), 0)));

    while let Some(Reverse((cost, idx))) = heap.pop() {
        let node = arena[idx].clone();
        match node.state {
            None => {
                // Completed path; trace back through the arena.
                let mut ilabels = Vec::new();
                let mut olabels = Vec::new();
                let mut cur = Some(idx);
                while let Some(i) = cur {
                    let nd = &arena[i];
                    if nd.ilabel != EPSILON {
                        ilabels.push(nd.ilabel);
                    }
                    if nd.olabel != EPSILON {
                        olabels.push(nd.olabel);
                    }
                    cur = nd.parent;
                }
                ilabels.reverse();
                olabels.reverse();
                results.push(FstPath {
                    ilabels,
                    olabels,
                    weight: cost.value(),
                });
                if results.len() >= n {
                    break;
                }
            }
            Some(q) => {
                // Each real state may be expanded at most n times.
                if pops[q as usize] >= n {
                    continue;
                }
                pops[q as usize] += 1;

                let fw = fst.final_weight(q);
                if !fw.is_zero() {
                    arena.push(SearchNode {
                        state: None,
                        parent: Some(idx),
                        ilabel: EPSILON,
                        olabel: EPSILON,
                    });
                    heap.push(Reverse((cost.times(fw), arena.len() - 1)));
                }
                for arc in fst.arcs(q) {
                    let next_cost = cost.times(arc.weight);
                    arena.push(SearchNode {
                        state: Some(arc.nextstate),
                        parent: Some(idx),
                        ilabel: arc.ilabel,
                        olabel: arc.olabel,
                    });
                    heap.push(Reverse((next_cost, arena.len() - 1)));
                }
            }
        }
    }
    results
}

/// Exact weighted language restricted to input strings of length at most
/// `max_len`: a map from input label string to the minimum accepting weight.
///
/// Worklist relaxation over (state, consumed string) nodes. Epsilon input
/// arcs advance the state without consuming; zero-weight cycles terminate
/// because only strict improvements are re-queued. This is the test oracle:
/// slow, simple, and independent of the algorithms it checks.
pub fn path_enumerate(fst: &Wfst, max_len: usize) -> BTreeMap<Vec<Label>, f64> {
    let mut lang: BTreeMap<Vec<Label>, f64> = BTreeMap::new();
    let Some(start) = fst.start() else {
        return lang;
    };

    let mut dist: BTreeMap<(StateId, Vec<Label>), TropicalWeight> = BTreeMap::new();
    let mut queue: std::collections::VecDeque<(StateId, Vec<Label>)> =
        std::collections::VecDeque::new();
    dist.insert((start, Vec::new()), TropicalWeight::one());
    queue.push_back((start, Vec::new()));

    while let Some(key) = queue.pop_front() {
        let base = dist[&key];
        let (q, ref prefix) = key;
        for arc in fst.arcs(q) {
            let mut next_prefix = prefix.clone();
            if arc.ilabel != EPSILON {
                if prefix.len() >= max_len {
                    continue;
                }
                next_prefix.push(arc.ilabel);
            }
            let cand = base.times(arc.weight);
            let nk = (arc.nextstate, next_prefix);
            let improved = match dist.get(&nk) {
                None => true,
                Some(&cur) => cand < cur,
            };
            if improved {
                dist.insert(nk.clone(), cand);
                queue.push_back(nk);
            }
        }
    }

    for ((q, prefix), w) in dist {
        let fw = fst.final_weight(q);
        if fw.is_zero() {
            continue;
        }
        let total = w.times(fw).value();
        lang.entry(prefix)
            .and_modify(|cur| *cur = cur.min(total))
            .or_insert(total);
    }
    lang
}

/// Pair-language variant of [`path_enumerate`]: map from (input string,
/// output string) to minimum weight, both strings restricted to `max_len`.
pub fn path_enumerate_pairs(
    fst: &Wfst,
    max_len: usize,
) -> BTreeMap<(Vec<Label>, Vec<Label>), f64> {
    let mut lang: BTreeMap<(Vec<Label>, Vec<Label>), f64> = BTreeMap::new();
    let Some(start) = fst.start() else {
        return lang;
    };

    type Key = (StateId, Vec<Label>, Vec<Label>);
    let mut dist: BTreeMap<Key, TropicalWeight> = BTreeMap::new();
    let mut queue: std::collections::VecDeque<Key> = std::collections::VecDeque::new();
    dist.insert((start, Vec::new(), Vec::new()), TropicalWeight::one());
    queue.push_back((start, Vec::new(), Vec::new()));

    while let Some(key) = queue.pop_front() {
        let base = dist[&key];
        let (q, ref iprefix, ref oprefix) = key;
        for arc in fst.arcs(q) {
            let mut ni = iprefix.clone();
            let mut no = oprefix.clone();
            if arc.ilabel != EPSILON {
                if iprefix.len() >= max_len {
                    continue;
                }
                ni.push(arc.ilabel);
            }
            if arc.olabel != EPSILON {
                if oprefix.len() >= max_len {
                    continue;
                }
                no.push(arc.olabel);
            }
            let cand = base.times(arc.weight);
            let nk = (arc.nextstate, ni, no);
            let improved = match dist.get(&nk) {
                None => true,
                Some(&cur) => cand < cur,
            };
            if improved {
                dist.insert(nk.clone(), cand);
                queue.push_back(nk);
            }
        }
    }

    for ((q, iprefix, oprefix), w) in dist {
        let fw = fst.final_weight(q);
        if fw.is_zero() {
            continue;
        }
        let total = w.times(fw).value();
        lang.entry((iprefix, oprefix))
            .and_modify(|cur| *cur = cur.min(total))
            .or_insert(total);
    }
    lang
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::Arc;

    #[test]
    fn single_path_automaton_returns_one_path() {
        let fst = Wfst::linear(&[(1, 1, 0.5), (2, 2, 0.25)]);
        let paths = shortest_path(&fst, 5);
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].ilabels, vec![1, 2]);
        assert!((paths[0].weight - 0.75).abs() < 1e-12);
    }

    #[test]
    fn diamond_orders_by_weight() {
        let mut fst = Wfst::new();
        let s0 = fst.add_state();
        let s1 = fst.add_state();
        let s2 = fst.add_state();
        let s3 = fst.add_state();
        fst.set_start(s0).unwrap();
        fst.set_final(s3, 0.0).unwrap();
        fst.add_arc(s0, Arc::new(1, 1, 1.0, s1)).unwrap();
        fst.add_arc(s0, Arc::new(2, 2, 2.0, s2)).unwrap();
        fst.add_arc(s1, Arc::new(3, 3, 0.0, s3)).unwrap();
        fst.add_arc(s2, Arc::new(3, 3, 0.0, s3)).unwrap();
        let paths = shortest_path(&fst, 2);
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[0].ilabels, vec![1, 3]);
        assert!((paths[0].weight - 1.0).abs() < 1e-12);
        assert_eq!(paths[1].ilabels, vec![2, 3]);
        assert!((paths[1].weight - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_language_yields_no_paths() {
        let mut fst = Wfst::new();
        let s = fst.add_state();
        fst.set_start(s).unwrap();
        assert!(shortest_path(&fst, 3).is_empty());
        assert!(path_enumerate(&fst, 5).is_empty());
    }

    #[test]
    fn one_arc_acceptor_language() {
        let mut fst = Wfst::new();
        let s0 = fst.add_state();
        let s1 = fst.add_state();
        fst.set_start(s0).unwrap();
        fst.set_final(s1, 0.0).unwrap();
        fst.add_arc(s0, Arc::new(1, 1, 0.7, s1)).unwrap();
        let lang = path_enumerate(&fst, 3);
        assert_eq!(lang.len(), 1);
        assert!((lang[&vec![1]] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn enumeration_handles_zero_weight_cycles() {
        // eps self-loop of weight 0 must not hang the oracle
        let mut fst = Wfst::new();
        let s0 = fst.add_state();
        let s1 = fst.add_state();
        fst.set_start(s0).unwrap();
        fst.set_final(s1, 0.0).unwrap();
        fst.add_arc(s0, Arc::new(0, 0, 0.0, s0)).unwrap();
        fst.add_arc(s0, Arc::new(1, 1, 0.5, s1)).unwrap();
        let lang = path_enumerate(&fst, 3);
        assert_eq!(lang.len(), 1);
        assert!((lang[&vec![1]] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shortest_agrees_with_enumeration_on_cyclic_machine() {
        let mut fst = Wfst::new();
        let s0 = fst.add_state();
        let s1 = fst.add_state();
        fst.set_start(s0).unwrap();
        fst.set_final(s1, 0.25).unwrap();
        fst.add_arc(s0, Arc::new(1, 1, 1.0, s1)).unwrap();
        fst.add_arc(s1, Arc::new(2, 2, 0.5, s0)).unwrap();
        let mut by_weight: Vec<(Vec<Label>, f64)> = path_enumerate(&fst, 7).into_iter().collect();
        by_weight.sort_by(|a, b| a.1.total_cmp(&b.1));
        let paths = shortest_path(&fst, by_weight.len());
        assert_eq!(paths.len(), by_weight.len());
        for (p, (labels, w)) in paths.iter().zip(by_weight.iter()) {
            assert_eq!(&p.ilabels, labels);
            assert!((p.weight - w).abs() < 1e-9);
        }
    }
}
