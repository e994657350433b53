//! Token-passing Viterbi search over a compiled graph, fed posterior rows
//! chunk by chunk, with a search lattice kept for n-best extraction.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use ctc_engine::collapse_labels;
use fst_core::{Label, StateId, Wfst};

use crate::config::{BeamConfig, ChunkConfig};
use crate::nbest::{Hypothesis, NBestList};
use crate::scorer::{AcousticScorer, WindowRequest};
use crate::{DecodeError, Result};

/// One arrival edge in the search lattice: how a token reached a node.
#[derive(Debug, Clone, Copy)]
struct Arrival {
    from: usize,
    ilabel: Label,
    olabel: Label,
    graph_w: f64,
    acou_w: f64,
}

/// A lattice node: a graph state at one point of the search. Which state it
/// is lives in the frontier map; the node keeps costs and arrival edges.
#[derive(Debug, Clone)]
struct LatNode {
    cost: f64,
    graph_cost: f64,
    acou_cost: f64,
    arrivals: Vec<Arrival>,
}

/// A streaming decode in progress over one utterance.
///
/// Single-threaded by construction; the shared graph and scorer are only
/// read. Feature rows buffer until a full window (history, center,
/// lookahead) is available, the scorer turns the window's center into
/// posterior rows, and each row advances the Viterbi frontier (emitting
/// arcs, then epsilon closure, then beam pruning).
pub struct DecodeSession<'a> {
    utt_id: String,
    graph: &'a Wfst,
    scorer: &'a dyn AcousticScorer,
    chunks: ChunkConfig,
    beam: BeamConfig,
    nodes: Vec<LatNode>,
    frontier: BTreeMap<StateId, usize>,
    features: Vec<Vec<f64>>,
    watermark: usize,
    posterior_frames: usize,
    finalized: bool,
    start_node: usize,
    max_ilabel: Label,
}

impl<'a> DecodeSession<'a> {
    /// Open a session with one token on the graph start state at cost zero
    /// (plus its epsilon closure).
    pub fn new(
        utt_id: impl Into<String>,
        graph: &'a Wfst,
        scorer: &'a dyn AcousticScorer,
        chunks: ChunkConfig,
        beam: BeamConfig,
    ) -> Result<Self> {
        let chunks = chunks.validated()?;
        let beam = beam.validated()?;
        let start = graph
            .start()
            .ok_or_else(|| DecodeError::Config("graph has no start state".into()))?;
        let max_ilabel = graph
            .states()
            .flat_map(|s| graph.arcs(s).iter().map(|a| a.ilabel))
            .max()
            .unwrap_or(0);
        let mut session = DecodeSession {
            utt_id: utt_id.into(),
            graph,
            scorer,
            chunks,
            beam,
            nodes: vec![LatNode {
                cost: 0.0,
                graph_cost: 0.0,
                acou_cost: 0.0,
                arrivals: Vec::new(),
            }],
            frontier: BTreeMap::from([(start, 0)]),
            features: Vec::new(),
            watermark: 0,
            posterior_frames: 0,
            finalized: false,
            start_node: 0,
            max_ilabel,
        };
        session.epsilon_closure();
        session.prune();
        Ok(session)
    }

    pub fn utt_id(&self) -> &str {
        &self.utt_id
    }

    /// Input frames decoded so far (never decreases).
    pub fn decoded_input_frames(&self) -> usize {
        self.watermark
    }

    /// Posterior rows decoded so far.
    pub fn decoded_posterior_frames(&self) -> usize {
        self.posterior_frames
    }

    /// Current survivors as (graph state, total cost), for inspection.
    pub fn active_tokens(&self) -> Vec<(StateId, f64)> {
        self.frontier
            .iter()
            .map(|(&s, &idx)| (s, self.nodes[idx].cost))
            .collect()
    }

    fn word_penalty(&self, olabel: Label) -> f64 {
        if olabel != 0 {
            self.beam.word_insertion_penalty
        } else {
            0.0
        }
    }

    /// Relax epsilon arcs over the frontier to a fixed point, then record
    /// each epsilon edge between frontier nodes once.
    fn epsilon_closure(&mut self) {
        let mut queue: VecDeque<StateId> = self.frontier.keys().copied().collect();
        while let Some(s) = queue.pop_front() {
            let idx = self.frontier[&s];
            let (cost, graph_cost, acou_cost) = {
                let n = &self.nodes[idx];
                (n.cost, n.graph_cost, n.acou_cost)
            };
            for arc in self.graph.arcs(s) {
                if arc.ilabel != 0 {
                    continue;
                }
                let gw = arc.weight.value() + self.word_penalty(arc.olabel);
                let cand = cost + gw;
                match self.frontier.get(&arc.nextstate) {
                    None => {
                        let node = LatNode {
                            cost: cand,
                            graph_cost: graph_cost + gw,
                            acou_cost,
                            arrivals: Vec::new(),
                        };
                        self.nodes.push(node);
                        self.frontier.insert(arc.nextstate, self.nodes.len() - 1);
                        queue.push_back(arc.nextstate);
                    }
                    Some(&tidx) => {
                        if cand < self.nodes[tidx].cost {
                            let n = &mut self.nodes[tidx];
                            n.cost = cand;
                            n.graph_cost = graph_cost + gw;
                            n.acou_cost = acou_cost;
                            queue.push_back(arc.nextstate);
                        }
                    }
                }
            }
        }
        // Record edges after costs settle so each appears exactly once.
        let snapshot: Vec<(StateId, usize)> =
            self.frontier.iter().map(|(&s, &i)| (s, i)).collect();
        for (s, idx) in snapshot {
            for arc in self.graph.arcs(s) {
                if arc.ilabel != 0 {
                    continue;
                }
                if let Some(&tidx) = self.frontier.get(&arc.nextstate) {
                    let gw = arc.weight.value() + self.word_penalty(arc.olabel);
                    self.nodes[tidx].arrivals.push(Arrival {
                        from: idx,
                        ilabel: 0,
                        olabel: arc.olabel,
                        graph_w: gw,
                        acou_w: 0.0,
                    });
                }
            }
        }
    }

    fn prune(&mut self) {
        let best = self
            .frontier
            .values()
            .map(|&i| self.nodes[i].cost)
            .fold(f64::INFINITY, f64::min);
        if self.beam.beam.is_finite() {
            let cutoff = best + self.beam.beam;
            self.frontier.retain(|_, &mut idx| self.nodes[idx].cost <= cutoff);
        }
        if self.frontier.len() > self.beam.max_active {
            let mut ranked: Vec<(f64, StateId, usize)> = self
                .frontier
                .iter()
                .map(|(&s, &i)| (self.nodes[i].cost, s, i))
                .collect();
            // Lower state id wins at equal cost.
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            ranked.truncate(self.beam.max_active);
            self.frontier = ranked.into_iter().map(|(_, s, i)| (s, i)).collect();
        }
    }

    /// Advance the frontier over one posterior row.
    fn step(&mut self, row: &[f64]) -> Result<()> {
        if self.max_ilabel as usize > row.len() {
            return Err(DecodeError::Scorer(format!(
                "graph expects {} tokens but the scorer produced {}",
                self.max_ilabel,
                row.len()
            )));
        }
        let snapshot: Vec<(StateId, usize)> =
            self.frontier.iter().map(|(&s, &i)| (s, i)).collect();
        let mut next: BTreeMap<StateId, usize> = BTreeMap::new();
        for (s, idx) in snapshot {
            let (cost, graph_cost, acou_cost) = {
                let n = &self.nodes[idx];
                (n.cost, n.graph_cost, n.acou_cost)
            };
            for arc in self.graph.arcs(s) {
                if arc.ilabel == 0 {
                    continue;
                }
                let acou = -self.beam.acoustic_scale * row[arc.ilabel as usize - 1];
                let gw = arc.weight.value() + self.word_penalty(arc.olabel);
                let cand = cost + gw + acou;
                let arrival = Arrival {
                    from: idx,
                    ilabel: arc.ilabel,
                    olabel: arc.olabel,
                    graph_w: gw,
                    acou_w: acou,
                };
                match next.get(&arc.nextstate) {
                    None => {
                        self.nodes.push(LatNode {
                            cost: cand,
                            graph_cost: graph_cost + gw,
                            acou_cost: acou_cost + acou,
                            arrivals: vec![arrival],
                        });
                        next.insert(arc.nextstate, self.nodes.len() - 1);
                    }
                    Some(&tidx) => {
                        let n = &mut self.nodes[tidx];
                        n.arrivals.push(arrival);
                        if cand < n.cost {
                            n.cost = cand;
                            n.graph_cost = graph_cost + gw;
                            n.acou_cost = acou_cost + acou;
                        }
                    }
                }
            }
        }
        self.frontier = next;
        self.epsilon_closure();
        self.prune();
        self.posterior_frames += 1;
        Ok(())
    }

    /// Decode one window starting at the watermark. `center_valid` counts
    /// the real (unpadded) center frames.
    fn decode_window(&mut self, center_valid: usize) -> Result<usize> {
        let ChunkConfig {
            n_left,
            n_center,
            n_right,
            subsample,
            ..
        } = self.chunks;
        let dim = self.features.first().map(|r| r.len()).unwrap_or(1);
        let total = n_left + n_center + n_right;
        let mut window: Vec<Vec<f64>> = Vec::with_capacity(total);
        let first = self.watermark as i64 - n_left as i64;
        for off in 0..total as i64 {
            let idx = first + off;
            if idx >= 0 && (idx as usize) < self.features.len() {
                window.push(self.features[idx as usize].clone());
            } else {
                window.push(vec![0.0; dim]);
            }
        }
        let request = WindowRequest {
            features: &window,
            n_left,
            n_center,
            n_right,
            center_start: self.watermark,
            center_valid,
            subsample,
        };
        let post = self.scorer.score_window(&request)?;
        if post.frames() != self.chunks.rows_per_chunk() {
            return Err(DecodeError::Scorer(format!(
                "scorer produced {} rows for a window of {} center frames (expected {})",
                post.frames(),
                n_center,
                self.chunks.rows_per_chunk()
            )));
        }
        let rows_valid = center_valid.div_ceil(subsample);
        for r in 0..rows_valid {
            self.step(post.row(r))?;
        }
        self.watermark += center_valid;
        Ok(rows_valid)
    }

    /// Buffer feature rows and decode every full window that becomes
    /// available. Returns the number of posterior frames consumed.
    pub fn push_frames(&mut self, rows: &[Vec<f64>]) -> Result<usize> {
        if self.finalized {
            return Err(DecodeError::SessionFinalized);
        }
        self.features.extend(rows.iter().cloned());
        let mut consumed = 0;
        while self.features.len() >= self.watermark + self.chunks.n_center + self.chunks.n_right {
            consumed += self.decode_window(self.chunks.n_center)?;
        }
        Ok(consumed)
    }

    /// Flush buffered frames (missing lookahead is zero-padded), apply final
    /// weights, and extract the `n` cheapest distinct word sequences.
    pub fn finalize(&mut self, n: usize) -> Result<NBestList> {
        if self.finalized {
            return Err(DecodeError::SessionFinalized);
        }
        if n == 0 {
            return Err(DecodeError::Config("n-best size must be >= 1".into()));
        }
        while self.watermark < self.features.len() {
            let remaining = self.features.len() - self.watermark;
            self.decode_window(remaining.min(self.chunks.n_center))?;
        }
        self.finalized = true;

        let finals: Vec<(usize, f64)> = self
            .frontier
            .iter()
            .filter_map(|(&s, &idx)| {
                let fw = self.graph.final_weight(s);
                if fw.is_zero() {
                    None
                } else {
                    Some((idx, fw.value()))
                }
            })
            .collect();
        if finals.is_empty() {
            let best_partial = self.best_partial();
            return Err(DecodeError::NoFinalState {
                best_partial: Box::new(best_partial),
            });
        }
        let hyps = self.extract_nbest(&finals, n);
        Ok(NBestList {
            utt_id: self.utt_id.clone(),
            hyps,
        })
    }

    /// Cheapest surviving token's path, used as the diagnostic attachment
    /// when nothing reached a final state.
    fn best_partial(&self) -> Option<Hypothesis> {
        let best = self
            .frontier
            .values()
            .min_by(|&&a, &&b| self.nodes[a].cost.total_cmp(&self.nodes[b].cost))?;
        let finals = vec![(*best, 0.0)];
        self.extract_nbest(&finals, 1).into_iter().next()
    }

    /// N-shortest paths through the arrival lattice from the start node to
    /// the virtual end fed by `finals`, deduplicated by word sequence.
    fn extract_nbest(&self, finals: &[(usize, f64)], n: usize) -> Vec<Hypothesis> {
        const END: usize = usize::MAX;
        #[derive(Clone, Copy)]
        struct Edge {
            to: usize,
            ilabel: Label,
            olabel: Label,
            graph_w: f64,
            acou_w: f64,
        }
        let mut out: Vec<Vec<Edge>> = vec![Vec::new(); self.nodes.len()];
        for (tidx, node) in self.nodes.iter().enumerate() {
            for a in &node.arrivals {
                out[a.from].push(Edge {
                    to: tidx,
                    ilabel: a.ilabel,
                    olabel: a.olabel,
                    graph_w: a.graph_w,
                    acou_w: a.acou_w,
                });
            }
        }
        for &(idx, fw) in finals {
            out[idx].push(Edge {
                to: END,
                ilabel: 0,
                olabel: 0,
                graph_w: fw,
                acou_w: 0.0,
            });
        }

        // Search tree over lattice paths.
        struct PathNode {
            parent: Option<usize>,
            ilabel: Label,
            olabel: Label,
            graph: f64,
            acou: f64,
        }
        let width = n.max(4).saturating_mul(4).max(n + 16);
        let mut tree: Vec<PathNode> = vec![PathNode {
            parent: None,
            ilabel: 0,
            olabel: 0,
            graph: 0.0,
            acou: 0.0,
        }];
        let mut pops: Vec<usize> = vec![0; self.nodes.len()];
        let mut heap: BinaryHeap<Reverse<(OrdF64, usize, usize)>> = BinaryHeap::new();
        heap.push(Reverse((OrdF64(0.0), self.start_node, 0)));

        let mut results: Vec<Hypothesis> = Vec::new();
        let mut seen_words: std::collections::HashSet<Vec<Label>> =
            std::collections::HashSet::new();
        while let Some(Reverse((OrdF64(cost), node, path))) = heap.pop() {
            if node == END {
                // Reconstruct.
                let mut units_cols: Vec<Label> = Vec::new();
                let mut words: Vec<Label> = Vec::new();
                let mut graph_score = 0.0;
                let mut acou_score = 0.0;
                let mut cur = Some(path);
                while let Some(p) = cur {
                    let pn = &tree[p];
                    if pn.parent.is_some() {
                        if pn.ilabel != 0 {
                            units_cols.push(pn.ilabel - 1);
                        }
                        if pn.olabel != 0 {
                            words.push(pn.olabel);
                        }
                        graph_score += pn.graph;
                        acou_score += pn.acou;
                    }
                    cur = pn.parent;
                }
                units_cols.reverse();
                words.reverse();
                if seen_words.insert(words.clone()) {
                    results.push(Hypothesis {
                        words,
                        units: collapse_labels(&units_cols),
                        graph_score,
                        acoustic_score: acou_score,
                    });
                    if results.len() >= n {
                        break;
                    }
                }
                continue;
            }
            if pops[node] >= width {
                continue;
            }
            pops[node] += 1;
            for e in &out[node] {
                tree.push(PathNode {
                    parent: Some(path),
                    ilabel: e.ilabel,
                    olabel: e.olabel,
                    graph: e.graph_w,
                    acou: e.acou_w,
                });
                heap.push(Reverse((
                    OrdF64(cost + e.graph_w + e.acou_w),
                    e.to,
                    tree.len() - 1,
                )));
            }
        }
        results
    }
}

/// Total-order wrapper so costs can key a heap.
#[derive(Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
