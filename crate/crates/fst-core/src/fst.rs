//! The weighted transducer container.

use std::collections::BTreeMap;

use crate::symbol::SymbolTableRef;
use crate::weight::TropicalWeight;
use crate::{FstError, Result};

/// Dense state identifier.
pub type StateId = u32;

/// Arc label. 0 is reserved for epsilon.
pub type Label = u32;

/// The epsilon label.
pub const EPSILON: Label = 0;

/// A weighted transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub ilabel: Label,
    pub olabel: Label,
    pub weight: TropicalWeight,
    pub nextstate: StateId,
}

impl Arc {
    pub fn new(ilabel: Label, olabel: Label, weight: impl Into<TropicalWeight>, nextstate: StateId) -> Self {
        Arc {
            ilabel,
            olabel,
            weight: weight.into(),
            nextstate,
        }
    }
}

/// Which label field arcs are sorted on, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortOrder {
    None,
    ILabel,
    OLabel,
}

/// A weighted finite-state transducer over the tropical semiring.
///
/// States are dense integers, arcs are stored contiguously per state.
/// Construction goes through `add_state` / `add_arc` / `set_start` /
/// `set_final`; once built, a `Wfst` is treated as immutable and may be
/// shared freely across threads.
#[derive(Debug, Clone)]
pub struct Wfst {
    arcs: Vec<Vec<Arc>>,
    start: Option<StateId>,
    finals: BTreeMap<StateId, TropicalWeight>,
    isymbols: Option<SymbolTableRef>,
    osymbols: Option<SymbolTableRef>,
    sorted: SortOrder,
}

impl Wfst {
    pub fn new() -> Self {
        Wfst {
            arcs: Vec::new(),
            start: None,
            finals: BTreeMap::new(),
            isymbols: None,
            osymbols: None,
            sorted: SortOrder::None,
        }
    }

    pub fn add_state(&mut self) -> StateId {
        self.arcs.push(Vec::new());
        (self.arcs.len() - 1) as StateId
    }

    /// Add `n` states, returning the id of the first.
    pub fn add_states(&mut self, n: usize) -> StateId {
        let first = self.arcs.len() as StateId;
        for _ in 0..n {
            self.arcs.push(Vec::new());
        }
        first
    }

    pub fn add_arc(&mut self, state: StateId, arc: Arc) -> Result<()> {
        if arc.nextstate as usize >= self.arcs.len() {
            return Err(FstError::InvalidArgument(format!(
                "arc target {} out of range ({} states)",
                arc.nextstate,
                self.arcs.len()
            )));
        }
        let arcs = self
            .arcs
            .get_mut(state as usize)
            .ok_or_else(|| FstError::InvalidArgument(format!("no such state {state}")))?;
        arcs.push(arc);
        self.sorted = SortOrder::None;
        Ok(())
    }

    pub fn set_start(&mut self, state: StateId) -> Result<()> {
        if state as usize >= self.arcs.len() {
            return Err(FstError::InvalidArgument(format!("no such state {state}")));
        }
        self.start = Some(state);
        Ok(())
    }

    /// Mark `state` final with the given weight. A second call replaces the
    /// previous weight.
    pub fn set_final(&mut self, state: StateId, weight: impl Into<TropicalWeight>) -> Result<()> {
        if state as usize >= self.arcs.len() {
            return Err(FstError::InvalidArgument(format!("no such state {state}")));
        }
        let weight = weight.into();
        if weight.is_zero() {
            self.finals.remove(&state);
        } else {
            self.finals.insert(state, weight);
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.arcs.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.iter().map(|a| a.len()).sum()
    }

    pub fn start(&self) -> Option<StateId> {
        self.start
    }

    pub fn arcs(&self, state: StateId) -> &[Arc] {
        &self.arcs[state as usize]
    }

    pub fn final_weight(&self, state: StateId) -> TropicalWeight {
        self.finals
            .get(&state)
            .copied()
            .unwrap_or_else(TropicalWeight::zero)
    }

    pub fn is_final(&self, state: StateId) -> bool {
        self.finals.contains_key(&state)
    }

    /// Final states with their weights, in state-id order.
    pub fn finals(&self) -> impl Iterator<Item = (StateId, TropicalWeight)> + '_ {
        self.finals.iter().map(|(&s, &w)| (s, w))
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        0..self.arcs.len() as StateId
    }

    pub fn isymbols(&self) -> Option<&SymbolTableRef> {
        self.isymbols.as_ref()
    }

    pub fn osymbols(&self) -> Option<&SymbolTableRef> {
        self.osymbols.as_ref()
    }

    pub fn set_isymbols(&mut self, table: Option<SymbolTableRef>) {
        self.isymbols = table;
    }

    pub fn set_osymbols(&mut self, table: Option<SymbolTableRef>) {
        self.osymbols = table;
    }

    pub fn sort_order(&self) -> SortOrder {
        self.sorted
    }

    pub(crate) fn set_sort_order(&mut self, order: SortOrder) {
        self.sorted = order;
    }

    pub(crate) fn arcs_mut(&mut self, state: StateId) -> &mut Vec<Arc> {
        &mut self.arcs[state as usize]
    }

    /// Build a single-path transducer from `(ilabel, olabel, weight)` triples
    /// with final weight One. Labels may be epsilon.
    pub fn linear(path: &[(Label, Label, f64)]) -> Self {
        let mut fst = Wfst::new();
        let first = fst.add_states(path.len() + 1);
        fst.set_start(first).unwrap();
        for (i, &(il, ol, w)) in path.iter().enumerate() {
            fst.add_arc(i as StateId, Arc::new(il, ol, w, (i + 1) as StateId))
                .unwrap();
        }
        fst.set_final(path.len() as StateId, TropicalWeight::one())
            .unwrap();
        fst
    }

    /// Build an identity acceptor over the labels `1..=max_label`: a single
    /// state accepting any string with weight One per symbol.
    pub fn identity_acceptor(max_label: Label) -> Self {
        let mut fst = Wfst::new();
        let s = fst.add_state();
        fst.set_start(s).unwrap();
        fst.set_final(s, TropicalWeight::one()).unwrap();
        for l in 1..=max_label {
            fst.add_arc(s, Arc::new(l, l, TropicalWeight::one(), s)).unwrap();
        }
        fst
    }
}

impl Default for Wfst {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_and_query() {
        let mut fst = Wfst::new();
        let s0 = fst.add_state();
        let s1 = fst.add_state();
        fst.set_start(s0).unwrap();
        fst.set_final(s1, 0.5).unwrap();
        fst.add_arc(s0, Arc::new(1, 2, 0.25, s1)).unwrap();
        assert_eq!(fst.num_states(), 2);
        assert_eq!(fst.num_arcs(), 1);
        assert_eq!(fst.start(), Some(s0));
        assert!(fst.is_final(s1));
        assert!(!fst.is_final(s0));
        assert_eq!(fst.final_weight(s1).value(), 0.5);
        assert!(fst.final_weight(s0).is_zero());
    }

    #[test]
    fn arc_target_validated() {
        let mut fst = Wfst::new();
        let s0 = fst.add_state();
        assert!(fst.add_arc(s0, Arc::new(1, 1, 0.0, 7)).is_err());
    }

    #[test]
    fn set_final_zero_clears() {
        let mut fst = Wfst::new();
        let s0 = fst.add_state();
        fst.set_final(s0, 1.0).unwrap();
        fst.set_final(s0, TropicalWeight::zero()).unwrap();
        assert!(!fst.is_final(s0));
    }
}
