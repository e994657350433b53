//! Lexicon transducer: unit sequences to words, closed over words.

use std::collections::HashMap;

use fst_core::{Arc, StateId, SymbolTable, SymbolTableRef, TropicalWeight, Wfst};

use crate::lexicon::{Lexicon, TokenInventory};
use crate::{GraphError, Result};

/// The lexicon transducer plus the tables it was built against.
#[derive(Debug, Clone)]
pub struct LexiconFst {
    pub fst: Wfst,
    /// Input side: `<eps>`, units at their posterior column, then `#1..#n`.
    pub unit_table: SymbolTableRef,
    pub word_table: SymbolTableRef,
    /// Ids of the auxiliary `#k` symbols in `unit_table`.
    pub aux_ids: Vec<u32>,
}

/// Assign auxiliary markers: every pronunciation whose unit sequence occurs
/// more than once, or is a proper prefix of another pronunciation, gets a
/// distinct `#k` within its spelling group. Returns one `Option<usize>`
/// per lexicon entry (1-based marker index) and the number of markers used.
fn assign_disambig(lex: &Lexicon) -> (Vec<Option<usize>>, usize) {
    let mut counts: HashMap<&[String], usize> = HashMap::new();
    for e in lex.entries() {
        *counts.entry(e.units.as_slice()).or_insert(0) += 1;
    }
    let is_prefix = |units: &[String]| {
        lex.entries().iter().any(|other| {
            other.units.len() > units.len() && other.units[..units.len()] == *units
        })
    };
    let mut next_index: HashMap<&[String], usize> = HashMap::new();
    let mut max_used = 0;
    let assignments = lex
        .entries()
        .iter()
        .map(|e| {
            let needs = counts[e.units.as_slice()] > 1 || is_prefix(&e.units);
            if needs {
                let slot = next_index.entry(e.units.as_slice()).or_insert(0);
                *slot += 1;
                max_used = max_used.max(*slot);
                Some(*slot)
            } else {
                None
            }
        })
        .collect();
    (assignments, max_used)
}

/// Build the lexicon transducer L.
///
/// A single loop state is both start and final; each pronunciation is a
/// chain of unit arcs off the loop. The word label rides on the last arc of
/// the chain (the auxiliary-marker arc when one is assigned), so after
/// composing with a grammar the result determinizes over paired labels into
/// an input-deterministic machine. Pronunciation cost rides on the first
/// arc. Words absent from `word_table` are dropped with a warning.
pub fn build_l(
    lex: &Lexicon,
    inventory: &TokenInventory,
    word_table: &SymbolTableRef,
) -> Result<LexiconFst> {
    lex.validate_units(inventory)?;
    if lex.is_empty() {
        return Err(GraphError::Config("lexicon is empty".to_string()));
    }

    let (disambig, num_aux) = assign_disambig(lex);

    let mut unit_table = SymbolTable::new();
    for u in inventory.units() {
        unit_table.add(u);
    }
    let aux_ids: Vec<u32> = (1..=num_aux)
        .map(|k| unit_table.add(&format!("#{k}")))
        .collect();
    let unit_table = std::sync::Arc::new(unit_table);

    let mut fst = Wfst::new();
    let loop_state = fst.add_state();
    fst.set_start(loop_state)?;
    fst.set_final(loop_state, TropicalWeight::one())?;

    for (e, marker) in lex.entries().iter().zip(&disambig) {
        let Some(word_id) = word_table.id(&e.word) else {
            log::warn!("lexicon: dropping word {:?} absent from the word table", e.word);
            continue;
        };
        // Labels along the chain: units then the optional marker.
        let mut ilabels: Vec<u32> = e
            .units
            .iter()
            .map(|u| unit_table.id(u).expect("validated above"))
            .collect();
        if let Some(k) = marker {
            ilabels.push(aux_ids[k - 1]);
        }
        let last = ilabels.len() - 1;
        let mut src = loop_state;
        for (i, &il) in ilabels.iter().enumerate() {
            let dst = if i == last {
                loop_state
            } else {
                fst.add_state()
            };
            let olabel = if i == last { word_id } else { 0 };
            let weight = if i == 0 { e.cost } else { 0.0 };
            fst.add_arc(src, Arc::new(il, olabel, weight, dst))?;
            src = dst;
        }
    }

    fst.set_isymbols(Some(unit_table.clone()));
    fst.set_osymbols(Some(word_table.clone()));
    Ok(LexiconFst {
        fst,
        unit_table,
        word_table: word_table.clone(),
        aux_ids,
    })
}

/// Word table holding exactly the lexicon's words, in first-seen order.
pub fn word_table_for(lex: &Lexicon) -> SymbolTableRef {
    let mut table = SymbolTable::new();
    for w in lex.words() {
        table.add(&w);
    }
    std::sync::Arc::new(table)
}
