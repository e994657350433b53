//! Search graph compilation: token, lexicon, and grammar transducers
//! composed and optimized into a single decoding graph.

use std::collections::HashSet;

use fst_core::ops::{arcsort, compose, determinize_with_budget, minimize, relabel, trim, SortField};
use fst_core::{SymbolTable, SymbolTableRef, Wfst};

use crate::arpa::{ArpaModel, UNKNOWN_WORD};
use crate::grammar::build_g_with_symbols;
use crate::lexfst::build_l;
use crate::lexicon::{Lexicon, TokenInventory};
use crate::token_fst::build_t_with_tables;
use crate::{GraphError, Result};

/// A compiled decoding graph with its symbol tables.
#[derive(Debug, Clone)]
pub struct SearchGraph {
    /// Input: frame-level CTC tokens; output: words. Arc-sorted on ilabel.
    pub fst: Wfst,
    /// `<eps>`, `<blk>`, then units in posterior-column order.
    pub token_table: SymbolTableRef,
    pub word_table: SymbolTableRef,
}

/// Options for [`build_search_graph_with`].
#[derive(Debug, Clone)]
pub struct CompileOptions {
    pub determinize_budget: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            determinize_budget: fst_core::ops::DEFAULT_DETERMINIZE_BUDGET,
        }
    }
}

/// Compile the decoding graph with default options.
pub fn build_search_graph(
    arpa: &ArpaModel,
    lex: &Lexicon,
    inventory: &TokenInventory,
) -> Result<SearchGraph> {
    build_search_graph_with(arpa, lex, inventory, &CompileOptions::default())
}

/// Compile the decoding graph.
///
/// Pipeline: compose the lexicon with the grammar, determinize, minimize,
/// relabel the auxiliary markers to epsilon, compose with the token
/// transducer, trim, and arc-sort on the input labels.
///
/// Vocabulary reconciliation: grammar words the lexicon cannot spell are
/// dropped with a warning (`<unk>` is kept only when the lexicon defines
/// it), and lexicon words the grammar never mentions are dropped with a
/// warning.
pub fn build_search_graph_with(
    arpa: &ArpaModel,
    lex: &Lexicon,
    inventory: &TokenInventory,
    opts: &CompileOptions,
) -> Result<SearchGraph> {
    let lm_vocab: HashSet<String> = arpa.vocabulary().into_iter().collect();
    let lex_vocab: HashSet<String> = lex.words().into_iter().collect();

    let mut word_table = SymbolTable::new();
    for w in lex.words() {
        if !lm_vocab.contains(&w) {
            log::warn!("compile: lexicon word {w:?} absent from the language model, dropped");
            continue;
        }
        if w == UNKNOWN_WORD && !lex.defines(UNKNOWN_WORD) {
            continue;
        }
        word_table.add(&w);
    }
    for w in &lm_vocab {
        if !lex_vocab.contains(w) {
            if w == UNKNOWN_WORD {
                log::warn!("compile: {UNKNOWN_WORD} has no lexicon entry, dropped");
            } else {
                log::warn!("compile: grammar word {w:?} missing from the lexicon, dropped");
            }
        }
    }
    if word_table.len() <= 1 {
        return Err(GraphError::Config(
            "no words shared between the lexicon and the language model".to_string(),
        ));
    }
    let word_table = std::sync::Arc::new(word_table);

    let keep: HashSet<String> = word_table.iter().skip(1).map(|(_, s)| s.to_string()).collect();
    let lex = lex.filtered(&keep);

    let lfst = build_l(&lex, inventory, &word_table)?;
    let g = build_g_with_symbols(arpa, &word_table)?;
    let g = arcsort(&g, SortField::ILabel);

    let lg = compose(&lfst.fst, &g)?;
    let lg = trim(&lg);
    let det = determinize_with_budget(&lg, opts.determinize_budget)?;
    let minned = minimize(&det)?;

    let aux_to_eps: Vec<(u32, u32)> = lfst.aux_ids.iter().map(|&id| (id, 0)).collect();
    let relabeled = relabel(&minned, &aux_to_eps, &[]);
    let relabeled = arcsort(&relabeled, SortField::ILabel);

    let t = build_t_with_tables(inventory, &lfst.unit_table, &[])?;
    let s = compose(&t, &relabeled)?;
    let s = trim(&s);
    let s = arcsort(&s, SortField::ILabel);

    let token_table = s
        .isymbols()
        .cloned()
        .expect("token transducer always carries its input table");
    Ok(SearchGraph {
        fst: s,
        token_table,
        word_table,
    })
}

/// The unoptimized reference composition over the same inputs: T composed
/// with the raw lexicon-grammar product, markers relabeled, no
/// determinization or minimization. Language-equivalent to the optimized
/// graph; used as a test oracle.
pub fn build_naive_graph(
    arpa: &ArpaModel,
    lex: &Lexicon,
    inventory: &TokenInventory,
) -> Result<SearchGraph> {
    let lm_vocab: HashSet<String> = arpa.vocabulary().into_iter().collect();
    let mut word_table = SymbolTable::new();
    for w in lex.words() {
        if lm_vocab.contains(&w) && (w != UNKNOWN_WORD || lex.defines(UNKNOWN_WORD)) {
            word_table.add(&w);
        }
    }
    let word_table = std::sync::Arc::new(word_table);
    let keep: HashSet<String> = word_table.iter().skip(1).map(|(_, s)| s.to_string()).collect();
    let lex = lex.filtered(&keep);

    let lfst = build_l(&lex, inventory, &word_table)?;
    let g = arcsort(&build_g_with_symbols(arpa, &word_table)?, SortField::ILabel);
    let lg = compose(&lfst.fst, &g)?;
    let aux_to_eps: Vec<(u32, u32)> = lfst.aux_ids.iter().map(|&id| (id, 0)).collect();
    let relabeled = relabel(&lg, &aux_to_eps, &[]);

    let t = build_t_with_tables(inventory, &lfst.unit_table, &[])?;
    let s = trim(&compose(&t, &relabeled)?);
    let token_table = s.isymbols().cloned().expect("token table attached");
    Ok(SearchGraph {
        fst: s,
        token_table,
        word_table,
    })
}
