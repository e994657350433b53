//! ARPA model to grammar acceptor.

use std::collections::{HashMap, HashSet};

use fst_core::{Arc, StateId, SymbolTable, SymbolTableRef, TropicalWeight, Wfst};

use crate::arpa::{ArpaModel, SENTENCE_END, SENTENCE_START};
use crate::{GraphError, Result};

/// Build the grammar acceptor over a word table derived from the model's own
/// vocabulary.
pub fn build_g(arpa: &ArpaModel) -> Result<Wfst> {
    let mut table = SymbolTable::new();
    for w in arpa.vocabulary() {
        table.add(&w);
    }
    build_g_with_symbols(arpa, &std::sync::Arc::new(table))
}

/// Build the grammar acceptor G.
///
/// One state per n-gram context of order below the model order. Word arcs
/// carry `-ln(10) * log10prob`; contexts back off through epsilon arcs
/// weighted by their backoff value; the start state is the sentence-start
/// context; sentence-end probabilities become final weights, not arcs.
///
/// Words missing from `words` are skipped with a warning, so a table
/// restricted to a lexicon prunes the grammar on the fly. A context that has
/// higher-order extensions must carry an explicit backoff weight.
pub fn build_g_with_symbols(arpa: &ArpaModel, words: &SymbolTableRef) -> Result<Wfst> {
    let max_order = arpa.max_order();

    // Contexts that extend to higher orders must be able to back off.
    let mut extended: HashSet<Vec<String>> = HashSet::new();
    for k in 2..=max_order {
        for e in arpa.entries(k) {
            extended.insert(e.words[..k - 1].to_vec());
        }
    }
    for k in 1..max_order {
        for e in arpa.entries(k) {
            if extended.contains(&e.words) && e.log10_backoff.is_none() {
                return Err(GraphError::ArpaFormat(format!(
                    "context {:?} has higher-order extensions but no backoff weight",
                    e.words.join(" ")
                )));
            }
        }
    }

    let mut fst = Wfst::new();
    let mut ctx_state: HashMap<Vec<String>, StateId> = HashMap::new();
    let root = fst.add_state();
    ctx_state.insert(Vec::new(), root);
    for k in 1..max_order {
        for e in arpa.entries(k) {
            if e.words.last().map(String::as_str) == Some(SENTENCE_END) {
                continue;
            }
            let s = fst.add_state();
            ctx_state.insert(e.words.clone(), s);
        }
    }

    // Longest existing suffix of a tuple; the empty context always exists.
    let suffix_state = |tuple: &[String], ctx_state: &HashMap<Vec<String>, StateId>| -> StateId {
        for start in 0..=tuple.len() {
            if let Some(&s) = ctx_state.get(&tuple[start..]) {
                return s;
            }
        }
        root
    };

    let mut dropped: HashSet<String> = HashSet::new();
    for k in 1..=max_order {
        for e in arpa.entries(k) {
            let last = e.words.last().expect("entries are never empty");
            if last == SENTENCE_START {
                // No emission; the tuple only matters as a context.
                continue;
            }
            let src = suffix_state(&e.words[..k - 1], &ctx_state);
            if last == SENTENCE_END {
                let w = TropicalWeight::new(e.prob_nats());
                let merged = fst.final_weight(src).plus(w);
                fst.set_final(src, merged)?;
                continue;
            }
            let Some(label) = words.id(last) else {
                if dropped.insert(last.clone()) {
                    log::warn!("grammar: dropping word {last:?} absent from the word table");
                }
                continue;
            };
            let dst = if k < max_order && ctx_state.contains_key(&e.words) {
                ctx_state[&e.words]
            } else {
                suffix_state(&e.words[1..], &ctx_state)
            };
            fst.add_arc(src, Arc::new(label, label, e.prob_nats(), dst))?;
        }
    }

    // Backoff epsilon arcs.
    for k in 1..max_order {
        for e in arpa.entries(k) {
            let Some(&src) = ctx_state.get(&e.words) else { continue };
            let dst = suffix_state(&e.words[1..], &ctx_state);
            fst.add_arc(src, Arc::new(0, 0, e.backoff_nats(), dst))?;
        }
    }

    let start_ctx = vec![SENTENCE_START.to_string()];
    let start = ctx_state.get(&start_ctx).copied().unwrap_or(root);
    fst.set_start(start)?;
    fst.set_isymbols(Some(words.clone()));
    fst.set_osymbols(Some(words.clone()));
    Ok(fst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arpa::LN_10;
    use fst_core::ops::path_enumerate;

    fn unigram_abc() -> ArpaModel {
        let text = "\
\\data\\
ngram 1=3

\\1-grams:
-0.22184874961635637\ta
-0.5228787452803376\tb
-1\t</s>

\\end\\
";
        ArpaModel::parse(text.as_bytes()).unwrap()
    }

    #[test]
    fn unigram_sentence_weight_is_chain_score() {
        // p(a)=0.6, p(</s>)=0.1: weight("a") = -ln 0.6 - ln 0.1
        let g = build_g(&unigram_abc()).unwrap();
        let lang = path_enumerate(&g, 3);
        let a = g.isymbols().unwrap().id("a").unwrap();
        let got = lang[&vec![a]];
        let expected = -(0.6f64.ln()) - 0.1f64.ln();
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    }

    #[test]
    fn empty_vocabulary_accepts_only_empty_sentence() {
        let text = "\\data\\\nngram 1=1\n\n\\1-grams:\n-0.5\t</s>\n\n\\end\\\n";
        let m = ArpaModel::parse(text.as_bytes()).unwrap();
        let g = build_g(&m).unwrap();
        let lang = path_enumerate(&g, 4);
        assert_eq!(lang.len(), 1);
        let w = lang[&vec![]];
        assert!((w - 0.5 * LN_10).abs() < 1e-9);
    }

    #[test]
    fn bigram_backoff_scores_unseen_pair() {
        // p(b | a) unseen: backoff(a) + p(b)
        let text = "\
\\data\\
ngram 1=4
ngram 2=2

\\1-grams:
-99\t<s>\t-0.1
-0.4\ta\t-0.2
-0.5\tb\t0
-0.4\t</s>

\\2-grams:
-0.2\t<s> a
-0.3\ta a

\\end\\
";
        let m = ArpaModel::parse(text.as_bytes()).unwrap();
        let g = build_g(&m).unwrap();
        let table = g.isymbols().unwrap().clone();
        let a = table.id("a").unwrap();
        let b = table.id("b").unwrap();
        let lang = path_enumerate(&g, 4);
        // "a b": p(a|<s>) . backoff(a) p(b) . backoff(b) p(</s>)
        let expected = (0.2 + 0.2 + 0.5 + 0.0 + 0.4) * LN_10;
        let got = lang[&vec![a, b]];
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        // "a a" uses the explicit bigram
        let expected_aa = (0.2 + 0.3 + 0.2 + 0.4) * LN_10;
        let got_aa = lang[&vec![a, a]];
        assert!((got_aa - expected_aa).abs() < 1e-9, "{got_aa} vs {expected_aa}");
    }

    #[test]
    fn context_with_extensions_requires_backoff() {
        let text = "\
\\data\\
ngram 1=3
ngram 2=1

\\1-grams:
-0.4\ta
-0.5\tb
-0.4\t</s>

\\2-grams:
-0.2\ta b

\\end\\
";
        let m = ArpaModel::parse(text.as_bytes()).unwrap();
        let err = build_g(&m).unwrap_err();
        assert!(matches!(err, GraphError::ArpaFormat(_)), "{err}");
    }
}
