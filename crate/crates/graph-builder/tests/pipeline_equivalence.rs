//! The optimized compilation pipeline must be weighted-language-equivalent
//! to the unoptimized reference composition on toy systems.

use graph_builder::arpa::{model_from_entries, ArpaModel, NgramEntry};
use graph_builder::{build_naive_graph, build_search_graph, Lexicon, TokenInventory};
use fst_core::Wfst;

use fst_core::ops::path_enumerate;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

/// A random toy system: 2-4 units, 2-5 words with pronunciations of length
/// 1-3 (occasionally duplicated to force homophones), and a unigram or
/// bigram model over the words.
pub fn random_toy_system(rng: &mut ChaCha8Rng) -> (ArpaModel, Lexicon, TokenInventory) {
    let unit_names = ["a", "b", "c", "d"];
    let num_units = rng.gen_range(2..=3usize);
    let inventory = TokenInventory::from_units(
        unit_names[..num_units].iter().map(|s| s.to_string()).collect(),
    )
    .unwrap();

    let num_words = rng.gen_range(2..=4usize);
    let mut lex = Lexicon::new();
    let mut spelled: Vec<Vec<String>> = Vec::new();
    for w in 0..num_words {
        let units: Vec<String> = if w > 0 && rng.gen_bool(0.25) {
            // duplicate an earlier spelling to force homophones
            spelled[rng.gen_range(0..spelled.len())].clone()
        } else {
            let len = rng.gen_range(1..=3usize);
            (0..len)
                .map(|_| unit_names[rng.gen_range(0..num_units)].to_string())
                .collect()
        };
        spelled.push(units.clone());
        lex.add(&format!("w{w}"), units, None).unwrap();
    }

    let words: Vec<String> = lex.words();
    let mut unigrams: Vec<NgramEntry> = Vec::new();
    let bigram_model = rng.gen_bool(0.5);
    for w in &words {
        unigrams.push(NgramEntry {
            words: vec![w.clone()],
            log10_prob: -rng.gen_range(0.2..1.5),
            log10_backoff: if bigram_model { Some(-rng.gen_range(0.0..0.5)) } else { None },
        });
    }
    unigrams.push(NgramEntry {
        words: vec!["</s>".to_string()],
        log10_prob: -rng.gen_range(0.2..1.0),
        log10_backoff: None,
    });

    let orders = if bigram_model {
        unigrams.push(NgramEntry {
            words: vec!["<s>".to_string()],
            log10_prob: -99.0,
            log10_backoff: Some(-rng.gen_range(0.0..0.5)),
        });
        let mut bigrams: Vec<NgramEntry> = Vec::new();
        let mut contexts: Vec<String> = vec!["<s>".to_string()];
        contexts.extend(words.iter().cloned());
        for ctx in &contexts {
            for w in words.iter().chain(std::iter::once(&"</s>".to_string())) {
                if rng.gen_bool(0.4) {
                    bigrams.push(NgramEntry {
                        words: vec![ctx.clone(), w.clone()],
                        log10_prob: -rng.gen_range(0.1..1.2),
                        log10_backoff: None,
                    });
                }
            }
        }
        vec![unigrams, bigrams]
    } else {
        vec![unigrams]
    };
    (model_from_entries(orders), lex, inventory)
}

#[test]
fn optimized_graph_matches_naive_composition_on_random_toys() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut built = 0;
    while built < 25 {
        let (arpa, lex, inventory) = random_toy_system(&mut rng);
        let optimized = build_search_graph(&arpa, &lex, &inventory).unwrap();
        let naive = build_naive_graph(&arpa, &lex, &inventory).unwrap();

        let max_len = 7;
        let lang_opt = path_enumerate(&optimized.fst, max_len);
        let lang_naive = path_enumerate(&naive.fst, max_len);
        assert_eq!(
            lang_opt.len(),
            lang_naive.len(),
            "system {built}: language sizes {} vs {}",
            lang_opt.len(),
            lang_naive.len()
        );
        for (s, w_opt) in &lang_opt {
            let w_naive = lang_naive
                .get(s)
                .unwrap_or_else(|| panic!("system {built}: string {s:?} missing from naive"));
            assert!(
                (w_opt - w_naive).abs() < TOL,
                "system {built}: string {s:?} weights {w_opt} vs {w_naive}"
            );
        }
        built += 1;
    }
}

#[test]
fn homophone_system_determinizes_and_survives_roundtrip() {
    // Two words with an identical spelling plus a prefix word. The
    // composition must determinize without hitting the budget and keep both
    // words reachable.
    let mut lex = Lexicon::new();
    lex.add("w0", vec!["a".into(), "b".into()], None).unwrap();
    lex.add("w1", vec!["a".into(), "b".into()], None).unwrap();
    lex.add("w2", vec!["a".into()], None).unwrap();
    let inventory = TokenInventory::from_units(vec!["a".into(), "b".into()]).unwrap();

    let entries = vec![vec![
        NgramEntry { words: vec!["w0".into()], log10_prob: -0.5, log10_backoff: None },
        NgramEntry { words: vec!["w1".into()], log10_prob: -0.7, log10_backoff: None },
        NgramEntry { words: vec!["w2".into()], log10_prob: -0.9, log10_backoff: None },
        NgramEntry { words: vec!["</s>".into()], log10_prob: -0.4, log10_backoff: None },
    ]];
    let arpa = model_from_entries(entries);

    let graph = build_search_graph(&arpa, &lex, &inventory).unwrap();
    let outputs: std::collections::HashSet<Vec<u32>> =
        fst_core::ops::path_enumerate_pairs(&graph.fst, 3)
            .into_keys()
            .map(|(_, o)| o)
            .collect();
    for w in ["w0", "w1", "w2"] {
        let id = graph.word_table.id(w).unwrap();
        assert!(
            outputs.contains(&vec![id]),
            "word {w} unreachable in the compiled graph"
        );
    }
    // Homophone weights stay distinct: frames "a b" followed by the end of
    // the sentence reach both w0 and w1 at their own grammar costs.
    let pairs = fst_core::ops::path_enumerate_pairs(&graph.fst, 3);
    let w0 = pairs[&(vec![2, 3], vec![graph.word_table.id("w0").unwrap()])];
    let w1 = pairs[&(vec![2, 3], vec![graph.word_table.id("w1").unwrap()])];
    let ln10 = std::f64::consts::LN_10;
    assert!((w0 - 0.9 * ln10).abs() < 1e-9, "{w0}");
    assert!((w1 - 1.1 * ln10).abs() < 1e-9, "{w1}");
}

#[test]
fn single_word_system_accepts_exactly_its_labelings() {
    let mut lex = Lexicon::new();
    lex.add("w0", vec!["a".into(), "b".into()], None).unwrap();
    let inventory = TokenInventory::from_units(vec!["a".into(), "b".into()]).unwrap();
    let arpa = model_from_entries(vec![vec![
        NgramEntry { words: vec!["w0".into()], log10_prob: -0.3, log10_backoff: None },
        NgramEntry { words: vec!["</s>".into()], log10_prob: -0.3, log10_backoff: None },
    ]]);
    let graph = build_search_graph(&arpa, &lex, &inventory).unwrap();

    // Every accepted frame string must collapse to (a b)* as units: zero or
    // more copies of the word's spelling (the grammar admits the empty
    // sentence through the bare end-of-sentence probability).
    let lang = path_enumerate(&graph.fst, 6);
    assert!(!lang.is_empty());
    let mut non_empty = 0;
    for s in lang.keys() {
        let frames: Vec<usize> = s.iter().map(|&l| l as usize - 1).collect();
        let collapsed = graph_builder::collapse_frame_labels(&frames);
        assert_eq!(collapsed.len() % 2, 0, "odd unit count for {s:?}");
        for pair in collapsed.chunks(2) {
            assert_eq!(pair, &[1, 2], "frames {s:?} collapse to {collapsed:?}");
        }
        if !collapsed.is_empty() {
            non_empty += 1;
        }
    }
    assert!(non_empty > 0);
}

#[test]
fn best_path_weight_matches_hand_arithmetic() {
    // One word "ab", unigram LM: p(w0)=10^-0.3, p(</s>)=10^-0.2. A frame
    // labeling spelling the word scores exactly the LM chain cost.
    let mut lex = Lexicon::new();
    lex.add("w0", vec!["a".into(), "b".into()], None).unwrap();
    let inventory = TokenInventory::from_units(vec!["a".into(), "b".into()]).unwrap();
    let arpa = model_from_entries(vec![vec![
        NgramEntry { words: vec!["w0".into()], log10_prob: -0.3, log10_backoff: None },
        NgramEntry { words: vec!["</s>".into()], log10_prob: -0.2, log10_backoff: None },
    ]]);
    let graph = build_search_graph(&arpa, &lex, &inventory).unwrap();

    // frames: blk a a b -> token labels 1 2 2 3
    let frames = Wfst::linear(&[(1, 1, 0.0), (2, 2, 0.0), (2, 2, 0.0), (3, 3, 0.0)]);
    let mut s_plain = graph.fst.clone();
    s_plain.set_isymbols(None);
    let composed = fst_core::ops::compose(&frames, &s_plain).unwrap();
    let best = fst_core::ops::shortest_path(&composed, 1);
    assert_eq!(best.len(), 1);
    let expected = (0.3 + 0.2) * std::f64::consts::LN_10;
    assert!(
        (best[0].weight - expected).abs() < 1e-9,
        "{} vs {expected}",
        best[0].weight
    );
    assert_eq!(best[0].olabels, vec![graph.word_table.id("w0").unwrap()]);
}
