//! ARPA n-gram model parsing.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use crate::{GraphError, Result};

pub const SENTENCE_START: &str = "<s>";
pub const SENTENCE_END: &str = "</s>";
pub const UNKNOWN_WORD: &str = "<unk>";

/// Natural log of 10, for converting ARPA log10 values to nats.
pub const LN_10: f64 = std::f64::consts::LN_10;

/// One n-gram entry: the word tuple, its log10 probability, and the optional
/// log10 backoff weight.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramEntry {
    pub words: Vec<String>,
    pub log10_prob: f64,
    pub log10_backoff: Option<f64>,
}

impl NgramEntry {
    /// Probability as a tropical cost in nats.
    pub fn prob_nats(&self) -> f64 {
        -self.log10_prob * LN_10
    }

    /// Backoff as a tropical cost in nats; absent backoff is free.
    pub fn backoff_nats(&self) -> f64 {
        -self.log10_backoff.unwrap_or(0.0) * LN_10
    }
}

/// A parsed ARPA model: entries grouped by order, 1-based.
#[derive(Debug, Clone)]
pub struct ArpaModel {
    orders: Vec<Vec<NgramEntry>>,
}

impl ArpaModel {
    pub fn max_order(&self) -> usize {
        self.orders.len()
    }

    /// Entries of the given order (1-based).
    pub fn entries(&self, order: usize) -> &[NgramEntry] {
        &self.orders[order - 1]
    }

    /// All words appearing in any n-gram, excluding the sentence markers.
    pub fn vocabulary(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut vocab = Vec::new();
        for order in &self.orders {
            for entry in order {
                for w in &entry.words {
                    if w != SENTENCE_START && w != SENTENCE_END && seen.insert(w.clone()) {
                        vocab.push(w.clone());
                    }
                }
            }
        }
        vocab
    }

    /// Look up an entry by exact word tuple.
    pub fn entry(&self, words: &[String]) -> Option<&NgramEntry> {
        self.orders
            .get(words.len().wrapping_sub(1))?
            .iter()
            .find(|e| e.words == words)
    }

    /// Parse the standard text format: a `\data\` header with `ngram N=count`
    /// lines, one `\N-grams:` section per order, and a closing `\end\`.
    ///
    /// Each entry line is `log10prob w1 ... wN [log10backoff]`. After
    /// parsing, missing lower-order prefixes are patched in with a vanishing
    /// probability and a free backoff so every entry's prefix exists.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            Preamble,
            Data,
            Grams(usize),
            Done,
        }
        let mut section = Section::Preamble;
        let mut declared: HashMap<usize, usize> = HashMap::new();
        let mut orders: Vec<Vec<NgramEntry>> = Vec::new();

        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            let bad = |what: String| GraphError::ArpaFormat(format!("line {}: {what}", lineno + 1));
            if line.is_empty() {
                continue;
            }
            if line == "\\data\\" {
                section = Section::Data;
                continue;
            }
            if line == "\\end\\" {
                section = Section::Done;
                continue;
            }
            if let Some(rest) = line.strip_prefix('\\') {
                if let Some(n) = rest.strip_suffix("-grams:") {
                    let order: usize = n
                        .parse()
                        .map_err(|_| bad(format!("bad section header {line:?}")))?;
                    if order == 0 {
                        return Err(bad("order must be >= 1".to_string()));
                    }
                    while orders.len() < order {
                        orders.push(Vec::new());
                    }
                    section = Section::Grams(order);
                    continue;
                }
            }
            match section {
                Section::Preamble | Section::Done => {} // comments, trailing text
                Section::Data => {
                    // ngram N=count
                    if let Some(rest) = line.strip_prefix("ngram ") {
                        let mut it = rest.splitn(2, '=');
                        let order: usize = it
                            .next()
                            .unwrap()
                            .trim()
                            .parse()
                            .map_err(|_| bad("bad ngram order".to_string()))?;
                        let count: usize = it
                            .next()
                            .ok_or_else(|| bad("missing count".to_string()))?
                            .trim()
                            .parse()
                            .map_err(|_| bad("bad ngram count".to_string()))?;
                        declared.insert(order, count);
                    }
                }
                Section::Grams(order) => {
                    let fields: Vec<&str> = line.split_whitespace().collect();
                    if fields.len() < order + 1 {
                        return Err(bad(format!(
                            "expected at least {} fields for a {order}-gram",
                            order + 1
                        )));
                    }
                    if fields.len() > order + 2 {
                        return Err(bad(format!(
                            "too many fields ({}) for a {order}-gram",
                            fields.len()
                        )));
                    }
                    let log10_prob: f64 = fields[0]
                        .parse()
                        .map_err(|_| bad(format!("bad probability {:?}", fields[0])))?;
                    if log10_prob > 0.0 {
                        return Err(bad(format!(
                            "probability must be <= 0 in log10, got {log10_prob}"
                        )));
                    }
                    let words: Vec<String> =
                        fields[1..=order].iter().map(|w| w.to_string()).collect();
                    let log10_backoff = if fields.len() == order + 2 {
                        Some(
                            fields[order + 1]
                                .parse()
                                .map_err(|_| bad(format!("bad backoff {:?}", fields[order + 1])))?,
                        )
                    } else {
                        None
                    };
                    orders[order - 1].push(NgramEntry {
                        words,
                        log10_prob,
                        log10_backoff,
                    });
                }
            }
        }

        if orders.is_empty() || orders.iter().all(|o| o.is_empty()) {
            return Err(GraphError::ArpaFormat("no n-gram entries found".to_string()));
        }
        for (order, count) in &declared {
            if let Some(entries) = orders.get(order - 1) {
                if entries.len() != *count {
                    log::warn!(
                        "arpa: declared {count} {order}-grams but found {}",
                        entries.len()
                    );
                }
            }
        }

        let mut model = ArpaModel { orders };
        model.patch_holes();
        Ok(model)
    }

    /// Insert missing lower-order prefixes with a vanishing probability and a
    /// free backoff, so every order-k entry's (k-1)-prefix exists.
    fn patch_holes(&mut self) {
        for k in (2..=self.max_order()).rev() {
            let prefixes: Vec<Vec<String>> = self.orders[k - 1]
                .iter()
                .map(|e| e.words[..k - 1].to_vec())
                .collect();
            let existing: HashSet<Vec<String>> = self.orders[k - 2]
                .iter()
                .map(|e| e.words.clone())
                .collect();
            let mut added = HashSet::new();
            for prefix in prefixes {
                if !existing.contains(&prefix) && added.insert(prefix.clone()) {
                    log::warn!("arpa: patching missing {}-gram prefix {prefix:?}", k - 1);
                    self.orders[k - 2].push(NgramEntry {
                        words: prefix,
                        log10_prob: -99.0,
                        log10_backoff: Some(0.0),
                    });
                }
            }
        }
    }
}

/// Render a model back to ARPA text (used by fixture generation).
pub fn write_arpa<W: std::io::Write>(model: &ArpaModel, mut w: W) -> Result<()> {
    writeln!(w, "\\data\\")?;
    for k in 1..=model.max_order() {
        writeln!(w, "ngram {k}={}", model.entries(k).len())?;
    }
    for k in 1..=model.max_order() {
        writeln!(w)?;
        writeln!(w, "\\{k}-grams:")?;
        for e in model.entries(k) {
            match e.log10_backoff {
                Some(bo) => writeln!(w, "{}\t{}\t{}", e.log10_prob, e.words.join(" "), bo)?,
                None => writeln!(w, "{}\t{}", e.log10_prob, e.words.join(" "))?,
            }
        }
    }
    writeln!(w)?;
    writeln!(w, "\\end\\")?;
    Ok(())
}

/// Build a model directly from entries (fixture generation).
pub fn model_from_entries(orders: Vec<Vec<NgramEntry>>) -> ArpaModel {
    let mut model = ArpaModel { orders };
    model.patch_holes();
    model
}
