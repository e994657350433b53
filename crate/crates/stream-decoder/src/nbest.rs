//! Hypotheses and n-best lists.

use std::io::{BufRead, Write};

use fst_core::SymbolTable;

use crate::{DecodeError, Result};

/// One first-pass hypothesis. Scores are costs in nats; lower is better.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    /// Word ids in the graph's output table.
    pub words: Vec<u32>,
    /// Unit ids (posterior columns) after CTC collapse of the best path.
    pub units: Vec<u32>,
    /// Language-model side of the cost (graph weights plus any insertion
    /// penalty).
    pub graph_score: f64,
    /// Acoustic side of the cost.
    pub acoustic_score: f64,
}

impl Hypothesis {
    pub fn total_score(&self) -> f64 {
        self.graph_score + self.acoustic_score
    }
}

/// First-pass output: hypotheses unique by word sequence, sorted ascending
/// by total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct NBestList {
    pub utt_id: String,
    pub hyps: Vec<Hypothesis>,
}

impl NBestList {
    pub fn best(&self) -> Option<&Hypothesis> {
        self.hyps.first()
    }

    /// Render as text: `utt_id rank graph_score acoustic_score word1 ...`.
    pub fn write_text<W: Write>(&self, words: &SymbolTable, mut w: W) -> Result<()> {
        for (rank, hyp) in self.hyps.iter().enumerate() {
            let text: Vec<&str> = hyp
                .words
                .iter()
                .map(|&id| words.symbol(id).unwrap_or("<unk>"))
                .collect();
            writeln!(
                w,
                "{} {} {} {} {}",
                self.utt_id,
                rank + 1,
                hyp.graph_score,
                hyp.acoustic_score,
                text.join(" ")
            )
            .map_err(DecodeError::Io)?;
        }
        Ok(())
    }
}

/// A parsed n-best line with words kept as text (the graph's table may be
/// gone by rescoring time).
#[derive(Debug, Clone, PartialEq)]
pub struct TextHypothesis {
    pub utt_id: String,
    pub rank: usize,
    pub graph_score: f64,
    pub acoustic_score: f64,
    pub words: Vec<String>,
}

impl TextHypothesis {
    pub fn total_score(&self) -> f64 {
        self.graph_score + self.acoustic_score
    }

    /// Character-level text: words joined without separators, the way the
    /// references are written.
    pub fn text(&self) -> String {
        self.words.concat()
    }
}

/// Parse lines in the [`NBestList::write_text`] format, preserving order.
pub fn read_nbest_text<R: BufRead>(r: R) -> Result<Vec<TextHypothesis>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(DecodeError::Io)?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(DecodeError::Config(format!(
                "n-best line {}: expected at least 4 fields",
                lineno + 1
            )));
        }
        let bad = |what: &str| DecodeError::Config(format!("n-best line {}: {what}", lineno + 1));
        out.push(TextHypothesis {
            utt_id: fields[0].to_string(),
            rank: fields[1].parse().map_err(|_| bad("bad rank"))?,
            graph_score: fields[2].parse().map_err(|_| bad("bad graph score"))?,
            acoustic_score: fields[3].parse().map_err(|_| bad("bad acoustic score"))?,
            words: fields[4..].iter().map(|w| w.to_string()).collect(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        let mut table = SymbolTable::new();
        let w1 = table.add("alpha");
        let w2 = table.add("beta");
        let list = NBestList {
            utt_id: "utt1".into(),
            hyps: vec![
                Hypothesis {
                    words: vec![w1, w2],
                    units: vec![1, 2],
                    graph_score: 1.5,
                    acoustic_score: 2.25,
                },
                Hypothesis {
                    words: vec![w2],
                    units: vec![2],
                    graph_score: 2.0,
                    acoustic_score: 2.5,
                },
            ],
        };
        let mut buf = Vec::new();
        list.write_text(&table, &mut buf).unwrap();
        let parsed = read_nbest_text(&buf[..]).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].utt_id, "utt1");
        assert_eq!(parsed[0].rank, 1);
        assert_eq!(parsed[0].words, vec!["alpha", "beta"]);
        assert_eq!(parsed[0].graph_score, 1.5);
        assert_eq!(parsed[1].acoustic_score, 2.5);
        assert_eq!(parsed[0].text(), "alphabeta");
    }

    #[test]
    fn empty_words_hypothesis_needs_no_trailing_fields() {
        let parsed = read_nbest_text("u 1 0.5 0.25".as_bytes()).unwrap();
        assert_eq!(parsed.len(), 1);
        assert!(parsed[0].words.is_empty());
    }
}
