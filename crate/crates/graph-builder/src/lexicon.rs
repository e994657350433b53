//! Lexicon and CTC token inventory.

use std::collections::HashSet;
use std::io::BufRead;

use crate::{GraphError, Result};

/// Name of the CTC blank token.
pub const BLANK: &str = "<blk>";

/// The ordered CTC output symbols. Posterior column 0 is the blank; columns
/// `1..=unit_count` are the lexicon units in inventory order.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenInventory {
    units: Vec<String>,
}

impl TokenInventory {
    pub fn from_units(units: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for u in &units {
            if u.is_empty() || u == BLANK {
                return Err(GraphError::Config(format!("invalid unit name {u:?}")));
            }
            if !seen.insert(u.clone()) {
                return Err(GraphError::Config(format!("duplicate unit {u:?}")));
            }
        }
        Ok(TokenInventory { units })
    }

    /// Number of CTC tokens including the blank.
    pub fn num_tokens(&self) -> usize {
        self.units.len() + 1
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    /// Unit name for a posterior column (1-based; 0 is the blank).
    pub fn unit_name(&self, column: usize) -> Option<&str> {
        if column == 0 {
            Some(BLANK)
        } else {
            self.units.get(column - 1).map(|s| s.as_str())
        }
    }

    /// Posterior column of a unit.
    pub fn column_of(&self, unit: &str) -> Option<usize> {
        self.units.iter().position(|u| u == unit).map(|i| i + 1)
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    /// Read the text form: one unit per line, blank implicit at id 0.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut units = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let unit = line.trim();
            if unit.is_empty() {
                continue;
            }
            units.push(unit.to_string());
        }
        Self::from_units(units)
    }

    pub fn write_text<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for u in &self.units {
            writeln!(w, "{u}")?;
        }
        Ok(())
    }
}

/// One pronunciation: a word spelled as a unit sequence, with an optional
/// probability (converted to a cost of `-ln p`; default 1.0, cost 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Pronunciation {
    pub word: String,
    pub units: Vec<String>,
    pub cost: f64,
}

/// Word-to-unit-sequence lexicon. A word may have several pronunciations.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<Pronunciation>,
}

impl Lexicon {
    pub fn new() -> Self {
        Lexicon { entries: Vec::new() }
    }

    pub fn add(&mut self, word: &str, units: Vec<String>, prob: Option<f64>) -> Result<()> {
        if units.is_empty() {
            return Err(GraphError::Config(format!(
                "word {word:?} has an empty unit sequence"
            )));
        }
        let cost = match prob {
            None => 0.0,
            Some(p) if p > 0.0 && p <= 1.0 => -p.ln(),
            Some(p) => {
                return Err(GraphError::Config(format!(
                    "word {word:?}: pronunciation probability {p} outside (0, 1]"
                )))
            }
        };
        self.entries.push(Pronunciation {
            word: word.to_string(),
            units,
            cost,
        });
        Ok(())
    }

    pub fn entries(&self) -> &[Pronunciation] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct words in first-appearance order.
    pub fn words(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.entries
            .iter()
            .filter(|e| seen.insert(e.word.clone()))
            .map(|e| e.word.clone())
            .collect()
    }

    pub fn defines(&self, word: &str) -> bool {
        self.entries.iter().any(|e| e.word == word)
    }

    /// Keep only pronunciations of the listed words.
    pub fn filtered(&self, keep: &HashSet<String>) -> Lexicon {
        Lexicon {
            entries: self
                .entries
                .iter()
                .filter(|e| keep.contains(&e.word))
                .cloned()
                .collect(),
        }
    }

    /// Check all units are present in the inventory; error names the first
    /// offending unit and its word.
    pub fn validate_units(&self, inventory: &TokenInventory) -> Result<()> {
        for e in &self.entries {
            for u in &e.units {
                if inventory.column_of(u).is_none() {
                    return Err(GraphError::Config(format!(
                        "unit {u:?} of word {:?} is not in the token inventory",
                        e.word
                    )));
                }
            }
        }
        Ok(())
    }

    /// Read the text form: `word<TAB>unit unit ...[<TAB>weight]`.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lex = Lexicon::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(GraphError::Config(format!(
                    "lexicon line {}: expected 2 or 3 tab-separated fields",
                    lineno + 1
                )));
            }
            let word = fields[0].trim();
            let units: Vec<String> = fields[1]
                .split_whitespace()
                .map(|u| u.to_string())
                .collect();
            let prob = if fields.len() == 3 {
                Some(fields[2].trim().parse::<f64>().map_err(|_| {
                    GraphError::Config(format!("lexicon line {}: bad weight", lineno + 1))
                })?)
            } else {
                None
            };
            lex.add(word, units, prob)?;
        }
        Ok(lex)
    }

    pub fn write_text<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for e in &self.entries {
            if e.cost == 0.0 {
                writeln!(w, "{}\t{}", e.word, e.units.join(" "))?;
            } else {
                writeln!(w, "{}\t{}\t{}", e.word, e.units.join(" "), (-e.cost).exp())?;
            }
        }
        Ok(())
    }
}
