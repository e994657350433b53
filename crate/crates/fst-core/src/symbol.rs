//! Bidirectional symbol ↔ id tables.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::{FstError, Result};

/// Shared handle to a symbol table attached to an FST side.
pub type SymbolTableRef = std::sync::Arc<SymbolTable>;

/// Bijective map between textual symbols and dense integer ids.
///
/// Id 0 is always the epsilon symbol `<eps>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    symbols: Vec<String>,
    ids: HashMap<String, u32>,
}

impl SymbolTable {
    /// New table containing only `<eps>` at id 0.
    pub fn new() -> Self {
        let mut t = SymbolTable {
            symbols: Vec::new(),
            ids: HashMap::new(),
        };
        t.push("<eps>".to_string());
        t
    }

    fn push(&mut self, sym: String) -> u32 {
        let id = self.symbols.len() as u32;
        self.ids.insert(sym.clone(), id);
        self.symbols.push(sym);
        id
    }

    /// Add a symbol, returning its id. Adding an existing symbol returns the
    /// existing id.
    pub fn add(&mut self, sym: &str) -> u32 {
        match self.ids.get(sym) {
            Some(&id) => id,
            None => self.push(sym.to_string()),
        }
    }

    pub fn id(&self, sym: &str) -> Option<u32> {
        self.ids.get(sym).copied()
    }

    pub fn symbol(&self, id: u32) -> Option<&str> {
        self.symbols.get(id as usize).map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Iterate `(id, symbol)` pairs in id order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (i as u32, s.as_str()))
    }

    /// Read the text form: one `symbol<TAB>id` line per entry.
    ///
    /// Ids must be dense and id 0 must be `<eps>`.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut pairs: Vec<(String, u32)> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split('\t');
            let sym = it
                .next()
                .ok_or_else(|| FstError::Format(format!("line {}: missing symbol", lineno + 1)))?;
            let id: u32 = it
                .next()
                .ok_or_else(|| FstError::Format(format!("line {}: missing id", lineno + 1)))?
                .trim()
                .parse()
                .map_err(|e| FstError::Format(format!("line {}: bad id: {e}", lineno + 1)))?;
            pairs.push((sym.to_string(), id));
        }
        pairs.sort_by_key(|(_, id)| *id);
        let mut table = SymbolTable {
            symbols: Vec::new(),
            ids: HashMap::new(),
        };
        for (i, (sym, id)) in pairs.into_iter().enumerate() {
            if id as usize != i {
                return Err(FstError::Format(format!(
                    "symbol ids are not dense: expected {i}, found {id}"
                )));
            }
            if table.ids.contains_key(&sym) {
                return Err(FstError::Format(format!("duplicate symbol {sym:?}")));
            }
            table.push(sym);
        }
        if table.symbol(0) != Some("<eps>") {
            return Err(FstError::Format("id 0 must be <eps>".to_string()));
        }
        Ok(table)
    }

    /// Write the text form: one `symbol<TAB>id` line per entry.
    pub fn write_text<W: Write>(&self, mut writer: W) -> Result<()> {
        for (id, sym) in self.iter() {
            writeln!(writer, "{sym}\t{id}")?;
        }
        Ok(())
    }
}

impl Default for SymbolTable {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_is_id_zero() {
        let t = SymbolTable::new();
        assert_eq!(t.id("<eps>"), Some(0));
        assert_eq!(t.symbol(0), Some("<eps>"));
    }

    #[test]
    fn add_is_idempotent() {
        let mut t = SymbolTable::new();
        let a = t.add("a");
        assert_eq!(t.add("a"), a);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn text_roundtrip() {
        let mut t = SymbolTable::new();
        t.add("a");
        t.add("b");
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        let back = SymbolTable::read_text(&buf[..]).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn rejects_sparse_ids() {
        let text = b"<eps>\t0\na\t2\n";
        assert!(SymbolTable::read_text(&text[..]).is_err());
    }
}
