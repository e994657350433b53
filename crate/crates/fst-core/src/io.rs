//! Graph serialization.
//!
//! Text form, one arc per line `src dst ilabel olabel weight`, final states
//! as `state weight` lines. Binary form: magic `WFST1`, little-endian u32
//! counts, then finals as `(u32 state, f32 weight)` and arcs as
//! `(u32 src, u32 ilabel, u32 olabel, f32 weight, u32 dst)`.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use crate::fst::{Arc, StateId, Wfst};
use crate::weight::TropicalWeight;
use crate::{FstError, Result};

const MAGIC: &[u8; 5] = b"WFST1";

/// Write the text form. Arc lines come before final lines; states with no
/// arcs and no final weight appear only implicitly through the counts of
/// other lines, so text form is meant for trimmed graphs and fixtures.
pub fn write_text<W: Write>(fst: &Wfst, mut w: W) -> Result<()> {
    if let Some(start) = fst.start() {
        writeln!(w, "# start {start}")?;
    }
    writeln!(w, "# states {}", fst.num_states())?;
    for q in fst.states() {
        for arc in fst.arcs(q) {
            writeln!(
                w,
                "{q} {} {} {} {}",
                arc.nextstate,
                arc.ilabel,
                arc.olabel,
                arc.weight.value()
            )?;
        }
    }
    for (q, weight) in fst.finals() {
        writeln!(w, "{q} {}", weight.value())?;
    }
    Ok(())
}

/// Read the text form written by [`write_text`].
pub fn read_text<R: BufRead>(r: R) -> Result<Wfst> {
    let mut fst = Wfst::new();
    let mut start: Option<StateId> = None;
    let mut declared_states: Option<usize> = None;
    let mut arcs: Vec<(StateId, Arc)> = Vec::new();
    let mut finals: Vec<(StateId, f64)> = Vec::new();
    let mut max_state: u64 = 0;

    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| FstError::Format(format!("line {}: {what}", lineno + 1));
        if let Some(rest) = line.strip_prefix('#') {
            let mut it = rest.split_whitespace();
            match it.next() {
                Some("start") => {
                    start = Some(
                        it.next()
                            .ok_or_else(|| bad("missing start id"))?
                            .parse()
                            .map_err(|_| bad("bad start id"))?,
                    );
                }
                Some("states") => {
                    declared_states = Some(
                        it.next()
                            .ok_or_else(|| bad("missing state count"))?
                            .parse()
                            .map_err(|_| bad("bad state count"))?,
                    );
                }
                _ => {}
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.len() {
            5 => {
                let src: StateId = fields[0].parse().map_err(|_| bad("bad src"))?;
                let dst: StateId = fields[1].parse().map_err(|_| bad("bad dst"))?;
                let il: u32 = fields[2].parse().map_err(|_| bad("bad ilabel"))?;
                let ol: u32 = fields[3].parse().map_err(|_| bad("bad olabel"))?;
                let wt: f64 = fields[4].parse().map_err(|_| bad("bad weight"))?;
                max_state = max_state.max(src as u64).max(dst as u64);
                arcs.push((src, Arc::new(il, ol, wt, dst)));
            }
            2 => {
                let q: StateId = fields[0].parse().map_err(|_| bad("bad final state"))?;
                let wt: f64 = fields[1].parse().map_err(|_| bad("bad final weight"))?;
                max_state = max_state.max(q as u64);
                finals.push((q, wt));
            }
            _ => return Err(bad("expected 5 fields (arc) or 2 fields (final)")),
        }
    }

    let needed = declared_states.unwrap_or((max_state + 1) as usize);
    fst.add_states(needed.max((max_state + 1) as usize));
    if let Some(s) = start {
        fst.set_start(s)?;
    }
    for (src, arc) in arcs {
        fst.add_arc(src, arc)?;
    }
    for (q, w) in finals {
        fst.set_final(q, w)?;
    }
    Ok(fst)
}

/// Write the binary form.
pub fn write_binary<W: Write>(fst: &Wfst, mut w: W) -> Result<()> {
    let start = fst
        .start()
        .ok_or_else(|| FstError::InvalidArgument("cannot serialize an FST without a start state".into()))?;
    w.write_all(MAGIC)?;
    w.write_all(&(fst.num_states() as u32).to_le_bytes())?;
    w.write_all(&start.to_le_bytes())?;
    let finals: Vec<(StateId, TropicalWeight)> = fst.finals().collect();
    w.write_all(&(finals.len() as u32).to_le_bytes())?;
    for (q, weight) in finals {
        w.write_all(&q.to_le_bytes())?;
        w.write_all(&(weight.value() as f32).to_le_bytes())?;
    }
    w.write_all(&(fst.num_arcs() as u32).to_le_bytes())?;
    for q in fst.states() {
        for arc in fst.arcs(q) {
            w.write_all(&q.to_le_bytes())?;
            w.write_all(&arc.ilabel.to_le_bytes())?;
            w.write_all(&arc.olabel.to_le_bytes())?;
            w.write_all(&(arc.weight.value() as f32).to_le_bytes())?;
            w.write_all(&arc.nextstate.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read the binary form.
pub fn read_binary<R: Read>(mut r: R) -> Result<Wfst> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(FstError::Format(format!(
            "bad magic {:?}, expected {:?}",
            magic, MAGIC
        )));
    }
    let num_states = read_u32(&mut r)? as usize;
    let start = read_u32(&mut r)?;
    let mut fst = Wfst::new();
    fst.add_states(num_states);
    if start as usize >= num_states {
        return Err(FstError::Format(format!(
            "start state {start} out of range ({num_states} states)"
        )));
    }
    fst.set_start(start)?;
    let num_finals = read_u32(&mut r)? as usize;
    for _ in 0..num_finals {
        let q = read_u32(&mut r)?;
        let w = read_f32(&mut r)?;
        fst.set_final(q, w as f64)
            .map_err(|e| FstError::Format(format!("bad final entry: {e}")))?;
    }
    let num_arcs = read_u32(&mut r)? as usize;
    for _ in 0..num_arcs {
        let src = read_u32(&mut r)?;
        let il = read_u32(&mut r)?;
        let ol = read_u32(&mut r)?;
        let w = read_f32(&mut r)?;
        let dst = read_u32(&mut r)?;
        fst.add_arc(src, Arc::new(il, ol, w as f64, dst))
            .map_err(|e| FstError::Format(format!("bad arc entry: {e}")))?;
    }
    Ok(fst)
}

pub fn write_binary_file(fst: &Wfst, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_binary(fst, std::io::BufWriter::new(file))
}

pub fn read_binary_file(path: &Path) -> Result<Wfst> {
    let file = std::fs::File::open(path)?;
    read_binary(std::io::BufReader::new(file))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f32<R: Read>(r: &mut R) -> Result<f32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(f32::from_le_bytes(buf))
}
