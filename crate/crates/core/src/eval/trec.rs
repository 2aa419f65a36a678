//! Plain-text run, qrels, frequency and query files.
//!
//! * run: `qid Q0 docid rank score tag`
//! * qrels: `qid 0 docid rel` (rel > 0 is relevant)
//! * frequencies: `qid count`
//! * queries: `qid<TAB>query text`

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::metrics::{Qrels, RunList};

#[derive(Debug, Error)]
pub enum TrecError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn malformed(line: usize, message: impl Into<String>) -> TrecError {
    TrecError::Malformed { line, message: message.into() }
}

fn for_each_line<R: BufRead>(
    reader: R,
    mut f: impl FnMut(usize, &str) -> Result<(), TrecError>,
) -> Result<(), TrecError> {
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        f(i + 1, text)?;
    }
    Ok(())
}

/// Reads a run. Entries are ordered by their rank column; equal ranks keep
/// file order.
pub fn read_run<R: BufRead>(reader: R) -> Result<RunList, TrecError> {
    let mut entries: BTreeMap<String, Vec<(u64, usize, String, f64)>> = BTreeMap::new();
    let mut n = 0usize;
    for_each_line(reader, |line, text| {
        let cols: Vec<&str> = text.split_whitespace().collect();
        if cols.len() != 6 {
            return Err(malformed(line, format!("expected 6 columns, found {}", cols.len())));
        }
        let rank: u64 = cols[3].parse().map_err(|_| malformed(line, format!("bad rank {:?}", cols[3])))?;
        let score: f64 = cols[4].parse().map_err(|_| malformed(line, format!("bad score {:?}", cols[4])))?;
        entries.entry(cols[0].to_string()).or_default().push((rank, n, cols[2].to_string(), score));
        n += 1;
        Ok(())
    })?;
    let mut run = RunList::new();
    for (qid, mut list) in entries {
        list.sort_by_key(|e| (e.0, e.1));
        run.insert(qid, list.into_iter().map(|(_, _, d, s)| (d, s)));
    }
    Ok(run)
}

pub fn write_run<W: Write>(run: &RunList, tag: &str, out: &mut W) -> io::Result<()> {
    for (qid, ranking) in run.iter() {
        for (i, (doc, score)) in ranking.iter().enumerate() {
            writeln!(out, "{qid} Q0 {doc} {} {score} {tag}", i + 1)?;
        }
    }
    Ok(())
}

pub fn read_qrels<R: BufRead>(reader: R) -> Result<Qrels, TrecError> {
    let mut qrels = Qrels::new();
    for_each_line(reader, |line, text| {
        let cols: Vec<&str> = text.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(malformed(line, format!("expected 4 columns, found {}", cols.len())));
        }
        let rel: i64 = cols[3].parse().map_err(|_| malformed(line, format!("bad relevance {:?}", cols[3])))?;
        if rel > 0 {
            qrels.insert(cols[0], cols[2]);
        }
        Ok(())
    })?;
    Ok(qrels)
}

pub fn write_qrels<W: Write>(qrels: &Qrels, out: &mut W) -> io::Result<()> {
    for (qid, rel) in qrels.iter() {
        for doc in rel {
            writeln!(out, "{qid} 0 {doc} 1")?;
        }
    }
    Ok(())
}

pub fn read_frequencies<R: BufRead>(reader: R) -> Result<BTreeMap<String, u64>, TrecError> {
    let mut freq = BTreeMap::new();
    for_each_line(reader, |line, text| {
        let cols: Vec<&str> = text.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(malformed(line, format!("expected 2 columns, found {}", cols.len())));
        }
        let count: u64 = cols[1].parse().map_err(|_| malformed(line, format!("bad count {:?}", cols[1])))?;
        freq.insert(cols[0].to_string(), count);
        Ok(())
    })?;
    Ok(freq)
}

pub fn write_frequencies<W: Write>(freq: &BTreeMap<String, u64>, out: &mut W) -> io::Result<()> {
    for (qid, count) in freq {
        writeln!(out, "{qid} {count}")?;
    }
    Ok(())
}

/// Reads `qid<TAB>text` lines, keeping file order.
pub fn read_queries<R: BufRead>(reader: R) -> Result<Vec<(String, String)>, TrecError> {
    let mut queries = Vec::new();
    for_each_line(reader, |line, text| {
        let (qid, q) = text
            .split_once('\t')
            .ok_or_else(|| malformed(line, "expected qid<TAB>query"))?;
        queries.push((qid.trim().to_string(), q.trim().to_string()));
        Ok(())
    })?;
    Ok(queries)
}

pub fn write_queries<W: Write>(queries: &[(String, String)], out: &mut W) -> io::Result<()> {
    for (qid, q) in queries {
        writeln!(out, "{qid}\t{q}")?;
    }
    Ok(())
}
