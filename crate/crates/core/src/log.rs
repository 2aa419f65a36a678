//! Newline-delimited JSON interaction logs.
//!
//! One object per line:
//!
//! ```text
//! {"query":"wedding dress","listing_id":"l12","interaction":"click","shop_id":"s00","tags":["white","gown"],"title":"beautiful bridal wedding gown"}
//! ```

use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    Click,
    Cart,
    Purchase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub query: String,
    pub listing_id: String,
    pub interaction: Interaction,
    pub shop_id: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
}

impl InteractionRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

#[derive(Debug, Error)]
#[error("line {line}: {message}")]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("{malformed} of {lines} lines are malformed (first: {first})")]
    TooManyMalformed { malformed: usize, lines: usize, first: LineError },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Streams records from a log. Blank lines are skipped; each malformed line
/// yields a [`LineError`] and the stream continues.
pub struct LogRecords<R> {
    reader: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> LogRecords<R> {
    pub fn new(reader: R) -> Self {
        LogRecords { reader, line: 0, buf: String::new() }
    }
}

impl<R: BufRead> Iterator for LogRecords<R> {
    type Item = io::Result<Result<InteractionRecord, LineError>>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e)),
            }
            self.line += 1;
            let text = self.buf.trim();
            if text.is_empty() {
                continue;
            }
            return Some(Ok(parse_line(text, self.line)));
        }
    }
}

pub fn parse_line(text: &str, line: usize) -> Result<InteractionRecord, LineError> {
    let record: InteractionRecord =
        serde_json::from_str(text).map_err(|e| LineError { line, message: e.to_string() })?;
    if record.query.trim().is_empty() {
        return Err(LineError { line, message: "empty query".into() });
    }
    if record.listing_id.trim().is_empty() {
        return Err(LineError { line, message: "empty listing_id".into() });
    }
    Ok(record)
}

/// A fully read log and the lines that failed to parse.
#[derive(Debug, Default)]
pub struct ParsedLog {
    pub records: Vec<InteractionRecord>,
    pub errors: Vec<LineError>,
    pub lines: usize,
}

/// Malformed lines tolerated before a log is rejected, as a fraction of
/// non-blank lines.
pub const MAX_MALFORMED_FRACTION: f64 = 0.01;

/// Reads a whole log, failing when more than [`MAX_MALFORMED_FRACTION`] of its
/// lines are malformed.
pub fn read_interaction_log<R: BufRead>(reader: R) -> Result<ParsedLog, LogError> {
    let mut parsed = ParsedLog::default();
    for item in LogRecords::new(reader) {
        parsed.lines += 1;
        match item? {
            Ok(r) => parsed.records.push(r),
            Err(e) => {
                log::warn!("skipping malformed log {e}");
                parsed.errors.push(e);
            }
        }
    }
    if parsed.errors.len() as f64 > MAX_MALFORMED_FRACTION * parsed.lines as f64 {
        let malformed = parsed.errors.len();
        let first = parsed.errors.swap_remove(0);
        return Err(LogError::TooManyMalformed { malformed, lines: parsed.lines, first });
    }
    Ok(parsed)
}
