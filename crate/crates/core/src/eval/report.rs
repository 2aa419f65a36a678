use std::fmt;

use super::bins::{Bin, FrequencyBinAssignment};
use super::metrics::{map_at_k, recall_at_k, Qrels, RunList};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub recall_100: f64,
    pub recall_1000: f64,
    pub map_100: f64,
    pub map_1000: f64,
    /// recall@1000 per popularity bin; `None` when no judged query falls in
    /// the bin.
    pub binned_recall_1000: [(Bin, Option<f64>); 3],
}

impl ReportRow {
    pub fn bin_recall(&self, bin: Bin) -> Option<f64> {
        self.binned_recall_1000.iter().find(|(b, _)| *b == bin).and_then(|(_, r)| *r)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn row(&self, name: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// `run.metric=value` lines, one per cell.
    pub fn key_values(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            for (m, v) in [
                ("recall@100", r.recall_100),
                ("recall@1000", r.recall_1000),
                ("map@100", r.map_100),
                ("map@1000", r.map_1000),
            ] {
                out.push_str(&format!("{}.{m}={v:.6}\n", r.name));
            }
            for (b, v) in &r.binned_recall_1000 {
                match v {
                    Some(v) => out.push_str(&format!("{}.recall@1000.{b}={v:.6}\n", r.name)),
                    None => out.push_str(&format!("{}.recall@1000.{b}=nan\n", r.name)),
                }
            }
        }
        out
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(3).max(3);
        writeln!(
            f,
            "{:<width$}  {:>7} {:>7} {:>7} {:>7} | {:>7} {:>7} {:>7}",
            "run", "r@100", "r@1000", "M@100", "M@1000", "tail", "torso", "head"
        )?;
        writeln!(f, "{}", "-".repeat(width + 2 + 8 * 4 + 2 + 8 * 3 - 1))?;
        let cell = |v: Option<f64>| v.map_or_else(|| format!("{:>7}", "-"), |v| format!("{v:>7.3}"));
        for r in &self.rows {
            writeln!(
                f,
                "{:<width$}  {:>7.3} {:>7.3} {:>7.3} {:>7.3} | {} {} {}",
                r.name,
                r.recall_100,
                r.recall_1000,
                r.map_100,
                r.map_1000,
                cell(r.bin_recall(Bin::Tail)),
                cell(r.bin_recall(Bin::Torso)),
                cell(r.bin_recall(Bin::Head)),
            )?;
        }
        Ok(())
    }
}

/// Overall recall and MAP at 100 and 1000 for each run, plus recall@1000
/// stratified by popularity bin. Rows keep the input order.
pub fn evaluate(runs: &[(&str, &RunList)], qrels: &Qrels, bins: Option<&FrequencyBinAssignment>) -> Report {
    let strata: Vec<(Bin, Qrels)> = Bin::ALL
        .iter()
        .map(|&b| (b, bins.map_or_else(Qrels::new, |a| qrels.restrict(|q| a.bin(q) == Some(b)))))
        .collect();
    let rows = runs
        .iter()
        .map(|(name, run)| {
            let per_bin = |i: usize| {
                let (b, q) = &strata[i];
                (*b, (!q.is_empty()).then(|| recall_at_k(run, q, 1000)))
            };
            ReportRow {
                name: name.to_string(),
                recall_100: recall_at_k(run, qrels, 100),
                recall_1000: recall_at_k(run, qrels, 1000),
                map_100: map_at_k(run, qrels, 100),
                map_1000: map_at_k(run, qrels, 1000),
                binned_recall_1000: [per_bin(0), per_bin(1), per_bin(2)],
            }
        })
        .collect();
    Report { rows }
}
