//! Reciprocal rank fusion.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::metrics::RunList;

pub const DEFAULT_KAPPA: u32 = 60;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FusionError {
    #[error("nothing to fuse")]
    NoRuns,
    #[error("kappa must be at least 1")]
    ZeroKappa,
}

/// Scores each listing by `Σ 1 / (kappa + rank)` over the runs that rank it,
/// with ranks starting at 1. Input scores are ignored; only positions count.
pub fn rrf_fuse(runs: &[&RunList], kappa: u32) -> Result<RunList, FusionError> {
    if runs.is_empty() {
        return Err(FusionError::NoRuns);
    }
    if kappa == 0 {
        return Err(FusionError::ZeroKappa);
    }
    let kappa = f64::from(kappa);
    let qids: BTreeSet<&str> = runs.iter().flat_map(|r| r.iter().map(|(q, _)| q)).collect();
    let mut fused = RunList::new();
    for qid in qids {
        let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
        for run in runs {
            for (i, (doc, _)) in run.ranking(qid).unwrap_or(&[]).iter().enumerate() {
                *scores.entry(doc.as_str()).or_insert(0.0) += 1.0 / (kappa + (i + 1) as f64);
            }
        }
        let mut ranked: Vec<(&str, f64)> = scores.into_iter().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        fused.insert(qid, ranked.into_iter().map(|(d, s)| (d.to_string(), s)));
    }
    Ok(fused)
}
