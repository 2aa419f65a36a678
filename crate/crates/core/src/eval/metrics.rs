use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_traits::ToPrimitive;

use crate::ranking::RankedResult;

/// Relevant listings per evaluation query instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judged: BTreeMap<String, BTreeSet<String>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, qid: impl Into<String>, listing: impl Into<String>) {
        self.judged.entry(qid.into()).or_default().insert(listing.into());
    }

    pub fn relevant(&self, qid: &str) -> Option<&BTreeSet<String>> {
        self.judged.get(qid)
    }

    pub fn len(&self) -> usize {
        self.judged.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judged.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<String>)> {
        self.judged.iter().map(|(q, r)| (q.as_str(), r))
    }

    /// The judgments of queries accepted by `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&str) -> bool) -> Qrels {
        Qrels {
            judged: self
                .judged
                .iter()
                .filter(|(q, _)| keep(q))
                .map(|(q, r)| (q.clone(), r.clone()))
                .collect(),
        }
    }
}

/// Ranked listings per query instance. Rankings hold no duplicate listings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunList {
    rankings: BTreeMap<String, Vec<(String, f64)>>,
}

impl RunList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the ranking for `qid`; later repeats of a listing are discarded.
    pub fn insert(&mut self, qid: impl Into<String>, ranking: impl IntoIterator<Item = (String, f64)>) {
        let mut seen = HashSet::new();
        let list = ranking.into_iter().filter(|(d, _)| seen.insert(d.clone())).collect();
        self.rankings.insert(qid.into(), list);
    }

    pub fn insert_result<S: ToPrimitive + Copy>(&mut self, qid: impl Into<String>, result: &RankedResult<S>) {
        self.insert(qid, result.scored());
    }

    pub fn ranking(&self, qid: &str) -> Option<&[(String, f64)]> {
        self.rankings.get(qid).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[(String, f64)])> {
        self.rankings.iter().map(|(q, r)| (q.as_str(), r.as_slice()))
    }
}

/// `|relevant ∩ top k| / |relevant|` for one ranking.
pub fn recall(ranking: &[(String, f64)], relevant: &BTreeSet<String>, k: usize) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    let hits = ranking.iter().take(k).filter(|(d, _)| relevant.contains(d)).count();
    hits as f64 / relevant.len() as f64
}

/// Denominator of truncated average precision.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ApNormalization {
    /// `|relevant|`, whatever the cutoff.
    #[default]
    Relevant,
    /// `min(|relevant|, k)`, so a perfect top-k always scores 1.
    Cutoff,
}

/// Average precision truncated at `k`, normalized by the full number of
/// relevant listings.
pub fn average_precision(ranking: &[(String, f64)], relevant: &BTreeSet<String>, k: usize) -> f64 {
    average_precision_with(ranking, relevant, k, ApNormalization::Relevant)
}

pub fn average_precision_with(
    ranking: &[(String, f64)],
    relevant: &BTreeSet<String>,
    k: usize,
    norm: ApNormalization,
) -> f64 {
    if relevant.is_empty() || k == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, (d, _)) in ranking.iter().take(k).enumerate() {
        if relevant.contains(d) {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    let denom = match norm {
        ApNormalization::Relevant => relevant.len(),
        ApNormalization::Cutoff => relevant.len().min(k),
    };
    sum / denom as f64
}

fn mean_over_qrels(run: &RunList, qrels: &Qrels, metric: impl Fn(&[(String, f64)], &BTreeSet<String>) -> f64) -> f64 {
    let unjudged = run.iter().filter(|(q, _)| qrels.relevant(q).is_none()).count();
    if unjudged > 0 {
        log::warn!("{unjudged} run quer(ies) have no judgments and are ignored");
    }
    if qrels.is_empty() {
        return 0.0;
    }
    let total: f64 = qrels
        .iter()
        .map(|(q, rel)| run.ranking(q).map_or(0.0, |r| metric(r, rel)))
        .sum();
    total / qrels.len() as f64
}

/// Mean recall@k over every judged query; queries missing from the run
/// score 0.
pub fn recall_at_k(run: &RunList, qrels: &Qrels, k: usize) -> f64 {
    mean_over_qrels(run, qrels, |r, rel| recall(r, rel, k))
}

pub fn map_at_k(run: &RunList, qrels: &Qrels, k: usize) -> f64 {
    map_at_k_with(run, qrels, k, ApNormalization::Relevant)
}

pub fn map_at_k_with(run: &RunList, qrels: &Qrels, k: usize, norm: ApNormalization) -> f64 {
    mean_over_qrels(run, qrels, |r, rel| average_precision_with(r, rel, k, norm))
}
