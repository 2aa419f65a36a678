//! In-memory Okapi BM25 over listing titles.
//!
//! Scores use the Lucene form of idf, `ln(1 + (N - df + 0.5) / (df + 0.5))`,
//! which is never negative.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::ranking::{Hit, RankedResult};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Bm25Error {
    #[error("cannot index an empty corpus")]
    EmptyCorpus,
    #[error("invalid BM25 parameters k1={k1}, b={b}")]
    BadParams { k1: f64, b: f64 },
}

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params<F> {
    pub k1: F,
    pub b: F,
}

impl<F: Scalar> Default for Bm25Params<F> {
    fn default() -> Self {
        Bm25Params { k1: F::of(1.2), b: F::of(0.75) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone)]
pub struct Bm25Index<F> {
    postings: HashMap<String, Vec<Posting>>,
    doc_lengths: Vec<u32>,
    avg_doc_length: F,
    doc_keys: Vec<String>,
    params: Bm25Params<F>,
}

impl<F: Scalar> Bm25Index<F> {
    /// Indexes `(listing id, title)` pairs. A repeated listing id keeps its
    /// last title. Documents are numbered in ascending id order.
    pub fn build<I, K, T>(docs: I, params: Bm25Params<F>) -> Result<Self, Bm25Error>
    where
        I: IntoIterator<Item = (K, T)>,
        K: Into<String>,
        T: AsRef<str>,
    {
        if !(params.k1 >= F::zero()) || !(params.b >= F::zero() && params.b <= F::one()) {
            return Err(Bm25Error::BadParams { k1: params.k1.as_f64(), b: params.b.as_f64() });
        }
        let corpus: BTreeMap<String, Vec<String>> =
            docs.into_iter().map(|(k, t)| (k.into(), tokenize(t.as_ref()))).collect();
        if corpus.is_empty() {
            return Err(Bm25Error::EmptyCorpus);
        }

        let mut postings: HashMap<String, Vec<Posting>> = HashMap::new();
        let mut doc_lengths = Vec::with_capacity(corpus.len());
        let mut doc_keys = Vec::with_capacity(corpus.len());
        for (doc, (key, tokens)) in corpus.into_iter().enumerate() {
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for t in &tokens {
                *tf.entry(t.clone()).or_insert(0) += 1;
            }
            for (term, count) in tf {
                postings.entry(term).or_default().push(Posting { doc: doc as u32, tf: count });
            }
            doc_lengths.push(tokens.len() as u32);
            doc_keys.push(key);
        }
        let total: u64 = doc_lengths.iter().map(|&l| u64::from(l)).sum();
        if total == 0 {
            log::warn!("all {} titles are empty; every search will come back empty", doc_keys.len());
        }
        let avg_doc_length = F::of(total as f64 / doc_lengths.len() as f64);
        Ok(Bm25Index { postings, doc_lengths, avg_doc_length, doc_keys, params })
    }

    pub fn doc_count(&self) -> usize {
        self.doc_keys.len()
    }

    pub fn avg_doc_length(&self) -> F {
        self.avg_doc_length
    }

    pub fn doc_lengths(&self) -> &[u32] {
        &self.doc_lengths
    }

    pub fn doc_keys(&self) -> &[String] {
        &self.doc_keys
    }

    pub fn params(&self) -> Bm25Params<F> {
        self.params
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    pub fn idf(&self, df: usize) -> F {
        let n = F::of(self.doc_count() as f64);
        let df = F::of(df as f64);
        let half = F::of(0.5);
        (F::one() + (n - df + half) / (df + half)).ln()
    }

    /// Top `k` listings for `query`. Each distinct query term contributes
    /// once; documents scoring zero are omitted and ties go to the smaller
    /// listing id.
    pub fn search(&self, query: &str, k: usize) -> RankedResult<F> {
        let terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        let mut scores: HashMap<u32, F> = HashMap::new();
        let Bm25Params { k1, b } = self.params;
        for term in &terms {
            let list = self.postings(term);
            if list.is_empty() {
                continue;
            }
            let idf = self.idf(list.len());
            for p in list {
                let tf = F::of(f64::from(p.tf));
                let dl = F::of(f64::from(self.doc_lengths[p.doc as usize]));
                let norm = k1 * (F::one() - b + b * dl / self.avg_doc_length);
                *scores.entry(p.doc).or_insert_with(F::zero) += idf * tf * (k1 + F::one()) / (tf + norm);
            }
        }
        let mut ranked: Vec<(u32, F)> = scores.into_iter().filter(|(_, s)| *s > F::zero()).collect();
        ranked.sort_unstable_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| self.doc_keys[a.0 as usize].cmp(&self.doc_keys[b.0 as usize]))
        });
        ranked.truncate(k);
        RankedResult {
            query: query.to_string(),
            hits: ranked
                .into_iter()
                .map(|(d, s)| Hit { listing: self.doc_keys[d as usize].clone(), score: s })
                .collect(),
        }
    }
}
