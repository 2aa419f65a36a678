//! Breadth-first k-hop walks and query-time retrieval.
//!
//! A walk level is a counter over nodes. Level one holds the `walks` arcs
//! drawn from the start node; each later level draws, for every node in the
//! previous level, as many arcs as that node was visited. Mass is conserved
//! from level to level, and with an odd hop count the final level lies
//! entirely on the listing side.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::builder::normalize_query;
use crate::graph::{CsrGraph, NodeId, NodeKind};
use crate::ranking::{Hit, RankedResult};
use crate::sampler::{sample_edges, ProbeStats, SampleError, SamplerConfig};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("cold start: query not in graph: {0:?}")]
    NoSuchQuery(String),
    #[error("hop count must be odd and at least 1, got {0}")]
    BadHops(u32),
    #[error("walk count must be at least 1")]
    ZeroWalks,
    #[error("top_k must be at least 1")]
    ZeroTopK,
    #[error(transparent)]
    Sample(#[from] SampleError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams<F> {
    pub walks: u64,
    /// Total hops; odd so walks end on listings.
    pub hops: u32,
    pub top_k: usize,
    pub sampler: SamplerConfig<F>,
}

impl<F: Scalar> Default for WalkParams<F> {
    fn default() -> Self {
        WalkParams { walks: 1000, hops: 3, top_k: 1000, sampler: SamplerConfig::default() }
    }
}

impl<F: Scalar> WalkParams<F> {
    pub fn validate(&self) -> Result<(), WalkError> {
        if self.hops == 0 || self.hops.is_multiple_of(2) {
            return Err(WalkError::BadHops(self.hops));
        }
        if self.walks == 0 {
            return Err(WalkError::ZeroWalks);
        }
        if self.top_k == 0 {
            return Err(WalkError::ZeroTopK);
        }
        self.sampler.validate()?;
        Ok(())
    }
}

/// Visit counts per node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WalkCounter {
    counts: BTreeMap<NodeId, u64>,
}

impl WalkCounter {
    pub fn add(&mut self, node: NodeId, count: u64) {
        if count > 0 {
            *self.counts.entry(node).or_insert(0) += count;
        }
    }

    pub fn merge(&mut self, other: &WalkCounter) {
        for (&n, &c) in &other.counts {
            self.add(n, c);
        }
    }

    pub fn get(&self, node: NodeId) -> u64 {
        self.counts.get(&node).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `(node, count)` in ascending node id order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, u64)> + '_ {
        self.counts.iter().map(|(&n, &c)| (n, c))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WalkStats {
    pub probes: ProbeStats,
    /// Walk mass lost at degree-0 nodes met mid-walk.
    pub dropped_mass: u64,
}

/// Runs `remaining + 1` levels of breadth-first sampling from `start`. The
/// first draw at `start` is credited `multiplier`.
#[allow(clippy::too_many_arguments)]
pub fn xwalk_bfs<F: Scalar, R: Rng + ?Sized>(
    graph: &CsrGraph<F>,
    start: NodeId,
    walks: u64,
    remaining: u32,
    config: &SamplerConfig<F>,
    rng: &mut R,
    multiplier: u64,
    stats: &mut WalkStats,
) -> Result<WalkCounter, WalkError> {
    let mut level = WalkCounter::default();
    let first = sample_edges(graph, start, walks, config, rng, multiplier, &mut stats.probes)?;
    let arcs = graph.neighbors(start);
    for (i, c) in first.iter() {
        level.add(arcs[i], c);
    }
    for _ in 0..remaining {
        let mut next = WalkCounter::default();
        for (node, count) in level.iter() {
            match sample_edges(graph, node, count, config, rng, 1, &mut stats.probes) {
                Ok(edges) => {
                    let arcs = graph.neighbors(node);
                    for (i, c) in edges.iter() {
                        next.add(arcs[i], c);
                    }
                }
                Err(SampleError::DeadEnd(n)) => {
                    log::warn!("dropping {count} walk(s) stuck at degree-0 node {n}");
                    stats.dropped_mass += count;
                }
                Err(e) => return Err(e.into()),
            }
        }
        level = next;
    }
    Ok(level)
}

/// Walks from the query's node and ranks the listings reached, by visit
/// count descending and then listing key ascending.
pub fn retrieve<F: Scalar, R: Rng + ?Sized>(
    graph: &CsrGraph<F>,
    query_text: &str,
    params: &WalkParams<F>,
    rng: &mut R,
) -> Result<RankedResult<u64>, WalkError> {
    retrieve_with_stats(graph, query_text, params, rng).map(|(r, _)| r)
}

pub fn retrieve_with_stats<F: Scalar, R: Rng + ?Sized>(
    graph: &CsrGraph<F>,
    query_text: &str,
    params: &WalkParams<F>,
    rng: &mut R,
) -> Result<(RankedResult<u64>, WalkStats), WalkError> {
    params.validate()?;
    let query = normalize_query(query_text);
    let start = graph
        .lookup_node(NodeKind::Query, &query)
        .ok_or_else(|| WalkError::NoSuchQuery(query.clone()))?;
    let mut stats = WalkStats::default();
    let counter = xwalk_bfs(graph, start, params.walks, params.hops - 1, &params.sampler, rng, 1, &mut stats)?;

    let mut ranked: Vec<(&str, u64)> = counter
        .iter()
        .filter(|&(n, _)| graph.kind(n) == NodeKind::Listing)
        .map(|(n, c)| (graph.key(n), c))
        .collect();
    debug_assert_eq!(ranked.len(), counter.len(), "odd-hop walk ended off the listing side");
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(params.top_k);
    let hits = ranked.into_iter().map(|(k, c)| Hit { listing: k.to_string(), score: c }).collect();
    Ok((RankedResult { query, hits }, stats))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Seed for one query: the base seed mixed with a stable hash of the
/// normalized query text, so a query's result does not depend on where it
/// sits in a batch.
pub fn query_seed(base_seed: u64, query_text: &str) -> u64 {
    splitmix64(base_seed.wrapping_add(fnv1a64(normalize_query(query_text).as_bytes())))
}

/// Random generator used for a query under `base_seed`.
pub fn query_rng(base_seed: u64, query_text: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(query_seed(base_seed, query_text))
}

/// Retrieves every query in parallel. Output order matches input order and
/// per-query failures do not stop the batch.
pub fn batch_retrieve<F: Scalar, Q: AsRef<str> + Sync>(
    graph: &CsrGraph<F>,
    queries: &[Q],
    params: &WalkParams<F>,
    base_seed: u64,
) -> Vec<Result<RankedResult<u64>, WalkError>> {
    queries
        .par_iter()
        .map(|q| {
            let q = q.as_ref();
            retrieve(graph, q, params, &mut query_rng(base_seed, q))
        })
        .collect()
}
