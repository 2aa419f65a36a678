//! Weighted edge sampling from a node's CDF slice.
//!
//! Two strategies are available. Inverse transform sampling draws a uniform
//! variate and binary-searches the CDF, costing `O(log d)` per draw.
//! The Metropolis-Hastings chain starts from one inverse-transform draw and
//! then moves by proposals on the normalized index position, costing `O(1)`
//! per further draw.

use std::collections::BTreeMap;
use std::ops::AddAssign;

use rand::Rng;
use thiserror::Error;

use crate::graph::{probability_at, CsrGraph, NodeId};
use crate::scalar::Scalar;

/// Proposal variance on the normalized `[0, 1)` index scale.
pub const DEFAULT_PROPOSAL_VARIANCE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplerMode {
    /// One inverse-transform draw, then a Metropolis-Hastings chain.
    #[default]
    Mh,
    /// Independent inverse-transform draws only.
    Its,
}

impl std::str::FromStr for SamplerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mh" => Ok(SamplerMode::Mh),
            "its" => Ok(SamplerMode::Its),
            other => Err(format!("unknown sampler {other:?}, expected mh or its")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig<F> {
    pub proposal_variance: F,
    pub mode: SamplerMode,
    pub seed: u64,
}

impl<F: Scalar> Default for SamplerConfig<F> {
    fn default() -> Self {
        SamplerConfig { proposal_variance: F::of(DEFAULT_PROPOSAL_VARIANCE), mode: SamplerMode::Mh, seed: 0 }
    }
}

impl<F: Scalar> SamplerConfig<F> {
    pub fn validate(&self) -> Result<(), SampleError> {
        if !(self.proposal_variance > F::zero()) || !self.proposal_variance.is_finite() {
            return Err(SampleError::BadVariance(self.proposal_variance.as_f64()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("node {0} has no outgoing arcs")]
    DeadEnd(NodeId),
    #[error("node {0} does not exist")]
    NoSuchNode(NodeId),
    #[error("walk count must be at least 1")]
    ZeroWalks,
    #[error("proposal variance must be positive and finite, got {0}")]
    BadVariance(f64),
}

/// Operation counters for the sampling hot path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProbeStats {
    pub binary_search_probes: u64,
    pub mh_steps: u64,
    pub mh_accepts: u64,
}

impl AddAssign for ProbeStats {
    fn add_assign(&mut self, rhs: Self) {
        self.binary_search_probes += rhs.binary_search_probes;
        self.mh_steps += rhs.mh_steps;
        self.mh_accepts += rhs.mh_accepts;
    }
}

/// Visit counts keyed by local arc index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeCounter {
    counts: BTreeMap<usize, u64>,
    total: u64,
}

impl EdgeCounter {
    pub fn add(&mut self, index: usize, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(index).or_insert(0) += count;
        self.total += count;
    }

    pub fn get(&self, index: usize) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `(local index, count)` in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&i, &c)| (i, c))
    }
}

/// Smallest index `i` with `p <= cdf[i]`.
///
/// Only the first `len - 1` entries are searched: the last one is 1, so any
/// `p` that clears every earlier entry lands there. That keeps the probe count
/// at `ceil(log2(len))`.
pub fn its_sample<F: Scalar>(cdf: &[F], p: F, stats: &mut ProbeStats) -> usize {
    debug_assert!(!cdf.is_empty());
    let (mut lo, mut hi) = (0usize, cdf.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        stats.binary_search_probes += 1;
        if cdf[mid] < p {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Inverse transform draw with a fresh uniform variate. Degree-1 slices
/// consume no randomness.
fn its_draw<F: Scalar, R: Rng + ?Sized>(cdf: &[F], rng: &mut R, stats: &mut ProbeStats) -> usize {
    if cdf.len() == 1 {
        return 0;
    }
    its_sample(cdf, F::sample_unit(rng), stats)
}

/// Folds the real line onto `[0, 1)` by reflecting at 0 and at 1.
pub fn fold_unit<F: Scalar>(x: F) -> F {
    let two = F::of(2.0);
    let mut y = x.abs() % two;
    if y > F::one() {
        y = two - y;
    }
    if y >= F::one() {
        // x an odd integer; step just inside the interval
        y = F::one() - F::epsilon();
    }
    y
}

/// Draws a candidate index for the chain: the current index's bin center on
/// `[0, 1)` is perturbed by `Normal(0, std_dev^2)` and folded back.
pub fn mh_propose<F: Scalar, R: Rng + ?Sized>(len: usize, current: usize, std_dev: F, rng: &mut R) -> usize {
    let n = F::of(len as f64);
    let u = (F::of(current as f64) + F::of(0.5)) / n;
    let moved = fold_unit(u + std_dev * F::sample_standard_normal(rng));
    (moved * n).to_usize().unwrap_or(len - 1).min(len - 1)
}

/// One Metropolis-Hastings transition targeting the slice's edge
/// probabilities. Returns the current index on rejection.
pub fn mh_step<F: Scalar, R: Rng + ?Sized>(
    cdf: &[F],
    current: usize,
    config: &SamplerConfig<F>,
    rng: &mut R,
    stats: &mut ProbeStats,
) -> usize {
    debug_assert!(current < cdf.len());
    stats.mh_steps += 1;
    if cdf.len() == 1 {
        stats.mh_accepts += 1;
        return 0;
    }
    let candidate = mh_propose(cdf.len(), current, config.proposal_variance.sqrt(), rng);
    let ratio = probability_at(cdf, candidate) / probability_at(cdf, current);
    if ratio >= F::one() || F::sample_unit(rng) < ratio {
        stats.mh_accepts += 1;
        candidate
    } else {
        current
    }
}

/// Draws `walks` arcs of `node`. The first draw is an inverse-transform sample
/// credited `multiplier`; each later draw is credited 1 and comes from the
/// configured strategy.
pub fn sample_edges<F: Scalar, R: Rng + ?Sized>(
    graph: &CsrGraph<F>,
    node: NodeId,
    walks: u64,
    config: &SamplerConfig<F>,
    rng: &mut R,
    multiplier: u64,
    stats: &mut ProbeStats,
) -> Result<EdgeCounter, SampleError> {
    if node.index() >= graph.node_count() {
        return Err(SampleError::NoSuchNode(node));
    }
    if walks == 0 {
        return Err(SampleError::ZeroWalks);
    }
    let cdf = graph.cdf_slice(node);
    if cdf.is_empty() {
        return Err(SampleError::DeadEnd(node));
    }
    let mut counter = EdgeCounter::default();
    let mut current = its_draw(cdf, rng, stats);
    counter.add(current, multiplier);
    for _ in 1..walks {
        current = match config.mode {
            SamplerMode::Mh => mh_step(cdf, current, config, rng, stats),
            SamplerMode::Its => its_draw(cdf, rng, stats),
        };
        counter.add(current, 1);
    }
    Ok(counter)
}
