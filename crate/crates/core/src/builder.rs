//! Interaction log to CSR graph.
//!
//! The pipeline is: normalize queries, collate events per (query, listing),
//! weight each pair linearly by interaction type, optionally attach shop and
//! tag nodes to listings with unit weight, then sort each node's arcs by
//! weight and pack them with per-node cumulative probabilities.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::{CsrGraph, GraphError, NodeId, NodeKind};
use crate::log::{Interaction, InteractionRecord};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("no query/listing pairs with positive weight")]
    Empty,
    #[error("weight coefficients must be finite, non-negative and not all zero")]
    BadCoefficients,
    #[error("packed graph is inconsistent: {0}")]
    Inconsistent(#[from] GraphError),
}

/// Canonical form of a query string: surrounding whitespace trimmed, internal
/// whitespace runs collapsed to one space, lowercased.
pub fn normalize_query(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, word) in text.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CollatedPair {
    pub query: String,
    pub listing_id: String,
    pub clicks: u64,
    pub carts: u64,
    pub purchases: u64,
}

impl CollatedPair {
    pub fn events(&self) -> u64 {
        self.clicks + self.carts + self.purchases
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ListingMeta {
    pub shop_id: String,
    pub tags: Vec<String>,
    pub title: Option<String>,
}

/// Collated log: one entry per unique (normalized query, listing) plus the
/// last-seen metadata of each listing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Collated {
    pub pairs: Vec<CollatedPair>,
    pub listings: BTreeMap<String, ListingMeta>,
}

impl Collated {
    /// Listing titles, for indexing by the lexical retriever.
    pub fn titles(&self) -> impl Iterator<Item = (&str, &str)> {
        self.listings
            .iter()
            .filter_map(|(id, m)| m.title.as_deref().map(|t| (id.as_str(), t)))
    }

    /// Number of logged events per normalized query.
    pub fn query_frequencies(&self) -> BTreeMap<String, u64> {
        let mut freq = BTreeMap::new();
        for p in &self.pairs {
            *freq.entry(p.query.clone()).or_insert(0) += p.events();
        }
        freq
    }
}

pub fn collate<I>(records: I) -> Collated
where
    I: IntoIterator,
    I::Item: Borrow<InteractionRecord>,
{
    let mut counts: BTreeMap<(String, String), [u64; 3]> = BTreeMap::new();
    let mut listings: BTreeMap<String, ListingMeta> = BTreeMap::new();
    for record in records {
        let r = record.borrow();
        let slot = match r.interaction {
            Interaction::Click => 0,
            Interaction::Cart => 1,
            Interaction::Purchase => 2,
        };
        counts
            .entry((normalize_query(&r.query), r.listing_id.clone()))
            .or_default()[slot] += 1;
        let meta = listings.entry(r.listing_id.clone()).or_default();
        meta.shop_id.clone_from(&r.shop_id);
        meta.tags.clone_from(&r.tags);
        if r.title.is_some() {
            meta.title.clone_from(&r.title);
        }
    }
    let pairs = counts
        .into_iter()
        .map(|((query, listing_id), [clicks, carts, purchases])| CollatedPair {
            query,
            listing_id,
            clicks,
            carts,
            purchases,
        })
        .collect();
    Collated { pairs, listings }
}

/// Per-interaction-type weights for the linear edge weighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightCoefficients<F> {
    pub click: F,
    pub cart: F,
    pub purchase: F,
}

impl<F: Scalar> WeightCoefficients<F> {
    pub fn new(click: F, cart: F, purchase: F) -> Result<Self, BuildError> {
        let all = [click, cart, purchase];
        if all.iter().any(|c| !c.is_finite() || *c < F::zero()) || all.iter().all(|c| c.is_zero()) {
            return Err(BuildError::BadCoefficients);
        }
        Ok(WeightCoefficients { click, cart, purchase })
    }

    /// Whether click < cart < purchase, the ordering that favors converting
    /// listings.
    pub fn is_increasing(&self) -> bool {
        self.click < self.cart && self.cart < self.purchase
    }
}

impl<F: Scalar> Default for WeightCoefficients<F> {
    fn default() -> Self {
        WeightCoefficients { click: F::one(), cart: F::of(3.0), purchase: F::of(10.0) }
    }
}

pub fn edge_weight<F: Scalar>(pair: &CollatedPair, coeffs: &WeightCoefficients<F>) -> F {
    let n = |c: u64| F::of(c as f64);
    coeffs.click * n(pair.clicks) + coeffs.cart * n(pair.carts) + coeffs.purchase * n(pair.purchases)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions<F> {
    pub coefficients: WeightCoefficients<F>,
    /// Attach shop and tag nodes to listings.
    pub extend: bool,
}

impl<F: Scalar> Default for BuildOptions<F> {
    fn default() -> Self {
        BuildOptions { coefficients: WeightCoefficients::default(), extend: true }
    }
}

/// Builds the CSR graph. Node ids are assigned kind by kind (queries,
/// listings, shops, tags), each in ascending key order, so the result does not
/// depend on pair order.
pub fn build_graph<F: Scalar>(collated: &Collated, options: &BuildOptions<F>) -> Result<CsrGraph<F>, BuildError> {
    let coeffs = &options.coefficients;
    if !coeffs.is_increasing() {
        log::warn!(
            "weight coefficients ({}, {}, {}) are not strictly increasing click < cart < purchase",
            coeffs.click,
            coeffs.cart,
            coeffs.purchase
        );
    }

    let mut weighted: BTreeMap<(&str, &str), F> = BTreeMap::new();
    let mut dropped = 0usize;
    for pair in &collated.pairs {
        let w = edge_weight(pair, coeffs);
        if !(w > F::zero()) || !w.is_finite() {
            dropped += 1;
            continue;
        }
        *weighted.entry((pair.query.as_str(), pair.listing_id.as_str())).or_insert_with(F::zero) += w;
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} pair(s) with zero weight");
    }
    if weighted.is_empty() {
        return Err(BuildError::Empty);
    }

    let queries: BTreeSet<&str> = weighted.keys().map(|(q, _)| *q).collect();
    let listings: BTreeSet<&str> = weighted.keys().map(|(_, l)| *l).collect();
    let mut shops: BTreeSet<&str> = BTreeSet::new();
    let mut tags: BTreeSet<&str> = BTreeSet::new();
    if options.extend {
        for l in &listings {
            if let Some(meta) = collated.listings.get(*l) {
                let shop = meta.shop_id.trim();
                if !shop.is_empty() {
                    shops.insert(shop);
                }
                tags.extend(meta.tags.iter().map(|t| t.trim()).filter(|t| !t.is_empty()));
            }
        }
    }

    let mut nodes: Vec<(NodeKind, String)> = Vec::new();
    let mut ids: [BTreeMap<&str, u32>; 4] = Default::default();
    for (kind, keys) in [
        (NodeKind::Query, &queries),
        (NodeKind::Listing, &listings),
        (NodeKind::Shop, &shops),
        (NodeKind::Tag, &tags),
    ] {
        for &k in keys {
            ids[kind.tag() as usize].insert(k, nodes.len() as u32);
            nodes.push((kind, k.to_string()));
        }
    }
    let id_of = |kind: NodeKind, key: &str| ids[kind.tag() as usize][key];

    let mut edges: Vec<(u32, u32, F)> = weighted
        .iter()
        .map(|(&(q, l), &w)| (id_of(NodeKind::Query, q), id_of(NodeKind::Listing, l), w))
        .collect();
    if options.extend {
        for &l in &listings {
            let Some(meta) = collated.listings.get(l) else { continue };
            let lid = id_of(NodeKind::Listing, l);
            let shop = meta.shop_id.trim();
            if !shop.is_empty() {
                edges.push((id_of(NodeKind::Shop, shop), lid, F::one()));
            }
            let unique: BTreeSet<&str> = meta.tags.iter().map(|t| t.trim()).filter(|t| !t.is_empty()).collect();
            for t in unique {
                edges.push((id_of(NodeKind::Tag, t), lid, F::one()));
            }
        }
    }

    Ok(pack(nodes, &edges)?)
}

/// Convenience wrapper: collate then build.
pub fn build_from_records<F, I>(records: I, options: &BuildOptions<F>) -> Result<CsrGraph<F>, BuildError>
where
    F: Scalar,
    I: IntoIterator,
    I::Item: Borrow<InteractionRecord>,
{
    build_graph(&collate(records), options)
}

/// Packs undirected weighted edges into CSR arrays with per-node CDFs.
fn pack<F: Scalar>(nodes: Vec<(NodeKind, String)>, edges: &[(u32, u32, F)]) -> Result<CsrGraph<F>, GraphError> {
    let n = nodes.len();
    let mut offsets = vec![0usize; n + 1];
    for &(a, b, _) in edges {
        offsets[a as usize + 1] += 1;
        offsets[b as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let arcs = offsets[n];
    let mut fill = offsets.clone();
    let mut slots: Vec<(u32, F)> = vec![(0, F::zero()); arcs];
    for &(a, b, w) in edges {
        slots[fill[a as usize]] = (b, w);
        fill[a as usize] += 1;
        slots[fill[b as usize]] = (a, w);
        fill[b as usize] += 1;
    }

    let mut targets = Vec::with_capacity(arcs);
    let mut cdf = Vec::with_capacity(arcs);
    for i in 0..n {
        let slice = &mut slots[offsets[i]..offsets[i + 1]];
        slice.sort_unstable_by(|x, y| y.1.partial_cmp(&x.1).expect("finite weights").then(x.0.cmp(&y.0)));
        let total: F = slice.iter().map(|s| s.1).sum();
        let mut running = F::zero();
        for (k, &(t, w)) in slice.iter().enumerate() {
            running += w;
            targets.push(NodeId(t));
            // The last entry is pinned to exactly one.
            cdf.push(if k + 1 == slice.len() { F::one() } else { running / total });
        }
    }
    CsrGraph::from_parts(nodes, offsets, targets, cdf)
}
