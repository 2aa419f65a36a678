#![allow(dead_code)]

//! Independent reference implementations and fixtures shared by the
//! integration tests. Nothing here calls into the code under test except to
//! assemble inputs.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use xwalk_core::{CsrGraph, Interaction, InteractionRecord, NodeId, NodeKind};

/// A query node `q` joined to listings `l0000000..` with the given weights,
/// laid out heaviest first. Returns the graph and the exact arc
/// probabilities in arc order.
pub fn star(weights: &[f64]) -> (CsrGraph<f64>, Vec<f64>) {
    let mut w = weights.to_vec();
    w.sort_by(|a, b| b.total_cmp(a));
    let d = w.len();
    let total: f64 = w.iter().sum();
    let mut nodes = Vec::with_capacity(d + 1);
    nodes.push((NodeKind::Query, "q".to_string()));
    nodes.extend((0..d).map(|i| (NodeKind::Listing, format!("l{i:07}"))));
    let mut offsets = Vec::with_capacity(d + 2);
    offsets.push(0);
    offsets.push(d);
    offsets.extend((1..=d).map(|i| d + i));
    let mut targets: Vec<NodeId> = (1..=d as u32).map(NodeId).collect();
    targets.extend(std::iter::repeat_n(NodeId(0), d));
    let mut cdf = Vec::with_capacity(2 * d);
    let mut run = 0.0;
    for x in &w {
        run += x;
        cdf.push(run / total);
    }
    cdf[d - 1] = 1.0;
    cdf.extend(std::iter::repeat_n(1.0, d));
    let g = CsrGraph::from_parts(nodes, offsets, targets, cdf).unwrap();
    (g, w.iter().map(|x| x / total).collect())
}

pub fn total_variation(counts: &[u64], exact: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    0.5 * counts.iter().zip(exact).map(|(&c, &p)| (c as f64 / n as f64 - p).abs()).sum::<f64>()
}

/// A small random log. Each listing keeps one shop and one tag set in every
/// record, so collation order cannot matter. Every record carries an event.
pub fn random_records<R: Rng>(rng: &mut R, max_queries: usize, max_listings: usize) -> Vec<InteractionRecord> {
    let nq = rng.random_range(1..=max_queries);
    let nl = rng.random_range(1..=max_listings);
    let shops = rng.random_range(1..=3);
    let meta: Vec<(String, Vec<String>)> = (0..nl)
        .map(|_| {
            let shop = format!("s{}", rng.random_range(0..shops));
            let mut tags: Vec<String> = (0..rng.random_range(0..=2)).map(|_| format!("t{}", rng.random_range(0..3))).collect();
            tags.sort();
            tags.dedup();
            (shop, tags)
        })
        .collect();
    let mut records = Vec::new();
    for q in 0..nq {
        // every query touches at least one listing
        let mut touched: Vec<usize> = (0..nl).filter(|_| rng.random_bool(0.5)).collect();
        if touched.is_empty() {
            touched.push(rng.random_range(0..nl));
        }
        for l in touched {
            for _ in 0..rng.random_range(1..=4) {
                let interaction = match rng.random_range(0..10) {
                    0 => Interaction::Purchase,
                    1 | 2 => Interaction::Cart,
                    _ => Interaction::Click,
                };
                records.push(InteractionRecord {
                    query: format!("query {q}"),
                    listing_id: format!("l{l}"),
                    interaction,
                    shop_id: meta[l].0.clone(),
                    tags: meta[l].1.clone(),
                    title: None,
                });
            }
        }
    }
    records.shuffle(rng);
    records
}

/// Logs over `max_queries` queries and `max_listings` listings. Query text
/// varies in case and spacing; each listing has a fixed shop and tag set.
pub fn arb_records(
    max_queries: usize,
    max_listings: usize,
    max_events: usize,
) -> impl Strategy<Value = Vec<InteractionRecord>> {
    let meta = proptest::collection::vec((0..3usize, proptest::collection::btree_set(0..4usize, 0..3)), max_listings);
    let events = proptest::collection::vec((0..max_queries, 0..max_listings, 0..3usize, any::<bool>()), 1..max_events);
    (meta, events).prop_map(|(meta, events)| {
        events
            .into_iter()
            .map(|(q, l, i, shout)| InteractionRecord {
                query: if shout { format!("  Query   {q} ") } else { format!("query {q}") },
                listing_id: format!("l{l}"),
                interaction: [Interaction::Click, Interaction::Cart, Interaction::Purchase][i],
                shop_id: format!("s{}", meta[l].0),
                tags: meta[l].1.iter().map(|t| format!("t{t}")).collect(),
                title: None,
            })
            .collect()
    })
}

/// Node identity in the reference walk: `(kind, key)`.
pub type Key = (NodeKind, String);

/// Undirected weighted adjacency rebuilt from raw records with weights
/// `clicks + 3 carts + 10 purchases` and, when `extend`, unit shop and tag
/// edges.
pub fn reference_adjacency(records: &[InteractionRecord], extend: bool) -> BTreeMap<Key, BTreeMap<Key, f64>> {
    let mut adj: BTreeMap<Key, BTreeMap<Key, f64>> = BTreeMap::new();
    let mut link = |a: Key, b: Key, w: f64| {
        *adj.entry(a.clone()).or_default().entry(b.clone()).or_insert(0.0) += w;
        *adj.entry(b).or_default().entry(a).or_insert(0.0) += w;
    };
    let mut meta = BTreeMap::new();
    for r in records {
        let w = match r.interaction {
            Interaction::Click => 1.0,
            Interaction::Cart => 3.0,
            Interaction::Purchase => 10.0,
        };
        let q = r.query.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        link((NodeKind::Query, q), (NodeKind::Listing, r.listing_id.clone()), w);
        meta.insert(r.listing_id.clone(), (r.shop_id.clone(), r.tags.clone()));
    }
    if extend {
        for (l, (shop, tags)) in meta {
            link((NodeKind::Listing, l.clone()), (NodeKind::Shop, shop), 1.0);
            let tags: BTreeSet<String> = tags.into_iter().collect();
            for t in tags {
                link((NodeKind::Listing, l.clone()), (NodeKind::Tag, t), 1.0);
            }
        }
    }
    adj
}

/// Exact probability of ending on each node after `hops` weighted random
/// steps from `start`.
pub fn exact_walk_mass(adj: &BTreeMap<Key, BTreeMap<Key, f64>>, start: &Key, hops: u32) -> BTreeMap<Key, f64> {
    let mut mass = BTreeMap::from([(start.clone(), 1.0)]);
    for _ in 0..hops {
        let mut next = BTreeMap::new();
        for (node, p) in &mass {
            let nbrs = &adj[node];
            let total: f64 = nbrs.values().sum();
            for (v, w) in nbrs {
                *next.entry(v.clone()).or_insert(0.0) += p * w / total;
            }
        }
        mass = next;
    }
    mass
}

/// recall@k straight from the definition.
pub fn brute_recall(ranking: &[String], relevant: &[String], k: usize) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    let mut found = 0;
    for r in relevant {
        if let Some(pos) = ranking.iter().position(|d| d == r) {
            if pos < k {
                found += 1;
            }
        }
    }
    found as f64 / relevant.len() as f64
}

/// Average precision at k: precision at each relevant position within the
/// cutoff, recomputed from scratch, summed and divided by |relevant|.
pub fn brute_ap(ranking: &[String], relevant: &[String], k: usize) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    let cut = k.min(ranking.len());
    let mut sum = 0.0;
    for i in 0..cut {
        if relevant.contains(&ranking[i]) {
            let hits = ranking[..=i].iter().filter(|d| relevant.contains(d)).count();
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / relevant.len() as f64
}

/// Scores every document against `query` with BM25 (Lucene idf), skipping
/// zero scores, best first and ties by id. Documents are space-separated
/// lowercase words.
pub fn exhaustive_bm25(docs: &BTreeMap<String, String>, query: &str, k1: f64, b: f64) -> Vec<(String, f64)> {
    let n = docs.len() as f64;
    let tokens: BTreeMap<&String, Vec<&str>> =
        docs.iter().map(|(id, t)| (id, t.split(' ').filter(|w| !w.is_empty()).collect())).collect();
    let avgdl = tokens.values().map(|t| t.len() as f64).sum::<f64>() / n;
    let terms: BTreeSet<&str> = query.split(' ').filter(|w| !w.is_empty()).collect();
    let df: BTreeMap<&str, f64> =
        terms.iter().map(|t| (*t, tokens.values().filter(|d| d.contains(t)).count() as f64)).collect();
    let mut scored = Vec::new();
    for (id, toks) in &tokens {
        let dl = toks.len() as f64;
        let mut score = 0.0;
        for t in &terms {
            let tf = toks.iter().filter(|w| *w == t).count() as f64;
            if tf == 0.0 {
                continue;
            }
            let idf = (1.0 + (n - df[t] + 0.5) / (df[t] + 0.5)).ln();
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl));
        }
        if score > 0.0 {
            scored.push(((*id).clone(), score));
        }
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}
