//! Synthetic query logs with Zipf query popularity and latent topic clusters.
//!
//! Every query and listing belongs to a cluster. Listing titles are drawn from
//! the cluster's keywords and queries are short keyword combinations from the
//! same pool, so lexical matching has some signal. Each query prefers a small
//! set of favorite listings, which is where its purchases come from; the click
//! graph sees those preferences, titles only partly do.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::metrics::{Qrels, RunList};
use crate::log::{Interaction, InteractionRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("{clusters} clusters cannot be spread over {items} {what}")]
    TooManyClusters { clusters: usize, items: usize, what: &'static str },
    #[error("novel query fraction must lie in [0, 1), got {0}")]
    BadNovelFraction(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticLogSpec {
    pub num_queries: usize,
    pub num_listings: usize,
    pub num_shops: usize,
    pub tag_vocab_size: usize,
    pub cluster_count: usize,
    pub zipf_exponent: f64,
    /// Training interaction events.
    pub events: usize,
    /// Evaluation query instances, drawn with repetition.
    pub eval_queries: usize,
    /// Share of the less popular half of queries that never occur in training.
    pub novel_fraction: f64,
    pub seed: u64,
}

impl Default for SyntheticLogSpec {
    fn default() -> Self {
        SyntheticLogSpec {
            num_queries: 1000,
            num_listings: 10_000,
            num_shops: 400,
            tag_vocab_size: 600,
            cluster_count: 20,
            zipf_exponent: 1.0,
            events: 100_000,
            eval_queries: 2000,
            novel_fraction: 0.2,
            seed: 0,
        }
    }
}

impl SyntheticLogSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        for (v, name) in [
            (self.num_queries, "num_queries"),
            (self.num_listings, "num_listings"),
            (self.num_shops, "num_shops"),
            (self.tag_vocab_size, "tag_vocab_size"),
            (self.cluster_count, "cluster_count"),
            (self.events, "events"),
            (self.eval_queries, "eval_queries"),
        ] {
            if v == 0 {
                return Err(SynthError::NotPositive(name));
            }
        }
        if !(self.zipf_exponent > 0.0) || !self.zipf_exponent.is_finite() {
            return Err(SynthError::NotPositive("zipf_exponent"));
        }
        for (items, what) in [
            (self.num_queries, "queries"),
            (self.num_listings, "listings"),
            (self.num_shops, "shops"),
            (self.tag_vocab_size, "tags"),
        ] {
            if self.cluster_count > items {
                return Err(SynthError::TooManyClusters { clusters: self.cluster_count, items, what });
            }
        }
        if !(0.0..1.0).contains(&self.novel_fraction) {
            return Err(SynthError::BadNovelFraction(self.novel_fraction));
        }
        Ok(())
    }
}

/// Keywords per cluster.
const CLUSTER_VOCAB: usize = 16;
/// Words shared by every cluster.
const GENERIC_VOCAB: usize = 24;
const TITLE_WORDS: usize = 4;
const FAVORITES: usize = 12;
/// Chance an interaction goes to a random listing of the query's cluster.
const IN_CLUSTER_NOISE: f64 = 0.10;
/// Chance an interaction leaves the query's cluster.
const CROSS_CLUSTER: f64 = 0.03;
/// Interaction mix: click, cart, purchase.
const INTERACTION_MIX: [f64; 3] = [0.903, 0.0619, 0.0346];
/// Relevant listings per evaluation instance: 1, 2 or 3.
const PURCHASES_MIX: [f64; 3] = [0.823, 0.120, 0.057];

const SYLLABLES: [&str; 16] = [
    "ba", "ce", "di", "fo", "gu", "ka", "le", "mi", "no", "pu", "ra", "se", "ti", "vo", "wu", "za",
];

fn word(id: usize) -> String {
    let (a, b, c) = (id % 16, (id / 16) % 16, (id / 256) % 16);
    format!("{}{}{}", SYLLABLES[c], SYLLABLES[b], SYLLABLES[a])
}

fn generic_word(i: usize) -> String {
    word(i)
}

fn cluster_word(cluster: usize, i: usize) -> String {
    word(GENERIC_VOCAB + cluster * CLUSTER_VOCAB + i)
}

/// Discrete distribution sampled by inverse transform.
#[derive(Debug, Clone)]
struct Discrete {
    cdf: Vec<f64>,
}

impl Discrete {
    fn new(weights: &[f64]) -> Self {
        let total: f64 = weights.iter().sum();
        let mut run = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                run += w;
                run / total
            })
            .collect();
        Discrete { cdf }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let p: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= p).min(self.cdf.len() - 1)
    }
}

fn pick<R: Rng>(mix: &[f64], rng: &mut R) -> usize {
    let mut p: f64 = rng.random::<f64>() * mix.iter().sum::<f64>();
    for (i, w) in mix.iter().enumerate() {
        if p < *w {
            return i;
        }
        p -= w;
    }
    mix.len() - 1
}

/// Zipf probabilities `p_r ∝ (r + 1)^-s` for ranks `0..n`.
pub fn zipf_law(n: usize, exponent: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|r| ((r + 1) as f64).powf(-exponent)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

#[derive(Debug, Clone)]
pub struct SyntheticQuery {
    pub text: String,
    pub cluster: usize,
    /// Never occurs in the training log.
    pub novel: bool,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub log: Vec<InteractionRecord>,
    /// Queries by popularity rank, most popular first.
    pub queries: Vec<SyntheticQuery>,
    /// Listing id to cluster.
    pub listing_cluster: BTreeMap<String, usize>,
    /// Probability of each rank in the training log (novel queries excluded).
    pub training_law: Vec<f64>,
    /// Training events per rank.
    pub training_counts: Vec<u64>,
    /// `(instance id, query text)` in draw order, duplicates kept.
    pub eval_queries: Vec<(String, String)>,
    /// Popularity rank of each evaluation instance.
    pub eval_ranks: Vec<usize>,
    pub qrels: Qrels,
    /// Training frequency of each evaluation instance's query.
    pub frequencies: BTreeMap<String, u64>,
}

impl SyntheticDataset {
    pub fn listing_ids(&self) -> impl Iterator<Item = &str> {
        self.listing_cluster.keys().map(String::as_str)
    }

    /// Evaluation instances whose query never occurs in training, whether
    /// held out on purpose or simply never drawn.
    pub fn cold_start_instances(&self) -> BTreeSet<String> {
        self.eval_queries
            .iter()
            .zip(&self.eval_ranks)
            .filter(|(_, &r)| self.training_counts[r] == 0)
            .map(|((id, _), _)| id.clone())
            .collect()
    }
}

struct Listing {
    id: String,
    cluster: usize,
    title: String,
    words: BTreeSet<usize>,
    shop: String,
    tags: Vec<String>,
}

pub fn generate_synthetic_log(spec: &SyntheticLogSpec) -> Result<SyntheticDataset, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let clusters = spec.cluster_count;

    // Listings, round-robin over clusters.
    let shops_per_cluster = spec.num_shops / clusters;
    let tags_per_cluster = spec.tag_vocab_size / clusters;
    let mut listings = Vec::with_capacity(spec.num_listings);
    let mut by_cluster: Vec<Vec<usize>> = vec![Vec::new(); clusters];
    let vocab: Vec<usize> = (0..CLUSTER_VOCAB).collect();
    for j in 0..spec.num_listings {
        let cluster = j % clusters;
        let words: BTreeSet<usize> = vocab.choose_multiple(&mut rng, TITLE_WORDS.min(CLUSTER_VOCAB)).copied().collect();
        let mut title: Vec<String> = words.iter().map(|&w| cluster_word(cluster, w)).collect();
        title.push(generic_word(rng.random_range(0..GENERIC_VOCAB)));
        title.shuffle(&mut rng);
        let shop = cluster + clusters * rng.random_range(0..shops_per_cluster);
        let ntags = rng.random_range(2..=3).min(tags_per_cluster);
        let tag_ids: BTreeSet<usize> =
            (0..ntags).map(|_| cluster + clusters * rng.random_range(0..tags_per_cluster)).collect();
        by_cluster[cluster].push(j);
        listings.push(Listing {
            id: format!("l{j:06}"),
            cluster,
            title: title.join(" "),
            words,
            shop: format!("s{shop:04}"),
            tags: tag_ids.into_iter().map(|t| format!("t{t:04}")).collect(),
        });
    }
    // Listing appeal inside each cluster follows a shuffled 1/rank profile.
    let mut appeal = vec![0.0; spec.num_listings];
    for members in &by_cluster {
        let mut order = members.clone();
        order.shuffle(&mut rng);
        for (r, &j) in order.iter().enumerate() {
            appeal[j] = 1.0 / (r + 1) as f64;
        }
    }

    // Queries: unique keyword combinations, each with favorite listings.
    let mut seen_text = BTreeSet::new();
    let mut queries = Vec::with_capacity(spec.num_queries);
    let mut preferences: Vec<(Vec<usize>, Discrete)> = Vec::with_capacity(spec.num_queries);
    for r in 0..spec.num_queries {
        let cluster = rng.random_range(0..clusters);
        let mut attempt = 0;
        let (text, words) = loop {
            let n = rng.random_range(2..=3);
            let mut words: Vec<usize> = vocab.choose_multiple(&mut rng, n).copied().collect();
            words.sort_unstable();
            let mut text: Vec<String> = words.iter().map(|&w| cluster_word(cluster, w)).collect();
            if attempt > 50 {
                text.push(generic_word(attempt % GENERIC_VOCAB));
                text.push(format!("{r}"));
            }
            let text = text.join(" ");
            if seen_text.insert(text.clone()) {
                break (text, words);
            }
            attempt += 1;
        };
        let members = &by_cluster[cluster];
        let matching: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&j| words.iter().any(|w| listings[j].words.contains(w)))
            .collect();
        let mut favorites: Vec<usize> = Vec::with_capacity(FAVORITES);
        let mut guard = 0;
        while favorites.len() < FAVORITES.min(members.len()) && guard < 10_000 {
            guard += 1;
            let pool = if !matching.is_empty() && rng.random::<f64>() < 0.7 { &matching } else { members };
            let weights: Vec<f64> = pool.iter().map(|&j| appeal[j]).collect();
            let j = pool[Discrete::new(&weights).sample(&mut rng)];
            if !favorites.contains(&j) {
                favorites.push(j);
            }
        }
        let weights: Vec<f64> = (0..favorites.len()).map(|i| 1.0 / (i + 1) as f64).collect();
        preferences.push((favorites, Discrete::new(&weights)));
        let novel = r >= spec.num_queries / 2 && rng.random::<f64>() < spec.novel_fraction;
        queries.push(SyntheticQuery { text, cluster, novel });
    }

    let draw_listing = |rng: &mut ChaCha8Rng, q: usize| -> usize {
        let u: f64 = rng.random();
        if u < CROSS_CLUSTER {
            rng.random_range(0..spec.num_listings)
        } else if u < CROSS_CLUSTER + IN_CLUSTER_NOISE {
            let members = &by_cluster[queries[q].cluster];
            members[rng.random_range(0..members.len())]
        } else {
            let (fav, law) = &preferences[q];
            fav[law.sample(rng)]
        }
    };

    let law = zipf_law(spec.num_queries, spec.zipf_exponent);
    let mut training_law: Vec<f64> = law.iter().zip(&queries).map(|(p, q)| if q.novel { 0.0 } else { *p }).collect();
    let total: f64 = training_law.iter().sum();
    training_law.iter_mut().for_each(|p| *p /= total);

    let training = Discrete::new(&training_law);
    let mut training_counts = vec![0u64; spec.num_queries];
    let mut log = Vec::with_capacity(spec.events);
    for _ in 0..spec.events {
        let q = training.sample(&mut rng);
        training_counts[q] += 1;
        let l = &listings[draw_listing(&mut rng, q)];
        let interaction = [Interaction::Click, Interaction::Cart, Interaction::Purchase][pick(&INTERACTION_MIX, &mut rng)];
        log.push(InteractionRecord {
            query: queries[q].text.clone(),
            listing_id: l.id.clone(),
            interaction,
            shop_id: l.shop.clone(),
            tags: l.tags.clone(),
            title: Some(l.title.clone()),
        });
    }

    let full = Discrete::new(&law);
    let width = spec.eval_queries.to_string().len();
    let mut eval_queries = Vec::with_capacity(spec.eval_queries);
    let mut eval_ranks = Vec::with_capacity(spec.eval_queries);
    let mut qrels = Qrels::new();
    let mut frequencies = BTreeMap::new();
    for i in 0..spec.eval_queries {
        let q = full.sample(&mut rng);
        let id = format!("e{i:0width$}");
        let want = pick(&PURCHASES_MIX, &mut rng) + 1;
        let mut bought = BTreeSet::new();
        for _ in 0..64 {
            if bought.len() == want {
                break;
            }
            bought.insert(draw_listing(&mut rng, q));
        }
        for j in bought {
            qrels.insert(id.clone(), listings[j].id.clone());
        }
        frequencies.insert(id.clone(), training_counts[q]);
        eval_queries.push((id, queries[q].text.clone()));
        eval_ranks.push(q);
    }

    let listing_cluster = listings.iter().map(|l| (l.id.clone(), l.cluster)).collect();
    Ok(SyntheticDataset {
        log,
        queries,
        listing_cluster,
        training_law,
        training_counts,
        eval_queries,
        eval_ranks,
        qrels,
        frequencies,
    })
}

/// A run that ranks `k` listings chosen uniformly at random for each query.
pub fn random_run<'a>(qids: impl IntoIterator<Item = &'a str>, listings: &[String], k: usize, seed: u64) -> RunList {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut run = RunList::new();
    for qid in qids {
        let chosen: Vec<(String, f64)> = listings
            .choose_multiple(&mut rng, k.min(listings.len()))
            .enumerate()
            .map(|(i, l)| (l.clone(), (k - i) as f64))
            .collect();
        run.insert(qid, chosen);
    }
    run
}
