//! Random-walk candidate retrieval for product search.
//!
//! A query log is turned into a weighted bipartite graph between queries (and
//! optionally shops and tags) on one side and listings on the other. Queries
//! are answered with breadth-first fixed-length random walks; listings are
//! ranked by how often walks end on them. A BM25 retriever, rank fusion and an
//! evaluation harness sit alongside for comparison experiments.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

// `!(x > 0)` style guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bm25;
pub mod builder;
pub mod codec;
pub mod eval;
pub mod graph;
pub mod log;
pub mod ranking;
pub mod sampler;
pub mod scalar;
pub mod walk;

pub use bm25::{tokenize, Bm25Error, Bm25Index, Bm25Params};
pub use builder::{
    build_from_records, build_graph, collate, edge_weight, normalize_query, BuildError, BuildOptions, Collated,
    CollatedPair, ListingMeta, WeightCoefficients,
};
pub use codec::{read_graph, write_graph, LoadError};
pub use graph::{CsrGraph, GraphError, KindCounts, NodeId, NodeKind, NodeRef};
pub use log::{read_interaction_log, Interaction, InteractionRecord, LogError};
pub use ranking::{Hit, RankedResult};
pub use sampler::{
    its_sample, mh_step, sample_edges, EdgeCounter, ProbeStats, SampleError, SamplerConfig, SamplerMode,
};
pub use scalar::Scalar;
pub use walk::{batch_retrieve, query_rng, query_seed, retrieve, xwalk_bfs, WalkCounter, WalkError, WalkParams};

pub type Graph = CsrGraph<f64>;
pub type Graph32 = CsrGraph<f32>;
pub type Coefficients = WeightCoefficients<f64>;
pub type Options = BuildOptions<f64>;
pub type Sampler = SamplerConfig<f64>;
pub type Params = WalkParams<f64>;
pub type Bm25 = Bm25Index<f64>;
