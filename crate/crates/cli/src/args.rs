use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xwalk_core::{Params, Sampler, SamplerMode};

use crate::error::Failure;

#[derive(Debug, Parser)]
#[command(name = "xwalk", version, about = "Random-walk candidate retrieval over query logs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a graph file from a JSON-lines interaction log
    Build(BuildArgs),
    /// Retrieve listings for one query
    Query(QueryArgs),
    /// Retrieve listings for every query in a file and write a run
    Run(RunArgs),
    /// Rank listings by BM25 over their titles and write a run
    Bm25(Bm25Args),
    /// Score runs against relevance judgments
    Eval(EvalArgs),
    /// Merge runs with reciprocal rank fusion
    Fuse(FuseArgs),
    /// Write a synthetic log with evaluation queries, judgments and frequencies
    Synth(SynthArgs),
    /// Serve retrieval over HTTP
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    /// Metropolis-Hastings after one inverse-transform draw
    Mh,
    /// Inverse-transform sampling for every draw
    Its,
}

#[derive(Debug, Clone, Args)]
pub struct WalkArgs {
    /// Number of walks
    #[arg(long, default_value_t = 1000)]
    pub walks: u64,
    /// Hops per walk; must be odd so walks end on listings
    #[arg(long, default_value_t = 3)]
    pub hops: u32,
    /// Number of listings to return
    #[arg(long, default_value_t = 1000)]
    pub topk: usize,
    /// Edge sampling strategy
    #[arg(long, value_enum, default_value_t = SamplerArg::Mh)]
    pub sampler: SamplerArg,
    /// Variance of the Metropolis-Hastings proposal on the unit interval
    #[arg(long, default_value_t = 0.2)]
    pub sigma2: f64,
    /// Base random seed
    #[arg(long, default_value_t = 0, conflicts_with = "random_seed")]
    pub seed: u64,
    /// Draw the base seed from system entropy instead
    #[arg(long)]
    pub random_seed: bool,
}

impl WalkArgs {
    pub fn params(&self) -> Result<Params, Failure> {
        let mode = match self.sampler {
            SamplerArg::Mh => SamplerMode::Mh,
            SamplerArg::Its => SamplerMode::Its,
        };
        let params = Params {
            walks: self.walks,
            hops: self.hops,
            top_k: self.topk,
            sampler: Sampler { proposal_variance: self.sigma2, mode, seed: 0 },
        };
        params.validate()?;
        Ok(params)
    }

    pub fn seed(&self) -> u64 {
        if self.random_seed {
            rand::random()
        } else {
            self.seed
        }
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Interaction log, one JSON object per line
    #[arg(long)]
    pub log: PathBuf,
    /// Graph file to write
    #[arg(long, short)]
    pub output: PathBuf,
    /// Weight of one click
    #[arg(long, default_value_t = 1.0)]
    pub click: f64,
    /// Weight of one add-to-cart
    #[arg(long, default_value_t = 3.0)]
    pub cart: f64,
    /// Weight of one purchase
    #[arg(long, default_value_t = 10.0)]
    pub purchase: f64,
    /// Leave out shop and tag nodes
    #[arg(long)]
    pub no_extend: bool,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Graph file
    #[arg(long, env = "XWALK_GRAPH")]
    pub graph: PathBuf,
    /// Query text
    pub text: String,
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Also write the result as a run file
    #[arg(long)]
    pub run_output: Option<PathBuf>,
    /// Query id used in the run file
    #[arg(long, default_value = "q0")]
    pub qid: String,
    /// Run tag used in the run file
    #[arg(long, default_value = "xwalk")]
    pub tag: String,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Graph file
    #[arg(long, env = "XWALK_GRAPH")]
    pub graph: PathBuf,
    /// Queries as `qid<TAB>text` lines
    #[arg(long)]
    pub queries: PathBuf,
    /// Run file to write
    #[arg(long)]
    pub run_output: PathBuf,
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Run tag
    #[arg(long, default_value = "xwalk")]
    pub tag: String,
}

#[derive(Debug, Args)]
pub struct Bm25Args {
    /// Listing titles as `listing_id<TAB>title` lines
    #[arg(long, conflicts_with = "log", required_unless_present = "log")]
    pub corpus: Option<PathBuf>,
    /// Take listing titles from an interaction log instead
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Queries as `qid<TAB>text` lines
    #[arg(long)]
    pub queries: PathBuf,
    /// Run file to write
    #[arg(long)]
    pub run_output: PathBuf,
    /// Number of listings per query
    #[arg(long, default_value_t = 1000)]
    pub topk: usize,
    /// Term frequency saturation
    #[arg(long, default_value_t = 1.2)]
    pub k1: f64,
    /// Length normalization
    #[arg(long, default_value_t = 0.75)]
    pub b: f64,
    /// Run tag
    #[arg(long, default_value = "bm25")]
    pub tag: String,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Relevance judgments
    #[arg(long)]
    pub qrels: PathBuf,
    /// Per-query training frequencies, for head/torso/tail breakdown
    #[arg(long)]
    pub frequencies: Option<PathBuf>,
    /// Runs as `PATH` or `NAME=PATH`
    #[arg(required = true)]
    pub runs: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Runs to merge
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    /// Rank offset in `1 / (kappa + rank)`; at least 1
    #[arg(long, default_value_t = 60)]
    pub kappa: u32,
    /// Fused run to write
    #[arg(long, short)]
    pub output: PathBuf,
    /// Keep at most this many listings per query
    #[arg(long)]
    pub topk: Option<usize>,
    /// Run tag
    #[arg(long, default_value = "rrf")]
    pub tag: String,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory for log.jsonl, queries.tsv, qrels.txt and frequencies.txt
    #[arg(long)]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub num_queries: usize,
    #[arg(long, default_value_t = 10_000)]
    pub num_listings: usize,
    #[arg(long, default_value_t = 400)]
    pub num_shops: usize,
    #[arg(long, default_value_t = 600)]
    pub tag_vocab_size: usize,
    #[arg(long, default_value_t = 20)]
    pub clusters: usize,
    #[arg(long, default_value_t = 1.0)]
    pub zipf_exponent: f64,
    /// Training interaction events
    #[arg(long, default_value_t = 100_000)]
    pub events: usize,
    /// Evaluation query instances, sampled with repetition
    #[arg(long, default_value_t = 2000)]
    pub eval_queries: usize,
    /// Share of less popular queries kept out of training
    #[arg(long, default_value_t = 0.2)]
    pub novel_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Graph file
    #[arg(long, env = "XWALK_GRAPH")]
    pub graph: PathBuf,
    /// Address to listen on
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
    /// Per-request time limit in milliseconds
    #[arg(long, default_value_t = 5000)]
    pub timeout_ms: u64,
    /// Largest walk count a request may ask for
    #[arg(long, default_value_t = 10_000_000)]
    pub max_walks: u64,
    /// Defaults for requests that leave parameters out
    #[command(flatten)]
    pub walk: WalkArgs,
}
