//! Offline evaluation: metrics, rank fusion, popularity binning, reports and
//! synthetic data.

pub mod bins;
pub mod fusion;
pub mod metrics;
pub mod report;
pub mod synth;
pub mod trec;

pub use bins::{assign_bins, Bin, FrequencyBinAssignment};
pub use fusion::{rrf_fuse, FusionError, DEFAULT_KAPPA};
pub use metrics::{
    average_precision, average_precision_with, map_at_k, map_at_k_with, recall, recall_at_k, ApNormalization, Qrels,
    RunList,
};
pub use report::{evaluate, Report, ReportRow};
pub use synth::{generate_synthetic_log, random_run, zipf_law, SyntheticDataset, SyntheticLogSpec, SynthError};
