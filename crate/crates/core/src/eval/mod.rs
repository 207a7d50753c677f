//! Measurement machinery: space alignment, bucketed cosine scores,
//! rank correlation, probes and significance tests.

pub mod align;
pub mod probe;
pub mod similarity;
pub mod stats;
pub mod vecmap;

pub use align::{fit_alignment, shared_dictionary, AlignmentMap};
pub use probe::{eval_probe, train_probe, FrequencyBin, Metrics, Probe, ProbeConfig, ProbeDataset, ProbeReport};
pub use similarity::{eval_ratings, eval_similarity, SimilarityBenchmark, SimilarityEntry};
pub use stats::{average_ranks, sign_test, spearman};
pub use vecmap::{compare_models, score_alignment, AlignmentReport, BucketComparison, BucketScore};
