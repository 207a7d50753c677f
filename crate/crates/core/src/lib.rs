//! Embeddings for rare and novel words by mimicking a pre-trained space.
//!
//! A [`Model`](model::Model) learns to reproduce the embeddings of frequent
//! words from their character n-grams and from attention-weighted averages of
//! their contexts. Once trained it infers embeddings for words that are too
//! rare to have good ones.
//!
//! The crate also carries the benchmark harness used to measure such models:
//! frequency downsampling of corpora, orthogonal alignment of embedding
//! spaces, bucketed cosine scores, Spearman correlation, linear probes and
//! binomial sign tests.

pub mod checkpoint;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod model;
pub mod ngram;
pub mod optim;
pub mod training;

pub use checkpoint::Checkpoint;
pub use corpus::{Context, ContextSet, Corpus, DownsampleConfig, DownsamplePlan};
pub use embedding::{EmbeddingSpace, Vector};
pub use error::{Error, Result};
pub use model::{ForwardTrace, Mode, Model};
pub use ngram::{NgramConfig, NgramVocab};
pub use training::{train, SamplerConfig, TrainConfig, TrainingInstance};
