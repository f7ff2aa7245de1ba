//! End-to-end orchestration: corpus ingestion, target-class selection,
//! experiment execution across tiers and engines, report emission, and
//! the scaling benchmark.

mod bench;
mod experiment;
mod ingest;
mod report;

pub use bench::{bench_scaling, BenchConfig, BenchRegime, BenchReport, BenchRow};
pub use experiment::{
    confusion_target, nearest_target, run_experiment, select_target_class, Engine,
    ExperimentConfig, ExperimentOutput, ExplanationRecord, TargetMode, Tier,
};
pub use ingest::{ingest, write_corpus, ConfusionTable, Corpus, IngestOptions};
pub use report::emit_reports;

use crate::atomic::AtomicError;
use crate::embed::EmbedError;
use crate::ged::GedError;
use crate::metrics::MetricsError;
use crate::relational::RelationalError;
use crate::taxonomy::TaxonomyError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Atomic(#[from] AtomicError),
    #[error(transparent)]
    Relational(#[from] RelationalError),
    #[error(transparent)]
    Ged(#[from] GedError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{file}:{line}: invalid scene graph: {reason}")]
    BadGraphFile {
        file: String,
        line: u32,
        reason: String,
    },
    #[error("{file}: invalid scene graph: {reason}")]
    InvalidGraph { file: String, reason: String },
    #[error("{file}:{line}: invalid confusion table: {reason}")]
    BadConfusionFile {
        file: String,
        line: u32,
        reason: String,
    },
    #[error("no concept taxonomy found at {path}")]
    MissingTaxonomy { path: String },
    #[error("duplicate instance id {id}")]
    DuplicateInstance { id: String },
    #[error("graph {graph}: label {label} missing from the {vocabulary}")]
    UnknownLabel {
        graph: String,
        label: String,
        vocabulary: String,
    },
    #[error("labeled target mode needs a confusion table")]
    MissingConfusionTable,
    #[error("confusion table has no rows for source class {class}")]
    NoConfusionRow { class: String },
    #[error("query {query} (class {class}) has no eligible candidates")]
    EmptyPool { query: String, class: String },
    #[error("invalid experiment configuration: {reason}")]
    InvalidConfig { reason: String },
}
