//! The experiment pipeline at desk scale: corpus sampling, annotation
//! packs, ranking ingestion, rank statistics and significance testing.

mod analyze;
mod corpus;
mod pack;
mod rankings;
mod stats;
mod wilcoxon;

pub use analyze::{analyze, Aggregation, AnalysisOptions, AnalysisReport, TargetReport};
pub use corpus::{ingest_corpus, parse_corpus, CorpusItem, Document};
pub use pack::{
    build_annotation_pack, generate_prompt_sets, pack_generated, AnnotationItem, AnnotationPack,
    Candidate, GeneratedEntry, GenerationRun, PackFailure, META_PER_ENTRY,
};
pub use rankings::{ingest_rankings, parse_rankings, RankingFormat, RankingRecord, Target};
pub use stats::{mean_ranks, rank_matrix, topk_share, Group, RankMatrix, ShareDefinition};
pub use wilcoxon::{
    exact_lower_tail, wilcoxon_signed_rank, WilcoxonMethod, WilcoxonMode, WilcoxonResult,
};

use crate::meta::MetaError;

/// Version stamped into every pack, report and ranking export.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Io(String),
    #[error("corpus: {0}")]
    Corpus(String),
    #[error("document {id} is too short to split ({sentences} sentence(s))")]
    TooShort { id: String, sentences: usize },
    #[error("asked for {requested} items but the corpus has {available}")]
    NotEnough { requested: usize, available: usize },
    #[error("rankings row {row}: {message}")]
    Ranking { row: usize, message: String },
    #[error(
        "rankings row {row}: duplicate record for item {item}, annotator {annotator}, {target}"
    )]
    Duplicate {
        row: usize,
        item: String,
        annotator: String,
        target: String,
    },
    #[error("rankings row {row}: unknown {what} {id:?}")]
    Reference {
        row: usize,
        what: String,
        id: String,
    },
    #[error("rankings row {row}: ranking omits candidate {id}")]
    Incomplete { row: usize, id: String },
    #[error("rankings row {row}: candidate {id} ranked more than once")]
    Tie { row: usize, id: String },
    #[error("all differences are zero")]
    Degenerate,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Meta(#[from] MetaError),
}
