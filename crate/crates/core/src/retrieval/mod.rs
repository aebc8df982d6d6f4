//! Evidence-paragraph retrieval: score matrices from pluggable scorers,
//! top-K selection in support, refute and merged modes, and F1 against gold
//! paragraph judgments.

mod gold;
mod matrix;
mod scorer;
mod select;

use thiserror::Error;

pub use gold::{
    collapse_labels, human_agreement, labels_to_selection, majority_label, paragraph_label_stats,
    random_retrieval_baseline, GoldScope, GoldSets, JudgedClaim, LabelShares, ParagraphLabelStats,
    EVIDENCE_LABEL_DIST,
};
pub use matrix::{load_scores, ScoreMatrix};
pub use scorer::{bm25_scores, Bm25Params, Bm25Scorer, ExternalScorer, LexicalScorer, OracleScorer, Scorer};
pub use select::{
    evaluate_retrieval, retrieve, retrieve_from_matrices, select_topk, top_k_indices, F1Counts, Hypothesis, Mode,
    RetrievalResult,
};

use crate::protocol::ProtocolError;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("paragraph list is empty")]
    EmptyCorpus,
    #[error("score matrix is {rows}x{cols} but has {found} entries")]
    Dimension { rows: usize, cols: usize, found: usize },
    #[error("score at ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("bounded score at ({row}, {col}) is {value}, outside [0, 1]")]
    OutOfBounds { row: usize, col: usize, value: f64 },
    #[error("k = {k} exceeds the {paragraphs} available paragraphs")]
    KTooLarge { k: usize, paragraphs: usize },
    #[error("hypothesis {hypothesis} has no negated form, needed for refute/merged retrieval")]
    MissingNegation { hypothesis: usize },
    #[error("{0} score matrix is required for this mode")]
    MissingMatrix(&'static str),
    #[error("invalid BM25 parameters: {0}")]
    InvalidParams(String),
    #[error("invalid label distribution {0}")]
    InvalidDistribution(String),
    #[error("expected 3 annotators, found {0}")]
    AnnotatorCount(usize),
    #[error("no record carries paragraph judgments")]
    NoJudgments,
    #[error("score file: {0}")]
    File(String),
    #[error("cannot start external scorer: {0}")]
    Connect(ProtocolError),
    #[error("scoring paragraph {paragraph} against hypothesis {hypothesis} failed: {source}")]
    Pair { paragraph: usize, hypothesis: usize, source: ProtocolError },
}
