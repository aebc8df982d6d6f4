//! Decomposition-quality and agreement metrics.

mod hungarian;
mod kappa;
mod overlap;
mod recall;
mod rouge;
mod similarity;

use thiserror::Error;

pub use hungarian::{hungarian_match, Matching};
pub use kappa::{cohen_kappa, fleiss_kappa, KappaError, RatingTable};
pub use overlap::{overlap_by_qtype, OverlapAveraging, OverlapRow, OverlapTable};
pub use recall::{
    recall_report, unmatched_fraction, unmatched_summary, MatchJudgment, PairJudgment, QtypeKind, RecallReport,
    UnmatchedReport, UnmatchedSummary,
};
pub use rouge::{lcs_len, ngram_precision, rouge_l, rouge_l_tokens, rouge_n_precision, token_f1, RougeL};
pub use similarity::{set_similarity, similarity_matrix, SimilaritySpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("text has no tokens")]
    EmptyText,
    #[error("question set is empty")]
    EmptySet,
    #[error("similarity matrix is {}x{}, expected {}x{}", found.0, found.1, expected.0, expected.1)]
    MatrixShape { expected: (usize, usize), found: (usize, usize) },
    #[error("similarity matrix has non-finite entries")]
    NonFinite,
}
