use serde::{Deserialize, Serialize};

use super::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QtypeKind {
    Literal,
    Implied,
}

/// Whether one reference subquestion was judged covered by the generated set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchJudgment {
    pub claim_id: String,
    #[serde(rename = "ref_index")]
    pub reference_question_index: usize,
    pub matched: bool,
    #[serde(rename = "qtype")]
    pub reference_qtype: QtypeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecallReport {
    pub r_all: f64,
    /// `None` when no literal reference questions were judged.
    pub r_literal: Option<f64>,
    pub r_implied: Option<f64>,
    pub n_all: usize,
    pub n_literal: usize,
    pub n_implied: usize,
}

/// Fraction of reference questions matched, overall and per question type.
pub fn recall_report(judgments: &[MatchJudgment]) -> Result<RecallReport, MetricError> {
    if judgments.is_empty() {
        return Err(MetricError::EmptySet);
    }
    let count = |kind: Option<QtypeKind>| {
        let of_kind = judgments.iter().filter(|j| kind.is_none_or(|k| j.reference_qtype == k));
        let (n, hit) = of_kind.fold((0, 0), |(n, h), j| (n + 1, h + usize::from(j.matched)));
        (n, if n == 0 { None } else { Some(hit as f64 / n as f64) })
    };
    let (n_all, r_all) = count(None);
    let (n_literal, r_literal) = count(Some(QtypeKind::Literal));
    let (n_implied, r_implied) = count(Some(QtypeKind::Implied));
    Ok(RecallReport { r_all: r_all.unwrap(), r_literal, r_implied, n_all, n_literal, n_implied })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnmatchedReport {
    /// Mean of `more_qs` and `fewer_qs`.
    pub all: f64,
    pub more_qs: f64,
    pub fewer_qs: f64,
}

/// Unmatched-question fractions for two annotations of one claim. `first[i]`
/// is true when question `i` of the first set is not expressed by the second
/// set, and vice versa. The first set counts as the larger one on ties.
pub fn unmatched_fraction(first: &[bool], second: &[bool]) -> Result<UnmatchedReport, MetricError> {
    if first.is_empty() || second.is_empty() {
        return Err(MetricError::EmptySet);
    }
    let frac = |flags: &[bool]| flags.iter().filter(|&&u| u).count() as f64 / flags.len() as f64;
    let (more, fewer) = if first.len() >= second.len() { (first, second) } else { (second, first) };
    let (more_qs, fewer_qs) = (frac(more), frac(fewer));
    Ok(UnmatchedReport { all: (more_qs + fewer_qs) / 2.0, more_qs, fewer_qs })
}

/// Per-claim unmatched flags for a pair of annotations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairJudgment {
    pub claim_id: String,
    pub first_unmatched: Vec<bool>,
    pub second_unmatched: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnmatchedSummary {
    pub n_claims: usize,
    /// Per-claim reports averaged over claims.
    pub mean: UnmatchedReport,
    /// Unmatched questions over all questions, pooled across claims and sets.
    pub all_pooled: f64,
}

pub fn unmatched_summary(pairs: &[PairJudgment]) -> Result<UnmatchedSummary, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptySet);
    }
    let mut sum = (0.0, 0.0, 0.0);
    let (mut unmatched, mut total) = (0usize, 0usize);
    for p in pairs {
        let r = unmatched_fraction(&p.first_unmatched, &p.second_unmatched)?;
        sum = (sum.0 + r.all, sum.1 + r.more_qs, sum.2 + r.fewer_qs);
        for flags in [&p.first_unmatched, &p.second_unmatched] {
            unmatched += flags.iter().filter(|&&u| u).count();
            total += flags.len();
        }
    }
    let n = pairs.len() as f64;
    Ok(UnmatchedSummary {
        n_claims: pairs.len(),
        mean: UnmatchedReport { all: sum.0 / n, more_qs: sum.1 / n, fewer_qs: sum.2 / n },
        all_pooled: unmatched as f64 / total as f64,
    })
}
