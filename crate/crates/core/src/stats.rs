//! Corpus-level statistics in the shape of the dataset overview table.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Answer, ClaimRecord, Source, VeracityLabel};
use crate::tokenize::token_count;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub n_claims: usize,
    pub avg_tokens_per_claim: f64,
    pub avg_subquestions_per_annotation: f64,
    pub answer_pct: BTreeMap<Answer, f64>,
    pub source_pct: BTreeMap<Source, f64>,
    pub label_dist: BTreeMap<VeracityLabel, f64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("no records to summarize")]
    Empty,
    #[error("records carry no subquestions")]
    NoSubquestions,
}

fn pct(count: usize, total: usize) -> f64 {
    100.0 * count as f64 / total as f64
}

/// Summarizes `records`. Answer and source percentages are taken over every
/// subquestion of every annotation.
pub fn compute_stats<'a, I>(records: I) -> Result<DatasetStats, StatsError>
where
    I: IntoIterator<Item = &'a ClaimRecord>,
{
    let mut n_claims = 0usize;
    let mut tokens = 0usize;
    let mut annotations = 0usize;
    let mut answers: BTreeMap<Answer, usize> = Answer::ALL.iter().map(|&a| (a, 0)).collect();
    let mut sources: BTreeMap<Source, usize> = Source::ALL.iter().map(|&s| (s, 0)).collect();
    let mut labels: BTreeMap<VeracityLabel, usize> = VeracityLabel::ALL.iter().map(|&l| (l, 0)).collect();
    for r in records {
        n_claims += 1;
        tokens += token_count(&r.claim);
        *labels.get_mut(&r.gold_label).unwrap() += 1;
        for a in &r.annotations {
            annotations += 1;
            for q in &a.subquestions {
                *answers.get_mut(&q.answer).unwrap() += 1;
                *sources.get_mut(&q.source).unwrap() += 1;
            }
        }
    }
    if n_claims == 0 {
        return Err(StatsError::Empty);
    }
    let n_questions: usize = answers.values().sum();
    if n_questions == 0 {
        return Err(StatsError::NoSubquestions);
    }
    Ok(DatasetStats {
        n_claims,
        avg_tokens_per_claim: tokens as f64 / n_claims as f64,
        avg_subquestions_per_annotation: n_questions as f64 / annotations as f64,
        answer_pct: answers.into_iter().map(|(k, v)| (k, pct(v, n_questions))).collect(),
        source_pct: sources.into_iter().map(|(k, v)| (k, pct(v, n_questions))).collect(),
        label_dist: labels.into_iter().map(|(k, v)| (k, pct(v, n_claims))).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Annotation, ClaimContext, Subquestion};

    fn record(id: &str, label: VeracityLabel, answers: &[Answer]) -> ClaimRecord {
        ClaimRecord {
            id: id.into(),
            claim: "Taxes rose 10%.".into(),
            context: ClaimContext::default(),
            gold_label: label,
            justification: vec![],
            article_paragraphs: vec![],
            annotations: vec![Annotation {
                annotator_id: "a".into(),
                subquestions: answers
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| Subquestion::new(format!("q{i}?"), a, Source::Justification))
                    .collect(),
            }],
            paragraph_judgments: None,
        }
    }

    #[test]
    fn two_answers_split_evenly() {
        let r = record("1", VeracityLabel::True, &[Answer::Yes, Answer::No]);
        let s = compute_stats([&r]).unwrap();
        assert_eq!(s.answer_pct[&Answer::Yes], 50.0);
        assert_eq!(s.answer_pct[&Answer::No], 50.0);
        assert_eq!(s.answer_pct[&Answer::Unknown], 0.0);
        assert_eq!(s.source_pct[&Source::Justification], 100.0);
        // "taxes rose 10 % ." -> 5 tokens
        assert_eq!(s.avg_tokens_per_claim, 5.0);
    }

    #[test]
    fn mean_subquestions() {
        let a = record("1", VeracityLabel::True, &[Answer::Yes; 2]);
        let b = record("2", VeracityLabel::False, &[Answer::No; 4]);
        let s = compute_stats([&a, &b]).unwrap();
        assert_eq!(s.avg_subquestions_per_annotation, 3.0);
        assert_eq!(s.label_dist[&VeracityLabel::True], 50.0);
        let total: f64 = s.label_dist.values().sum();
        assert!((total - 100.0).abs() < 0.1);
    }

    #[test]
    fn empty_input_errors() {
        assert_eq!(compute_stats(std::iter::empty()), Err(StatsError::Empty));
        let mut r = record("1", VeracityLabel::True, &[Answer::Yes]);
        r.annotations.clear();
        assert_eq!(compute_stats([&r]), Err(StatsError::NoSubquestions));
    }
}
