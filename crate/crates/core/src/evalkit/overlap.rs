use serde::Serialize;

use super::rouge::{lcs_len, ngram_precision};
use crate::model::{ClaimRecord, QuestionType};
use crate::tokenize::tokenize;

/// How per-question overlaps are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OverlapAveraging {
    /// Mean of per-question precisions.
    #[default]
    PerQuestion,
    /// Matched n-grams over all question n-grams.
    Pooled,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct OverlapRow {
    pub n_questions: usize,
    /// Typed questions of this kind per typed annotation.
    pub questions_per_annotation: f64,
    pub rouge1_p: f64,
    pub rouge2_p: f64,
    pub rougel_p: f64,
}

/// Lexical overlap between subquestions and their claim, split by question type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapTable {
    pub typed_annotations: usize,
    pub literal: OverlapRow,
    pub implied: OverlapRow,
}

#[derive(Default)]
struct Acc {
    n: usize,
    // Per-question sums, or pooled numerators/denominators.
    sums: [f64; 3],
    num: [usize; 3],
    den: [usize; 3],
}

impl Acc {
    fn push(&mut self, question: &[String], claim: &[String]) {
        self.n += 1;
        for (k, order) in [1usize, 2].into_iter().enumerate() {
            let p = ngram_precision(question, claim, order);
            self.sums[k] += p;
            let grams = (question.len() + 1).saturating_sub(order);
            self.den[k] += grams;
            self.num[k] += (p * grams as f64).round() as usize;
        }
        let lcs = lcs_len(question, claim);
        self.sums[2] += if question.is_empty() { 0.0 } else { lcs as f64 / question.len() as f64 };
        self.num[2] += lcs;
        self.den[2] += question.len();
    }

    fn row(&self, annotations: usize, averaging: OverlapAveraging) -> OverlapRow {
        let value = |k: usize| match averaging {
            OverlapAveraging::PerQuestion if self.n > 0 => self.sums[k] / self.n as f64,
            OverlapAveraging::Pooled if self.den[k] > 0 => self.num[k] as f64 / self.den[k] as f64,
            _ => 0.0,
        };
        OverlapRow {
            n_questions: self.n,
            questions_per_annotation: if annotations == 0 { 0.0 } else { self.n as f64 / annotations as f64 },
            rouge1_p: value(0),
            rouge2_p: value(1),
            rougel_p: value(2),
        }
    }
}

/// Overlap statistics over every annotation carrying question types.
pub fn overlap_by_qtype<'a, I>(records: I, averaging: OverlapAveraging) -> OverlapTable
where
    I: IntoIterator<Item = &'a ClaimRecord>,
{
    let (mut literal, mut implied) = (Acc::default(), Acc::default());
    let mut typed = 0usize;
    for r in records {
        let claim = tokenize(&r.claim);
        for a in &r.annotations {
            if a.subquestions.iter().all(|q| q.qtype.is_none()) {
                continue;
            }
            typed += 1;
            for q in &a.subquestions {
                let tokens = tokenize(&q.text);
                match q.qtype {
                    Some(QuestionType::Literal) => literal.push(&tokens, &claim),
                    Some(QuestionType::Implied(_)) => implied.push(&tokens, &claim),
                    None => {}
                }
            }
        }
    }
    OverlapTable { typed_annotations: typed, literal: literal.row(typed, averaging), implied: implied.row(typed, averaging) }
}
