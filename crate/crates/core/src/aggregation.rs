//! Claim veracity from subquestion answers, label baselines, and classifier metrics.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Answer, ClaimRecord, VeracityLabel};

/// Label distribution of the filtered complex-claim pool, pants-on-fire first.
pub const CORPUS_LABEL_DIST: [f64; 6] = [0.091, 0.115, 0.229, 0.240, 0.189, 0.136];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregationError {
    #[error("answer list is empty")]
    NoAnswers,
    #[error("relevance mask has {mask} entries for {answers} answers")]
    MaskLength { answers: usize, mask: usize },
    #[error("relevance mask removes every answer")]
    EverythingMasked,
    #[error("veracity score {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("claim `{claim}` has no annotation {index}")]
    MissingAnnotation { claim: String, index: usize },
    #[error("invalid label distribution: {0}")]
    InvalidDistribution(String),
    #[error("prediction and gold lists differ in length ({preds} vs {golds})")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("cannot evaluate an empty prediction list")]
    EmptyEvaluation,
}

/// How unknown answers enter the yes fraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnknownPolicy {
    /// Unknown answers count in the denominator only.
    #[default]
    Count,
    /// Unknown answers are dropped before taking the fraction.
    Exclude,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerVector {
    answers: Vec<Answer>,
    relevance_mask: Option<Vec<bool>>,
}

impl AnswerVector {
    pub fn new(answers: Vec<Answer>) -> Result<Self, AggregationError> {
        if answers.is_empty() {
            return Err(AggregationError::NoAnswers);
        }
        Ok(AnswerVector { answers, relevance_mask: None })
    }

    pub fn with_mask(answers: Vec<Answer>, mask: Vec<bool>) -> Result<Self, AggregationError> {
        if mask.len() != answers.len() {
            return Err(AggregationError::MaskLength { answers: answers.len(), mask: mask.len() });
        }
        let mut v = Self::new(answers)?;
        v.relevance_mask = Some(mask);
        Ok(v)
    }

    pub fn answers(&self) -> &[Answer] {
        &self.answers
    }

    pub fn relevance_mask(&self) -> Option<&[bool]> {
        self.relevance_mask.as_deref()
    }

    fn kept(&self) -> impl Iterator<Item = Answer> + '_ {
        self.answers
            .iter()
            .enumerate()
            .filter(|(i, _)| self.relevance_mask.as_ref().is_none_or(|m| m[*i]))
            .map(|(_, &a)| a)
    }
}

/// Fraction of kept subquestions answered yes.
pub fn aggregate_veracity(v: &AnswerVector, policy: UnknownPolicy) -> Result<f64, AggregationError> {
    let mut yes = 0usize;
    let mut kept = 0usize;
    let mut any = false;
    for a in v.kept() {
        any = true;
        if policy == UnknownPolicy::Exclude && a == Answer::Unknown {
            continue;
        }
        kept += 1;
        if a == Answer::Yes {
            yes += 1;
        }
    }
    if !any {
        return Err(AggregationError::EverythingMasked);
    }
    if kept == 0 {
        return Err(AggregationError::NoAnswers);
    }
    Ok(yes as f64 / kept as f64)
}

/// Lower bound of the interval for ordinal `k`, i.e. `k/6`.
fn lower_bound(k: usize) -> f64 {
    k as f64 / 6.0
}

/// Maps a score to the six sixths intervals `[k/6, (k+1)/6)`, the last closed at 1.
pub fn score_to_label(v_hat: f64) -> Result<VeracityLabel, AggregationError> {
    if !(0.0..=1.0).contains(&v_hat) {
        return Err(AggregationError::OutOfRange(v_hat));
    }
    let mut k = ((v_hat * 6.0).floor() as usize).min(5);
    // v*6 can round across a boundary; settle against the exact thresholds.
    if v_hat < lower_bound(k) {
        k -= 1;
    } else if k < 5 && v_hat >= lower_bound(k + 1) {
        k += 1;
    }
    Ok(VeracityLabel::ALL[k])
}

/// Label predicted from one annotation of `record`.
pub fn predict_claim(
    record: &ClaimRecord,
    annotation_index: usize,
    mask: Option<&[bool]>,
    policy: UnknownPolicy,
) -> Result<VeracityLabel, AggregationError> {
    let ann = record.annotations.get(annotation_index).ok_or_else(|| AggregationError::MissingAnnotation {
        claim: record.id.clone(),
        index: annotation_index,
    })?;
    let answers = ann.answers();
    let v = match mask {
        Some(m) => AnswerVector::with_mask(answers, m.to_vec())?,
        None => AnswerVector::new(answers)?,
    };
    score_to_label(aggregate_veracity(&v, policy)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    RandomUniform,
    RandomLabelDist,
    MostFrequent,
}

impl std::str::FromStr for BaselineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random-uniform" => Ok(BaselineKind::RandomUniform),
            "random-label-dist" => Ok(BaselineKind::RandomLabelDist),
            "most-frequent" => Ok(BaselineKind::MostFrequent),
            other => Err(format!("unknown baseline `{other}`")),
        }
    }
}

fn check_distribution(dist: &[f64; 6]) -> Result<(), AggregationError> {
    if dist.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(AggregationError::InvalidDistribution("probabilities must be finite and nonnegative".into()));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(AggregationError::InvalidDistribution(format!("sums to {total}, not 1")));
    }
    Ok(())
}

/// Baseline predictions for `n` claims. `dist` (pants-on-fire first) drives
/// the label-distribution sampler and defines the modal label for
/// most-frequent; it defaults to [`CORPUS_LABEL_DIST`].
pub fn baseline(kind: BaselineKind, n: usize, dist: Option<&[f64; 6]>, seed: u64) -> Result<Vec<VeracityLabel>, AggregationError> {
    let dist = dist.unwrap_or(&CORPUS_LABEL_DIST);
    check_distribution(dist)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match kind {
        BaselineKind::RandomUniform => (0..n).map(|_| VeracityLabel::ALL[rng.random_range(0..6)]).collect(),
        BaselineKind::RandomLabelDist => {
            let index = WeightedIndex::new(dist.iter().copied())
                .map_err(|e| AggregationError::InvalidDistribution(e.to_string()))?;
            (0..n).map(|_| VeracityLabel::ALL[index.sample(&mut rng)]).collect()
        }
        BaselineKind::MostFrequent => {
            // First maximum wins ties.
            let modal = (0..6).fold(0, |best, k| if dist[k] > dist[best] { k } else { best });
            vec![VeracityLabel::ALL[modal]; n]
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifierReport {
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub mae: f64,
}

/// Macro-F1 over all six classes (absent classes score 0), micro-F1, and
/// mean absolute ordinal error.
pub fn evaluate_classifier(preds: &[VeracityLabel], golds: &[VeracityLabel]) -> Result<ClassifierReport, AggregationError> {
    if preds.len() != golds.len() {
        return Err(AggregationError::LengthMismatch { preds: preds.len(), golds: golds.len() });
    }
    if preds.is_empty() {
        return Err(AggregationError::EmptyEvaluation);
    }
    let mut tp = [0usize; 6];
    let mut pred_count = [0usize; 6];
    let mut gold_count = [0usize; 6];
    let mut abs_err = 0usize;
    for (&p, &g) in preds.iter().zip(golds) {
        pred_count[p.ordinal() as usize] += 1;
        gold_count[g.ordinal() as usize] += 1;
        if p == g {
            tp[p.ordinal() as usize] += 1;
        }
        abs_err += (p.ordinal() as i32 - g.ordinal() as i32).unsigned_abs() as usize;
    }
    let f1 = |k: usize| {
        let denom = pred_count[k] + gold_count[k];
        if denom == 0 {
            0.0
        } else {
            2.0 * tp[k] as f64 / denom as f64
        }
    };
    let n = preds.len() as f64;
    Ok(ClassifierReport {
        macro_f1: (0..6).map(f1).sum::<f64>() / 6.0,
        micro_f1: tp.iter().sum::<usize>() as f64 / n,
        mae: abs_err as f64 / n,
    })
}
