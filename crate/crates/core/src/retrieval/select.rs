use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{RetrievalError, ScoreMatrix, Scorer};
use crate::codec::StatementPair;

/// Which hypotheses drive the ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Affirmative statements.
    Support,
    /// Negated statements.
    Refute,
    /// Best of support and refute per paragraph.
    Merged,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "support" => Ok(Mode::Support),
            "refute" => Ok(Mode::Refute),
            "merged" => Ok(Mode::Merged),
            other => Err(format!("unknown mode `{other}` (support, refute, merged)")),
        }
    }
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Support => "support",
            Mode::Refute => "refute",
            Mode::Merged => "merged",
        }
    }
}

/// A hypothesis with an optional negated form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub affirmative: String,
    pub negated: Option<String>,
}

impl From<StatementPair> for Hypothesis {
    fn from(p: StatementPair) -> Self {
        Hypothesis { affirmative: p.affirmative, negated: Some(p.negated) }
    }
}

impl From<&StatementPair> for Hypothesis {
    fn from(p: &StatementPair) -> Self {
        Hypothesis { affirmative: p.affirmative.clone(), negated: Some(p.negated.clone()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RetrievalResult {
    pub mode: Mode,
    pub selected: BTreeSet<usize>,
    pub k: usize,
}

/// Indices of the `k` largest scores; lower index wins ties.
pub fn top_k_indices(scores: &[f64], k: usize) -> Result<BTreeSet<usize>, RetrievalError> {
    if k > scores.len() {
        return Err(RetrievalError::KTooLarge { k, paragraphs: scores.len() });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(order.into_iter().take(k).collect())
}

/// Top-`k` paragraphs ranked by their best score over all hypotheses.
pub fn select_topk(matrix: &ScoreMatrix, k: usize) -> Result<BTreeSet<usize>, RetrievalError> {
    top_k_indices(&matrix.row_maxima(), k)
}

/// Selection from precomputed matrices. `support` scores the affirmative
/// hypotheses, `refute` the negated ones; merged mode ranks each paragraph by
/// the larger of its two row maxima.
pub fn retrieve_from_matrices(
    support: Option<&ScoreMatrix>,
    refute: Option<&ScoreMatrix>,
    mode: Mode,
    k: usize,
) -> Result<RetrievalResult, RetrievalError> {
    fn need<'m>(m: Option<&'m ScoreMatrix>, which: &'static str) -> Result<&'m ScoreMatrix, RetrievalError> {
        m.ok_or(RetrievalError::MissingMatrix(which))
    }
    let selected = match mode {
        Mode::Support => select_topk(need(support, "support")?, k)?,
        Mode::Refute => select_topk(need(refute, "refute")?, k)?,
        Mode::Merged => {
            let (s, r) = (need(support, "support")?, need(refute, "refute")?);
            if s.rows() != r.rows() {
                return Err(RetrievalError::Dimension { rows: s.rows(), cols: r.cols(), found: r.rows() });
            }
            let merged: Vec<f64> = s.row_maxima().into_iter().zip(r.row_maxima()).map(|(a, b)| a.max(b)).collect();
            top_k_indices(&merged, k)?
        }
    };
    Ok(RetrievalResult { mode, selected, k })
}

/// Scores `hypotheses` against `paragraphs` with `scorer` and selects the top `k`.
pub fn retrieve(
    paragraphs: &[String],
    hypotheses: &[Hypothesis],
    mode: Mode,
    scorer: &dyn Scorer,
    k: usize,
) -> Result<RetrievalResult, RetrievalError> {
    let support = match mode {
        Mode::Support | Mode::Merged => {
            let hs: Vec<String> = hypotheses.iter().map(|h| h.affirmative.clone()).collect();
            Some(scorer.score(paragraphs, &hs)?)
        }
        Mode::Refute => None,
    };
    let refute = match mode {
        Mode::Refute | Mode::Merged => {
            let hs = hypotheses
                .iter()
                .enumerate()
                .map(|(i, h)| h.negated.clone().ok_or(RetrievalError::MissingNegation { hypothesis: i }))
                .collect::<Result<Vec<_>, _>>()?;
            Some(scorer.score(paragraphs, &hs)?)
        }
        Mode::Support => None,
    };
    retrieve_from_matrices(support.as_ref(), refute.as_ref(), mode, k)
}

/// Overlap counts, poolable across claims.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct F1Counts {
    pub true_positives: usize,
    pub selected: usize,
    pub gold: usize,
}

impl F1Counts {
    pub fn new(selected: &BTreeSet<usize>, gold: &BTreeSet<usize>) -> Self {
        F1Counts { true_positives: selected.intersection(gold).count(), selected: selected.len(), gold: gold.len() }
    }

    pub fn add(&mut self, other: F1Counts) {
        self.true_positives += other.true_positives;
        self.selected += other.selected;
        self.gold += other.gold;
    }

    /// Harmonic mean of precision and recall; 1 when both sets are empty.
    pub fn f1(&self) -> f64 {
        match (self.selected, self.gold) {
            (0, 0) => 1.0,
            (0, _) | (_, 0) => 0.0,
            (s, g) => 2.0 * self.true_positives as f64 / (s + g) as f64,
        }
    }
}

/// F1 of `selected` against `gold`.
pub fn evaluate_retrieval(selected: &BTreeSet<usize>, gold: &BTreeSet<usize>) -> f64 {
    F1Counts::new(selected, gold).f1()
}
