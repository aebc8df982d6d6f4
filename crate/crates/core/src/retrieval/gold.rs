//! Gold evidence derived from paragraph judgments, the label statistics of
//! the evidence annotation, and the random and human reference points.

use std::collections::{BTreeMap, BTreeSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{F1Counts, Mode, RetrievalError};
use crate::evalkit::{fleiss_kappa, RatingTable};
use crate::model::{ClaimRecord, JudgmentLabel, ParagraphJudgment};

/// Per-subquestion paragraph label distribution of the evidence annotation
/// (context, support, refute).
pub const EVIDENCE_LABEL_DIST: [f64; 3] = [0.876, 0.054, 0.080];

/// Strict-majority label, `context` when no label has a majority.
pub fn majority_label(labels: &[JudgmentLabel]) -> JudgmentLabel {
    majority_of(labels, labels.len())
}

/// Strict majority out of `voters`; voters without a label count against
/// every candidate.
fn majority_of(labels: &[JudgmentLabel], voters: usize) -> JudgmentLabel {
    let voters = voters.max(labels.len());
    for candidate in JudgmentLabel::ALL {
        if 2 * labels.iter().filter(|&&l| l == candidate).count() > voters {
            return candidate;
        }
    }
    JudgmentLabel::Context
}

/// Collapses subquestion-level labels of one paragraph to a claim-level
/// label: refute if any subquestion is refuted, else support if any is
/// supported, else context.
pub fn collapse_labels<I: IntoIterator<Item = JudgmentLabel>>(labels: I) -> JudgmentLabel {
    labels.into_iter().fold(JudgmentLabel::Context, |acc, l| match (acc, l) {
        (JudgmentLabel::Refute, _) | (_, JudgmentLabel::Refute) => JudgmentLabel::Refute,
        (JudgmentLabel::Support, _) | (_, JudgmentLabel::Support) => JudgmentLabel::Support,
        _ => JudgmentLabel::Context,
    })
}

/// Gold paragraph sets of one claim (or one subquestion).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GoldSets {
    pub support: BTreeSet<usize>,
    pub refute: BTreeSet<usize>,
}

impl GoldSets {
    pub fn from_labels(labels: &[JudgmentLabel]) -> Self {
        let pick = |want| labels.iter().enumerate().filter(|(_, &l)| l == want).map(|(i, _)| i).collect();
        GoldSets { support: pick(JudgmentLabel::Support), refute: pick(JudgmentLabel::Refute) }
    }

    /// Paragraphs labeled support or refute.
    pub fn relevant(&self) -> BTreeSet<usize> {
        self.support.union(&self.refute).copied().collect()
    }

    pub fn for_mode(&self, mode: Mode, scope: GoldScope) -> BTreeSet<usize> {
        match (scope, mode) {
            (GoldScope::Relevant, _) | (_, Mode::Merged) => self.relevant(),
            (GoldScope::ByMode, Mode::Support) => self.support.clone(),
            (GoldScope::ByMode, Mode::Refute) => self.refute.clone(),
        }
    }
}

/// Which gold set a retrieval mode is scored against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoldScope {
    /// Support mode against support paragraphs, refute against refute, merged against both.
    #[default]
    ByMode,
    /// Every mode against all support-or-refute paragraphs.
    Relevant,
}

/// Judgments of `record` for the decomposition they were collected on.
pub struct JudgedClaim<'a> {
    pub record: &'a ClaimRecord,
    pub annotation_index: usize,
    judgments: Vec<&'a ParagraphJudgment>,
}

impl<'a> JudgedClaim<'a> {
    /// `None` when the record carries no judgments. Judgments for other
    /// decompositions than the first judged one are ignored.
    pub fn new(record: &'a ClaimRecord) -> Option<Self> {
        let all = record.paragraph_judgments.as_ref()?;
        let annotation_index = all.first()?.annotation_index;
        let judgments = all.iter().filter(|j| j.annotation_index == annotation_index).collect();
        Some(JudgedClaim { record, annotation_index, judgments })
    }

    pub fn paragraph_count(&self) -> usize {
        self.record.article_paragraphs.len()
    }

    /// Subquestion indices that received at least one judgment, ascending.
    pub fn judged_subquestions(&self) -> BTreeSet<usize> {
        self.judgments.iter().map(|j| j.subquestion_index).collect()
    }

    /// Annotator ids, sorted.
    pub fn annotators(&self) -> Vec<&'a str> {
        let ids: BTreeSet<&str> = self.judgments.iter().map(|j| j.annotator_id.as_str()).collect();
        ids.into_iter().collect()
    }

    fn votes(&self, subquestion: usize, paragraph: usize) -> Vec<JudgmentLabel> {
        self.judgments
            .iter()
            .filter(|j| j.subquestion_index == subquestion && j.paragraph_index == paragraph)
            .map(|j| j.label)
            .collect()
    }

    /// Majority label of every paragraph for one subquestion. An annotator
    /// with no judgment for a pair does not vote for any label.
    pub fn subquestion_labels(&self, subquestion: usize) -> Vec<JudgmentLabel> {
        let voters = self.annotators().len();
        (0..self.paragraph_count()).map(|p| majority_of(&self.votes(subquestion, p), voters)).collect()
    }

    /// Claim-level label of every paragraph.
    pub fn claim_labels(&self) -> Vec<JudgmentLabel> {
        let subs = self.judged_subquestions();
        let per_sub: Vec<Vec<JudgmentLabel>> = subs.iter().map(|&s| self.subquestion_labels(s)).collect();
        (0..self.paragraph_count()).map(|p| collapse_labels(per_sub.iter().map(|l| l[p]))).collect()
    }

    pub fn claim_gold(&self) -> GoldSets {
        GoldSets::from_labels(&self.claim_labels())
    }

    pub fn subquestion_gold(&self, subquestion: usize) -> GoldSets {
        GoldSets::from_labels(&self.subquestion_labels(subquestion))
    }

    /// Paragraphs one annotator marked support or refute for any subquestion.
    pub fn annotator_relevant(&self, annotator: &str) -> Vec<bool> {
        let mut out = vec![false; self.paragraph_count()];
        for j in self.judgments.iter().filter(|j| j.annotator_id == annotator) {
            if j.label.is_relevant() {
                out[j.paragraph_index] = true;
            }
        }
        out
    }

    /// Labels of every (subquestion, paragraph) item judged by exactly
    /// `raters` annotators, one row per item with raters in sorted-id order.
    fn rating_rows(&self, raters: usize) -> Vec<Vec<JudgmentLabel>> {
        let mut items: BTreeMap<(usize, usize), BTreeMap<&str, JudgmentLabel>> = BTreeMap::new();
        for j in &self.judgments {
            items.entry((j.subquestion_index, j.paragraph_index)).or_default().insert(&j.annotator_id, j.label);
        }
        items
            .into_values()
            .filter(|v| v.len() == raters)
            .map(|v| v.into_values().collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabelShares {
    pub context: f64,
    pub support: f64,
    pub refute: f64,
}

impl LabelShares {
    fn from_counts(counts: [usize; 3]) -> Self {
        let total = counts.iter().sum::<usize>().max(1) as f64;
        LabelShares {
            context: 100.0 * counts[0] as f64 / total,
            support: 100.0 * counts[1] as f64 / total,
            refute: 100.0 * counts[2] as f64 / total,
        }
    }
}

/// Statistics of the evidence-paragraph annotation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParagraphLabelStats {
    pub n_claims: usize,
    pub avg_paragraphs: f64,
    pub per_subquestion: LabelShares,
    pub per_example: LabelShares,
    /// Fleiss' kappa over (subquestion, paragraph) items; `None` when undefined.
    pub fleiss_kappa: Option<f64>,
}

fn label_slot(l: JudgmentLabel) -> usize {
    match l {
        JudgmentLabel::Context => 0,
        JudgmentLabel::Support => 1,
        JudgmentLabel::Refute => 2,
    }
}

pub fn paragraph_label_stats<'a, I>(records: I) -> Result<ParagraphLabelStats, RetrievalError>
where
    I: IntoIterator<Item = &'a ClaimRecord>,
{
    let claims: Vec<JudgedClaim> = records.into_iter().filter_map(JudgedClaim::new).collect();
    if claims.is_empty() {
        return Err(RetrievalError::NoJudgments);
    }
    let mut per_sub = [0usize; 3];
    let mut per_ex = [0usize; 3];
    let mut paragraphs = 0usize;
    // Most common rater count decides which items enter kappa.
    let mut rater_counts: BTreeMap<usize, usize> = BTreeMap::new();
    for c in &claims {
        paragraphs += c.paragraph_count();
        rater_counts.entry(c.annotators().len()).and_modify(|n| *n += 1).or_insert(1);
        for s in c.judged_subquestions() {
            for l in c.subquestion_labels(s) {
                per_sub[label_slot(l)] += 1;
            }
        }
        for l in c.claim_labels() {
            per_ex[label_slot(l)] += 1;
        }
    }
    let raters = rater_counts.iter().max_by_key(|(r, n)| (**n, **r)).map(|(r, _)| *r).unwrap_or(0);
    let rows: Vec<Vec<String>> = claims
        .iter()
        .flat_map(|c| c.rating_rows(raters))
        .map(|row| row.into_iter().map(|l| l.name().to_string()).collect())
        .collect();
    let categories: Vec<String> = JudgmentLabel::ALL.iter().map(|l| l.name().to_string()).collect();
    let fleiss = RatingTable::new(rows, Some(categories)).ok().and_then(|t| fleiss_kappa(&t).ok());
    Ok(ParagraphLabelStats {
        n_claims: claims.len(),
        avg_paragraphs: paragraphs as f64 / claims.len() as f64,
        per_subquestion: LabelShares::from_counts(per_sub),
        per_example: LabelShares::from_counts(per_ex),
        fleiss_kappa: fleiss,
    })
}

/// Random support/refute/context labels, one per paragraph.
/// `dist` is (context, support, refute) weights, normalized before sampling,
/// and defaults to [`EVIDENCE_LABEL_DIST`].
pub fn random_retrieval_baseline(
    paragraph_count: usize,
    dist: Option<[f64; 3]>,
    seed: u64,
) -> Result<Vec<JudgmentLabel>, RetrievalError> {
    let dist = dist.unwrap_or(EVIDENCE_LABEL_DIST);
    let total: f64 = dist.iter().sum();
    if dist.iter().any(|p| !p.is_finite() || *p < 0.0) || total <= 0.0 {
        return Err(RetrievalError::InvalidDistribution(format!("{dist:?}")));
    }
    let index = WeightedIndex::new(dist).map_err(|e| RetrievalError::InvalidDistribution(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..paragraph_count).map(|_| JudgmentLabel::ALL[index.sample(&mut rng)]).collect())
}

/// Paragraphs a label assignment selects under `mode`.
pub fn labels_to_selection(labels: &[JudgmentLabel], mode: Mode) -> BTreeSet<usize> {
    labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| match mode {
            Mode::Support => l == JudgmentLabel::Support,
            Mode::Refute => l == JudgmentLabel::Refute,
            Mode::Merged => l.is_relevant(),
        })
        .map(|(i, _)| i)
        .collect()
}

fn as_set(v: &[bool]) -> BTreeSet<usize> {
    v.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| i).collect()
}

/// Mean over three annotators of the F1 between each annotator's relevant
/// paragraphs and the majority of the other two. Counts are pooled over
/// claims per annotator before taking F1.
///
/// `claims[c][a][p]` says whether annotator `a` marked paragraph `p` of claim `c` relevant.
pub fn human_agreement(claims: &[Vec<Vec<bool>>]) -> Result<f64, RetrievalError> {
    let mut counts = [F1Counts::default(); 3];
    for claim in claims {
        if claim.len() != 3 {
            return Err(RetrievalError::AnnotatorCount(claim.len()));
        }
        let m = claim[0].len();
        if claim.iter().any(|a| a.len() != m) {
            return Err(RetrievalError::Dimension { rows: 3, cols: m, found: claim.iter().map(Vec::len).max().unwrap_or(0) });
        }
        for (a, slot) in counts.iter_mut().enumerate() {
            let others: Vec<usize> = (0..3).filter(|&o| o != a).collect();
            // Two voters agree or tie; ties go to the lower-indexed voter, so
            // the majority is that voter's set.
            let gold = as_set(&claim[others[0]]);
            slot.add(F1Counts::new(&as_set(&claim[a]), &gold));
        }
    }
    Ok(counts.iter().map(F1Counts::f1).sum::<f64>() / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Annotation, Answer, ClaimContext, Source, Subquestion, VeracityLabel};
    use JudgmentLabel::*;

    #[test]
    fn majority_rules() {
        assert_eq!(majority_label(&[Support, Support, Refute]), Support);
        assert_eq!(majority_label(&[Support, Refute, Context]), Context);
        assert_eq!(majority_label(&[]), Context);
        assert_eq!(majority_label(&[Refute]), Refute);
    }

    #[test]
    fn human_agreement_cases() {
        let same = vec![vec![vec![true, false]; 3]];
        assert_eq!(human_agreement(&same).unwrap(), 1.0);
        // A = {0}, B = {0}, C = {1}: F1 1, 1, 0.
        let mixed = vec![vec![vec![true, false], vec![true, false], vec![false, true]]];
        assert!((human_agreement(&mixed).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(matches!(human_agreement(&[vec![vec![true]; 2]]), Err(RetrievalError::AnnotatorCount(2))));
    }

    #[test]
    fn random_baseline() {
        let all_context = random_retrieval_baseline(20, Some([1.0, 0.0, 0.0]), 1).unwrap();
        assert!(all_context.iter().all(|&l| l == Context));
        assert_eq!(random_retrieval_baseline(30, None, 5).unwrap(), random_retrieval_baseline(30, None, 5).unwrap());
        assert!(random_retrieval_baseline(3, Some([0.5, -0.5, 0.5]), 0).is_err());
        assert!(random_retrieval_baseline(3, Some([0.0; 3]), 0).is_err());
        let draws = random_retrieval_baseline(100_000, None, 42).unwrap();
        let total: f64 = EVIDENCE_LABEL_DIST.iter().sum();
        for (slot, weight) in EVIDENCE_LABEL_DIST.iter().enumerate() {
            let want = weight / total;
            let freq = draws.iter().filter(|&&l| label_slot(l) == slot).count() as f64 / 1e5;
            assert!((freq - want).abs() < 0.005, "slot {slot}: {freq}");
        }
    }

    fn judged_record() -> ClaimRecord {
        let j = |a: &str, s, p, label| ParagraphJudgment {
            annotator_id: a.into(),
            annotation_index: 0,
            subquestion_index: s,
            paragraph_index: p,
            label,
        };
        ClaimRecord {
            id: "c".into(),
            claim: "claim".into(),
            context: ClaimContext::default(),
            gold_label: VeracityLabel::False,
            justification: vec![],
            article_paragraphs: vec!["p0".into(), "p1".into(), "p2".into()],
            annotations: vec![Annotation {
                annotator_id: "x".into(),
                subquestions: vec![
                    Subquestion::new("q0?", Answer::Yes, Source::Claim),
                    Subquestion::new("q1?", Answer::No, Source::Claim),
                ],
            }],
            paragraph_judgments: Some(vec![
                j("e1", 0, 0, Support),
                j("e2", 0, 0, Support),
                j("e3", 0, 0, Context),
                j("e1", 1, 1, Refute),
                j("e2", 1, 1, Refute),
                j("e3", 1, 1, Refute),
                j("e1", 1, 0, Refute),
                j("e2", 1, 2, Support),
            ]),
        }
    }

    #[test]
    fn gold_from_judgments() {
        let r = judged_record();
        let c = JudgedClaim::new(&r).unwrap();
        assert_eq!(c.annotators(), vec!["e1", "e2", "e3"]);
        assert_eq!(c.subquestion_labels(0), vec![Support, Context, Context]);
        assert_eq!(c.subquestion_labels(1), vec![Context, Refute, Context]);
        assert_eq!(c.claim_labels(), vec![Support, Refute, Context]);
        let g = c.claim_gold();
        assert_eq!(g.relevant(), [0, 1].into());
        assert_eq!(g.for_mode(Mode::Support, GoldScope::ByMode), [0].into());
        assert_eq!(g.for_mode(Mode::Support, GoldScope::Relevant), [0, 1].into());
        assert_eq!(c.annotator_relevant("e2"), vec![true, true, true]);
        assert_eq!(c.annotator_relevant("e3"), vec![false, true, false]);
    }

    #[test]
    fn label_stats() {
        let r = judged_record();
        let s = paragraph_label_stats([&r]).unwrap();
        assert_eq!(s.n_claims, 1);
        assert_eq!(s.avg_paragraphs, 3.0);
        // 6 (subquestion, paragraph) items: 1 support, 1 refute, 4 context.
        assert!((s.per_subquestion.support - 100.0 / 6.0).abs() < 1e-9);
        assert!((s.per_example.context - 100.0 / 3.0).abs() < 1e-9);
        assert!(s.fleiss_kappa.is_some());
        let mut none = r.clone();
        none.paragraph_judgments = None;
        assert!(matches!(paragraph_label_stats([&none]), Err(RetrievalError::NoJudgments)));
    }

    #[test]
    fn selection_from_labels() {
        let labels = [Context, Support, Refute, Support];
        assert_eq!(labels_to_selection(&labels, Mode::Support), [1, 3].into());
        assert_eq!(labels_to_selection(&labels, Mode::Merged), [1, 2, 3].into());
    }
}
