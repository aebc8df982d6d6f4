use std::collections::HashMap;

use serde::Serialize;

use super::MetricError;
use crate::tokenize::tokenize;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram precision over token lists.
pub fn ngram_precision(candidate: &[String], reference: &[String], n: usize) -> f64 {
    assert!(n >= 1, "n-gram order must be positive");
    if candidate.len() < n {
        log::warn!("candidate has {} tokens, fewer than n = {n}; precision taken as 0", candidate.len());
        return 0.0;
    }
    let cand = ngram_counts(candidate, n);
    let refr = ngram_counts(reference, n);
    let overlap: usize = cand.iter().map(|(g, &c)| c.min(refr.get(g).copied().unwrap_or(0))).sum();
    overlap as f64 / (candidate.len() + 1 - n) as f64
}

/// Share of the candidate's n-grams (clipped) that also occur in the reference.
pub fn rouge_n_precision(candidate: &str, reference: &str, n: usize) -> f64 {
    ngram_precision(&tokenize(candidate), &tokenize(reference), n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RougeL {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Length of the longest common subsequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l_tokens(candidate: &[String], reference: &[String]) -> Result<RougeL, MetricError> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptyText);
    }
    let lcs = lcs_len(candidate, reference) as f64;
    let precision = lcs / candidate.len() as f64;
    let recall = lcs / reference.len() as f64;
    let f1 = if lcs == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(RougeL { precision, recall, f1 })
}

/// LCS-based precision, recall and F1 of `candidate` against `reference`.
pub fn rouge_l(candidate: &str, reference: &str) -> Result<RougeL, MetricError> {
    rouge_l_tokens(&tokenize(candidate), &tokenize(reference))
}

/// Bag-of-tokens F1; 1 when both texts are empty, 0 when only one is.
pub fn token_f1(candidate: &str, reference: &str) -> f64 {
    let (c, r) = (tokenize(candidate), tokenize(reference));
    if c.is_empty() || r.is_empty() {
        return if c.is_empty() && r.is_empty() { 1.0 } else { 0.0 };
    }
    let cc = ngram_counts(&c, 1);
    let rc = ngram_counts(&r, 1);
    let common: usize = cc.iter().map(|(g, &n)| n.min(rc.get(g).copied().unwrap_or(0))).sum();
    if common == 0 {
        return 0.0;
    }
    let p = common as f64 / c.len() as f64;
    let rcl = common as f64 / r.len() as f64;
    2.0 * p * rcl / (p + rcl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unigram_precision() {
        assert_eq!(rouge_n_precision("a b c", "a c d", 1), 2.0 / 3.0);
        assert_eq!(rouge_n_precision("Same text here", "same text here", 2), 1.0);
        assert_eq!(rouge_n_precision("x y", "z w", 1), 0.0);
        assert_eq!(rouge_n_precision("x", "x", 2), 0.0);
    }

    #[test]
    fn clipping() {
        // "a a a" vs "a": only one "a" can be matched.
        assert_eq!(rouge_n_precision("a a a", "a", 1), 1.0 / 3.0);
    }

    #[test]
    fn rouge_l_cases() {
        let r = rouge_l("a b", "b a").unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.5, 0.5, 0.5));
        let same = rouge_l("Is it?", "is it ?").unwrap();
        assert_eq!((same.precision, same.recall, same.f1), (1.0, 1.0, 1.0));
        assert_eq!(rouge_l("", "a"), Err(MetricError::EmptyText));
        assert_eq!(rouge_l("x", "y").unwrap().f1, 0.0);
    }

    #[test]
    fn dropped_quantifier_pair() {
        let r = rouge_l(
            "Are all students in Georgia required to attend chronically failing schools?",
            "Are students in Georgia required to attend chronically failing schools?",
        )
        .unwrap();
        // 12 vs 11 tokens, LCS 11: F1 = 22/23.
        assert!((r.f1 - 22.0 / 23.0).abs() < 1e-12);
        assert!((r.f1 - 0.95).abs() <= 0.01);
    }

    #[test]
    fn token_f1_cases() {
        assert_eq!(token_f1("a b", "a b"), 1.0);
        assert_eq!(token_f1("a b c d", "a b"), 2.0 / 3.0);
        assert_eq!(token_f1("", ""), 1.0);
        assert_eq!(token_f1("a", ""), 0.0);
    }

    proptest! {
        #[test]
        fn self_precision_is_one(words in proptest::collection::vec("[a-z]{1,6}", 2..10)) {
            let s = words.join(" ");
            prop_assert_eq!(rouge_n_precision(&s, &s, 1), 1.0);
            prop_assert_eq!(rouge_n_precision(&s, &s, 2), 1.0);
        }

        #[test]
        fn metrics_in_unit_interval(a in "[a-c ]{1,20}", b in "[a-c ]{1,20}") {
            for n in 1..=2 {
                let p = rouge_n_precision(&a, &b, n);
                prop_assert!((0.0..=1.0).contains(&p));
            }
            if let Ok(r) = rouge_l(&a, &b) {
                prop_assert!((0.0..=1.0).contains(&r.f1));
            }
            prop_assert!((0.0..=1.0).contains(&token_f1(&a, &b)));
        }
    }
}
