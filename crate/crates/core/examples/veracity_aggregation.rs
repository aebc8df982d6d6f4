//! Veracity labels from subquestion answers, compared with the random and
//! majority baselines.
//!
//!     cargo run --example veracity_aggregation

use claimdecomp::aggregation::{
    aggregate_veracity, baseline, evaluate_classifier, predict_claim, score_to_label, AnswerVector, BaselineKind,
    UnknownPolicy,
};
use claimdecomp::dataset::{parse_dataset, Strictness};
use claimdecomp::{Answer, VeracityLabel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    use Answer::*;
    for answers in [vec![Yes, No, Yes, No], vec![Yes, Yes, Unknown], vec![No, No, No], vec![Yes; 4]] {
        let v = AnswerVector::new(answers.clone())?;
        let count = aggregate_veracity(&v, UnknownPolicy::Count)?;
        let exclude = aggregate_veracity(&v, UnknownPolicy::Exclude)?;
        println!("{:<40} {count:.3} -> {:<13} (unknowns excluded: {})", format!("{answers:?}"), score_to_label(count)?, score_to_label(exclude)?);
    }

    // Drop an unrelated question with a relevance mask.
    let masked = AnswerVector::with_mask(vec![Yes, No, No], vec![true, true, false])?;
    println!("masked [yes, no, (no)] -> {}", score_to_label(aggregate_veracity(&masked, UnknownPolicy::Count)?)?);

    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/sample.jsonl"))?;
    let records = parse_dataset(text.as_bytes(), Strictness::Strict)?.records;
    let golds: Vec<VeracityLabel> = records.iter().map(|r| r.gold_label).collect();
    let preds = records
        .iter()
        .map(|r| predict_claim(r, r.larger_annotation().unwrap_or(0), None, UnknownPolicy::Count))
        .collect::<Result<Vec<_>, _>>()?;
    println!("\n{:<22} {:>8} {:>8} {:>6}", "method", "macro-F1", "micro-F1", "MAE");
    let report = |name: &str, p: &[VeracityLabel]| -> Result<(), Box<dyn std::error::Error>> {
        let r = evaluate_classifier(p, &golds)?;
        println!("{name:<22} {:>8.3} {:>8.3} {:>6.3}", r.macro_f1, r.micro_f1, r.mae);
        Ok(())
    };
    for kind in [BaselineKind::RandomUniform, BaselineKind::RandomLabelDist, BaselineKind::MostFrequent] {
        report(&format!("{kind:?}"), &baseline(kind, records.len(), None, 7)?)?;
    }
    report("question aggregation", &preds)
}
