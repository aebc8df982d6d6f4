//! Evidence retrieval for one judged claim: BM25 scores, top-K selection in
//! each mode, and F1 against the annotated paragraphs.
//!
//!     cargo run --example bm25_retrieval -- [CLAIM_ID]

use claimdecomp::codec::question_to_statements;
use claimdecomp::dataset::{parse_dataset, Strictness};
use claimdecomp::retrieval::{evaluate_retrieval, retrieve, Bm25Scorer, GoldScope, Hypothesis, JudgedClaim, Mode, Scorer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let wanted = std::env::args().nth(1).unwrap_or_else(|| "c01".into());
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/sample.jsonl"))?;
    let records = parse_dataset(text.as_bytes(), Strictness::Strict)?.records;
    let record = records.iter().find(|r| r.id == wanted).ok_or("no such claim")?;
    let judged = JudgedClaim::new(record).ok_or("claim has no paragraph judgments")?;

    let hypotheses: Vec<Hypothesis> = record.annotations[judged.annotation_index]
        .subquestions
        .iter()
        .map(|q| match question_to_statements(&q.text) {
            Ok(pair) => Hypothesis::from(pair),
            Err(_) => Hypothesis { affirmative: q.text.clone(), negated: None },
        })
        .collect();
    println!("claim: {}", record.claim);
    for h in &hypotheses {
        println!("  + {}\n  - {}", h.affirmative, h.negated.as_deref().unwrap_or("(no negation)"));
    }

    let scorer = Bm25Scorer::default();
    let affirmatives: Vec<String> = hypotheses.iter().map(|h| h.affirmative.clone()).collect();
    let m = scorer.score(&record.article_paragraphs, &affirmatives)?;
    for (i, p) in record.article_paragraphs.iter().enumerate() {
        println!("{i}: max {:6.3}  {p}", m.row_max(i));
    }

    let gold = judged.claim_gold();
    let k = gold.relevant().len();
    // Hypotheses without a negation cannot take part in refute scoring.
    let negatable: Vec<Hypothesis> = hypotheses.iter().filter(|h| h.negated.is_some()).cloned().collect();
    for mode in [Mode::Support, Mode::Refute, Mode::Merged] {
        let hs = if mode == Mode::Support { &hypotheses } else { &negatable };
        if hs.is_empty() {
            println!("{:<8} no negatable hypotheses", mode.name());
            continue;
        }
        let r = retrieve(&record.article_paragraphs, hs, mode, &scorer, k)?;
        let g = gold.for_mode(mode, GoldScope::ByMode);
        println!("{:<8} k={k} selected {:?} gold {:?} F1 {:.3}", mode.name(), r.selected, g, evaluate_retrieval(&r.selected, &g));
    }
    Ok(())
}
