//! Corpus overview, evidence label statistics and question-type overlap for
//! a dataset file.
//!
//!     cargo run --example dataset_stats -- [DATASET]

use std::fs::File;
use std::io::BufReader;

use claimdecomp::dataset::{parse_any, Strictness};
use claimdecomp::evalkit::{overlap_by_qtype, OverlapAveraging};
use claimdecomp::retrieval::paragraph_label_stats;
use claimdecomp::stats::compute_stats;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/sample.jsonl").into());
    let parsed = parse_any(BufReader::new(File::open(&path)?), Strictness::Lenient)?;
    for d in &parsed.dropped {
        eprintln!("skipped {d}");
    }
    let records = parsed.records;

    let s = compute_stats(&records)?;
    println!("{} claims, {:.1} tokens per claim, {:.2} subquestions per annotation", s.n_claims, s.avg_tokens_per_claim, s.avg_subquestions_per_annotation);
    for (answer, pct) in &s.answer_pct {
        println!("  {:<8} {pct:5.1}%", answer.name());
    }
    for (label, pct) in &s.label_dist {
        println!("  {:<14} {pct:5.1}%", label.name());
    }

    match paragraph_label_stats(&records) {
        Ok(p) => println!(
            "evidence: {:.1} paragraphs per claim; per example {:.1}% support, {:.1}% refute; kappa {:?}",
            p.avg_paragraphs, p.per_example.support, p.per_example.refute, p.fleiss_kappa
        ),
        Err(e) => println!("evidence: {e}"),
    }

    let t = overlap_by_qtype(&records, OverlapAveraging::PerQuestion);
    for (name, row) in [("literal", t.literal), ("implied", t.implied)] {
        println!("{name}: {} questions, R1-P {:.3}, R2-P {:.3}, RL-P {:.3}", row.n_questions, row.rouge1_p, row.rouge2_p, row.rougel_p);
    }
    Ok(())
}
