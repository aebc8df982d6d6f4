//! Input/target strings for a multi-question generator and parsing of its
//! output.
//!
//!     cargo run --example qg_templates

use chrono::NaiveDate;
use claimdecomp::codec::{dedup_exact, parse_qg_multiple, QgMultipleExample};
use claimdecomp::ClaimContext;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let context = ClaimContext {
        speaker: "Joe Biden".into(),
        date: NaiveDate::from_ymd_opt(2020, 10, 22),
        venue: "a presidential debate".into(),
    };
    let ex = QgMultipleExample::new(
        "I have never said I oppose fracking.",
        context,
        vec!["Has Biden said he opposes fracking?".into(), "Does Biden's plan ban new fracking on federal land?".into()],
    )?;
    println!("input:  {}", ex.input());
    println!("target: {}", ex.target());

    // A decoded generation: split on the separator, check the count.
    let generated = "Has Biden said he opposes fracking? [SEP] Did Biden vote against fracking? [SEP] Has Biden said he opposes fracking?";
    let questions = parse_qg_multiple(generated, 3)?;
    println!("parsed {} questions, {} after exact dedup:", questions.len(), dedup_exact(&questions).len());
    for q in dedup_exact(&questions) {
        println!("  {q}");
    }
    if let Err(e) = parse_qg_multiple(generated, 2) {
        println!("expecting 2: {e}");
    }
    Ok(())
}
