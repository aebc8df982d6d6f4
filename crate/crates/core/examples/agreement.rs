//! Annotator agreement: unmatched-question rates between two decompositions
//! and chance-corrected kappa for categorical labels.
//!
//!     cargo run --example agreement

use claimdecomp::evalkit::{cohen_kappa, fleiss_kappa, unmatched_fraction, RatingTable};
use claimdecomp::retrieval::human_agreement;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Per question: did the other annotator's set lack an equivalent?
    let u = unmatched_fraction(&[false, true, true], &[false])?;
    println!("unmatched: all {:.2}, more-questions side {:.2}, fewer-questions side {:.2}", u.all, u.more_qs, u.fewer_qs);

    let a = ["support", "context", "context", "refute", "context", "support"];
    let b = ["support", "context", "support", "refute", "context", "context"];
    println!("cohen kappa {:.3}", cohen_kappa(&a, &b)?);

    let rows = [
        ["support", "support", "support"],
        ["context", "context", "support"],
        ["refute", "refute", "context"],
        ["context", "context", "context"],
    ];
    let table = RatingTable::new(
        rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
        Some(vec!["context".into(), "support".into(), "refute".into()]),
    )?;
    println!("fleiss kappa {:.3} over {} items x {} raters", fleiss_kappa(&table)?, table.items(), table.raters());

    // Evidence paragraphs marked relevant by three annotators for one claim.
    let claim = vec![vec![true, false, true, false], vec![true, false, false, false], vec![true, true, true, false]];
    println!("human retrieval F1 {:.3}", human_agreement(&[claim])?);
    Ok(())
}
