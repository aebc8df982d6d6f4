//! Comparing a generated question set with a reference set through a
//! maximum-weight one-to-one alignment.
//!
//!     cargo run --example set_matching

use claimdecomp::evalkit::{hungarian_match, rouge_l, set_similarity, similarity_matrix, SimilaritySpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let generated = [
        "Did Biden propose banning fracking?",
        "Is fracking mostly on private land?",
        "Would a ban cost jobs?",
    ];
    let reference = [
        "Did Joe Biden propose a nationwide fracking ban?",
        "Is most fracking done on private land?",
    ];
    for spec in [SimilaritySpec::Rouge1Precision, SimilaritySpec::Rouge2Precision, SimilaritySpec::RougeLF1, SimilaritySpec::TokenF1] {
        let m = similarity_matrix(&generated, &reference, &spec)?;
        let matching = hungarian_match(&m);
        println!("{:<9} mean {:.3} pairs {:?}", spec.name(), set_similarity(&generated, &reference, &spec)?, matching.pairs);
    }

    // Scores from any external model, e.g. an embedding similarity.
    let external = SimilaritySpec::ExternalMatrix(vec![vec![0.91, 0.40], vec![0.35, 0.88], vec![0.20, 0.30]]);
    println!("external  mean {:.3}", set_similarity(&generated, &reference, &external)?);

    // One word changes the meaning but barely moves ROUGE-L.
    let r = rouge_l(
        "Are all students in Georgia required to attend chronically failing schools?",
        "Are students in Georgia required to attend chronically failing schools?",
    )?;
    println!("ROUGE-L P {:.3} R {:.3} F {:.3}", r.precision, r.recall, r.f1);
    Ok(())
}
