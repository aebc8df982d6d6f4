//! Entailment scores from an external process speaking the line protocol
//! (`{"op":"hello"}`, `{"op":"entail",...}`, `{"op":"convert",...}`).
//!
//!     cargo run --example external_scorer -- ["COMMAND"]
//!
//! Without a command, the shell mock used by the tests is started.

use std::time::Duration;

use claimdecomp::codec::convert_via_external;
use claimdecomp::protocol::ProtocolClient;
use claimdecomp::retrieval::{retrieve, ExternalScorer, Hypothesis, Mode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let command = std::env::args()
        .nth(1)
        .unwrap_or_else(|| format!("sh {}/tests/fixtures/mock_adapter.sh", env!("CARGO_MANIFEST_DIR")));
    let timeout = Duration::from_secs(30);

    let mut client = ProtocolClient::spawn(&command, timeout)?;
    let info = client.info().clone();
    println!("adapter {} {} (bounded: {})", info.name, info.version, info.bounded);
    let pair = convert_via_external("Are any votes illegally counted in the election?", &mut client)?;
    println!("  + {}\n  - {}", pair.affirmative, pair.negated);

    let paragraphs: Vec<String> = [
        "Officials found no evidence that votes were counted illegally.",
        "A MATCH-worthy audit confirmed a handful of ballots were counted twice.",
        "Turnout reached a record high.",
    ]
    .map(String::from)
    .to_vec();
    let scorer = ExternalScorer::spawn(&command, 2, timeout)?;
    let hyps = vec![Hypothesis::from(pair)];
    for mode in [Mode::Support, Mode::Refute, Mode::Merged] {
        let r = retrieve(&paragraphs, &hyps, mode, &scorer, 1)?;
        println!("{:<8} selects {:?}", mode.name(), r.selected);
    }
    Ok(())
}
