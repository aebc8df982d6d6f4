//! Turning yes-no questions into a statement and its negation, as retrieval
//! hypotheses.
//!
//!     cargo run --example statement_conversion -- ["Is the question here?" ...]

use claimdecomp::codec::question_to_statements;

fn main() {
    let mut questions: Vec<String> = std::env::args().skip(1).collect();
    if questions.is_empty() {
        questions = [
            "Are all students in Georgia required to attend chronically failing schools?",
            "Is the unemployment rate for Black Americans the lowest on record?",
            "Has Wisconsin added jobs since the recession?",
            "Were most of the new jobs part-time?",
            "Did the governor veto the bill?",
        ]
        .map(String::from)
        .to_vec();
    }
    for q in &questions {
        match question_to_statements(q) {
            Ok(p) => println!("{q}\n  + {}\n  - {}", p.affirmative, p.negated),
            Err(e) => println!("{q}\n  ! {e} (an external converter can cover this)"),
        }
    }
}
