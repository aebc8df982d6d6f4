//! Toolkit for claim decomposition in fact-checking.
//!
//! Claims come with yes-no subquestions, answers, and verification articles.
//! The crate derives veracity labels from subquestion answers
//! ([`aggregation`]), retrieves evidence paragraphs from score matrices
//! ([`retrieval`]), and scores decompositions and annotations with
//! matching-based metrics and agreement statistics ([`evalkit`]).
//! [`codec`] holds the question-generation templates and statement
//! conversion; [`protocol`] talks to external scorer/converter processes.

pub mod aggregation;
pub mod cli;
pub mod codec;
pub mod dataset;
pub mod evalkit;
pub mod model;
pub mod protocol;
pub mod retrieval;
pub mod stats;
pub mod tokenize;

pub use model::{Annotation, Answer, ClaimContext, ClaimRecord, Source, Subquestion, VeracityLabel};
