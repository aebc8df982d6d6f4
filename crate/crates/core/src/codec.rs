//! Question-generation templates, exact-match deduplication, and
//! question-to-statement conversion.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ClaimContext;
use crate::protocol::{ProtocolClient, ProtocolError};

/// Separator literal between template fields and between generated questions.
pub const SEPARATOR: &str = "[SEP]";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("question count must be at least 1")]
    ZeroCount,
    #[error("question {index} contains the separator literal `{SEPARATOR}`")]
    SeparatorInQuestion { index: usize },
    #[error("expected {expected} questions, found {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("segment {index} of the generated output is empty")]
    EmptySegment { index: usize },
}

/// Renders the context as `speaker | date | venue`, empty fields left empty.
pub fn render_context(context: &ClaimContext) -> String {
    let date = context.date.map(|d| d.format("%Y-%m-%d").to_string()).unwrap_or_default();
    format!("{} | {} | {}", context.speaker, date, context.venue)
}

/// Model input `<n> [SEP] <claim> [SEP] <speaker> | <date> | <venue>`.
pub fn encode_qg_multiple(n: usize, claim: &str, context: &ClaimContext) -> Result<String, CodecError> {
    if n == 0 {
        return Err(CodecError::ZeroCount);
    }
    Ok(format!("{n} {SEPARATOR} {claim} {SEPARATOR} {}", render_context(context)))
}

/// Target sequence: the questions joined by ` [SEP] `, in the given order.
pub fn encode_qg_multiple_target<S: AsRef<str>>(questions: &[S]) -> Result<String, CodecError> {
    if questions.is_empty() {
        return Err(CodecError::ZeroCount);
    }
    if let Some(index) = questions.iter().position(|q| q.as_ref().contains(SEPARATOR)) {
        return Err(CodecError::SeparatorInQuestion { index });
    }
    Ok(questions.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(&format!(" {SEPARATOR} ")))
}

/// Splits generated output back into exactly `expected_n` questions.
pub fn parse_qg_multiple(output: &str, expected_n: usize) -> Result<Vec<String>, CodecError> {
    let segments: Vec<String> = output.split(SEPARATOR).map(|s| s.trim().to_string()).collect();
    if let Some(index) = segments.iter().position(String::is_empty) {
        return Err(CodecError::EmptySegment { index });
    }
    if segments.len() != expected_n {
        return Err(CodecError::CountMismatch { expected: expected_n, found: segments.len() });
    }
    Ok(segments)
}

/// One training pair for the multiple-question generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QgMultipleExample {
    pub n: usize,
    pub claim: String,
    pub context: ClaimContext,
    pub questions: Vec<String>,
}

impl QgMultipleExample {
    pub fn new(claim: impl Into<String>, context: ClaimContext, questions: Vec<String>) -> Result<Self, CodecError> {
        encode_qg_multiple_target(&questions)?;
        Ok(QgMultipleExample { n: questions.len(), claim: claim.into(), context, questions })
    }

    pub fn input(&self) -> String {
        encode_qg_multiple(self.n, &self.claim, &self.context).expect("n >= 1 by construction")
    }

    pub fn target(&self) -> String {
        encode_qg_multiple_target(&self.questions).expect("validated at construction")
    }
}

/// Drops later byte-identical repeats, keeping first occurrences in order.
pub fn dedup_exact<S: AsRef<str>>(questions: &[S]) -> Vec<String> {
    let mut seen = HashSet::new();
    questions
        .iter()
        .map(AsRef::as_ref)
        .filter(|q| seen.insert(*q))
        .map(String::from)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    RuleBased,
    External,
}

/// Declarative form of a yes-no question and its negation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementPair {
    pub affirmative: String,
    pub negated: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConversionError {
    #[error("cannot convert `{question}` by rule: {reason}")]
    Unconvertible { question: String, reason: &'static str },
}

#[derive(Debug, Error)]
pub enum ExternalConversionError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("converter returned a statement ending in `?`: `{0}`")]
    Interrogative(String),
}

const AUXILIARIES: &[&str] = &[
    "is", "are", "was", "were", "has", "have", "had", "will", "can", "could", "should", "would",
];
const BE: &[&str] = &["is", "are", "was", "were"];
const HAVE: &[&str] = &["has", "have", "had"];
const DO_SUPPORT: &[&str] = &["do", "does", "did"];
const PRONOUNS: &[&str] = &["it", "there", "he", "she", "they", "we", "you", "i"];
const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "any", "all", "some", "many", "most", "more",
    "few", "several", "each", "every", "no", "his", "her", "its", "their", "our", "my", "your", "both",
    "either", "neither", "much", "less", "fewer", "other", "another",
];
const PREPOSITIONS: &[&str] = &[
    "in", "on", "at", "for", "to", "from", "by", "with", "about", "of", "than", "as", "into", "over",
    "under", "above", "below", "near", "behind", "beyond", "since", "during", "after", "before", "between", "among", "against", "through", "per",
    "across", "within", "without", "like",
];
const CONNECTORS: &[&str] = &["of", "and", "the", "for", "&"];
const IRREGULAR_PARTICIPLES: &[&str] = &[
    "paid", "made", "done", "been", "given", "taken", "seen", "known", "said", "spent", "cut", "put",
    "held", "built", "sold", "told", "found", "left", "lost", "won", "begun", "grown", "shown",
    "written", "chosen", "driven", "brought", "bought", "caught", "taught", "thought", "kept", "sent",
];

fn bare(word: &str) -> String {
    word.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

fn is_capitalized(word: &str) -> bool {
    word.chars().next().is_some_and(char::is_uppercase)
}

fn is_participle(word: &str) -> bool {
    let w = bare(word);
    (w.ends_with("ed") && w.len() > 3) || IRREGULAR_PARTICIPLES.contains(&w.as_str())
}

fn is_verbish(word: &str) -> bool {
    let w = bare(word);
    (w.ends_with("ing") && w.len() > 4) || is_participle(word)
}

fn is_adverb(word: &str) -> bool {
    let w = bare(word);
    w.ends_with("ly") && w.len() > 3
}

fn is_determiner(word: &str) -> bool {
    DETERMINERS.contains(&bare(word).as_str())
}

fn is_preposition(word: &str) -> bool {
    PREPOSITIONS.contains(&bare(word).as_str())
}

fn breaks_noun_run(word: &str) -> bool {
    let w = bare(word);
    is_preposition(word)
        || is_determiner(word)
        || w == "not"
        || is_adverb(word)
        || is_verbish(word)
        || AUXILIARIES.contains(&w.as_str())
}

fn is_possessive(word: &str) -> bool {
    is_capitalized(word) && (word.ends_with("'s") || word.ends_with("\u{2019}s"))
}

/// `rest[i]` is a comparative: "larger than".
fn comparative_at(rest: &[&str], i: usize) -> bool {
    rest.get(i + 1).is_some_and(|n| bare(n) == "than")
}

/// Subject boundary for perfect questions: everything before the first
/// participle, minus adverbs directly in front of it.
fn perfect_subject_len(rest: &[&str]) -> Option<usize> {
    let mut end = rest.iter().position(|w| is_participle(w))?;
    while end > 1 && is_adverb(rest[end - 1]) && !is_capitalized(rest[end - 1]) {
        end -= 1;
    }
    (end > 0).then_some(end)
}

/// Number of words (from the start of `rest`) forming the subject, or `None`
/// when no confident subject boundary exists.
fn subject_len(aux: &str, rest: &[&str]) -> Option<usize> {
    if HAVE.contains(&aux) {
        return perfect_subject_len(rest);
    }
    let copula = BE.contains(&aux);
    let first = bare(rest[0]);
    let head = if PRONOUNS.contains(&first.as_str()) {
        1
    } else if is_determiner(rest[0]) || is_possessive(rest[0]) || rest[0].starts_with(|c: char| c.is_ascii_digit()) {
        // After a modal the bare verb is indistinguishable from a noun.
        if !copula {
            return None;
        }
        // Determiner (or number) plus the noun run after it; the first word after
        // a determiner always belongs to the subject.
        let mut end = 1;
        if end < rest.len() - 1 {
            end += 1;
            // "most of the new jobs": a determiner after a preposition continues the run.
            while end < rest.len() - 1
                && (!breaks_noun_run(rest[end]) || (is_determiner(rest[end]) && is_preposition(rest[end - 1])))
                && !comparative_at(rest, end)
            {
                end += 1;
            }
        }
        end
    } else if is_capitalized(rest[0]) {
        let mut end = 1;
        while end < rest.len() {
            let w = rest[end];
            if is_capitalized(w) {
                end += 1;
            } else if CONNECTORS.contains(&bare(w).as_str()) && rest.get(end + 1).is_some_and(|n| is_capitalized(n)) {
                end += 2;
            } else {
                break;
            }
        }
        // A proper noun used as a modifier: "Wisconsin employment | above ...".
        if copula {
            let mut ext = end;
            while ext < rest.len() - 1 && !breaks_noun_run(rest[ext]) && !comparative_at(rest, ext) {
                ext += 1;
            }
            if ext < rest.len() - 1 && ext > end && breaks_noun_run(rest[ext]) {
                end = ext;
            }
        }
        // Leave something for the predicate ("Is X Y?" -> "X is Y.").
        if end >= rest.len() {
            1
        } else {
            end
        }
    } else {
        return None;
    };
    // A prepositional phrase can still belong to the subject when the
    // predicate starts later: "all students in Georgia | required to ...",
    // "the rate for children | higher than ...", "the rate for Black Americans
    // | the lowest ...".
    if copula && head < rest.len() && is_preposition(rest[head]) && !PRONOUNS.contains(&first.as_str()) {
        for j in head + 1..rest.len() {
            let ends_here = (j > head + 1 && is_participle(rest[j]))
                || comparative_at(rest, j)
                || (j > head + 1 && is_determiner(rest[j]) && !is_preposition(rest[j - 1]));
            if ends_here {
                return Some(j);
            }
        }
        // "the number of insured people | at a record high"
        if bare(rest[head]) == "of" {
            let next = (head + 2..rest.len()).find(|&j| is_preposition(rest[j]) && !is_preposition(rest[j - 1]));
            if next.is_some() {
                return next;
            }
        }
    }
    (head < rest.len()).then_some(head)
}

fn capitalize_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Rule-based conversion: the fronted auxiliary moves back after the subject
/// chunk and "not" follows it in the negation. Do-support questions and
/// questions without a confident subject boundary are refused.
pub fn question_to_statements(question: &str) -> Result<StatementPair, ConversionError> {
    let refuse = |reason| Err(ConversionError::Unconvertible { question: question.to_string(), reason });
    let trimmed = question.trim();
    let Some(body) = trimmed.strip_suffix('?') else {
        return refuse("not a question");
    };
    let words: Vec<&str> = body.split_whitespace().collect();
    let Some(first) = words.first() else {
        return refuse("empty question");
    };
    let aux = first.to_lowercase();
    if DO_SUPPORT.contains(&aux.as_str()) {
        return refuse("do-support requires verb re-inflection");
    }
    if !AUXILIARIES.contains(&aux.as_str()) {
        return refuse("question does not start with an auxiliary");
    }
    let rest = &words[1..];
    if rest.len() < 2 {
        return refuse("too short to split into subject and predicate");
    }
    let Some(split) = subject_len(&aux, rest) else {
        return refuse("no recognizable subject");
    };
    if bare(rest[split]) == "of" {
        return refuse("no recognizable subject");
    }
    let subject = capitalize_first(&rest[..split].join(" "));
    let predicate = rest[split..].join(" ");
    Ok(StatementPair {
        affirmative: format!("{subject} {aux} {predicate}."),
        negated: format!("{subject} {aux} not {predicate}."),
        provenance: Provenance::RuleBased,
    })
}

/// Asks an external converter for the pair and returns it verbatim.
pub fn convert_via_external(question: &str, client: &mut ProtocolClient) -> Result<StatementPair, ExternalConversionError> {
    let (affirmative, negated) = client.convert(question)?;
    for s in [&affirmative, &negated] {
        if s.trim_end().ends_with('?') {
            return Err(ExternalConversionError::Interrogative(s.clone()));
        }
    }
    Ok(StatementPair { affirmative, negated, provenance: Provenance::External })
}
