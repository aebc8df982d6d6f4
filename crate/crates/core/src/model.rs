//! Domain types for decomposed claims.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// PolitiFact's six-point ordinal truthfulness scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VeracityLabel {
    PantsOnFire = 0,
    False = 1,
    BarelyTrue = 2,
    HalfTrue = 3,
    MostlyTrue = 4,
    True = 5,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown veracity label `{0}` (expected one of pants-on-fire, false, barely-true, half-true, mostly-true, true)")]
pub struct UnknownLabel(pub String);

impl VeracityLabel {
    pub const ALL: [VeracityLabel; 6] = [
        VeracityLabel::PantsOnFire,
        VeracityLabel::False,
        VeracityLabel::BarelyTrue,
        VeracityLabel::HalfTrue,
        VeracityLabel::MostlyTrue,
        VeracityLabel::True,
    ];

    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn from_ordinal(ordinal: u8) -> Option<Self> {
        Self::ALL.get(ordinal as usize).copied()
    }

    /// Canonical lowercase name.
    pub fn name(self) -> &'static str {
        match self {
            VeracityLabel::PantsOnFire => "pants-on-fire",
            VeracityLabel::False => "false",
            VeracityLabel::BarelyTrue => "barely-true",
            VeracityLabel::HalfTrue => "half-true",
            VeracityLabel::MostlyTrue => "mostly-true",
            VeracityLabel::True => "true",
        }
    }

    /// Parses a label name, ignoring case and treating spaces, hyphens and
    /// underscores alike ("Pants on Fire", "half_true", "barely-true").
    pub fn parse(name: &str) -> Result<Self, UnknownLabel> {
        let folded: String = name
            .trim()
            .chars()
            .map(|c| match c {
                ' ' | '_' => '-',
                c => c.to_ascii_lowercase(),
            })
            .collect();
        let folded = folded.trim_matches('-');
        Self::ALL
            .into_iter()
            .find(|l| l.name() == folded)
            .ok_or_else(|| UnknownLabel(name.to_string()))
    }
}

impl fmt::Display for VeracityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VeracityLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for VeracityLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for VeracityLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Self::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Binary answer to a subquestion, or unknown when the justification does not settle it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

impl Answer {
    pub const ALL: [Answer; 3] = [Answer::Yes, Answer::No, Answer::Unknown];

    pub fn name(self) -> &'static str {
        match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::Unknown => "unknown",
        }
    }
}

/// Where the annotator drew the subquestion from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Claim,
    Justification,
}

impl Source {
    pub const ALL: [Source; 2] = [Source::Justification, Source::Claim];

    pub fn name(self) -> &'static str {
        match self {
            Source::Claim => "claim",
            Source::Justification => "justification",
        }
    }
}

/// Reasoning needed to pose an implied subquestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImpliedCategory {
    DomainKnowledge,
    Context,
    ImplicitMeaning,
    StatisticalRigor,
}

/// Literal questions follow from the claim's surface; implied ones need extra knowledge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionType {
    Literal,
    Implied(ImpliedCategory),
}

impl QuestionType {
    pub fn is_literal(self) -> bool {
        matches!(self, QuestionType::Literal)
    }
}

/// Text field a span points into. Justification offsets address the
/// justification paragraphs joined with a single `\n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanField {
    Claim,
    Justification,
}

/// `[field, start, end]` character offsets, end exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span(pub SpanField, pub usize, pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subquestion {
    pub text: String,
    pub answer: Answer,
    pub source: Source,
    #[serde(default)]
    pub spans: Vec<Span>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qtype: Option<QuestionType>,
}

impl Subquestion {
    pub fn new(text: impl Into<String>, answer: Answer, source: Source) -> Self {
        Subquestion { text: text.into(), answer, source, spans: Vec::new(), qtype: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotation {
    pub annotator_id: String,
    pub subquestions: Vec<Subquestion>,
}

impl Annotation {
    pub fn answers(&self) -> Vec<Answer> {
        self.subquestions.iter().map(|q| q.answer).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimContext {
    #[serde(default)]
    pub speaker: String,
    #[serde(default, with = "optional_date")]
    pub date: Option<NaiveDate>,
    #[serde(default)]
    pub venue: String,
}

mod optional_date {
    use chrono::NaiveDate;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(date: &Option<NaiveDate>, s: S) -> Result<S::Ok, S::Error> {
        match date {
            Some(d) => s.serialize_str(&d.format("%Y-%m-%d").to_string()),
            None => s.serialize_str(""),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<NaiveDate>, D::Error> {
        let raw: Option<String> = Option::deserialize(d)?;
        match raw.as_deref().map(str::trim) {
            None | Some("") => Ok(None),
            Some(s) => NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .map(Some)
                .map_err(|e| serde::de::Error::custom(format!("invalid date `{s}`: {e}"))),
        }
    }
}

/// Paragraph label chosen by an evidence annotator for one subquestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JudgmentLabel {
    Context,
    Support,
    Refute,
}

impl JudgmentLabel {
    pub const ALL: [JudgmentLabel; 3] =
        [JudgmentLabel::Context, JudgmentLabel::Support, JudgmentLabel::Refute];

    pub fn name(self) -> &'static str {
        match self {
            JudgmentLabel::Context => "context",
            JudgmentLabel::Support => "support",
            JudgmentLabel::Refute => "refute",
        }
    }

    pub fn is_relevant(self) -> bool {
        !matches!(self, JudgmentLabel::Context)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParagraphJudgment {
    pub annotator_id: String,
    /// Which decomposition the subquestion index refers to.
    #[serde(default)]
    pub annotation_index: usize,
    pub subquestion_index: usize,
    pub paragraph_index: usize,
    pub label: JudgmentLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimRecord {
    pub id: String,
    pub claim: String,
    #[serde(default)]
    pub context: ClaimContext,
    pub gold_label: VeracityLabel,
    #[serde(default)]
    pub justification: Vec<String>,
    #[serde(default)]
    pub article_paragraphs: Vec<String>,
    #[serde(default)]
    pub annotations: Vec<Annotation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paragraph_judgments: Option<Vec<ParagraphJudgment>>,
}

/// A record that violates one of the schema invariants.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("field `{0}` must not be empty")]
    Empty(String),
    #[error("record has {0} annotations; at most 2 are allowed")]
    TooManyAnnotations(usize),
    #[error("`{field}` must end with `?`")]
    MissingQuestionMark { field: String },
    #[error("`{field}` duplicates an earlier subquestion of the same annotation")]
    DuplicateSubquestion { field: String },
    #[error("`{field}` span {start}..{end} exceeds text length {len}")]
    SpanOutOfRange { field: String, start: usize, end: usize, len: usize },
    #[error("`{field}` = {value} is out of range (limit {limit})")]
    IndexOutOfRange { field: String, value: usize, limit: usize },
}

impl ClaimRecord {
    /// Justification paragraphs joined the way span offsets address them.
    pub fn justification_text(&self) -> String {
        self.justification.join("\n")
    }

    /// Checks every invariant that serde cannot express.
    pub fn validate(&self) -> Result<(), RecordError> {
        if self.id.is_empty() {
            return Err(RecordError::Empty("id".into()));
        }
        if self.claim.trim().is_empty() {
            return Err(RecordError::Empty("claim".into()));
        }
        if self.annotations.len() > 2 {
            return Err(RecordError::TooManyAnnotations(self.annotations.len()));
        }
        let claim_len = self.claim.chars().count();
        let just_len = self.justification_text().chars().count();
        for (ai, ann) in self.annotations.iter().enumerate() {
            if ann.subquestions.is_empty() {
                return Err(RecordError::Empty(format!("annotations[{ai}].subquestions")));
            }
            for (qi, q) in ann.subquestions.iter().enumerate() {
                let field = format!("annotations[{ai}].subquestions[{qi}]");
                if q.text.trim().is_empty() {
                    return Err(RecordError::Empty(format!("{field}.text")));
                }
                if !q.text.trim_end().ends_with('?') {
                    return Err(RecordError::MissingQuestionMark { field: format!("{field}.text") });
                }
                if ann.subquestions[..qi].iter().any(|p| p.text == q.text) {
                    return Err(RecordError::DuplicateSubquestion { field: format!("{field}.text") });
                }
                for (si, &Span(target, start, end)) in q.spans.iter().enumerate() {
                    let len = match target {
                        SpanField::Claim => claim_len,
                        SpanField::Justification => just_len,
                    };
                    if start > end || end > len {
                        return Err(RecordError::SpanOutOfRange {
                            field: format!("{field}.spans[{si}]"),
                            start,
                            end,
                            len,
                        });
                    }
                }
            }
        }
        for (ji, j) in self.paragraph_judgments.iter().flatten().enumerate() {
            let field = format!("paragraph_judgments[{ji}]");
            let Some(ann) = self.annotations.get(j.annotation_index) else {
                return Err(RecordError::IndexOutOfRange {
                    field: format!("{field}.annotation_index"),
                    value: j.annotation_index,
                    limit: self.annotations.len(),
                });
            };
            if j.subquestion_index >= ann.subquestions.len() {
                return Err(RecordError::IndexOutOfRange {
                    field: format!("{field}.subquestion_index"),
                    value: j.subquestion_index,
                    limit: ann.subquestions.len(),
                });
            }
            if j.paragraph_index >= self.article_paragraphs.len() {
                return Err(RecordError::IndexOutOfRange {
                    field: format!("{field}.paragraph_index"),
                    value: j.paragraph_index,
                    limit: self.article_paragraphs.len(),
                });
            }
        }
        Ok(())
    }

    /// Index of the annotation with the most subquestions; the first wins ties.
    pub fn larger_annotation(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, a) in self.annotations.iter().enumerate() {
            match best {
                Some(b) if self.annotations[b].subquestions.len() >= a.subquestions.len() => {}
                _ => best = Some(i),
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_codec() {
        assert_eq!(VeracityLabel::parse("half-true").unwrap().ordinal(), 3);
        assert_eq!(VeracityLabel::from_ordinal(5).unwrap().name(), "true");
        assert_eq!(VeracityLabel::parse("Pants on Fire").unwrap().ordinal(), 0);
        assert_eq!(VeracityLabel::parse("barely_true").unwrap(), VeracityLabel::BarelyTrue);
        assert!(VeracityLabel::parse("maybe").is_err());
        assert!(VeracityLabel::from_ordinal(6).is_none());
        for l in VeracityLabel::ALL {
            assert_eq!(VeracityLabel::parse(l.name()).unwrap(), l);
            assert_eq!(VeracityLabel::from_ordinal(l.ordinal()), Some(l));
        }
    }

    #[test]
    fn labels_are_totally_ordered_by_ordinal() {
        let mut sorted = VeracityLabel::ALL;
        sorted.sort();
        assert_eq!(sorted, VeracityLabel::ALL);
        assert!(VeracityLabel::PantsOnFire < VeracityLabel::True);
    }

    #[test]
    fn qtype_wire_form() {
        let lit = serde_json::to_string(&QuestionType::Literal).unwrap();
        assert_eq!(lit, "\"literal\"");
        let imp = serde_json::to_string(&QuestionType::Implied(ImpliedCategory::StatisticalRigor)).unwrap();
        assert_eq!(imp, r#"{"implied":"statistical-rigor"}"#);
    }

    #[test]
    fn larger_annotation_prefers_first_on_tie() {
        let ann = |n: usize| Annotation {
            annotator_id: "a".into(),
            subquestions: (0..n).map(|i| Subquestion::new(format!("q{i}?"), Answer::Yes, Source::Claim)).collect(),
        };
        let mut r = ClaimRecord {
            id: "1".into(),
            claim: "c".into(),
            context: ClaimContext::default(),
            gold_label: VeracityLabel::True,
            justification: vec![],
            article_paragraphs: vec![],
            annotations: vec![ann(2), ann(2)],
            paragraph_judgments: None,
        };
        assert_eq!(r.larger_annotation(), Some(0));
        r.annotations[1] = ann(3);
        assert_eq!(r.larger_annotation(), Some(1));
    }
}
