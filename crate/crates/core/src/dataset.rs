//! Line-delimited dataset files, split manifests, and the import adapter for
//! the released dataset layout.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{
    Annotation, Answer, ClaimContext, ClaimRecord, RecordError, Source, Subquestion, VeracityLabel,
};

/// How to treat records that violate the schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    /// The first violation aborts the parse.
    Strict,
    /// Violating records are dropped and reported.
    Lenient,
}

#[derive(Debug, Error)]
pub enum DatasetErrorKind {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Malformed(String),
    #[error("unknown value for `{field}`: {message}")]
    UnknownEnum { field: String, message: String },
    #[error("invalid `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error(transparent)]
    Invalid(#[from] RecordError),
    #[error("duplicate id `{id}` (first seen on line {first_line})")]
    DuplicateId { id: String, first_line: usize },
}

/// A dataset problem tied to the 1-based line it occurred on.
#[derive(Debug, Error)]
#[error("line {line}: {kind}")]
pub struct DatasetError {
    pub line: usize,
    pub kind: DatasetErrorKind,
}

#[derive(Debug, Default)]
pub struct ParsedDataset {
    pub records: Vec<ClaimRecord>,
    /// Records dropped in lenient mode, with the reason.
    pub dropped: Vec<DatasetError>,
}

fn classify(err: serde_path_to_error::Error<serde_json::Error>) -> DatasetErrorKind {
    let field = err.path().to_string();
    let inner = err.into_inner();
    let message = inner.to_string();
    if inner.is_syntax() || inner.is_eof() {
        return DatasetErrorKind::Malformed(message);
    }
    if message.contains("unknown variant") || message.contains("unknown veracity label") {
        DatasetErrorKind::UnknownEnum { field, message }
    } else {
        DatasetErrorKind::Schema { field, message }
    }
}

fn parse_native_line(line: &str) -> Result<ClaimRecord, DatasetErrorKind> {
    let de = &mut serde_json::Deserializer::from_str(line);
    let record: ClaimRecord = serde_path_to_error::deserialize(de).map_err(classify)?;
    record.validate()?;
    Ok(record)
}

fn parse_lines<R: BufRead>(
    reader: R,
    strictness: Strictness,
    parse_line: impl Fn(&str) -> Result<ClaimRecord, DatasetErrorKind>,
) -> Result<ParsedDataset, DatasetError> {
    let mut out = ParsedDataset::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| DatasetError { line: line_no, kind: e.into() })?;
        if line.trim().is_empty() {
            continue;
        }
        let result = parse_line(&line).and_then(|record| match seen.get(&record.id) {
            Some(&first_line) => Err(DatasetErrorKind::DuplicateId { id: record.id, first_line }),
            None => Ok(record),
        });
        match result {
            Ok(record) => {
                seen.insert(record.id.clone(), line_no);
                out.records.push(record);
            }
            Err(kind) => {
                let err = DatasetError { line: line_no, kind };
                match strictness {
                    Strictness::Strict => return Err(err),
                    Strictness::Lenient => {
                        log::warn!("dropping record: {err}");
                        out.dropped.push(err);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Parses a native line-delimited dataset.
pub fn parse_dataset<R: BufRead>(reader: R, strictness: Strictness) -> Result<ParsedDataset, DatasetError> {
    parse_lines(reader, strictness, parse_native_line)
}

/// Serializes one record as a single JSON line (no trailing newline).
pub fn record_to_line(record: &ClaimRecord) -> String {
    serde_json::to_string(record).expect("records always serialize")
}

pub fn write_dataset<W: Write>(mut writer: W, records: &[ClaimRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(writer, "{}", record_to_line(r))?;
    }
    Ok(())
}

/// Split name to claim ids, e.g. `{"train": [...], "validation-sub": [...]}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SplitManifest(pub BTreeMap<String, Vec<String>>);

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read split manifest: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("split `{0}` is not listed in the manifest")]
    UnknownSplit(String),
}

impl SplitManifest {
    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self, ManifestError> {
        Ok(serde_json::from_reader(reader)?)
    }

    /// Records of `split`, in manifest order. Ids missing from `records` are skipped.
    pub fn select<'a>(&self, split: &str, records: &'a [ClaimRecord]) -> Result<Vec<&'a ClaimRecord>, ManifestError> {
        let ids = self.0.get(split).ok_or_else(|| ManifestError::UnknownSplit(split.to_string()))?;
        let by_id: HashMap<&str, &ClaimRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
        Ok(ids.iter().filter_map(|id| by_id.get(id.as_str()).copied()).collect())
    }
}

// ---------------------------------------------------------------------------
// Released-layout import.
//
// The released files name fields differently from the native schema
// (`example_id`, `label`, `person`, parallel `questions`/`answers` arrays).
// Several aliases are accepted for each field.

fn first_str(obj: &serde_json::Map<String, Value>, keys: &[&str]) -> Option<String> {
    keys.iter().find_map(|k| match obj.get(*k) {
        Some(Value::String(s)) => Some(s.clone()),
        Some(Value::Number(n)) => Some(n.to_string()),
        _ => None,
    })
}

fn paragraphs(value: Option<&Value>) -> Vec<String> {
    match value {
        Some(Value::String(s)) => s
            .split("\n\n")
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(String::from)
            .collect(),
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(|v| v.as_str())
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(String::from)
            .collect(),
        _ => Vec::new(),
    }
}

fn released_answer(raw: &str) -> Answer {
    match raw.trim().to_ascii_lowercase().as_str() {
        "yes" | "y" | "true" | "1" => Answer::Yes,
        "no" | "n" | "false" | "0" => Answer::No,
        _ => Answer::Unknown,
    }
}

fn released_question(text: &str) -> String {
    let t = text.trim();
    if t.ends_with('?') {
        t.to_string()
    } else {
        format!("{t}?")
    }
}

fn released_annotation(idx: usize, value: &Value) -> Result<Annotation, DatasetErrorKind> {
    let schema = |message: &str| DatasetErrorKind::Schema {
        field: format!("annotations[{idx}]"),
        message: message.to_string(),
    };
    let obj = value.as_object().ok_or_else(|| schema("expected an object"))?;
    let annotator_id = first_str(obj, &["annotator_id", "annotator", "worker_id"]).unwrap_or_else(|| format!("annotator-{idx}"));
    let questions = obj
        .get("questions")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("missing `questions` array"))?;
    let answers = obj.get("answers").and_then(Value::as_array);
    let sources = obj.get("sources").and_then(Value::as_array);
    let mut subquestions = Vec::with_capacity(questions.len());
    for (qi, q) in questions.iter().enumerate() {
        // Either a bare string with parallel arrays, or an object per question.
        let (text, answer, source) = match q {
            Value::String(s) => (
                s.clone(),
                answers.and_then(|a| a.get(qi)).and_then(Value::as_str).map(released_answer),
                sources.and_then(|a| a.get(qi)).and_then(Value::as_str).map(String::from),
            ),
            Value::Object(o) => (
                first_str(o, &["question", "text"]).ok_or_else(|| schema("question object lacks text"))?,
                first_str(o, &["answer"]).map(|a| released_answer(&a)),
                first_str(o, &["source"]),
            ),
            _ => return Err(schema("unexpected question entry")),
        };
        let source = match source.as_deref().map(str::to_ascii_lowercase).as_deref() {
            Some("claim") => Source::Claim,
            _ => Source::Justification,
        };
        let text = released_question(&text);
        if subquestions.iter().any(|s: &Subquestion| s.text == text) {
            continue;
        }
        subquestions.push(Subquestion::new(text, answer.unwrap_or(Answer::Unknown), source));
    }
    Ok(Annotation { annotator_id, subquestions })
}

fn parse_released_line(line: &str) -> Result<ClaimRecord, DatasetErrorKind> {
    let value: Value = serde_json::from_str(line).map_err(|e| DatasetErrorKind::Malformed(e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| DatasetErrorKind::Malformed("expected a JSON object".into()))?;
    let missing = |field: &str| DatasetErrorKind::Schema { field: field.into(), message: "missing".into() };
    let id = first_str(obj, &["example_id", "id", "claim_id"]).ok_or_else(|| missing("example_id"))?;
    let claim = first_str(obj, &["claim"]).ok_or_else(|| missing("claim"))?;
    let label_raw = first_str(obj, &["label", "gold_label", "verdict"]).ok_or_else(|| missing("label"))?;
    let gold_label = VeracityLabel::parse(&label_raw).map_err(|e| DatasetErrorKind::UnknownEnum {
        field: "label".into(),
        message: e.to_string(),
    })?;
    let date = first_str(obj, &["date", "claim_date"])
        .and_then(|d| chrono::NaiveDate::parse_from_str(d.trim().get(..10).unwrap_or(""), "%Y-%m-%d").ok());
    let context = ClaimContext {
        speaker: first_str(obj, &["person", "speaker"]).unwrap_or_default(),
        date,
        venue: first_str(obj, &["venue"]).unwrap_or_default(),
    };
    let annotations = match obj.get("annotations") {
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, a)| released_annotation(i, a))
            .filter(|a| !matches!(a, Ok(a) if a.subquestions.is_empty()))
            .collect::<Result<Vec<_>, _>>()?,
        _ => Vec::new(),
    };
    let record = ClaimRecord {
        id,
        claim,
        context,
        gold_label,
        justification: paragraphs(obj.get("justification")),
        article_paragraphs: paragraphs(obj.get("full_article").or_else(|| obj.get("article_paragraphs"))),
        annotations,
        paragraph_judgments: None,
    };
    record.validate()?;
    Ok(record)
}

/// Imports the released dataset layout into native records.
///
/// Questions lacking a trailing `?` get one appended, and byte-identical
/// repeats within an annotation are dropped, so that imported records satisfy
/// the native invariants.
pub fn import_released<R: BufRead>(reader: R, strictness: Strictness) -> Result<ParsedDataset, DatasetError> {
    parse_lines(reader, strictness, parse_released_line)
}

/// Parses either layout, deciding per line: lines carrying the native
/// `gold_label` key go through the native parser, the rest through the
/// released-layout adapter.
pub fn parse_any<R: BufRead>(reader: R, strictness: Strictness) -> Result<ParsedDataset, DatasetError> {
    parse_lines(reader, strictness, |line| {
        if line.contains("\"gold_label\"") {
            parse_native_line(line)
        } else {
            parse_released_line(line)
        }
    })
}
