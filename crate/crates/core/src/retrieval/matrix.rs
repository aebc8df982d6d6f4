use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::RetrievalError;

/// Paragraph x hypothesis scores, row-major (row = paragraph).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    paragraph_ids: Vec<String>,
    hypothesis_ids: Vec<String>,
    scores: Vec<f64>,
    scorer_name: String,
    bounded: bool,
}

/// On-disk layout of a score matrix.
#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct MatrixFile {
    pub paragraph_ids: Vec<String>,
    pub hypothesis_ids: Vec<String>,
    pub scores: Vec<f64>,
    #[serde(default)]
    pub scorer_name: String,
    #[serde(default)]
    pub bounded: bool,
}

pub(crate) fn default_ids(prefix: char, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

impl ScoreMatrix {
    pub fn new(
        paragraph_ids: Vec<String>,
        hypothesis_ids: Vec<String>,
        scores: Vec<f64>,
        scorer_name: impl Into<String>,
        bounded: bool,
    ) -> Result<Self, RetrievalError> {
        let (m, n) = (paragraph_ids.len(), hypothesis_ids.len());
        if scores.len() != m * n {
            return Err(RetrievalError::Dimension { rows: m, cols: n, found: scores.len() });
        }
        if let Some(pos) = scores.iter().position(|s| !s.is_finite()) {
            return Err(RetrievalError::NonFinite { row: pos / n.max(1), col: pos % n.max(1) });
        }
        if bounded {
            if let Some(pos) = scores.iter().position(|s| !(0.0..=1.0).contains(s)) {
                return Err(RetrievalError::OutOfBounds { row: pos / n, col: pos % n, value: scores[pos] });
            }
        }
        Ok(ScoreMatrix { paragraph_ids, hypothesis_ids, scores, scorer_name: scorer_name.into(), bounded })
    }

    /// Builds a matrix from rows, with ids `p0..` and `h0..`.
    pub fn from_rows(rows: &[Vec<f64>], scorer_name: impl Into<String>, bounded: bool) -> Result<Self, RetrievalError> {
        let n = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(RetrievalError::Dimension { rows: rows.len(), cols: n, found: bad.len() });
        }
        Self::new(
            default_ids('p', rows.len()),
            default_ids('h', n),
            rows.concat(),
            scorer_name,
            bounded,
        )
    }

    pub fn rows(&self) -> usize {
        self.paragraph_ids.len()
    }

    pub fn cols(&self) -> usize {
        self.hypothesis_ids.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.scores[row * self.cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.cols();
        &self.scores[row * n..(row + 1) * n]
    }

    /// Best score of paragraph `row` over all hypotheses; `-inf` with no hypotheses.
    pub fn row_max(&self, row: usize) -> f64 {
        self.row(row).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn row_maxima(&self) -> Vec<f64> {
        (0..self.rows()).map(|i| self.row_max(i)).collect()
    }

    pub fn paragraph_ids(&self) -> &[String] {
        &self.paragraph_ids
    }

    pub fn hypothesis_ids(&self) -> &[String] {
        &self.hypothesis_ids
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn scorer_name(&self) -> &str {
        &self.scorer_name
    }

    pub fn bounded(&self) -> bool {
        self.bounded
    }

    pub(crate) fn to_file(&self) -> MatrixFile {
        MatrixFile {
            paragraph_ids: self.paragraph_ids.clone(),
            hypothesis_ids: self.hypothesis_ids.clone(),
            scores: self.scores.clone(),
            scorer_name: self.scorer_name.clone(),
            bounded: self.bounded,
        }
    }

    pub(crate) fn from_file(file: MatrixFile) -> Result<Self, RetrievalError> {
        Self::new(file.paragraph_ids, file.hypothesis_ids, file.scores, file.scorer_name, file.bounded)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("matrices serialize")
    }

    pub fn save<W: Write>(&self, mut writer: W) -> Result<(), RetrievalError> {
        serde_json::to_writer(&mut writer, &self.to_file()).map_err(|e| RetrievalError::File(e.to_string()))?;
        writer.write_all(b"\n").map_err(|e| RetrievalError::File(e.to_string()))
    }
}

/// Reads one score-matrix object.
pub fn load_scores<R: Read>(reader: R) -> Result<ScoreMatrix, RetrievalError> {
    let file: MatrixFile = serde_json::from_reader(reader).map_err(|e| RetrievalError::File(e.to_string()))?;
    ScoreMatrix::from_file(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_round_trip() {
        let m = ScoreMatrix::from_rows(&[vec![0.1, 0.9], vec![0.25, 0.5], vec![1.0, 0.0]], "mock", true).unwrap();
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        assert_eq!(load_scores(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn dimension_mismatch_in_file() {
        let text = r#"{"paragraph_ids":["a","b","c"],"hypothesis_ids":["x","y"],"scores":[1,2,3,4,5]}"#;
        assert!(matches!(load_scores(text.as_bytes()), Err(RetrievalError::Dimension { rows: 3, cols: 2, found: 5 })));
    }

    #[test]
    fn bounded_and_finite_checks() {
        assert!(matches!(
            ScoreMatrix::from_rows(&[vec![1.5]], "x", true),
            Err(RetrievalError::OutOfBounds { .. })
        ));
        assert!(ScoreMatrix::from_rows(&[vec![1.5]], "x", false).is_ok());
        assert!(matches!(ScoreMatrix::from_rows(&[vec![f64::NAN]], "x", false), Err(RetrievalError::NonFinite { .. })));
        assert!(ScoreMatrix::from_rows(&[vec![1.0], vec![]], "x", false).is_err());
    }

    #[test]
    fn row_access() {
        let m = ScoreMatrix::from_rows(&[vec![0.2, 0.8], vec![0.7, 0.1]], "x", true).unwrap();
        assert_eq!(m.get(1, 0), 0.7);
        assert_eq!(m.row_maxima(), vec![0.8, 0.7]);
    }
}
