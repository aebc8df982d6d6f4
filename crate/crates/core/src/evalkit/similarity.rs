use std::str::FromStr;

use super::{hungarian_match, rouge_l, rouge_n_precision, token_f1, MetricError};

/// Question-to-question similarity used by the set-matching metric.
#[derive(Debug, Clone, PartialEq)]
pub enum SimilaritySpec {
    Rouge1Precision,
    Rouge2Precision,
    RougeLF1,
    TokenF1,
    /// Precomputed scores, rows = generated questions, columns = reference questions.
    ExternalMatrix(Vec<Vec<f64>>),
}

impl FromStr for SimilaritySpec {
    type Err = String;

    /// Parses the built-in kinds; external matrices are constructed directly.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rouge1p" | "rouge1-p" => Ok(SimilaritySpec::Rouge1Precision),
            "rouge2p" | "rouge2-p" => Ok(SimilaritySpec::Rouge2Precision),
            "rougelf" | "rougeL-f" | "rougel-f" => Ok(SimilaritySpec::RougeLF1),
            "tokenf1" | "token-f1" => Ok(SimilaritySpec::TokenF1),
            other => Err(format!("unknown similarity `{other}` (rouge1p, rouge2p, rougelf, tokenf1, matrix:FILE)")),
        }
    }
}

impl SimilaritySpec {
    pub fn name(&self) -> &'static str {
        match self {
            SimilaritySpec::Rouge1Precision => "rouge1-p",
            SimilaritySpec::Rouge2Precision => "rouge2-p",
            SimilaritySpec::RougeLF1 => "rougeL-f",
            SimilaritySpec::TokenF1 => "token-f1",
            SimilaritySpec::ExternalMatrix(_) => "external-matrix",
        }
    }

    fn pair(&self, generated: &str, reference: &str) -> f64 {
        match self {
            SimilaritySpec::Rouge1Precision => rouge_n_precision(generated, reference, 1),
            SimilaritySpec::Rouge2Precision => rouge_n_precision(generated, reference, 2),
            SimilaritySpec::RougeLF1 => rouge_l(generated, reference).map_or(0.0, |r| r.f1),
            SimilaritySpec::TokenF1 => token_f1(generated, reference),
            SimilaritySpec::ExternalMatrix(_) => unreachable!("external matrices are not computed pairwise"),
        }
    }
}

/// Pairwise similarity matrix, rows = generated, columns = reference.
pub fn similarity_matrix<S: AsRef<str>>(generated: &[S], reference: &[S], spec: &SimilaritySpec) -> Result<Vec<Vec<f64>>, MetricError> {
    if let SimilaritySpec::ExternalMatrix(m) = spec {
        let cols_ok = m.iter().all(|r| r.len() == reference.len());
        if m.len() != generated.len() || !cols_ok {
            return Err(MetricError::MatrixShape {
                expected: (generated.len(), reference.len()),
                found: (m.len(), m.first().map_or(0, Vec::len)),
            });
        }
        if m.iter().flatten().any(|x| !x.is_finite()) {
            return Err(MetricError::NonFinite);
        }
        return Ok(m.clone());
    }
    Ok(generated
        .iter()
        .map(|g| reference.iter().map(|r| spec.pair(g.as_ref(), r.as_ref())).collect())
        .collect())
}

/// Mean similarity under the maximum-weight one-to-one alignment of the two
/// question sets; surplus questions on the larger side are left out.
pub fn set_similarity<S: AsRef<str>>(generated: &[S], reference: &[S], spec: &SimilaritySpec) -> Result<f64, MetricError> {
    if generated.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptySet);
    }
    Ok(hungarian_match(&similarity_matrix(generated, reference, spec)?).mean)
}
