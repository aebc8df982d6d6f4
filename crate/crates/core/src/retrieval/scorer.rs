use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::matrix::default_ids;
use super::{RetrievalError, ScoreMatrix};
use crate::evalkit::rouge_n_precision;
use crate::protocol::ProtocolClient;
use crate::tokenize::tokenize;

/// Anything that turns paragraphs and hypotheses into a score matrix.
pub trait Scorer: Send + Sync {
    fn name(&self) -> &str;

    /// Whether every score lies in `[0, 1]`.
    fn bounded(&self) -> bool;

    fn score(&self, paragraphs: &[String], hypotheses: &[String]) -> Result<ScoreMatrix, RetrievalError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn new(k1: f64, b: f64) -> Result<Self, RetrievalError> {
        if !(k1.is_finite() && k1 > 0.0) || !(0.0..=1.0).contains(&b) {
            return Err(RetrievalError::InvalidParams(format!("k1={k1}, b={b}")));
        }
        Ok(Bm25Params { k1, b })
    }
}

/// Okapi BM25 of each hypothesis (as query) against each paragraph.
///
/// Each distinct query term contributes
/// `idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg_len))` with
/// `idf = ln((M - df + 0.5) / (df + 0.5) + 1)` over the `M` paragraphs.
pub fn bm25_scores(paragraphs: &[String], hypotheses: &[String], params: Bm25Params) -> Result<ScoreMatrix, RetrievalError> {
    if paragraphs.is_empty() {
        return Err(RetrievalError::EmptyCorpus);
    }
    let docs: Vec<HashMap<String, usize>> = paragraphs
        .iter()
        .map(|p| {
            let mut tf = HashMap::new();
            for t in tokenize(p) {
                *tf.entry(t).or_insert(0) += 1;
            }
            tf
        })
        .collect();
    let lengths: Vec<f64> = docs.iter().map(|d| d.values().sum::<usize>() as f64).collect();
    let m = paragraphs.len() as f64;
    let avg_len = lengths.iter().sum::<f64>() / m;
    let mut df: HashMap<&str, usize> = HashMap::new();
    for d in &docs {
        for t in d.keys() {
            *df.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let queries: Vec<Vec<String>> = hypotheses
        .iter()
        .map(|h| {
            let mut seen = HashSet::new();
            tokenize(h).into_iter().filter(|t| seen.insert(t.clone())).collect()
        })
        .collect();
    let mut scores = Vec::with_capacity(paragraphs.len() * hypotheses.len());
    for (doc, &len) in docs.iter().zip(&lengths) {
        let norm = if avg_len > 0.0 { len / avg_len } else { 0.0 };
        for query in &queries {
            let mut s = 0.0;
            for term in query {
                let Some(&tf) = doc.get(term) else { continue };
                let n_t = df[term.as_str()] as f64;
                let idf = ((m - n_t + 0.5) / (n_t + 0.5) + 1.0).ln();
                let tf = tf as f64;
                s += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * norm));
            }
            scores.push(s);
        }
    }
    ScoreMatrix::new(default_ids('p', paragraphs.len()), default_ids('h', hypotheses.len()), scores, "bm25", false)
}

#[derive(Debug, Clone, Default)]
pub struct Bm25Scorer {
    pub params: Bm25Params,
}

impl Scorer for Bm25Scorer {
    fn name(&self) -> &str {
        "bm25"
    }

    fn bounded(&self) -> bool {
        false
    }

    fn score(&self, paragraphs: &[String], hypotheses: &[String]) -> Result<ScoreMatrix, RetrievalError> {
        bm25_scores(paragraphs, hypotheses, self.params)
    }
}

/// Fraction of the hypothesis unigrams (clipped) that occur in the paragraph.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalScorer;

impl Scorer for LexicalScorer {
    fn name(&self) -> &str {
        "lexical"
    }

    fn bounded(&self) -> bool {
        true
    }

    fn score(&self, paragraphs: &[String], hypotheses: &[String]) -> Result<ScoreMatrix, RetrievalError> {
        if paragraphs.is_empty() {
            return Err(RetrievalError::EmptyCorpus);
        }
        let scores = paragraphs
            .iter()
            .flat_map(|p| hypotheses.iter().map(move |h| rouge_n_precision(h, p, 1)))
            .collect();
        ScoreMatrix::new(default_ids('p', paragraphs.len()), default_ids('h', hypotheses.len()), scores, "lexical", true)
    }
}

/// Scores 1 for the given paragraphs and 0 elsewhere, whatever the hypothesis.
#[derive(Debug, Clone, Default)]
pub struct OracleScorer {
    pub relevant: BTreeSet<usize>,
}

impl Scorer for OracleScorer {
    fn name(&self) -> &str {
        "gold-oracle"
    }

    fn bounded(&self) -> bool {
        true
    }

    fn score(&self, paragraphs: &[String], hypotheses: &[String]) -> Result<ScoreMatrix, RetrievalError> {
        let scores = (0..paragraphs.len())
            .flat_map(|i| {
                let s = if self.relevant.contains(&i) { 1.0 } else { 0.0 };
                std::iter::repeat_n(s, hypotheses.len())
            })
            .collect();
        ScoreMatrix::new(default_ids('p', paragraphs.len()), default_ids('h', hypotheses.len()), scores, "gold-oracle", true)
    }
}

/// Entailment scores from external processes speaking the wire protocol.
/// Pairs are spread over a pool of connections, one request in flight each.
#[derive(Debug)]
pub struct ExternalScorer {
    name: String,
    bounded: bool,
    pool: Vec<Mutex<ProtocolClient>>,
}

impl ExternalScorer {
    pub fn spawn(command: &str, pool_size: usize, timeout: Duration) -> Result<Self, RetrievalError> {
        let pool = (0..pool_size.max(1))
            .map(|_| ProtocolClient::spawn(command, timeout).map(Mutex::new))
            .collect::<Result<Vec<_>, _>>()
            .map_err(RetrievalError::Connect)?;
        let info = pool[0].lock().unwrap().info().clone();
        Ok(ExternalScorer { name: info.name, bounded: info.bounded, pool })
    }

    pub fn from_clients(clients: Vec<ProtocolClient>) -> Self {
        assert!(!clients.is_empty(), "at least one connection");
        let info = clients[0].info().clone();
        ExternalScorer { name: info.name, bounded: info.bounded, pool: clients.into_iter().map(Mutex::new).collect() }
    }
}

impl Scorer for ExternalScorer {
    fn name(&self) -> &str {
        &self.name
    }

    fn bounded(&self) -> bool {
        self.bounded
    }

    fn score(&self, paragraphs: &[String], hypotheses: &[String]) -> Result<ScoreMatrix, RetrievalError> {
        let n = hypotheses.len();
        let total = paragraphs.len() * n;
        let chunk = total.div_ceil(self.pool.len()).max(1);
        let mut scores = vec![0.0; total];
        std::thread::scope(|scope| {
            let handles: Vec<_> = scores
                .chunks_mut(chunk)
                .zip(&self.pool)
                .enumerate()
                .map(|(c, (out, conn))| {
                    scope.spawn(move || -> Result<(), RetrievalError> {
                        let mut client = conn.lock().unwrap_or_else(|e| e.into_inner());
                        for (offset, slot) in out.iter_mut().enumerate() {
                            let flat = c * chunk + offset;
                            let (i, j) = (flat / n, flat % n);
                            *slot = client.entail(&paragraphs[i], &hypotheses[j]).map_err(|source| {
                                RetrievalError::Pair { paragraph: i, hypothesis: j, source }
                            })?;
                        }
                        Ok(())
                    })
                })
                .collect();
            handles.into_iter().try_for_each(|h| h.join().expect("scoring thread panicked"))
        })?;
        ScoreMatrix::new(default_ids('p', paragraphs.len()), default_ids('h', n), scores, self.name.clone(), self.bounded)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    /// Direct transcription of the BM25 formula over raw token lists.
    fn bm25_oracle(docs: &[&[&str]], query: &[&str], k1: f64, b: f64) -> Vec<f64> {
        let m = docs.len() as f64;
        let avg = docs.iter().map(|d| d.len() as f64).sum::<f64>() / m;
        let mut q: Vec<&str> = query.to_vec();
        q.sort();
        q.dedup();
        docs.iter()
            .map(|d| {
                q.iter()
                    .map(|t| {
                        let tf = d.iter().filter(|w| *w == t).count() as f64;
                        let df = docs.iter().filter(|d| d.contains(t)).count() as f64;
                        let idf = ((m - df + 0.5) / (df + 0.5) + 1.0).ln();
                        idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * d.len() as f64 / avg))
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn two_paragraph_fixture_matches_oracle() {
        let m = bm25_scores(&strings(&["a a b", "b c"]), &strings(&["a"]), Bm25Params::default()).unwrap();
        let expected = bm25_oracle(&[&["a", "a", "b"], &["b", "c"]], &["a"], 1.2, 0.75);
        // idf(a) = ln(1.5/1.5 + 1) = ln 2; avg len 2.5; tf=2, len=3.
        let hand = 2f64.ln() * 2.0 * 2.2 / (2.0 + 1.2 * (0.25 + 0.75 * 3.0 / 2.5));
        assert!((expected[0] - hand).abs() < 1e-12);
        for (i, want) in expected.iter().enumerate() {
            assert!((m.get(i, 0) - want).abs() < 1e-6);
        }
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn absent_term_gives_zero_column() {
        let m = bm25_scores(&strings(&["a b", "c d"]), &strings(&["zzz", "a"]), Bm25Params::default()).unwrap();
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert!(m.get(0, 1) > 0.0);
    }

    #[test]
    fn duplicate_paragraphs_have_identical_rows() {
        let m = bm25_scores(&strings(&["x y z", "x y z", "q"]), &strings(&["x", "z q"]), Bm25Params::default()).unwrap();
        assert_eq!(m.row(0), m.row(1));
    }

    #[test]
    fn empty_corpus_and_bad_params() {
        assert!(matches!(bm25_scores(&[], &strings(&["a"]), Bm25Params::default()), Err(RetrievalError::EmptyCorpus)));
        assert!(Bm25Params::new(0.0, 0.5).is_err());
        assert!(Bm25Params::new(1.2, 1.5).is_err());
    }

    #[test]
    fn lexical_scores_are_unigram_precision() {
        let m = LexicalScorer.score(&strings(&["The tax rose."]), &strings(&["Tax rose sharply"])).unwrap();
        assert!((m.get(0, 0) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_scorer_marks_relevant_rows() {
        let s = OracleScorer { relevant: [1].into() };
        let m = s.score(&strings(&["a", "b"]), &strings(&["h"])).unwrap();
        assert_eq!(m.row_maxima(), vec![0.0, 1.0]);
    }
}
