use std::collections::{BTreeSet, HashMap};
use std::hash::Hash;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KappaError {
    #[error("chance agreement is 1 (all ratings in one category); kappa is undefined")]
    Undefined,
    #[error("need at least {need} {what}, found {found}")]
    TooFew { what: &'static str, need: usize, found: usize },
    #[error("row {row} has {found} ratings, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("rating `{0}` is not in the category set")]
    UnknownCategory(String),
    #[error("rating lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Items x raters categorical ratings over a fixed category set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingTable {
    categories: Vec<String>,
    /// Category index of each rating.
    ratings: Vec<Vec<usize>>,
}

impl RatingTable {
    /// Builds a table from label rows. With `categories` the set is closed
    /// and must cover every rating; without, it is the sorted set of labels seen.
    pub fn new(rows: Vec<Vec<String>>, categories: Option<Vec<String>>) -> Result<Self, KappaError> {
        let categories = match categories {
            Some(c) => c,
            None => rows.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
        };
        let index: HashMap<&str, usize> = categories.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        let width = rows.first().map_or(0, Vec::len);
        let mut ratings = Vec::with_capacity(rows.len());
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(KappaError::Ragged { row: r, expected: width, found: row.len() });
            }
            ratings.push(
                row.iter()
                    .map(|l| index.get(l.as_str()).copied().ok_or_else(|| KappaError::UnknownCategory(l.clone())))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        Ok(RatingTable { categories, ratings })
    }

    pub fn items(&self) -> usize {
        self.ratings.len()
    }

    pub fn raters(&self) -> usize {
        self.ratings.first().map_or(0, Vec::len)
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    /// `counts[i][j]`: raters who put item `i` in category `j`.
    pub fn category_counts(&self) -> Vec<Vec<usize>> {
        self.ratings
            .iter()
            .map(|row| {
                let mut c = vec![0; self.categories.len()];
                for &k in row {
                    c[k] += 1;
                }
                c
            })
            .collect()
    }
}

/// Fleiss' kappa `(P - Pe) / (1 - Pe)`.
pub fn fleiss_kappa(table: &RatingTable) -> Result<f64, KappaError> {
    let (items, raters) = (table.items(), table.raters());
    if raters < 2 {
        return Err(KappaError::TooFew { what: "raters", need: 2, found: raters });
    }
    if items < 2 {
        return Err(KappaError::TooFew { what: "items", need: 2, found: items });
    }
    let counts = table.category_counts();
    let n = raters as f64;
    let p_bar = counts
        .iter()
        .map(|row| (row.iter().map(|&c| (c * c) as f64).sum::<f64>() - n) / (n * (n - 1.0)))
        .sum::<f64>()
        / items as f64;
    let total = items as f64 * n;
    let pe: f64 = (0..table.categories.len())
        .map(|j| {
            let p = counts.iter().map(|r| r[j]).sum::<usize>() as f64 / total;
            p * p
        })
        .sum();
    if (1.0 - pe).abs() < 1e-12 {
        return Err(KappaError::Undefined);
    }
    Ok((p_bar - pe) / (1.0 - pe))
}

/// Cohen's kappa with marginal-product chance agreement.
pub fn cohen_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64, KappaError> {
    if a.len() != b.len() {
        return Err(KappaError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(KappaError::TooFew { what: "items", need: 1, found: 0 });
    }
    let n = a.len() as f64;
    let po = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut ma: HashMap<&T, usize> = HashMap::new();
    let mut mb: HashMap<&T, usize> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *ma.entry(x).or_default() += 1;
        *mb.entry(y).or_default() += 1;
    }
    let pe: f64 = ma.iter().map(|(k, &c)| c as f64 * mb.get(k).copied().unwrap_or(0) as f64).sum::<f64>() / (n * n);
    if (1.0 - pe).abs() < 1e-12 {
        return Err(KappaError::Undefined);
    }
    Ok((po - pe) / (1.0 - pe))
}
