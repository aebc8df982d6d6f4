use serde::Serialize;

/// A maximum-weight one-to-one alignment between rows and columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matching {
    /// `(row, column)` pairs, ascending by row.
    pub pairs: Vec<(usize, usize)>,
    pub total: f64,
    /// `total / pairs.len()`, 0 for an empty matching.
    pub mean: f64,
}

/// Minimum-cost assignment of every row to a distinct column; requires
/// `rows <= cols`. Returns the column of each row.
fn assign_rows(cost: &[Vec<f64>], cols: usize) -> Vec<usize> {
    let n = cost.len();
    let m = cols;
    // 1-based potentials; index 0 is the virtual column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0usize; n];
    for j in 1..=m {
        if owner[j] != 0 {
            col_of[owner[j] - 1] = j - 1;
        }
    }
    col_of
}

/// Maximum-total-similarity matching of `min(rows, cols)` pairs (Hungarian
/// algorithm). Surplus rows or columns stay unmatched.
///
/// # Panics
///
/// If the rows have different lengths.
pub fn hungarian_match(similarity: &[Vec<f64>]) -> Matching {
    let rows = similarity.len();
    let cols = similarity.first().map_or(0, Vec::len);
    assert!(similarity.iter().all(|r| r.len() == cols), "similarity matrix must be rectangular");
    if rows == 0 || cols == 0 {
        return Matching { pairs: Vec::new(), total: 0.0, mean: 0.0 };
    }
    let mut pairs: Vec<(usize, usize)> = if rows <= cols {
        let cost: Vec<Vec<f64>> = similarity.iter().map(|r| r.iter().map(|s| -s).collect()).collect();
        assign_rows(&cost, cols).into_iter().enumerate().collect()
    } else {
        let cost: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| -similarity[i][j]).collect()).collect();
        assign_rows(&cost, rows).into_iter().enumerate().map(|(j, i)| (i, j)).collect()
    };
    pairs.sort_unstable();
    let total: f64 = pairs.iter().map(|&(i, j)| similarity[i][j]).sum();
    let mean = total / pairs.len() as f64;
    Matching { pairs, total, mean }
}
