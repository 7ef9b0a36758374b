//! Pattern objective and incremental gains.
//!
//! `U(Ω) = (1 / (M·N)) · Σ u` over every unordered pair of rows and every
//! unordered pair of columns, each URP counted once. URPs touching a hole,
//! a pair that is not a cached correspondence, or a degenerate instance
//! contribute zero.

use crate::types::{DiscoveryParams, FeatureSet, RpMatrix};

use super::affinity::affinity;
use super::cache::AffinityCache;

/// Bundles what scoring needs: features, admissible pairs, tolerances.
#[derive(Clone, Copy)]
pub struct Scorer<'a> {
    pub fs: &'a FeatureSet,
    pub cache: &'a AffinityCache,
    pub params: &'a DiscoveryParams,
}

impl<'a> Scorer<'a> {
    pub fn new(fs: &'a FeatureSet, cache: &'a AffinityCache, params: &'a DiscoveryParams) -> Self {
        Self { fs, cache, params }
    }

    /// Affinity of the URP `[[f11, f12], [f21, f22]]`, zero when it cannot
    /// be formed.
    pub fn urp(&self, f11: Option<usize>, f12: Option<usize>, f21: Option<usize>, f22: Option<usize>) -> f64 {
        let (Some(a), Some(b), Some(c), Some(d)) = (f11, f12, f21, f22) else {
            return 0.0;
        };
        if !self.cache.is_correspondence(a, b) || !self.cache.is_correspondence(c, d) {
            return 0.0;
        }
        let fs = self.fs;
        affinity(fs.get(a), fs.get(b), fs.get(c), fs.get(d), self.params).unwrap_or(0.0)
    }

    /// Sum of `u` over all URPs of the cell grid.
    pub fn total(&self, rows: &[Vec<Option<usize>>]) -> f64 {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut acc = 0.0;
        for r1 in 0..m {
            for r2 in r1 + 1..m {
                for c1 in 0..n {
                    for c2 in c1 + 1..n {
                        acc += self.urp(rows[r1][c1], rows[r1][c2], rows[r2][c1], rows[r2][c2]);
                    }
                }
            }
        }
        acc
    }

    pub fn objective(&self, rows: &[Vec<Option<usize>>]) -> f64 {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return 0.0;
        }
        self.total(rows) / (m * n) as f64
    }

    /// Sum of `u` over every URP containing cell `(row, col)` when it holds
    /// `candidate`; other cells are read from `rows`.
    pub fn cell_gain(&self, rows: &[Vec<Option<usize>>], row: usize, col: usize, candidate: usize) -> f64 {
        let n = rows[row].len();
        let mut acc = 0.0;
        for (k, other) in rows.iter().enumerate() {
            if k == row {
                continue;
            }
            let Some(partner) = other[col] else { continue };
            if partner == candidate {
                continue;
            }
            for j in 0..n {
                if j == col {
                    continue;
                }
                acc += self.urp(Some(candidate), rows[row][j], Some(partner), other[j]);
            }
        }
        acc
    }

    /// Sum of `u` over URPs that use column `col`.
    pub fn column_total(&self, rows: &[Vec<Option<usize>>], col: usize) -> f64 {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut acc = 0.0;
        for r1 in 0..m {
            for r2 in r1 + 1..m {
                for j in 0..n {
                    if j != col {
                        acc += self.urp(rows[r1][col], rows[r1][j], rows[r2][col], rows[r2][j]);
                    }
                }
            }
        }
        acc
    }

    /// Sum of `u` over URPs that use row `row`.
    pub fn row_total(&self, rows: &[Vec<Option<usize>>], row: usize) -> f64 {
        let n = rows.first().map_or(0, Vec::len);
        let mut acc = 0.0;
        for (k, other) in rows.iter().enumerate() {
            if k == row {
                continue;
            }
            for c1 in 0..n {
                for c2 in c1 + 1..n {
                    acc += self.urp(rows[row][c1], rows[row][c2], other[c1], other[c2]);
                }
            }
        }
        acc
    }
}

/// `U` of a matrix.
pub fn rp_objective(matrix: &RpMatrix, fs: &FeatureSet, cache: &AffinityCache, params: &DiscoveryParams) -> f64 {
    Scorer::new(fs, cache, params).objective(&matrix.rows)
}

/// Visual-word affinity sum-up score of placing `feature` in cell
/// `(row, col)`: the sum of `u` over the URPs it would form with the filled
/// cells of its column and row.
pub fn candidate_gain(
    feature: usize,
    row: usize,
    col: usize,
    matrix: &RpMatrix,
    fs: &FeatureSet,
    cache: &AffinityCache,
    params: &DiscoveryParams,
) -> f64 {
    Scorer::new(fs, cache, params).cell_gain(&matrix.rows, row, col, feature)
}
