//! URP-seeded greedy search.
//!
//! Each initial URP seeds a 2×2 matrix that is grown by steepest ascent on
//! `U` over six move kinds: add a column, remove a column, add a row,
//! remove a row, replace (or clear) a single cell, and exchange two cells
//! of one row. New columns are built
//! from an anchor feature; the remaining rows are filled in descending order
//! of their best single-URP affinity to the anchor, each cell taking the
//! candidate with the largest visual-word affinity sum-up score. New rows
//! are built the same way with the roles of rows and columns swapped.

use std::cmp::Ordering;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::features::VisualWordIndex;
use crate::region::{box_union_area, box_unions_intersection_area, BBox};
use crate::types::{DiscoveryParams, FeatureSet, InstanceRegion, RecurringPattern, RpMatrix};

use super::affinity::{urp_affinity, Urp};
use super::cache::{precompute_affinity_cache, AffinityCache};
use super::objective::Scorer;

/// Accepted moves must raise `U` by more than this.
const IMPROVEMENT_EPS: f64 = 1e-12;
/// Patterns whose instance union overlaps an accepted one by more than this
/// IOD are dropped.
const DEDUP_IOD: f64 = 0.5;
/// Initials are expanded in fixed-size batches; later batches skip initials
/// already embedded in an earlier result.
const INITIAL_BATCH: usize = 8;

type Grid = Vec<Vec<Option<usize>>>;

#[derive(Clone, Debug)]
enum Move {
    AddColumn(Vec<Option<usize>>),
    RemoveColumn(usize),
    AddRow(usize, Vec<Option<usize>>),
    RemoveRow(usize),
    SetCell(usize, usize, Option<usize>),
    SwapCells(usize, usize, usize),
    ReplaceRow(usize, Vec<Option<usize>>),
    ReplaceColumn(usize, Vec<Option<usize>>),
}

#[derive(Clone)]
struct Search<'a> {
    scorer: Scorer<'a>,
    words: &'a VisualWordIndex,
    row_words: Vec<usize>,
    rows: Grid,
    used: Vec<bool>,
    total: f64,
}

fn ncols(rows: &Grid) -> usize {
    rows.first().map_or(0, Vec::len)
}

impl<'a> Search<'a> {
    fn new(scorer: Scorer<'a>, words: &'a VisualWordIndex, urp: &Urp) -> Option<Self> {
        let cache = scorer.cache;
        let w1 = cache.word_of(urp.f11)?;
        let w2 = cache.word_of(urp.f21)?;
        if w1 == w2 || cache.word_of(urp.f12) != Some(w1) || cache.word_of(urp.f22) != Some(w2) {
            return None;
        }
        let rows = vec![vec![Some(urp.f11), Some(urp.f12)], vec![Some(urp.f21), Some(urp.f22)]];
        let mut used = vec![false; scorer.fs.len()];
        for id in urp.ids() {
            used[id] = true;
        }
        let total = scorer.total(&rows);
        Some(Self {
            scorer,
            words,
            row_words: vec![w1, w2],
            rows,
            used,
            total,
        })
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn n(&self) -> usize {
        ncols(&self.rows)
    }

    fn objective(&self) -> f64 {
        self.total / (self.m() * self.n()) as f64
    }

    /// Unused features of `word` that may share column `col` of `grid`,
    /// ignoring whatever currently sits in `skip_row`.
    fn cell_candidates(&self, grid: &Grid, word: usize, col: usize, skip_row: usize) -> Vec<usize> {
        let cache = self.scorer.cache;
        let fs = self.scorer.fs;
        self.words.words[word]
            .iter()
            .copied()
            .filter(|&g| !self.used[g])
            .filter(|&g| {
                grid.iter()
                    .enumerate()
                    .filter(|(r, _)| *r != skip_row)
                    .filter_map(|(_, row)| row[col])
                    .all(|other| other != g && cache.co_instance(fs, g, other))
            })
            .collect()
    }

    /// Best candidate for a cell by sum-up score; `None` when nothing scores.
    fn best_for_cell(&self, grid: &Grid, row: usize, col: usize, candidates: &[usize]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for &g in candidates {
            let v = self.scorer.cell_gain(grid, row, col, g);
            if v > 0.0 && best.is_none_or(|(_, bv)| v > bv) {
                best = Some((g, v));
            }
        }
        best
    }

    fn build_column(&self, anchor_row: usize, anchor: usize) -> Option<(Vec<Option<usize>>, f64)> {
        let m = self.m();
        let n = self.n();
        let mut grid = self.rows.clone();
        for (r, row) in grid.iter_mut().enumerate() {
            row.push((r == anchor_row).then_some(anchor));
        }
        // Order the remaining rows by their best single-URP affinity to the anchor.
        let mut order: Vec<(usize, f64)> = Vec::with_capacity(m);
        for k in 0..m {
            if k == anchor_row {
                continue;
            }
            let cands = self.cell_candidates(&grid, self.row_words[k], n, k);
            let mut best = 0.0f64;
            for &g in &cands {
                for j in 0..n {
                    let u = self.scorer.urp(Some(anchor), self.rows[anchor_row][j], Some(g), self.rows[k][j]);
                    best = best.max(u);
                }
            }
            if best > 0.0 {
                order.push((k, best));
            }
        }
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut filled = 1;
        for (k, _) in order {
            let cands = self.cell_candidates(&grid, self.row_words[k], n, k);
            if let Some((g, _)) = self.best_for_cell(&grid, k, n, &cands) {
                grid[k][n] = Some(g);
                filled += 1;
            }
        }
        if filled < 2 {
            return None;
        }
        let gain = self.scorer.column_total(&grid, n);
        let column = grid.iter().map(|row| row[n]).collect();
        Some((column, gain))
    }

    fn build_row(&self, word: usize, anchor_col: usize, anchor: usize) -> Option<(Vec<Option<usize>>, f64)> {
        let m = self.m();
        let n = self.n();
        let mut grid = self.rows.clone();
        let mut new_row = vec![None; n];
        new_row[anchor_col] = Some(anchor);
        grid.push(new_row);

        let mut order: Vec<(usize, f64)> = Vec::with_capacity(n);
        for j in 0..n {
            if j == anchor_col {
                continue;
            }
            let cands = self.cell_candidates(&grid, word, j, m);
            let mut best = 0.0f64;
            for &h in &cands {
                if h == anchor {
                    continue;
                }
                for k in 0..m {
                    let u = self.scorer.urp(Some(anchor), Some(h), self.rows[k][anchor_col], self.rows[k][j]);
                    best = best.max(u);
                }
            }
            if best > 0.0 {
                order.push((j, best));
            }
        }
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut filled = 1;
        for (j, _) in order {
            let cands: Vec<usize> = self
                .cell_candidates(&grid, word, j, m)
                .into_iter()
                .filter(|h| !grid[m].contains(&Some(*h)))
                .collect();
            if let Some((h, _)) = self.best_for_cell(&grid, m, j, &cands) {
                grid[m][j] = Some(h);
                filled += 1;
            }
        }
        if filled < 2 {
            return None;
        }
        let gain = self.scorer.row_total(&grid, m);
        Some((grid.pop().expect("row just pushed"), gain))
    }

    /// Sum of `u` over URPs that use cell `(r, c1)` or cell `(r, c2)`.
    fn two_cell_total(&self, grid: &Grid, r: usize, c1: usize, c2: usize) -> f64 {
        let n = ncols(grid);
        let mut acc = 0.0;
        for (k, other) in grid.iter().enumerate() {
            if k == r {
                continue;
            }
            for j in 0..n {
                if j != c1 {
                    acc += self.scorer.urp(grid[r][c1], grid[r][j], other[c1], other[j]);
                }
                if j != c1 && j != c2 {
                    acc += self.scorer.urp(grid[r][c2], grid[r][j], other[c2], other[j]);
                }
            }
        }
        acc
    }

    /// Whether `f` may sit in column `col` next to the cells of the other rows.
    fn fits_column(&self, grid: &Grid, f: usize, row: usize, col: usize) -> bool {
        let fs = self.scorer.fs;
        grid.iter()
            .enumerate()
            .filter(|(k, _)| *k != row)
            .filter_map(|(_, other)| other[col])
            .all(|g| self.scorer.cache.co_instance(fs, f, g))
    }

    fn best_move(&self) -> Option<(Move, f64)> {
        let (m, n) = (self.m(), self.n());
        let current = self.objective();
        let mut best: Option<(Move, f64)> = None;
        let consider = |mv: Move, u: f64, best: &mut Option<(Move, f64)>| {
            let bar = best.as_ref().map_or(current, |(_, bu)| *bu);
            if u > bar + IMPROVEMENT_EPS {
                *best = Some((mv, u));
            }
        };

        // Add a column.
        for anchor_row in 0..m {
            let word = self.row_words[anchor_row];
            for &a in &self.words.words[word] {
                if self.used[a] {
                    continue;
                }
                let linked = self.rows[anchor_row]
                    .iter()
                    .flatten()
                    .any(|&f| self.scorer.cache.is_correspondence(a, f));
                if !linked {
                    continue;
                }
                if let Some((col, gain)) = self.build_column(anchor_row, a) {
                    let u = (self.total + gain) / (m * (n + 1)) as f64;
                    consider(Move::AddColumn(col), u, &mut best);
                }
            }
        }

        // Remove a column.
        if n > 2 {
            for c in 0..n {
                let u = (self.total - self.scorer.column_total(&self.rows, c)) / (m * (n - 1)) as f64;
                consider(Move::RemoveColumn(c), u, &mut best);
            }
        }

        // Add a row.
        for word in 0..self.words.words.len() {
            if self.row_words.contains(&word) {
                continue;
            }
            for c in 0..n {
                for a in self.cell_candidates(&self.rows, word, c, usize::MAX) {
                    if let Some((row, gain)) = self.build_row(word, c, a) {
                        let u = (self.total + gain) / ((m + 1) * n) as f64;
                        consider(Move::AddRow(word, row), u, &mut best);
                    }
                }
            }
        }

        // Remove a row.
        if m > 2 {
            for r in 0..m {
                let keeps_columns = (0..n).all(|c| (0..m).filter(|&k| k != r && self.rows[k][c].is_some()).count() >= 2);
                if !keeps_columns {
                    continue;
                }
                let u = (self.total - self.scorer.row_total(&self.rows, r)) / ((m - 1) * n) as f64;
                consider(Move::RemoveRow(r), u, &mut best);
            }
        }

        // Replace or clear a single cell.
        let norm = (m * n) as f64;
        for r in 0..m {
            for c in 0..n {
                let old = self.rows[r][c];
                let old_gain = old.map_or(0.0, |f| self.scorer.cell_gain(&self.rows, r, c, f));
                let filled = (0..m).filter(|&k| self.rows[k][c].is_some()).count();
                if old.is_some() && filled > 2 {
                    consider(Move::SetCell(r, c, None), (self.total - old_gain) / norm, &mut best);
                }
                for g in self.cell_candidates(&self.rows, self.row_words[r], c, r) {
                    let gain = self.scorer.cell_gain(&self.rows, r, c, g);
                    consider(Move::SetCell(r, c, Some(g)), (self.total - old_gain + gain) / norm, &mut best);
                }
            }
        }

        // Exchange two cells of one row.
        let mut swapped = self.rows.clone();
        for r in 0..m {
            for c1 in 0..n {
                for c2 in c1 + 1..n {
                    let (a, b) = (self.rows[r][c1], self.rows[r][c2]);
                    if a.is_none() && b.is_none() {
                        continue;
                    }
                    let fill = |c: usize| (0..m).filter(|&k| k != r && self.rows[k][c].is_some()).count();
                    if a.is_none() && fill(c2) < 2 || b.is_none() && fill(c1) < 2 {
                        continue;
                    }
                    if a.is_some_and(|f| !self.fits_column(&self.rows, f, r, c2))
                        || b.is_some_and(|f| !self.fits_column(&self.rows, f, r, c1))
                    {
                        continue;
                    }
                    let before = self.two_cell_total(&self.rows, r, c1, c2);
                    swapped[r][c1] = b;
                    swapped[r][c2] = a;
                    let after = self.two_cell_total(&swapped, r, c1, c2);
                    swapped[r][c1] = a;
                    swapped[r][c2] = b;
                    consider(Move::SwapCells(r, c1, c2), (self.total - before + after) / norm, &mut best);
                }
            }
        }
        best
    }

    fn without_row(&self, r: usize) -> Self {
        let mut out = self.clone();
        for f in out.rows.remove(r).into_iter().flatten() {
            out.used[f] = false;
        }
        out.row_words.remove(r);
        out.total = out.scorer.total(&out.rows);
        out
    }

    fn without_column(&self, c: usize) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            if let Some(f) = row.remove(c) {
                out.used[f] = false;
            }
        }
        out.total = out.scorer.total(&out.rows);
        out
    }

    /// Rebuilds one whole row or column from one of its own features, placed
    /// in any column. Only tried at a local optimum of the other moves.
    fn best_rebuild(&self) -> Option<(Move, f64)> {
        let (m, n) = (self.m(), self.n());
        let norm = (m * n) as f64;
        let mut best: Option<(Move, f64)> = None;
        let mut consider = |mv: Move, u: f64| {
            let bar = best.as_ref().map_or(self.objective(), |(_, bu)| *bu);
            if u > bar + IMPROVEMENT_EPS {
                best = Some((mv, u));
            }
        };
        for r in 0..m {
            let reduced = self.without_row(r);
            let word = self.row_words[r];
            for &f in self.rows[r].iter().flatten() {
                for c in 0..n {
                    if !reduced.cell_candidates(&reduced.rows, word, c, usize::MAX).contains(&f) {
                        continue;
                    }
                    let Some((row, gain)) = reduced.build_row(word, c, f) else {
                        continue;
                    };
                    if row == self.rows[r] {
                        continue;
                    }
                    let columns_ok =
                        (0..n).all(|j| reduced.rows.iter().filter(|k| k[j].is_some()).count() + row[j].is_some() as usize >= 2);
                    if columns_ok {
                        consider(Move::ReplaceRow(r, row), (reduced.total + gain) / norm);
                    }
                }
            }
        }
        for c in 0..n {
            let reduced = self.without_column(c);
            for r in 0..m {
                let Some(f) = self.rows[r][c] else { continue };
                let Some((col, gain)) = reduced.build_column(r, f) else { continue };
                if (0..m).all(|k| col[k] == self.rows[k][c]) {
                    continue;
                }
                consider(Move::ReplaceColumn(c, col), (reduced.total + gain) / norm);
            }
        }
        best
    }

    fn apply(&mut self, mv: Move) {
        match mv {
            Move::AddColumn(col) => {
                for (row, cell) in self.rows.iter_mut().zip(col) {
                    if let Some(f) = cell {
                        self.used[f] = true;
                    }
                    row.push(cell);
                }
            }
            Move::RemoveColumn(c) => {
                for row in &mut self.rows {
                    if let Some(f) = row.remove(c) {
                        self.used[f] = false;
                    }
                }
            }
            Move::AddRow(word, row) => {
                for f in row.iter().flatten() {
                    self.used[*f] = true;
                }
                self.rows.push(row);
                self.row_words.push(word);
            }
            Move::RemoveRow(r) => {
                for f in self.rows.remove(r).into_iter().flatten() {
                    self.used[f] = false;
                }
                self.row_words.remove(r);
            }
            Move::SetCell(r, c, cell) => {
                if let Some(old) = self.rows[r][c] {
                    self.used[old] = false;
                }
                if let Some(f) = cell {
                    self.used[f] = true;
                }
                self.rows[r][c] = cell;
            }
            Move::SwapCells(r, c1, c2) => self.rows[r].swap(c1, c2),
            Move::ReplaceRow(r, row) => {
                for f in self.rows[r].iter().flatten() {
                    self.used[*f] = false;
                }
                for f in row.iter().flatten() {
                    self.used[*f] = true;
                }
                self.rows[r] = row;
            }
            Move::ReplaceColumn(c, col) => {
                for (row, cell) in self.rows.iter_mut().zip(col) {
                    if let Some(f) = row[c] {
                        self.used[f] = false;
                    }
                    row[c] = cell;
                }
                for f in self.rows.iter().filter_map(|row| row[c]) {
                    self.used[f] = true;
                }
            }
        }
        // Recompute from scratch so rounding never accumulates across moves.
        self.total = self.scorer.total(&self.rows);
    }

    fn run(mut self) -> (Vec<usize>, Grid, f64) {
        while let Some((mv, _)) = self.best_move().or_else(|| self.best_rebuild()) {
            let before = self.objective();
            self.apply(mv);
            debug_assert!(self.objective() > before);
        }
        let u = self.objective();
        (self.row_words, self.rows, u)
    }
}

/// Result of expanding one initial.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    /// Visual word of each row.
    pub row_words: Vec<usize>,
    pub matrix: RpMatrix,
    pub score: f64,
}

fn expand(fs: &FeatureSet, words: &VisualWordIndex, params: &DiscoveryParams, cache: &AffinityCache, initial: &Urp) -> Option<Expansion> {
    let scorer = Scorer::new(fs, cache, params);
    let search = Search::new(scorer, words, initial)?;
    let (row_words, rows, score) = search.run();
    let (row_words, rows) = canonical_order(fs, row_words, rows);
    Some(Expansion {
        row_words,
        matrix: RpMatrix::from_rows(rows),
        score,
    })
}

/// Grows an initial URP into a local optimum of `U`.
///
/// The initial must consist of two correspondences from two distinct words;
/// otherwise the initial 2×2 matrix is returned unchanged.
pub fn expand_rp(initial: &Urp, fs: &FeatureSet, words: &VisualWordIndex, params: &DiscoveryParams, cache: &AffinityCache) -> RpMatrix {
    expand(fs, words, params, cache, initial).map_or_else(
        || {
            RpMatrix::from_rows(vec![
                vec![Some(initial.f11), Some(initial.f12)],
                vec![Some(initial.f21), Some(initial.f22)],
            ])
        },
        |e| e.matrix,
    )
}

/// Rows by word index, columns by instance centroid (x, then y).
fn canonical_order(fs: &FeatureSet, row_words: Vec<usize>, rows: Grid) -> (Vec<usize>, Grid) {
    let mut paired: Vec<(usize, Vec<Option<usize>>)> = row_words.into_iter().zip(rows).collect();
    paired.sort_by_key(|(w, _)| *w);
    let (row_words, rows): (Vec<usize>, Grid) = paired.into_iter().unzip();
    let n = ncols(&rows);
    let centroid = |c: usize| {
        let (mut sx, mut sy, mut k) = (0.0, 0.0, 0.0);
        for row in &rows {
            if let Some(f) = row[c] {
                sx += fs.get(f).x;
                sy += fs.get(f).y;
                k += 1.0;
            }
        }
        (sx / k, sy / k)
    };
    let mut cols: Vec<(usize, (f64, f64))> = (0..n).map(|c| (c, centroid(c))).collect();
    cols.sort_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.1 .1.total_cmp(&b.1 .1)).then(a.0.cmp(&b.0)));
    let rows = rows.iter().map(|row| cols.iter().map(|(c, _)| row[*c]).collect()).collect();
    (row_words, rows)
}

/// Every formable initial URP with its affinity, grouped by word pair.
fn enumerate_initials(fs: &FeatureSet, words: &VisualWordIndex, params: &DiscoveryParams, cache: &AffinityCache) -> Vec<Vec<(Urp, f64)>> {
    let mut strata = Vec::new();
    let word_pairs: Vec<Vec<(usize, usize)>> = words
        .words
        .iter()
        .map(|w| {
            let mut v = Vec::new();
            for (i, &a) in w.iter().enumerate() {
                for &b in &w[i + 1..] {
                    if cache.is_correspondence(a, b) {
                        v.push((a, b));
                    }
                }
            }
            v
        })
        .collect();
    for wa in 0..words.words.len() {
        for wb in wa + 1..words.words.len() {
            let mut stratum = Vec::new();
            for &(p, q) in &word_pairs[wa] {
                for &(s, t) in &word_pairs[wb] {
                    for (x, y) in [(s, t), (t, s)] {
                        if cache.co_instance(fs, p, x) && cache.co_instance(fs, q, y) {
                            let urp = Urp::new(p, q, x, y);
                            if let Ok(u) = urp_affinity(fs, &urp, params) {
                                stratum.push((urp, u));
                            }
                        }
                    }
                }
            }
            if !stratum.is_empty() {
                stratum.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.ids().cmp(&b.0.ids())));
                strata.push(stratum);
            }
        }
    }
    strata
}

/// Picks `n_initials` URPs: a pool is filled round-robin across word-pair
/// strata (strata ordered by their best affinity), then sampled with the
/// seeded generator when it exceeds the budget.
pub fn select_initials(fs: &FeatureSet, words: &VisualWordIndex, params: &DiscoveryParams, cache: &AffinityCache) -> Vec<Urp> {
    let mut strata = enumerate_initials(fs, words, params, cache);
    strata.sort_by(|a, b| b[0].1.total_cmp(&a[0].1));
    let total: usize = strata.iter().map(Vec::len).sum();
    let budget = params.n_initials;
    let pool_size = total.min(budget.saturating_mul(4));
    let mut pool = Vec::with_capacity(pool_size);
    let mut depth = 0;
    while pool.len() < pool_size {
        for s in &strata {
            if let Some((urp, _)) = s.get(depth) {
                pool.push(*urp);
                if pool.len() == pool_size {
                    break;
                }
            }
        }
        depth += 1;
    }
    if pool.len() <= budget {
        return pool;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut picked = sample(&mut rng, pool.len(), budget).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| pool[i]).collect()
}

/// Expands every initial and returns the best result (ties: lowest initial
/// index). An initial is skipped when an earlier batch produced a matrix
/// holding it as a sub-matrix: `f11, f21` in one column and `f12, f22` in
/// another.
fn best_expansion(
    fs: &FeatureSet,
    words: &VisualWordIndex,
    params: &DiscoveryParams,
    cache: &AffinityCache,
    initials: &[Urp],
) -> Option<Expansion> {
    // Per feature: (result index, column) of every earlier placement.
    let mut placed: Vec<Vec<(usize, usize)>> = vec![Vec::new(); fs.len()];
    let mut n_results = 0;
    let embedded = |placed: &[Vec<(usize, usize)>], u: &Urp| {
        placed[u.f11].iter().any(|&(r, c1)| {
            placed[u.f21].contains(&(r, c1))
                && placed[u.f12]
                    .iter()
                    .any(|&(r2, c2)| r2 == r && c2 != c1 && placed[u.f22].contains(&(r, c2)))
        })
    };
    let mut best: Option<Expansion> = None;
    for batch in initials.chunks(INITIAL_BATCH) {
        let todo: Vec<&Urp> = batch.iter().filter(|u| !embedded(&placed, u)).collect();
        let results: Vec<Option<Expansion>> = todo.par_iter().map(|u| expand(fs, words, params, cache, u)).collect();
        for e in results.into_iter().flatten() {
            for c in 0..e.matrix.n {
                for (_, f) in e.matrix.column(c) {
                    placed[f].push((n_results, c));
                }
            }
            n_results += 1;
            if best.as_ref().is_none_or(|b| e.score > b.score + IMPROVEMENT_EPS) {
                best = Some(e);
            }
        }
    }
    best
}

/// Builds a pattern record with instance regions.
pub fn make_pattern(fs: &FeatureSet, matrix: RpMatrix, score: f64, params: &DiscoveryParams) -> RecurringPattern {
    let instances = (0..matrix.n)
        .map(|c| {
            let members: Vec<usize> = matrix.column(c).map(|(_, f)| f).collect();
            InstanceRegion::from_members(fs, members)
        })
        .collect();
    RecurringPattern {
        matrix,
        score,
        instances,
        params: params.clone(),
    }
}

fn union_iod(a: &[BBox], b: &[BBox]) -> f64 {
    let area = box_union_area(a, None);
    if area <= 0.0 {
        return 0.0;
    }
    box_unions_intersection_area(a, b) / area
}

/// Multi-pattern discovery: repeatedly takes the best expansion, accepts it
/// when `U ≥ u_min`, removes its features and searches again.
///
/// Returned patterns are sorted by `U` descending; a candidate whose
/// instance union overlaps an accepted pattern by IOD > 0.5 is dropped.
pub fn discover_rps(fs: &FeatureSet, words: &VisualWordIndex, params: &DiscoveryParams) -> Vec<RecurringPattern> {
    let mut removed = vec![false; fs.len()];
    let mut accepted: Vec<RecurringPattern> = Vec::new();
    while accepted.len() < params.max_rps {
        let active = words.without(&removed);
        if active.is_empty() {
            break;
        }
        let cache = precompute_affinity_cache(fs, &active, params);
        let initials = select_initials(fs, &active, params, &cache);
        let Some(best) = best_expansion(fs, &active, params, &cache, &initials) else {
            break;
        };
        if best.score < params.u_min || best.matrix.n < 2 || best.matrix.m < 2 {
            break;
        }
        for f in best.matrix.feature_ids() {
            removed[f] = true;
        }
        let rp = make_pattern(fs, best.matrix, best.score, params);
        let boxes = rp.instance_boxes();
        let duplicate = accepted.iter().any(|a| union_iod(&boxes, &a.instance_boxes()) > DEDUP_IOD);
        if !duplicate {
            accepted.push(rp);
        }
    }
    accepted.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal));
    accepted
}

/// Runs discovery at every grid point and keeps the point whose best
/// pattern has the largest `U`. Ties go to the smaller `p_d`, then `p_s`,
/// then `p_theta`. When nothing is found anywhere the first grid point is
/// returned with an empty list.
pub fn grid_search_params(fs: &FeatureSet, words: &VisualWordIndex, grid: &[DiscoveryParams]) -> (DiscoveryParams, Vec<RecurringPattern>) {
    assert!(!grid.is_empty(), "parameter grid must not be empty");
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&grid[a], &grid[b]);
        pa.p_d
            .total_cmp(&pb.p_d)
            .then(pa.p_s.total_cmp(&pb.p_s))
            .then(pa.p_theta.total_cmp(&pb.p_theta))
            .then(a.cmp(&b))
    });
    let results: Vec<Vec<RecurringPattern>> = order.par_iter().map(|&i| discover_rps(fs, words, &grid[i])).collect();
    let mut best: Option<(usize, f64)> = None;
    for (slot, rps) in results.iter().enumerate() {
        let Some(top) = rps.first() else { continue };
        if best.is_none_or(|(_, u)| top.score > u + IMPROVEMENT_EPS) {
            best = Some((slot, top.score));
        }
    }
    match best {
        Some((slot, _)) => (grid[order[slot]].clone(), results[slot].clone()),
        None => (grid[0].clone(), Vec::new()),
    }
}
