//! Shared fixtures and oracles for integration and acceptance tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rescu::discovery::{precompute_affinity_cache, AffinityCache, Scorer};
use rescu::features::VisualWordIndex;
use rescu::{DiscoveryParams, Feature, FeatureSet};

/// A small random scene: 2–4 perturbed copies of a 2–3 keypoint template,
/// with dropped keypoints and a few stray features, at most 12 features.
pub fn small_scene(seed: u64) -> (FeatureSet, VisualWordIndex) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_words = rng.gen_range(2..=3);
    let n_inst = rng.gen_range(2..=4);
    let template: Vec<(f64, f64, f64, f64)> = (0..n_words)
        .map(|_| {
            (
                rng.gen_range(-30.0..30.0),
                rng.gen_range(-30.0..30.0),
                rng.gen_range(1.5..5.0),
                rng.gen_range(0.3..6.0),
            )
        })
        .collect();
    let mut feats: Vec<(f64, f64, f64, f64, usize)> = Vec::new();
    for k in 0..n_inst {
        let cx = 100.0 + 150.0 * k as f64 + rng.gen_range(-20.0..20.0);
        let cy = 150.0 + rng.gen_range(-60.0..60.0);
        let zoom = rng.gen_range(0.8..1.25);
        for (w, &(x, y, s, o)) in template.iter().enumerate() {
            if rng.gen_bool(0.12) {
                continue;
            }
            feats.push((
                cx + zoom * x + rng.gen_range(-1.0..1.0),
                cy + zoom * y + rng.gen_range(-1.0..1.0),
                zoom * s * rng.gen_range(0.9..1.1),
                o + rng.gen_range(-0.08..0.08),
                w,
            ));
        }
    }
    let extra = rng.gen_range(0..=2);
    for _ in 0..extra {
        feats.push((
            rng.gen_range(10.0..690.0),
            rng.gen_range(10.0..290.0),
            rng.gen_range(1.5..5.0),
            rng.gen_range(0.3..6.0),
            rng.gen_range(0..n_words),
        ));
    }
    feats.truncate(12);
    let features = feats
        .iter()
        .enumerate()
        .map(|(i, f)| Feature::new(i, f.0, f.1, f.2, f.3, vec![0.0]))
        .collect();
    let fs = FeatureSet::new(700, 300, 1, features).expect("valid fixture");
    let mut words = vec![Vec::new(); n_words];
    for (i, f) in feats.iter().enumerate() {
        words[f.4].push(i);
    }
    let words = VisualWordIndex::from_words(fs.len(), words);
    (fs, words)
}

/// Exhaustive maximum of `U` over every admissible matrix: any subset of at
/// least two words as rows, any set of at least two feature-disjoint
/// columns, each column holding at most one feature per row, at least two
/// filled cells, and only co-instance features together.
pub fn brute_force_optimum(fs: &FeatureSet, words: &VisualWordIndex, params: &DiscoveryParams) -> f64 {
    brute_force_argmax(fs, words, params).0
}

/// Optimum `U` with one maximizing matrix (rows by word order).
pub fn brute_force_argmax(fs: &FeatureSet, words: &VisualWordIndex, params: &DiscoveryParams) -> (f64, Vec<Vec<Option<usize>>>) {
    let cache = precompute_affinity_cache(fs, words, params);
    let scorer = Scorer::new(fs, &cache, params);
    let n_words = words.words.len();
    let mut best = (0.0f64, Vec::new());
    for mask in 0u32..(1 << n_words) {
        let rows: Vec<usize> = (0..n_words).filter(|w| mask & (1 << w) != 0).collect();
        if rows.len() < 2 {
            continue;
        }
        let columns = admissible_columns(fs, words, &cache, &rows);
        let mut chosen = Vec::new();
        let mut used = vec![false; fs.len()];
        search(&scorer, &columns, 0, &mut chosen, &mut used, rows.len(), &mut best);
    }
    best
}

fn admissible_columns(fs: &FeatureSet, words: &VisualWordIndex, cache: &AffinityCache, rows: &[usize]) -> Vec<Vec<Option<usize>>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        fs: &FeatureSet,
        words: &VisualWordIndex,
        cache: &AffinityCache,
        rows: &[usize],
        current: &mut Vec<Option<usize>>,
        out: &mut Vec<Vec<Option<usize>>>,
    ) {
        if current.len() == rows.len() {
            if current.iter().flatten().count() >= 2 {
                out.push(current.clone());
            }
            return;
        }
        current.push(None);
        rec(fs, words, cache, rows, current, out);
        current.pop();
        for &f in &words.words[rows[current.len()]] {
            if current.iter().flatten().all(|&g| cache.co_instance(fs, f, g)) {
                current.push(Some(f));
                rec(fs, words, cache, rows, current, out);
                current.pop();
            }
        }
    }
    rec(fs, words, cache, rows, &mut current, &mut out);
    out
}

fn search(
    scorer: &Scorer,
    columns: &[Vec<Option<usize>>],
    start: usize,
    chosen: &mut Vec<usize>,
    used: &mut [bool],
    m: usize,
    best: &mut (f64, Vec<Vec<Option<usize>>>),
) {
    if chosen.len() >= 2 {
        let grid: Vec<Vec<Option<usize>>> = (0..m).map(|r| chosen.iter().map(|&c| columns[c][r]).collect()).collect();
        let u = scorer.objective(&grid);
        if u > best.0 {
            *best = (u, grid);
        }
    }
    for c in start..columns.len() {
        if columns[c].iter().flatten().any(|&f| used[f]) {
            continue;
        }
        for &f in columns[c].iter().flatten() {
            used[f] = true;
        }
        chosen.push(c);
        search(scorer, columns, c + 1, chosen, used, m, best);
        chosen.pop();
        for &f in columns[c].iter().flatten() {
            used[f] = false;
        }
    }
}
