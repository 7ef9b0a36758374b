//! Visual-word grouping of descriptors.
//!
//! Leader clustering with a complete-linkage admission test: features are
//! visited in descending response (ties by id); a feature joins the first
//! existing word whose every member lies within the distance threshold of it
//! (Euclidean, on L2-normalized descriptors), otherwise it opens a new word.
//! Words smaller than `min_word_size` are dropped.

use serde::{Deserialize, Serialize};

use crate::types::FeatureSet;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VisualWordIndex {
    /// Feature ids per word, ascending; words sorted by size descending.
    pub words: Vec<Vec<usize>>,
    /// `assignment[feature_id]` is the word index, if any.
    pub assignment: Vec<Option<usize>>,
}

impl VisualWordIndex {
    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn word_of(&self, feature: usize) -> Option<usize> {
        self.assignment.get(feature).copied().flatten()
    }

    /// Builds an index from explicit word lists (e.g. ground-truth words).
    /// Words below two members are discarded.
    pub fn from_words(n_features: usize, words: Vec<Vec<usize>>) -> Self {
        let mut words: Vec<Vec<usize>> = words
            .into_iter()
            .filter(|w| w.len() >= 2)
            .map(|mut w| {
                w.sort_unstable();
                w
            })
            .collect();
        words.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        let mut assignment = vec![None; n_features];
        for (wi, w) in words.iter().enumerate() {
            for &f in w {
                assignment[f] = Some(wi);
            }
        }
        Self { words, assignment }
    }

    /// Copy without the given features; words that fall below two members
    /// are dropped.
    pub fn without(&self, removed: &[bool]) -> Self {
        let words = self
            .words
            .iter()
            .map(|w| w.iter().copied().filter(|&f| !removed[f]).collect())
            .collect();
        Self::from_words(self.assignment.len(), words)
    }
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter().map(|x| x / n).collect()
    } else {
        v.to_vec()
    }
}

/// Leader-clustering radius on unit descriptors.
pub const DEFAULT_WORD_DISTANCE: f64 = 0.3;
/// Words with fewer members are dropped.
pub const MIN_WORD_SIZE: usize = 2;

pub fn descriptor_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn build_visual_words(fs: &FeatureSet, distance_threshold: f64, min_word_size: usize) -> VisualWordIndex {
    let descs: Vec<Vec<f64>> = fs.features.iter().map(|f| normalized(&f.descriptor)).collect();
    let mut order: Vec<usize> = (0..fs.len()).collect();
    order.sort_by(|&a, &b| fs.features[b].response.total_cmp(&fs.features[a].response).then(a.cmp(&b)));

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &f in &order {
        let home = clusters.iter().position(|members| {
            members
                .iter()
                .all(|&m| descriptor_distance(&descs[f], &descs[m]) <= distance_threshold)
        });
        match home {
            Some(c) => clusters[c].push(f),
            None => clusters.push(vec![f]),
        }
    }
    let min = min_word_size.max(2);
    let kept = clusters.into_iter().filter(|c| c.len() >= min).collect();
    VisualWordIndex::from_words(fs.len(), kept)
}
