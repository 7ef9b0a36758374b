use crate::features::VisualWordIndex;
use crate::types::{DiscoveryParams, FeatureSet};

use super::affinity::wrap_pi;

/// Candidate pairs admitted by the adaptive constraints, computed once
/// before the search.
///
/// * Correspondences are same-word pairs of distinct features whose scale
///   ratio lies in `[1 − p_s, 1/(1 − p_s)]` and whose wrapped orientation
///   difference is at most `p_theta` degrees. Only correspondences can sit in
///   the same row of a URP.
/// * Co-instance pairs are features of different words no farther apart
///   than `p_d` times the image diagonal. Only co-instance pairs can share a
///   column.
#[derive(Clone, Debug)]
pub struct AffinityCache {
    partners: Vec<Vec<usize>>,
    n_pairs: usize,
    word_of: Vec<Option<usize>>,
    max_instance_extent: f64,
}

/// Orientation difference folded into `[0, π]`.
pub fn wrapped_orientation_diff(a: f64, b: f64) -> f64 {
    wrap_pi(a - b).abs()
}

pub fn scale_ratio_admissible(s_a: f64, s_b: f64, p_s: f64) -> bool {
    if p_s >= 1.0 {
        return true;
    }
    let ratio = s_b / s_a;
    let lo = 1.0 - p_s;
    let hi = 1.0 / (1.0 - p_s);
    ratio >= lo && ratio <= hi
}

impl AffinityCache {
    pub fn is_correspondence(&self, a: usize, b: usize) -> bool {
        a != b && self.partners(a).binary_search(&b).is_ok()
    }

    /// Same-word partners of `f` (ascending ids).
    pub fn partners(&self, f: usize) -> &[usize] {
        self.partners.get(f).map_or(&[], Vec::as_slice)
    }

    pub fn word_of(&self, f: usize) -> Option<usize> {
        self.word_of.get(f).copied().flatten()
    }

    pub fn max_instance_extent(&self) -> f64 {
        self.max_instance_extent
    }

    pub fn co_instance(&self, fs: &FeatureSet, a: usize, b: usize) -> bool {
        a != b && self.word_of(a) != self.word_of(b) && fs.get(a).distance(fs.get(b)) <= self.max_instance_extent
    }

    pub fn len(&self) -> usize {
        self.n_pairs
    }

    pub fn is_empty(&self) -> bool {
        self.n_pairs == 0
    }

    /// All correspondences as `(lower id, higher id)`, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.partners
            .iter()
            .enumerate()
            .flat_map(|(a, ps)| ps.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
            .collect()
    }
}

pub fn precompute_affinity_cache(fs: &FeatureSet, words: &VisualWordIndex, params: &DiscoveryParams) -> AffinityCache {
    let max_theta = params.p_theta.to_radians();
    let mut partners = vec![Vec::new(); fs.len()];
    let mut n_pairs = 0;
    let mut word_of = vec![None; fs.len()];
    for (wi, word) in words.words.iter().enumerate() {
        for &f in word {
            word_of[f] = Some(wi);
        }
        for (i, &a) in word.iter().enumerate() {
            for &b in &word[i + 1..] {
                let (fa, fb) = (fs.get(a), fs.get(b));
                if !scale_ratio_admissible(fa.scale, fb.scale, params.p_s) {
                    continue;
                }
                if wrapped_orientation_diff(fa.orientation, fb.orientation) > max_theta + 1e-12 {
                    continue;
                }
                n_pairs += 1;
                partners[a].push(b);
                partners[b].push(a);
            }
        }
    }
    for p in &mut partners {
        p.sort_unstable();
    }
    AffinityCache {
        partners,
        n_pairs,
        word_of,
        max_instance_extent: params.p_d * fs.diagonal(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Feature;

    fn two(f0: Feature, f1: Feature, same_word: bool) -> (FeatureSet, VisualWordIndex) {
        let fs = FeatureSet::new(1000, 1000, 1, vec![f0, f1]).unwrap();
        let words = if same_word {
            VisualWordIndex::from_words(2, vec![vec![0, 1]])
        } else {
            VisualWordIndex {
                words: vec![vec![0], vec![1]],
                assignment: vec![Some(0), Some(1)],
            }
        };
        (fs, words)
    }

    #[test]
    fn far_co_instance_pair_excluded() {
        let diag = 1000f64.hypot(1000.0);
        let (fs, words) = two(
            Feature::new(0, 10.0, 10.0, 1.0, 1.0, vec![1.0]),
            Feature::new(
                1,
                10.0 + 0.5 * diag / 2f64.sqrt(),
                10.0 + 0.5 * diag / 2f64.sqrt(),
                1.0,
                1.0,
                vec![0.0],
            ),
            false,
        );
        let params = DiscoveryParams {
            p_d: 0.2,
            ..DiscoveryParams::default()
        };
        let cache = precompute_affinity_cache(&fs, &words, &params);
        assert!(!cache.co_instance(&fs, 0, 1));
        let near = DiscoveryParams { p_d: 0.6, ..params };
        assert!(precompute_affinity_cache(&fs, &words, &near).co_instance(&fs, 0, 1));
    }

    #[test]
    fn scale_ratio_bound() {
        let (fs, words) = two(
            Feature::new(0, 10.0, 10.0, 1.0, 1.0, vec![1.0]),
            Feature::new(1, 50.0, 10.0, 1.4, 1.0, vec![1.0]),
            true,
        );
        let p = DiscoveryParams {
            p_s: 0.5,
            ..DiscoveryParams::default()
        };
        assert!(precompute_affinity_cache(&fs, &words, &p).is_correspondence(0, 1));
        let tight = DiscoveryParams { p_s: 0.2, ..p };
        assert!(!precompute_affinity_cache(&fs, &words, &tight).is_correspondence(0, 1));
    }

    #[test]
    fn orientation_wraps() {
        let (fs, words) = two(
            Feature::new(0, 10.0, 10.0, 1.0, 10f64.to_radians(), vec![1.0]),
            Feature::new(1, 50.0, 10.0, 1.0, 350f64.to_radians(), vec![1.0]),
            true,
        );
        let p = DiscoveryParams {
            p_theta: 30.0,
            ..DiscoveryParams::default()
        };
        let cache = precompute_affinity_cache(&fs, &words, &p);
        assert!(cache.is_correspondence(0, 1));
        assert_eq!(cache.partners(0), &[1]);
        let tight = DiscoveryParams { p_theta: 15.0, ..p };
        assert!(!precompute_affinity_cache(&fs, &words, &tight).is_correspondence(0, 1));
    }
}
