//! Cross-ratio translation-symmetry test.
//!
//! Four equally spaced colinear points have cross-ratio `AC·BD/(BC·AD) = 4/3`,
//! and the value survives any perspective projection. Each visual-word row of
//! a pattern traces the same 3D translation across instances, so its points
//! are tested window by window.

use crate::error::{Error, Result};
use crate::types::{FeatureSet, RecurringPattern, TsResult};

use super::line::{moments, principal_direction};

pub const EQUAL_SPACING_CROSS_RATIO: f64 = 4.0 / 3.0;
pub const DEFAULT_TS_THRESHOLD: f64 = 0.06;
/// Centroids pass the colinearity gate when their rms distance to the
/// fitted axis is at most this fraction of their extent.
pub const TS_COLINEARITY_GATE: f64 = 0.02;

const COLINEAR_TOL: f64 = 1e-6;

/// Cross-ratio of four ordered positions on a line.
pub fn cross_ratio_1d(a: f64, b: f64, c: f64, d: f64) -> f64 {
    ((c - a) * (d - b)) / ((c - b) * (d - a))
}

/// `AC·BD / (BC·AD)` for four colinear points, using signed positions along
/// the line so the value stays invariant even when a projection reorders
/// the points through infinity.
pub fn cross_ratio(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Result<f64> {
    let pts = [a, b, c, d];
    let (dx, dy) = (d[0] - a[0], d[1] - a[1]);
    let len = dx.hypot(dy);
    for i in 0..4 {
        for j in i + 1..4 {
            let sep = (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]);
            if sep <= 1e-12 * len.max(1e-300) || sep == 0.0 {
                return Err(Error::DegeneratePoints);
            }
        }
    }
    let (ux, uy) = (dx / len, dy / len);
    for p in [b, c] {
        let offset = ((p[0] - a[0]) * uy - (p[1] - a[1]) * ux).abs();
        if offset > COLINEAR_TOL * len {
            return Err(Error::NonColinear { offset });
        }
    }
    let t = |p: [f64; 2]| (p[0] - a[0]) * ux + (p[1] - a[1]) * uy;
    Ok(cross_ratio_1d(0.0, t(b), t(c), len))
}

/// Column order along the first principal axis of the instance centroids
/// (ties by x, then y).
pub fn instance_order(centroids: &[[f64; 2]]) -> Vec<usize> {
    if centroids.is_empty() {
        return Vec::new();
    }
    let (c, sxx, sxy, syy) = moments(centroids);
    let mut dir = principal_direction(sxx, sxy, syy);
    if dir[0] < 0.0 || (dir[0] == 0.0 && dir[1] < 0.0) {
        dir = [-dir[0], -dir[1]];
    }
    let key = |p: [f64; 2]| (p[0] - c[0]) * dir[0] + (p[1] - c[1]) * dir[1];
    let mut order: Vec<usize> = (0..centroids.len()).collect();
    order.sort_by(|&i, &j| {
        let (p, q) = (centroids[i], centroids[j]);
        key(p).total_cmp(&key(q)).then(p[0].total_cmp(&q[0])).then(p[1].total_cmp(&q[1]))
    });
    order
}

fn rms_to_axis(points: &[[f64; 2]]) -> (f64, f64) {
    let (c, sxx, sxy, syy) = moments(points);
    let d = principal_direction(sxx, sxy, syy);
    let mut ss = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        let (x, y) = (p[0] - c[0], p[1] - c[1]);
        let along = x * d[0] + y * d[1];
        let across = -x * d[1] + y * d[0];
        ss += across * across;
        lo = lo.min(along);
        hi = hi.max(along);
    }
    ((ss / points.len() as f64).sqrt(), hi - lo)
}

/// Signed positions of `points` along their own principal axis, oriented
/// so that the first point comes first.
fn positions(points: &[[f64; 2]]) -> Vec<f64> {
    let (c, sxx, sxy, syy) = moments(points);
    let d = principal_direction(sxx, sxy, syy);
    let mut t: Vec<f64> = points.iter().map(|p| (p[0] - c[0]) * d[0] + (p[1] - c[1]) * d[1]).collect();
    if t.len() >= 2 && t[0] > t[t.len() - 1] {
        t.iter_mut().for_each(|v| *v = -*v);
    }
    t
}

fn window_ratios(track: &[[f64; 2]]) -> Vec<f64> {
    let t = positions(track);
    t.windows(4).map(|w| cross_ratio_1d(w[0], w[1], w[2], w[3])).collect()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Tests whether the pattern's instances are plausibly equally spaced along
/// a 3D translation.
///
/// Requires at least four instances whose centroids pass the colinearity
/// gate. Cross-ratios are taken over every window of four consecutive
/// instances on each fully filled row; when no row is complete, the instance
/// centroids are used instead. The deviation is the median `|cr − 4/3|`.
pub fn detect_translation_symmetry(rp: &RecurringPattern, fs: &FeatureSet, threshold: f64) -> TsResult {
    let n = rp.matrix.n;
    if n < 4 || rp.instances.len() != n {
        return TsResult::untested(threshold);
    }
    let centroids: Vec<[f64; 2]> = rp.instances.iter().map(|i| i.centroid).collect();
    let (rms, extent) = rms_to_axis(&centroids);
    if extent <= 0.0 || rms > TS_COLINEARITY_GATE * extent {
        return TsResult::untested(threshold);
    }
    let order = instance_order(&centroids);
    let mut ratios = Vec::new();
    for row in &rp.matrix.rows {
        if row.iter().all(Option::is_some) {
            let track: Vec<[f64; 2]> = order.iter().map(|&c| fs.get(row[c].expect("complete row")).pos()).collect();
            ratios.extend(window_ratios(&track));
        }
    }
    if ratios.is_empty() {
        let track: Vec<[f64; 2]> = order.iter().map(|&c| centroids[c]).collect();
        ratios = window_ratios(&track);
    }
    let mut dev: Vec<f64> = ratios.iter().map(|cr| (cr - EQUAL_SPACING_CROSS_RATIO).abs()).collect();
    let deviation = median(&mut dev);
    TsResult::new(true, ratios, deviation, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_spacing() {
        let cr = cross_ratio([0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]).unwrap();
        assert!((cr - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn uneven_spacing() {
        let cr = cross_ratio([0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [4.0, 4.0]).unwrap();
        assert!((cr - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            cross_ratio([0.0, 0.0], [1.0, 0.5], [2.0, 0.0], [3.0, 0.0]),
            Err(Error::NonColinear { .. })
        ));
        assert!(matches!(
            cross_ratio([0.0, 0.0], [0.0, 0.0], [2.0, 0.0], [3.0, 0.0]),
            Err(Error::DegeneratePoints)
        ));
    }

    #[test]
    fn order_along_axis() {
        let c = [[30.0, 1.0], [0.0, 0.0], [20.0, 0.5], [10.0, 0.2]];
        assert_eq!(instance_order(&c), vec![1, 3, 2, 0]);
    }
}
