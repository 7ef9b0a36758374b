//! Implicit lines through corresponding features.

use crate::error::{Error, Result};
use crate::types::{FeatureSet, LineEstimate, RecurringPattern};

/// A row's line is kept when its rms residual is at most this fraction of
/// the support extent.
pub const COLINEARITY_GATE: f64 = 0.02;

/// Points per line below which no line is fitted.
pub const MIN_LINE_POINTS: usize = 3;

/// Centroid and second moments `(sxx, sxy, syy)` of a point set.
pub(crate) fn moments(points: &[[f64; 2]]) -> ([f64; 2], f64, f64, f64) {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - cx, p[1] - cy);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    ([cx, cy], sxx / n, sxy / n, syy / n)
}

/// Unit direction of largest spread.
pub(crate) fn principal_direction(sxx: f64, sxy: f64, syy: f64) -> [f64; 2] {
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    [phi.cos(), phi.sin()]
}

/// Largest distance between consecutive extremes along `dir`.
pub(crate) fn extent_along(points: &[[f64; 2]], dir: [f64; 2]) -> f64 {
    let ts = points.iter().map(|p| p[0] * dir[0] + p[1] * dir[1]);
    let (lo, hi) = ts.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)));
    hi - lo
}

/// Total-least-squares line through `points`, normalized so that
/// `a² + b² = 1` with `a > 0` (or `a = 0, b > 0`).
pub fn fit_line_to_word(points: &[[f64; 2]], min_points: usize) -> Result<LineEstimate> {
    let need = min_points.max(2);
    if points.len() < need {
        return Err(Error::InsufficientPoints { got: points.len(), need });
    }
    let (c, sxx, sxy, syy) = moments(points);
    let spread = sxx + syy;
    let scale = c[0].abs().max(c[1].abs()).max(1.0);
    if spread <= (1e-12 * scale).powi(2) {
        return Err(Error::DegenerateLine);
    }
    let d = principal_direction(sxx, sxy, syy);
    let (mut a, mut b) = (-d[1], d[0]);
    if a < 0.0 || (a == 0.0 && b < 0.0) {
        a = -a;
        b = -b;
    }
    let c0 = -(a * c[0] + b * c[1]);
    let ss: f64 = points.iter().map(|p| (a * p[0] + b * p[1] + c0).powi(2)).sum();
    Ok(LineEstimate {
        a,
        b,
        c: c0,
        support: points.to_vec(),
        rms_residual: (ss / points.len() as f64).sqrt(),
        source_word: 0,
    })
}

/// One line per pattern row with at least three filled cells; rows whose
/// points are not colinear within the gate are skipped.
pub fn lines_from_rp(rp: &RecurringPattern, fs: &FeatureSet) -> Vec<LineEstimate> {
    if rp.matrix.n < MIN_LINE_POINTS {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (r, row) in rp.matrix.rows.iter().enumerate() {
        let points: Vec<[f64; 2]> = row.iter().flatten().map(|&f| fs.get(f).pos()).collect();
        let Ok(mut line) = fit_line_to_word(&points, MIN_LINE_POINTS) else {
            continue;
        };
        let extent = extent_along(&points, line.direction());
        if line.rms_residual > COLINEARITY_GATE * extent {
            continue;
        }
        line.source_word = r;
        out.push(line);
    }
    out
}
