//! RANSAC vanishing-point estimation with an angular constraint.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{LineEstimate, VanishingPoint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RansacConfig {
    /// Line pairs meeting at less than this angle are never sampled.
    pub angular_threshold_deg: f64,
    /// Maximum perpendicular distance from the candidate to an inlier line.
    pub inlier_point_to_line_px: f64,
    pub iterations: usize,
    pub rng_seed: u64,
    pub min_lines: usize,
    /// Disables the angular constraint; used to measure its effect.
    #[serde(default = "default_true")]
    pub angular_constraint: bool,
}

fn default_true() -> bool {
    true
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            angular_threshold_deg: 2.0,
            inlier_point_to_line_px: 2.0,
            iterations: 1000,
            rng_seed: 0,
            min_lines: 3,
            angular_constraint: true,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.angular_threshold_deg > 0.0 && self.inlier_point_to_line_px > 0.0 && self.iterations > 0 && self.min_lines >= 2;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "RANSAC thresholds must be positive and min_lines ≥ 2".into(),
            ))
        }
    }
}

/// Acute angle between two lines, radians in `[0, π/2]`.
pub fn line_angle(a: &LineEstimate, b: &LineEstimate) -> f64 {
    let cos = (a.a * b.a + a.b * b.b).abs().min(1.0);
    cos.acos()
}

/// Finite intersection of two lines, `None` when parallel.
pub fn intersect(a: &LineEstimate, b: &LineEstimate) -> Option<[f64; 2]> {
    let w = a.a * b.b - a.b * b.a;
    if w.abs() < 1e-12 {
        return None;
    }
    let x = (a.b * b.c - a.c * b.b) / w;
    let y = (a.c * b.a - a.a * b.c) / w;
    Some([x, y])
}

fn inliers(lines: &[LineEstimate], p: [f64; 2], tol: f64) -> Vec<usize> {
    (0..lines.len()).filter(|&i| lines[i].distance(p) <= tol).collect()
}

/// Point minimizing the summed squared distances to the given lines.
fn least_squares_point(lines: &[LineEstimate], idx: &[usize]) -> Option<[f64; 2]> {
    let (mut saa, mut sab, mut sbb, mut sac, mut sbc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &i in idx {
        let l = &lines[i];
        saa += l.a * l.a;
        sab += l.a * l.b;
        sbb += l.b * l.b;
        sac += l.a * l.c;
        sbc += l.b * l.c;
    }
    let det = saa * sbb - sab * sab;
    if det.abs() < 1e-12 * (saa + sbb).powi(2).max(1e-300) {
        return None;
    }
    Some([(-sac * sbb + sbc * sab) / det, (-sbc * saa + sac * sab) / det])
}

/// Unit viewing direction of an image point, `(x − x0, y − y0, f)`
/// normalized, with `f = (width + height)/4` unless given.
pub fn vp_to_vector(vp: [f64; 2], width: f64, height: f64, focal: Option<f64>) -> [f64; 3] {
    let f = focal.unwrap_or((width + height) / 4.0);
    let v = [vp[0] - width / 2.0, vp[1] - height / 2.0, f];
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Estimates the dominant vanishing point of `lines`.
///
/// Candidates are intersections of line pairs that meet at no less than the
/// angular threshold. When there are no more admissible pairs than the
/// iteration budget every pair is tried; otherwise pairs are drawn with the
/// seeded generator. The winner (most inliers, earliest candidate) is
/// refitted by least squares over its inliers, repeatedly while the inlier
/// set grows or stays, until it settles.
const MAX_REFITS: usize = 20;

pub fn ransac_vp(lines: &[LineEstimate], cfg: &RansacConfig, width: f64, height: f64) -> Result<VanishingPoint> {
    cfg.validate()?;
    if lines.len() < cfg.min_lines {
        return Err(Error::InsufficientLines {
            got: lines.len(),
            need: cfg.min_lines,
        });
    }
    let min_angle = if cfg.angular_constraint {
        cfg.angular_threshold_deg.to_radians()
    } else {
        0.0
    };
    let mut pairs = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if line_angle(&lines[i], &lines[j]) >= min_angle && intersect(&lines[i], &lines[j]).is_some() {
                pairs.push((i, j));
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::NoConsensus {
            best: 0,
            need: cfg.min_lines,
        });
    }
    let candidates: Vec<(usize, usize)> = if pairs.len() <= cfg.iterations {
        pairs
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        (0..cfg.iterations).map(|_| pairs[rng.gen_range(0..pairs.len())]).collect()
    };
    let tol = cfg.inlier_point_to_line_px;
    let mut best: Option<([f64; 2], Vec<usize>)> = None;
    for (i, j) in candidates {
        let Some(p) = intersect(&lines[i], &lines[j]) else { continue };
        let inl = inliers(lines, p, tol);
        if best.as_ref().is_none_or(|(_, b)| inl.len() > b.len()) {
            best = Some((p, inl));
        }
    }
    let (mut point, mut inlier_lines) = best.expect("at least one admissible pair");
    if inlier_lines.len() < cfg.min_lines {
        return Err(Error::NoConsensus {
            best: inlier_lines.len(),
            need: cfg.min_lines,
        });
    }
    for _ in 0..MAX_REFITS {
        let Some(refit) = least_squares_point(lines, &inlier_lines) else {
            break;
        };
        let refit_inliers = inliers(lines, refit, tol);
        if refit_inliers.len() < inlier_lines.len() {
            break;
        }
        point = refit;
        let settled = refit_inliers == inlier_lines;
        inlier_lines = refit_inliers;
        if settled {
            break;
        }
    }
    Ok(VanishingPoint {
        point,
        direction: vp_to_vector(point, width, height, None),
        inlier_lines,
        focal_nominal: (width + height) / 4.0,
    })
}
