//! Success-rate curves, the translation-symmetry rate and instance counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::vp_to_vector;
use crate::types::{RecurringPattern, TsResult};

/// Points `(threshold, success rate)` for the point and vector forms.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VpdCurves {
    pub point: Vec<(f64, f64)>,
    pub vector: Vec<(f64, f64)>,
}

/// Angle in degrees between the viewing directions of two image points.
pub fn vp_angle_deg(pred: [f64; 2], gt: [f64; 2], width: f64, height: f64) -> f64 {
    let a = vp_to_vector(pred, width, height, None);
    let b = vp_to_vector(gt, width, height, None);
    let dot = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
    dot.acos().to_degrees()
}

/// Fraction of detected vanishing points within each threshold of ground
/// truth, by pixel distance and by viewing-direction angle. Records without
/// a prediction are left out of the denominator; with no predictions at
/// all every rate is 0.
pub fn vpd_success_curve(
    preds: &[Option<[f64; 2]>],
    gts: &[[f64; 2]],
    image_sizes: &[(f64, f64)],
    dist_thresholds_px: &[f64],
    angle_thresholds_deg: &[f64],
) -> Result<VpdCurves> {
    if preds.len() != gts.len() || preds.len() != image_sizes.len() {
        return Err(Error::UnpairedRecords {
            left: preds.len(),
            right: gts.len().min(image_sizes.len()),
        });
    }
    let mut dists = Vec::new();
    let mut angles = Vec::new();
    for ((p, g), &(w, h)) in preds.iter().zip(gts).zip(image_sizes) {
        if let Some(p) = p {
            dists.push((p[0] - g[0]).hypot(p[1] - g[1]));
            angles.push(vp_angle_deg(*p, *g, w, h));
        }
    }
    let rate = |errs: &[f64], t: f64| {
        if errs.is_empty() {
            0.0
        } else {
            errs.iter().filter(|&&e| e <= t).count() as f64 / errs.len() as f64
        }
    };
    Ok(VpdCurves {
        point: dist_thresholds_px.iter().map(|&t| (t, rate(&dists, t))).collect(),
        vector: angle_thresholds_deg.iter().map(|&t| (t, rate(&angles, t))).collect(),
    })
}

/// Fraction of results that show translation symmetry.
pub fn ts_success_rate(results: &[TsResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(results.iter().filter(|r| r.has_symmetry).count() as f64 / results.len() as f64)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceCounts {
    pub per_rp: Vec<usize>,
    pub total: usize,
}

/// Instances per pattern (its column count) and their sum.
pub fn count_instances(rps: &[RecurringPattern]) -> InstanceCounts {
    let per_rp: Vec<usize> = rps.iter().map(|rp| rp.matrix.n).collect();
    let total = per_rp.iter().sum();
    InstanceCounts { per_rp, total }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_offset_predictions() {
        let sizes = [(800.0, 600.0); 2];
        let c = vpd_success_curve(
            &[Some([100.0, 100.0]), Some([215.0, 100.0])],
            &[[100.0, 100.0], [200.0, 100.0]],
            &sizes,
            &[10.0, 20.0],
            &[],
        )
        .unwrap();
        assert_eq!(c.point, vec![(10.0, 0.5), (20.0, 1.0)]);
    }

    #[test]
    fn angle_threshold() {
        // (x0 + f, y0) is 45° off the optical axis.
        let a = vp_angle_deg([400.0 + 350.0, 300.0], [400.0, 300.0], 800.0, 600.0);
        assert!((a - 45.0).abs() < 1e-9);
        let c = vpd_success_curve(
            &[Some([750.0, 300.0])],
            &[[400.0, 300.0]],
            &[(800.0, 600.0)],
            &[],
            &[10.0, 44.0, 46.0],
        )
        .unwrap();
        assert_eq!(c.vector, vec![(10.0, 0.0), (44.0, 0.0), (46.0, 1.0)]);
    }

    #[test]
    fn unpaired() {
        assert!(matches!(
            vpd_success_curve(&[None], &[], &[], &[1.0], &[1.0]),
            Err(Error::UnpairedRecords { .. })
        ));
    }

    #[test]
    fn ts_rate() {
        let mut v = vec![TsResult::new(true, vec![], 0.0, 0.06); 3];
        v.extend(vec![TsResult::new(true, vec![], 0.5, 0.06); 9]);
        assert_eq!(ts_success_rate(&v).unwrap(), 0.25);
        assert!(matches!(ts_success_rate(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn empty_count() {
        assert_eq!(count_instances(&[]), InstanceCounts { per_rp: vec![], total: 0 });
    }
}
