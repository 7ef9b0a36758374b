//! IOD-based precision and recall at instance and pattern level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::Region;

/// `|det ∩ gt| / |det|`.
pub fn iod(det: &Region, gt: &Region) -> Result<f64> {
    let area = det.area();
    if !(area > 0.0) {
        return Err(Error::ZeroAreaDetection);
    }
    Ok((det.intersection_area(gt) / area).clamp(0.0, 1.0))
}

/// IOD of every detection against every ground-truth region.
pub fn iod_matrix(dets: &[Region], gts: &[Region]) -> Result<Vec<Vec<f64>>> {
    dets.iter().map(|d| gts.iter().map(|g| iod(d, g)).collect()).collect()
}

/// One-to-one matching of detections to ground truth over pairs with
/// IOD > h. Pairs are first taken greedily in descending IOD (ties by
/// detection index, then ground-truth index); augmenting paths then extend
/// the greedy matching to maximum cardinality. Returns the ground-truth
/// index matched to each detection.
pub fn match_instances(iods: &[Vec<f64>], h: f64) -> Vec<Option<usize>> {
    let n_det = iods.len();
    let n_gt = iods.first().map_or(0, Vec::len);
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (i, row) in iods.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v > h {
                edges.push((i, j, v));
            }
        }
    }
    edges.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut det_to_gt = vec![None; n_det];
    let mut gt_to_det: Vec<Option<usize>> = vec![None; n_gt];
    for &(i, j, _) in &edges {
        if det_to_gt[i].is_none() && gt_to_det[j].is_none() {
            det_to_gt[i] = Some(j);
            gt_to_det[j] = Some(i);
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_det];
    for &(i, j, _) in &edges {
        adj[i].push(j);
    }
    fn augment(i: usize, adj: &[Vec<usize>], seen: &mut [bool], det_to_gt: &mut [Option<usize>], gt_to_det: &mut [Option<usize>]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            let free = match gt_to_det[j] {
                None => true,
                Some(k) => augment(k, adj, seen, det_to_gt, gt_to_det),
            };
            if free {
                det_to_gt[i] = Some(j);
                gt_to_det[j] = Some(i);
                return true;
            }
        }
        false
    }
    for i in 0..n_det {
        if det_to_gt[i].is_none() {
            let mut seen = vec![false; n_gt];
            augment(i, &adj, &mut seen, &mut det_to_gt, &mut gt_to_det);
        }
    }
    det_to_gt
}

/// Precision (1 when there are no detections) and recall (1 when there is
/// no ground truth) from a matched count.
pub fn rates(matched: usize, n_det: usize, n_gt: usize) -> (f64, f64) {
    let p = if n_det == 0 { 1.0 } else { matched as f64 / n_det as f64 };
    let r = if n_gt == 0 { 1.0 } else { matched as f64 / n_gt as f64 };
    (p, r)
}

/// Instance precision and recall with one-to-one matching at IOD > h.
pub fn instance_pr(dets: &[Region], gts: &[Region], h: f64) -> Result<(f64, f64)> {
    let iods = iod_matrix(dets, gts)?;
    Ok(instance_pr_from_iods(&iods, dets.len(), gts.len(), h))
}

fn instance_pr_from_iods(iods: &[Vec<f64>], n_det: usize, n_gt: usize, h: f64) -> (f64, f64) {
    let matched = if n_gt == 0 {
        0
    } else {
        match_instances(iods, h).iter().flatten().count()
    };
    rates(matched, n_det, n_gt)
}

/// Pattern-level result: rates and the ground-truth pattern each detected
/// pattern was assigned to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RpPr {
    pub precision: f64,
    pub recall: f64,
    pub assignments: Vec<Option<usize>>,
}

/// Pairwise IOD tables between every detected and ground-truth pattern.
fn rp_tables(det_rps: &[Vec<Region>], gt_rps: &[Vec<Region>]) -> Result<Vec<Vec<Vec<Vec<f64>>>>> {
    det_rps.iter().map(|d| gt_rps.iter().map(|g| iod_matrix(d, g)).collect()).collect()
}

fn rp_pr_from_tables(tables: &[Vec<Vec<Vec<f64>>>], det_rps: &[Vec<Region>], gt_rps: &[Vec<Region>], h: f64) -> RpPr {
    let mut assignments = Vec::with_capacity(det_rps.len());
    let mut p_table = Vec::with_capacity(det_rps.len());
    for (i, det) in det_rps.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        let mut row = vec![0.0; gt_rps.len()];
        if !det.is_empty() {
            for (j, gt) in gt_rps.iter().enumerate() {
                let (p, _) = instance_pr_from_iods(&tables[i][j], det.len(), gt.len(), h);
                row[j] = p;
                if p > 0.0 && best.is_none_or(|(_, bp)| p > bp) {
                    best = Some((j, p));
                }
            }
        }
        p_table.push(row);
        assignments.push(best.map(|(j, _)| j));
    }
    let accepted = assignments.iter().flatten().count();
    // Distinct patterns covered, each detection covering at most one; the
    // argmax alone can move to a new pattern as h rises.
    let covered = match_instances(&p_table, 0.0).iter().flatten().count();
    let precision = if det_rps.is_empty() {
        1.0
    } else {
        accepted as f64 / det_rps.len() as f64
    };
    let recall = if gt_rps.is_empty() {
        1.0
    } else {
        covered as f64 / gt_rps.len() as f64
    };
    RpPr {
        precision,
        recall,
        assignments,
    }
}

/// Each detected pattern goes to the ground-truth pattern on which its
/// instance precision is highest (ties: lowest index), if that precision is
/// positive. Recall is the largest number of distinct ground-truth patterns
/// covered one-to-one by detections with positive instance precision.
pub fn rp_pr(det_rps: &[Vec<Region>], gt_rps: &[Vec<Region>], h: f64) -> Result<RpPr> {
    let tables = rp_tables(det_rps, gt_rps)?;
    Ok(rp_pr_from_tables(&tables, det_rps, gt_rps, h))
}

/// All four rates at one threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub h: f64,
    pub rp_precision: f64,
    pub rp_recall: f64,
    pub inst_precision: f64,
    pub inst_recall: f64,
}

/// Rates of one image at each threshold. Instance rates pool every
/// detected instance against every ground-truth instance.
pub fn sweep_h(det_rps: &[Vec<Region>], gt_rps: &[Vec<Region>], h_values: &[f64]) -> Result<Vec<SweepPoint>> {
    if h_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("h values must be sorted ascending".into()));
    }
    let tables = rp_tables(det_rps, gt_rps)?;
    let all_det: Vec<Region> = det_rps.iter().flatten().cloned().collect();
    let all_gt: Vec<Region> = gt_rps.iter().flatten().cloned().collect();
    let pooled = iod_matrix(&all_det, &all_gt)?;
    Ok(h_values
        .iter()
        .map(|&h| {
            let rp = rp_pr_from_tables(&tables, det_rps, gt_rps, h);
            let (ip, ir) = instance_pr_from_iods(&pooled, all_det.len(), all_gt.len(), h);
            SweepPoint {
                h,
                rp_precision: rp.precision,
                rp_recall: rp.recall,
                inst_precision: ip,
                inst_recall: ir,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::BBox;

    fn b(x0: f64, y0: f64, x1: f64, y1: f64) -> Region {
        Region::Box(BBox::new(x0, y0, x1, y1))
    }

    #[test]
    fn iod_cases() {
        assert_eq!(iod(&b(2.0, 2.0, 4.0, 4.0), &b(0.0, 0.0, 10.0, 10.0)).unwrap(), 1.0);
        assert_eq!(iod(&b(0.0, 0.0, 1.0, 1.0), &b(5.0, 5.0, 6.0, 6.0)).unwrap(), 0.0);
        assert_eq!(iod(&b(0.0, 0.0, 10.0, 10.0), &b(5.0, 0.0, 15.0, 10.0)).unwrap(), 0.5);
        assert!(matches!(
            iod(&b(1.0, 1.0, 1.0, 5.0), &b(0.0, 0.0, 2.0, 2.0)),
            Err(Error::ZeroAreaDetection)
        ));
    }

    #[test]
    fn iod_is_asymmetric() {
        let (small, big) = (b(0.0, 0.0, 1.0, 1.0), b(0.0, 0.0, 4.0, 4.0));
        assert_eq!(iod(&small, &big).unwrap(), 1.0);
        assert_eq!(iod(&big, &small).unwrap(), 1.0 / 16.0);
    }

    #[test]
    fn instance_examples() {
        let gts = [b(0.0, 0.0, 10.0, 10.0), b(20.0, 0.0, 30.0, 10.0), b(40.0, 0.0, 50.0, 10.0)];
        assert_eq!(instance_pr(&gts, &gts, 0.5).unwrap(), (1.0, 1.0));
        let dets = [
            b(0.0, 0.0, 10.0, 10.0),
            b(20.0, 0.0, 30.0, 10.0),
            b(100.0, 0.0, 110.0, 10.0),
            b(200.0, 0.0, 210.0, 10.0),
        ];
        let (p, r) = instance_pr(&dets, &gts, 0.5).unwrap();
        assert_eq!((p, r), (0.5, 2.0 / 3.0));
        let single = [b(0.0, 0.0, 10.0, 10.0)];
        let dup = [b(0.0, 0.0, 10.0, 9.0), b(1.0, 0.0, 10.0, 10.0)];
        assert_eq!(instance_pr(&dup, &single, 0.5).unwrap(), (0.5, 1.0));
    }

    #[test]
    fn empty_conventions() {
        let gts = [b(0.0, 0.0, 10.0, 10.0)];
        assert_eq!(instance_pr(&[], &gts, 0.5).unwrap(), (1.0, 0.0));
        assert_eq!(instance_pr(&gts, &[], 0.5).unwrap(), (0.0, 1.0));
        assert_eq!(instance_pr(&[], &[], 0.5).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn rp_examples() {
        let g1 = vec![b(0.0, 0.0, 10.0, 10.0), b(20.0, 0.0, 30.0, 10.0)];
        let g2 = vec![b(0.0, 50.0, 10.0, 60.0), b(20.0, 50.0, 30.0, 60.0)];
        let r = rp_pr(std::slice::from_ref(&g1), &[g1.clone(), g2.clone()], 0.5).unwrap();
        assert_eq!((r.precision, r.recall, r.assignments.clone()), (1.0, 0.5, vec![Some(0)]));
        let r = rp_pr(&[g1.clone(), g1.clone()], &[g1.clone(), g2.clone()], 0.5).unwrap();
        assert_eq!((r.precision, r.recall), (1.0, 0.5));
        let stray = vec![b(500.0, 500.0, 510.0, 510.0), b(600.0, 500.0, 610.0, 510.0)];
        let r = rp_pr(&[g1.clone(), stray], &[g1, g2], 0.5).unwrap();
        assert_eq!((r.precision, r.recall, r.assignments), (0.5, 0.5, vec![Some(0), None]));
    }

    #[test]
    fn strict_threshold() {
        let det = vec![vec![b(0.0, 0.0, 10.0, 10.0)]];
        let gt = vec![vec![b(5.0, 0.0, 15.0, 10.0)]];
        let s = sweep_h(&det, &gt, &[0.4, 0.5, 0.6]).unwrap();
        let ir: Vec<f64> = s.iter().map(|p| p.inst_recall).collect();
        assert_eq!(ir, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn empty_detections_sweep() {
        let gt = vec![vec![b(5.0, 0.0, 15.0, 10.0)]];
        for p in sweep_h(&[], &gt, &[0.1, 0.5, 0.9]).unwrap() {
            assert_eq!((p.inst_precision, p.inst_recall, p.rp_precision, p.rp_recall), (1.0, 0.0, 1.0, 0.0));
        }
    }
}
