//! Evaluation against ground truth and downstream rates.

pub mod detection;
pub mod success;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::region::Region;
use crate::types::{GroundTruth, RecurringPattern};

pub use detection::{instance_pr, iod, match_instances, rp_pr, sweep_h, RpPr, SweepPoint};
pub use success::{count_instances, ts_success_rate, vp_angle_deg, vpd_success_curve, InstanceCounts, VpdCurves};

/// Conventions applied by every report, written alongside the numbers.
pub const REPORT_CONVENTIONS: [&str; 5] = [
    "acceptance is IOD > h (strict)",
    "instances are matched one-to-one at maximum cardinality, seeded by greedy descending IOD",
    "precision is 1 when there are no detections; recall is 1 when there is no ground truth",
    "each detected pattern is assigned to the ground-truth pattern with its highest instance precision, when positive; recall counts distinct covered ground-truth patterns",
    "instance rates pool all detected instances of the image against all ground-truth instances",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub h: f64,
    pub rp_precision: f64,
    pub rp_recall: f64,
    pub inst_precision: f64,
    pub inst_recall: f64,
    pub per_rp_assignments: Vec<Option<usize>>,
    pub counts: InstanceCounts,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepPoint>,
    pub conventions: Vec<String>,
}

/// Instance regions of each detected pattern.
pub fn detected_regions(rps: &[RecurringPattern]) -> Vec<Vec<Region>> {
    rps.iter().map(|rp| rp.instances.iter().map(|i| i.region()).collect()).collect()
}

pub fn gt_regions(gt: &GroundTruth) -> Vec<Vec<Region>> {
    gt.rps.iter().map(|rp| rp.instances.clone()).collect()
}

/// Evaluates one image at threshold `h`, optionally with a sweep.
pub fn evaluate(rps: &[RecurringPattern], gt: &GroundTruth, h: f64, sweep: &[f64]) -> Result<EvalReport> {
    let dets = detected_regions(rps);
    let gts = gt_regions(gt);
    let point = &sweep_h(&dets, &gts, &[h])?[0];
    let assignment = rp_pr(&dets, &gts, h)?;
    Ok(EvalReport {
        h,
        rp_precision: point.rp_precision,
        rp_recall: point.rp_recall,
        inst_precision: point.inst_precision,
        inst_recall: point.inst_recall,
        per_rp_assignments: assignment.assignments,
        counts: count_instances(rps),
        sweep: if sweep.is_empty() {
            Vec::new()
        } else {
            sweep_h(&dets, &gts, sweep)?
        },
        conventions: REPORT_CONVENTIONS.iter().map(|s| s.to_string()).collect(),
    })
}

/// Two-column CSV with a header row.
pub fn curve_csv(header: (&str, &str), points: &[(f64, f64)]) -> String {
    let mut out = format!("{},{}\n", header.0, header.1);
    for (t, r) in points {
        let _ = writeln!(out, "{},{}", crate::json::format_float(*t), crate::json::format_float(*r));
    }
    out
}

/// CSV with one row per threshold and all four rates.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let f = crate::json::format_float;
    let mut out = String::from("h,rp_precision,rp_recall,inst_precision,inst_recall\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            f(p.h),
            f(p.rp_precision),
            f(p.rp_recall),
            f(p.inst_precision),
            f(p.inst_recall)
        );
    }
    out
}
