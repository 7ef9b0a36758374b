//! Shared domain types.
//!
//! All coordinates are pixels with the origin at the top-left corner and y
//! pointing down. Angles are radians internally; the orientation bound of
//! [`DiscoveryParams`] is given in degrees.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::{BBox, Region};

/// Default descriptor length.
pub const DEFAULT_DESCRIPTOR_DIM: usize = 128;

/// Instance regions are the union of feature disks of radius
/// `REGION_SCALE_FACTOR * scale`.
pub const REGION_SCALE_FACTOR: f64 = 3.0;

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs.
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// A localized visual primitive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub scale: f64,
    pub orientation: f64,
    /// Detector response; orders features during visual-word construction.
    #[serde(default)]
    pub response: f64,
    pub descriptor: Vec<f64>,
}

impl Feature {
    pub fn new(id: usize, x: f64, y: f64, scale: f64, orientation: f64, descriptor: Vec<f64>) -> Self {
        Self {
            id,
            x,
            y,
            scale,
            orientation: normalize_angle(orientation),
            response: 0.0,
            descriptor,
        }
    }

    pub fn with_response(mut self, response: f64) -> Self {
        self.response = response;
        self
    }

    pub fn pos(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn distance(&self, other: &Feature) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Features extracted from one image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub image_width: u32,
    pub image_height: u32,
    pub descriptor_dim: usize,
    pub features: Vec<Feature>,
}

impl FeatureSet {
    /// Builds a set and checks every invariant.
    pub fn new(image_width: u32, image_height: u32, descriptor_dim: usize, features: Vec<Feature>) -> Result<Self> {
        let fs = Self {
            image_width,
            image_height,
            descriptor_dim,
            features,
        };
        fs.validate()?;
        Ok(fs)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn get(&self, id: usize) -> &Feature {
        &self.features[id]
    }

    pub fn diagonal(&self) -> f64 {
        (self.image_width as f64).hypot(self.image_height as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let violation = |id: Option<usize>, reason: String| Error::InvariantViolation { feature_id: id, reason };
        if self.descriptor_dim == 0 {
            return Err(violation(None, "descriptor_dim must be positive".into()));
        }
        self.validate_geometry()?;
        for f in &self.features {
            if f.descriptor.len() != self.descriptor_dim {
                return Err(violation(
                    Some(f.id),
                    format!("descriptor length {} != {}", f.descriptor.len(), self.descriptor_dim),
                ));
            }
        }
        Ok(())
    }

    /// Every invariant except those on descriptors.
    pub fn validate_geometry(&self) -> Result<()> {
        let violation = |id: Option<usize>, reason: String| Error::InvariantViolation { feature_id: id, reason };
        if self.image_width == 0 || self.image_height == 0 {
            return Err(violation(None, "image dimensions must be positive".into()));
        }
        let (w, h) = (self.image_width as f64, self.image_height as f64);
        for (idx, f) in self.features.iter().enumerate() {
            let id = Some(f.id);
            if f.id != idx {
                return Err(violation(id, format!("ids must be dense from 0; expected {idx}")));
            }
            if !(f.scale > 0.0) || !f.scale.is_finite() {
                return Err(violation(id, format!("scale must be > 0, got {}", f.scale)));
            }
            if !(0.0..TAU).contains(&f.orientation) {
                return Err(violation(id, format!("orientation {} outside [0, 2π)", f.orientation)));
            }
            if !(f.x >= 0.0 && f.x < w && f.y >= 0.0 && f.y < h) {
                return Err(violation(id, format!("position ({}, {}) outside {}x{}", f.x, f.y, w, h)));
            }
        }
        Ok(())
    }
}

/// The pattern matrix: rows are visual words, columns are instances.
/// `None` cells are holes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RpMatrix {
    pub m: usize,
    pub n: usize,
    pub rows: Vec<Vec<Option<usize>>>,
}

impl RpMatrix {
    pub fn from_rows(rows: Vec<Vec<Option<usize>>>) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        Self { m, n, rows }
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<usize> {
        self.rows[row][col]
    }

    /// Filled cells of column `col` as `(row, feature_id)`.
    pub fn column(&self, col: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().enumerate().filter_map(move |(r, row)| row[col].map(|f| (r, f)))
    }

    pub fn feature_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().flatten().flatten().copied()
    }
}

/// A broken [`RpMatrix`] invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    TooFewRows(usize),
    TooFewColumns(usize),
    RowLength { row: usize, len: usize },
    DuplicateFeature(usize),
    SparseColumn { col: usize, filled: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewRows(m) => write!(f, "m < 2 (m = {m})"),
            Violation::TooFewColumns(n) => write!(f, "n < 2 (n = {n})"),
            Violation::RowLength { row, len } => write!(f, "row {row} has {len} cells, expected n"),
            Violation::DuplicateFeature(id) => write!(f, "duplicate feature {id}"),
            Violation::SparseColumn { col, filled } => {
                write!(f, "column {col} has {filled} filled cells, need at least 2")
            }
        }
    }
}

/// Lists every invariant the matrix breaks; empty means valid.
pub fn validate_rp_matrix(matrix: &RpMatrix) -> Vec<Violation> {
    let mut out = Vec::new();
    if matrix.rows.len() != matrix.m || matrix.m < 2 {
        out.push(Violation::TooFewRows(matrix.rows.len().min(matrix.m)));
    }
    if matrix.n < 2 {
        out.push(Violation::TooFewColumns(matrix.n));
    }
    let mut seen = HashSet::new();
    let mut reported = HashSet::new();
    for (r, row) in matrix.rows.iter().enumerate() {
        if row.len() != matrix.n {
            out.push(Violation::RowLength { row: r, len: row.len() });
        }
        for id in row.iter().flatten() {
            if !seen.insert(*id) && reported.insert(*id) {
                out.push(Violation::DuplicateFeature(*id));
            }
        }
    }
    for col in 0..matrix.n {
        let filled = matrix.rows.iter().filter(|row| row.get(col).copied().flatten().is_some()).count();
        if filled < 2 {
            out.push(Violation::SparseColumn { col, filled });
        }
    }
    out
}

/// Support region of one pattern instance (one matrix column).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRegion {
    pub bbox: BBox,
    pub member_features: Vec<usize>,
    pub centroid: [f64; 2],
}

impl InstanceRegion {
    /// Union of member disks (radius `3·scale`) clipped to the image.
    pub fn from_members(fs: &FeatureSet, members: Vec<usize>) -> Self {
        let (w, h) = (fs.image_width as f64, fs.image_height as f64);
        let mut bbox: Option<BBox> = None;
        let (mut sx, mut sy) = (0.0, 0.0);
        for &id in &members {
            let f = fs.get(id);
            let r = REGION_SCALE_FACTOR * f.scale;
            let disk = BBox::new(f.x - r, f.y - r, f.x + r, f.y + r);
            bbox = Some(bbox.map_or(disk, |b| b.union(&disk)));
            sx += f.x;
            sy += f.y;
        }
        let n = members.len().max(1) as f64;
        let raw = bbox.unwrap_or(BBox::new(0.0, 0.0, 0.0, 0.0));
        let bbox = BBox::new(raw.x_min.max(0.0), raw.y_min.max(0.0), raw.x_max.min(w), raw.y_max.min(h));
        Self {
            bbox,
            member_features: members,
            centroid: [sx / n, sy / n],
        }
    }

    pub fn region(&self) -> Region {
        Region::Box(self.bbox)
    }
}

/// How the orientation term of the affinity is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleMode {
    /// `(θ1 − r·θ2)/(θ1 + r·θ2)` with a zero-denominator guard.
    #[default]
    Literal,
    /// Wrapped difference relative to the median inter-instance rotation,
    /// scaled by 1/π.
    Wrapped,
}

/// Candidate constraints and search settings for discovery.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryParams {
    /// Maximum distance between two features of one instance, as a fraction
    /// of the image diagonal.
    pub p_d: f64,
    /// Maximum relative size difference between corresponding features:
    /// scale ratios must lie in `[1 − p_s, 1/(1 − p_s)]`.
    pub p_s: f64,
    /// Maximum orientation difference between corresponding features, degrees.
    pub p_theta: f64,
    pub sigma_s: f64,
    pub sigma_theta: f64,
    pub n_initials: usize,
    pub rng_seed: u64,
    #[serde(default)]
    pub angle_mode: AngleMode,
    /// Minimum objective for a pattern to be reported.
    #[serde(default = "default_u_min")]
    pub u_min: f64,
    #[serde(default = "default_max_rps")]
    pub max_rps: usize,
}

fn default_u_min() -> f64 {
    0.3
}

fn default_max_rps() -> usize {
    10
}

impl Default for DiscoveryParams {
    fn default() -> Self {
        Self {
            p_d: 0.2,
            p_s: 0.5,
            p_theta: 30.0,
            sigma_s: 0.2,
            sigma_theta: 0.2,
            n_initials: 64,
            rng_seed: 0,
            angle_mode: AngleMode::Literal,
            u_min: default_u_min(),
            max_rps: default_max_rps(),
        }
    }
}

impl DiscoveryParams {
    pub const GRID_P_D: [f64; 3] = [0.1, 0.15, 0.2];
    pub const GRID_P_S: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
    pub const GRID_P_THETA: [f64; 3] = [30.0, 90.0, 180.0];

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("discovery parameter {what}")));
        if !(self.p_d > 0.0 && self.p_d <= 1.0) {
            return bad("p_d must lie in (0, 1]");
        }
        if !(self.p_s > 0.0 && self.p_s <= 1.0) {
            return bad("p_s must lie in (0, 1]");
        }
        if !(self.p_theta > 0.0) {
            return bad("p_theta must be positive");
        }
        if !(self.sigma_s > 0.0 && self.sigma_theta > 0.0) {
            return bad("sigma values must be positive");
        }
        if self.n_initials == 0 {
            return bad("n_initials must be positive");
        }
        Ok(())
    }

    /// The full adaptive grid (3 × 5 × 3 points), ordered by `p_d`, then
    /// `p_s`, then `p_theta`, all ascending. Other fields copy `base`.
    pub fn adaptive_grid(base: &DiscoveryParams) -> Vec<DiscoveryParams> {
        let mut grid = Vec::with_capacity(45);
        for &p_d in &Self::GRID_P_D {
            for &p_s in &Self::GRID_P_S {
                for &p_theta in &Self::GRID_P_THETA {
                    grid.push(DiscoveryParams {
                        p_d,
                        p_s,
                        p_theta,
                        ..base.clone()
                    });
                }
            }
        }
        grid
    }
}

/// An accepted pattern with its objective value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurringPattern {
    pub matrix: RpMatrix,
    pub score: f64,
    pub instances: Vec<InstanceRegion>,
    pub params: DiscoveryParams,
}

impl RecurringPattern {
    pub fn instance_boxes(&self) -> Vec<BBox> {
        self.instances.iter().map(|i| i.bbox).collect()
    }
}

/// Implicit line `a·x + b·y + c = 0` with `a² + b² = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineEstimate {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub support: Vec<[f64; 2]>,
    pub rms_residual: f64,
    pub source_word: usize,
}

impl LineEstimate {
    pub fn homogeneous(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn distance(&self, p: [f64; 2]) -> f64 {
        (self.a * p[0] + self.b * p[1] + self.c).abs()
    }

    /// Unit direction along the line.
    pub fn direction(&self) -> [f64; 2] {
        [-self.b, self.a]
    }
}

/// A vanishing point and its viewing direction under a nominal focal length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingPoint {
    pub point: [f64; 2],
    pub direction: [f64; 3],
    pub inlier_lines: Vec<usize>,
    pub focal_nominal: f64,
}

/// Outcome of the cross-ratio translation-symmetry test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TsResult {
    pub tested: bool,
    pub cross_ratios: Vec<f64>,
    /// Median `|cr − 4/3|`; infinite (written as `null`) when untested.
    #[serde(deserialize_with = "crate::json::null_as_infinity")]
    pub deviation: f64,
    pub has_symmetry: bool,
    pub threshold: f64,
}

impl TsResult {
    pub fn new(tested: bool, cross_ratios: Vec<f64>, deviation: f64, threshold: f64) -> Self {
        Self {
            tested,
            cross_ratios,
            deviation,
            has_symmetry: tested && deviation <= threshold,
            threshold,
        }
    }

    pub fn untested(threshold: f64) -> Self {
        Self::new(false, Vec::new(), f64::INFINITY, threshold)
    }

    /// Re-applies a different threshold to the same measurements.
    pub fn with_threshold(&self, threshold: f64) -> Self {
        Self::new(self.tested, self.cross_ratios.clone(), self.deviation, threshold)
    }
}

/// One annotated pattern: its instance regions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtRp {
    pub instances: Vec<Region>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub rps: Vec<GtRp>,
}

impl GroundTruth {
    pub fn validate(&self) -> Result<()> {
        for (i, rp) in self.rps.iter().enumerate() {
            if rp.instances.is_empty() {
                return Err(Error::InvariantViolation {
                    feature_id: None,
                    reason: format!("ground-truth pattern {i} has no instances"),
                });
            }
        }
        Ok(())
    }
}
