//! One-dimensional projective rectification of a pattern.
//!
//! In coordinates centred on the image centre, with `d` the unit direction
//! towards the vanishing point and `D` its distance,
//! `H = [[1, 0, 0], [0, 1, 0], [−dx/D, −dy/D, 1]]` sends the vanishing point
//! to infinity along `d` while fixing the centre. Every line through the
//! vanishing point becomes affine, so equally spaced instances along it come
//! out equally spaced.

use image::{imageops, DynamicImage, Rgb, RgbImage};
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::BBox;
use crate::types::{FeatureSet, RecurringPattern};

/// Output rasters never exceed this many pixels per side.
pub const MAX_OUTPUT_SIDE: f64 = 4096.0;

#[derive(Clone, Debug)]
pub struct Rectified {
    pub image: RgbImage,
    /// Maps input pixel coordinates to output pixel coordinates.
    pub homography: Homography,
}

/// Row-major 3×3 matrix acting on homogeneous column vectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Homography(pub [[f64; 3]; 3]);

impl Homography {
    pub fn identity() -> Self {
        Self([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    fn to_matrix(self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.0[r][c])
    }

    fn from_matrix(m: &Matrix3<f64>) -> Self {
        Self(std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)])))
    }

    pub fn apply_h(&self, p: [f64; 2]) -> [f64; 3] {
        let h = &self.0;
        std::array::from_fn(|r| h[r][0] * p[0] + h[r][1] * p[1] + h[r][2])
    }

    /// Maps a point; `None` when it lands at infinity.
    pub fn apply(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        let v = self.apply_h(p);
        (v[2].abs() > 1e-15).then(|| [v[0] / v[2], v[1] / v[2]])
    }

    pub fn then(&self, next: &Homography) -> Homography {
        Self::from_matrix(&(next.to_matrix() * self.to_matrix()))
    }

    pub fn inverse(&self) -> Option<Homography> {
        self.to_matrix().try_inverse().map(|m| Self::from_matrix(&m))
    }
}

/// Homography sending `vp` to infinity, fixing `center`. `None` for a
/// vanishing point already at infinity.
pub fn vp_to_infinity(vp: Option<[f64; 2]>, center: [f64; 2]) -> Result<Homography> {
    let Some(vp) = vp else { return Ok(Homography::identity()) };
    let (vx, vy) = (vp[0] - center[0], vp[1] - center[1]);
    let dist = vx.hypot(vy);
    if dist < 1e-9 {
        return Err(Error::VpInsidePattern);
    }
    let (dx, dy) = (vx / dist, vy / dist);
    let to_center = Homography([[1.0, 0.0, -center[0]], [0.0, 1.0, -center[1]], [0.0, 0.0, 1.0]]);
    let push = Homography([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-dx / dist, -dy / dist, 1.0]]);
    let back = Homography([[1.0, 0.0, center[0]], [0.0, 1.0, center[1]], [0.0, 0.0, 1.0]]);
    Ok(to_center.then(&push).then(&back))
}

fn pattern_union(rp: &RecurringPattern) -> Option<BBox> {
    rp.instances.iter().map(|i| i.bbox).reduce(|a, b| a.union(&b))
}

/// Warps the image so that the pattern's vanishing point goes to infinity.
///
/// The output covers the warped union of the instance boxes. Fails with
/// [`Error::VpInsidePattern`] when the union touches or crosses the line
/// that the warp sends to infinity.
pub fn rectify_rp(image: &DynamicImage, rp: &RecurringPattern, vp: Option<[f64; 2]>) -> Result<Rectified> {
    let union = pattern_union(rp).ok_or(Error::InvalidArgument("pattern has no instances".into()))?;
    let center = [image.width() as f64 / 2.0, image.height() as f64 / 2.0];
    let warp = vp_to_infinity(vp, center)?;
    let mut corners = Vec::with_capacity(4);
    for c in union.corners() {
        let v = warp.apply_h(c);
        if v[2] <= 1e-9 {
            return Err(Error::VpInsidePattern);
        }
        corners.push([v[0] / v[2], v[1] / v[2]]);
    }
    let out_box = BBox::from_points(corners).expect("four corners");
    let scale = (MAX_OUTPUT_SIDE / out_box.width().max(1.0))
        .min(MAX_OUTPUT_SIDE / out_box.height().max(1.0))
        .min(1.0);
    let place = Homography([
        [scale, 0.0, -out_box.x_min * scale],
        [0.0, scale, -out_box.y_min * scale],
        [0.0, 0.0, 1.0],
    ]);
    let homography = warp.then(&place);
    let inverse = homography.inverse().ok_or(Error::VpInsidePattern)?;
    let w = (out_box.width() * scale).ceil().max(1.0) as u32;
    let h = (out_box.height() * scale).ceil().max(1.0) as u32;
    let src = image.to_rgb8();
    let out = RgbImage::from_fn(w, h, |x, y| {
        inverse
            .apply([x as f64 + 0.5, y as f64 + 0.5])
            .and_then(|p| imageops::interpolate_bilinear(&src, (p[0] - 0.5) as f32, (p[1] - 0.5) as f32))
            .unwrap_or(Rgb([0, 0, 0]))
    });
    Ok(Rectified { image: out, homography })
}

/// Instance centroids after warping, each the mean of its warped member
/// features.
pub fn warped_centroids(rp: &RecurringPattern, fs: &FeatureSet, h: &Homography) -> Vec<[f64; 2]> {
    rp.instances
        .iter()
        .map(|inst| {
            let pts: Vec<[f64; 2]> = inst.member_features.iter().filter_map(|&f| h.apply(fs.get(f).pos())).collect();
            let n = pts.len().max(1) as f64;
            [pts.iter().map(|p| p[0]).sum::<f64>() / n, pts.iter().map(|p| p[1]).sum::<f64>() / n]
        })
        .collect()
}
