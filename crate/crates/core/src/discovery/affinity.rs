//! URP affinity.
//!
//! A unit recurring pattern takes two visual words (rows `m1`, `m2`) and two
//! instances (columns `n1`, `n2`):
//!
//! ```text
//!            n1    n2
//!   m1  [  f11   f12 ]
//!   m2  [  f21   f22 ]
//! ```
//!
//! The instance size ratio is `r = |f11 − f21| / |f12 − f22|`. Scale and
//! orientation of corresponding features are compared after normalizing by
//! `r`, and the affinity is
//! `u = exp(−Δs² / (2σs) − Δθ² / (2σθ))`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{AngleMode, DiscoveryParams, Feature, FeatureSet};

/// Four feature ids forming a 2×2 sub-matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Urp {
    pub f11: usize,
    pub f12: usize,
    pub f21: usize,
    pub f22: usize,
}

impl Urp {
    pub fn new(f11: usize, f12: usize, f21: usize, f22: usize) -> Self {
        Self { f11, f12, f21, f22 }
    }

    pub fn ids(&self) -> [usize; 4] {
        [self.f11, self.f12, self.f21, self.f22]
    }

    pub fn is_distinct(&self) -> bool {
        let ids = self.ids();
        (0..4).all(|i| (i + 1..4).all(|j| ids[i] != ids[j]))
    }
}

const EPS: f64 = 1e-9;

/// `r = d(f11, f21) / d(f12, f22)`.
pub fn size_ratio(f11: &Feature, f21: &Feature, f12: &Feature, f22: &Feature) -> Result<f64> {
    let num = f11.distance(f21);
    let den = f12.distance(f22);
    if num <= 0.0 || den <= 0.0 {
        return Err(Error::DegenerateInstance);
    }
    Ok(num / den)
}

/// `(s_i − r·s_j) / (s_i + r·s_j)`.
pub fn scale_diff(s_i: f64, s_j: f64, r: f64) -> f64 {
    (s_i - r * s_j) / (s_i + r * s_j)
}

pub fn normalized_scale_diff(fi: &Feature, fj: &Feature, r: f64) -> f64 {
    scale_diff(fi.scale, fj.scale, r)
}

/// `(θ1 − r·θ2) / (θ1 + r·θ2)` with a guard for a vanishing denominator:
/// both terms near zero count as a match, otherwise the value saturates to
/// the sign of the numerator.
pub fn angle_diff_literal(theta1: f64, theta2: f64, r: f64) -> f64 {
    let num = theta1 - r * theta2;
    let den = theta1 + r * theta2;
    if den.abs() < EPS {
        if num.abs() < EPS {
            0.0
        } else {
            num.signum()
        }
    } else {
        num / den
    }
}

pub fn normalized_angle_diff(fi: &Feature, fj: &Feature, r: f64) -> f64 {
    angle_diff_literal(fi.orientation, fj.orientation, r)
}

/// Wraps into `(−π, π]`.
pub fn wrap_pi(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Rotation-aware orientation difference, in `[−1, 1]`: the orientation
/// difference of corresponding features minus the rotation between the two
/// instances, wrapped and divided by π.
fn angle_diff_wrapped(fi: &Feature, fj: &Feature, rotation: f64) -> f64 {
    wrap_pi(fi.orientation - fj.orientation - rotation) / PI
}

/// Both differences of one kind; `Δ` is the one of larger magnitude.
fn largest(a: f64, b: f64) -> f64 {
    if b.abs() > a.abs() {
        b
    } else {
        a
    }
}

/// `(Δs, Δθ)` of a URP.
pub fn urp_deltas(f11: &Feature, f12: &Feature, f21: &Feature, f22: &Feature, mode: AngleMode) -> Result<(f64, f64)> {
    let r = size_ratio(f11, f21, f12, f22)?;
    let ds = largest(normalized_scale_diff(f11, f12, r), normalized_scale_diff(f21, f22, r));
    let dt = match mode {
        AngleMode::Literal => largest(normalized_angle_diff(f11, f12, r), normalized_angle_diff(f21, f22, r)),
        AngleMode::Wrapped => {
            let v1 = (f21.y - f11.y).atan2(f21.x - f11.x);
            let v2 = (f22.y - f12.y).atan2(f22.x - f12.x);
            let rot = wrap_pi(v1 - v2);
            largest(angle_diff_wrapped(f11, f12, rot), angle_diff_wrapped(f21, f22, rot))
        }
    };
    Ok((ds, dt))
}

/// `exp(−Δs²/(2σs) − Δθ²/(2σθ))`.
pub fn affinity_from_deltas(delta_s: f64, delta_theta: f64, sigma_s: f64, sigma_theta: f64) -> f64 {
    (-(delta_s * delta_s) / (2.0 * sigma_s) - (delta_theta * delta_theta) / (2.0 * sigma_theta)).exp()
}

pub fn affinity(f11: &Feature, f12: &Feature, f21: &Feature, f22: &Feature, params: &DiscoveryParams) -> Result<f64> {
    let (ds, dt) = urp_deltas(f11, f12, f21, f22, params.angle_mode)?;
    Ok(affinity_from_deltas(ds, dt, params.sigma_s, params.sigma_theta))
}

/// Affinity `u ∈ (0, 1]` of a URP given by feature ids.
pub fn urp_affinity(fs: &FeatureSet, urp: &Urp, params: &DiscoveryParams) -> Result<f64> {
    affinity(fs.get(urp.f11), fs.get(urp.f12), fs.get(urp.f21), fs.get(urp.f22), params)
}
