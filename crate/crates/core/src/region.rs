//! Planar regions: axis-aligned boxes and simple polygons.
//!
//! Intersection areas are exact up to floating point. Box/box and
//! box/polygon use convex clipping directly; polygon/polygon decomposes both
//! operands into signed fan triangles and sums the signed pairwise triangle
//! intersections, which is exact for any simple polygon (convex or not).

use serde::{Deserialize, Serialize};

/// Axis-aligned box in pixel coordinates (origin top-left, y down).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        (self.x_max - self.x_min).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.y_max - self.y_min).max(0.0)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> [f64; 2] {
        [0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max)]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }

    pub fn intersect(&self, other: &BBox) -> Option<BBox> {
        let b = BBox::new(
            self.x_min.max(other.x_min),
            self.y_min.max(other.y_min),
            self.x_max.min(other.x_max),
            self.y_max.min(other.y_max),
        );
        (b.x_min < b.x_max && b.y_min < b.y_max).then_some(b)
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox::new(
            self.x_min.min(other.x_min),
            self.y_min.min(other.y_min),
            self.x_max.max(other.x_max),
            self.y_max.max(other.y_max),
        )
    }

    /// Corners in counter-clockwise order (in a y-up frame).
    pub fn corners(&self) -> [[f64; 2]; 4] {
        [
            [self.x_min, self.y_min],
            [self.x_max, self.y_min],
            [self.x_max, self.y_max],
            [self.x_min, self.y_max],
        ]
    }

    /// Tight box around a point set; `None` for an empty set.
    pub fn from_points<I: IntoIterator<Item = [f64; 2]>>(points: I) -> Option<BBox> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = BBox::new(first[0], first[1], first[0], first[1]);
        for p in it {
            b.x_min = b.x_min.min(p[0]);
            b.y_min = b.y_min.min(p[1]);
            b.x_max = b.x_max.max(p[0]);
            b.y_max = b.y_max.max(p[1]);
        }
        Some(b)
    }
}

/// A detection or annotation region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Box(BBox),
    Polygon(Vec<[f64; 2]>),
}

impl Region {
    pub fn area(&self) -> f64 {
        match self {
            Region::Box(b) => b.area(),
            Region::Polygon(p) => signed_area(p).abs(),
        }
    }

    pub fn bounds(&self) -> Option<BBox> {
        match self {
            Region::Box(b) => Some(*b),
            Region::Polygon(p) => BBox::from_points(p.iter().copied()),
        }
    }

    pub fn centroid(&self) -> Option<[f64; 2]> {
        match self {
            Region::Box(b) => Some(b.center()),
            Region::Polygon(p) => polygon_centroid(p),
        }
    }

    /// Area of `self ∩ other`.
    pub fn intersection_area(&self, other: &Region) -> f64 {
        match (self, other) {
            (Region::Box(a), Region::Box(b)) => a.intersect(b).map_or(0.0, |i| i.area()),
            (Region::Box(b), Region::Polygon(p)) | (Region::Polygon(p), Region::Box(b)) => signed_area(&clip_convex(p, &b.corners())).abs(),
            (Region::Polygon(a), Region::Polygon(b)) => polygon_intersection_area(a, b),
        }
    }
}

/// Shoelace area; positive for counter-clockwise vertex order in a y-up frame.
pub fn signed_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * acc
}

fn polygon_centroid(poly: &[[f64; 2]]) -> Option<[f64; 2]> {
    let a = signed_area(poly);
    if a.abs() < 1e-12 {
        let n = poly.len() as f64;
        if poly.is_empty() {
            return None;
        }
        let sx: f64 = poly.iter().map(|p| p[0]).sum();
        let sy: f64 = poly.iter().map(|p| p[1]).sum();
        return Some([sx / n, sy / n]);
    }
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let cross = p[0] * q[1] - q[0] * p[1];
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    Some([cx / (6.0 * a), cy / (6.0 * a)])
}

/// Sutherland–Hodgman clipping of `subject` by a convex `clip` polygon.
///
/// The subject may be non-convex; the result can then contain zero-width
/// bridges but its area is still exact.
pub fn clip_convex(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    if subject.len() < 3 || clip.len() < 3 {
        return Vec::new();
    }
    let orientation = signed_area(clip).signum();
    if orientation == 0.0 {
        return Vec::new();
    }
    let mut output: Vec<[f64; 2]> = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let side = |p: [f64; 2]| orientation * ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]));
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    output.push(segment_cross(prev, cur, sp, sc));
                }
                output.push(cur);
            } else if sp >= 0.0 {
                output.push(segment_cross(prev, cur, sp, sc));
            }
        }
    }
    output
}

fn segment_cross(p: [f64; 2], q: [f64; 2], sp: f64, sq: f64) -> [f64; 2] {
    let t = sp / (sp - sq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// Exact intersection area of two simple polygons.
///
/// The indicator of a simple polygon equals the signed sum of the indicators
/// of its fan triangles `(o, p_i, p_{i+1})` almost everywhere, so the
/// intersection area is the signed double sum over triangle pairs.
pub fn polygon_intersection_area(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    if a.len() < 3 || b.len() < 3 {
        return 0.0;
    }
    let oa = a[0];
    let ob = b[0];
    let mut total = 0.0;
    for i in 1..a.len() - 1 {
        let ta = [oa, a[i], a[i + 1]];
        let sa = signed_area(&ta);
        if sa == 0.0 {
            continue;
        }
        let ta_ccw = if sa > 0.0 { ta } else { [ta[0], ta[2], ta[1]] };
        for j in 1..b.len() - 1 {
            let tb = [ob, b[j], b[j + 1]];
            let sb = signed_area(&tb);
            if sb == 0.0 {
                continue;
            }
            let inter = signed_area(&clip_convex(&tb, &ta_ccw)).abs();
            total += sa.signum() * sb.signum() * inter;
        }
    }
    // Orientation of each polygon as a whole fixes the global sign.
    (total * signed_area(a).signum() * signed_area(b).signum()).max(0.0)
}

/// Area of the union of axis-aligned boxes, optionally intersected with a
/// clip box. Uses coordinate compression; exact for the box counts that
/// occur per pattern.
pub fn box_union_area(boxes: &[BBox], clip: Option<&BBox>) -> f64 {
    let boxes: Vec<BBox> = match clip {
        Some(c) => boxes.iter().filter_map(|b| b.intersect(c)).collect(),
        None => boxes.iter().copied().filter(|b| b.area() > 0.0).collect(),
    };
    if boxes.is_empty() {
        return 0.0;
    }
    let mut xs: Vec<f64> = boxes.iter().flat_map(|b| [b.x_min, b.x_max]).collect();
    let mut ys: Vec<f64> = boxes.iter().flat_map(|b| [b.y_min, b.y_max]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut area = 0.0;
    for xi in 0..xs.len() - 1 {
        let (x0, x1) = (xs[xi], xs[xi + 1]);
        let xm = 0.5 * (x0 + x1);
        for yi in 0..ys.len() - 1 {
            let (y0, y1) = (ys[yi], ys[yi + 1]);
            let ym = 0.5 * (y0 + y1);
            if boxes.iter().any(|b| b.contains([xm, ym])) {
                area += (x1 - x0) * (y1 - y0);
            }
        }
    }
    area
}

/// Area of `union(a) ∩ union(b)` for two box families.
pub fn box_unions_intersection_area(a: &[BBox], b: &[BBox]) -> f64 {
    let pieces: Vec<BBox> = a.iter().flat_map(|x| b.iter().filter_map(move |y| x.intersect(y))).collect();
    box_union_area(&pieces, None)
}
