//! A compact difference-of-Gaussians keypoint detector.
//!
//! Three octaves with three scales each, contrast threshold on `[0, 1]`
//! intensities, edge rejection via the Hessian ratio, one dominant
//! orientation per keypoint, and a 4×4×8 gradient-histogram descriptor.

use std::f64::consts::TAU;

use image::{DynamicImage, GrayImage};

use crate::error::{Error, Result};
use crate::types::{Feature, FeatureSet, DEFAULT_DESCRIPTOR_DIM};

pub const MIN_IMAGE_SIDE: u32 = 32;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DetectorConfig {
    pub octaves: usize,
    pub scales_per_octave: usize,
    pub base_sigma: f64,
    /// Minimum |DoG| response on `[0, 1]` intensities.
    pub contrast_threshold: f64,
    /// Principal-curvature ratio bound for edge rejection.
    pub edge_ratio: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            octaves: 3,
            scales_per_octave: 3,
            base_sigma: 1.6,
            contrast_threshold: 0.03,
            edge_ratio: 10.0,
        }
    }
}

/// Row-major float raster.
#[derive(Clone, Debug)]
struct Plane {
    w: usize,
    h: usize,
    data: Vec<f32>,
}

impl Plane {
    fn new(w: usize, h: usize) -> Self {
        Self {
            w,
            h,
            data: vec![0.0; w * h],
        }
    }

    #[inline]
    fn at(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.w + x]
    }

    #[inline]
    fn clamped(&self, x: isize, y: isize) -> f32 {
        let x = x.clamp(0, self.w as isize - 1) as usize;
        let y = y.clamp(0, self.h as isize - 1) as usize;
        self.at(x, y)
    }

    fn from_gray(img: &GrayImage) -> Self {
        let (w, h) = img.dimensions();
        Self {
            w: w as usize,
            h: h as usize,
            data: img.as_raw().iter().map(|&v| v as f32 / 255.0).collect(),
        }
    }

    fn blur(&self, sigma: f64) -> Plane {
        if sigma <= 0.0 {
            return self.clone();
        }
        let radius = (3.0 * sigma).ceil().max(1.0) as isize;
        let mut kernel: Vec<f32> = (-radius..=radius)
            .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp() as f32)
            .collect();
        let sum: f32 = kernel.iter().sum();
        kernel.iter_mut().for_each(|k| *k /= sum);

        let mut tmp = Plane::new(self.w, self.h);
        for y in 0..self.h {
            for x in 0..self.w {
                let mut acc = 0.0f32;
                for (k, wgt) in kernel.iter().enumerate() {
                    acc += wgt * self.clamped(x as isize + k as isize - radius, y as isize);
                }
                tmp.data[y * self.w + x] = acc;
            }
        }
        let mut out = Plane::new(self.w, self.h);
        for y in 0..self.h {
            for x in 0..self.w {
                let mut acc = 0.0f32;
                for (k, wgt) in kernel.iter().enumerate() {
                    acc += wgt * tmp.clamped(x as isize, y as isize + k as isize - radius);
                }
                out.data[y * self.w + x] = acc;
            }
        }
        out
    }

    fn downsample(&self) -> Plane {
        let (w, h) = ((self.w / 2).max(1), (self.h / 2).max(1));
        let mut out = Plane::new(w, h);
        for y in 0..h {
            for x in 0..w {
                out.data[y * w + x] = self.at(2 * x, 2 * y);
            }
        }
        out
    }

    fn sub(&self, other: &Plane) -> Plane {
        Plane {
            w: self.w,
            h: self.h,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    fn gradient(&self, x: usize, y: usize) -> (f64, f64) {
        let (xi, yi) = (x as isize, y as isize);
        let dx = self.clamped(xi + 1, yi) - self.clamped(xi - 1, yi);
        let dy = self.clamped(xi, yi + 1) - self.clamped(xi, yi - 1);
        (dx as f64, dy as f64)
    }
}

struct Candidate {
    x: f64,
    y: f64,
    scale: f64,
    response: f64,
    octave: usize,
    level: usize,
    ox: usize,
    oy: usize,
}

/// Decodes PNG/JPEG bytes and runs the detector.
pub fn detect_features_from_bytes(bytes: &[u8], cfg: &DetectorConfig) -> Result<FeatureSet> {
    let format = image::guess_format(bytes).map_err(|e| Error::UnsupportedFormat(e.to_string()))?;
    if !matches!(format, image::ImageFormat::Png | image::ImageFormat::Jpeg) {
        return Err(Error::UnsupportedFormat(format!("{format:?}")));
    }
    let img = image::load_from_memory_with_format(bytes, format).map_err(|e| Error::UnsupportedFormat(e.to_string()))?;
    detect_features(&img, cfg)
}

/// Detects features on an 8-bit grayscale or RGB raster.
///
/// Output is sorted by `(y, x)` with dense ids and is a pure function of the
/// pixel values.
pub fn detect_features(img: &DynamicImage, cfg: &DetectorConfig) -> Result<FeatureSet> {
    let gray = match img {
        DynamicImage::ImageLuma8(g) => g.clone(),
        DynamicImage::ImageRgb8(_) | DynamicImage::ImageRgba8(_) | DynamicImage::ImageLumaA8(_) => img.to_luma8(),
        other => return Err(Error::UnsupportedFormat(format!("{:?}", other.color()))),
    };
    detect_gray(&gray, cfg)
}

fn detect_gray(gray: &GrayImage, cfg: &DetectorConfig) -> Result<FeatureSet> {
    let (width, height) = gray.dimensions();
    if width < MIN_IMAGE_SIDE || height < MIN_IMAGE_SIDE {
        return Err(Error::ImageTooSmall {
            width,
            height,
            min: MIN_IMAGE_SIDE,
        });
    }
    let s = cfg.scales_per_octave;
    let k = 2f64.powf(1.0 / s as f64);

    let mut base = Plane::from_gray(gray).blur(cfg.base_sigma);
    let mut candidates = Vec::new();
    let mut pyramids: Vec<Vec<Plane>> = Vec::with_capacity(cfg.octaves);

    for octave in 0..cfg.octaves {
        if base.w < 8 || base.h < 8 {
            break;
        }
        // s + 3 Gaussian levels give s + 2 DoG levels, of which s interior.
        let mut gauss = vec![base.clone()];
        for i in 1..s + 3 {
            let prev_sigma = cfg.base_sigma * k.powi(i as i32 - 1);
            let inc = prev_sigma * (k * k - 1.0).sqrt();
            let next = gauss[i - 1].blur(inc);
            gauss.push(next);
        }
        let dogs: Vec<Plane> = (0..s + 2).map(|i| gauss[i + 1].sub(&gauss[i])).collect();
        let factor = (1usize << octave) as f64;

        for level in 1..=s {
            let (prev, cur, next) = (&dogs[level - 1], &dogs[level], &dogs[level + 1]);
            for y in 1..cur.h - 1 {
                for x in 1..cur.w - 1 {
                    let v = cur.at(x, y);
                    if (v.abs() as f64) < cfg.contrast_threshold {
                        continue;
                    }
                    if !is_extremum(v, x, y, prev, cur, next) {
                        continue;
                    }
                    if is_edge(cur, x, y, cfg.edge_ratio) {
                        continue;
                    }
                    let (dx, dy) = subpixel_offset(cur, x, y);
                    let sigma_oct = cfg.base_sigma * k.powi(level as i32);
                    candidates.push(Candidate {
                        x: (x as f64 + dx) * factor,
                        y: (y as f64 + dy) * factor,
                        scale: sigma_oct * factor,
                        response: v.abs() as f64,
                        octave,
                        level,
                        ox: x,
                        oy: y,
                    });
                }
            }
        }
        base = gauss[s].downsample();
        pyramids.push(gauss);
    }

    let (w, h) = (width as f64, height as f64);
    let mut features: Vec<Feature> = candidates
        .into_iter()
        .map(|c| {
            let plane = &pyramids[c.octave][c.level];
            let sigma_oct = c.scale / (1usize << c.octave) as f64;
            let orientation = dominant_orientation(plane, c.ox, c.oy, sigma_oct);
            let descriptor = describe(plane, c.ox, c.oy, sigma_oct, orientation);
            let x = c.x.clamp(0.0, w - 1e-6);
            let y = c.y.clamp(0.0, h - 1e-6);
            Feature::new(0, x, y, c.scale, orientation, descriptor).with_response(c.response)
        })
        .collect();
    features.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)).then(a.scale.total_cmp(&b.scale)));
    for (i, f) in features.iter_mut().enumerate() {
        f.id = i;
    }
    FeatureSet::new(width, height, DEFAULT_DESCRIPTOR_DIM, features)
}

fn is_extremum(v: f32, x: usize, y: usize, prev: &Plane, cur: &Plane, next: &Plane) -> bool {
    let is_max = v > 0.0;
    for plane in [prev, cur, next] {
        for yy in y - 1..=y + 1 {
            for xx in x - 1..=x + 1 {
                if std::ptr::eq(plane, cur) && xx == x && yy == y {
                    continue;
                }
                let o = plane.at(xx, yy);
                if (is_max && o >= v) || (!is_max && o <= v) {
                    return false;
                }
            }
        }
    }
    true
}

fn is_edge(p: &Plane, x: usize, y: usize, r: f64) -> bool {
    let c = p.at(x, y) as f64;
    let dxx = p.at(x + 1, y) as f64 + p.at(x - 1, y) as f64 - 2.0 * c;
    let dyy = p.at(x, y + 1) as f64 + p.at(x, y - 1) as f64 - 2.0 * c;
    let dxy = 0.25 * (p.at(x + 1, y + 1) as f64 - p.at(x - 1, y + 1) as f64 - p.at(x + 1, y - 1) as f64 + p.at(x - 1, y - 1) as f64);
    let tr = dxx + dyy;
    let det = dxx * dyy - dxy * dxy;
    det <= 0.0 || tr * tr * r >= (r + 1.0) * (r + 1.0) * det
}

/// Per-axis parabola vertex, clamped to half a pixel.
fn subpixel_offset(p: &Plane, x: usize, y: usize) -> (f64, f64) {
    let c = p.at(x, y) as f64;
    let fit = |m: f64, pl: f64| {
        let denom = m + pl - 2.0 * c;
        if denom.abs() < 1e-12 {
            0.0
        } else {
            (0.5 * (m - pl) / denom).clamp(-0.5, 0.5)
        }
    };
    (
        fit(p.at(x - 1, y) as f64, p.at(x + 1, y) as f64),
        fit(p.at(x, y - 1) as f64, p.at(x, y + 1) as f64),
    )
}

fn dominant_orientation(p: &Plane, x: usize, y: usize, sigma: f64) -> f64 {
    const BINS: usize = 36;
    let win_sigma = 1.5 * sigma;
    let radius = (3.0 * win_sigma).round().max(1.0) as isize;
    let mut hist = [0.0f64; BINS];
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let (xx, yy) = (x as isize + dx, y as isize + dy);
            if xx <= 0 || yy <= 0 || xx >= p.w as isize - 1 || yy >= p.h as isize - 1 {
                continue;
            }
            let (gx, gy) = p.gradient(xx as usize, yy as usize);
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let wgt = (-((dx * dx + dy * dy) as f64) / (2.0 * win_sigma * win_sigma)).exp();
            let ang = gy.atan2(gx).rem_euclid(TAU);
            let bin = ((ang / TAU * BINS as f64) as usize).min(BINS - 1);
            hist[bin] += wgt * mag;
        }
    }
    // Smooth circularly, then refine the peak with a parabola.
    let smoothed: Vec<f64> = (0..BINS)
        .map(|i| 0.25 * hist[(i + BINS - 1) % BINS] + 0.5 * hist[i] + 0.25 * hist[(i + 1) % BINS])
        .collect();
    let (best, &peak) = smoothed
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("non-empty histogram");
    if peak <= 0.0 {
        return 0.0;
    }
    let l = smoothed[(best + BINS - 1) % BINS];
    let r = smoothed[(best + 1) % BINS];
    let denom = l - 2.0 * peak + r;
    let offset = if denom.abs() > 1e-12 { 0.5 * (l - r) / denom } else { 0.0 };
    ((best as f64 + 0.5 + offset) * TAU / BINS as f64).rem_euclid(TAU)
}

fn describe(p: &Plane, x: usize, y: usize, sigma: f64, orientation: f64) -> Vec<f64> {
    const CELLS: usize = 4;
    const ORI_BINS: usize = 8;
    let cell_px = 3.0 * sigma;
    let half = cell_px * CELLS as f64 / 2.0;
    let radius = (half * std::f64::consts::SQRT_2).ceil() as isize + 1;
    let (cos_o, sin_o) = (orientation.cos(), orientation.sin());
    let mut desc = vec![0.0f64; CELLS * CELLS * ORI_BINS];
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let (xx, yy) = (x as isize + dx, y as isize + dy);
            if xx <= 0 || yy <= 0 || xx >= p.w as isize - 1 || yy >= p.h as isize - 1 {
                continue;
            }
            // Rotate offsets into the keypoint frame.
            let u = (cos_o * dx as f64 + sin_o * dy as f64 + half) / cell_px;
            let v = (-sin_o * dx as f64 + cos_o * dy as f64 + half) / cell_px;
            if u < 0.0 || v < 0.0 || u >= CELLS as f64 || v >= CELLS as f64 {
                continue;
            }
            let (gx, gy) = p.gradient(xx as usize, yy as usize);
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let wgt = (-((dx * dx + dy * dy) as f64) / (2.0 * half * half)).exp();
            let ang = (gy.atan2(gx) - orientation).rem_euclid(TAU);
            let fbin = ang / TAU * ORI_BINS as f64;
            let b0 = (fbin.floor() as usize) % ORI_BINS;
            let frac = fbin - fbin.floor();
            let cell = (v as usize) * CELLS + u as usize;
            desc[cell * ORI_BINS + b0] += wgt * mag * (1.0 - frac);
            desc[cell * ORI_BINS + (b0 + 1) % ORI_BINS] += wgt * mag * frac;
        }
    }
    normalize(&mut desc);
    desc.iter_mut().for_each(|d| *d = d.min(0.2));
    normalize(&mut desc);
    desc
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Luma;

    fn disk_image(size: u32, cx: f64, cy: f64, r: f64) -> GrayImage {
        GrayImage::from_fn(size, size, |x, y| {
            let d = (x as f64 - cx).hypot(y as f64 - cy);
            Luma([if d <= r { 255 } else { 0 }])
        })
    }

    #[test]
    fn uniform_image_has_no_features() {
        let img = DynamicImage::ImageLuma8(GrayImage::from_pixel(64, 64, Luma([128])));
        let fs = detect_features(&img, &DetectorConfig::default()).unwrap();
        assert!(fs.is_empty());
    }

    #[test]
    fn disk_center_is_found() {
        let (cx, cy) = (32.0, 30.0);
        let img = DynamicImage::ImageLuma8(disk_image(64, cx, cy, 6.0));
        let fs = detect_features(&img, &DetectorConfig::default()).unwrap();
        assert!(!fs.is_empty());
        let best = fs.features.iter().map(|f| (f.x - cx).hypot(f.y - cy)).fold(f64::INFINITY, f64::min);
        assert!(best <= 2.0, "closest feature {best} px from center");
    }

    #[test]
    fn too_small_rejected() {
        let img = DynamicImage::ImageLuma8(GrayImage::new(31, 64));
        assert!(matches!(
            detect_features(&img, &DetectorConfig::default()),
            Err(Error::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn garbage_bytes_unsupported() {
        assert!(matches!(
            detect_features_from_bytes(b"not an image", &DetectorConfig::default()),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn sorted_and_deterministic() {
        let img = DynamicImage::ImageLuma8(disk_image(64, 20.0, 40.0, 5.0));
        let a = detect_features(&img, &DetectorConfig::default()).unwrap();
        let b = detect_features(&img, &DetectorConfig::default()).unwrap();
        assert_eq!(a, b);
        for w in a.features.windows(2) {
            assert!((w[0].y, w[0].x) <= (w[1].y, w[1].x));
        }
    }
}
