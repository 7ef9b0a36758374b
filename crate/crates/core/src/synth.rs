//! Deterministic synthetic scenes with known patterns, vanishing points and
//! spacing.
//!
//! A template is a set of Gaussian blobs on a flat background; each blob
//! centre is a ground-truth keypoint with its own random descriptor. Motifs
//! repeat a template on the world plane `Z = 0`, and a 3×4 camera projects
//! the plane into the image. Features are the projected keypoints, with
//! scale and orientation carried through the local Jacobian.

use image::{GrayImage, Luma};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::{BBox, Region};
use crate::types::{Feature, FeatureSet, GroundTruth, GtRp, RpMatrix, DEFAULT_DESCRIPTOR_DIM};

const BACKGROUND: f64 = 0.5;

/// One Gaussian blob, in template coordinates centred on the template.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    pub amplitude: f64,
    pub orientation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Template {
    /// Side length of the square template, world units.
    pub size: f64,
    pub blobs: Vec<Blob>,
    /// Unit descriptor per blob.
    pub descriptors: Vec<Vec<f64>>,
}

impl Template {
    /// Blobs with centres within `radius` of the template centre, spaced at
    /// least `3·sigma` apart.
    pub fn random(rng: &mut ChaCha8Rng, size: f64, n_keypoints: usize, radius: f64, descriptor_dim: usize) -> Self {
        let mut blobs: Vec<Blob> = Vec::with_capacity(n_keypoints);
        let mut attempts = 0;
        while blobs.len() < n_keypoints && attempts < 10_000 {
            attempts += 1;
            let r = radius * rng.gen::<f64>().sqrt();
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let sigma = rng.gen_range(2.5..4.5);
            let (x, y) = (r * a.cos(), r * a.sin());
            if blobs.iter().any(|b| (b.x - x).hypot(b.y - y) < 3.0 * (b.sigma + sigma)) {
                continue;
            }
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            blobs.push(Blob {
                x,
                y,
                sigma,
                amplitude: sign * rng.gen_range(0.25..0.45),
                orientation: rng.gen_range(0.3..(std::f64::consts::TAU - 0.3)),
            });
        }
        let descriptors = (0..blobs.len()).map(|_| unit_vector(rng, descriptor_dim)).collect();
        Self { size, blobs, descriptors }
    }

    fn intensity(&self, p: [f64; 2]) -> f64 {
        self.blobs
            .iter()
            .map(|b| {
                let d2 = (p[0] - b.x).powi(2) + (p[1] - b.y).powi(2);
                b.amplitude * (-d2 / (2.0 * b.sigma * b.sigma)).exp()
            })
            .sum()
    }

    /// The template as an 8-bit patch, one pixel per world unit.
    pub fn raster(&self) -> GrayImage {
        let side = self.size.ceil() as u32;
        let half = self.size / 2.0;
        GrayImage::from_fn(side, side, |x, y| {
            to_luma(BACKGROUND + self.intensity([x as f64 + 0.5 - half, y as f64 + 0.5 - half]))
        })
    }
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn to_luma(v: f64) -> Luma<u8> {
    Luma([(v.clamp(0.0, 1.0) * 255.0).round() as u8])
}

/// Instance placement on the world plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Layout {
    /// `rows × cols` instances, `spacing` apart along X and Y.
    Grid { rows: usize, cols: usize, spacing: [f64; 2] },
    /// Instances along +X; `gaps` are successive spacings in units of the
    /// motif's `spacing_3d`.
    Row { gaps: Vec<f64> },
}

impl Layout {
    pub fn uniform_row(count: usize) -> Self {
        Layout::Row {
            gaps: vec![1.0; count.saturating_sub(1)],
        }
    }

    fn offsets(&self, spacing_3d: f64) -> Vec<[f64; 2]> {
        match self {
            Layout::Grid { rows, cols, spacing } => (0..*rows)
                .flat_map(|r| (0..*cols).map(move |c| [c as f64 * spacing[0], r as f64 * spacing[1]]))
                .collect(),
            Layout::Row { gaps } => {
                let mut x = 0.0;
                let mut out = vec![[0.0, 0.0]];
                for g in gaps {
                    x += g * spacing_3d;
                    out.push([x, 0.0]);
                }
                out
            }
        }
    }

    fn is_uniform(&self) -> bool {
        match self {
            Layout::Grid { .. } => true,
            Layout::Row { gaps } => gaps.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-12),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Motif {
    pub template: Template,
    /// World position of the first instance's template centre.
    pub origin: [f64; 2],
    pub layout: Layout,
    pub spacing_3d: f64,
}

impl Motif {
    pub fn centers(&self) -> Vec<[f64; 2]> {
        self.layout
            .offsets(self.spacing_3d)
            .into_iter()
            .map(|o| [self.origin[0] + o[0], self.origin[1] + o[1]])
            .collect()
    }
}

/// Row-major 3×4 projection acting on homogeneous world points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Camera(pub [[f64; 4]; 3]);

impl Camera {
    /// World plane coordinates are image pixels.
    pub fn frontal() -> Self {
        Self([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    }

    /// Pinhole camera with focal length `focal`, rotated by `yaw_deg` about
    /// the image vertical, placed so that world point `target` (on `Z = 0`)
    /// projects to the image centre from depth `distance`.
    pub fn perspective(focal: f64, yaw_deg: f64, distance: f64, target: [f64; 2], width: u32, height: u32) -> Self {
        let a = yaw_deg.to_radians();
        let (c, s) = (a.cos(), a.sin());
        let rot = [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]];
        let t = [-(target[0] * c), -target[1], distance + target[0] * s];
        let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
        let k = [[focal, 0.0, cx], [0.0, focal, cy], [0.0, 0.0, 1.0]];
        let mut rt = [[0.0; 4]; 3];
        for r in 0..3 {
            rt[r] = [rot[r][0], rot[r][1], rot[r][2], t[r]];
        }
        let mut p = [[0.0; 4]; 3];
        for r in 0..3 {
            for col in 0..4 {
                p[r][col] = (0..3).map(|i| k[r][i] * rt[i][col]).sum();
            }
        }
        Self(p)
    }

    /// Homography from world-plane `(X, Y)` to the image.
    pub fn plane_homography(&self) -> Matrix3<f64> {
        let p = &self.0;
        Matrix3::new(p[0][0], p[0][1], p[0][3], p[1][0], p[1][1], p[1][3], p[2][0], p[2][1], p[2][3])
    }

    /// Image of the world direction `(dx, dy, 0)`; `None` at infinity.
    pub fn vanishing_point(&self, dir: [f64; 2]) -> Option<[f64; 2]> {
        let v = self.plane_homography() * Vector3::new(dir[0], dir[1], 0.0);
        (v[2].abs() > 1e-12).then(|| [v[0] / v[2], v[1] / v[2]])
    }
}

fn project(h: &Matrix3<f64>, p: [f64; 2]) -> [f64; 2] {
    let v = h * Vector3::new(p[0], p[1], 1.0);
    [v[0] / v[2], v[1] / v[2]]
}

/// Jacobian of the plane homography at `p`.
fn jacobian(h: &Matrix3<f64>, p: [f64; 2]) -> [[f64; 2]; 2] {
    let v = h * Vector3::new(p[0], p[1], 1.0);
    let w = v[2];
    let (u, vv) = (v[0] / w, v[1] / w);
    [
        [(h[(0, 0)] - u * h[(2, 0)]) / w, (h[(0, 1)] - u * h[(2, 1)]) / w],
        [(h[(1, 0)] - vv * h[(2, 0)]) / w, (h[(1, 1)] - vv * h[(2, 1)]) / w],
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    pub motifs: Vec<Motif>,
    pub camera: Camera,
    /// Standard deviation of feature position noise, pixels.
    pub noise_px: f64,
    /// Standard deviation of per-component descriptor noise.
    pub descriptor_noise: f64,
    /// Unmatched distractor features.
    pub n_clutter: usize,
    pub seed: u64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        for m in &self.motifs {
            if !(m.spacing_3d > 0.0) {
                return Err(Error::InvalidArgument("spacing_3d must be positive".into()));
            }
        }
        if self.width < 32 || self.height < 32 {
            return Err(Error::ImageTooSmall {
                width: self.width,
                height: self.height,
                min: 32,
            });
        }
        Ok(())
    }
}

/// A rendered scene and its ground truth.
#[derive(Clone, Debug)]
pub struct Scene {
    pub image: GrayImage,
    pub features: FeatureSet,
    pub ground_truth: GroundTruth,
    /// Vanishing point of the first motif's translation direction.
    pub vp_gt: Option<[f64; 2]>,
    /// True when every motif is uniformly spaced.
    pub ts_gt: bool,
    /// Ground-truth pattern matrix per motif (rows = keypoints, columns =
    /// instances, in layout order).
    pub gt_matrices: Vec<RpMatrix>,
}

struct RawFeature {
    pos: [f64; 2],
    scale: f64,
    orientation: f64,
    descriptor: Vec<f64>,
    slot: Option<(usize, usize, usize)>,
}

/// Renders a scene: image, projected keypoints as features, projected
/// template extents as ground truth.
pub fn render_scene(spec: &SceneSpec) -> Result<Scene> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let h = spec.camera.plane_homography();
    let h_inv = h
        .try_inverse()
        .ok_or(Error::InvalidArgument("camera maps the plane degenerately".into()))?;
    let (w, ht) = (spec.width as f64, spec.height as f64);
    let dim = spec
        .motifs
        .first()
        .and_then(|m| m.template.descriptors.first())
        .map_or(DEFAULT_DESCRIPTOR_DIM, Vec::len);
    let pos_noise = Normal::new(0.0, spec.noise_px.max(0.0)).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let desc_noise = Normal::new(0.0, spec.descriptor_noise.max(0.0)).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let mut raw = Vec::new();
    let mut gt = GroundTruth::default();
    let mut squares: Vec<(usize, [f64; 2])> = Vec::new();
    let mut instance_index = 0;
    for (mi, motif) in spec.motifs.iter().enumerate() {
        let half = motif.template.size / 2.0;
        let mut instances = Vec::new();
        for (ci, c) in motif.centers().into_iter().enumerate() {
            let corners: Vec<[f64; 2]> = [[-half, -half], [half, -half], [half, half], [-half, half]]
                .iter()
                .map(|d| project(&h, [c[0] + d[0], c[1] + d[1]]))
                .collect();
            let inside = corners
                .iter()
                .all(|p| p[0] >= 0.0 && p[1] >= 0.0 && p[0] <= w && p[1] <= ht && p[0].is_finite() && p[1].is_finite());
            if !inside {
                return Err(Error::InstanceOutOfBounds { index: instance_index });
            }
            instance_index += 1;
            let frontal = h[(2, 0)] == 0.0 && h[(2, 1)] == 0.0 && h[(0, 1)] == 0.0 && h[(1, 0)] == 0.0;
            instances.push(if frontal {
                Region::Box(BBox::from_points(corners).expect("four corners"))
            } else {
                Region::Polygon(corners)
            });
            squares.push((mi, c));
            for (ki, blob) in motif.template.blobs.iter().enumerate() {
                let world = [c[0] + blob.x, c[1] + blob.y];
                let j = jacobian(&h, world);
                let det = (j[0][0] * j[1][1] - j[0][1] * j[1][0]).abs();
                let dir = [blob.orientation.cos(), blob.orientation.sin()];
                let mapped = [j[0][0] * dir[0] + j[0][1] * dir[1], j[1][0] * dir[0] + j[1][1] * dir[1]];
                let mut pos = project(&h, world);
                pos[0] += pos_noise.sample(&mut rng);
                pos[1] += pos_noise.sample(&mut rng);
                let descriptor = motif.template.descriptors[ki]
                    .iter()
                    .map(|v| v + desc_noise.sample(&mut rng))
                    .collect();
                raw.push(RawFeature {
                    pos,
                    scale: blob.sigma * det.sqrt(),
                    orientation: mapped[1].atan2(mapped[0]),
                    descriptor,
                    slot: Some((mi, ki, ci)),
                });
            }
        }
        gt.rps.push(GtRp { instances });
    }
    for _ in 0..spec.n_clutter {
        raw.push(RawFeature {
            pos: [rng.gen_range(0.0..w), rng.gen_range(0.0..ht)],
            scale: rng.gen_range(2.0..5.0),
            orientation: rng.gen_range(0.0..std::f64::consts::TAU),
            descriptor: unit_vector(&mut rng, dim),
            slot: None,
        });
    }

    // Ids follow image order (y, then x), as for detected features.
    let eps = 1e-6;
    for f in &mut raw {
        f.pos[0] = f.pos[0].clamp(0.0, w - eps);
        f.pos[1] = f.pos[1].clamp(0.0, ht - eps);
    }
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| {
        raw[a].pos[1]
            .total_cmp(&raw[b].pos[1])
            .then(raw[a].pos[0].total_cmp(&raw[b].pos[0]))
    });
    let mut gt_rows: Vec<Vec<Vec<Option<usize>>>> = spec
        .motifs
        .iter()
        .map(|m| vec![vec![None; m.centers().len()]; m.template.blobs.len()])
        .collect();
    let mut features = Vec::with_capacity(raw.len());
    for (id, &i) in order.iter().enumerate() {
        let f = &raw[i];
        if let Some((mi, ki, ci)) = f.slot {
            gt_rows[mi][ki][ci] = Some(id);
        }
        features.push(Feature::new(id, f.pos[0], f.pos[1], f.scale, f.orientation, f.descriptor.clone()));
    }
    let features = FeatureSet::new(spec.width, spec.height, dim, features)?;

    let image = GrayImage::from_fn(spec.width, spec.height, |x, y| {
        let p = project(&h_inv, [x as f64 + 0.5, y as f64 + 0.5]);
        let mut v = BACKGROUND;
        for (mi, c) in &squares {
            let t = &spec.motifs[*mi].template;
            let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
            if dx.abs() <= t.size / 2.0 && dy.abs() <= t.size / 2.0 {
                v += t.intensity([dx, dy]);
            }
        }
        to_luma(v)
    });

    let vp_gt = spec.motifs.first().and_then(|m| match m.layout {
        Layout::Row { .. } => spec.camera.vanishing_point([1.0, 0.0]),
        Layout::Grid { .. } => None,
    });
    Ok(Scene {
        image,
        features,
        ground_truth: gt,
        vp_gt,
        ts_gt: spec.motifs.iter().all(|m| m.layout.is_uniform()),
        gt_matrices: gt_rows.into_iter().map(RpMatrix::from_rows).collect(),
    })
}

/// Named scene configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Grid,
    PerspectiveRow,
    TwoMotifs,
    Counting,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Grid, Preset::PerspectiveRow, Preset::TwoMotifs, Preset::Counting];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Grid => "grid",
            Preset::PerspectiveRow => "perspective-row",
            Preset::TwoMotifs => "two-motifs",
            Preset::Counting => "counting",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset {name:?}")))
    }

    /// Maximum within-instance feature distance that keeps instances apart,
    /// as a fraction of the image diagonal.
    pub fn recommended_p_d(&self) -> f64 {
        0.1
    }

    pub fn spec(&self, seed: u64) -> SceneSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e_ed0f_7e3f_1a7e);
        let dim = DEFAULT_DESCRIPTOR_DIM;
        match self {
            Preset::Grid => SceneSpec {
                width: 800,
                height: 600,
                motifs: vec![Motif {
                    template: Template::random(&mut rng, 120.0, 10, 44.0, dim),
                    origin: [200.0, 200.0],
                    layout: Layout::Grid {
                        rows: 2,
                        cols: 3,
                        spacing: [200.0, 200.0],
                    },
                    spacing_3d: 200.0,
                }],
                camera: Camera::frontal(),
                noise_px: 0.0,
                descriptor_noise: 0.01,
                n_clutter: 12,
                seed,
            },
            Preset::PerspectiveRow => perspective_row_spec(seed, &Layout::uniform_row(5), 0.0),
            Preset::TwoMotifs => SceneSpec {
                width: 800,
                height: 600,
                motifs: vec![
                    Motif {
                        template: Template::random(&mut rng, 120.0, 12, 44.0, dim),
                        origin: [200.0, 136.0],
                        layout: Layout::Grid {
                            rows: 1,
                            cols: 3,
                            spacing: [200.0, 0.0],
                        },
                        spacing_3d: 200.0,
                    },
                    Motif {
                        template: Template::random(&mut rng, 96.0, 6, 36.0, dim),
                        origin: [112.0, 424.0],
                        layout: Layout::Grid {
                            rows: 1,
                            cols: 5,
                            spacing: [144.0, 0.0],
                        },
                        spacing_3d: 144.0,
                    },
                ],
                camera: Camera::frontal(),
                noise_px: 0.0,
                descriptor_noise: 0.01,
                n_clutter: 12,
                seed,
            },
            Preset::Counting => SceneSpec {
                width: 800,
                height: 600,
                motifs: vec![Motif {
                    template: Template::random(&mut rng, 112.0, 8, 40.0, dim),
                    origin: [136.0, 136.0],
                    layout: Layout::Grid {
                        rows: 3,
                        cols: 4,
                        spacing: [176.0, 168.0],
                    },
                    spacing_3d: 176.0,
                }],
                camera: Camera::frontal(),
                noise_px: 0.0,
                descriptor_noise: 0.01,
                n_clutter: 12,
                seed,
            },
        }
    }
}

/// A row of instances on a plane turned away from the camera, so that the
/// row recedes towards a vanishing point on the right of the image.
pub fn perspective_row_spec(seed: u64, layout: &Layout, noise_px: f64) -> SceneSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e_3f1a_7e5e_ed0f);
    let template = Template::random(&mut rng, 120.0, 10, 44.0, DEFAULT_DESCRIPTOR_DIM);
    let spacing = 170.0;
    let offsets = layout.offsets(spacing);
    let span = offsets.last().map_or(0.0, |o| o[0]);
    let yaw = rng.gen_range(-42.0..-30.0);
    let focal = rng.gen_range(650.0..750.0);
    SceneSpec {
        width: 800,
        height: 600,
        motifs: vec![Motif {
            template,
            origin: [0.0, 0.0],
            layout: layout.clone(),
            spacing_3d: spacing,
        }],
        camera: Camera::perspective(focal, yaw, 1100.0, [span / 2.0, 0.0], 800, 600),
        noise_px,
        descriptor_noise: 0.01,
        n_clutter: 8,
        seed,
    }
}

/// Several receding rows ("floors") on one plane, each with its own
/// template, so their lines reach the shared vanishing point from a wide
/// range of angles.
pub fn facade_spec(seed: u64, floors: usize, cols: usize, noise_px: f64) -> SceneSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x00fa_cade_5eed);
    let spacing = 120.0;
    let floor_gap = 130.0;
    let motifs: Vec<Motif> = (0..floors)
        .map(|k| Motif {
            template: Template::random(&mut rng, 96.0, 8, 36.0, DEFAULT_DESCRIPTOR_DIM),
            origin: [0.0, k as f64 * floor_gap],
            layout: Layout::uniform_row(cols),
            spacing_3d: spacing,
        })
        .collect();
    let span_x = (cols - 1) as f64 * spacing;
    let span_y = (floors.max(1) - 1) as f64 * floor_gap;
    let yaw = rng.gen_range(-68.0..-60.0);
    let focal = rng.gen_range(550.0..650.0);
    SceneSpec {
        width: 800,
        height: 600,
        motifs,
        camera: Camera::perspective(focal, yaw, 1300.0, [span_x / 2.0, span_y / 2.0], 800, 600),
        noise_px,
        descriptor_noise: 0.01,
        n_clutter: 8,
        seed,
    }
}
