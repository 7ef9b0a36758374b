//! End-to-end runs over one input or a directory of scenes, with run
//! manifests and atomic outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use image::{DynamicImage, Rgb, RgbImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::captioner::{enhance_caption, CaptionContext, VpStatus};
use crate::discovery::{discover_rps, grid_search_params};
use crate::error::{Error, Result, StageExt};
use crate::features::{build_visual_words, detect_features, load_features, DetectorConfig, DEFAULT_WORD_DISTANCE, MIN_WORD_SIZE};
use crate::geometry::{detect_translation_symmetry, lines_from_rp, ransac_vp, RansacConfig, DEFAULT_TS_THRESHOLD};
use crate::json::{self, load_ground_truth, read_document, write_atomic, write_document, PatternsDoc, TsDoc, VpDoc, VpTruth};
use crate::metrics::{curve_csv, evaluate, ts_success_rate, vpd_success_curve, EvalReport, VpdCurves};
use crate::overlay::{render_overlay, render_svg, Annotations};
use crate::types::{DiscoveryParams, FeatureSet, GroundTruth, LineEstimate, RecurringPattern, TsResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default thresholds of the batch success-rate curves.
pub const VPD_DIST_THRESHOLDS_PX: [f64; 10] = [1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 30.0, 50.0, 75.0, 100.0];
pub const VPD_ANGLE_THRESHOLDS_DEG: [f64; 10] = [0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 7.5, 10.0, 15.0, 20.0];

/// Fully resolved settings of a pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Raster image, or a `features.json` document.
    pub input: PathBuf,
    #[serde(default)]
    pub gt: Option<PathBuf>,
    pub h: f64,
    #[serde(default)]
    pub sweep: Vec<f64>,
    pub discovery: DiscoveryParams,
    /// Search the adaptive parameter grid instead of using `discovery` as is.
    pub grid_search: bool,
    pub word_distance: f64,
    pub detector: DetectorConfig,
    pub ransac: RansacConfig,
    pub ts_threshold: f64,
    #[serde(default)]
    pub caption: Option<String>,
    pub svg: bool,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            gt: None,
            h: 0.5,
            sweep: Vec::new(),
            discovery: DiscoveryParams::default(),
            grid_search: false,
            word_distance: DEFAULT_WORD_DISTANCE,
            detector: DetectorConfig::default(),
            ransac: RansacConfig::default(),
            ts_threshold: DEFAULT_TS_THRESHOLD,
            caption: None,
            svg: false,
        }
    }

    /// Sets every seed of the run.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.discovery.rng_seed = seed;
        self.ransac.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.discovery.validate()?;
        self.ransac.validate()?;
        if !(0.0..=1.0).contains(&self.h) {
            return Err(Error::InvalidArgument(format!("h must lie in [0, 1], got {}", self.h)));
        }
        if !(self.word_distance > 0.0) {
            return Err(Error::InvalidArgument("word distance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: String,
    pub wall_ms: f64,
}

/// Record of one command invocation, written next to its outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub inputs: Vec<PathBuf>,
    pub params: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub stages: Vec<StageTime>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<PathBuf>, params: &impl Serialize) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            inputs,
            params: serde_json::to_value(params)?,
            seeds: BTreeMap::new(),
            stages: Vec::new(),
        })
    }

    pub fn seed(mut self, name: &str, value: u64) -> Self {
        self.seeds.insert(name.to_string(), value);
        self
    }

    /// Runs `f`, recording its wall time under `stage` and tagging its error.
    pub fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().stage(stage);
        self.stages.push(StageTime {
            stage: stage.to_string(),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        out
    }

    /// The pipeline settings this manifest was written with.
    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        if self.command != "pipeline" {
            return Err(Error::InvalidArgument(format!(
                "manifest records a {:?} run, not a pipeline run",
                self.command
            )));
        }
        Ok(serde_json::from_value(self.params.clone())?)
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    read_document(path)
}

/// Everything a pipeline run produced.
#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub features: FeatureSet,
    pub patterns: Vec<RecurringPattern>,
    pub params: DiscoveryParams,
    pub vp: VpDoc,
    pub ts: TsDoc,
    pub report: Option<EvalReport>,
    pub caption: Option<String>,
    pub manifest: RunManifest,
}

fn is_features_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Opens a raster, mapping decode failures to parse errors.
pub fn open_image(path: &Path) -> Result<DynamicImage> {
    let bytes = fs::read(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    image::load_from_memory(&bytes).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Feature set and base raster for an input path.
fn load_input(cfg: &PipelineConfig) -> Result<(FeatureSet, RgbImage)> {
    if is_features_path(&cfg.input) {
        let fs = load_features(&cfg.input)?;
        let canvas = RgbImage::from_pixel(fs.image_width, fs.image_height, Rgb([128, 128, 128]));
        Ok((fs, canvas))
    } else {
        let img = open_image(&cfg.input)?;
        let fs = detect_features(&img, &cfg.detector)?;
        Ok((fs, img.to_rgb8()))
    }
}

/// Vanishing point from the lines of every pattern; a missing consensus is
/// recorded rather than raised.
pub fn estimate_vp(patterns: &[RecurringPattern], fs: &FeatureSet, cfg: &RansacConfig) -> Result<VpDoc> {
    let lines: Vec<LineEstimate> = patterns.iter().flat_map(|rp| lines_from_rp(rp, fs)).collect();
    match ransac_vp(&lines, cfg, fs.image_width as f64, fs.image_height as f64) {
        Ok(vp) => Ok(VpDoc {
            vanishing_point: Some(vp),
            lines,
            note: None,
        }),
        Err(e @ (Error::InsufficientLines { .. } | Error::NoConsensus { .. })) => Ok(VpDoc {
            vanishing_point: None,
            lines,
            note: Some(e.to_string()),
        }),
        Err(e) => Err(e),
    }
}

/// Verdict for the top pattern plus one per pattern.
pub fn symmetry_doc(patterns: &[RecurringPattern], fs: &FeatureSet, threshold: f64) -> TsDoc {
    let per_pattern: Vec<TsResult> = patterns.iter().map(|rp| detect_translation_symmetry(rp, fs, threshold)).collect();
    TsDoc {
        result: per_pattern.first().cloned().unwrap_or_else(|| TsResult::untested(threshold)),
        per_pattern,
    }
}

pub fn vp_status(vp: &VpDoc, width: u32, height: u32) -> VpStatus {
    match &vp.vanishing_point {
        None => VpStatus::None,
        Some(v) => {
            let [x, y] = v.point;
            if x.is_finite() && y.is_finite() && x >= 0.0 && y >= 0.0 && x < width as f64 && y < height as f64 {
                VpStatus::Inside
            } else {
                VpStatus::Outside
            }
        }
    }
}

/// Runs every stage on one input and writes `rps.json`, `vp.json`,
/// `ts.json`, `report.json` (with ground truth), `caption.txt` (with a base
/// caption), `overlay.png` (and `overlay.svg`) and `manifest.json` into
/// `out_dir`. Inputs are read and every stage is run before anything is
/// written.
pub fn run_pipeline(cfg: &PipelineConfig, out_dir: &Path) -> Result<PipelineOutcome> {
    cfg.validate()?;
    let mut inputs = vec![cfg.input.clone()];
    inputs.extend(cfg.gt.clone());
    let mut manifest = RunManifest::new("pipeline", inputs, cfg)?
        .seed("discovery", cfg.discovery.rng_seed)
        .seed("ransac", cfg.ransac.rng_seed);

    let gt: Option<GroundTruth> = match &cfg.gt {
        Some(p) => Some(load_ground_truth(p).stage("eval")?),
        None => None,
    };
    let (fs, canvas) = manifest.time("features", || load_input(cfg))?;
    let words = manifest.time("words", || Ok(build_visual_words(&fs, cfg.word_distance, MIN_WORD_SIZE)))?;
    let (params, patterns) = manifest.time("discover", || {
        Ok(if cfg.grid_search {
            grid_search_params(&fs, &words, &DiscoveryParams::adaptive_grid(&cfg.discovery))
        } else {
            (cfg.discovery.clone(), discover_rps(&fs, &words, &cfg.discovery))
        })
    })?;
    let vp = manifest.time("vpd", || estimate_vp(&patterns, &fs, &cfg.ransac))?;
    let ts = manifest.time("symmetry", || Ok(symmetry_doc(&patterns, &fs, cfg.ts_threshold)))?;
    let report = match &gt {
        Some(gt) => Some(manifest.time("eval", || evaluate(&patterns, gt, cfg.h, &cfg.sweep))?),
        None => None,
    };
    let caption = match &cfg.caption {
        Some(base) => Some(manifest.time("caption", || match patterns.first() {
            Some(top) => enhance_caption(&CaptionContext {
                base_caption: base.clone(),
                rp_count: top.matrix.n,
                ts_detected: ts.result.has_symmetry,
                vp_status: vp_status(&vp, fs.image_width, fs.image_height),
                noun_regions: None,
            }),
            None => Ok(base.clone()),
        })?),
        None => None,
    };
    let ann = Annotations {
        patterns: &patterns,
        lines: &vp.lines,
        vanishing_point: vp.vanishing_point.as_ref().map(|v| v.point),
    };
    let overlay = manifest.time("overlay", || Ok(render_overlay(&canvas, &ann)))?;

    manifest.time("write", || {
        fs::create_dir_all(out_dir)?;
        write_document(&out_dir.join("rps.json"), &PatternsDoc::new(patterns.clone(), &fs))?;
        write_document(&out_dir.join("vp.json"), &vp)?;
        write_document(&out_dir.join("ts.json"), &ts)?;
        if let Some(r) = &report {
            write_document(&out_dir.join("report.json"), r)?;
            if !r.sweep.is_empty() {
                write_atomic(&out_dir.join("sweep.csv"), crate::metrics::sweep_csv(&r.sweep).as_bytes())?;
            }
        }
        if let Some(c) = &caption {
            write_atomic(&out_dir.join("caption.txt"), format!("{c}\n").as_bytes())?;
        }
        save_png(&out_dir.join("overlay.png"), &overlay)?;
        if cfg.svg {
            let svg = render_svg(fs.image_width, fs.image_height, None, &ann);
            write_atomic(&out_dir.join("overlay.svg"), svg.as_bytes())?;
        }
        Ok(())
    })?;
    write_document(&out_dir.join(MANIFEST_FILE), &manifest)?;

    Ok(PipelineOutcome {
        features: fs,
        patterns,
        params,
        vp,
        ts,
        report,
        caption,
        manifest,
    })
}

/// Encodes a PNG in memory and writes it atomically.
pub fn save_png(path: &Path, img: &RgbImage) -> Result<()> {
    let mut buf = std::io::Cursor::new(Vec::new());
    img.write_to(&mut buf, image::ImageFormat::Png)?;
    write_atomic(path, buf.get_ref())
}

/// One scene of a batch directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SceneInput {
    pub name: String,
    pub input: PathBuf,
    pub gt: Option<PathBuf>,
    pub vp_gt: Option<PathBuf>,
}

const IMAGE_NAMES: [&str; 3] = ["image.png", "image.jpg", "image.jpeg"];

/// Scenes are the subdirectories of `dir`, sorted by name. Each holds an
/// `image.png` (or `.jpg`) and/or `features.json`, with optional `gt.json`
/// and `vp_gt.json`.
pub fn collect_scenes(dir: &Path, prefer_features: bool) -> Result<Vec<SceneInput>> {
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    let mut scenes = Vec::new();
    for d in subdirs {
        let name = d.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let image = IMAGE_NAMES.iter().map(|n| d.join(n)).find(|p| p.is_file());
        let features = Some(d.join("features.json")).filter(|p| p.is_file());
        let input = if prefer_features { features.or(image) } else { image.or(features) };
        let Some(input) = input else { continue };
        let existing = |n: &str| Some(d.join(n)).filter(|p| p.is_file());
        scenes.push(SceneInput {
            name,
            input,
            gt: existing("gt.json"),
            vp_gt: existing("vp_gt.json"),
        });
    }
    Ok(scenes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSummary {
    pub name: String,
    pub counts: Vec<usize>,
    pub report: Option<EvalReport>,
    pub has_symmetry: bool,
    pub vanishing_point: Option<[f64; 2]>,
    pub vp_gt: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneFailure {
    pub name: String,
    pub error: String,
}

/// Unweighted means of the per-image rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanRates {
    pub images: usize,
    pub rp_precision: f64,
    pub rp_recall: f64,
    pub inst_precision: f64,
    pub inst_recall: f64,
}

/// Body of `aggregate.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub scenes: Vec<SceneSummary>,
    pub failures: Vec<SceneFailure>,
    pub mean: Option<MeanRates>,
    pub ts_success_rate: f64,
    pub vpd: Option<VpdCurves>,
}

fn mean_rates(reports: &[&EvalReport]) -> Option<MeanRates> {
    if reports.is_empty() {
        return None;
    }
    let n = reports.len() as f64;
    let avg = |f: fn(&EvalReport) -> f64| reports.iter().map(|r| f(r)).sum::<f64>() / n;
    Some(MeanRates {
        images: reports.len(),
        rp_precision: avg(|r| r.rp_precision),
        rp_recall: avg(|r| r.rp_recall),
        inst_precision: avg(|r| r.inst_precision),
        inst_recall: avg(|r| r.inst_recall),
    })
}

fn run_scene(scene: &SceneInput, template: &PipelineConfig, out_dir: &Path) -> Result<SceneSummary> {
    let cfg = PipelineConfig {
        input: scene.input.clone(),
        gt: scene.gt.clone(),
        ..template.clone()
    };
    let vp_gt = match &scene.vp_gt {
        Some(p) => Some(read_document::<VpTruth>(p).stage("vpd")?.point),
        None => None,
    };
    let out = run_pipeline(&cfg, &out_dir.join(&scene.name))?;
    Ok(SceneSummary {
        name: scene.name.clone(),
        counts: out.patterns.iter().map(|rp| rp.matrix.n).collect(),
        report: out.report,
        has_symmetry: out.ts.result.has_symmetry,
        vanishing_point: out.vp.vanishing_point.map(|v| v.point),
        vp_gt,
    })
}

/// Runs the pipeline on every scene of `dir` in parallel and aggregates the
/// results in name order. Failing scenes are listed, not fatal, unless none
/// succeeds. Writes `aggregate.json` and curve CSVs into `out_dir`.
pub fn run_batch(dir: &Path, template: &PipelineConfig, prefer_features: bool, out_dir: &Path) -> Result<BatchReport> {
    let scenes = collect_scenes(dir, prefer_features)?;
    let results: Vec<(String, Result<SceneSummary>)> = scenes
        .par_iter()
        .map(|s| (s.name.clone(), run_scene(s, template, out_dir)))
        .collect();
    let mut summaries = Vec::new();
    let mut failures = Vec::new();
    for (name, r) in results {
        match r {
            Ok(s) => summaries.push(s),
            Err(e) => failures.push(SceneFailure {
                name,
                error: e.to_string(),
            }),
        }
    }
    if summaries.is_empty() {
        return Err(Error::ZeroInputs);
    }
    let reports: Vec<&EvalReport> = summaries.iter().filter_map(|s| s.report.as_ref()).collect();
    let mean = mean_rates(&reports);
    let ts: Vec<TsResult> = summaries
        .iter()
        .map(|s| TsResult {
            has_symmetry: s.has_symmetry,
            ..TsResult::untested(template.ts_threshold)
        })
        .collect();
    let ts_rate = ts_success_rate(&ts)?;

    let with_gt: Vec<&SceneSummary> = summaries.iter().filter(|s| s.vp_gt.is_some()).collect();
    let vpd = if with_gt.is_empty() {
        None
    } else {
        let preds: Vec<Option<[f64; 2]>> = with_gt.iter().map(|s| s.vanishing_point).collect();
        let gts: Vec<[f64; 2]> = with_gt.iter().filter_map(|s| s.vp_gt).collect();
        let sizes = with_gt
            .iter()
            .map(|s| scene_size(&out_dir.join(&s.name)))
            .collect::<Result<Vec<_>>>()?;
        Some(vpd_success_curve(
            &preds,
            &gts,
            &sizes,
            &VPD_DIST_THRESHOLDS_PX,
            &VPD_ANGLE_THRESHOLDS_DEG,
        )?)
    };

    let report = BatchReport {
        scenes: summaries,
        failures,
        mean,
        ts_success_rate: ts_rate,
        vpd,
    };
    write_document(&out_dir.join("aggregate.json"), &report)?;
    if let Some(v) = &report.vpd {
        write_atomic(
            &out_dir.join("vpd_point.csv"),
            curve_csv(("threshold_px", "success_rate"), &v.point).as_bytes(),
        )?;
        write_atomic(
            &out_dir.join("vpd_vector.csv"),
            curve_csv(("threshold_deg", "success_rate"), &v.vector).as_bytes(),
        )?;
    }
    if !template.sweep.is_empty() {
        let sweeps: Vec<&EvalReport> = report.scenes.iter().filter_map(|s| s.report.as_ref()).collect();
        if !sweeps.is_empty() {
            let n = sweeps.len() as f64;
            let curve: Vec<(f64, f64)> = (0..template.sweep.len())
                .map(|i| (template.sweep[i], sweeps.iter().map(|r| r.sweep[i].inst_recall).sum::<f64>() / n))
                .collect();
            write_atomic(&out_dir.join("recall_vs_h.csv"), curve_csv(("h", "inst_recall"), &curve).as_bytes())?;
        }
    }
    Ok(report)
}

/// Image size recorded in a scene's `rps.json`.
fn scene_size(scene_out: &Path) -> Result<(f64, f64)> {
    let doc: PatternsDoc = read_document(&scene_out.join("rps.json"))?;
    let kp = doc.keypoints.ok_or_else(|| Error::Parse("rps.json lacks keypoints".into()))?;
    Ok((kp.image_width as f64, kp.image_height as f64))
}

/// Reads `vp.json` and returns the point, if any.
pub fn load_vp_point(path: &Path) -> Result<Option<[f64; 2]>> {
    Ok(json::load_vp(path)?.vanishing_point.map(|v| v.point))
}

/// Writes a synthetic scene as `image.png`, `features.json`, `gt.json` and,
/// when the scene has a finite vanishing point, `vp_gt.json`.
pub fn write_scene(scene: &crate::synth::Scene, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut buf = std::io::Cursor::new(Vec::new());
    scene.image.write_to(&mut buf, image::ImageFormat::Png)?;
    write_atomic(&dir.join("image.png"), buf.get_ref())?;
    write_document(&dir.join("features.json"), &scene.features)?;
    write_document(&dir.join("gt.json"), &scene.ground_truth)?;
    if let Some(point) = scene.vp_gt {
        write_document(&dir.join("vp_gt.json"), &VpTruth { point })?;
    }
    Ok(())
}
