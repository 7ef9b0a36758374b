use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rescu::captioner::{enhance_caption, grounded_nouns, CaptionContext, NounRegion, VpStatus};
use rescu::discovery::{discover_rps, grid_search_params};
use rescu::error::{exit, Error, Result, StageExt};
use rescu::features::{build_visual_words, detect_features, load_features, DetectorConfig, DEFAULT_WORD_DISTANCE, MIN_WORD_SIZE};
use rescu::geometry::{rectify_rp, RansacConfig, DEFAULT_TS_THRESHOLD};
use rescu::json::{self, load_ground_truth, load_patterns, read_document, write_atomic, write_document, PatternsDoc};
use rescu::metrics::{count_instances, evaluate, sweep_csv};
use rescu::pipeline::{
    estimate_vp, load_manifest, open_image, run_batch, run_pipeline, save_png, symmetry_doc, write_scene, PipelineConfig, RunManifest,
};
use rescu::synth::{render_scene, Preset};
use rescu::types::{DiscoveryParams, FeatureSet};

#[derive(Parser)]
#[command(name = "rescu", version, about = "Recurring-pattern discovery and single-view geometry")]
struct Cli {
    /// Seed for every randomized stage.
    #[arg(long, global = true, env = "RESCU_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DiscoverArgs {
    /// Search the adaptive (p_d, p_s, p_theta) grid.
    #[arg(long, conflicts_with_all = ["pd", "ps", "ptheta"])]
    grid: bool,
    #[arg(long)]
    pd: Option<f64>,
    #[arg(long)]
    ps: Option<f64>,
    /// Orientation tolerance, degrees.
    #[arg(long)]
    ptheta: Option<f64>,
    /// Number of initial unit patterns.
    #[arg(long)]
    initials: Option<usize>,
    /// Visual-word clustering radius.
    #[arg(long, default_value_t = DEFAULT_WORD_DISTANCE)]
    word_dist: f64,
}

impl DiscoverArgs {
    fn params(&self, seed: u64) -> DiscoveryParams {
        let d = DiscoveryParams::default();
        DiscoveryParams {
            p_d: self.pd.unwrap_or(d.p_d),
            p_s: self.ps.unwrap_or(d.p_s),
            p_theta: self.ptheta.unwrap_or(d.p_theta),
            n_initials: self.initials.unwrap_or(d.n_initials),
            rng_seed: seed,
            ..d
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VpSide {
    Inside,
    Outside,
}

#[derive(Subcommand)]
enum Command {
    /// Detect keypoints in an image.
    Features {
        image: PathBuf,
        #[arg(short, long, default_value = "features.json")]
        output: PathBuf,
        /// Minimum DoG contrast on [0, 1] intensities.
        #[arg(long)]
        contrast: Option<f64>,
        /// Report visual-word statistics at this clustering radius.
        #[arg(long)]
        word_dist: Option<f64>,
    },
    /// Discover recurring patterns in a feature set.
    Discover {
        features: PathBuf,
        #[arg(short, long, default_value = "rps.json")]
        output: PathBuf,
        #[command(flatten)]
        search: DiscoverArgs,
    },
    /// Estimate the vanishing point of the pattern lines.
    Vpd {
        rps: PathBuf,
        /// Image size as WxH; defaults to the size stored in rps.json.
        #[arg(long)]
        image_size: Option<String>,
        /// Feature set, when rps.json carries no keypoints.
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(short, long, default_value = "vp.json")]
        output: PathBuf,
        /// Minimum angle between hypothesis lines, degrees.
        #[arg(long)]
        ac_deg: Option<f64>,
        /// Disable the angular constraint.
        #[arg(long)]
        no_ac: bool,
        /// Inlier distance, pixels.
        #[arg(long)]
        inlier_px: Option<f64>,
    },
    /// Test each pattern for 3D translation symmetry.
    Symmetry {
        rps: PathBuf,
        #[arg(long = "t", default_value_t = DEFAULT_TS_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(short, long, default_value = "ts.json")]
        output: PathBuf,
    },
    /// Warp a pattern so its translation becomes fronto-parallel.
    Rectify {
        image: PathBuf,
        rps: PathBuf,
        vp: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Pattern index in rps.json.
        #[arg(long, default_value_t = 0)]
        pattern: usize,
    },
    /// Print instance counts per pattern.
    Count {
        rps: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Score patterns against ground truth.
    Eval {
        rps: PathBuf,
        gt: PathBuf,
        #[arg(long, default_value_t = 0.5, conflicts_with = "sweep")]
        h: f64,
        /// IOD sweep as start:stop:step.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(short, long, default_value = "report.json")]
        output: PathBuf,
    },
    /// Insert the instance count and geometry clauses into a caption.
    Caption {
        #[arg(long)]
        base: String,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        ts: bool,
        #[arg(long, value_enum)]
        vp: Option<VpSide>,
        /// Grounded noun regions and the patterns to test against them.
        #[arg(long, num_args = 2, value_names = ["REGIONS", "RPS"])]
        regions: Option<Vec<PathBuf>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render a synthetic scene with ground truth.
    Synth {
        #[arg(long)]
        preset: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run every stage on one image or feature set.
    Pipeline {
        /// Image, or features.json.
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        /// Re-run with the settings of an earlier manifest.
        #[arg(long, conflicts_with = "input")]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the pipeline on every scene subdirectory and aggregate.
    Batch {
        dir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Prefer features.json over the image when a scene has both.
        #[arg(long)]
        use_features: bool,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Ground truth; enables the evaluation report.
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    h: f64,
    #[arg(long)]
    sweep: Option<String>,
    /// Base caption to enrich.
    #[arg(long)]
    caption: Option<String>,
    /// Also write overlay.svg.
    #[arg(long)]
    svg: bool,
    #[arg(long = "t", default_value_t = DEFAULT_TS_THRESHOLD)]
    ts_threshold: f64,
    #[command(flatten)]
    search: DiscoverArgs,
}

impl RunArgs {
    fn config(&self, input: PathBuf, seed: u64) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::new(input).with_seed(seed);
        cfg.discovery = self.search.params(seed);
        cfg.grid_search = self.search.grid;
        cfg.word_distance = self.search.word_dist;
        cfg.gt = self.gt.clone();
        cfg.h = self.h;
        cfg.sweep = self.sweep.as_deref().map(parse_sweep).transpose()?.unwrap_or_default();
        cfg.caption = self.caption.clone();
        cfg.svg = self.svg;
        cfg.ts_threshold = self.ts_threshold;
        Ok(cfg)
    }
}

fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("sweep must be start:stop:step, got {s:?}"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if step.is_nan() || step <= 0.0 || stop < start {
        return Err(bad());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect())
}

fn parse_size(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::InvalidArgument(format!("image size must be WxH, got {s:?}"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((w.trim().parse().map_err(|_| bad())?, h.trim().parse().map_err(|_| bad())?))
}

/// `<dir>/<stem>.manifest.json` next to a single-file output.
fn manifest_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    output.with_file_name(format!("{stem}.manifest.json"))
}

fn write_manifest(output: &Path, manifest: &RunManifest) -> Result<()> {
    write_document(&manifest_path(output), manifest)
}

/// Feature geometry for a patterns document.
fn keypoints(doc: &PatternsDoc, features: Option<&Path>) -> Result<FeatureSet> {
    match (features, &doc.keypoints) {
        (Some(p), _) => load_features(p),
        (None, Some(kp)) => Ok(kp.clone()),
        (None, None) => Err(Error::InvalidArgument("rps.json carries no keypoints; pass --features".into())),
    }
}

#[derive(Serialize)]
struct Empty {}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Features {
            image,
            output,
            contrast,
            word_dist,
        } => {
            let mut cfg = DetectorConfig::default();
            if let Some(c) = contrast {
                cfg.contrast_threshold = c;
            }
            let mut manifest = RunManifest::new("features", vec![image.clone()], &cfg)?;
            let img = manifest.time("features", || open_image(&image))?;
            let fs = manifest.time("features", || detect_features(&img, &cfg))?;
            json::save_features(&output, &fs)?;
            eprintln!("{} features", fs.len());
            if let Some(d) = word_dist {
                let words = build_visual_words(&fs, d, MIN_WORD_SIZE);
                eprintln!("{} visual words at radius {d}", words.len());
            }
            write_manifest(&output, &manifest)
        }
        Command::Discover { features, output, search } => {
            let params = search.params(seed);
            let mut manifest = RunManifest::new("discover", vec![features.clone()], &params)?.seed("discovery", seed);
            let fs = manifest.time("features", || load_features(&features))?;
            let words = build_visual_words(&fs, search.word_dist, MIN_WORD_SIZE);
            let (_, patterns) = manifest.time("discover", || {
                Ok(if search.grid {
                    grid_search_params(&fs, &words, &DiscoveryParams::adaptive_grid(&params))
                } else {
                    params.validate()?;
                    (params.clone(), discover_rps(&fs, &words, &params))
                })
            })?;
            json::save_patterns(&output, &patterns, &fs)?;
            eprintln!("{} patterns", patterns.len());
            write_manifest(&output, &manifest)
        }
        Command::Vpd {
            rps,
            image_size,
            features,
            output,
            ac_deg,
            no_ac,
            inlier_px,
        } => {
            let mut cfg = RansacConfig {
                rng_seed: seed,
                angular_constraint: !no_ac,
                ..RansacConfig::default()
            };
            if let Some(a) = ac_deg {
                cfg.angular_threshold_deg = a;
            }
            if let Some(p) = inlier_px {
                cfg.inlier_point_to_line_px = p;
            }
            cfg.validate()?;
            let mut manifest = RunManifest::new("vpd", vec![rps.clone()], &cfg)?.seed("ransac", seed);
            let doc = load_patterns(&rps).stage("vpd")?;
            let mut fs = keypoints(&doc, features.as_deref())?;
            if let Some(s) = image_size {
                (fs.image_width, fs.image_height) = parse_size(&s)?;
            }
            let vp = manifest.time("vpd", || estimate_vp(&doc.patterns, &fs, &cfg))?;
            match (&vp.vanishing_point, &vp.note) {
                (Some(v), _) => eprintln!("vanishing point ({:.2}, {:.2})", v.point[0], v.point[1]),
                (None, Some(n)) => eprintln!("no vanishing point: {n}"),
                (None, None) => {}
            }
            write_document(&output, &vp)?;
            write_manifest(&output, &manifest)
        }
        Command::Symmetry {
            rps,
            threshold,
            features,
            output,
        } => {
            let mut manifest = RunManifest::new("symmetry", vec![rps.clone()], &threshold)?;
            let doc = load_patterns(&rps).stage("symmetry")?;
            let fs = keypoints(&doc, features.as_deref())?;
            let ts = manifest.time("symmetry", || Ok(symmetry_doc(&doc.patterns, &fs, threshold)))?;
            eprintln!("translation symmetry: {}", ts.result.has_symmetry);
            write_document(&output, &ts)?;
            write_manifest(&output, &manifest)
        }
        Command::Rectify {
            image,
            rps,
            vp,
            output,
            pattern,
        } => {
            let mut manifest = RunManifest::new("rectify", vec![image.clone(), rps.clone(), vp.clone()], &pattern)?;
            let img = open_image(&image).stage("rectify")?;
            let doc = load_patterns(&rps).stage("rectify")?;
            let point = json::load_vp(&vp).stage("rectify")?.vanishing_point.map(|v| v.point);
            let rp = doc
                .patterns
                .get(pattern)
                .ok_or_else(|| Error::InvalidArgument(format!("no pattern {pattern} in {}", rps.display())))?;
            let out = manifest.time("rectify", || rectify_rp(&img, rp, point))?;
            save_png(&output, &out.image)?;
            #[derive(Serialize)]
            struct RectifyDoc {
                pattern: usize,
                homography: [[f64; 3]; 3],
            }
            write_document(
                &output.with_extension("json"),
                &RectifyDoc {
                    pattern,
                    homography: out.homography.0,
                },
            )?;
            write_manifest(&output, &manifest)
        }
        Command::Count { rps, output } => {
            let doc = load_patterns(&rps).stage("count")?;
            let counts = count_instances(&doc.patterns);
            let text = json::encode(&counts)?;
            print!("{text}");
            if let Some(o) = output {
                write_atomic(&o, text.as_bytes())?;
                write_manifest(&o, &RunManifest::new("count", vec![rps], &Empty {})?)?;
            }
            Ok(())
        }
        Command::Eval { rps, gt, h, sweep, output } => {
            let sweep = sweep.as_deref().map(parse_sweep).transpose()?.unwrap_or_default();
            let mut manifest = RunManifest::new("eval", vec![rps.clone(), gt.clone()], &(h, &sweep))?;
            let doc = load_patterns(&rps).stage("eval")?;
            let truth = load_ground_truth(&gt).stage("eval")?;
            let report = manifest.time("eval", || evaluate(&doc.patterns, &truth, h, &sweep))?;
            eprintln!(
                "h={h}: instance P {:.3} R {:.3}, pattern P {:.3} R {:.3}",
                report.inst_precision, report.inst_recall, report.rp_precision, report.rp_recall
            );
            write_document(&output, &report)?;
            if !report.sweep.is_empty() {
                write_atomic(&output.with_extension("csv"), sweep_csv(&report.sweep).as_bytes())?;
            }
            write_manifest(&output, &manifest)
        }
        Command::Caption {
            base,
            count,
            ts,
            vp,
            regions,
            output,
        } => {
            let (noun_regions, rp_count) = match regions {
                Some(paths) => {
                    #[derive(serde::Deserialize)]
                    struct RegionsDoc {
                        regions: Vec<NounRegion>,
                    }
                    let regions: RegionsDoc = read_document(&paths[0]).stage("caption")?;
                    let doc = load_patterns(&paths[1]).stage("caption")?;
                    let top = doc
                        .patterns
                        .first()
                        .ok_or_else(|| Error::InvalidArgument("no patterns to ground".into()))?;
                    (Some(grounded_nouns(top, &regions.regions)), count.unwrap_or(top.matrix.n))
                }
                None => (
                    None,
                    count.ok_or_else(|| Error::InvalidArgument("--count is required without --regions".into()))?,
                ),
            };
            let ctx = CaptionContext {
                base_caption: base,
                rp_count,
                ts_detected: ts,
                vp_status: match vp {
                    None => VpStatus::None,
                    Some(VpSide::Inside) => VpStatus::Inside,
                    Some(VpSide::Outside) => VpStatus::Outside,
                },
                noun_regions,
            };
            let text = enhance_caption(&ctx).stage("caption")?;
            println!("{text}");
            if let Some(o) = output {
                write_atomic(&o, format!("{text}\n").as_bytes())?;
                write_manifest(&o, &RunManifest::new("caption", Vec::new(), &ctx)?)?;
            }
            Ok(())
        }
        Command::Synth { preset, output } => {
            let preset = Preset::parse(&preset)?;
            let spec = preset.spec(seed);
            let mut manifest = RunManifest::new("synth", Vec::new(), &spec)?.seed("scene", seed);
            let scene = manifest.time("synth", || render_scene(&spec))?;
            write_scene(&scene, &output)?;
            eprintln!(
                "{}: {} features, {} ground-truth patterns",
                preset.name(),
                scene.features.len(),
                scene.ground_truth.rps.len()
            );
            write_document(&output.join("manifest.json"), &manifest)
        }
        Command::Pipeline {
            input,
            output,
            manifest,
            run,
        } => {
            let cfg = match (manifest, input) {
                (Some(m), _) => load_manifest(&m)?.pipeline_config()?,
                (None, Some(i)) => run.config(i, seed)?,
                (None, None) => return Err(Error::InvalidArgument("pipeline needs an input or --manifest".into())),
            };
            let out = run_pipeline(&cfg, &output)?;
            let counts = count_instances(&out.patterns);
            eprintln!("{} patterns, instance counts {:?}", out.patterns.len(), counts.per_rp);
            if let Some(r) = &out.report {
                eprintln!("instance P {:.3} R {:.3} at h={}", r.inst_precision, r.inst_recall, r.h);
            }
            if let Some(c) = &out.caption {
                println!("{c}");
            }
            Ok(())
        }
        Command::Batch {
            dir,
            output,
            use_features,
            run,
        } => {
            let template = run.config(PathBuf::new(), seed)?;
            let report = run_batch(&dir, &template, use_features, &output)?;
            eprintln!("{} scenes evaluated, {} failed", report.scenes.len(), report.failures.len());
            for f in &report.failures {
                eprintln!("  {}: {}", f.name, f.error);
            }
            let manifest = RunManifest::new("batch", vec![dir], &template)?.seed("discovery", seed);
            write_document(&output.join("manifest.json"), &manifest)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
