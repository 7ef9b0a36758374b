//! Runs every stage on a synthetic receding row and lists the artifacts.
//! Usage: `cargo run --example pipeline [OUT_DIR]`

use std::path::PathBuf;

use rescu::pipeline::{run_pipeline, write_scene, PipelineConfig};
use rescu::synth::{render_scene, Preset};

fn main() -> rescu::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("rescu-pipeline"));
    let scene_dir = root.join("scene");
    write_scene(&render_scene(&Preset::PerspectiveRow.spec(0))?, &scene_dir)?;

    let mut cfg = PipelineConfig::new(scene_dir.join("features.json"));
    cfg.gt = Some(scene_dir.join("gt.json"));
    cfg.discovery.p_d = Preset::PerspectiveRow.recommended_p_d();
    cfg.caption = Some("A group of windows on a wall.".into());
    let out = root.join("run");
    let outcome = run_pipeline(&cfg, &out)?;

    println!("{} patterns", outcome.patterns.len());
    match &outcome.vp.vanishing_point {
        Some(vp) => println!("vanishing point ({:.1}, {:.1})", vp.point[0], vp.point[1]),
        None => println!("no vanishing point"),
    }
    if let Some(r) = &outcome.report {
        println!("instance recall {:.2}", r.inst_recall);
    }
    if let Some(c) = &outcome.caption {
        println!("{c}");
    }
    let mut files: Vec<_> = std::fs::read_dir(&out)?.filter_map(|e| e.ok()).map(|e| e.file_name()).collect();
    files.sort();
    println!("{}: {:?}", out.display(), files);
    Ok(())
}
