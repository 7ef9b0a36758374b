//! Renders every preset scene and writes it with its ground truth.
//! Usage: `cargo run --example synth [OUT_DIR]`

use std::path::PathBuf;

use rescu::pipeline::write_scene;
use rescu::synth::{render_scene, Preset};

fn main() -> rescu::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("rescu-scenes"));
    for preset in Preset::ALL {
        let scene = render_scene(&preset.spec(0))?;
        let dir = root.join(preset.name());
        write_scene(&scene, &dir)?;
        let vp = scene.vp_gt.map_or("none".to_string(), |p| format!("({:.1}, {:.1})", p[0], p[1]));
        println!(
            "{}: {} features, instances {:?}, vanishing point {vp}, uniform {} -> {}",
            preset.name(),
            scene.features.len(),
            scene.ground_truth.rps.iter().map(|rp| rp.instances.len()).collect::<Vec<_>>(),
            scene.ts_gt,
            dir.display()
        );
    }
    Ok(())
}
