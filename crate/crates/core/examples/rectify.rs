//! Warps a receding row to an affine view and writes it as a PNG.
//! Usage: `cargo run --example rectify [OUT.png]`

use rescu::discovery::make_pattern;
use rescu::geometry::{rectify_rp, warped_centroids};
use rescu::synth::{render_scene, Preset};
use rescu::DiscoveryParams;

fn main() -> rescu::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("rescu-rectified.png").display().to_string());
    let scene = render_scene(&Preset::PerspectiveRow.spec(0))?;
    let rp = make_pattern(&scene.features, scene.gt_matrices[0].clone(), 1.0, &DiscoveryParams::default());
    let img = image::DynamicImage::ImageLuma8(scene.image.clone());
    let rect = rectify_rp(&img, &rp, scene.vp_gt)?;
    let mut c = warped_centroids(&rp, &scene.features, &rect.homography);
    c.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let gaps: Vec<String> = c
        .windows(2)
        .map(|w| format!("{:.1}", (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])))
        .collect();
    println!("instance spacing after rectification: {}", gaps.join(", "));
    rescu::pipeline::save_png(std::path::Path::new(&out), &rect.image)?;
    println!("wrote {out}");
    Ok(())
}
