//! Detects scale-space keypoints on a synthetic grid and groups them into
//! visual words.

use rescu::features::{build_visual_words, detect_features, DetectorConfig, DEFAULT_WORD_DISTANCE, MIN_WORD_SIZE};
use rescu::synth::{render_scene, Preset};

fn main() -> rescu::Result<()> {
    let scene = render_scene(&Preset::Grid.spec(0))?;
    let img = image::DynamicImage::ImageLuma8(scene.image);
    let fs = detect_features(&img, &DetectorConfig::default())?;
    println!("{} keypoints, descriptor length {}", fs.len(), fs.descriptor_dim);
    for f in fs.features.iter().take(5) {
        println!(
            "  ({:7.2}, {:7.2}) scale {:5.2} orientation {:5.2}",
            f.x, f.y, f.scale, f.orientation
        );
    }
    let words = build_visual_words(&fs, DEFAULT_WORD_DISTANCE, MIN_WORD_SIZE);
    println!("{} visual words", words.len());
    Ok(())
}
