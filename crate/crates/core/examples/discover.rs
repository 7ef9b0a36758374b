//! Finds recurring patterns among the keypoints of two unrelated motifs.

use rescu::discovery::discover_rps;
use rescu::features::{build_visual_words, DEFAULT_WORD_DISTANCE, MIN_WORD_SIZE};
use rescu::synth::{render_scene, Preset};
use rescu::DiscoveryParams;

fn main() -> rescu::Result<()> {
    let scene = render_scene(&Preset::TwoMotifs.spec(0))?;
    let words = build_visual_words(&scene.features, DEFAULT_WORD_DISTANCE, MIN_WORD_SIZE);
    let params = DiscoveryParams {
        p_d: Preset::TwoMotifs.recommended_p_d(),
        ..DiscoveryParams::default()
    };
    for (k, rp) in discover_rps(&scene.features, &words, &params).iter().enumerate() {
        println!(
            "pattern {k}: {} keypoints × {} instances, U = {:.4}",
            rp.matrix.m, rp.matrix.n, rp.score
        );
        for inst in &rp.instances {
            let b = inst.bbox;
            println!("  box [{:.0}, {:.0}, {:.0}, {:.0}]", b.x_min, b.y_min, b.x_max, b.y_max);
        }
    }
    Ok(())
}
