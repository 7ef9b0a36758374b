//! Counts the instances of each discovered pattern.

use rescu::discovery::discover_rps;
use rescu::features::{build_visual_words, DEFAULT_WORD_DISTANCE, MIN_WORD_SIZE};
use rescu::metrics::count_instances;
use rescu::synth::{render_scene, Preset};
use rescu::DiscoveryParams;

fn main() -> rescu::Result<()> {
    for preset in [Preset::Counting, Preset::TwoMotifs] {
        let scene = render_scene(&preset.spec(0))?;
        let words = build_visual_words(&scene.features, DEFAULT_WORD_DISTANCE, MIN_WORD_SIZE);
        let params = DiscoveryParams {
            p_d: preset.recommended_p_d(),
            ..DiscoveryParams::default()
        };
        let counts = count_instances(&discover_rps(&scene.features, &words, &params));
        println!("{}: per pattern {:?}, total {}", preset.name(), counts.per_rp, counts.total);
    }
    Ok(())
}
