//! Picks the discovery parameters that give the best top pattern.

use rescu::discovery::grid_search_params;
use rescu::features::{build_visual_words, DEFAULT_WORD_DISTANCE, MIN_WORD_SIZE};
use rescu::synth::{render_scene, Preset};
use rescu::DiscoveryParams;

fn main() -> rescu::Result<()> {
    let scene = render_scene(&Preset::Counting.spec(1))?;
    let words = build_visual_words(&scene.features, DEFAULT_WORD_DISTANCE, MIN_WORD_SIZE);
    let grid = DiscoveryParams::adaptive_grid(&DiscoveryParams::default());
    println!("{} grid points", grid.len());
    let (best, rps) = grid_search_params(&scene.features, &words, &grid);
    println!("chosen p_d {} p_s {} p_theta {}", best.p_d, best.p_s, best.p_theta);
    if let Some(top) = rps.first() {
        println!("top pattern: {} instances, U = {:.4}", top.matrix.n, top.score);
    }
    Ok(())
}
