//! Scores discovered patterns against ground truth over a range of IOD
//! thresholds.

use rescu::discovery::discover_rps;
use rescu::features::{build_visual_words, DEFAULT_WORD_DISTANCE, MIN_WORD_SIZE};
use rescu::metrics::evaluate;
use rescu::synth::{render_scene, Preset};
use rescu::DiscoveryParams;

fn main() -> rescu::Result<()> {
    let scene = render_scene(&Preset::Grid.spec(2))?;
    let words = build_visual_words(&scene.features, DEFAULT_WORD_DISTANCE, MIN_WORD_SIZE);
    let rps = discover_rps(
        &scene.features,
        &words,
        &DiscoveryParams {
            p_d: 0.1,
            ..DiscoveryParams::default()
        },
    );
    let sweep: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    let report = evaluate(&rps, &scene.ground_truth, 0.5, &sweep)?;
    println!(
        "at h = 0.5: pattern P {:.2} R {:.2}, instance P {:.2} R {:.2}",
        report.rp_precision, report.rp_recall, report.inst_precision, report.inst_recall
    );
    println!("h     rp_P  rp_R  inst_P inst_R");
    for p in &report.sweep {
        println!(
            "{:.1}   {:.2}  {:.2}  {:.2}   {:.2}",
            p.h, p.rp_precision, p.rp_recall, p.inst_precision, p.inst_recall
        );
    }
    Ok(())
}
