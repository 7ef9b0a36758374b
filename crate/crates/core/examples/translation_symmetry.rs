//! Tests evenly and unevenly spaced rows for translation symmetry.

use rescu::discovery::make_pattern;
use rescu::geometry::{detect_translation_symmetry, DEFAULT_TS_THRESHOLD};
use rescu::synth::{perspective_row_spec, render_scene, Layout};
use rescu::DiscoveryParams;

fn main() -> rescu::Result<()> {
    let layouts = [
        ("even", Layout::uniform_row(5)),
        (
            "one wide gap",
            Layout::Row {
                gaps: vec![1.0, 1.0, 2.0, 1.0],
            },
        ),
    ];
    for (label, layout) in layouts {
        let scene = render_scene(&perspective_row_spec(0, &layout, 0.0))?;
        let rp = make_pattern(&scene.features, scene.gt_matrices[0].clone(), 1.0, &DiscoveryParams::default());
        let ts = detect_translation_symmetry(&rp, &scene.features, DEFAULT_TS_THRESHOLD);
        let mut crs: Vec<String> = ts.cross_ratios.iter().map(|c| format!("{c:.4}")).collect();
        crs.sort();
        crs.dedup();
        println!(
            "{label}: {} windows, distinct cross-ratios [{}], deviation {:.4}, symmetric {}",
            ts.cross_ratios.len(),
            crs.join(", "),
            ts.deviation,
            ts.has_symmetry
        );
    }
    Ok(())
}
