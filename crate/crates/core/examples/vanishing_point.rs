//! Estimates the vanishing point of a receding facade from lines through
//! corresponding keypoints, with and without the angular constraint.

use rescu::discovery::make_pattern;
use rescu::geometry::{lines_from_rp, ransac_vp, RansacConfig};
use rescu::metrics::vp_angle_deg;
use rescu::synth::{facade_spec, render_scene};
use rescu::DiscoveryParams;

fn main() -> rescu::Result<()> {
    let scene = render_scene(&facade_spec(7, 4, 8, 1.0))?;
    let gt = scene.vp_gt.expect("facade recedes");
    let lines: Vec<_> = scene
        .gt_matrices
        .iter()
        .flat_map(|m| {
            lines_from_rp(
                &make_pattern(&scene.features, m.clone(), 1.0, &DiscoveryParams::default()),
                &scene.features,
            )
        })
        .collect();
    println!("{} lines, ground truth ({:.1}, {:.1})", lines.len(), gt[0], gt[1]);
    let (w, h) = (scene.features.image_width as f64, scene.features.image_height as f64);
    for (label, ac) in [("with constraint", true), ("without constraint", false)] {
        let cfg = RansacConfig {
            angular_constraint: ac,
            inlier_point_to_line_px: 3.0,
            ..RansacConfig::default()
        };
        match ransac_vp(&lines, &cfg, w, h) {
            Ok(vp) => println!(
                "{label}: ({:.1}, {:.1}), {} inliers, {:.2} px / {:.3}° off",
                vp.point[0],
                vp.point[1],
                vp.inlier_lines.len(),
                (vp.point[0] - gt[0]).hypot(vp.point[1] - gt[1]),
                vp_angle_deg(vp.point, gt, w, h)
            ),
            Err(e) => println!("{label}: {e}"),
        }
    }
    Ok(())
}
