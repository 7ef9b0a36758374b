//! Single-view geometry on discovered patterns: implicit lines, vanishing
//! points, translation symmetry and rectification.

pub mod cross_ratio;
pub mod line;
pub mod rectify;
pub mod vp;

pub use cross_ratio::{cross_ratio, detect_translation_symmetry, DEFAULT_TS_THRESHOLD};
pub use line::{fit_line_to_word, lines_from_rp};
pub use rectify::{rectify_rp, warped_centroids, Homography, Rectified};
pub use vp::{ransac_vp, vp_to_vector, RansacConfig};
