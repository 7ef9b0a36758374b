//! Feature extraction, loading and visual-word grouping.

mod detector;
mod words;

pub use detector::{detect_features, detect_features_from_bytes, DetectorConfig, MIN_IMAGE_SIDE};
pub use words::{build_visual_words, descriptor_distance, VisualWordIndex, DEFAULT_WORD_DISTANCE, MIN_WORD_SIZE};

pub use crate::json::load_features;
