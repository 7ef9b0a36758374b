//! Unsupervised discovery of recurring patterns in a single image, and the
//! applications built on them: vanishing points, translation symmetry,
//! rectification, counting and caption enrichment.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod captioner;
pub mod discovery;
pub mod error;
pub mod features;
pub mod geometry;
pub mod json;
pub mod metrics;
pub mod overlay;
pub mod pipeline;
pub mod region;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use types::*;
