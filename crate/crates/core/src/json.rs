//! Versioned JSON interchange.
//!
//! Every document carries `"schema": "rescu/v1"` next to its body. Floats are
//! rounded to 9 significant digits before printing, so a decode/encode cycle
//! reproduces the original bytes and repeated runs are byte-identical.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::types::{Feature, FeatureSet, GroundTruth, LineEstimate, RecurringPattern, TsResult, VanishingPoint};

pub const SCHEMA: &str = "rescu/v1";

/// Rounds to 9 significant digits and prints the shortest representation
/// that parses back to the rounded value.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return "null".to_string();
    }
    let rounded: f64 = format!("{v:.8e}").parse().unwrap_or(v);
    let a = rounded.abs();
    if rounded != 0.0 && !(1e-5..1e15).contains(&a) {
        format!("{rounded:e}")
    } else {
        let s = format!("{rounded}");
        if s.contains('.') || s.contains('e') {
            s
        } else {
            format!("{s}.0")
        }
    }
}

/// Reads `null` as `+∞`, the inverse of how non-finite floats are written.
pub fn null_as_infinity<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

struct FixedPrecision<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for FixedPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

#[derive(Serialize)]
struct EnvelopeRef<'a, T> {
    schema: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Deserialize)]
struct Envelope<T> {
    schema: String,
    #[serde(flatten)]
    body: T,
}

/// Serializes any value with the fixed-precision pretty printer (no envelope).
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let fmt = FixedPrecision {
        inner: PrettyFormatter::with_indent(b"  "),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

/// Encodes a document body inside the versioned envelope.
pub fn encode<T: Serialize>(body: &T) -> Result<String> {
    to_string(&EnvelopeRef { schema: SCHEMA, body })
}

/// Decodes a versioned document, rejecting unknown schema versions.
pub fn decode<T: DeserializeOwned>(text: &str) -> Result<T> {
    let env: Envelope<T> = serde_json::from_str(text)?;
    if env.schema != SCHEMA {
        return Err(Error::Parse(format!("unsupported schema {:?}, expected {SCHEMA:?}", env.schema)));
    }
    Ok(env.body)
}

/// Writes via a temporary sibling file and a rename, so readers never see a
/// partially written output.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_document<T: Serialize>(path: &Path, body: &T) -> Result<()> {
    write_atomic(path, encode(body)?.as_bytes())
}

pub fn read_document<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    decode(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Body of `rps.json`.
///
/// `keypoints` carries the feature geometry (descriptors dropped) so the
/// geometry stages can run from this file alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternsDoc {
    pub patterns: Vec<RecurringPattern>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keypoints: Option<FeatureSet>,
}

impl PatternsDoc {
    pub fn new(patterns: Vec<RecurringPattern>, fs: &FeatureSet) -> Self {
        Self {
            patterns,
            keypoints: Some(strip_descriptors(fs)),
        }
    }
}

/// Copy of `fs` without descriptors.
pub fn strip_descriptors(fs: &FeatureSet) -> FeatureSet {
    FeatureSet {
        image_width: fs.image_width,
        image_height: fs.image_height,
        descriptor_dim: 0,
        features: fs
            .features
            .iter()
            .map(|f| Feature {
                descriptor: Vec::new(),
                ..f.clone()
            })
            .collect(),
    }
}

/// Body of `vp.json`. `vanishing_point` is absent when no consensus was
/// found, with the reason in `note`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VpDoc {
    pub vanishing_point: Option<VanishingPoint>,
    pub lines: Vec<LineEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Body of `ts.json`: the verdict for the highest-scoring pattern, plus one
/// result per pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TsDoc {
    #[serde(flatten)]
    pub result: TsResult,
    pub per_pattern: Vec<TsResult>,
}

/// Body of `vp_gt.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VpTruth {
    pub point: [f64; 2],
}

/// Loads `features.json` and enforces the feature-set invariants.
pub fn load_features(path: &Path) -> Result<FeatureSet> {
    let fs: FeatureSet = read_document(path)?;
    fs.validate()?;
    Ok(fs)
}

pub fn save_features(path: &Path, fs: &FeatureSet) -> Result<()> {
    write_document(path, fs)
}

pub fn load_patterns(path: &Path) -> Result<PatternsDoc> {
    let doc: PatternsDoc = read_document(path)?;
    if let Some(kp) = &doc.keypoints {
        kp.validate_geometry()?;
        for rp in &doc.patterns {
            if let Some(id) = rp.matrix.feature_ids().find(|&id| id >= kp.len()) {
                return Err(Error::InvariantViolation {
                    feature_id: Some(id),
                    reason: "pattern references a feature missing from keypoints".into(),
                });
            }
        }
    }
    Ok(doc)
}

pub fn save_patterns(path: &Path, patterns: &[RecurringPattern], fs: &FeatureSet) -> Result<()> {
    write_document(path, &PatternsDoc::new(patterns.to_vec(), fs))
}

pub fn load_ground_truth(path: &Path) -> Result<GroundTruth> {
    let gt: GroundTruth = read_document(path)?;
    gt.validate()?;
    Ok(gt)
}

pub fn load_vp(path: &Path) -> Result<VpDoc> {
    read_document(path)
}

pub fn load_ts(path: &Path) -> Result<TsDoc> {
    read_document(path)
}
