//! On-disk formats: attention dumps, corpus manifests, feature matrices and models.
//!
//! A sample directory holds `attn.npy` (`[L, H, n, n]`, `<f4` or `<f8`, C order) and
//! `meta.json`. A corpus directory holds sample directories plus `manifest.jsonl`, one
//! `{"sample_id", "path", "label"}` object per line with `path` relative to the corpus.
//!
//! Feature matrices use a small binary container:
//!
//! ```text
//! b"ATFM" | version: u16 | reserved: u16 | rows: u64 | cols: u64 | blob_len: u64
//! blob: JSON {schema, sample_ids, labels} | payload: rows × cols f64, row-major
//! ```
//!
//! All integers and floats are little-endian.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detector::{DetectorModel, FeatureMatrix};
use crate::error::{Error, Result};
use crate::npy::{self, Dtype};
use crate::sample::{AttentionSample, Label, SampleMeta};
use crate::schema::Schema;

pub const ATTENTION_FILE: &str = "attn.npy";
pub const META_FILE: &str = "meta.json";
pub const MANIFEST_FILE: &str = "manifest.jsonl";

const FEATURE_MAGIC: &[u8; 4] = b"ATFM";
const FEATURE_VERSION: u16 = 1;
const MODEL_FORMAT: &str = "attentopo-model";
const MODEL_VERSION: u32 = 1;

pub fn read_attention_dump(dir: &Path) -> Result<AttentionSample> {
    let meta_path = dir.join(META_FILE);
    let meta_text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: SampleMeta =
        serde_json::from_str(&meta_text).map_err(|e| Error::Format(format!("{}: {e}", meta_path.display())))?;
    let array = npy::read_npy(&dir.join(ATTENTION_FILE))?;
    let [layers, heads, rows, cols] = array.shape[..] else {
        return Err(Error::Format(format!(
            "{}: expected a 4-d array, got shape {:?}",
            dir.display(),
            array.shape
        )));
    };
    if rows != cols || rows != meta.n {
        return Err(Error::Validation(format!(
            "{}: array shape {:?} does not match n = {}",
            dir.display(),
            array.shape,
            meta.n
        )));
    }
    AttentionSample::new(meta, layers, heads, array.data)
}

pub fn write_attention_dump(dir: &Path, sample: &AttentionSample, dtype: Dtype) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let n = sample.n();
    npy::write_npy(
        &dir.join(ATTENTION_FILE),
        dtype,
        &[sample.layers(), sample.heads(), n, n],
        sample.data(),
    )?;
    let meta_path = dir.join(META_FILE);
    let json = serde_json::to_string_pretty(&sample.meta).expect("metadata serializes");
    fs::write(&meta_path, json).map_err(|e| Error::io(&meta_path, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub sample_id: String,
    pub path: String,
    pub label: Option<Label>,
}

pub fn read_manifest(corpus: &Path) -> Result<Vec<ManifestEntry>> {
    let path = corpus.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Format(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn write_manifest(corpus: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let path = corpus.join(MANIFEST_FILE);
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e).expect("manifest entry serializes"));
        out.push('\n');
    }
    fs::write(&path, out).map_err(|e| Error::io(&path, e))
}

impl ManifestEntry {
    pub fn dir(&self, corpus: &Path) -> PathBuf {
        corpus.join(&self.path)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixHeader {
    schema: Schema,
    sample_ids: Vec<String>,
    labels: Vec<Option<Label>>,
}

pub fn encode_feature_matrix(m: &FeatureMatrix) -> Vec<u8> {
    let blob = serde_json::to_vec(&MatrixHeader {
        schema: m.schema.clone(),
        sample_ids: m.sample_ids.clone(),
        labels: m.labels.clone(),
    })
    .expect("header serializes");
    let mut out = Vec::with_capacity(32 + blob.len() + m.values().len() * 8);
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&FEATURE_VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.width() as u64).to_le_bytes());
    out.extend_from_slice(&(blob.len() as u64).to_le_bytes());
    out.extend_from_slice(&blob);
    for v in m.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_feature_matrix(bytes: &[u8]) -> Result<FeatureMatrix> {
    const FIXED: usize = 4 + 2 + 2 + 8 + 8 + 8;
    if bytes.len() < FIXED || &bytes[..4] != FEATURE_MAGIC {
        return Err(Error::Format("not a feature matrix file".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FEATURE_VERSION {
        return Err(Error::Format(format!("unsupported feature file version {version}")));
    }
    let read_u64 = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()) as usize;
    let (rows, cols, blob_len) = (read_u64(8), read_u64(16), read_u64(24));
    let blob_end = FIXED
        .checked_add(blob_len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| Error::Format("truncated feature header".into()))?;
    let header: MatrixHeader =
        serde_json::from_slice(&bytes[FIXED..blob_end]).map_err(|e| Error::Format(format!("feature header: {e}")))?;
    if header.schema.width() != cols {
        return Err(Error::Format(format!(
            "declared width {cols} but schema has {} slots",
            header.schema.width()
        )));
    }
    if header.sample_ids.len() != rows || header.labels.len() != rows {
        return Err(Error::Format(format!(
            "declared {rows} rows but header lists {}",
            header.sample_ids.len()
        )));
    }
    let payload = &bytes[blob_end..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::Format("feature matrix size overflows".into()))?;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload holds {} bytes, {rows}×{cols} needs {expected}",
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    FeatureMatrix::new(header.schema, header.sample_ids, header.labels, values)
}

pub fn write_feature_matrix(m: &FeatureMatrix, path: &Path) -> Result<()> {
    fs::write(path, encode_feature_matrix(m)).map_err(|e| Error::io(path, e))
}

pub fn read_feature_matrix(path: &Path) -> Result<FeatureMatrix> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_feature_matrix(&bytes)
}

/// Inspection-only CSV: `sample_id,label,<slot>...`.
pub fn feature_matrix_csv(m: &FeatureMatrix) -> String {
    let mut out = String::from("sample_id,label");
    for s in &m.schema.slots {
        out.push(',');
        out.push_str(&s.to_string());
    }
    out.push('\n');
    for i in 0..m.rows() {
        out.push_str(&m.sample_ids[i]);
        out.push(',');
        if let Some(l) = m.labels[i] {
            out.push_str(&l.to_string());
        }
        for v in m.row(i) {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: DetectorModel,
}

pub fn write_model(model: &DetectorModel, path: &Path) -> Result<()> {
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        model: model.clone(),
    };
    let json = serde_json::to_string_pretty(&file).expect("model serializes");
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(json.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: &Path) -> Result<DetectorModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
        return Err(Error::Format(format!(
            "{}: unsupported model format {} v{}",
            path.display(),
            file.format,
            file.version
        )));
    }
    let m = file.model;
    if m.weights.len() != m.scaler.mean.len() || m.weights.len() != m.scaler.std.len() {
        return Err(Error::Format(format!(
            "{}: weight and scaler widths differ",
            path.display()
        )));
    }
    Ok(m)
}
