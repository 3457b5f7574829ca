//! Attention samples: a `[layers, heads, n, n]` tensor of one text plus its token metadata.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::WeightsView;

/// Largest supported token count.
pub const MAX_TOKENS: usize = 512;

/// Allowed deviation of an attention row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Human,
    Machine,
}

impl Label {
    /// Positive class of the detector is `Machine`.
    pub fn as_target(self) -> f64 {
        match self {
            Label::Human => 0.0,
            Label::Machine => 1.0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Human => "human",
            Label::Machine => "machine",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "human" => Ok(Label::Human),
            "machine" => Ok(Label::Machine),
            other => Err(Error::Validation(format!("unknown label {other:?}"))),
        }
    }
}

/// Token metadata of one sample. All indices are 0-based vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub sample_id: String,
    pub n: usize,
    #[serde(default)]
    pub cls_index: usize,
    #[serde(default)]
    pub sep_indices: Vec<usize>,
    #[serde(default)]
    pub punct_indices: Vec<usize>,
    #[serde(default)]
    pub label: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
}

impl SampleMeta {
    /// Metadata with a `[CLS]` at 0 and no other special tokens.
    pub fn plain(sample_id: impl Into<String>, n: usize) -> Self {
        SampleMeta {
            sample_id: sample_id.into(),
            n,
            cls_index: 0,
            sep_indices: Vec::new(),
            punct_indices: Vec::new(),
            label: None,
            tokens: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 || n > MAX_TOKENS {
            return Err(Error::Validation(format!(
                "{}: token count {n} outside [1, {MAX_TOKENS}]",
                self.sample_id
            )));
        }
        if self.cls_index >= n {
            return Err(Error::Validation(format!(
                "{}: cls_index {} out of range for n = {n}",
                self.sample_id, self.cls_index
            )));
        }
        for (name, list) in [
            ("sep_indices", &self.sep_indices),
            ("punct_indices", &self.punct_indices),
        ] {
            if let Some(&bad) = list.iter().find(|&&i| i >= n) {
                return Err(Error::Validation(format!(
                    "{}: {name} entry {bad} out of range for n = {n}",
                    self.sample_id
                )));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Validation(format!(
                    "{}: {name} must be strictly increasing",
                    self.sample_id
                )));
            }
            if list.contains(&self.cls_index) {
                return Err(Error::Validation(format!(
                    "{}: cls_index {} also listed in {name}",
                    self.sample_id, self.cls_index
                )));
            }
        }
        if let Some(tokens) = &self.tokens {
            if tokens.len() != n {
                return Err(Error::Validation(format!(
                    "{}: {} tokens listed for n = {n}",
                    self.sample_id,
                    tokens.len()
                )));
            }
        }
        Ok(())
    }
}

/// Attention weights of every head for one text.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionSample {
    pub meta: SampleMeta,
    layers: usize,
    heads: usize,
    data: Vec<f64>,
}

impl AttentionSample {
    /// Builds and validates a sample from a C-order `[layers, heads, n, n]` buffer.
    pub fn new(meta: SampleMeta, layers: usize, heads: usize, data: Vec<f64>) -> Result<Self> {
        let sample = AttentionSample {
            meta,
            layers,
            heads,
            data,
        };
        sample.validate()?;
        Ok(sample)
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn heads(&self) -> usize {
        self.heads
    }

    pub fn n(&self) -> usize {
        self.meta.n
    }

    pub fn head(&self, layer: usize, head: usize) -> WeightsView<'_> {
        assert!(layer < self.layers && head < self.heads, "head index out of range");
        let n = self.meta.n;
        let start = (layer * self.heads + head) * n * n;
        WeightsView::new(n, &self.data[start..start + n * n])
    }

    /// `(layer, head, weights)` in layer-major order.
    pub fn iter_heads(&self) -> impl Iterator<Item = (usize, usize, WeightsView<'_>)> {
        (0..self.layers)
            .flat_map(move |l| (0..self.heads).map(move |h| (l, h)))
            .map(move |(l, h)| (l, h, self.head(l, h)))
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn validate(&self) -> Result<()> {
        self.meta.validate()?;
        let n = self.meta.n;
        let id = &self.meta.sample_id;
        if self.layers == 0 || self.heads == 0 {
            return Err(Error::Validation(format!(
                "{id}: need at least one layer and one head, got {}×{}",
                self.layers, self.heads
            )));
        }
        if self.data.len() != self.layers * self.heads * n * n {
            return Err(Error::Validation(format!(
                "{id}: tensor has {} entries, expected {}×{}×{n}×{n}",
                self.data.len(),
                self.layers,
                self.heads
            )));
        }
        for (layer, head, w) in self.iter_heads() {
            for row in 0..n {
                let values = w.row(row);
                if let Some(col) = values.iter().position(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
                    return Err(Error::Validation(format!(
                        "{id}: entry ({layer}, {head}, {row}, {col}) = {} is not a weight in [0, 1]",
                        values[col]
                    )));
                }
                let sum: f64 = values.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(Error::Validation(format!(
                        "{id}: row sum {sum} at layer {layer}, head {head}, row {row} is not 1"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(n: usize) -> SampleMeta {
        SampleMeta::plain("s", n)
    }

    #[test]
    fn single_token_sample_is_legal() {
        let s = AttentionSample::new(meta(1), 1, 1, vec![1.0]).unwrap();
        assert_eq!(s.head(0, 0).get(0, 0), 1.0);
    }

    #[test]
    fn half_row_is_rejected_with_location() {
        let data = vec![0.5, 0.5, 0.25, 0.25];
        let err = AttentionSample::new(meta(2), 1, 1, data).unwrap_err();
        match err {
            Error::Validation(msg) => assert!(msg.contains("layer 0, head 0, row 1"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn row_sum_tolerance() {
        let ok = vec![0.50004, 0.5, 0.0, 1.0];
        assert!(AttentionSample::new(meta(2), 1, 1, ok).is_ok());
        let bad = vec![0.5002, 0.5, 0.0, 1.0];
        assert!(AttentionSample::new(meta(2), 1, 1, bad).is_err());
    }

    #[test]
    fn rejects_nan_and_negative() {
        assert!(AttentionSample::new(meta(2), 1, 1, vec![f64::NAN, 1.0, 0.0, 1.0]).is_err());
        assert!(AttentionSample::new(meta(2), 1, 1, vec![-0.5, 1.5, 0.0, 1.0]).is_err());
    }

    #[test]
    fn meta_invariants() {
        let mut m = meta(4);
        m.sep_indices = vec![3, 2];
        assert!(m.validate().is_err());
        m.sep_indices = vec![2, 2];
        assert!(m.validate().is_err());
        m.sep_indices = vec![0];
        assert!(m.validate().is_err(), "cls in sep list");
        m.sep_indices = vec![4];
        assert!(m.validate().is_err());
        m.sep_indices = vec![3];
        m.punct_indices = vec![1, 2];
        assert!(m.validate().is_ok());
        m.tokens = Some(vec!["a".into()]);
        assert!(m.validate().is_err());
        assert!(meta(0).validate().is_err());
        assert!(meta(513).validate().is_err());
    }

    #[test]
    fn shape_mismatch() {
        assert!(AttentionSample::new(meta(2), 1, 1, vec![1.0, 0.0, 0.0]).is_err());
        assert!(AttentionSample::new(meta(1), 0, 1, vec![]).is_err());
    }

    #[test]
    fn label_json() {
        let m: SampleMeta = serde_json::from_str(
            r#"{"sample_id":"a","n":2,"cls_index":0,"sep_indices":[1],"punct_indices":[],"label":"machine"}"#,
        )
        .unwrap();
        assert_eq!(m.label, Some(Label::Machine));
        let m: SampleMeta = serde_json::from_str(
            r#"{"sample_id":"a","n":2,"cls_index":0,"sep_indices":[],"punct_indices":[],"label":null}"#,
        )
        .unwrap();
        assert_eq!(m.label, None);
    }
}
