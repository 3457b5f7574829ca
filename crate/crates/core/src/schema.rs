//! Feature layout descriptors.
//!
//! Every column of a feature matrix is named by a [`Slot`]. The ordered slot list plus a format
//! version form the [`Schema`]; its hash ties a trained model to the features it expects.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Topo,
    Barcode,
    Pattern,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Topo => "topo",
            Family::Barcode => "barcode",
            Family::Pattern => "pattern",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub family: Family,
    pub layer: usize,
    pub head: usize,
    /// Threshold, homology dimension or distance variant, e.g. `t=0.25`, `H0`, `weighted`.
    pub param: String,
    pub kind: String,
}

impl Slot {
    pub fn new(family: Family, layer: usize, head: usize, param: impl Into<String>, kind: impl Into<String>) -> Self {
        Slot {
            family,
            layer,
            head,
            param: param.into(),
            kind: kind.into(),
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/L{}/H{}/{}/{}",
            self.family, self.layer, self.head, self.param, self.kind
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub version: u32,
    pub slots: Vec<Slot>,
}

impl Schema {
    pub fn new(slots: Vec<Slot>) -> Self {
        Schema {
            version: SCHEMA_VERSION,
            slots,
        }
    }

    pub fn width(&self) -> usize {
        self.slots.len()
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("schema serializes");
        let digest = Sha256::digest(&json);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Indices of the slots matching `pred`, in schema order.
    pub fn positions(&self, pred: impl Fn(&Slot) -> bool) -> Vec<usize> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| pred(s))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Values of one feature family for one sample, with their slots.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBlock {
    pub values: Vec<f64>,
    pub slots: Vec<Slot>,
    /// Positions of values clipped at a cap (simple-cycle counts only).
    pub saturated: Vec<usize>,
}

impl FeatureBlock {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Appends `other`, shifting its saturation positions.
    pub fn extend(&mut self, other: FeatureBlock) {
        let offset = self.values.len();
        self.values.extend(other.values);
        self.slots.extend(other.slots);
        self.saturated.extend(other.saturated.into_iter().map(|i| i + offset));
    }
}
