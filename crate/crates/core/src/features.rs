//! Assembly of the three feature families into one vector per sample.
//!
//! Layout is family-major (topo, barcode, pattern); inside each family, layer-major then head.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ThresholdSet;
use crate::pattern::{pattern_feature_block, pattern_slots};
use crate::persistence::{barcode_feature_block, barcode_slots, BarcodeOptions};
use crate::sample::AttentionSample;
use crate::schema::{FeatureBlock, Schema};
use crate::topo::{topo_feature_block, topo_slots, TopoOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub use_topo: bool,
    pub use_barcode: bool,
    pub use_pattern: bool,
    pub thresholds: ThresholdSet,
    pub topo: TopoOptions,
    pub barcode: BarcodeOptions,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            use_topo: true,
            use_barcode: true,
            use_pattern: true,
            thresholds: ThresholdSet::default(),
            topo: TopoOptions::default(),
            barcode: BarcodeOptions::default(),
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.use_topo || self.use_barcode || self.use_pattern) {
            return Err(Error::Config("no feature family enabled".into()));
        }
        if self.topo.cycle_cap == 0 {
            return Err(Error::Config("cycle cap must be at least 1".into()));
        }
        for (name, v) in [
            ("birth threshold", self.barcode.birth_threshold),
            ("death threshold", self.barcode.death_threshold),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn schema(&self, layers: usize, heads: usize) -> Schema {
        let mut slots = Vec::new();
        if self.use_topo {
            slots.extend(topo_slots(layers, heads, &self.thresholds, &self.topo));
        }
        if self.use_barcode {
            slots.extend(barcode_slots(layers, heads));
        }
        if self.use_pattern {
            slots.extend(pattern_slots(layers, heads, &self.thresholds));
        }
        Schema::new(slots)
    }

    /// Features of one sample, in [`FeatureConfig::schema`] order.
    pub fn extract(&self, sample: &AttentionSample) -> FeatureBlock {
        let mut block = FeatureBlock {
            values: Vec::new(),
            slots: Vec::new(),
            saturated: Vec::new(),
        };
        if self.use_topo {
            block.extend(topo_feature_block(sample, &self.thresholds, &self.topo));
        }
        if self.use_barcode {
            block.extend(barcode_feature_block(sample, &self.barcode));
        }
        if self.use_pattern {
            block.extend(pattern_feature_block(
                sample,
                &self.thresholds,
                self.topo.keep_self_loops,
            ));
        }
        block
    }
}
