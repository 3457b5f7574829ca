//! Pipeline configuration, read from TOML with every field optional.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::detector::{DEFAULT_GRID_C, DEFAULT_GRID_ITER, DEFAULT_MAX_ITER};
use crate::error::{Error, Result};
use crate::features::FeatureConfig;

/// Overrides the configured worker count.
pub const WORKERS_ENV: &str = "ATTENTOPO_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub c: Vec<f64>,
    pub max_iter: Vec<usize>,
    /// Budget for a fit with a fixed `C`.
    pub single_max_iter: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            c: DEFAULT_GRID_C.to_vec(),
            max_iter: DEFAULT_GRID_ITER.to_vec(),
            single_max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathConfig {
    pub train_corpus: Option<PathBuf>,
    pub valid_corpus: Option<PathBuf>,
    pub test_corpus: Option<PathBuf>,
    pub features_dir: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub features: FeatureConfig,
    pub grid: GridConfig,
    pub paths: PathConfig,
    /// Worker threads for extraction; 0 picks the number of CPUs.
    pub workers: usize,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        if self.grid.c.is_empty() || self.grid.max_iter.is_empty() {
            return Err(Error::Config("hyperparameter grid is empty".into()));
        }
        if self.grid.c.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::Config("grid C values must be positive".into()));
        }
        let p = &self.paths;
        let all: Vec<&PathBuf> = [
            &p.train_corpus,
            &p.valid_corpus,
            &p.test_corpus,
            &p.features_dir,
            &p.model,
            &p.report,
        ]
        .into_iter()
        .flatten()
        .collect();
        for (i, a) in all.iter().enumerate() {
            if all[i + 1..].contains(a) {
                return Err(Error::Config(format!("path {} is used twice", a.display())));
            }
        }
        Ok(())
    }

    /// Worker count after applying the environment override.
    pub fn resolved_workers(&self) -> Result<usize> {
        match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{WORKERS_ENV}={v:?} is not a count"))),
            Err(_) => Ok(self.workers),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::H1Mode;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = PipelineConfig::default();
        let text = cfg.to_toml();
        assert_eq!(PipelineConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_config() {
        let cfg = PipelineConfig::from_toml(
            r#"
            workers = 3
            [features]
            use_pattern = false
            thresholds = [0.1, 0.2]
            [features.barcode]
            h1_mode = "graph"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.workers, 3);
        assert!(!cfg.features.use_pattern);
        assert_eq!(cfg.features.thresholds.values(), &[0.1, 0.2]);
        assert_eq!(cfg.features.barcode.h1_mode, H1Mode::Graph);
        assert_eq!(cfg.features.barcode.birth_threshold, 0.5);
        assert_eq!(cfg.grid.c.len(), 9);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(PipelineConfig::from_toml("[features]\nthresholds = [0.5, 0.1]").is_err());
        assert!(
            PipelineConfig::from_toml("[features]\nuse_topo = false\nuse_barcode = false\nuse_pattern = false")
                .is_err()
        );
        assert!(PipelineConfig::from_toml("[paths]\nmodel = \"a\"\nreport = \"a\"").is_err());
        assert!(PipelineConfig::from_toml("[grid]\nc = [0.0]").is_err());
    }
}
