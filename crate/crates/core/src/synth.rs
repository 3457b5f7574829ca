//! Planted synthetic corpora with a known separation mechanism.
//!
//! Human-like heads put a fraction `ρ` of every row's mass on the row's neighbours in a random
//! spanning tree and spread the rest over all tokens with multiplicative noise. Machine-like
//! heads spread all mass near-uniformly. Concentrating mass on a tree raises the weight `M` of
//! the maximum spanning tree, so the H0 sum of bars `n − M` shifts left for human-like samples.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{write_attention_dump, write_manifest, ManifestEntry};
use crate::npy::Dtype;
use crate::sample::{AttentionSample, Label, SampleMeta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub layers: usize,
    pub heads: usize,
    pub n: usize,
    pub train: usize,
    pub valid: usize,
    pub test: usize,
    pub seed: u64,
    /// Range of the tree-mass fraction of human-like heads.
    pub tree_mass: (f64, f64),
    /// Multiplicative noise half-width of the background mass, in `[0, 1)`.
    pub noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            layers: 2,
            heads: 2,
            n: 32,
            train: 400,
            valid: 100,
            test: 100,
            seed: 7,
            tree_mass: (0.05, 0.35),
            noise: 0.6,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.heads == 0 || self.n < 2 || self.n > crate::sample::MAX_TOKENS {
            return Err(Error::Config(
                "synthetic corpus needs layers, heads ≥ 1 and 2 ≤ n ≤ 512".into(),
            ));
        }
        let (lo, hi) = self.tree_mass;
        if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) {
            return Err(Error::Config(format!(
                "tree mass range ({lo}, {hi}) is not inside [0, 1]"
            )));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return Err(Error::Config(format!("noise {} outside [0, 1)", self.noise)));
        }
        Ok(())
    }
}

/// Random recursive spanning tree on a random vertex order, as adjacency lists.
fn random_tree(rng: &mut impl Rng, n: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut adj = vec![Vec::new(); n];
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        let child = order[k];
        adj[parent].push(child);
        adj[child].push(parent);
    }
    adj
}

/// One row-stochastic `n × n` head.
pub fn synth_head(rng: &mut impl Rng, n: usize, tree_mass: f64, noise: f64) -> Vec<f64> {
    let tree = if tree_mass > 0.0 {
        Some(random_tree(rng, n))
    } else {
        None
    };
    let mut data = Vec::with_capacity(n * n);
    let mut row = vec![0.0; n];
    for i in 0..n {
        for r in row.iter_mut() {
            *r = 1.0 + noise * rng.gen_range(-1.0..=1.0);
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|r| *r *= (1.0 - tree_mass) / total);
        if let Some(tree) = &tree {
            let share = tree_mass / tree[i].len() as f64;
            for &j in &tree[i] {
                row[j] += share;
            }
        }
        data.extend_from_slice(&row);
    }
    data
}

pub fn synth_sample(rng: &mut impl Rng, id: String, label: Label, cfg: &SynthConfig) -> AttentionSample {
    let n = cfg.n;
    let mut data = Vec::with_capacity(cfg.layers * cfg.heads * n * n);
    for _ in 0..cfg.layers * cfg.heads {
        let mass = match label {
            Label::Human => rng.gen_range(cfg.tree_mass.0..=cfg.tree_mass.1),
            Label::Machine => 0.0,
        };
        data.extend(synth_head(rng, n, mass, cfg.noise));
    }
    let mut punct: Vec<usize> = (1..n - 1).filter(|_| rng.gen_bool(0.1)).collect();
    punct.dedup();
    let meta = SampleMeta {
        sample_id: id,
        n,
        cls_index: 0,
        sep_indices: vec![n - 1],
        punct_indices: punct,
        label: Some(label),
        tokens: None,
    };
    AttentionSample::new(meta, cfg.layers, cfg.heads, data).expect("synthetic sample is valid")
}

/// Balanced split: even indices human, odd machine.
pub fn synth_split(cfg: &SynthConfig, split: &str, count: usize, seed: u64) -> Vec<AttentionSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let label = if i % 2 == 0 { Label::Human } else { Label::Machine };
            synth_sample(&mut rng, format!("{split}-{i:05}"), label, cfg)
        })
        .collect()
}

/// Writes `train/`, `valid/` and `test/` corpora under `out`.
pub fn write_synth_corpus(out: &Path, cfg: &SynthConfig) -> Result<()> {
    cfg.validate()?;
    let splits = [("train", cfg.train), ("valid", cfg.valid), ("test", cfg.test)];
    for (k, (split, count)) in splits.into_iter().enumerate() {
        let dir = out.join(split);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let seed = cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64);
        let mut entries = Vec::with_capacity(count);
        for sample in synth_split(cfg, split, count, seed) {
            let id = sample.meta.sample_id.clone();
            write_attention_dump(&dir.join(&id), &sample, Dtype::F32)?;
            entries.push(ManifestEntry {
                sample_id: id.clone(),
                path: id,
                label: sample.meta.label,
            });
        }
        write_manifest(&dir, &entries)?;
    }
    Ok(())
}
