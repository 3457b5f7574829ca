//! Batch driver: corpus → feature matrix → model → reports.

use std::path::Path;
use std::time::Instant;

use log::{debug, info, warn};

use crate::detector::{grid_search, DetectorModel, FeatureMatrix, GridReport};
use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::io::{read_attention_dump, read_manifest, ManifestEntry};
use crate::sample::Label;

#[derive(Debug)]
pub struct ExtractOutput {
    pub matrix: FeatureMatrix,
    /// `(sample_id, message)` of samples that failed validation and were skipped.
    pub skipped: Vec<(String, String)>,
    /// Cycle-count cells clipped at the cap, over all samples.
    pub saturated_cells: usize,
}

struct SampleFeatures {
    id: String,
    label: Option<Label>,
    layers: usize,
    heads: usize,
    values: Vec<f64>,
    saturated: usize,
}

fn process(corpus: &Path, entry: &ManifestEntry, cfg: &FeatureConfig) -> Result<SampleFeatures> {
    let start = Instant::now();
    let sample = read_attention_dump(&entry.dir(corpus))?;
    if sample.meta.sample_id != entry.sample_id {
        return Err(Error::Validation(format!(
            "manifest id {} does not match metadata id {}",
            entry.sample_id, sample.meta.sample_id
        )));
    }
    let label = match (entry.label, sample.meta.label) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Validation(format!(
                "{}: manifest label {a} disagrees with metadata label {b}",
                entry.sample_id
            )))
        }
        (a, b) => a.or(b),
    };
    let block = cfg.extract(&sample);
    debug!(
        "{}: {} features in {:.1} ms",
        entry.sample_id,
        block.len(),
        start.elapsed().as_secs_f64() * 1e3
    );
    Ok(SampleFeatures {
        id: entry.sample_id.clone(),
        label,
        layers: sample.layers(),
        heads: sample.heads(),
        values: block.values,
        saturated: block.saturated.len(),
    })
}

fn run_all(
    corpus: &Path,
    entries: &[ManifestEntry],
    cfg: &FeatureConfig,
    workers: usize,
) -> Result<Vec<Result<SampleFeatures>>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(pool.install(|| entries.par_iter().map(|e| process(corpus, e, cfg)).collect()))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        Ok(entries.iter().map(|e| process(corpus, e, cfg)).collect())
    }
}

/// Extracts features for every sample of a corpus, ordered by sample id.
///
/// Any invalid sample aborts the run unless `skip_invalid` is set. Output does not depend on
/// `workers` (0 uses every CPU).
pub fn extract_corpus(corpus: &Path, cfg: &FeatureConfig, workers: usize, skip_invalid: bool) -> Result<ExtractOutput> {
    cfg.validate()?;
    let mut entries = read_manifest(corpus)?;
    entries.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    if let Some(w) = entries.windows(2).find(|w| w[0].sample_id == w[1].sample_id) {
        return Err(Error::Validation(format!(
            "duplicate sample id {} in manifest",
            w[0].sample_id
        )));
    }
    let start = Instant::now();
    let results = run_all(corpus, &entries, cfg, workers)?;

    let mut ok = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (entry, r) in entries.iter().zip(results) {
        match r {
            Ok(f) => ok.push(f),
            // I/O problems are not sample validation failures
            Err(e @ Error::Io { .. }) if !skip_invalid => return Err(e),
            Err(e) => failures.push((entry.sample_id.clone(), e)),
        }
    }

    // every sample must share the head layout of the first one
    if let Some(first) = ok.first() {
        let (layers, heads) = (first.layers, first.heads);
        let mut kept = Vec::with_capacity(ok.len());
        for f in ok {
            if (f.layers, f.heads) == (layers, heads) {
                kept.push(f);
            } else {
                let msg = format!("{}: {}×{} heads, corpus has {layers}×{heads}", f.id, f.layers, f.heads);
                failures.push((f.id.clone(), Error::Validation(msg)));
            }
        }
        ok = kept;
    }

    if !failures.is_empty() {
        for (id, e) in &failures {
            warn!("{id}: {e}");
        }
        if !skip_invalid {
            let (id, e) = failures.swap_remove(0);
            return Err(match e {
                Error::Validation(m) => {
                    Error::Validation(format!("{} invalid sample(s); first {id}: {m}", failures.len() + 1))
                }
                other => other,
            });
        }
    }
    failures.sort_by(|a, b| a.0.cmp(&b.0));

    let (layers, heads) = ok.first().map_or((1, 1), |f| (f.layers, f.heads));
    let schema = cfg.schema(layers, heads);
    let saturated_cells = ok.iter().map(|f| f.saturated).sum();
    let mut ids = Vec::with_capacity(ok.len());
    let mut labels = Vec::with_capacity(ok.len());
    let mut values = Vec::with_capacity(ok.len() * schema.width());
    for f in ok {
        ids.push(f.id);
        labels.push(f.label);
        values.extend(f.values);
    }
    let matrix = FeatureMatrix::new(schema, ids, labels, values)?;
    info!(
        "{}: {} samples × {} features in {:.2} s",
        corpus.display(),
        matrix.rows(),
        matrix.width(),
        start.elapsed().as_secs_f64()
    );
    if saturated_cells > 0 {
        warn!("{saturated_cells} cycle counts hit the cap of {}", cfg.topo.cycle_cap);
    }
    Ok(ExtractOutput {
        matrix,
        skipped: failures.into_iter().map(|(id, e)| (id, e.to_string())).collect(),
        saturated_cells,
    })
}

/// Grid search on `train`, selected on `valid`.
pub fn train(
    train: &FeatureMatrix,
    valid: &FeatureMatrix,
    grid_c: &[f64],
    grid_iter: &[usize],
) -> Result<(DetectorModel, GridReport)> {
    let (model, report) = grid_search(train, valid, grid_c, grid_iter)?;
    let best = &report.rows[report.best];
    info!(
        "selected C = {}, max_iter = {} (validation accuracy {:.4})",
        best.c, best.max_iter, best.valid.accuracy
    );
    Ok((model, report))
}

/// `sample_id,label,probability` lines.
pub fn predictions_csv(model: &DetectorModel, features: &FeatureMatrix) -> Result<String> {
    let predictions = model.predict(features)?;
    let mut out = String::from("sample_id,label,probability\n");
    for (id, p) in features.sample_ids.iter().zip(predictions) {
        out.push_str(&format!("{id},{},{}\n", p.label, p.probability));
    }
    Ok(out)
}
