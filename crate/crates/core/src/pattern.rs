//! Distances between attention graphs and five canonical attention patterns.
//!
//! Pattern edges are matrix cells `(row, col)`: row token attends to column token. A thresholded
//! head is compared in the same coordinates, i.e. cell `(i, j)` is present iff `w_ij ≥ t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{threshold_graph, ThresholdSet};
use crate::matrix::{SquareMatrix, WeightsView};
use crate::sample::{AttentionSample, SampleMeta};
use crate::schema::{Family, FeatureBlock, Slot};

/// Distance assigned to patterns whose anchor tokens are missing.
pub const ABSENT_DISTANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternKind {
    PrevToken,
    NextToken,
    ToCls,
    ToSep,
    ToPunct,
}

impl PatternKind {
    pub const ALL: [PatternKind; 5] = [
        PatternKind::PrevToken,
        PatternKind::NextToken,
        PatternKind::ToCls,
        PatternKind::ToSep,
        PatternKind::ToPunct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PatternKind::PrevToken => "prev_token",
            PatternKind::NextToken => "next_token",
            PatternKind::ToCls => "to_cls",
            PatternKind::ToSep => "to_sep",
            PatternKind::ToPunct => "to_punct",
        }
    }
}

/// Pattern edges as sorted, duplicate-free `(row, col)` cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternGraph {
    pub n: usize,
    pub cells: Vec<(usize, usize)>,
}

impl PatternGraph {
    pub fn incidence(&self) -> SquareMatrix {
        SquareMatrix::incidence(self.n, &self.cells)
    }
}

pub fn pattern_edges(kind: PatternKind, meta: &SampleMeta) -> Result<PatternGraph> {
    let n = meta.n;
    let toward = |anchors: &[usize]| -> Vec<(usize, usize)> {
        (0..n)
            .flat_map(|i| anchors.iter().filter(move |&&a| a != i).map(move |&a| (i, a)))
            .collect()
    };
    let mut cells: Vec<(usize, usize)> = match kind {
        PatternKind::PrevToken => (0..n.saturating_sub(1)).map(|i| (i + 1, i)).collect(),
        PatternKind::NextToken => (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        PatternKind::ToCls => toward(&[meta.cls_index]),
        PatternKind::ToSep if meta.sep_indices.is_empty() => return Err(Error::AbsentPattern(kind)),
        PatternKind::ToSep => toward(&meta.sep_indices),
        PatternKind::ToPunct if meta.punct_indices.is_empty() => return Err(Error::AbsentPattern(kind)),
        PatternKind::ToPunct => toward(&meta.punct_indices),
    };
    cells.sort_unstable();
    cells.dedup();
    Ok(PatternGraph { n, cells })
}

/// `sqrt(|E △ E′| / (|E| + |E′|))` over sorted, duplicate-free cell lists; 0 when both are empty.
pub fn graph_distance(a: &[(usize, usize)], b: &[(usize, usize)]) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 0.0;
    }
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let sym_diff = total - 2 * common;
    (sym_diff as f64 / total as f64).sqrt()
}

/// `‖A − A′‖_F / sqrt(‖A‖_F² + ‖A′‖_F²)`.
pub fn weighted_distance(a: WeightsView<'_>, b: WeightsView<'_>) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::DegenerateInput(format!(
            "matrices of different size {} and {}",
            a.n(),
            b.n()
        )));
    }
    let (mut diff, mut norm) = (0.0, 0.0);
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        diff += (x - y) * (x - y);
        norm += x * x + y * y;
    }
    if norm == 0.0 {
        return Err(Error::DegenerateInput("both matrices are zero".into()));
    }
    Ok((diff / norm).sqrt())
}

pub fn pattern_slots(layers: usize, heads: usize, thresholds: &ThresholdSet) -> Vec<Slot> {
    let mut slots = Vec::new();
    for layer in 0..layers {
        for head in 0..heads {
            for kind in PatternKind::ALL {
                slots.push(Slot::new(Family::Pattern, layer, head, "weighted", kind.name()));
            }
            for t in thresholds.values() {
                for kind in PatternKind::ALL {
                    slots.push(Slot::new(Family::Pattern, layer, head, format!("t={t}"), kind.name()));
                }
            }
        }
    }
    slots
}

/// Weighted distances to each pattern, then per-threshold graph distances, for one head.
pub fn head_pattern_features(
    weights: WeightsView<'_>,
    patterns: &[Option<PatternGraph>],
    thresholds: &ThresholdSet,
    keep_self_loops: bool,
) -> Vec<f64> {
    let mut values = Vec::with_capacity(5 * (1 + thresholds.len()));
    for p in patterns {
        values.push(match p {
            Some(p) => weighted_distance(weights, p.incidence().view()).unwrap_or(ABSENT_DISTANCE),
            None => ABSENT_DISTANCE,
        });
    }
    for &t in thresholds.values() {
        let g = threshold_graph(weights, t, keep_self_loops);
        // edge j → i is cell (i, j)
        let mut cells: Vec<(usize, usize)> = g.edges().map(|(j, i)| (i, j)).collect();
        cells.sort_unstable();
        for p in patterns {
            values.push(match p {
                Some(p) => graph_distance(&cells, &p.cells),
                None => ABSENT_DISTANCE,
            });
        }
    }
    values
}

pub fn pattern_feature_block(
    sample: &AttentionSample,
    thresholds: &ThresholdSet,
    keep_self_loops: bool,
) -> FeatureBlock {
    let patterns: Vec<Option<PatternGraph>> = PatternKind::ALL
        .iter()
        .map(|&k| pattern_edges(k, &sample.meta).ok())
        .collect();
    let mut values = Vec::new();
    for (_, _, w) in sample.iter_heads() {
        values.extend(head_pattern_features(w, &patterns, thresholds, keep_self_loops));
    }
    FeatureBlock {
        values,
        slots: pattern_slots(sample.layers(), sample.heads(), thresholds),
        saturated: Vec::new(),
    }
}
