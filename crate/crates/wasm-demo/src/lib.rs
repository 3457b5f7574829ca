//! Browser bindings for the static demo page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string so the page needs no generated
//! type glue beyond `wasm-bindgen`'s string passing. Errors come back as `{"error": "..."}`.

use attentopo::graph::{symmetrize, threshold_graph};
use attentopo::pattern::{graph_distance, pattern_edges, weighted_distance, PatternKind};
use attentopo::persistence::{barcode_stats, build_filtration, h0_barcode, h1_barcode, Bar, BarcodeStats, H1Mode};
use attentopo::synth::synth_head;
use attentopo::topo::{betti0, betti1};
use attentopo::{SampleMeta, WeightsView};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_N: usize = 128;
const NOISE: f64 = 0.6;

fn head(n: usize, seed: u64, tree_mass: f64) -> Result<Vec<f64>, String> {
    if !(2..=MAX_N).contains(&n) {
        return Err(format!("n must be between 2 and {MAX_N}"));
    }
    if !(0.0..=1.0).contains(&tree_mass) {
        return Err("tree mass must be in [0, 1]".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(synth_head(&mut rng, n, tree_mass, NOISE))
}

fn respond<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).expect("plain data serializes"),
        Err(e) => serde_json::json!({ "error": e }).to_string(),
    }
}

/// `[birth, death]` pairs; an infinite death becomes `null`.
fn pairs(bars: &[Bar]) -> Vec<(f64, Option<f64>)> {
    bars.iter()
        .map(|b| (b.birth, b.is_finite().then_some(b.death)))
        .collect()
}

#[derive(Serialize)]
struct BarcodeView {
    n: usize,
    weights: Vec<f64>,
    h0: Vec<(f64, Option<f64>)>,
    h1: Vec<(f64, Option<f64>)>,
    h0_stats: BarcodeStats,
    h1_stats: BarcodeStats,
}

/// Synthetic head plus its H0 and H1 barcodes. `mode` is `"clique"` or `"graph"`.
#[wasm_bindgen]
pub fn head_barcodes(n: usize, seed: u64, tree_mass: f64, mode: &str) -> String {
    respond((|| {
        let mode: H1Mode = mode.parse().map_err(|e: attentopo::Error| e.to_string())?;
        let weights = head(n, seed, tree_mass)?;
        let f = build_filtration(WeightsView::new(n, &weights));
        let (h0, h1) = (h0_barcode(&f), h1_barcode(&f, mode));
        Ok(BarcodeView {
            n,
            h0_stats: barcode_stats(&h0, 0.5, 0.5),
            h1_stats: barcode_stats(&h1, 0.5, 0.5),
            h0: pairs(&h0.bars),
            h1: pairs(&h1.bars),
            weights,
        })
    })())
}

#[derive(Serialize)]
struct BettiCurves {
    thresholds: Vec<f64>,
    beta0: Vec<usize>,
    beta1: Vec<usize>,
    clique_beta1: Vec<usize>,
}

/// β0 and β1 of the thresholded graph at `steps` evenly spaced thresholds in `(0, 1)`, with
/// clique-complex β1 read off the clique barcode.
#[wasm_bindgen]
pub fn betti_curves(n: usize, seed: u64, tree_mass: f64, steps: usize) -> String {
    respond((|| {
        if !(1..=1000).contains(&steps) {
            return Err("steps must be between 1 and 1000".to_string());
        }
        let weights = head(n, seed, tree_mass)?;
        let view = WeightsView::new(n, &weights);
        let clique = h1_barcode(&build_filtration(view), H1Mode::Clique);
        let mut out = BettiCurves {
            thresholds: Vec::with_capacity(steps),
            beta0: Vec::with_capacity(steps),
            beta1: Vec::with_capacity(steps),
            clique_beta1: Vec::with_capacity(steps),
        };
        for i in 0..steps {
            let t = (i as f64 + 0.5) / steps as f64;
            let g = symmetrize(&threshold_graph(view, t, false));
            out.thresholds.push(t);
            out.beta0.push(betti0(&g));
            out.beta1.push(betti1(&g));
            out.clique_beta1.push(clique.alive_at(1.0 - t));
        }
        Ok(out)
    })())
}

#[derive(Serialize)]
struct PatternRow {
    pattern: &'static str,
    weighted: f64,
    /// Graph distance at each threshold of the request.
    thresholded: Vec<f64>,
}

/// Distances from a synthetic head to the previous-token, next-token and to-first-token
/// patterns, weighted and at each of the comma-separated `thresholds`.
#[wasm_bindgen]
pub fn pattern_distances(n: usize, seed: u64, tree_mass: f64, thresholds: &str) -> String {
    respond((|| {
        let ts: Vec<f64> = thresholds
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>().map_err(|e| format!("threshold {s:?}: {e}")))
            .collect::<Result<_, _>>()?;
        if ts.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return Err("thresholds must lie in (0, 1)".into());
        }
        let weights = head(n, seed, tree_mass)?;
        let view = WeightsView::new(n, &weights);
        let meta = SampleMeta::plain("demo", n);
        [PatternKind::PrevToken, PatternKind::NextToken, PatternKind::ToCls]
            .into_iter()
            .map(|kind| {
                let pattern = pattern_edges(kind, &meta).map_err(|e| e.to_string())?;
                let incidence = pattern.incidence();
                let weighted = weighted_distance(view, incidence.view()).map_err(|e| e.to_string())?;
                let thresholded = ts
                    .iter()
                    .map(|&t| {
                        let edges: Vec<(usize, usize)> = threshold_graph(view, t, false).edges().collect();
                        graph_distance(&edges, &pattern.cells)
                    })
                    .collect();
                Ok(PatternRow {
                    pattern: kind.name(),
                    weighted,
                    thresholded,
                })
            })
            .collect::<Result<Vec<_>, String>>()
    })())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn barcodes_have_the_expected_bar_counts() {
        let v = parse(head_barcodes(12, 1, 0.3, "clique"));
        assert_eq!(v["h0"].as_array().unwrap().len(), 12);
        assert_eq!(v["h1"].as_array().unwrap().len(), 66 - 11);
        assert_eq!(v["weights"].as_array().unwrap().len(), 144);
        assert!(v["h0"][11][1].is_null());
        let graph = parse(head_barcodes(12, 1, 0.3, "graph"));
        assert!(graph["h1"].as_array().unwrap().iter().all(|b| b[1].is_null()));
    }

    #[test]
    fn same_seed_same_head() {
        assert_eq!(head_barcodes(9, 4, 0.1, "clique"), head_barcodes(9, 4, 0.1, "clique"));
        assert_ne!(head_barcodes(9, 4, 0.1, "clique"), head_barcodes(9, 5, 0.1, "clique"));
    }

    #[test]
    fn betti_curves_are_monotone_in_components() {
        let v = parse(betti_curves(16, 2, 0.2, 25));
        let b0: Vec<u64> = v["beta0"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap())
            .collect();
        assert_eq!(b0.len(), 25);
        assert!(b0.windows(2).all(|w| w[0] <= w[1]));
        let c1 = v["clique_beta1"].as_array().unwrap();
        let g1 = v["beta1"].as_array().unwrap();
        assert!(c1.iter().zip(g1).all(|(c, g)| c.as_u64() <= g.as_u64()));
    }

    #[test]
    fn pattern_rows_cover_three_patterns() {
        let v = parse(pattern_distances(10, 3, 0.3, "0.05, 0.2"));
        let rows = v.as_array().unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0]["pattern"], "prev_token");
        for r in rows {
            let w = r["weighted"].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&w));
            assert_eq!(r["thresholded"].as_array().unwrap().len(), 2);
        }
    }

    #[test]
    fn bad_input_is_reported() {
        assert!(parse(head_barcodes(1, 0, 0.1, "clique"))["error"].is_string());
        assert!(parse(head_barcodes(8, 0, 0.1, "rips"))["error"].is_string());
        assert!(parse(betti_curves(8, 0, 2.0, 10))["error"].is_string());
        assert!(parse(pattern_distances(8, 0, 0.1, "0.5,x"))["error"].is_string());
        assert!(parse(pattern_distances(8, 0, 0.1, "1.5"))["error"].is_string());
    }
}
