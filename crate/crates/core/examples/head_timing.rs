//! Times feature extraction for one synthetic head: `cargo run --release --example head_timing -- 128`.

use std::time::Instant;

use attentopo::graph::ThresholdSet;
use attentopo::persistence::{build_filtration, h1_barcode, H1Mode};
use attentopo::synth::synth_head;
use attentopo::topo::{head_topo_features, TopoOptions};
use attentopo::WeightsView;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(128);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, mass) in [("uniform", 0.0), ("tree", 0.3)] {
        let head = synth_head(&mut rng, n, mass, 0.6);
        let w = WeightsView::new(n, &head);

        let t = Instant::now();
        let f = build_filtration(w);
        let graph = h1_barcode(&f, H1Mode::Graph);
        let graph_time = t.elapsed();

        let t = Instant::now();
        let clique = h1_barcode(&f, H1Mode::Clique);
        let clique_time = t.elapsed();
        let finite = clique.bars.iter().filter(|b| b.is_finite()).count();

        let t = Instant::now();
        let _ = head_topo_features(w, &ThresholdSet::default(), &TopoOptions::default());
        let topo_time = t.elapsed();

        println!(
            "{name:>8} n={n}: graph H1 {} bars in {graph_time:?}; clique H1 {} bars ({finite} finite) in {clique_time:?}; topo {topo_time:?}",
            graph.bars.len(),
            clique.bars.len()
        );
    }
}
