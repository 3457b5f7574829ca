//! Persistent homology of the reversed-weight filtration of an attention head.
//!
//! Edges enter at `1 − max(w_uv, w_vu)`, so strong attention enters first. H0 comes from a
//! union-find sweep; H1 either from the graph itself (every cycle-creating edge is born and
//! never dies) or from its clique complex, where triangles kill cycles. The clique variant is a
//! column reduction of the triangle boundary matrix over GF(2).

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::WeightsView;
use crate::sample::AttentionSample;
use crate::schema::{Family, FeatureBlock, Slot};
use crate::union_find::UnionFind;

/// Largest filtration value; infinite bars are capped here for length statistics.
pub const FILTRATION_CEILING: f64 = 1.0;

pub const DEFAULT_BIRTH_THRESHOLD: f64 = 0.5;
pub const DEFAULT_DEATH_THRESHOLD: f64 = 0.5;

/// Statistic kinds per barcode, in layout order.
pub const STAT_KINDS: [&str; 9] = [
    "sum_lengths",
    "mean_length",
    "var_length",
    "n_bars_birth_gt",
    "n_bars_death_lt",
    "longest_bar_birth",
    "longest_bar_death",
    "n_bars",
    "entropy",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiltrationEdge {
    pub u: usize,
    pub v: usize,
    pub value: f64,
}

/// Undirected edges sorted by `(value, min endpoint, max endpoint)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    n: usize,
    edges: Vec<FiltrationEdge>,
}

impl Filtration {
    /// Builds a filtration from explicit `(u, v, value)` triples.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut out = Vec::new();
        for (u, v, value) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::Validation(format!("bad filtration edge ({u}, {v}) for n = {n}")));
            }
            if !(0.0..=FILTRATION_CEILING).contains(&value) {
                return Err(Error::Validation(format!("filtration value {value} outside [0, 1]")));
            }
            out.push(FiltrationEdge {
                u: u.min(v),
                v: u.max(v),
                value,
            });
        }
        out.sort_by(edge_order);
        let mut pairs: Vec<_> = out.iter().map(|e| (e.u, e.v)).collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("duplicate filtration edge".into()));
        }
        Ok(Filtration { n, edges: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[FiltrationEdge] {
        &self.edges
    }
}

fn edge_order(a: &FiltrationEdge, b: &FiltrationEdge) -> Ordering {
    a.value.total_cmp(&b.value).then(a.u.cmp(&b.u)).then(a.v.cmp(&b.v))
}

/// Max-symmetrized, diagonal-free, reversed-weight filtration. Zero weights are left out.
pub fn build_filtration(weights: WeightsView<'_>) -> Filtration {
    let n = weights.n();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            let w = weights.get(u, v).max(weights.get(v, u));
            if w > 0.0 {
                edges.push(FiltrationEdge { u, v, value: 1.0 - w });
            }
        }
    }
    edges.sort_by(edge_order);
    Filtration { n, edges }
}

/// A persistence interval. Essential classes have `death == f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub birth: f64,
    pub death: f64,
}

impl Bar {
    pub fn is_finite(&self) -> bool {
        self.death.is_finite()
    }

    /// Length with an infinite death replaced by the filtration ceiling.
    pub fn capped_length(&self) -> f64 {
        self.death.min(FILTRATION_CEILING) - self.birth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Barcode {
    pub dimension: u8,
    pub bars: Vec<Bar>,
}

impl Barcode {
    /// Bars alive just after `value`: born at or before it and dying strictly later.
    pub fn alive_at(&self, value: f64) -> usize {
        self.bars.iter().filter(|b| b.birth <= value && b.death > value).count()
    }

    pub fn born_by(&self, value: f64) -> usize {
        self.bars.iter().filter(|b| b.birth <= value).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum H1Mode {
    /// Cycles of the graph itself; every bar is `[birth, ∞)`.
    Graph,
    /// Cycles of the clique complex; triangles can kill them.
    #[default]
    Clique,
}

impl FromStr for H1Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graph" => Ok(H1Mode::Graph),
            "clique" => Ok(H1Mode::Clique),
            other => Err(Error::Config(format!("unknown H1 mode {other:?}"))),
        }
    }
}

struct Sweep {
    /// Values of merging edges, in filtration order.
    merges: Vec<f64>,
    /// Indices into the filtration of cycle-creating edges.
    cycle_edges: Vec<usize>,
    components: usize,
}

fn sweep(f: &Filtration) -> Sweep {
    let mut uf = UnionFind::new(f.n);
    let mut merges = Vec::with_capacity(f.n.saturating_sub(1));
    let mut cycle_edges = Vec::new();
    for (i, e) in f.edges.iter().enumerate() {
        if uf.union(e.u, e.v) {
            merges.push(e.value);
        } else {
            cycle_edges.push(i);
        }
    }
    Sweep {
        merges,
        cycle_edges,
        components: uf.components(),
    }
}

/// `[0, v]` for each merging edge value `v`, then `[0, ∞)` per surviving component.
pub fn h0_barcode(f: &Filtration) -> Barcode {
    let s = sweep(f);
    let mut bars: Vec<Bar> = s.merges.iter().map(|&d| Bar { birth: 0.0, death: d }).collect();
    bars.extend((0..s.components).map(|_| Bar {
        birth: 0.0,
        death: f64::INFINITY,
    }));
    Barcode { dimension: 0, bars }
}

pub fn h1_barcode(f: &Filtration, mode: H1Mode) -> Barcode {
    let s = sweep(f);
    let bars = match mode {
        H1Mode::Graph => s
            .cycle_edges
            .iter()
            .map(|&i| Bar {
                birth: f.edges[i].value,
                death: f64::INFINITY,
            })
            .collect(),
        H1Mode::Clique => clique_h1(f, &s.cycle_edges),
    };
    Barcode { dimension: 1, bars }
}

struct Triangle {
    value: f64,
    vertices: [u32; 3],
    /// Boundary edges as filtration indices, ascending.
    boundary: [u32; 3],
}

/// Triangles of the graph via sorted-adjacency intersection, in filtration order.
fn triangles(f: &Filtration) -> Vec<Triangle> {
    let n = f.n;
    let mut index = vec![u32::MAX; n * n];
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, e) in f.edges.iter().enumerate() {
        index[e.u * n + e.v] = i as u32;
        index[e.v * n + e.u] = i as u32;
        adj[e.u].push(e.v as u32);
        adj[e.v].push(e.u as u32);
    }
    for a in &mut adj {
        a.sort_unstable();
    }

    let mut out = Vec::new();
    for e in &f.edges {
        let (u, v) = (e.u, e.v);
        let (au, av) = (&adj[u], &adj[v]);
        let (mut i, mut j) = (0, 0);
        while i < au.len() && j < av.len() {
            match au[i].cmp(&av[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    let w = au[i] as usize;
                    if w > v {
                        let mut boundary = [index[u * n + v], index[u * n + w], index[v * n + w]];
                        boundary.sort_unstable();
                        let value = f.edges[boundary[2] as usize].value;
                        out.push(Triangle {
                            value,
                            vertices: [u as u32, v as u32, w as u32],
                            boundary,
                        });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.vertices.cmp(&b.vertices)));
    out
}

/// H1 of the clique complex by left-to-right reduction of the triangle boundary columns.
///
/// Rows of merging (spanning-forest) edges are dropped from every column. A nonzero sum of
/// boundaries is a cycle, its lowest entry closes that cycle and so is a cycle-creating edge, and
/// a cycle is determined by its entries outside the forest; pivots are therefore unchanged. The
/// sweep stops as soon as every cycle-creating edge has been killed.
fn clique_h1(f: &Filtration, cycle_edges: &[usize]) -> Vec<Bar> {
    let mut death = vec![f64::INFINITY; cycle_edges.len()];
    let mut remaining = cycle_edges.len();
    if remaining > 0 {
        // Rows are renumbered over the cycle-creating edges only, keeping their order.
        let mut row = vec![u32::MAX; f.edges.len()];
        for (r, &i) in cycle_edges.iter().enumerate() {
            row[i] = r as u32;
        }
        let mut pivot_col: Vec<u32> = vec![u32::MAX; cycle_edges.len()];
        let mut reduced: Vec<Vec<u32>> = Vec::new();
        let mut work = BitColumn::new(cycle_edges.len());
        for tri in triangles(f) {
            for &e in &tri.boundary {
                if row[e as usize] != u32::MAX {
                    work.toggle(row[e as usize]);
                }
            }
            let mut low = work.top();
            while let Some(r) = low {
                let k = pivot_col[r as usize];
                if k == u32::MAX {
                    pivot_col[r as usize] = reduced.len() as u32;
                    reduced.push(work.drain());
                    death[r as usize] = tri.value;
                    remaining -= 1;
                    break;
                }
                for &x in &reduced[k as usize] {
                    work.toggle(x);
                }
                low = work.top_below(r);
            }
            if remaining == 0 {
                break;
            }
        }
    }
    cycle_edges
        .iter()
        .zip(death)
        .map(|(&i, death)| Bar {
            birth: f.edges[i].value,
            death,
        })
        .collect()
}

/// Dense GF(2) working column. The lowest nonzero row only moves down while a column is
/// reduced, so it is found by scanning words downward from the previous one.
struct BitColumn {
    words: Vec<u64>,
    top_word: usize,
}

impl BitColumn {
    fn new(rows: usize) -> Self {
        BitColumn {
            words: vec![0; rows.div_ceil(64)],
            top_word: 0,
        }
    }

    fn toggle(&mut self, r: u32) {
        let w = (r / 64) as usize;
        self.words[w] ^= 1 << (r % 64);
        self.top_word = self.top_word.max(w);
    }

    fn top(&mut self) -> Option<u32> {
        self.scan_from(self.top_word)
    }

    /// Largest set row, given that no row above `r` is set.
    fn top_below(&mut self, r: u32) -> Option<u32> {
        self.scan_from((r / 64) as usize)
    }

    fn scan_from(&mut self, mut w: usize) -> Option<u32> {
        loop {
            let bits = self.words[w];
            if bits != 0 {
                self.top_word = w;
                return Some(w as u32 * 64 + 63 - bits.leading_zeros());
            }
            if w == 0 {
                self.top_word = 0;
                return None;
            }
            w -= 1;
        }
    }

    /// Set rows in increasing order; leaves the column empty.
    fn drain(&mut self) -> Vec<u32> {
        let mut out = Vec::new();
        for (w, word) in self.words[..=self.top_word].iter_mut().enumerate() {
            let mut bits = *word;
            while bits != 0 {
                out.push(w as u32 * 64 + bits.trailing_zeros());
                bits &= bits - 1;
            }
            *word = 0;
        }
        self.top_word = 0;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BarcodeStats {
    pub sum_lengths: f64,
    pub mean_length: f64,
    pub var_length: f64,
    pub n_bars_birth_gt: f64,
    pub n_bars_death_lt: f64,
    pub longest_bar_birth: f64,
    pub longest_bar_death: f64,
    pub n_bars: f64,
    pub entropy: f64,
}

impl BarcodeStats {
    /// Values in [`STAT_KINDS`] order.
    pub fn to_array(&self) -> [f64; 9] {
        [
            self.sum_lengths,
            self.mean_length,
            self.var_length,
            self.n_bars_birth_gt,
            self.n_bars_death_lt,
            self.longest_bar_birth,
            self.longest_bar_death,
            self.n_bars,
            self.entropy,
        ]
    }
}

/// Summary statistics of a barcode.
///
/// Lengths cap infinite deaths at [`FILTRATION_CEILING`]; the longest-bar statistics only look
/// at finite bars. Entropy is `−Σ p ln p` over capped lengths, `p = len / Σ len`. An empty
/// barcode yields all zeros.
pub fn barcode_stats(b: &Barcode, birth_threshold: f64, death_threshold: f64) -> BarcodeStats {
    if b.bars.is_empty() {
        return BarcodeStats::default();
    }
    let lengths: Vec<f64> = b.bars.iter().map(Bar::capped_length).collect();
    let count = lengths.len() as f64;
    let sum: f64 = lengths.iter().sum();
    let mean = sum / count;
    let var = lengths.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / count;

    let entropy = if sum > 0.0 {
        -lengths
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| {
                let p = l / sum;
                p * p.ln()
            })
            .sum::<f64>()
    } else {
        0.0
    };

    let mut longest: Option<&Bar> = None;
    for bar in b.bars.iter().filter(|b| b.is_finite()) {
        if longest.is_none_or(|l| bar.death - bar.birth > l.death - l.birth) {
            longest = Some(bar);
        }
    }

    BarcodeStats {
        sum_lengths: sum,
        mean_length: mean,
        var_length: var,
        n_bars_birth_gt: b.bars.iter().filter(|b| b.birth > birth_threshold).count() as f64,
        n_bars_death_lt: b
            .bars
            .iter()
            .filter(|b| b.is_finite() && b.death < death_threshold)
            .count() as f64,
        longest_bar_birth: longest.map_or(0.0, |b| b.birth),
        longest_bar_death: longest.map_or(0.0, |b| b.death),
        n_bars: count,
        entropy: entropy.max(0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BarcodeOptions {
    pub h1_mode: H1Mode,
    pub birth_threshold: f64,
    pub death_threshold: f64,
}

impl Default for BarcodeOptions {
    fn default() -> Self {
        BarcodeOptions {
            h1_mode: H1Mode::Clique,
            birth_threshold: DEFAULT_BIRTH_THRESHOLD,
            death_threshold: DEFAULT_DEATH_THRESHOLD,
        }
    }
}

pub fn barcode_slots(layers: usize, heads: usize) -> Vec<Slot> {
    let mut slots = Vec::with_capacity(layers * heads * 18);
    for layer in 0..layers {
        for head in 0..heads {
            for dim in ["H0", "H1"] {
                for kind in STAT_KINDS {
                    slots.push(Slot::new(Family::Barcode, layer, head, dim, kind));
                }
            }
        }
    }
    slots
}

/// H0 then H1 statistics of one head.
pub fn head_barcode_features(weights: WeightsView<'_>, opts: &BarcodeOptions) -> Vec<f64> {
    let f = build_filtration(weights);
    let h0 = h0_barcode(&f);
    let h1 = h1_barcode(&f, opts.h1_mode);
    let mut values = Vec::with_capacity(18);
    for b in [&h0, &h1] {
        values.extend(barcode_stats(b, opts.birth_threshold, opts.death_threshold).to_array());
    }
    values
}

pub fn barcode_feature_block(sample: &AttentionSample, opts: &BarcodeOptions) -> FeatureBlock {
    let mut values = Vec::with_capacity(sample.layers() * sample.heads() * 18);
    for (_, _, w) in sample.iter_heads() {
        values.extend(head_barcode_features(w, opts));
    }
    FeatureBlock {
        values,
        slots: barcode_slots(sample.layers(), sample.heads()),
        saturated: Vec::new(),
    }
}

/// Plain-text listing: a `# layer L head H` line per head, then `dim birth death` per bar.
///
/// Values are printed at single precision, the precision of attention dumps; infinite deaths as
/// `inf`.
pub fn barcode_listing(sample: &AttentionSample, mode: H1Mode) -> String {
    let mut out = String::new();
    for (layer, head, w) in sample.iter_heads() {
        let f = build_filtration(w);
        writeln!(out, "# layer {layer} head {head}").unwrap();
        for b in [h0_barcode(&f), h1_barcode(&f, mode)] {
            for bar in &b.bars {
                writeln!(out, "{} {} {}", b.dimension, fmt_value(bar.birth), fmt_value(bar.death)).unwrap();
            }
        }
    }
    out
}

fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        (v as f32).to_string()
    }
}
