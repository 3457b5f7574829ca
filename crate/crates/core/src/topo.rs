//! Graph invariants of thresholded attention graphs.
//!
//! For every head and threshold we record `(β0, β1, e, s, c)`: the first two Betti numbers of
//! the undirected graph, then edge count, strongly connected components and simple cycles of
//! the directed one.

use serde::{Deserialize, Serialize};

use crate::graph::{symmetrize, threshold_graph, DirectedGraph, ThresholdSet, UndirectedGraph};
use crate::sample::AttentionSample;
use crate::schema::{Family, FeatureBlock, Slot};
use crate::union_find::UnionFind;

pub const DEFAULT_CYCLE_CAP: usize = 500;

/// Feature kinds per threshold, in layout order.
pub const TOPO_KINDS: [&str; 5] = ["beta0", "beta1", "edges", "scc", "cycles"];

/// Number of connected components; isolated vertices count.
pub fn betti0(g: &UndirectedGraph) -> usize {
    let mut uf = UnionFind::new(g.n());
    for &(u, v) in g.edges() {
        uf.union(u, v);
    }
    uf.components()
}

/// Cycle rank `|E| − |V| + β0`. A self-loop contributes one independent cycle.
pub fn betti1(g: &UndirectedGraph) -> usize {
    g.edge_count() + betti0(g) - g.n()
}

pub fn count_edges(g: &DirectedGraph) -> usize {
    g.edge_count()
}

/// Strongly connected components (Tarjan, iterative).
pub fn count_scc(g: &DirectedGraph) -> usize {
    const UNVISITED: usize = usize::MAX;
    let n = g.n();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next = 0;
    let mut components = 0;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succ = g.successors(v);
            if *pos < succ.len() {
                let w = succ[*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                components += 1;
                while let Some(w) = stack.pop() {
                    on_stack[w] = false;
                    if w == v {
                        break;
                    }
                }
            }
        }
    }
    components
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleCount {
    /// Exact count, or the cap when saturated.
    pub count: usize,
    pub saturated: bool,
}

/// Counts simple directed cycles, stopping once more than `cap` have been found.
///
/// Cycles of length two (mutual edges) count; self-loops count as cycles of length one when the
/// graph has them. With `max_len` only cycles of at most that many vertices are counted.
pub fn count_simple_cycles(g: &DirectedGraph, cap: usize, max_len: Option<usize>) -> CycleCount {
    assert!(cap >= 1, "cycle cap must be positive");
    let mut counter = Counter {
        found: 0,
        limit: cap.saturating_add(1),
    };
    match max_len {
        None => johnson(g, &mut counter),
        Some(k) => bounded_search(g, k, &mut counter),
    }
    if counter.found > cap {
        CycleCount {
            count: cap,
            saturated: true,
        }
    } else {
        CycleCount {
            count: counter.found,
            saturated: false,
        }
    }
}

struct Counter {
    found: usize,
    limit: usize,
}

impl Counter {
    /// Returns `true` once the limit is hit.
    fn hit(&mut self) -> bool {
        self.found += 1;
        self.found >= self.limit
    }

    fn done(&self) -> bool {
        self.found >= self.limit
    }
}

/// Johnson's elementary-circuit enumeration, rooted at each vertex `s` over the strongly
/// connected component of `s` in the subgraph induced by `{v ≥ s}`.
fn johnson(g: &DirectedGraph, counter: &mut Counter) {
    let n = g.n();
    let mut blocked = vec![false; n];
    let mut block_map: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut in_comp = vec![false; n];

    for s in 0..n {
        let comp = component_of(g, s);
        let has_loop = g.has_edge(s, s);
        if comp.len() < 2 && !has_loop {
            continue;
        }
        for &v in &comp {
            in_comp[v] = true;
            blocked[v] = false;
            block_map[v].clear();
        }
        let mut search = Circuit {
            g,
            start: s,
            in_comp: &in_comp,
            blocked: &mut blocked,
            block_map: &mut block_map,
            counter: &mut *counter,
        };
        search.circuit(s);
        for &v in &comp {
            in_comp[v] = false;
        }
        if counter.done() {
            return;
        }
    }
}

struct Circuit<'a> {
    g: &'a DirectedGraph,
    start: usize,
    in_comp: &'a [bool],
    blocked: &'a mut [bool],
    block_map: &'a mut [Vec<usize>],
    counter: &'a mut Counter,
}

impl Circuit<'_> {
    fn circuit(&mut self, v: usize) -> bool {
        let g = self.g;
        let mut closed = false;
        self.blocked[v] = true;
        for &w in g.successors(v) {
            if !self.in_comp[w] {
                continue;
            }
            if w == self.start {
                closed = true;
                if self.counter.hit() {
                    return true;
                }
            } else if !self.blocked[w] && self.circuit(w) {
                closed = true;
            }
            if self.counter.done() {
                return true;
            }
        }
        if closed {
            self.unblock(v);
        } else {
            for &w in g.successors(v) {
                if self.in_comp[w] && !self.block_map[w].contains(&v) {
                    self.block_map[w].push(v);
                }
            }
        }
        closed
    }

    fn unblock(&mut self, u: usize) {
        let mut pending = vec![u];
        while let Some(x) = pending.pop() {
            self.blocked[x] = false;
            for w in std::mem::take(&mut self.block_map[x]) {
                if self.blocked[w] {
                    pending.push(w);
                }
            }
        }
    }
}

/// Vertices of the strongly connected component containing `s` within `{v ≥ s}`.
fn component_of(g: &DirectedGraph, s: usize) -> Vec<usize> {
    let n = g.n();
    let forward = reach(n, s, |v| g.successors(v));
    // reverse reachability restricted to vertices ≥ s
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, v) in g.edges() {
        if u >= s && v >= s {
            rev[v].push(u);
        }
    }
    let backward = reach(n, s, |v| &rev[v]);
    (s..n).filter(|&v| forward[v] && backward[v]).collect()
}

fn reach<'a>(n: usize, s: usize, next: impl Fn(usize) -> &'a [usize]) -> Vec<bool> {
    let mut seen = vec![false; n];
    seen[s] = true;
    let mut stack = vec![s];
    while let Some(v) = stack.pop() {
        for &w in next(v) {
            if w >= s && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Depth-limited backtracking: cycles whose smallest vertex is the root, at most `max_len` long.
fn bounded_search(g: &DirectedGraph, max_len: usize, counter: &mut Counter) {
    fn extend(
        g: &DirectedGraph,
        root: usize,
        v: usize,
        depth: usize,
        max_len: usize,
        on_path: &mut [bool],
        counter: &mut Counter,
    ) {
        for &w in g.successors(v) {
            if w == root {
                if counter.hit() {
                    return;
                }
            } else if w > root && !on_path[w] && depth < max_len {
                on_path[w] = true;
                extend(g, root, w, depth + 1, max_len, on_path, counter);
                on_path[w] = false;
                if counter.done() {
                    return;
                }
            }
        }
    }

    if max_len == 0 {
        return;
    }
    let mut on_path = vec![false; g.n()];
    for root in 0..g.n() {
        on_path[root] = true;
        extend(g, root, root, 1, max_len, &mut on_path, counter);
        on_path[root] = false;
        if counter.done() {
            return;
        }
    }
}

/// Options of the thresholded-graph feature family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopoOptions {
    /// Include the simple-cycle count slot.
    pub cycles: bool,
    pub cycle_cap: usize,
    pub max_cycle_len: Option<usize>,
    pub keep_self_loops: bool,
}

impl Default for TopoOptions {
    fn default() -> Self {
        TopoOptions {
            cycles: true,
            cycle_cap: DEFAULT_CYCLE_CAP,
            max_cycle_len: None,
            keep_self_loops: false,
        }
    }
}

impl TopoOptions {
    pub fn kinds(&self) -> &'static [&'static str] {
        if self.cycles {
            &TOPO_KINDS
        } else {
            &TOPO_KINDS[..4]
        }
    }
}

pub fn topo_slots(layers: usize, heads: usize, thresholds: &ThresholdSet, opts: &TopoOptions) -> Vec<Slot> {
    let mut slots = Vec::new();
    for layer in 0..layers {
        for head in 0..heads {
            for t in thresholds.values() {
                for kind in opts.kinds() {
                    slots.push(Slot::new(Family::Topo, layer, head, format!("t={t}"), *kind));
                }
            }
        }
    }
    slots
}

/// Per-threshold invariants of one head, threshold-major.
pub fn head_topo_features(
    weights: crate::WeightsView<'_>,
    thresholds: &ThresholdSet,
    opts: &TopoOptions,
) -> (Vec<f64>, Vec<usize>) {
    let mut values = Vec::with_capacity(thresholds.len() * opts.kinds().len());
    let mut saturated = Vec::new();
    for &t in thresholds.values() {
        let directed = threshold_graph(weights, t, opts.keep_self_loops);
        let undirected = symmetrize(&directed);
        values.push(betti0(&undirected) as f64);
        values.push(betti1(&undirected) as f64);
        values.push(count_edges(&directed) as f64);
        values.push(count_scc(&directed) as f64);
        if opts.cycles {
            let c = count_simple_cycles(&directed, opts.cycle_cap, opts.max_cycle_len);
            if c.saturated {
                saturated.push(values.len());
            }
            values.push(c.count as f64);
        }
    }
    (values, saturated)
}

/// Concatenation over heads (layer-major, then head) of [`head_topo_features`].
pub fn topo_feature_block(sample: &AttentionSample, thresholds: &ThresholdSet, opts: &TopoOptions) -> FeatureBlock {
    let mut block = FeatureBlock {
        values: Vec::new(),
        slots: topo_slots(sample.layers(), sample.heads(), thresholds, opts),
        saturated: Vec::new(),
    };
    for (_, _, w) in sample.iter_heads() {
        let (values, saturated) = head_topo_features(w, thresholds, opts);
        let offset = block.values.len();
        block.values.extend(values);
        block.saturated.extend(saturated.into_iter().map(|i| i + offset));
    }
    block
}
