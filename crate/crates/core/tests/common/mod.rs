//! Brute-force reference implementations. Deliberately naive and independent of the crate
//! internals: no union-find, no Tarjan, no Johnson, no column reduction.

#![allow(dead_code)]

use rand::Rng;

/// Random directed edge set without self-loops, each ordered pair present with probability `p`.
pub fn random_digraph(rng: &mut impl Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Random simple undirected edge set `(u, v)` with `u < v`.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Row-stochastic matrix with strictly positive entries, rows drawn from a skewed distribution
/// so that thresholds across `(0, 1)` produce graphs of every density.
pub fn random_attention(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n * n);
    for _ in 0..n {
        let row: Vec<f64> = (0..n).map(|_| rng.gen_range(1e-3..1.0f64).powi(4)).collect();
        let total: f64 = row.iter().sum();
        w.extend(row.iter().map(|x| x / total));
    }
    w
}

/// Connected components by explicit depth-first search.
pub fn dfs_components(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

/// Rank over GF(2) of a set of row vectors, each a list of set column indices.
pub fn gf2_rank(rows: &[Vec<usize>], columns: usize) -> usize {
    let words = columns.div_ceil(64).max(1);
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| {
            let mut bits = vec![0u64; words];
            for &c in r {
                bits[c / 64] ^= 1 << (c % 64);
            }
            bits
        })
        .collect();
    let mut rank = 0;
    for c in 0..columns {
        let (w, b) = (c / 64, 1u64 << (c % 64));
        let Some(p) = (rank..m.len()).find(|&i| m[i][w] & b != 0) else {
            continue;
        };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank && m[i][w] & b != 0 {
                let pivot = m[rank].clone();
                for (x, y) in m[i].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Dimension of the cycle space: |E| minus the rank of the vertex-edge incidence matrix.
pub fn cycle_rank(n: usize, edges: &[(usize, usize)]) -> usize {
    let rows: Vec<Vec<usize>> = edges.iter().map(|&(u, v)| vec![u, v]).collect();
    edges.len() - gf2_rank(&rows, n)
}

/// Strongly connected components from the reflexive transitive closure.
pub fn closure_scc(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(u, v) in edges {
        reach[u][v] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                let via = reach[k].clone();
                for (r, v) in reach[i].iter_mut().zip(via) {
                    *r |= v;
                }
            }
        }
    }
    let mut assigned = vec![false; n];
    let mut count = 0;
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        count += 1;
        for j in 0..n {
            if reach[i][j] && reach[j][i] {
                assigned[j] = true;
            }
        }
    }
    count
}

/// Counts simple directed cycles by extending every path that starts at its smallest vertex.
pub fn enumerate_cycles(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in edges {
        adj[u][v] = true;
    }
    fn extend(adj: &[Vec<bool>], start: usize, u: usize, on_path: &mut Vec<bool>) -> usize {
        let mut found = 0;
        for v in start..adj.len() {
            if !adj[u][v] {
                continue;
            }
            if v == start {
                if u != start {
                    found += 1;
                }
            } else if !on_path[v] {
                on_path[v] = true;
                found += extend(adj, start, v, on_path);
                on_path[v] = false;
            }
        }
        found
    }
    let mut total = 0;
    for s in 0..n {
        let mut on_path = vec![false; n];
        on_path[s] = true;
        total += extend(&adj, s, s, &mut on_path);
    }
    total
}

/// Weight of a maximum spanning tree of the max-symmetrized off-diagonal weights, by Prim's
/// algorithm on the dense matrix.
pub fn max_spanning_tree_weight(n: usize, w: &[f64]) -> f64 {
    let sym = |u: usize, v: usize| w[u * n + v].max(w[v * n + u]);
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::NEG_INFINITY; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .max_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[u] = true;
        total += best[u];
        for v in 0..n {
            if !in_tree[v] && v != u {
                best[v] = best[v].max(sym(u, v));
            }
        }
    }
    total
}

/// β1 of the clique complex of a simple graph, from the ranks of both boundary matrices.
pub fn clique_betti1(n: usize, edges: &[(usize, usize)]) -> usize {
    let index = |u: usize, v: usize| edges.iter().position(|&e| e == (u.min(v), u.max(v)));
    let mut triangles = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if let (Some(x), Some(y), Some(z)) = (index(a, b), index(a, c), index(b, c)) {
                    triangles.push(vec![x, y, z]);
                }
            }
        }
    }
    let vertex_rows: Vec<Vec<usize>> = edges.iter().map(|&(u, v)| vec![u, v]).collect();
    edges.len() - gf2_rank(&vertex_rows, n) - gf2_rank(&triangles, edges.len())
}

/// Midpoints between consecutive distinct sorted values, skipping gaps too narrow to separate
/// reliably in floating point.
pub fn midpoints(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
        .windows(2)
        .filter(|w| w[1] - w[0] > 1e-9)
        .map(|w| 0.5 * (w[0] + w[1]))
        .collect()
}
