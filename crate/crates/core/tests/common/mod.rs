#![allow(dead_code)]

use std::sync::Arc;

use foldgrowth::graph::{Edge, Graph, Path};
use foldgrowth::labelled::LabelledGraph;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random tight path with `len` edges, or shorter if it reaches a dead
/// end; `allowed` filters geometric edges.
pub fn random_tight_path(
    g: &Graph,
    len: usize,
    allowed: &dyn Fn(usize) -> bool,
    rng: &mut impl Rng,
) -> Path {
    let starts: Vec<usize> = (0..g.vertex_count())
        .filter(|&v| g.star(v).iter().any(|e| allowed(e.geometric())))
        .collect();
    let v = starts[rng.gen_range(0..starts.len())];
    let mut edges: Vec<Edge> = Vec::new();
    let mut cur = v;
    for _ in 0..len {
        let options: Vec<Edge> = g
            .star(cur)
            .iter()
            .copied()
            .filter(|e| allowed(e.geometric()) && edges.last().is_none_or(|l| *e != l.reverse()))
            .collect();
        if options.is_empty() {
            break;
        }
        let e = options[rng.gen_range(0..options.len())];
        cur = g.terminal(e);
        edges.push(e);
    }
    Path::from_parts(v, cur, edges)
}

/// A connected graph labelled over `base` with at most `max_edges` edges:
/// a random spanning tree plus extra edges, every edge labelled by a base
/// edge between the labels of its ends.
pub fn random_labelled(
    base: &Arc<Graph>,
    max_vertices: usize,
    max_edges: usize,
    rng: &mut impl Rng,
) -> LabelledGraph {
    let n = rng.gen_range(1..=max_vertices);
    let mut vertex_label = vec![0usize; n];
    let mut ends: Vec<[usize; 2]> = Vec::new();
    let mut edge_label: Vec<Edge> = Vec::new();
    let base_edges: Vec<Edge> = base.directed_edges().collect();
    let pick_from = |v: usize, label: usize, rng: &mut dyn rand::RngCore| -> Edge {
        let options: Vec<Edge> = base_edges
            .iter()
            .copied()
            .filter(|e| base.initial(*e) == label)
            .collect();
        let _ = v;
        options[rng.gen_range(0..options.len())]
    };
    for v in 1..n {
        let parent = rng.gen_range(0..v);
        let e = pick_from(parent, vertex_label[parent], rng);
        vertex_label[v] = base.terminal(e);
        ends.push([parent, v]);
        edge_label.push(e);
    }
    let extra = rng.gen_range(0..=max_edges.saturating_sub(n - 1));
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let e = pick_from(a, vertex_label[a], rng);
        let targets: Vec<usize> = (0..n)
            .filter(|&w| vertex_label[w] == base.terminal(e))
            .collect();
        if targets.is_empty() {
            continue;
        }
        let b = targets[rng.gen_range(0..targets.len())];
        ends.push([a, b]);
        edge_label.push(e);
    }
    LabelledGraph::new(
        base.clone(),
        Graph::new(n, ends).unwrap(),
        vertex_label,
        edge_label,
    )
    .unwrap()
}

/// Least-squares-free degree check: the `(d+1)`-st differences vanish and
/// the `d`-th are positive.
pub fn differences(seq: &[i128]) -> Vec<i128> {
    seq.windows(2).map(|w| w[1] - w[0]).collect()
}
