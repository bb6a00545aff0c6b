//! Immersions that carry the iterates of a path: diagram units and the linear
//! construction, tails and balloon checks, f-stability, periodic open
//! immersions, the non-linear constructions and the cover-level homology
//! certificate.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::fit::fit_degree;
use crate::folding::{FoldError, Lift, Lifter};
use crate::graph::{Edge, Graph, GraphError, Path, Vertex};
use crate::growth_units::UnitError;
use crate::homology::HomologyError;
use crate::labelled::{LabelError, LabelledGraph, UnionFind};
use crate::path_units::SplitError;
use crate::rep::{substitute, RepError, SuffixMap};

pub mod linear;
pub mod open;
pub mod sigma;
pub mod stable;
pub mod tails;
pub mod theorem;

pub use linear::{build_lambda, lambda_constants, linear_apt, DiagramUnit, Lambda};
pub use open::{
    can_open, open_family, periodic_open_immersions, OpenConfig, OpenFamily, OpenImmersion,
    PeriodicOpenImmersions, Shape,
};
pub use sigma::{nonlinear_sigma, tree_extend, PathUnitSigma, SigmaCase, SigmaConfig, SigmaParams};
pub use stable::{f_stable_period, Stability, DEFAULT_PERIOD_CAP};
pub use tails::{balloon_checks, tails, BalloonReport, Sign, Tail};
pub use theorem::{
    apt_certificate, cover_homology, fallback_search, nonlinear_apt, verify_main_theorem,
    witness_circuit, CoverWitness, MainTheoremCertificate, Route, TheoremConfig,
};

pub const K_MAX_LINEAR: usize = 12;
pub const K_MAX_NONLINEAR: usize = 8;
pub const DEFAULT_MAX_SHEETS: usize = 24;
pub const DEFAULT_INDEX_BOUND: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AptError {
    #[error("{0}")]
    Domain(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("resource bound exceeded: {0}")]
    Resource(String),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Units(#[from] UnitError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Fold(#[from] FoldError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

/// Lengths of one lifted iterate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Sample {
    pub k: usize,
    pub l: usize,
    pub l_ab: usize,
}

/// A base-pointed immersion carrying every `f^{kq}_#(rho)`, `k <= k_max`, as
/// a closed path at `base_vertex`.
#[derive(Clone, Debug)]
pub struct AptCertificate {
    pub sigma: LabelledGraph,
    pub base_vertex: Vertex,
    pub q: usize,
    pub rho: Path,
    pub samples: Vec<Sample>,
    pub l_fit: Option<usize>,
    pub l_ab_fit: Option<usize>,
}

impl AptCertificate {
    /// Every sampled lift closed at the base vertex and the two fits agree.
    pub fn is_valid(&self) -> bool {
        !self.samples.is_empty() && self.l_fit == self.l_ab_fit
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "q": self.q,
            "vertices": self.sigma.carrier.vertex_count(),
            "edges": self.sigma.carrier.edge_count(),
            "l_fit": self.l_fit,
            "l_ab_fit": self.l_ab_fit,
            "samples": self.samples,
        })
    }
}

/// `sum |c_e|` of the chain of a path in a graph with `edge_count` edges.
pub fn chain_l1(p: &Path, edge_count: usize) -> usize {
    p.chain(edge_count)
        .iter()
        .map(|x| x.unsigned_abs() as usize)
        .sum()
}

/// The iterates `f^{kq}_#(rho)` for `k = 0, 1, ...`, computed from the
/// images of single edges under `f^q_#`.
pub struct Iterates {
    images: Vec<Path>,
    cur: Path,
}

impl Iterates {
    pub fn new(map: &SuffixMap, rho: &Path, q: usize) -> Iterates {
        Iterates {
            images: map.power_map(q),
            cur: rho.tighten(),
        }
    }
}

impl Iterator for Iterates {
    type Item = Path;

    fn next(&mut self) -> Option<Path> {
        let next = substitute(&self.images, &self.cur);
        Some(std::mem::replace(&mut self.cur, next))
    }
}

/// Lifts `f^{kq}_#(rho)` from `start` for `k = 0..=k_max`, requiring each
/// lift to end at `end`. Returns the samples measured in the carrier.
pub fn sample_lifts(
    h: &LabelledGraph,
    map: &SuffixMap,
    rho: &Path,
    q: usize,
    k_max: usize,
    start: Vertex,
    end: Vertex,
) -> Result<Vec<Sample>, AptError> {
    let lifter = Lifter::new(h);
    let mut samples = Vec::with_capacity(k_max + 1);
    for (k, p) in Iterates::new(map, rho, q).take(k_max + 1).enumerate() {
        match lifter.lift(start, &p)? {
            Lift::Complete(t) if t.end() == end => {
                samples.push(Sample {
                    k,
                    l: t.len(),
                    l_ab: chain_l1(&t, h.carrier.edge_count()),
                });
            }
            Lift::Complete(t) => {
                return Err(AptError::Construction(format!(
                    "iterate {k} lifts from vertex {start} to vertex {} instead of {end}",
                    t.end()
                )))
            }
            Lift::Partial { failed_at, .. } => {
                return Err(AptError::Construction(format!(
                    "iterate {k} leaves the immersion at edge {failed_at}"
                )))
            }
        }
    }
    Ok(samples)
}

/// Degree fits of the `l` and `l_ab` columns.
pub fn fits(samples: &[Sample]) -> (Option<usize>, Option<usize>) {
    let l: Vec<u64> = samples.iter().map(|s| s.l as u64).collect();
    let ab: Vec<u64> = samples.iter().map(|s| s.l_ab as u64).collect();
    (fit_degree(&l), fit_degree(&ab))
}

/// Connected component of `v` in the base subgraph spanned by `allowed`
/// geometric edges: vertex and edge masks.
pub fn base_component(base: &Graph, allowed: &[bool], v: Vertex) -> (Vec<bool>, Vec<bool>) {
    let mut vs = vec![false; base.vertex_count()];
    let mut es = vec![false; base.edge_count()];
    vs[v] = true;
    let mut queue = VecDeque::from([v]);
    while let Some(x) = queue.pop_front() {
        for &e in base.star(x) {
            if !allowed[e.geometric()] {
                continue;
            }
            es[e.geometric()] = true;
            let w = base.terminal(e);
            if !vs[w] {
                vs[w] = true;
                queue.push_back(w);
            }
        }
    }
    (vs, es)
}

/// The component of the `allowed` base subgraph containing `v` as a
/// labelled graph over the base.
pub fn base_component_graph(base: &Arc<Graph>, allowed: &[bool], v: Vertex) -> LabelledGraph {
    let (vs, es) = base_component(base, allowed, v);
    LabelledGraph::identity(base.clone()).restrict(&vs, &es)
}

/// Extends every connected piece of the `allowed`-labelled part of `h` to a
/// cover of the matching component of the `allowed` base subgraph. A piece
/// with no allowed edge is extended only when `wants_cover` holds for its
/// vertex. Existing vertices and edges keep their ids; pieces of the new
/// covers that miss `h` are dropped.
pub fn extend_components(
    h: &LabelledGraph,
    allowed: &[bool],
    wants_cover: impl Fn(Vertex) -> bool,
) -> LabelledGraph {
    let base = &h.base;
    let n = h.carrier.vertex_count();
    let mut uf = UnionFind::new(n);
    for (g, &[a, b]) in h.carrier.geometric_ends().iter().enumerate() {
        if allowed[h.edge_label[g].geometric()] {
            uf.union(a, b);
        }
    }
    let (class, count) = uf.classes();
    let mut members: Vec<Vec<Vertex>> = vec![Vec::new(); count];
    for v in 0..n {
        members[class[v]].push(v);
    }
    let mut has_allowed = vec![false; count];
    for (g, &[a, _]) in h.carrier.geometric_ends().iter().enumerate() {
        if allowed[h.edge_label[g].geometric()] {
            has_allowed[class[a]] = true;
        }
    }
    let mut vertex_label = h.vertex_label.clone();
    let mut ends = h.carrier.geometric_ends().to_vec();
    let mut edge_label = h.edge_label.clone();
    for c in 0..count {
        let v0 = members[c][0];
        if !has_allowed[c] && !wants_cover(v0) {
            continue;
        }
        let (bvs, bes) = base_component(base, allowed, h.vertex_label[v0]);
        if !bes.iter().any(|&x| x) {
            continue;
        }
        let mut fibers: Vec<Vec<Vertex>> = vec![Vec::new(); base.vertex_count()];
        for &v in &members[c] {
            fibers[h.vertex_label[v]].push(v);
        }
        let s = (0..base.vertex_count())
            .filter(|&x| bvs[x])
            .map(|x| fibers[x].len())
            .max()
            .unwrap_or(1)
            .max(1);
        for x in 0..base.vertex_count() {
            if bvs[x] {
                while fibers[x].len() < s {
                    fibers[x].push(vertex_label.len());
                    vertex_label.push(x);
                }
            }
        }
        let mut has_out = vec![Vec::new(); base.edge_count()];
        let mut has_in = vec![Vec::new(); base.edge_count()];
        for &v in &members[c] {
            for &e in h.carrier.star(v) {
                let l = h.label(e);
                if l.is_reversed() {
                    has_in[l.geometric()].push(v);
                } else {
                    has_out[l.geometric()].push(v);
                }
            }
        }
        for bg in 0..base.edge_count() {
            if !bes[bg] {
                continue;
            }
            let eps = Edge::new(bg, false);
            let (x, y) = (base.initial(eps), base.terminal(eps));
            let sources: Vec<Vertex> = fibers[x]
                .iter()
                .copied()
                .filter(|v| !has_out[bg].contains(v))
                .collect();
            let targets: Vec<Vertex> = fibers[y]
                .iter()
                .copied()
                .filter(|v| !has_in[bg].contains(v))
                .collect();
            debug_assert_eq!(sources.len(), targets.len());
            for (a, b) in sources.into_iter().zip(targets) {
                ends.push([a, b]);
                edge_label.push(eps);
            }
        }
    }
    let big = LabelledGraph {
        base: base.clone(),
        carrier: Graph::new(vertex_label.len(), ends).unwrap(),
        vertex_label,
        edge_label,
        initial_point: h.initial_point,
        terminal_point: h.terminal_point,
    };
    keep_touching(&big, n)
}

/// Drops the connected components of `g` that contain none of its first
/// `n` vertices.
pub fn keep_touching(g: &LabelledGraph, n: usize) -> LabelledGraph {
    let total = g.carrier.vertex_count();
    if total == n {
        return g.clone();
    }
    let mut keep = vec![false; total];
    let mut queue: VecDeque<Vertex> = (0..n).collect();
    for v in 0..n {
        keep[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        for &e in g.carrier.star(v) {
            let w = g.carrier.terminal(e);
            if !keep[w] {
                keep[w] = true;
                queue.push_back(w);
            }
        }
    }
    let keep_edge: Vec<bool> = g
        .carrier
        .geometric_ends()
        .iter()
        .map(|&[a, _]| keep[a])
        .collect();
    g.restrict(&keep, &keep_edge)
}

/// Moves the initial end (in the direction labelled by `label`) of each
/// listed carrier edge to a new vertex of its own. Returns the graph and the
/// new vertices in the order of `edges`.
pub fn detach(h: &LabelledGraph, edges: &[usize], label: Edge) -> (LabelledGraph, Vec<Vertex>) {
    let mut vertex_label = h.vertex_label.clone();
    let mut ends = h.carrier.geometric_ends().to_vec();
    let mut fresh = Vec::new();
    for &g in edges {
        let w = vertex_label.len();
        let stored = h.edge_label[g];
        let forward = stored == label;
        debug_assert!(forward || stored == label.reverse());
        let x = if forward { ends[g][0] } else { ends[g][1] };
        vertex_label.push(h.vertex_label[x]);
        if forward {
            ends[g][0] = w;
        } else {
            ends[g][1] = w;
        }
        fresh.push(w);
    }
    let out = LabelledGraph {
        base: h.base.clone(),
        carrier: Graph::new(vertex_label.len(), ends).unwrap(),
        vertex_label,
        edge_label: h.edge_label.clone(),
        initial_point: h.initial_point,
        terminal_point: h.terminal_point,
    };
    (out, fresh)
}

/// Carrier edges whose label is `label` or its reverse.
pub fn edges_labelled(h: &LabelledGraph, label: Edge) -> Vec<usize> {
    (0..h.carrier.edge_count())
        .filter(|&g| h.edge_label[g].geometric() == label.geometric())
        .collect()
}

/// Whether `f^{q}_#` of the labels of every positively labelled edge of `h`
/// lifts from its initial vertex to its terminal vertex, for the listed `q`.
pub fn carries_iterates(h: &LabelledGraph, map: &SuffixMap, qs: &[usize]) -> bool {
    let lifter = Lifter::new(h);
    qs.iter().all(|&q| {
        let images = map.power_map(q);
        (0..h.carrier.edge_count()).all(|g| {
            let l = h.edge_label[g];
            let (a, b) = (
                h.carrier.geometric_ends()[g][0],
                h.carrier.geometric_ends()[g][1],
            );
            let img = &images[l.geometric()];
            let (from, to) = if l.is_reversed() { (b, a) } else { (a, b) };
            lifter.endpoint(from, img.edges()) == Some(to)
        })
    })
}

/// Valence of a vertex.
pub fn valence(h: &LabelledGraph, v: Vertex) -> usize {
    h.carrier.star(v).len()
}

#[cfg(test)]
pub(crate) mod testing {
    use crate::rep::{Efficient, Representative};

    pub fn eff(text: &str) -> Efficient {
        Efficient::new(&Representative::parse(text).unwrap()).unwrap()
    }

    pub const E1_RESTRICTED: &str =
        "rep E1r\nedge e1 : v0 -> v0\nedge e2 : v0 -> v0\nmap e1 -> e1\nmap e2 -> e2 e1\n";
}
