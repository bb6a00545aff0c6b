//! Stallings folding, completion of immersions to covers, path lifting and
//! bounded enumeration of covers.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{Edge, Graph, Path, Vertex};
use crate::labelled::{line, CanonicalForm, LabelError, LabelledGraph, StarIndex, UnionFind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FoldError {
    #[error("graph is already an immersion")]
    NoFold,
    #[error("expected an immersion")]
    NotImmersion,
    #[error("expected a cover")]
    NotCover,
    #[error("start vertex lies over {found}, path starts at {expected}")]
    FiberMismatch { expected: Vertex, found: Vertex },
    #[error("sheet count {requested} exceeds the bound {bound}")]
    BoundExceeded { requested: usize, bound: usize },
    #[error("basepoint lies over a vertex that the map moves")]
    BasepointMoved,
    #[error("edges {0:?} and {1:?} at vertex {2} cannot be folded")]
    BadPair(Edge, Edge, Vertex),
    #[error(transparent)]
    Label(#[from] LabelError),
}

/// One folding step: the vertex and the two identified edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FoldStep {
    pub vertex: Vertex,
    pub kept: Edge,
    pub merged: Edge,
}

/// Result of folding with the quotient maps from input to output.
#[derive(Clone, Debug)]
pub struct Folded {
    pub graph: LabelledGraph,
    pub vertex_map: Vec<Vertex>,
    /// Image of the stored direction of each input geometric edge.
    pub edge_map: Vec<Edge>,
    pub steps: Vec<FoldStep>,
}

impl Folded {
    pub fn map_edge(&self, e: Edge) -> Edge {
        let d = self.edge_map[e.geometric()];
        if e.is_reversed() {
            d.reverse()
        } else {
            d
        }
    }

    pub fn map_path(&self, p: &Path) -> Path {
        Path::from_parts(
            self.vertex_map[p.start()],
            self.vertex_map[p.end()],
            p.edges().iter().map(|&e| self.map_edge(e)).collect(),
        )
    }
}

/// Folds the given pair of equal-labelled edges leaving `v`.
pub fn fold_pair(h: &LabelledGraph, v: Vertex, d1: Edge, d2: Edge) -> Result<Folded, FoldError> {
    let c = &h.carrier;
    if d1.geometric() == d2.geometric()
        || c.initial(d1) != v
        || c.initial(d2) != v
        || h.label(d1) != h.label(d2)
    {
        return Err(FoldError::BadPair(d1, d2, v));
    }
    let (kept, merged) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
    let mut uf = UnionFind::new(c.vertex_count());
    uf.union(c.terminal(kept), c.terminal(merged));
    let (class, count) = uf.classes();
    let gm = merged.geometric();
    let keep_edge: Vec<bool> = (0..c.edge_count()).map(|g| g != gm).collect();
    let new_edge_id = |g: usize| if g > gm { g - 1 } else { g };
    let q = h.quotient_vertices(&class, count);
    let keep_vertex = vec![true; count];
    let graph = q.restrict(&keep_vertex, &keep_edge);
    let edge_map = (0..c.edge_count())
        .map(|g| {
            if g == gm {
                // stored direction of `merged` goes to `kept` or its reverse
                let k = Edge::new(new_edge_id(kept.geometric()), kept.is_reversed());
                if merged.is_reversed() {
                    k.reverse()
                } else {
                    k
                }
            } else {
                Edge::new(new_edge_id(g), false)
            }
        })
        .collect();
    Ok(Folded {
        graph,
        vertex_map: class,
        edge_map,
        steps: vec![FoldStep {
            vertex: v,
            kept,
            merged,
        }],
    })
}

/// One step at the least vertex carrying a folding pair, least pair first.
pub fn fold_step(h: &LabelledGraph) -> Result<Folded, FoldError> {
    let (v, a, b) = h.folding_pair().ok_or(FoldError::NoFold)?;
    fold_pair(h, v, a, b)
}

/// All foldable pairs, for callers that want to pick a fold order.
pub fn folding_pairs(h: &LabelledGraph) -> Vec<(Vertex, Edge, Edge)> {
    let mut out = Vec::new();
    for v in 0..h.carrier.vertex_count() {
        let star = h.carrier.star(v);
        for i in 0..star.len() {
            for j in i + 1..star.len() {
                if star[i].geometric() != star[j].geometric()
                    && h.label(star[i]) == h.label(star[j])
                {
                    out.push((v, star[i], star[j]));
                }
            }
        }
    }
    out
}

/// Composes two folding results (first `a`, then `b` on `a.graph`).
pub fn compose(a: &Folded, b: &Folded) -> Folded {
    let mut steps = a.steps.clone();
    steps.extend_from_slice(&b.steps);
    Folded {
        graph: b.graph.clone(),
        vertex_map: a.vertex_map.iter().map(|&v| b.vertex_map[v]).collect(),
        edge_map: a.edge_map.iter().map(|&e| b.map_edge(e)).collect(),
        steps,
    }
}

/// Identity folding record.
pub fn unfolded(h: &LabelledGraph) -> Folded {
    Folded {
        graph: h.clone(),
        vertex_map: (0..h.carrier.vertex_count()).collect(),
        edge_map: (0..h.carrier.edge_count())
            .map(|g| Edge::new(g, false))
            .collect(),
        steps: Vec::new(),
    }
}

/// Folds step by step with the deterministic least-vertex, least-pair rule.
pub fn fold_stepwise(h: &LabelledGraph) -> Folded {
    let mut acc = unfolded(h);
    while let Ok(step) = fold_step(&acc.graph) {
        acc = compose(&acc, &step);
    }
    acc
}

/// The immersion determined by `h`. Uses a union-find worklist, which is
/// linear-ish in the size of `h`; by confluence the result agrees with any
/// maximal sequence of single folds up to labelled isomorphism.
pub fn fold(h: &LabelledGraph) -> Folded {
    let c = &h.carrier;
    let ne = c.edge_count();
    let mut vuf = UnionFind::new(c.vertex_count());
    // alias[g] is the directed edge the stored direction of g has been merged into
    let mut alias: Vec<Edge> = (0..ne).map(|g| Edge::new(g, false)).collect();
    fn resolve(alias: &mut [Edge], e: Edge) -> Edge {
        let mut d = e.positive();
        let mut flip = e.is_reversed();
        loop {
            let a = alias[d.geometric()];
            if a == d {
                break;
            }
            flip ^= a.is_reversed();
            d = a.positive();
        }
        if flip {
            d.reverse()
        } else {
            d
        }
    }
    let mut star: Vec<HashMap<Edge, Edge>> = vec![HashMap::new(); c.vertex_count()];
    let mut pending: Vec<(Edge, Edge)> = Vec::new();
    for v in 0..c.vertex_count() {
        for &e in c.star(v) {
            let l = h.label(e);
            match star[v].get(&l) {
                Some(&d) => pending.push((d, e)),
                None => {
                    star[v].insert(l, e);
                }
            }
        }
    }
    let mut steps = Vec::new();
    while let Some((d1, d2)) = pending.pop() {
        let r1 = resolve(&mut alias, d1);
        let r2 = resolve(&mut alias, d2);
        if r1 == r2 {
            continue;
        }
        debug_assert_ne!(r1.geometric(), r2.geometric());
        let (kept, merged) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        steps.push(FoldStep {
            vertex: vuf.find(c.initial(merged)),
            kept,
            merged,
        });
        alias[merged.geometric()] = if merged.is_reversed() {
            kept.reverse()
        } else {
            kept
        };
        let a = vuf.find(c.terminal(kept));
        let b = vuf.find(c.terminal(merged));
        if a != b {
            let root = vuf.union(a, b);
            let other = if root == a { b } else { a };
            let (mut big, small) = (
                std::mem::take(&mut star[root]),
                std::mem::take(&mut star[other]),
            );
            if big.len() < small.len() {
                let mut moved = small;
                for (l, e) in big.drain() {
                    match moved.get(&l) {
                        Some(&d) => pending.push((d, e)),
                        None => {
                            moved.insert(l, e);
                        }
                    }
                }
                big = moved;
            } else {
                for (l, e) in small {
                    match big.get(&l) {
                        Some(&d) => pending.push((d, e)),
                        None => {
                            big.insert(l, e);
                        }
                    }
                }
            }
            star[root] = big;
        }
    }
    let (class, count) = vuf.classes();
    let mut new_edge = vec![usize::MAX; ne];
    let mut ends = Vec::new();
    let mut edge_label = Vec::new();
    for g in 0..ne {
        if alias[g] == Edge::new(g, false) {
            new_edge[g] = ends.len();
            let [a, b] = c.geometric_ends()[g];
            ends.push([class[a], class[b]]);
            edge_label.push(h.edge_label[g]);
        }
    }
    let mut vertex_label = vec![0; count];
    for v in 0..c.vertex_count() {
        vertex_label[class[v]] = h.vertex_label[v];
    }
    let edge_map = (0..ne)
        .map(|g| {
            let r = resolve(&mut alias, Edge::new(g, false));
            Edge::new(new_edge[r.geometric()], r.is_reversed())
        })
        .collect();
    let graph = LabelledGraph {
        base: h.base.clone(),
        carrier: Graph::new(count, ends).unwrap(),
        vertex_label,
        edge_label,
        initial_point: h.initial_point.map(|v| class[v]),
        terminal_point: h.terminal_point.map(|v| class[v]),
    };
    Folded {
        graph,
        vertex_map: class,
        edge_map,
        steps,
    }
}

/// Sheet count and fibers of a cover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverCertificate {
    pub sheets: usize,
    /// Carrier vertices over each base vertex.
    pub vertex_fibers: Vec<Vec<Vertex>>,
    /// Carrier geometric edges over each base geometric edge.
    pub edge_fibers: Vec<Vec<usize>>,
}

pub fn cover_certificate(cover: &LabelledGraph) -> Result<CoverCertificate, FoldError> {
    if !cover.is_cover() {
        return Err(FoldError::NotCover);
    }
    let mut vertex_fibers = vec![Vec::new(); cover.base.vertex_count()];
    for v in 0..cover.carrier.vertex_count() {
        vertex_fibers[cover.vertex_label[v]].push(v);
    }
    let mut edge_fibers = vec![Vec::new(); cover.base.edge_count()];
    for (g, l) in cover.edge_label.iter().enumerate() {
        edge_fibers[l.geometric()].push(g);
    }
    let sheets = vertex_fibers.first().map_or(0, |f| f.len());
    if vertex_fibers.iter().any(|f| f.len() != sheets) {
        return Err(FoldError::NotCover);
    }
    Ok(CoverCertificate {
        sheets,
        vertex_fibers,
        edge_fibers,
    })
}

/// Completes a finite immersion to a cover with `s = max fiber size` sheets.
/// Input vertices and edges keep their ids; every fiber is padded to `s` new
/// vertices and missing edge lifts join the lowest free source to the lowest
/// free target.
pub fn complete_to_cover(
    h: &LabelledGraph,
) -> Result<(LabelledGraph, CoverCertificate), FoldError> {
    if !h.is_immersion() {
        return Err(FoldError::NotImmersion);
    }
    let base = &h.base;
    let sizes = h.fiber_sizes();
    let s = sizes.iter().copied().max().unwrap_or(0).max(1);
    let mut vertex_label = h.vertex_label.clone();
    let mut fibers: Vec<Vec<Vertex>> = vec![Vec::new(); base.vertex_count()];
    for (v, &l) in h.vertex_label.iter().enumerate() {
        fibers[l].push(v);
    }
    for (bv, fiber) in fibers.iter_mut().enumerate() {
        while fiber.len() < s {
            fiber.push(vertex_label.len());
            vertex_label.push(bv);
        }
    }
    let mut ends = h.carrier.geometric_ends().to_vec();
    let mut edge_label = h.edge_label.clone();
    for bg in 0..base.edge_count() {
        let eps = Edge::new(bg, false);
        let (bv, bw) = (base.initial(eps), base.terminal(eps));
        let mut has_out: BTreeSet<Vertex> = BTreeSet::new();
        let mut has_in: BTreeSet<Vertex> = BTreeSet::new();
        for (g, &[a, b]) in h.carrier.geometric_ends().iter().enumerate() {
            let l = h.edge_label[g];
            if l == eps {
                has_out.insert(a);
                has_in.insert(b);
            } else if l == eps.reverse() {
                has_out.insert(b);
                has_in.insert(a);
            }
        }
        let sources: Vec<Vertex> = fibers[bv]
            .iter()
            .copied()
            .filter(|v| !has_out.contains(v))
            .collect();
        let targets: Vec<Vertex> = fibers[bw]
            .iter()
            .copied()
            .filter(|v| !has_in.contains(v))
            .collect();
        debug_assert_eq!(sources.len(), targets.len());
        for (a, b) in sources.into_iter().zip(targets) {
            ends.push([a, b]);
            edge_label.push(eps);
        }
    }
    let cover = LabelledGraph {
        base: base.clone(),
        carrier: Graph::new(vertex_label.len(), ends).unwrap(),
        vertex_label,
        edge_label,
        initial_point: h.initial_point,
        terminal_point: h.terminal_point,
    };
    let cert = cover_certificate(&cover)?;
    Ok((cover, cert))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lift {
    Complete(Path),
    /// The first `lifted.len()` edges lift; edge `failed_at` has no lift.
    Partial {
        lifted: Path,
        failed_at: usize,
    },
}

impl Lift {
    pub fn complete(self) -> Option<Path> {
        match self {
            Lift::Complete(p) => Some(p),
            Lift::Partial { .. } => None,
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Lift::Complete(p) if p.is_closed())
    }
}

/// Lifts base paths into an immersion (or cover) with a reusable star index.
#[derive(Clone, Debug)]
pub struct Lifter {
    index: StarIndex,
    vertex_label: Vec<Vertex>,
    carrier_terminal: Vec<Vertex>,
}

impl Lifter {
    pub fn new(h: &LabelledGraph) -> Lifter {
        let carrier_terminal = h
            .carrier
            .directed_edges()
            .map(|e| h.carrier.terminal(e))
            .collect();
        Lifter {
            index: h.star_index(),
            vertex_label: h.vertex_label.clone(),
            carrier_terminal,
        }
    }

    pub fn lift(&self, start: Vertex, path: &Path) -> Result<Lift, FoldError> {
        if self.vertex_label[start] != path.start() {
            return Err(FoldError::FiberMismatch {
                expected: path.start(),
                found: self.vertex_label[start],
            });
        }
        Ok(self.lift_edges(start, path.edges()))
    }

    pub fn lift_edges(&self, start: Vertex, edges: &[Edge]) -> Lift {
        let mut v = start;
        let mut out = Vec::with_capacity(edges.len());
        for (i, &e) in edges.iter().enumerate() {
            match self.index.step(v, e) {
                Some(d) => {
                    out.push(d);
                    v = self.carrier_terminal[d.0 as usize];
                }
                None => {
                    return Lift::Partial {
                        lifted: Path::from_parts(start, v, out),
                        failed_at: i,
                    };
                }
            }
        }
        Lift::Complete(Path::from_parts(start, v, out))
    }

    /// End vertex of the lift, if it exists.
    pub fn endpoint(&self, start: Vertex, edges: &[Edge]) -> Option<Vertex> {
        let mut v = start;
        for &e in edges {
            let d = self.index.step(v, e)?;
            v = self.carrier_terminal[d.0 as usize];
        }
        Some(v)
    }
}

/// The unique lift of `path` starting at `start`; partial for immersions.
pub fn lift_path(h: &LabelledGraph, start: Vertex, path: &Path) -> Result<Lift, FoldError> {
    if !h.is_immersion() {
        return Err(FoldError::NotImmersion);
    }
    Lifter::new(h).lift(start, path)
}

pub const DEFAULT_COVER_BOUND: usize = 6;

/// Connected `s`-sheeted covers of a connected graph, one per labelled
/// isomorphism class, sorted by canonical form.
pub fn enumerate_covers(
    base: &Arc<Graph>,
    s: usize,
    bound: usize,
) -> Result<Vec<LabelledGraph>, FoldError> {
    if s > bound {
        return Err(FoldError::BoundExceeded {
            requested: s,
            bound,
        });
    }
    if s == 0 {
        return Ok(Vec::new());
    }
    let tree = spanning_tree(base);
    let generators: Vec<usize> = (0..base.edge_count()).filter(|&g| !tree[g]).collect();
    let mut found: Vec<(CanonicalForm, LabelledGraph)> = Vec::new();
    let mut seen: BTreeSet<CanonicalForm> = BTreeSet::new();
    for_each_coset_table(generators.len(), s, &mut |perms| {
        let cover = cover_from_permutations(base, &tree, &generators, perms, s);
        let form = cover.canonical_form();
        if seen.insert(form.clone()) {
            found.push((form, cover));
        }
    });
    found.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(found.into_iter().map(|x| x.1).collect())
}

/// Marks spanning tree edges by breadth-first search from vertex 0.
pub fn spanning_tree(g: &Graph) -> Vec<bool> {
    let mut in_tree = vec![false; g.edge_count()];
    if g.vertex_count() == 0 {
        return in_tree;
    }
    let mut seen = vec![false; g.vertex_count()];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        for &e in g.star(v) {
            let w = g.terminal(e);
            if !seen[w] {
                seen[w] = true;
                in_tree[e.geometric()] = true;
                queue.push_back(w);
            }
        }
    }
    in_tree
}

fn cover_from_permutations(
    base: &Arc<Graph>,
    tree: &[bool],
    generators: &[usize],
    perms: &[Vec<usize>],
    s: usize,
) -> LabelledGraph {
    let nv = base.vertex_count();
    let sheet = |v: Vertex, i: usize| v * s + i;
    let mut ends = Vec::new();
    let mut edge_label = Vec::new();
    for g in 0..base.edge_count() {
        let [a, b] = base.geometric_ends()[g];
        let perm = if tree[g] {
            None
        } else {
            Some(&perms[generators.iter().position(|&x| x == g).unwrap()])
        };
        for i in 0..s {
            let j = perm.map_or(i, |p| p[i]);
            ends.push([sheet(a, i), sheet(b, j)]);
            edge_label.push(Edge::new(g, false));
        }
    }
    let vertex_label = (0..nv * s).map(|x| x / s).collect();
    LabelledGraph {
        base: base.clone(),
        carrier: Graph::new(nv * s, ends).unwrap(),
        vertex_label,
        edge_label,
        initial_point: None,
        terminal_point: None,
    }
}

/// Enumerates transitive permutation tuples on `s` points in standard form
/// (points numbered by first appearance), i.e. each subgroup of index `s` of
/// the free group on `r` generators exactly once.
fn for_each_coset_table(r: usize, s: usize, visit: &mut dyn FnMut(&[Vec<usize>])) {
    const UNSET: usize = usize::MAX;
    if r == 0 {
        if s == 1 {
            visit(&[]);
        }
        return;
    }
    let mut fwd = vec![vec![UNSET; s]; r];
    let mut inv = vec![vec![UNSET; s]; r];
    fn rec(
        fwd: &mut Vec<Vec<usize>>,
        inv: &mut Vec<Vec<usize>>,
        defined: usize,
        s: usize,
        r: usize,
        visit: &mut dyn FnMut(&[Vec<usize>]),
    ) {
        // first undefined entry in scan order (coset, generator, direction)
        let mut slot = None;
        'scan: for c in 0..defined {
            for g in 0..r {
                if fwd[g][c] == UNSET {
                    slot = Some((c, g, false));
                    break 'scan;
                }
                if inv[g][c] == UNSET {
                    slot = Some((c, g, true));
                    break 'scan;
                }
            }
        }
        let Some((c, g, backward)) = slot else {
            if defined == s {
                visit(fwd);
            }
            return;
        };
        let candidates: Vec<usize> = (0..defined.min(s))
            .filter(|&d| {
                if backward {
                    fwd[g][d] == UNSET
                } else {
                    inv[g][d] == UNSET
                }
            })
            .chain(if defined < s { Some(defined) } else { None })
            .collect();
        for d in candidates {
            let grow = d == defined;
            if backward {
                inv[g][c] = d;
                fwd[g][d] = c;
            } else {
                fwd[g][c] = d;
                inv[g][d] = c;
            }
            rec(fwd, inv, defined + grow as usize, s, r, visit);
            if backward {
                inv[g][c] = UNSET;
                fwd[g][d] = UNSET;
            } else {
                fwd[g][c] = UNSET;
                inv[g][d] = UNSET;
            }
        }
    }
    rec(&mut fwd, &mut inv, 1, s, r, visit);
}

/// Folds `rho` into an immersion and returns it based at the image of the
/// start; a convenience for subgroup cores of cyclic subgroups and for
/// membership tests.
pub fn core_of_loop(base: &Arc<Graph>, rho: &Path) -> Result<LabelledGraph, FoldError> {
    let l = line(base, rho)?;
    let (a, b) = (l.initial_point.unwrap(), l.terminal_point.unwrap());
    let mut uf = UnionFind::new(l.carrier.vertex_count());
    uf.union(a, b);
    let (class, count) = uf.classes();
    let based = l.quotient_vertices(&class, count);
    Ok(fold(&based).graph.trim())
}

/// Whether the closed base path `rho` lifts to a closed path at the base point
/// of the based immersion `core` (membership of `rho` in its subgroup).
pub fn contains_loop(core: &LabelledGraph, rho: &Path) -> bool {
    let Some(v) = core.initial_point else {
        return false;
    };
    if core.vertex_label[v] != rho.start() {
        return false;
    }
    match Lifter::new(core).lift_edges(v, rho.edges()) {
        Lift::Complete(p) => p.end() == v,
        Lift::Partial { .. } => false,
    }
}

/// Based core of the image subgroup: each edge is replaced by a line reading
/// the image of its label under `image`, then the result is folded and
/// trimmed. The map must fix the base point's label.
pub fn map_core(
    core: &LabelledGraph,
    image: &dyn Fn(Edge) -> Path,
    vertex_image: &dyn Fn(Vertex) -> Vertex,
) -> Result<LabelledGraph, FoldError> {
    let base = core.base.clone();
    let bp = core.initial_point.ok_or(FoldError::BasepointMoved)?;
    if vertex_image(core.vertex_label[bp]) != core.vertex_label[bp] {
        return Err(FoldError::BasepointMoved);
    }
    let mut vertex_label: Vec<Vertex> =
        core.vertex_label.iter().map(|&l| vertex_image(l)).collect();
    let mut ends = Vec::new();
    let mut edge_label = Vec::new();
    for (g, &[a, b]) in core.carrier.geometric_ends().iter().enumerate() {
        let img = image(core.edge_label[g]);
        let k = img.len();
        assert!(k > 0, "edge images must be nontrivial");
        let mut prev = a;
        for (i, &e) in img.edges().iter().enumerate() {
            let next = if i + 1 == k {
                b
            } else {
                vertex_label.push(base.terminal(e));
                vertex_label.len() - 1
            };
            ends.push([prev, next]);
            edge_label.push(e);
            prev = next;
        }
    }
    let h = LabelledGraph {
        base,
        carrier: Graph::new(vertex_label.len(), ends).unwrap(),
        vertex_label,
        edge_label,
        initial_point: Some(bp),
        terminal_point: Some(bp),
    };
    h.check()?;
    Ok(fold(&h).graph.trim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{default_names, parse_edges};
    use crate::labelled::{circle, combine};

    fn rose(n: usize) -> Arc<Graph> {
        Arc::new(Graph::rose(n))
    }

    fn path(base: &Graph, s: &str) -> Path {
        Path::from_edges(
            base,
            parse_edges(s, &default_names(base.edge_count())).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn folding_two_equal_loops() {
        let g = rose(2);
        let two = combine(&[
            circle(&g, &path(&g, "e1")).unwrap(),
            circle(&g, &path(&g, "e1")).unwrap(),
        ])
        .unwrap();
        assert_eq!(two.carrier.edge_count(), 2);
        let f = fold_step(&two).unwrap();
        assert_eq!(f.graph.carrier.edge_count(), 1);
        assert!(f.graph.is_immersion());
        assert_eq!(fold_step(&f.graph).unwrap_err(), FoldError::NoFold);
    }

    #[test]
    fn folding_a_backtrack() {
        let g = rose(2);
        let c = circle(&g, &path(&g, "e1 ~e1")).unwrap();
        let f = fold_step(&c).unwrap();
        assert_eq!(
            (f.graph.carrier.vertex_count(), f.graph.carrier.edge_count()),
            (2, 1)
        );
        let direct = fold(&c);
        assert_eq!(direct.graph.canonical_form(), f.graph.canonical_form());
    }

    #[test]
    fn fold_preserves_membership() {
        let g = rose(2);
        let c = circle(&g, &path(&g, "e1 ~e1 e2 ~e2 e1 e2")).unwrap();
        let folded = fold(&c);
        assert!(folded.graph.is_immersion());
        let core = folded.graph.trim();
        assert!(contains_loop(&core, &path(&g, "e1 e2")));
        assert!(!contains_loop(&core, &path(&g, "e1")));
        let stepwise = fold_stepwise(&c);
        assert_eq!(
            stepwise.graph.canonical_form(),
            folded.graph.canonical_form()
        );
        assert_eq!(
            stepwise.steps.len(),
            c.carrier.edge_count() - stepwise.graph.carrier.edge_count()
        );
    }

    #[test]
    fn fold_maps_carry_paths() {
        let g = rose(2);
        let l = crate::labelled::line(&g, &path(&g, "e1 e2 ~e2 e1")).unwrap();
        let f = fold(&l);
        let across = Path::from_parts(0, 4, (0..4).map(|i| Edge::new(i, false)).collect());
        let image = f.map_path(&across);
        assert!(image.is_valid_in(&f.graph.carrier));
        assert_eq!(
            f.graph.path_label(&image.tighten()).edges(),
            path(&g, "e1 e1").edges()
        );
    }

    #[test]
    fn cover_completion_examples() {
        let g = rose(2);
        let a_loop = circle(&g, &path(&g, "e1")).unwrap();
        let (c, cert) = complete_to_cover(&a_loop).unwrap();
        assert_eq!(cert.sheets, 1);
        assert_eq!(c.carrier.edge_count(), 2);
        let l = crate::labelled::line(&g, &path(&g, "e1")).unwrap();
        let (c, cert) = complete_to_cover(&l).unwrap();
        assert_eq!(cert.sheets, 2);
        assert_eq!(c.carrier.vertex_count(), 2);
        assert_eq!(cert.edge_fibers, vec![vec![0, 1], vec![2, 3]]);
        assert!((0..2).all(|v| c.carrier.star(v).len() == 4));
        let (again, cert2) = complete_to_cover(&c).unwrap();
        assert_eq!(again, c);
        assert_eq!(cert2.sheets, 2);
    }

    #[test]
    fn lifting() {
        let g = rose(2);
        // two-sheeted cover where e1 swaps sheets and e2 fixes them
        let cover = LabelledGraph::new(
            g.clone(),
            Graph::new(2, vec![[0, 1], [1, 0], [0, 0], [1, 1]]).unwrap(),
            vec![0, 0],
            vec![
                Edge::new(0, false),
                Edge::new(0, false),
                Edge::new(1, false),
                Edge::new(1, false),
            ],
        )
        .unwrap();
        assert!(cover.is_cover());
        let a = path(&g, "e1");
        let lift = lift_path(&cover, 0, &a).unwrap();
        assert!(!lift.is_closed());
        let aa = path(&g, "e1 e2 e1");
        assert!(lift_path(&cover, 0, &aa).unwrap().is_closed());
        let there_and_back = a.concat(&a.reverse()).unwrap();
        assert!(lift_path(&cover, 1, &there_and_back).unwrap().is_closed());
        assert_eq!(
            lift_path(&cover, 0, &Path::trivial(0)).unwrap(),
            Lift::Complete(Path::trivial(0))
        );
        let partial =
            lift_path(&circle(&g, &path(&g, "e1")).unwrap(), 0, &path(&g, "e1 e2")).unwrap();
        assert!(matches!(partial, Lift::Partial { failed_at: 1, .. }));
    }

    /// Counts transitive permutation tuples up to simultaneous conjugation.
    fn brute_force_cover_count(r: usize, s: usize) -> usize {
        fn perms(s: usize) -> Vec<Vec<usize>> {
            if s == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(s - 1) {
                for i in 0..s {
                    let mut q = p.clone();
                    q.insert(i, s - 1);
                    out.push(q);
                }
            }
            out
        }
        let all = perms(s);
        let mut tuples: Vec<Vec<Vec<usize>>> = vec![vec![]];
        for _ in 0..r {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    all.iter().map(move |p| {
                        let mut t = t.clone();
                        t.push(p.clone());
                        t
                    })
                })
                .collect();
        }
        let transitive = |t: &Vec<Vec<usize>>| {
            let mut seen = vec![false; s];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(x) = stack.pop() {
                for p in t {
                    for y in [p[x], p.iter().position(|&z| z == x).unwrap()] {
                        if !seen[y] {
                            seen[y] = true;
                            stack.push(y);
                        }
                    }
                }
            }
            seen.iter().all(|&b| b)
        };
        let mut classes = BTreeSet::new();
        for t in tuples.iter().filter(|t| transitive(t)) {
            let canon = all
                .iter()
                .map(|c| {
                    let mut inv = vec![0; s];
                    for i in 0..s {
                        inv[c[i]] = i;
                    }
                    t.iter()
                        .map(|p| (0..s).map(|i| c[p[inv[i]]]).collect::<Vec<_>>())
                        .collect::<Vec<_>>()
                })
                .min()
                .unwrap();
            classes.insert(canon);
        }
        classes.len()
    }

    #[test]
    fn cover_enumeration_counts() {
        assert_eq!(enumerate_covers(&rose(1), 2, 6).unwrap().len(), 1);
        assert_eq!(enumerate_covers(&rose(2), 2, 6).unwrap().len(), 3);
        assert_eq!(enumerate_covers(&rose(2), 1, 6).unwrap().len(), 1);
        for (r, s) in [(1, 3), (2, 3), (3, 2), (2, 4)] {
            let covers = enumerate_covers(&rose(r), s, 6).unwrap();
            assert!(covers
                .iter()
                .all(|c| c.is_cover() && c.carrier.is_connected()));
            assert_eq!(
                covers.len(),
                brute_force_cover_count(r, s),
                "rank {r}, {s} sheets"
            );
        }
        assert!(matches!(
            enumerate_covers(&rose(2), 7, 6),
            Err(FoldError::BoundExceeded { .. })
        ));
    }

    #[test]
    fn covers_of_a_theta_graph() {
        let theta = Arc::new(Graph::new(2, vec![[0, 1], [0, 1], [0, 1]]).unwrap());
        let covers = enumerate_covers(&theta, 2, 6).unwrap();
        assert_eq!(covers.len(), brute_force_cover_count(2, 2));
        let one = enumerate_covers(&theta, 1, 6).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].carrier.edge_count(), 3);
    }

    #[test]
    fn map_core_of_cyclic_subgroup() {
        let g = rose(3);
        let core = core_of_loop(&g, &path(&g, "e2")).unwrap();
        let image = |e: Edge| {
            let img = match e.geometric() {
                1 => path(&g, "e2 e1"),
                _ => Path::edge(&g, e.positive()),
            };
            if e.is_reversed() {
                img.reverse()
            } else {
                img
            }
        };
        let out = map_core(&core, &image, &|v| v).unwrap();
        assert_eq!(
            out.canonical_form(),
            core_of_loop(&g, &path(&g, "e2 e1"))
                .unwrap()
                .canonical_form()
        );
    }
}
