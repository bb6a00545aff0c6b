//! Graphs labelled by a morphism to a base graph, the line and circle graphs of
//! a path, gluing, canonical forms and DOT export.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{edge_name, Edge, Graph, GraphError, Path, Vertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error("labels do not commute with the graph structure at edge {0}")]
    NotAMorphism(usize),
    #[error("parts are labelled over different base graphs")]
    BaseMismatch,
    #[error("glue point {0} joins vertices with different labels")]
    GlueMismatch(usize),
    #[error("every part needs an initial and a terminal point")]
    MissingEndpoint,
    #[error("nothing to combine")]
    Empty,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A graph `carrier` with a morphism to `base`. The label of the stored
/// direction of each geometric edge is kept; reverses follow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelledGraph {
    pub base: Arc<Graph>,
    pub carrier: Graph,
    pub vertex_label: Vec<Vertex>,
    pub edge_label: Vec<Edge>,
    pub initial_point: Option<Vertex>,
    pub terminal_point: Option<Vertex>,
}

impl LabelledGraph {
    pub fn new(
        base: Arc<Graph>,
        carrier: Graph,
        vertex_label: Vec<Vertex>,
        edge_label: Vec<Edge>,
    ) -> Result<LabelledGraph, LabelError> {
        let lg = LabelledGraph {
            base,
            carrier,
            vertex_label,
            edge_label,
            initial_point: None,
            terminal_point: None,
        };
        lg.check()?;
        Ok(lg)
    }

    /// The identity labelling of a graph over itself.
    pub fn identity(base: Arc<Graph>) -> LabelledGraph {
        let carrier = (*base).clone();
        let vertex_label = (0..carrier.vertex_count()).collect();
        let edge_label = (0..carrier.edge_count())
            .map(|g| Edge::new(g, false))
            .collect();
        LabelledGraph {
            base,
            carrier,
            vertex_label,
            edge_label,
            initial_point: None,
            terminal_point: None,
        }
    }

    pub fn with_points(
        mut self,
        initial: Option<Vertex>,
        terminal: Option<Vertex>,
    ) -> LabelledGraph {
        self.initial_point = initial;
        self.terminal_point = terminal;
        self
    }

    pub fn based(self, v: Vertex) -> LabelledGraph {
        self.with_points(Some(v), Some(v))
    }

    pub fn check(&self) -> Result<(), LabelError> {
        if self.vertex_label.len() != self.carrier.vertex_count()
            || self.edge_label.len() != self.carrier.edge_count()
        {
            return Err(LabelError::NotAMorphism(usize::MAX));
        }
        for (g, &[a, b]) in self.carrier.geometric_ends().iter().enumerate() {
            let l = self.edge_label[g];
            if !self.base.contains(l)
                || self.base.initial(l) != self.vertex_label[a]
                || self.base.terminal(l) != self.vertex_label[b]
            {
                return Err(LabelError::NotAMorphism(g));
            }
        }
        Ok(())
    }

    pub fn label(&self, e: Edge) -> Edge {
        let l = self.edge_label[e.geometric()];
        if e.is_reversed() {
            l.reverse()
        } else {
            l
        }
    }

    pub fn path_label(&self, p: &Path) -> Path {
        if p.is_trivial() {
            return Path::trivial(self.vertex_label[p.start()]);
        }
        Path::from_parts(
            self.vertex_label[p.start()],
            self.vertex_label[p.end()],
            p.edges().iter().map(|&e| self.label(e)).collect(),
        )
    }

    pub fn same_base(&self, other: &LabelledGraph) -> bool {
        Arc::ptr_eq(&self.base, &other.base) || *self.base == *other.base
    }

    /// Star maps injective at every vertex.
    pub fn is_immersion(&self) -> bool {
        self.folding_pair().is_none()
    }

    /// The first vertex (by id) carrying two distinct edges with equal label,
    /// with the lexicographically least such pair.
    pub fn folding_pair(&self) -> Option<(Vertex, Edge, Edge)> {
        for v in 0..self.carrier.vertex_count() {
            let mut seen: BTreeMap<Edge, Edge> = BTreeMap::new();
            let mut best: Option<(Edge, Edge)> = None;
            for &e in self.carrier.star(v) {
                if let Some(&d) = seen.get(&self.label(e)) {
                    let pair = (d, e);
                    if best.is_none_or(|b| pair < b) {
                        best = Some(pair);
                    }
                } else {
                    seen.insert(self.label(e), e);
                }
            }
            if let Some((a, b)) = best {
                return Some((v, a, b));
            }
        }
        None
    }

    /// Star maps bijective at every vertex.
    pub fn is_cover(&self) -> bool {
        self.is_immersion()
            && (0..self.carrier.vertex_count())
                .all(|v| self.carrier.star(v).len() == self.base.star(self.vertex_label[v]).len())
    }

    /// Number of carrier vertices over each base vertex.
    pub fn fiber_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.base.vertex_count()];
        for &l in &self.vertex_label {
            s[l] += 1;
        }
        s
    }

    /// Per-vertex lookup from base label to outgoing carrier edge (first one
    /// found for non-immersions).
    pub fn star_index(&self) -> StarIndex {
        let mut by_vertex = vec![Vec::new(); self.carrier.vertex_count()];
        for v in 0..self.carrier.vertex_count() {
            let mut entries: Vec<(Edge, Edge)> = self
                .carrier
                .star(v)
                .iter()
                .map(|&e| (self.label(e), e))
                .collect();
            entries.sort();
            entries.dedup_by_key(|x| x.0);
            by_vertex[v] = entries;
        }
        StarIndex { by_vertex }
    }

    /// Height: one more than the largest base geometric edge index crossed.
    pub fn height(&self) -> usize {
        self.edge_label
            .iter()
            .map(|l| l.geometric() + 1)
            .max()
            .unwrap_or(0)
    }

    /// Removes valence-one vertices repeatedly, keeping the marked points.
    pub fn trim(&self) -> LabelledGraph {
        let n = self.carrier.vertex_count();
        let mut alive_edge = vec![true; self.carrier.edge_count()];
        let mut degree: Vec<usize> = (0..n).map(|v| self.carrier.star(v).len()).collect();
        let keep = |v: Vertex| Some(v) == self.initial_point || Some(v) == self.terminal_point;
        let mut stack: Vec<Vertex> = (0..n).filter(|&v| degree[v] == 1 && !keep(v)).collect();
        let mut alive_vertex = vec![true; n];
        while let Some(v) = stack.pop() {
            if !alive_vertex[v] || degree[v] != 1 {
                continue;
            }
            let e = *self
                .carrier
                .star(v)
                .iter()
                .find(|e| alive_edge[e.geometric()])
                .unwrap();
            alive_edge[e.geometric()] = false;
            alive_vertex[v] = false;
            degree[v] = 0;
            let w = self.carrier.terminal(e);
            degree[w] -= 1;
            if degree[w] == 1 && !keep(w) {
                stack.push(w);
            }
        }
        for v in 0..n {
            if degree[v] == 0 && !keep(v) {
                alive_vertex[v] = false;
            }
        }
        if !alive_vertex.iter().any(|&a| a) {
            // a tree with no marked points trims to a single vertex
            alive_vertex[0] = true;
        }
        self.restrict(&alive_vertex, &alive_edge)
    }

    /// Subgraph on the given vertices and edges, renumbered in order.
    pub fn restrict(&self, keep_vertex: &[bool], keep_edge: &[bool]) -> LabelledGraph {
        let mut new_id = vec![usize::MAX; keep_vertex.len()];
        let mut vertex_label = Vec::new();
        for v in 0..keep_vertex.len() {
            if keep_vertex[v] {
                new_id[v] = vertex_label.len();
                vertex_label.push(self.vertex_label[v]);
            }
        }
        let mut ends = Vec::new();
        let mut edge_label = Vec::new();
        for (g, &[a, b]) in self.carrier.geometric_ends().iter().enumerate() {
            if keep_edge[g] {
                ends.push([new_id[a], new_id[b]]);
                edge_label.push(self.edge_label[g]);
            }
        }
        LabelledGraph {
            base: self.base.clone(),
            carrier: Graph::new(vertex_label.len(), ends)
                .expect("restriction keeps edge endpoints"),
            vertex_label,
            edge_label,
            initial_point: self.initial_point.map(|v| new_id[v]),
            terminal_point: self.terminal_point.map(|v| new_id[v]),
        }
    }

    /// Disjoint union; returns the vertex and edge offsets of `other`.
    pub fn disjoint_union(&self, other: &LabelledGraph) -> (LabelledGraph, usize, usize) {
        let vo = self.carrier.vertex_count();
        let eo = self.carrier.edge_count();
        let mut ends = self.carrier.geometric_ends().to_vec();
        ends.extend(
            other
                .carrier
                .geometric_ends()
                .iter()
                .map(|&[a, b]| [a + vo, b + vo]),
        );
        let mut vertex_label = self.vertex_label.clone();
        vertex_label.extend_from_slice(&other.vertex_label);
        let mut edge_label = self.edge_label.clone();
        edge_label.extend_from_slice(&other.edge_label);
        let lg = LabelledGraph {
            base: self.base.clone(),
            carrier: Graph::new(vertex_label.len(), ends).unwrap(),
            vertex_label,
            edge_label,
            initial_point: self.initial_point,
            terminal_point: self.terminal_point,
        };
        (lg, vo, eo)
    }

    /// Identifies vertices according to `classes` (a map to representatives
    /// in `0..count`), keeping every edge.
    pub fn quotient_vertices(&self, class: &[usize], count: usize) -> LabelledGraph {
        let mut vertex_label = vec![usize::MAX; count];
        for v in 0..class.len() {
            vertex_label[class[v]] = self.vertex_label[v];
        }
        let ends = self
            .carrier
            .geometric_ends()
            .iter()
            .map(|&[a, b]| [class[a], class[b]])
            .collect();
        LabelledGraph {
            base: self.base.clone(),
            carrier: Graph::new(count, ends).unwrap(),
            vertex_label,
            edge_label: self.edge_label.clone(),
            initial_point: self.initial_point.map(|v| class[v]),
            terminal_point: self.terminal_point.map(|v| class[v]),
        }
    }

    /// Adds a copy of `other` and identifies pairs `(v in self, w in other)`.
    /// Returns the glued graph and the new ids of `other`'s vertices.
    pub fn attach(
        &self,
        other: &LabelledGraph,
        glue: &[(Vertex, Vertex)],
    ) -> Result<(LabelledGraph, Vec<Vertex>), LabelError> {
        if !self.same_base(other) {
            return Err(LabelError::BaseMismatch);
        }
        let (u, vo, _) = self.disjoint_union(other);
        let mut uf = UnionFind::new(u.carrier.vertex_count());
        for (i, &(a, b)) in glue.iter().enumerate() {
            if u.vertex_label[a] != u.vertex_label[b + vo] {
                return Err(LabelError::GlueMismatch(i));
            }
            uf.union(a, b + vo);
        }
        let (class, count) = uf.classes();
        let q = u.quotient_vertices(&class, count);
        let map = (0..other.carrier.vertex_count())
            .map(|w| class[w + vo])
            .collect();
        Ok((q, map))
    }
}

#[derive(Clone, Debug)]
pub struct StarIndex {
    by_vertex: Vec<Vec<(Edge, Edge)>>,
}

impl StarIndex {
    pub fn step(&self, v: Vertex, label: Edge) -> Option<Edge> {
        let s = &self.by_vertex[v];
        s.binary_search_by_key(&label, |x| x.0).ok().map(|i| s[i].1)
    }
}

/// Union-find with path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Joins the classes, keeping the smaller root. Returns the new root.
    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        let (keep, drop) = if ra <= rb { (ra, rb) } else { (rb, ra) };
        self.parent[drop] = keep;
        keep
    }

    /// Dense class ids ordered by least member, and the number of classes.
    pub fn classes(&mut self) -> (Vec<usize>, usize) {
        let n = self.parent.len();
        let mut id = vec![usize::MAX; n];
        let mut class = vec![0; n];
        let mut count = 0;
        for x in 0..n {
            let r = self.find(x);
            if id[r] == usize::MAX {
                id[r] = count;
                count += 1;
            }
            class[x] = id[r];
        }
        (class, count)
    }
}

/// `L(rho)`: a subdivided interval whose tight crossing path reads `rho`,
/// end-pointed at its two ends.
pub fn line(base: &Arc<Graph>, rho: &Path) -> Result<LabelledGraph, LabelError> {
    if rho.is_trivial() {
        return Err(GraphError::TrivialPath.into());
    }
    let n = rho.len();
    let ends = (0..n).map(|i| [i, i + 1]).collect();
    let mut vertex_label: Vec<Vertex> = rho.edges().iter().map(|&e| base.initial(e)).collect();
    vertex_label.push(rho.end());
    let lg = LabelledGraph {
        base: base.clone(),
        carrier: Graph::new(n + 1, ends)?,
        vertex_label,
        edge_label: rho.edges().to_vec(),
        initial_point: Some(0),
        terminal_point: Some(n),
    };
    lg.check()?;
    Ok(lg)
}

/// `C(rho)`: the base-pointed circle obtained from `L(rho)` by identifying
/// its ends.
pub fn circle(base: &Arc<Graph>, rho: &Path) -> Result<LabelledGraph, LabelError> {
    if rho.is_trivial() {
        return Err(GraphError::TrivialPath.into());
    }
    if !rho.is_closed() {
        return Err(GraphError::OpenPath.into());
    }
    let n = rho.len();
    let ends = (0..n).map(|i| [i, (i + 1) % n]).collect();
    let vertex_label = rho.edges().iter().map(|&e| base.initial(e)).collect();
    let lg = LabelledGraph {
        base: base.clone(),
        carrier: Graph::new(n, ends)?,
        vertex_label,
        edge_label: rho.edges().to_vec(),
        initial_point: Some(0),
        terminal_point: Some(0),
    };
    lg.check()?;
    Ok(lg)
}

pub fn build_line_circle(
    base: &Arc<Graph>,
    rho: &Path,
) -> Result<(LabelledGraph, Option<LabelledGraph>), LabelError> {
    let l = line(base, rho)?;
    let c = if rho.is_closed() {
        Some(circle(base, rho)?)
    } else {
        None
    };
    Ok((l, c))
}

/// The tight path across an end-pointed graph when the carrier is a line:
/// walks from the initial point without backtracking.
pub fn read_across(lg: &LabelledGraph) -> Option<Path> {
    let start = lg.initial_point?;
    let target = lg.terminal_point?;
    let mut edges = Vec::new();
    let mut v = start;
    let mut prev: Option<Edge> = None;
    while v != target || (edges.is_empty() && lg.carrier.star(v).is_empty()) {
        let next: Vec<Edge> = lg
            .carrier
            .star(v)
            .iter()
            .copied()
            .filter(|&e| Some(e.reverse()) != prev)
            .collect();
        if next.len() != 1 || edges.len() > lg.carrier.edge_count() {
            return None;
        }
        edges.push(next[0]);
        prev = Some(next[0]);
        v = lg.carrier.terminal(next[0]);
    }
    if edges.is_empty() {
        return Some(Path::trivial(lg.vertex_label[start]));
    }
    Some(lg.path_label(&Path::from_parts(start, target, edges)))
}

/// Glues the parts end to start: `tau(H_i)` is identified with `iota(H_{i+1})`.
pub fn combine(parts: &[LabelledGraph]) -> Result<LabelledGraph, LabelError> {
    let (first, rest) = parts.split_first().ok_or(LabelError::Empty)?;
    let mut acc = first.clone();
    if acc.initial_point.is_none() || acc.terminal_point.is_none() {
        return Err(LabelError::MissingEndpoint);
    }
    for (i, p) in rest.iter().enumerate() {
        let (Some(pi), Some(pt)) = (p.initial_point, p.terminal_point) else {
            return Err(LabelError::MissingEndpoint);
        };
        let end = acc.terminal_point.unwrap();
        let (glued, map) = acc.attach(p, &[(end, pi)]).map_err(|e| match e {
            LabelError::GlueMismatch(_) => LabelError::GlueMismatch(i + 1),
            other => other,
        })?;
        acc = glued;
        acc.terminal_point = Some(map[pt]);
    }
    Ok(acc)
}

/// `combine` followed by identifying the outer initial and terminal points.
pub fn combine_based(parts: &[LabelledGraph]) -> Result<LabelledGraph, LabelError> {
    let g = combine(parts)?;
    let (a, b) = (g.initial_point.unwrap(), g.terminal_point.unwrap());
    if g.vertex_label[a] != g.vertex_label[b] {
        return Err(LabelError::GlueMismatch(parts.len()));
    }
    let mut uf = UnionFind::new(g.carrier.vertex_count());
    uf.union(a, b);
    let (class, count) = uf.classes();
    Ok(g.quotient_vertices(&class, count))
}

/// A canonical code for a connected immersion (or any labelled graph in which
/// no vertex has two edges with the same label). Two such graphs are labelled
/// isomorphic, preserving marked points, iff their codes are equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm(Vec<u64>);

impl LabelledGraph {
    fn code_from(&self, root: Vertex) -> (Vec<u64>, Vec<usize>) {
        let n = self.carrier.vertex_count();
        let mut order = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        order[root] = 0;
        queue.push_back(root);
        let mut next = 1;
        let mut code = vec![n as u64, self.carrier.edge_count() as u64];
        while let Some(v) = queue.pop_front() {
            let mut star: Vec<(Edge, Edge)> = self
                .carrier
                .star(v)
                .iter()
                .map(|&e| (self.label(e), e))
                .collect();
            star.sort();
            code.push(self.vertex_label[v] as u64);
            code.push(star.len() as u64);
            for (l, e) in star {
                let w = self.carrier.terminal(e);
                if order[w] == usize::MAX {
                    order[w] = next;
                    next += 1;
                    queue.push_back(w);
                }
                code.push(l.0 as u64);
                code.push(order[w] as u64);
            }
        }
        code.push(next as u64);
        for p in [self.initial_point, self.terminal_point] {
            code.push(match p {
                Some(v) if order[v] != usize::MAX => order[v] as u64 + 1,
                Some(_) => u64::MAX,
                None => 0,
            });
        }
        (code, order)
    }

    /// Canonical code and the vertex renumbering that realizes it.
    pub fn canonical(&self) -> (CanonicalForm, Vec<usize>) {
        let roots: Vec<Vertex> = match self.initial_point {
            Some(v) => vec![v],
            None => {
                let min_label = self.vertex_label.iter().copied().min();
                (0..self.carrier.vertex_count())
                    .filter(|&v| Some(self.vertex_label[v]) == min_label)
                    .collect()
            }
        };
        if roots.is_empty() {
            return (CanonicalForm(vec![0, 0]), Vec::new());
        }
        let (code, order) = roots.iter().map(|&r| self.code_from(r)).min().unwrap();
        (CanonicalForm(code), order)
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        self.canonical().0
    }

    /// Copy renumbered into canonical vertex order, edges sorted by
    /// `(initial, label)` of their stored direction.
    pub fn canonical_relabel(&self) -> LabelledGraph {
        let (_, order) = self.canonical();
        if order.contains(&usize::MAX) {
            return self.clone();
        }
        let mut vertex_label = vec![0; order.len()];
        for v in 0..order.len() {
            vertex_label[order[v]] = self.vertex_label[v];
        }
        let mut edges: Vec<([usize; 2], Edge)> = self
            .carrier
            .geometric_ends()
            .iter()
            .zip(&self.edge_label)
            .map(|(&[a, b], &l)| {
                let (a, b) = (order[a], order[b]);
                // store each edge in the direction leaving the smaller endpoint
                if (a, l) <= (b, l.reverse()) {
                    ([a, b], l)
                } else {
                    ([b, a], l.reverse())
                }
            })
            .collect();
        edges.sort_by_key(|&([a, b], l)| (a, l, b));
        LabelledGraph {
            base: self.base.clone(),
            carrier: Graph::new(order.len(), edges.iter().map(|x| x.0).collect()).unwrap(),
            vertex_label,
            edge_label: edges.iter().map(|x| x.1).collect(),
            initial_point: self.initial_point.map(|v| order[v]),
            terminal_point: self.terminal_point.map(|v| order[v]),
        }
    }
}

/// Labelled isomorphism by backtracking, valid for arbitrary labelled graphs
/// (no star-injectivity needed). Marked points must correspond.
pub fn labelled_isomorphic(a: &LabelledGraph, b: &LabelledGraph) -> bool {
    if !a.same_base(b)
        || a.carrier.vertex_count() != b.carrier.vertex_count()
        || a.carrier.edge_count() != b.carrier.edge_count()
        || a.initial_point.is_some() != b.initial_point.is_some()
        || a.terminal_point.is_some() != b.terminal_point.is_some()
    {
        return false;
    }
    let n = a.carrier.vertex_count();
    let signature = |g: &LabelledGraph, v: Vertex| {
        let mut s: Vec<Edge> = g.carrier.star(v).iter().map(|&e| g.label(e)).collect();
        s.sort();
        (g.vertex_label[v], s)
    };
    let sig_a: Vec<_> = (0..n).map(|v| signature(a, v)).collect();
    let sig_b: Vec<_> = (0..n).map(|v| signature(b, v)).collect();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn edges_between(g: &LabelledGraph, v: Vertex, w: Vertex) -> Vec<Edge> {
        let mut s: Vec<Edge> = g
            .carrier
            .star(v)
            .iter()
            .filter(|&&e| g.carrier.terminal(e) == w)
            .map(|&e| g.label(e))
            .collect();
        s.sort();
        s
    }
    fn consistent(a: &LabelledGraph, b: &LabelledGraph, map: &[usize], v: Vertex) -> bool {
        let w = map[v];
        (0..map.len())
            .filter(|&u| map[u] != usize::MAX)
            .all(|u| edges_between(a, v, u) == edges_between(b, w, map[u]))
    }
    fn search(
        a: &LabelledGraph,
        b: &LabelledGraph,
        sa: &[(Vertex, Vec<Edge>)],
        sb: &[(Vertex, Vec<Edge>)],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        order: &[Vertex],
        i: usize,
    ) -> bool {
        if i == order.len() {
            return true;
        }
        let v = order[i];
        if map[v] != usize::MAX {
            return consistent(a, b, map, v) && search(a, b, sa, sb, map, used, order, i + 1);
        }
        for w in 0..map.len() {
            if !used[w] && sa[v] == sb[w] {
                map[v] = w;
                used[w] = true;
                if consistent(a, b, map, v) && search(a, b, sa, sb, map, used, order, i + 1) {
                    return true;
                }
                map[v] = usize::MAX;
                used[w] = false;
            }
        }
        false
    }
    for (pa, pb) in [
        (a.initial_point, b.initial_point),
        (a.terminal_point, b.terminal_point),
    ] {
        if let (Some(x), Some(y)) = (pa, pb) {
            if sig_a[x] != sig_b[y]
                || (map[x] != usize::MAX && map[x] != y)
                || (map[x] == usize::MAX && used[y])
            {
                return false;
            }
            map[x] = y;
            used[y] = true;
        }
    }
    // visit vertices in BFS order so that constraints propagate early
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut q = VecDeque::from([s]);
        seen[s] = true;
        while let Some(v) = q.pop_front() {
            order.push(v);
            for &e in a.carrier.star(v) {
                let w = a.carrier.terminal(e);
                if !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
    }
    search(a, b, &sig_a, &sig_b, &mut map, &mut used, &order, 0)
}

/// DOT rendering. `names` names the base graph's geometric edges.
pub fn to_dot(lg: &LabelledGraph, names: &[String]) -> String {
    let mut s = String::from("digraph G {\n");
    for v in 0..lg.carrier.vertex_count() {
        let is_i = lg.initial_point == Some(v);
        let is_t = lg.terminal_point == Some(v);
        let shape = match (is_i, is_t) {
            (true, true) => "doublecircle",
            (true, false) => "box",
            (false, true) => "diamond",
            (false, false) => "circle",
        };
        writeln!(
            s,
            "  v{v} [shape={shape}, xlabel=\"{}\"];",
            lg.vertex_label[v]
        )
        .unwrap();
    }
    for (g, &[a, b]) in lg.carrier.geometric_ends().iter().enumerate() {
        writeln!(
            s,
            "  v{a} -> v{b} [label=\"{}\"];",
            edge_name(lg.edge_label[g], names)
        )
        .unwrap();
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::default_names;

    fn rose(n: usize) -> Arc<Graph> {
        Arc::new(Graph::rose(n))
    }

    fn path(base: &Graph, s: &str) -> Path {
        Path::from_edges(
            base,
            crate::graph::parse_edges(s, &default_names(base.edge_count())).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn line_and_circle_of_single_edge() {
        let g = rose(3);
        let (l, c) = build_line_circle(&g, &path(&g, "e1")).unwrap();
        assert_eq!((l.carrier.vertex_count(), l.carrier.edge_count()), (2, 1));
        let c = c.unwrap();
        assert_eq!((c.carrier.vertex_count(), c.carrier.edge_count()), (1, 1));
        assert!(c.is_immersion());
    }

    #[test]
    fn circle_immersion_check() {
        let g = rose(3);
        let c = circle(&g, &path(&g, "e1 e1")).unwrap();
        assert_eq!(c.carrier.vertex_count(), 2);
        assert!(c.is_immersion());
        let c = circle(&g, &path(&g, "e1 ~e1")).unwrap();
        assert!(!c.is_immersion());
        assert!(line(&g, &Path::trivial(0)).is_err());
    }

    #[test]
    fn reading_across_a_line() {
        let g = rose(3);
        let p = path(&g, "e2 ~e1 e3 e3");
        assert_eq!(read_across(&line(&g, &p).unwrap()), Some(p));
    }

    #[test]
    fn combine_examples() {
        let g = rose(3);
        let l1 = line(&g, &path(&g, "e1")).unwrap();
        let l2 = line(&g, &path(&g, "e2")).unwrap();
        let l12 = line(&g, &path(&g, "e1 e2")).unwrap();
        let c = combine(&[l1.clone(), l2.clone()]).unwrap();
        assert_eq!(c.canonical_form(), l12.canonical_form());
        assert!(labelled_isomorphic(&c, &l12));
        assert_eq!(combine(std::slice::from_ref(&l1)).unwrap(), l1);
        let spine = combine(&[
            l2.clone(),
            circle(&g, &path(&g, "e1")).unwrap(),
            line(&g, &path(&g, "~e2")).unwrap(),
        ])
        .unwrap();
        assert_eq!(
            (spine.carrier.vertex_count(), spine.carrier.edge_count()),
            (3, 3)
        );
        let based = combine_based(&[
            l2,
            circle(&g, &path(&g, "e1")).unwrap(),
            line(&g, &path(&g, "~e2")).unwrap(),
        ])
        .unwrap();
        assert_eq!(based.carrier.vertex_count(), 2);
        assert_eq!(based.initial_point, based.terminal_point);
    }

    #[test]
    fn combine_rejects_mismatched_glue() {
        let g = Arc::new(Graph::new(2, vec![[0, 1], [0, 0]]).unwrap());
        let a = line(&g, &Path::edge(&g, Edge::new(0, false))).unwrap();
        let b = line(&g, &Path::edge(&g, Edge::new(1, false))).unwrap();
        assert_eq!(combine(&[a, b]), Err(LabelError::GlueMismatch(1)));
    }

    #[test]
    fn canonical_form_ignores_numbering() {
        let g = rose(2);
        let c = circle(&g, &path(&g, "e1 e2 e2")).unwrap();
        let rotated = circle(&g, &path(&g, "e2 e1 e2")).unwrap();
        // different basepoints: not equal as based graphs, equal unbased
        assert_ne!(c.canonical_form(), rotated.canonical_form());
        let unbased = |x: &LabelledGraph| x.clone().with_points(None, None).canonical_form();
        assert_eq!(unbased(&c), unbased(&rotated));
        assert_eq!(c.canonical_relabel().canonical_form(), c.canonical_form());
    }

    #[test]
    fn trim_removes_hairs() {
        let g = rose(2);
        let h = line(&g, &path(&g, "e1 e2 e2"))
            .unwrap()
            .with_points(Some(0), Some(0));
        let t = h.trim();
        assert_eq!(t.carrier.vertex_count(), 1);
        assert_eq!(t.carrier.edge_count(), 0);
    }

    #[test]
    fn dot_marks_points() {
        let g = rose(3);
        let names = default_names(3);
        let l = line(&g, &path(&g, "e3 ~e1")).unwrap();
        let dot = to_dot(&l, &names);
        assert!(dot.contains("shape=box"));
        assert!(dot.contains("shape=diamond"));
        assert!(dot.contains("label=\"~e1\""));
        let c = circle(&g, &path(&g, "e3")).unwrap();
        assert!(to_dot(&c, &names).contains("doublecircle"));
        assert_eq!(to_dot(&c, &names), to_dot(&c, &names));
    }
}
