//! Serre-style graphs, paths and the three length functionals.

use std::fmt;

use thiserror::Error;

pub type Vertex = usize;

/// A directed edge. Geometric edge `g` carries the two directed edges `2g`
/// (its stored direction) and `2g + 1` (the reverse).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(pub u32);

impl Edge {
    pub fn new(geometric: usize, reversed: bool) -> Edge {
        Edge((geometric as u32) << 1 | reversed as u32)
    }

    pub fn geometric(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_reversed(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn reverse(self) -> Edge {
        Edge(self.0 ^ 1)
    }

    /// The stored direction of the same geometric edge.
    pub fn positive(self) -> Edge {
        Edge(self.0 & !1)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed path: edge {index} does not start where the previous edge ends")]
    MalformedPath { index: usize },
    #[error("edge {0:?} is not an edge of the graph")]
    UnknownEdge(Edge),
    #[error("vertex {0} is not a vertex of the graph")]
    UnknownVertex(Vertex),
    #[error("cyclic length is only defined for closed paths")]
    OpenPath,
    #[error("path must be closed, tight and nontrivial")]
    NotClosedTight,
    #[error("path must be nontrivial")]
    TrivialPath,
}

/// A finite graph. Vertices are `0..vertex_count`; each geometric edge stores
/// the endpoints of its stored direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    ends: Vec<[Vertex; 2]>,
    star: Vec<Vec<Edge>>,
}

impl Graph {
    pub fn new(vertex_count: usize, ends: Vec<[Vertex; 2]>) -> Result<Graph, GraphError> {
        let mut star = vec![Vec::new(); vertex_count];
        for (g, &[a, b]) in ends.iter().enumerate() {
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(GraphError::UnknownVertex(v));
                }
            }
            star[a].push(Edge::new(g, false));
            star[b].push(Edge::new(g, true));
        }
        for s in &mut star {
            s.sort();
        }
        Ok(Graph {
            vertex_count,
            ends,
            star,
        })
    }

    /// One vertex with `n` loops.
    pub fn rose(n: usize) -> Graph {
        Graph::new(1, vec![[0, 0]; n]).expect("rose is well formed")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.ends.len()
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = Edge> {
        (0..2 * self.ends.len() as u32).map(Edge)
    }

    pub fn geometric_ends(&self) -> &[[Vertex; 2]] {
        &self.ends
    }

    pub fn contains(&self, e: Edge) -> bool {
        e.geometric() < self.ends.len()
    }

    pub fn initial(&self, e: Edge) -> Vertex {
        self.ends[e.geometric()][e.is_reversed() as usize]
    }

    pub fn terminal(&self, e: Edge) -> Vertex {
        self.ends[e.geometric()][!e.is_reversed() as usize]
    }

    /// Directed edges with initial vertex `v`, sorted.
    pub fn star(&self, v: Vertex) -> &[Edge] {
        &self.star[v]
    }

    pub fn rank(&self) -> i64 {
        self.ends.len() as i64 - self.vertex_count as i64 + 1
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count == 0 {
            return true;
        }
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &e in &self.star[v] {
                let w = self.terminal(e);
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.vertex_count
    }
}

/// One chosen direction per geometric edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orientation {
    pub chosen: Vec<Edge>,
}

impl Orientation {
    /// The stored direction of every edge.
    pub fn standard(graph: &Graph) -> Orientation {
        Orientation {
            chosen: (0..graph.edge_count())
                .map(|g| Edge::new(g, false))
                .collect(),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.chosen
            .iter()
            .enumerate()
            .all(|(g, e)| e.geometric() == g)
    }
}

/// A path given by its endpoints and edge sequence. A trivial path carries its
/// vertex in both endpoints.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    start: Vertex,
    end: Vertex,
    edges: Vec<Edge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measure {
    pub l: usize,
    pub l_ab: usize,
    pub l_circ: Option<usize>,
}

impl Path {
    pub fn trivial(v: Vertex) -> Path {
        Path {
            start: v,
            end: v,
            edges: Vec::new(),
        }
    }

    pub fn edge(graph: &Graph, e: Edge) -> Path {
        Path {
            start: graph.initial(e),
            end: graph.terminal(e),
            edges: vec![e],
        }
    }

    /// Checks the edge chain. An empty list needs an explicit vertex, so use
    /// [`Path::trivial`] for that case.
    pub fn from_edges(graph: &Graph, edges: Vec<Edge>) -> Result<Path, GraphError> {
        let Some(&first) = edges.first() else {
            return Err(GraphError::TrivialPath);
        };
        for &e in &edges {
            if !graph.contains(e) {
                return Err(GraphError::UnknownEdge(e));
            }
        }
        for i in 1..edges.len() {
            if graph.terminal(edges[i - 1]) != graph.initial(edges[i]) {
                return Err(GraphError::MalformedPath { index: i });
            }
        }
        let end = graph.terminal(*edges.last().unwrap());
        Ok(Path {
            start: graph.initial(first),
            end,
            edges,
        })
    }

    /// Builds a path without checking the chain; the caller guarantees it.
    pub fn from_parts(start: Vertex, end: Vertex, edges: Vec<Edge>) -> Path {
        Path { start, end, edges }
    }

    pub fn start(&self) -> Vertex {
        self.start
    }

    pub fn end(&self) -> Vertex {
        self.end
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn into_edges(self) -> Vec<Edge> {
        self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.start == self.end
    }

    pub fn first(&self) -> Option<Edge> {
        self.edges.first().copied()
    }

    pub fn last(&self) -> Option<Edge> {
        self.edges.last().copied()
    }

    pub fn is_valid_in(&self, graph: &Graph) -> bool {
        if self.edges.is_empty() {
            return self.start == self.end && self.start < graph.vertex_count();
        }
        match Path::from_edges(graph, self.edges.clone()) {
            Ok(p) => p.start == self.start && p.end == self.end,
            Err(_) => false,
        }
    }

    pub fn is_tight(&self) -> bool {
        self.edges.windows(2).all(|w| w[1] != w[0].reverse())
    }

    /// Tight and, when closed, without cancellation around the basepoint.
    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_tight()
            && self.is_closed()
            && match (self.first(), self.last()) {
                (Some(a), Some(b)) => a != b.reverse(),
                _ => true,
            }
    }

    pub fn reverse(&self) -> Path {
        Path {
            start: self.end,
            end: self.start,
            edges: self.edges.iter().rev().map(|e| e.reverse()).collect(),
        }
    }

    pub fn concat(&self, other: &Path) -> Result<Path, GraphError> {
        if self.end != other.start {
            return Err(GraphError::MalformedPath { index: self.len() });
        }
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Ok(Path {
            start: self.start,
            end: other.end,
            edges,
        })
    }

    /// Appends `other`, cancelling at the junction.
    pub fn concat_tight(&self, other: &Path) -> Result<Path, GraphError> {
        if self.end != other.start {
            return Err(GraphError::MalformedPath { index: self.len() });
        }
        let mut edges = self.edges.clone();
        push_reduced(&mut edges, &other.edges);
        Ok(Path {
            start: self.start,
            end: other.end,
            edges,
        })
    }

    /// The tight path with the same endpoints, obtained by free reduction.
    pub fn tighten(&self) -> Path {
        let mut edges = Vec::with_capacity(self.edges.len());
        push_reduced(&mut edges, &self.edges);
        Path {
            start: self.start,
            end: self.end,
            edges,
        }
    }

    /// Subpath on edge positions `range`.
    pub fn subpath(&self, graph: &Graph, from: usize, to: usize) -> Path {
        assert!(from <= to && to <= self.len());
        if from == to {
            let v = if from == 0 {
                self.start
            } else {
                graph.terminal(self.edges[from - 1])
            };
            return Path::trivial(v);
        }
        Path {
            start: graph.initial(self.edges[from]),
            end: graph.terminal(self.edges[to - 1]),
            edges: self.edges[from..to].to_vec(),
        }
    }

    /// Vertex reached after `i` edges.
    pub fn vertex_at(&self, graph: &Graph, i: usize) -> Vertex {
        if i == 0 {
            self.start
        } else {
            graph.terminal(self.edges[i - 1])
        }
    }

    /// Cyclic rotation starting at edge position `i` (closed paths only).
    pub fn rotate(&self, graph: &Graph, i: usize) -> Path {
        assert!(self.is_closed());
        if self.is_empty() {
            return self.clone();
        }
        let i = i % self.len();
        let mut edges = self.edges[i..].to_vec();
        edges.extend_from_slice(&self.edges[..i]);
        let v = graph.initial(edges[0]);
        Path {
            start: v,
            end: v,
            edges,
        }
    }

    /// Cyclic reduction of the tightened path: strips cancelling pairs at the
    /// two ends. The result is closed at some vertex on the original.
    pub fn cyclic_reduction(&self, graph: &Graph) -> Result<Path, GraphError> {
        if !self.is_closed() {
            return Err(GraphError::OpenPath);
        }
        let t = self.tighten();
        let mut lo = 0;
        let mut hi = t.len();
        while hi >= lo + 2 && t.edges[lo] == t.edges[hi - 1].reverse() {
            lo += 1;
            hi -= 1;
        }
        Ok(t.subpath(graph, lo, hi))
    }

    /// Net signed crossing count per geometric edge.
    pub fn chain(&self, edge_count: usize) -> Vec<i64> {
        let mut c = vec![0i64; edge_count];
        for e in &self.edges {
            c[e.geometric()] += if e.is_reversed() { -1 } else { 1 };
        }
        c
    }

    pub fn l_ab(&self, orientation: &Orientation) -> usize {
        let c = self.chain(orientation.chosen.len());
        c.iter().map(|x| x.unsigned_abs() as usize).sum()
    }

    pub fn measure(&self, graph: &Graph, orientation: &Orientation) -> Measure {
        let l_circ = if self.is_closed() {
            Some(self.cyclic_reduction(graph).map(|p| p.len()).unwrap_or(0))
        } else {
            None
        };
        Measure {
            l: self.len(),
            l_ab: self.l_ab(orientation),
            l_circ,
        }
    }

    /// `(mu, m)` with `self = mu^m` and `mu` primitive.
    pub fn primitive_root(&self) -> Result<(Path, usize), GraphError> {
        if !self.is_closed() || !self.is_tight() || self.is_trivial() {
            return Err(GraphError::NotClosedTight);
        }
        let n = self.len();
        for p in 1..=n {
            if n.is_multiple_of(p) && (p..n).all(|i| self.edges[i] == self.edges[i - p]) {
                let mu = Path {
                    start: self.start,
                    end: self.start,
                    edges: self.edges[..p].to_vec(),
                };
                return Ok((mu, n / p));
            }
        }
        unreachable!("p = n always works")
    }

    /// `self` repeated `k` times (closed paths only).
    pub fn power(&self, k: usize) -> Path {
        assert!(self.is_closed());
        let mut edges = Vec::with_capacity(self.len() * k);
        for _ in 0..k {
            edges.extend_from_slice(&self.edges);
        }
        Path {
            start: self.start,
            end: self.end,
            edges,
        }
    }

    /// Position of the first occurrence of `needle` as a contiguous subpath.
    pub fn find(&self, needle: &[Edge]) -> Option<usize> {
        if needle.is_empty() {
            return Some(0);
        }
        self.edges.windows(needle.len()).position(|w| w == needle)
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> PathDisplay<'a> {
        PathDisplay { path: self, names }
    }
}

/// Appends `tail` to a reduced word, cancelling as it goes.
pub fn push_reduced(word: &mut Vec<Edge>, tail: &[Edge]) {
    for &e in tail {
        if word.last() == Some(&e.reverse()) {
            word.pop();
        } else {
            word.push(e);
        }
    }
}

/// Default geometric edge names `e1, e2, ...`.
pub fn default_names(edge_count: usize) -> Vec<String> {
    (1..=edge_count).map(|i| format!("e{i}")).collect()
}

pub fn edge_name(e: Edge, names: &[String]) -> String {
    let base = names
        .get(e.geometric())
        .cloned()
        .unwrap_or_else(|| format!("e{}", e.geometric() + 1));
    if e.is_reversed() {
        format!("~{base}")
    } else {
        base
    }
}

pub struct PathDisplay<'a> {
    path: &'a Path,
    names: &'a [String],
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_trivial() {
            return write!(f, "()");
        }
        for (i, &e) in self.path.edges.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", edge_name(e, self.names))?;
        }
        Ok(())
    }
}

/// Parses `e1 ~e2 ...` against `names`.
pub fn parse_edges(text: &str, names: &[String]) -> Option<Vec<Edge>> {
    text.split_whitespace()
        .map(|tok| {
            let (rev, name) = match tok.strip_prefix('~') {
                Some(rest) => (true, rest),
                None => (false, tok),
            };
            names
                .iter()
                .position(|n| n == name)
                .map(|g| Edge::new(g, rev))
        })
        .collect()
}
