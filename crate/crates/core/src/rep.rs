//! Improved relative train track representatives with single-edge strata:
//! parsing and validation, iteration of `f_#`, growth degrees, the reverse
//! map and the degree bound.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::fit::fit_degree;
use crate::graph::{edge_name, push_reduced, Edge, Graph, Path};

pub const DEFAULT_PROBE_DEPTH: usize = 8;
pub const DEFAULT_PERIOD_BOUND: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("filtration error: the suffix of {edge} crosses {offending}, which is not below it")]
    Filtration { edge: String, offending: String },
    #[error("vertex moved: the image of {edge} does not end where {edge} ends")]
    VertexMoved { edge: String },
    #[error(
        "splitting error: iterating the suffix of {edge} cancels at a junction at depth {depth}"
    )]
    Splitting { edge: String, depth: usize },
    #[error("the suffix of {edge} is not a tight closed path")]
    BadSuffix { edge: String },
    #[error("graph is not connected")]
    Disconnected,
    #[error("edges cannot be reordered by degree while keeping suffixes below their edges")]
    NonEfficient,
    #[error("growth degree {eta} is not below the rank {rank}")]
    DegreeTooLarge { eta: usize, rank: i64 },
    #[error("reverse map check failed at {edge}")]
    ReverseCheck { edge: String },
    #[error("path error: {0}")]
    Path(String),
}

/// A vertex-fixing graph self-map with `f(e_i) = e_i u_i` for non-fixed
/// edges, `u_i` a closed path in lower edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuffixMap {
    pub graph: Arc<Graph>,
    pub suffix: Vec<Option<Path>>,
}

impl SuffixMap {
    pub fn image(&self, e: Edge) -> Path {
        let g = e.geometric();
        let pos = Edge::new(g, false);
        let img = match &self.suffix[g] {
            None => Path::edge(&self.graph, pos),
            Some(u) => Path::edge(&self.graph, pos)
                .concat(u)
                .expect("suffix starts at the terminal vertex"),
        };
        if e.is_reversed() {
            img.reverse()
        } else {
            img
        }
    }

    /// `f_#`: substitute and tighten.
    pub fn apply(&self, p: &Path) -> Path {
        let mut out = Vec::with_capacity(p.len() * 2);
        for &e in p.edges() {
            let g = e.geometric();
            match (&self.suffix[g], e.is_reversed()) {
                (None, _) => push_reduced(&mut out, &[e]),
                (Some(u), false) => {
                    push_reduced(&mut out, &[e]);
                    push_reduced(&mut out, u.edges());
                }
                (Some(u), true) => {
                    let r = u.reverse();
                    push_reduced(&mut out, r.edges());
                    push_reduced(&mut out, &[e]);
                }
            }
        }
        Path::from_parts(p.start(), p.end(), out)
    }

    /// `f^k_#` by repeated substitution. Kept as the reference procedure.
    pub fn iterate_naive(&self, p: &Path, k: usize) -> Path {
        let mut cur = p.tighten();
        for _ in 0..k {
            cur = self.apply(&cur);
        }
        cur
    }

    /// `f^n_#(e_g)` for the stored direction of `g`, built as
    /// `e_g u f_#(u) ... f^{n-1}_#(u)` with the iterates of `u` computed
    /// incrementally.
    pub fn power_image(&self, g: usize, n: usize) -> Path {
        let pos = Edge::new(g, false);
        let mut acc = vec![pos];
        if let Some(u) = &self.suffix[g] {
            let mut cur = u.clone();
            for j in 0..n {
                if j > 0 {
                    cur = self.apply(&cur);
                }
                push_reduced(&mut acc, cur.edges());
            }
        }
        Path::from_parts(self.graph.initial(pos), self.graph.terminal(pos), acc)
    }

    pub fn power_map(&self, n: usize) -> Vec<Path> {
        (0..self.graph.edge_count())
            .map(|g| self.power_image(g, n))
            .collect()
    }

    /// `f^n_#(p)` using the images `f^n(e)` of single edges.
    pub fn iterate(&self, p: &Path, n: usize) -> Path {
        if n == 0 {
            return p.tighten();
        }
        let images = self.power_map(n);
        substitute(&images, p)
    }

    /// Successive iterates `f^k_#(p)` for `k = 0..=k_max`.
    pub fn orbit(&self, p: &Path, k_max: usize) -> Vec<Path> {
        let mut out = vec![p.tighten()];
        for _ in 0..k_max {
            let next = self.apply(out.last().unwrap());
            out.push(next);
        }
        out
    }

    pub fn is_fixed(&self, g: usize) -> bool {
        self.suffix[g].is_none()
    }
}

/// Tightened substitution of per-edge images into a path.
pub fn substitute(images: &[Path], p: &Path) -> Path {
    let mut out = Vec::new();
    for &e in p.edges() {
        let img = &images[e.geometric()];
        if e.is_reversed() {
            let r: Vec<Edge> = img.edges().iter().rev().map(|d| d.reverse()).collect();
            push_reduced(&mut out, &r);
        } else {
            push_reduced(&mut out, img.edges());
        }
    }
    Path::from_parts(p.start(), p.end(), out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NielsenStatus {
    Nielsen,
    Periodic(usize),
    No,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representative {
    pub name: String,
    pub graph: Arc<Graph>,
    pub vertex_names: Vec<String>,
    pub edge_names: Vec<String>,
    pub map: SuffixMap,
    pub warnings: Vec<String>,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let content = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in content
        .char_indices()
        .chain(std::iter::once((content.len(), ' ')))
    {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &content[s..i],
                    column: content[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    out
}

impl Representative {
    /// Parses the `.rep` text format and validates the result.
    pub fn parse(text: &str) -> Result<Representative, RepError> {
        Representative::parse_with(text, DEFAULT_PROBE_DEPTH)
    }

    pub fn parse_with(text: &str, probe_depth: usize) -> Result<Representative, RepError> {
        let err = |line: usize, column: usize, message: String| RepError::Parse {
            line,
            column,
            message,
        };
        let mut name: Option<String> = None;
        let mut vertex_names: Option<Vec<String>> = None;
        let mut edges: Vec<(String, String, String)> = Vec::new();
        let mut edge_lines: Vec<usize> = Vec::new();
        let mut maps: BTreeMap<usize, (usize, Vec<(String, usize)>)> = BTreeMap::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let ln = idx + 1;
            last_line = ln;
            let toks = tokens(raw);
            let Some(head) = toks.first() else { continue };
            match head.text {
                "rep" if name.is_none() => {
                    if toks.len() != 2 {
                        return Err(err(ln, head.column, "expected `rep <name>`".into()));
                    }
                    name = Some(toks[1].text.to_string());
                }
                _ if name.is_none() => {
                    return Err(err(ln, head.column, "expected `rep <name>` first".into()))
                }
                "vertices" => {
                    if vertex_names.is_some() || !edges.is_empty() {
                        return Err(err(
                            ln,
                            head.column,
                            "`vertices` must appear once, before edges".into(),
                        ));
                    }
                    if toks.len() < 2 {
                        return Err(err(ln, head.column, "no vertices listed".into()));
                    }
                    let names: Vec<String> = toks[1..].iter().map(|t| t.text.to_string()).collect();
                    for (i, t) in toks[1..].iter().enumerate() {
                        if names[..i].contains(&names[i]) {
                            return Err(err(
                                ln,
                                t.column,
                                format!("duplicate vertex `{}`", t.text),
                            ));
                        }
                    }
                    vertex_names = Some(names);
                }
                "edge" => {
                    if toks.len() != 6 || toks[2].text != ":" || toks[4].text != "->" {
                        return Err(err(
                            ln,
                            head.column,
                            "expected `edge <id> : <v> -> <v>`".into(),
                        ));
                    }
                    let id = toks[1].text;
                    if id.starts_with('~') {
                        return Err(err(
                            ln,
                            toks[1].column,
                            "edge ids may not start with `~`".into(),
                        ));
                    }
                    if edges.iter().any(|e| e.0 == id) {
                        return Err(err(ln, toks[1].column, format!("duplicate edge `{id}`")));
                    }
                    if !maps.is_empty() {
                        return Err(err(ln, head.column, "edges must precede map lines".into()));
                    }
                    let vs = vertex_names.get_or_insert_with(|| vec!["v0".to_string()]);
                    for t in [&toks[3], &toks[5]] {
                        if !vs.iter().any(|v| v == t.text) {
                            return Err(err(ln, t.column, format!("unknown vertex `{}`", t.text)));
                        }
                    }
                    edges.push((
                        id.to_string(),
                        toks[3].text.to_string(),
                        toks[5].text.to_string(),
                    ));
                    edge_lines.push(ln);
                }
                "map" => {
                    if toks.len() < 4 || toks[2].text != "->" {
                        return Err(err(
                            ln,
                            head.column,
                            "expected `map <id> -> <id> ...`".into(),
                        ));
                    }
                    let Some(g) = edges.iter().position(|e| e.0 == toks[1].text) else {
                        return Err(err(
                            ln,
                            toks[1].column,
                            format!("unknown edge `{}`", toks[1].text),
                        ));
                    };
                    if toks[3].text != toks[1].text {
                        return Err(err(
                            ln,
                            toks[3].column,
                            format!("image must begin with `{}`", toks[1].text),
                        ));
                    }
                    if maps.contains_key(&g) {
                        return Err(err(
                            ln,
                            head.column,
                            format!("second map line for `{}`", toks[1].text),
                        ));
                    }
                    let rest = toks[4..]
                        .iter()
                        .map(|t| (t.text.to_string(), t.column))
                        .collect();
                    maps.insert(g, (ln, rest));
                }
                other => return Err(err(ln, head.column, format!("unexpected `{other}`"))),
            }
        }
        let name = name.ok_or_else(|| err(1, 1, "missing `rep <name>`".into()))?;
        let vertex_names = vertex_names.unwrap_or_else(|| vec!["v0".to_string()]);
        if edges.is_empty() {
            return Err(err(last_line.max(1), 1, "no edges".into()));
        }
        let vid = |s: &str| vertex_names.iter().position(|v| v == s).unwrap();
        let ends = edges.iter().map(|(_, a, b)| [vid(a), vid(b)]).collect();
        let graph = Arc::new(
            Graph::new(vertex_names.len(), ends).map_err(|e| RepError::Path(e.to_string()))?,
        );
        let edge_names: Vec<String> = edges.iter().map(|e| e.0.clone()).collect();
        let mut suffix = Vec::with_capacity(edges.len());
        for g in 0..edges.len() {
            let Some((ln, toks)) = maps.get(&g) else {
                return Err(err(
                    edge_lines[g],
                    1,
                    format!("no map line for `{}`", edge_names[g]),
                ));
            };
            if toks.is_empty() {
                suffix.push(None);
                continue;
            }
            let mut es = Vec::with_capacity(toks.len());
            for (t, col) in toks {
                let (rev, base) = match t.strip_prefix('~') {
                    Some(r) => (true, r),
                    None => (false, t.as_str()),
                };
                let Some(h) = edge_names.iter().position(|n| n == base) else {
                    return Err(err(*ln, *col, format!("unknown edge `{base}`")));
                };
                es.push(Edge::new(h, rev));
            }
            let pos = Edge::new(g, false);
            let mut chain = vec![pos];
            chain.extend_from_slice(&es);
            if let Err(crate::graph::GraphError::MalformedPath { index }) =
                Path::from_edges(&graph, chain)
            {
                return Err(err(
                    *ln,
                    toks[index - 1].1,
                    "image is not an edge path".into(),
                ));
            }
            let u = Path::from_edges(&graph, es).unwrap();
            suffix.push(Some(u));
        }
        let rep = Representative {
            name,
            graph: graph.clone(),
            vertex_names,
            edge_names,
            map: SuffixMap { graph, suffix },
            warnings: Vec::new(),
        };
        rep.validated(probe_depth)
    }

    /// Checks the shape conditions and spot-checks splitting and Nielsen
    /// periods; collects non-fatal findings in `warnings`.
    pub fn validated(mut self, probe_depth: usize) -> Result<Representative, RepError> {
        if !self.graph.is_connected() {
            return Err(RepError::Disconnected);
        }
        let mut warnings = Vec::new();
        for v in 0..self.graph.vertex_count() {
            if self.graph.star(v).len() < 2 {
                warnings.push(format!(
                    "vertex {} has valence {}",
                    self.vertex_names[v],
                    self.graph.star(v).len()
                ));
            }
        }
        for g in 0..self.graph.edge_count() {
            let Some(u) = &self.map.suffix[g] else {
                continue;
            };
            let name = self.edge_names[g].clone();
            let pos = Edge::new(g, false);
            if u.start() != self.graph.terminal(pos) || u.end() != self.graph.terminal(pos) {
                return Err(RepError::VertexMoved { edge: name });
            }
            if let Some(bad) = u.edges().iter().find(|e| e.geometric() >= g) {
                return Err(RepError::Filtration {
                    edge: name,
                    offending: self.edge_names[bad.geometric()].clone(),
                });
            }
            if !u.is_tight() {
                return Err(RepError::BadSuffix { edge: name });
            }
            let mut prev = u.clone();
            for depth in 1..=probe_depth {
                let next = self.map.apply(&prev);
                if next.is_trivial() || prev.last() == next.first().map(|e| e.reverse()) {
                    return Err(RepError::Splitting { edge: name, depth });
                }
                prev = next;
            }
            if let NielsenStatus::Periodic(k) = self.is_nielsen(u, DEFAULT_PERIOD_BOUND) {
                warnings.push(format!(
                    "suffix of {name} is a periodic Nielsen path of period {k}"
                ));
            }
        }
        self.warnings = warnings;
        Ok(self)
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn rank(&self) -> i64 {
        self.graph.rank()
    }

    pub fn suffix(&self, g: usize) -> Option<&Path> {
        self.map.suffix[g].as_ref()
    }

    pub fn edge_by_name(&self, name: &str) -> Option<usize> {
        self.edge_names.iter().position(|n| n == name)
    }

    /// Parses `e1 ~e2 ...` in this representative's edge names; the empty
    /// string is not accepted.
    pub fn path(&self, text: &str) -> Result<Path, RepError> {
        let edges = crate::graph::parse_edges(text, &self.edge_names)
            .ok_or_else(|| RepError::Path(format!("unknown edge in `{text}`")))?;
        Path::from_edges(&self.graph, edges).map_err(|e| RepError::Path(e.to_string()))
    }

    pub fn show(&self, p: &Path) -> String {
        p.display(&self.edge_names).to_string()
    }

    pub fn f_sharp(&self, p: &Path, k: usize) -> Path {
        self.map.iterate(p, k)
    }

    pub fn is_nielsen(&self, p: &Path, period_bound: usize) -> NielsenStatus {
        nielsen_status(&self.map, p, period_bound)
    }

    /// Height: one more than the largest edge index crossed, 0 if trivial.
    pub fn height(&self, p: &Path) -> usize {
        p.edges()
            .iter()
            .map(|e| e.geometric() + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn growth_samples(&self, p: &Path, k_max: usize) -> Vec<u64> {
        self.map
            .orbit(p, k_max)
            .iter()
            .map(|q| q.len() as u64)
            .collect()
    }

    /// The same map with edges renumbered: position `i` holds old edge
    /// `order[i]`. Requires suffixes to stay below their edges.
    pub fn reordered(&self, order: &[usize]) -> Result<Representative, RepError> {
        let n = self.edge_count();
        let mut new_of_old = vec![0; n];
        for (i, &g) in order.iter().enumerate() {
            new_of_old[g] = i;
        }
        let ren = |e: Edge| Edge::new(new_of_old[e.geometric()], e.is_reversed());
        let ends = order
            .iter()
            .map(|&g| self.graph.geometric_ends()[g])
            .collect();
        let graph = Arc::new(Graph::new(self.graph.vertex_count(), ends).unwrap());
        let suffix: Vec<Option<Path>> = order
            .iter()
            .map(|&g| {
                self.map.suffix[g].as_ref().map(|u| {
                    Path::from_parts(
                        u.start(),
                        u.end(),
                        u.edges().iter().map(|&e| ren(e)).collect(),
                    )
                })
            })
            .collect();
        for (i, s) in suffix.iter().enumerate() {
            if let Some(u) = s {
                if u.edges().iter().any(|e| e.geometric() >= i) {
                    return Err(RepError::NonEfficient);
                }
            }
        }
        Ok(Representative {
            name: self.name.clone(),
            graph: graph.clone(),
            vertex_names: self.vertex_names.clone(),
            edge_names: order.iter().map(|&g| self.edge_names[g].clone()).collect(),
            map: SuffixMap { graph, suffix },
            warnings: self.warnings.clone(),
        })
    }

    /// The `.rep` text of this representative.
    pub fn emit(&self) -> String {
        let mut s = format!("rep {}\n", self.name);
        if self.vertex_names != ["v0"] {
            writeln!(s, "vertices {}", self.vertex_names.join(" ")).unwrap();
        }
        for (g, &[a, b]) in self.graph.geometric_ends().iter().enumerate() {
            writeln!(
                s,
                "edge {} : {} -> {}",
                self.edge_names[g], self.vertex_names[a], self.vertex_names[b]
            )
            .unwrap();
        }
        for g in 0..self.edge_count() {
            let img = self.map.image(Edge::new(g, false));
            writeln!(s, "map {} -> {}", self.edge_names[g], self.show(&img)).unwrap();
        }
        s
    }

    pub fn edge_label(&self, e: Edge) -> String {
        edge_name(e, &self.edge_names)
    }
}

pub fn nielsen_status(map: &SuffixMap, p: &Path, period_bound: usize) -> NielsenStatus {
    let p = p.tighten();
    let mut cur = p.clone();
    for k in 1..=period_bound.max(1) {
        cur = map.apply(&cur);
        if cur == p {
            return if k == 1 {
                NielsenStatus::Nielsen
            } else {
                NielsenStatus::Periodic(k)
            };
        }
        if cur.len() > p.len() * 4 + 16 {
            break;
        }
    }
    NielsenStatus::No
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiltrationInfo {
    /// Degree of each edge, indexed by the input numbering.
    pub degrees: Vec<usize>,
    /// Efficient order: position `i` holds input edge `order[i]`.
    pub order: Vec<usize>,
    /// `L_1 ... L_{eta+1}` as 0-based positions in the efficient order.
    pub breakpoints: Vec<usize>,
    pub eta: usize,
    pub violations: Vec<String>,
}

impl FiltrationInfo {
    pub fn to_json(&self, rep: &Representative) -> serde_json::Value {
        let degrees: serde_json::Map<String, serde_json::Value> = (0..rep.edge_count())
            .map(|g| (rep.edge_names[g].clone(), self.degrees[g].into()))
            .collect();
        serde_json::json!({
            "degrees": degrees,
            "eta": self.eta,
            "breakpoints": self.breakpoints.iter().map(|b| b + 1).collect::<Vec<_>>(),
        })
    }
}

/// Edge growth degrees by induction up the filtration, the efficient
/// reordering and its breakpoints.
pub fn analyze_growth(rep: &Representative) -> Result<FiltrationInfo, RepError> {
    let n = rep.edge_count();
    let mut degrees = vec![0usize; n];
    for g in 0..n {
        degrees[g] = match rep.suffix(g) {
            None => 0,
            Some(u) => match rep.is_nielsen(u, DEFAULT_PERIOD_BOUND) {
                NielsenStatus::Nielsen | NielsenStatus::Periodic(_) => 1,
                NielsenStatus::No => {
                    1 + u
                        .edges()
                        .iter()
                        .map(|e| degrees[e.geometric()])
                        .max()
                        .unwrap_or(0)
                        .max(1)
                }
            },
        };
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&g| degrees[g]);
    let reordered = rep.reordered(&order)?;
    let eta = degrees.iter().copied().max().unwrap_or(0);
    let sorted: Vec<usize> = order.iter().map(|&g| degrees[g]).collect();
    let breakpoints: Vec<usize> = (1..=eta + 1)
        .map(|j| sorted.iter().position(|&d| d >= j).unwrap_or(n))
        .collect();
    let mut violations = Vec::new();
    for j in 2..=eta {
        let (lo, hi) = (breakpoints[j - 1], breakpoints[j]);
        for i in lo..hi {
            if let Some(u) = reordered.suffix(i) {
                if u.edges().iter().any(|e| e.geometric() >= lo) {
                    violations.push(format!(
                        "suffix of {} leaves the subgraph below degree {j}",
                        reordered.edge_names[i]
                    ));
                }
            }
        }
    }
    if eta >= 1 && eta as i64 >= rep.rank() {
        return Err(RepError::DegreeTooLarge {
            eta,
            rank: rep.rank(),
        });
    }
    Ok(FiltrationInfo {
        degrees,
        order,
        breakpoints,
        eta,
        violations,
    })
}

/// A representative in efficient order together with its growth data.
#[derive(Clone, Debug)]
pub struct Efficient {
    pub rep: Representative,
    /// Degree of each edge in the efficient numbering.
    pub degree: Vec<usize>,
    /// `L_1 ... L_{eta+1}`, 0-based.
    pub breakpoints: Vec<usize>,
    pub eta: usize,
}

impl Efficient {
    pub fn new(rep: &Representative) -> Result<Efficient, RepError> {
        let info = analyze_growth(rep)?;
        let reordered = rep.reordered(&info.order)?;
        let degree = info.order.iter().map(|&g| info.degrees[g]).collect();
        Ok(Efficient {
            rep: reordered,
            degree,
            breakpoints: info.breakpoints,
            eta: info.eta,
        })
    }

    /// `L_j` for `j >= 1` (0-based position); `L_j = n` beyond `eta`.
    pub fn l(&self, j: usize) -> usize {
        if j == 0 {
            return 0;
        }
        self.breakpoints
            .get(j - 1)
            .copied()
            .unwrap_or(self.rep.edge_count())
    }

    pub fn is_linear_edge(&self, g: usize) -> bool {
        self.degree[g] == 1
    }

    /// Degree of a path: the largest degree among its edges.
    pub fn path_degree(&self, p: &Path) -> usize {
        p.edges()
            .iter()
            .map(|e| self.degree[e.geometric()])
            .max()
            .unwrap_or(0)
    }
}

/// Degree of each edge measured by fitting the lengths of its iterates.
pub fn fitted_edge_degrees(rep: &Representative, k_max: usize) -> Vec<Option<usize>> {
    (0..rep.edge_count())
        .map(|g| {
            let seq: Vec<u64> = (0..=k_max)
                .map(|k| rep.map.power_image(g, k).len() as u64)
                .collect();
            fit_degree(&seq)
        })
        .collect()
}

/// The reverse map: `fbar(e_i) = e_i v_i` where `v_i` is the tight path with
/// `f_#(v_i) = reverse(u_i)`.
pub fn reverse_rep(rep: &Representative) -> Result<SuffixMap, RepError> {
    let n = rep.edge_count();
    let mut rev = SuffixMap {
        graph: rep.graph.clone(),
        suffix: vec![None; n],
    };
    for g in 0..n {
        let Some(u) = rep.suffix(g) else { continue };
        let target = u.reverse();
        let v = rev.apply(&target);
        if rep.map.apply(&v) != target {
            return Err(RepError::ReverseCheck {
                edge: rep.edge_names[g].clone(),
            });
        }
        rev.suffix[g] = Some(v);
    }
    Ok(rev)
}

/// Minimal number of degree classes certified by breakpoints alone: fixed
/// edges first, then a block of edges with Nielsen suffixes, then blocks
/// whose suffixes lie below the block. Blocks are grown greedily, which is
/// optimal because a larger prefix only relaxes later constraints.
pub fn degree_bound(rep: &Representative) -> usize {
    let n = rep.edge_count();
    let mut placed = vec![false; n];
    let below = |u: &Path, placed: &[bool]| u.edges().iter().all(|e| placed[e.geometric()]);
    for g in 0..n {
        if rep.suffix(g).is_none() {
            placed[g] = true;
        }
    }
    let mut remaining = placed.iter().filter(|&&p| !p).count();
    if remaining == 0 {
        return 0;
    }
    let nielsen: Vec<bool> = (0..n)
        .map(|g| {
            rep.suffix(g)
                .is_some_and(|u| rep.is_nielsen(u, DEFAULT_PERIOD_BOUND) == NielsenStatus::Nielsen)
        })
        .collect();
    // linear block: closure under "suffix Nielsen and below what is placed"
    loop {
        let next =
            (0..n).find(|&g| !placed[g] && nielsen[g] && below(rep.suffix(g).unwrap(), &placed));
        match next {
            Some(g) => {
                placed[g] = true;
                remaining -= 1;
            }
            None => break,
        }
    }
    let mut classes = 1;
    while remaining > 0 {
        let block: Vec<usize> = (0..n)
            .filter(|&g| !placed[g] && below(rep.suffix(g).unwrap(), &placed))
            .collect();
        if block.is_empty() {
            // suffix containment always allows the next edge in input order
            unreachable!("a suffix lies below its edge");
        }
        for g in block {
            placed[g] = true;
            remaining -= 1;
        }
        classes += 1;
    }
    classes
}

/// The rotation of a cyclically reduced circuit whose initial edge is
/// `e_h` or whose terminal edge is `reverse(e_h)`, but not both. Returns the
/// rotation and whether the fallback rule was used.
pub fn well_chosen(rep: &Representative, circuit: &Path) -> Result<(Path, bool), RepError> {
    if !circuit.is_cyclically_reduced() || circuit.is_trivial() {
        return Err(RepError::Path(
            "well-chosen rotation needs a nontrivial cyclically reduced circuit".into(),
        ));
    }
    let h = rep.height(circuit) - 1;
    let eh = Edge::new(h, false);
    let n = circuit.len();
    for i in 0..n {
        let r = circuit.rotate(&rep.graph, i);
        let a = r.first() == Some(eh);
        let b = r.last() == Some(eh.reverse());
        if a != b {
            return Ok((r, false));
        }
    }
    let i = circuit
        .edges()
        .iter()
        .position(|&e| e == eh || e == eh.reverse())
        .expect("circuit crosses its top edge");
    Ok((circuit.rotate(&rep.graph, i), true))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub const E1: &str = "rep E1\nedge e1 : v0 -> v0\nedge e2 : v0 -> v0\nedge e3 : v0 -> v0\nmap e1 -> e1\nmap e2 -> e2 e1\nmap e3 -> e3 e1 e2\n";
    pub const E2: &str = "rep E2\nedge a : v0 -> v0\nedge b : v0 -> v0\nedge c : v0 -> v0\nmap a -> a\nmap b -> b a\nmap c -> c b b a ~b ~b ~a\n";

    fn e1() -> Representative {
        Representative::parse(E1).unwrap()
    }

    #[test]
    fn parses_examples() {
        let r = e1();
        assert_eq!(r.edge_names, vec!["e1", "e2", "e3"]);
        assert!(r.warnings.is_empty());
        let r2 = Representative::parse(E2).unwrap();
        assert_eq!(r2.show(r2.suffix(2).unwrap()), "b b a ~b ~b ~a");
    }

    #[test]
    fn parse_errors_have_positions() {
        let bad = "rep X\nedge e1 : v0 -> v0\nmap e1 -> e1 e9\n";
        match Representative::parse(bad) {
            Err(RepError::Parse {
                line: 3,
                column: 14,
                ..
            }) => {}
            other => panic!("{other:?}"),
        }
        let bad = "rep X\nedge e1 : v0 -> v1\n";
        assert!(matches!(
            Representative::parse(bad),
            Err(RepError::Parse {
                line: 2,
                column: 17,
                ..
            })
        ));
        let bad = "rep X\nedge e1 : v0 -> v0\nmap e1 -> e2\n";
        assert!(matches!(
            Representative::parse(bad),
            Err(RepError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn filtration_error() {
        let bad = "rep X\nedge e1 : v0 -> v0\nedge e2 : v0 -> v0\nedge e3 : v0 -> v0\nmap e1 -> e1\nmap e2 -> e2 e3\nmap e3 -> e3\n";
        assert!(matches!(
            Representative::parse(bad),
            Err(RepError::Filtration { .. })
        ));
    }

    #[test]
    fn vertex_moved_error() {
        let bad = "rep X\nvertices v0 v1\nedge e1 : v0 -> v1\nedge e2 : v1 -> v0\nedge e3 : v0 -> v0\nmap e1 -> e1\nmap e2 -> e2\nmap e3 -> e3 e1\n";
        assert!(matches!(
            Representative::parse(bad),
            Err(RepError::VertexMoved { .. })
        ));
    }

    #[test]
    fn splitting_error() {
        // u = e2 e1 ~e2 is Nielsen, so u f_#(u) cancels at the junction
        let bad = "rep X\nedge e1 : v0 -> v0\nedge e2 : v0 -> v0\nedge e3 : v0 -> v0\nmap e1 -> e1\nmap e2 -> e2 e1\nmap e3 -> e3 e2 e1 ~e2\n";
        assert!(matches!(
            Representative::parse(bad),
            Err(RepError::Splitting { .. })
        ));
    }

    #[test]
    fn iteration_examples() {
        let r = e1();
        let e3 = r.path("e3").unwrap();
        assert_eq!(r.show(&r.f_sharp(&e3, 1)), "e3 e1 e2");
        assert_eq!(r.show(&r.f_sharp(&e3, 2)), "e3 e1 e2 e1 e2 e1");
        for k in 0..8 {
            for text in ["e3", "e2 ~e3 e1", "~e3 ~e2 e3 e3"] {
                let p = r.path(text).unwrap();
                assert_eq!(r.f_sharp(&p, k), r.map.iterate_naive(&p, k));
            }
        }
        let n = r.path("e2 e1 ~e2").unwrap();
        assert_eq!(r.f_sharp(&n, 5), n);
    }

    #[test]
    fn nielsen_examples() {
        let r = e1();
        assert_eq!(
            r.is_nielsen(&r.path("e1").unwrap(), 12),
            NielsenStatus::Nielsen
        );
        assert_eq!(
            r.is_nielsen(&r.path("e2 e1 ~e2").unwrap(), 12),
            NielsenStatus::Nielsen
        );
        assert_eq!(r.is_nielsen(&r.path("e2").unwrap(), 12), NielsenStatus::No);
    }

    #[test]
    fn growth_degrees() {
        let info = analyze_growth(&e1()).unwrap();
        assert_eq!((info.degrees.clone(), info.eta), (vec![0, 1, 2], 2));
        assert_eq!(info.breakpoints, vec![1, 2, 3]);
        let info = analyze_growth(&Representative::parse(E2).unwrap()).unwrap();
        assert_eq!((info.degrees, info.eta), (vec![0, 1, 2], 2));
        let id = Representative::parse(
            "rep id\nedge a : v0 -> v0\nedge b : v0 -> v0\nmap a -> a\nmap b -> b\n",
        )
        .unwrap();
        let info = analyze_growth(&id).unwrap();
        assert_eq!((info.degrees, info.eta), (vec![0, 0], 0));
    }

    #[test]
    fn reordering_puts_fixed_edges_first() {
        let r = Representative::parse("rep R\nedge a : v0 -> v0\nedge b : v0 -> v0\nedge c : v0 -> v0\nmap a -> a\nmap b -> b a\nmap c -> c\n").unwrap();
        let eff = Efficient::new(&r).unwrap();
        assert_eq!(eff.rep.edge_names, vec!["a", "c", "b"]);
        assert_eq!(eff.degree, vec![0, 0, 1]);
        assert_eq!(eff.breakpoints, vec![2, 3]);
    }

    #[test]
    fn growth_sample_examples() {
        let r = e1();
        assert_eq!(
            r.growth_samples(&r.path("e3").unwrap(), 4),
            vec![1, 3, 6, 10, 15]
        );
        assert_eq!(
            r.growth_samples(&r.path("e2").unwrap(), 3),
            vec![1, 2, 3, 4]
        );
        assert_eq!(
            r.growth_samples(&r.path("e1").unwrap(), 3),
            vec![1, 1, 1, 1]
        );
        let fitted = fitted_edge_degrees(&r, 12);
        assert_eq!(fitted, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn reverse_map_examples() {
        let r = e1();
        let rev = reverse_rep(&r).unwrap();
        let e3 = r.path("e3").unwrap();
        assert_eq!(r.show(&rev.apply(&e3)), "e3 e1 ~e2 ~e1");
        assert_eq!(r.show(&rev.iterate(&e3, 2)), "e3 e1 ~e2 e1 ~e2 ~e1");
        assert_eq!(r.show(&rev.apply(&r.path("e2").unwrap())), "e2 ~e1");
        let p = r.path("e3 ~e2 e1 e3").unwrap();
        assert_eq!(r.map.apply(&rev.apply(&p)), p);
        assert_eq!(rev.apply(&r.map.apply(&p)), p);
    }

    #[test]
    fn degree_bound_examples() {
        assert_eq!(degree_bound(&e1()), 2);
        assert_eq!(degree_bound(&Representative::parse(E2).unwrap()), 2);
        let id = Representative::parse("rep id\nedge a : v0 -> v0\nmap a -> a\n").unwrap();
        assert_eq!(degree_bound(&id), 0);
    }

    #[test]
    fn well_chosen_rotations() {
        let r = e1();
        let (w, fallback) = well_chosen(&r, &r.path("e3").unwrap()).unwrap();
        assert_eq!((r.show(&w), fallback), ("e3".to_string(), false));
        let (w, _) = well_chosen(&r, &r.path("e1 e3").unwrap()).unwrap();
        assert_eq!(r.show(&w), "e3 e1");
        let (w, _) = well_chosen(&r, &r.path("e3 e1 ~e3 e2").unwrap()).unwrap();
        assert_eq!(r.show(&w), "e3 e1 ~e3 e2");
        let (w, _) = well_chosen(&r, &r.path("e1 ~e3").unwrap()).unwrap();
        assert_eq!(r.show(&w), "e1 ~e3");
    }

    #[test]
    fn emit_round_trip() {
        for text in [E1, E2] {
            let r = Representative::parse(text).unwrap();
            let again = Representative::parse(&r.emit()).unwrap();
            assert_eq!(again, r);
        }
    }
}
