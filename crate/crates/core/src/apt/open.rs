//! End-pointed open immersions carrying a single path unit, and periodic
//! families carrying all of its iterates.

use std::collections::HashMap;
use std::sync::Arc;

use num_integer::Integer;

use crate::apt::stable::f_stable_period;
use crate::apt::DEFAULT_PERIOD_CAP;
use crate::apt::{
    base_component_graph, detach, edges_labelled, extend_components, valence, AptError,
    DEFAULT_INDEX_BOUND,
};
use crate::folding::{enumerate_covers, map_core, Lifter};
use crate::graph::{Edge, Graph, Path, Vertex};
use crate::labelled::{combine, line, LabelledGraph};
use crate::path_units::classify_piece;
use crate::rep::Efficient;

/// Longest subgroup orbit followed before giving up.
const ORBIT_CAP: usize = 512;

/// Edges of iterates lifted when re-checking a family over a second period.
const RECHECK_BUDGET: usize = 2_000_000;

/// How a piece meets its top edge `e_t`: `e_t gamma`, `gamma ~e_t`,
/// `e_t gamma ~e_t'`, only fixed edges, or none of these.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Fixed,
    Head(usize),
    Tail(usize),
    Both(usize, usize),
    Other,
}

pub fn shape(eff: &Efficient, alpha: &Path) -> Shape {
    let edges = alpha.edges();
    let Some(top) = edges.iter().map(|e| e.geometric()).max() else {
        return Shape::Other;
    };
    if edges.iter().all(|e| eff.rep.map.is_fixed(e.geometric())) {
        return Shape::Fixed;
    }
    let et = Edge::new(top, false);
    let head = edges[0] == et;
    let tail = edges[edges.len() - 1] == et.reverse() && (edges.len() >= 2 || !head);
    let from = usize::from(head);
    let to = edges.len() - usize::from(tail);
    if edges[from..to].iter().any(|e| e.geometric() == top) {
        return Shape::Other;
    }
    match (head, tail) {
        (true, true) => Shape::Both(top, top),
        (true, false) => Shape::Head(top),
        (false, true) => Shape::Tail(top),
        (false, false) => Shape::Other,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OpenConfig {
    pub index_bound: usize,
    pub period_cap: usize,
}

impl Default for OpenConfig {
    fn default() -> Self {
        OpenConfig {
            index_bound: DEFAULT_INDEX_BOUND,
            period_cap: DEFAULT_PERIOD_CAP,
        }
    }
}

/// An end-pointed immersion with its f-period.
#[derive(Clone, Debug)]
pub struct OpenImmersion {
    pub graph: LabelledGraph,
    pub period: usize,
}

/// `Gamma^0 ... Gamma^{q-1}` for one piece: `f^j_#(alpha)` labels a path
/// across `Gamma^{j mod q}` for every `j`.
#[derive(Clone, Debug)]
pub struct OpenFamily {
    pub alpha: Path,
    pub shape: Shape,
    pub q: usize,
    /// Index of the subgroup whose orbit was used (1 for detached graphs).
    pub index: usize,
    pub orbit: usize,
    pub graphs: Vec<LabelledGraph>,
}

impl OpenFamily {
    pub fn at(&self, j: usize) -> &LabelledGraph {
        &self.graphs[j % self.q]
    }
}

/// Families for a list of pieces, padded to a common period `q`.
#[derive(Clone, Debug)]
pub struct PeriodicOpenImmersions {
    pub q: usize,
    pub families: Vec<OpenFamily>,
}

fn require_tight(alpha: &Path) -> Result<(), AptError> {
    if alpha.is_trivial() || !alpha.is_tight() {
        return Err(AptError::Domain(
            "an open immersion needs a nontrivial tight path".into(),
        ));
    }
    Ok(())
}

/// A single vertex over `x` with both points on it.
fn point(base: &Arc<Graph>, x: Vertex) -> LabelledGraph {
    LabelledGraph {
        base: base.clone(),
        carrier: Graph::new(1, Vec::new()).unwrap(),
        vertex_label: vec![x],
        edge_label: Vec::new(),
        initial_point: Some(0),
        terminal_point: Some(0),
    }
}

/// `Gamma = (L(e_a), P, L(~e_b))` with `P` a cover of the component of the
/// edges of lower degree containing `gamma`, extended from `L(gamma)`.
pub fn can_open(eff: &Efficient, alpha: &Path, cap: usize) -> Result<OpenImmersion, AptError> {
    require_tight(alpha)?;
    let d = eff.path_degree(alpha);
    let unit =
        classify_piece(eff, alpha, d).ok_or_else(|| AptError::Domain("not a path unit".into()))?;
    let base = &eff.rep.graph;
    let allowed: Vec<bool> = (0..eff.rep.edge_count()).map(|g| g < eff.l(d)).collect();
    let core = if unit.gamma.is_trivial() {
        point(base, unit.gamma.start())
    } else {
        line(base, &unit.gamma)?
    };
    let p = extend_components(&core, &allowed, |_| true);
    let mut parts = Vec::new();
    if let Some(a) = unit.a {
        parts.push(line(base, &Path::edge(base, Edge::new(a, false)))?);
    }
    parts.push(p);
    if let Some(b) = unit.b {
        parts.push(line(base, &Path::edge(base, Edge::new(b, true)))?);
    }
    let graph = combine(&parts)?;
    let sh = match (unit.a, unit.b) {
        (Some(a), Some(b)) => Shape::Both(a, b),
        (Some(a), None) => Shape::Head(a),
        _ => Shape::Tail(unit.b.unwrap()),
    };
    let period = f_stable_period(&eff.rep.map, &graph, cap)
        .period()
        .ok_or_else(|| AptError::Construction("the open immersion is not f-stable".into()))?;
    check_open(eff, alpha, sh, &graph, 0)?;
    Ok(OpenImmersion { graph, period })
}

/// Properties (1), (2) and (4) for `f^j_#(alpha)` across `g`.
pub fn check_open(
    eff: &Efficient,
    alpha: &Path,
    sh: Shape,
    g: &LabelledGraph,
    j: usize,
) -> Result<(), AptError> {
    let (Some(i), Some(t)) = (g.initial_point, g.terminal_point) else {
        return Err(AptError::Construction(
            "open immersion without end points".into(),
        ));
    };
    if !g.is_immersion() {
        return Err(AptError::Construction(
            "open graph is not an immersion".into(),
        ));
    }
    if i == t {
        return Err(AptError::Construction(
            "open graph has equal end points".into(),
        ));
    }
    let (vi, vt) = match sh {
        Shape::Head(_) => (true, false),
        Shape::Tail(_) => (false, true),
        Shape::Both(..) => (true, true),
        _ => (false, false),
    };
    if (vi && valence(g, i) != 1) || (vt && valence(g, t) != 1) {
        return Err(AptError::Construction(
            "an end point of the open graph has valence above 1".into(),
        ));
    }
    let p = eff.rep.map.iterate(alpha, j);
    if Lifter::new(g).endpoint(i, p.edges()) != Some(t) {
        return Err(AptError::Construction(format!(
            "f^{j} of the piece does not cross the open graph"
        )));
    }
    Ok(())
}

/// The component `G'` as a standalone graph and its covers relabelled over
/// the base.
struct Component {
    graph: LabelledGraph,
    standalone: Arc<Graph>,
}

impl Component {
    fn new(base: &Arc<Graph>, allowed: &[bool], x: Vertex) -> Component {
        let graph = base_component_graph(base, allowed, x);
        let standalone = Arc::new(graph.carrier.clone());
        Component { graph, standalone }
    }

    fn vertex_over(&self, x: Vertex) -> Vertex {
        self.graph
            .vertex_label
            .iter()
            .position(|&l| l == x)
            .expect("component contains the vertex")
    }

    fn relabel(&self, cover: &LabelledGraph) -> LabelledGraph {
        LabelledGraph {
            base: self.graph.base.clone(),
            carrier: cover.carrier.clone(),
            vertex_label: cover
                .vertex_label
                .iter()
                .map(|&v| self.graph.vertex_label[v])
                .collect(),
            edge_label: cover
                .edge_label
                .iter()
                .map(|&e| self.graph.label(e))
                .collect(),
            initial_point: None,
            terminal_point: None,
        }
    }

    fn rank(&self) -> usize {
        (self.graph.carrier.edge_count() + 1).saturating_sub(self.graph.carrier.vertex_count())
    }
}

/// Sheet count of a cover of a component: the common fiber size.
fn sheets(cover: &LabelledGraph) -> Option<usize> {
    let mut sizes: HashMap<Vertex, usize> = HashMap::new();
    for &l in &cover.vertex_label {
        *sizes.entry(l).or_default() += 1;
    }
    let mut it = sizes.values();
    let s = *it.next()?;
    it.all(|&x| x == s).then_some(s)
}

/// A cover `Delta'` with its base vertex, detached along the given labels.
struct Detached {
    graph: LabelledGraph,
    fresh: HashMap<(usize, Vertex), Vertex>,
}

fn detach_all(cover: &LabelledGraph, labels: &[Edge]) -> Detached {
    let mut g = cover.clone();
    let mut fresh = HashMap::new();
    let mut done: Vec<usize> = Vec::new();
    for &l in labels {
        if done.contains(&l.geometric()) {
            continue;
        }
        done.push(l.geometric());
        let edges = edges_labelled(&g, l);
        let origins: Vec<Vertex> = edges
            .iter()
            .map(|&e| {
                let [a, b] = g.carrier.geometric_ends()[e];
                if g.edge_label[e] == l {
                    a
                } else {
                    b
                }
            })
            .collect();
        let (next, new) = detach(&g, &edges, l);
        for (o, w) in origins.into_iter().zip(new) {
            fresh.insert((l.geometric(), o), w);
        }
        g = next;
    }
    Detached { graph: g, fresh }
}

/// End points of `Gamma` for a lift from `b` to `c` in the undetached cover.
fn end_points(sh: Shape, det: &Detached, b: Vertex, c: Vertex) -> (Vertex, Vertex) {
    let i = match sh {
        Shape::Head(a) | Shape::Both(a, _) => det.fresh[&(a, b)],
        _ => b,
    };
    let t = match sh {
        Shape::Tail(x) | Shape::Both(_, x) => det.fresh[&(x, c)],
        _ => c,
    };
    (i, t)
}

fn detach_labels(sh: Shape) -> Vec<Edge> {
    match sh {
        Shape::Head(a) => vec![Edge::new(a, false)],
        Shape::Tail(b) => vec![Edge::new(b, false)],
        Shape::Both(a, b) => vec![Edge::new(a, false), Edge::new(b, false)],
        _ => Vec::new(),
    }
}

/// Candidate base covers of `G'` with a vertex over `x` from which `alpha`
/// gives distinct end points: the component itself, then small covers in
/// order of index, then the completion of `L(alpha)`.
fn first_cover(
    eff: &Efficient,
    comp: &Component,
    allowed: &[bool],
    alpha: &Path,
    sh: Shape,
    config: &OpenConfig,
) -> Result<(LabelledGraph, Vertex, usize), AptError> {
    let x = alpha.start();
    let labels = detach_labels(sh);
    let opens = |cover: &LabelledGraph, b: Vertex| -> bool {
        let Some(c) = Lifter::new(cover).endpoint(b, alpha.edges()) else {
            return false;
        };
        let det = detach_all(cover, &labels);
        let (i, t) = end_points(sh, &det, b, c);
        i != t
    };
    let g1 = comp.graph.clone().with_points(None, None);
    let b1 = comp.vertex_over(x);
    if opens(&g1, b1) {
        return Ok((g1, b1, 1));
    }
    let r = comp.rank() as u32;
    for s in 2..=config.index_bound.min(crate::folding::DEFAULT_COVER_BOUND) {
        let tables = (1..=s as u128).product::<u128>().saturating_pow(r);
        if tables > 50_000 {
            break;
        }
        for cover in enumerate_covers(&comp.standalone, s, crate::folding::DEFAULT_COVER_BOUND)? {
            let cover = comp.relabel(&cover);
            for b in (0..cover.carrier.vertex_count()).filter(|&v| cover.vertex_label[v] == x) {
                if opens(&cover, b) {
                    return Ok((cover, b, s));
                }
            }
        }
    }
    let l = line(&eff.rep.graph, alpha)?;
    let b = l.initial_point.unwrap();
    let cover = extend_components(&l, allowed, |_| true).with_points(None, None);
    let s = sheets(&cover)
        .ok_or_else(|| AptError::Construction("completion of the line is not a cover".into()))?;
    if s > config.index_bound {
        return Err(AptError::Resource(format!(
            "subgroup index {s} exceeds the bound {}",
            config.index_bound
        )));
    }
    if !opens(&cover, b) {
        return Err(AptError::Construction(
            "the completed line does not open the piece".into(),
        ));
    }
    Ok((cover, b, s))
}

fn based_form(cover: &LabelledGraph, b: Vertex) -> crate::labelled::CanonicalForm {
    cover.clone().with_points(Some(b), Some(b)).canonical_form()
}

/// The periodic family of one piece. Detached components are used for
/// pieces `e_a gamma`, `gamma ~e_b` and `e_a gamma ~e_b` with `a != b`; when
/// the piece closes up in `G'` a finite-index subgroup missing it is found
/// and its orbit under the automorphism is followed.
pub fn open_family(
    eff: &Efficient,
    alpha: &Path,
    config: &OpenConfig,
) -> Result<OpenFamily, AptError> {
    require_tight(alpha)?;
    let base = &eff.rep.graph;
    let map = &eff.rep.map;
    let sh = shape(eff, alpha);
    if sh == Shape::Fixed {
        let l = line(base, alpha)?;
        return Ok(OpenFamily {
            alpha: alpha.clone(),
            shape: sh,
            q: 1,
            index: 1,
            orbit: 1,
            graphs: vec![l],
        });
    }
    let top = alpha.edges().iter().map(|e| e.geometric()).max().unwrap();
    let allowed: Vec<bool> = (0..eff.rep.edge_count()).map(|g| g <= top).collect();
    let comp = Component::new(base, &allowed, alpha.start());
    let (delta0, b0, index) = first_cover(eff, &comp, &allowed, alpha, sh, config)?;
    // the orbit of the subgroup at b0 under the automorphism
    let mut covers = vec![(delta0.clone(), b0)];
    let first = based_form(&delta0, b0);
    loop {
        let (d, b) = covers.last().unwrap();
        let core = d.clone().with_points(Some(*b), Some(*b)).trim();
        let img = map_core(&core, &|e| map.image(e), &|v| v)?;
        let next = extend_components(&img, &allowed, |_| true);
        if sheets(&next) != Some(index) {
            return Err(AptError::Construction(
                "image subgroup has a different index".into(),
            ));
        }
        let nb = next.initial_point.unwrap();
        let next = next.with_points(None, None);
        let form = based_form(&next, nb);
        if form == first {
            break;
        }
        if covers.iter().any(|(c, v)| based_form(c, *v) == form) {
            return Err(AptError::Construction(
                "subgroup orbit is not periodic".into(),
            ));
        }
        if covers.len() >= ORBIT_CAP {
            return Err(AptError::Resource(format!(
                "subgroup orbit longer than {ORBIT_CAP}"
            )));
        }
        covers.push((next, nb));
    }
    let orbit = covers.len();
    let labels = detach_labels(sh);
    let detached: Vec<Detached> = covers.iter().map(|(c, _)| detach_all(c, &labels)).collect();
    let mut q = orbit;
    for det in &detached {
        let p = f_stable_period(map, &det.graph, config.period_cap)
            .period()
            .ok_or_else(|| AptError::Construction("a detached cover is not f-stable".into()))?;
        q = q.lcm(&p);
    }
    let mut graphs = Vec::with_capacity(q);
    let mut ends = Vec::with_capacity(q);
    let mut cur = alpha.clone();
    let mut total = 0usize;
    for j in 0..2 * q {
        let i = j % orbit;
        let (cover, b) = &covers[i];
        let c = Lifter::new(cover)
            .endpoint(*b, cur.edges())
            .ok_or_else(|| {
                AptError::Construction(format!("f^{j} of the piece does not lift to the cover"))
            })?;
        let (s, t) = end_points(sh, &detached[i], *b, c);
        if j < q {
            graphs.push(detached[i].graph.clone().with_points(Some(s), Some(t)));
            ends.push((s, t));
            check_open(eff, alpha, sh, &graphs[j], j)?;
        } else if ends[j - q] != (s, t) {
            return Err(AptError::Construction(format!(
                "family is not periodic at j = {j}"
            )));
        }
        total += cur.len();
        if j + 1 >= q && total > RECHECK_BUDGET {
            break;
        }
        cur = map.apply(&cur);
    }
    Ok(OpenFamily {
        alpha: alpha.clone(),
        shape: sh,
        q,
        index,
        orbit,
        graphs,
    })
}

/// Families for each piece, with `q` the lcm of their periods.
pub fn periodic_open_immersions(
    eff: &Efficient,
    units: &[Path],
    config: &OpenConfig,
) -> Result<PeriodicOpenImmersions, AptError> {
    let families = units
        .iter()
        .map(|u| open_family(eff, u, config))
        .collect::<Result<Vec<_>, _>>()?;
    let q = families.iter().fold(1usize, |acc, f| acc.lcm(&f.q));
    Ok(PeriodicOpenImmersions { q, families })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apt::testing::eff;
    use crate::rep::tests::{E1, E2};

    #[test]
    fn shapes() {
        let e = eff(E1);
        let p = |t: &str| e.rep.path(t).unwrap();
        assert_eq!(shape(&e, &p("e3")), Shape::Head(2));
        assert_eq!(shape(&e, &p("e3 e1 ~e3")), Shape::Both(2, 2));
        assert_eq!(shape(&e, &p("e1 ~e3")), Shape::Tail(2));
        assert_eq!(shape(&e, &p("e1 e1")), Shape::Fixed);
        assert_eq!(shape(&e, &p("e1 e2 e1")), Shape::Other);
    }

    #[test]
    fn head_piece_detaches_with_period_one() {
        let e = eff(E1);
        let fam = open_family(&e, &e.rep.path("e3").unwrap(), &OpenConfig::default()).unwrap();
        assert_eq!((fam.q, fam.index, fam.orbit), (1, 1, 1));
        let g = &fam.graphs[0];
        assert_eq!(g.carrier.vertex_count(), 2);
        assert_eq!(valence(g, g.initial_point.unwrap()), 1);
    }

    #[test]
    fn closed_unit_uses_index_two() {
        let e = eff(E1);
        let alpha = e.rep.path("e3 e1 ~e3").unwrap();
        let fam = open_family(&e, &alpha, &OpenConfig::default()).unwrap();
        assert_eq!(fam.index, 2);
        for j in 0..2 * fam.q {
            check_open(&e, &alpha, fam.shape, fam.at(j), j).unwrap();
            let p = f_stable_period(&e.rep.map, fam.at(j), DEFAULT_PERIOD_CAP)
                .period()
                .unwrap();
            assert_eq!(fam.q % p, 0);
        }
    }

    #[test]
    fn backtracking_unit_is_rejected() {
        let e = eff(E1);
        let p = Path::from_parts(0, 0, vec![Edge::new(2, false), Edge::new(2, true)]);
        assert!(matches!(
            open_family(&e, &p, &OpenConfig::default()),
            Err(AptError::Domain(_))
        ));
    }

    #[test]
    fn tail_pieces_of_e2_open() {
        let e = eff(E2);
        let (plus, minus) = crate::apt::tails(&e, 2, 12).unwrap();
        for piece in plus.pieces.iter().chain(&minus.pieces) {
            let fam = open_family(&e, piece, &OpenConfig::default()).unwrap();
            for j in 0..fam.q {
                check_open(&e, piece, fam.shape, fam.at(j), j).unwrap();
            }
        }
    }

    #[test]
    fn can_open_units_of_e1() {
        let e = eff(E1);
        for t in ["e3", "e3 e1 ~e3", "e1 ~e3", "e3 e2 e1"] {
            let alpha = e.rep.path(t).unwrap();
            if classify_piece(&e, &alpha, 2).is_none() {
                continue;
            }
            match can_open(&e, &alpha, DEFAULT_PERIOD_CAP) {
                Ok(o) => assert!(o.period >= 1),
                Err(AptError::Construction(m)) => panic!("{t}: {m}"),
                Err(other) => panic!("{t}: {other}"),
            }
        }
    }

    #[test]
    fn corollary_pads_to_common_period() {
        let e = eff(E1);
        let units = vec![e.rep.path("e3").unwrap(), e.rep.path("e3 e1 ~e3").unwrap()];
        let poi = periodic_open_immersions(&e, &units, &OpenConfig::default()).unwrap();
        assert!(poi.families.iter().all(|f| poi.q.is_multiple_of(f.q)));
    }
}
