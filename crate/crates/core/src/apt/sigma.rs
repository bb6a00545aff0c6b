//! The non-linear `Sigma` constructions: tree extension, the four quadratic
//! cases and the recursion for path units of degree at least 3.

use std::collections::VecDeque;

use num_integer::Integer;

use crate::apt::linear::{build_lambda, linear_q};
use crate::apt::open::{open_family, OpenConfig, OpenFamily};
use crate::apt::stable::{f_stable_period, Stability};
use crate::apt::tails::{tails, Tail};
use crate::apt::{
    extend_components, fits, sample_lifts, valence, AptError, Sample, DEFAULT_MAX_SHEETS,
    DEFAULT_PERIOD_CAP, K_MAX_NONLINEAR,
};
use crate::folding::{fold, Lifter};
use crate::graph::{Graph, Path, Vertex};
use crate::growth_units::Units;
use crate::labelled::{circle, combine, line, LabelledGraph};
use crate::path_units::{canonical_f_split, classify_piece, PathUnit, UnitType};
use crate::rep::{Efficient, DEFAULT_PROBE_DEPTH};

#[derive(Clone, Copy, Debug)]
pub struct SigmaConfig {
    pub k_max: usize,
    /// Largest fiber of `Sigma` over a base vertex that is accepted.
    pub max_sheets: usize,
    pub period_cap: usize,
    pub index_bound: usize,
    /// Number of small parameter choices tried after the literal ones.
    pub search_width: usize,
}

impl Default for SigmaConfig {
    fn default() -> Self {
        SigmaConfig {
            k_max: K_MAX_NONLINEAR,
            max_sheets: DEFAULT_MAX_SHEETS,
            period_cap: DEFAULT_PERIOD_CAP,
            index_bound: crate::apt::DEFAULT_INDEX_BOUND,
            search_width: 6,
        }
    }
}

impl SigmaConfig {
    fn open(&self) -> OpenConfig {
        OpenConfig {
            index_bound: self.index_bound,
            period_cap: self.period_cap,
        }
    }
}

/// Which construction was used. The quadratic cases compare `h(u_a)`,
/// `h(u_b)` and `h(alpha')` after orienting so that `h(u_a) >= h(u_b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SigmaCase {
    /// `h(u_a) = h(u_b) >= h(alpha')`.
    Quadratic1,
    /// `h(u_a) > h(u_b)` and `h(u_a) >= h(alpha')`, or type (ii) with `h(u_a) >= h(gamma)`.
    Quadratic2,
    /// `h(alpha') > h(u_a) = h(u_b)`.
    Quadratic3,
    /// `h(alpha') > h(u_a) > h(u_b)`, or type (ii) with `h(gamma) > h(u_a)`.
    Quadratic4,
    /// Degree at least 3.
    Recursive,
}

/// Parameters of one attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SigmaParams {
    /// Path units of each tail prefix.
    pub l: usize,
    /// `q_1` for a linear `Lambda`; `None` for the least admissible value.
    pub q1: Option<usize>,
    /// Powers of the circles in the attachment cascade; `None` for the
    /// diameter bound.
    pub cascade: Option<usize>,
    pub literal: bool,
}

/// `Sigma` for a path unit with the verification samples.
#[derive(Clone, Debug)]
pub struct PathUnitSigma {
    pub alpha: Path,
    pub unit: PathUnit,
    pub case: SigmaCase,
    pub params: SigmaParams,
    /// Whether the construction ran on the reverse of `alpha`.
    pub reversed: bool,
    pub q: usize,
    pub sigma: LabelledGraph,
    pub samples: Vec<Sample>,
    pub l_fit: Option<usize>,
    pub l_ab_fit: Option<usize>,
    /// Failures of earlier attempts, in order.
    pub rejected: Vec<String>,
}

impl PathUnitSigma {
    pub fn max_fiber(&self) -> usize {
        max_fiber(&self.sigma)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "case": self.case,
            "params": self.params,
            "reversed": self.reversed,
            "q": self.q,
            "vertices": self.sigma.carrier.vertex_count(),
            "edges": self.sigma.carrier.edge_count(),
            "max_fiber": self.max_fiber(),
            "l_fit": self.l_fit,
            "l_ab_fit": self.l_ab_fit,
            "samples": self.samples,
            "rejected": self.rejected,
        })
    }
}

pub fn max_fiber(g: &LabelledGraph) -> usize {
    g.fiber_sizes().into_iter().max().unwrap_or(0)
}

fn top(p: &Path) -> Option<usize> {
    p.edges().iter().map(|e| e.geometric()).max()
}

/// Whether a vertex of `t` should be extended to a cover when no allowed
/// edge meets it: always unless it is an end whose edge leaves it along a
/// reversed edge outside the allowed part.
fn wants_cover(t: &LabelledGraph, allowed: &[bool], v: Vertex) -> bool {
    if valence(t, v) != 1 {
        return true;
    }
    let l = t.label(t.carrier.star(v)[0]);
    l.is_reversed() && !allowed[l.geometric()]
}

fn is_tree(t: &LabelledGraph) -> bool {
    t.carrier.is_connected() && t.carrier.edge_count() + 1 == t.carrier.vertex_count()
}

/// Extends a tree immersion `T` with `L_d <= h(T) < L_{d+1}`: components of
/// `T` minus its degree-`d` edges become `G_{L_d - 1}`-covers, and a cover is
/// adjoined at each end whose end-path starts with a reversed degree-`d`
/// edge. Returns `T*` and its stability verdict.
pub fn tree_extend(
    eff: &Efficient,
    t: &LabelledGraph,
    cap: usize,
) -> Result<(LabelledGraph, Stability), AptError> {
    if !is_tree(t) {
        return Err(AptError::Domain("tree extension needs a tree".into()));
    }
    if !t.is_immersion() {
        return Err(AptError::Domain("tree extension needs an immersion".into()));
    }
    let h = t.edge_label.iter().map(|l| l.geometric()).max();
    let d = h.map_or(0, |h| eff.degree[h]);
    if d < 2 {
        return Err(AptError::Domain(
            "tree extension needs a tree of degree at least 2".into(),
        ));
    }
    let allowed: Vec<bool> = (0..eff.rep.edge_count()).map(|g| g < eff.l(d)).collect();
    let ext = extend_components(t, &allowed, |v| wants_cover(t, &allowed, v));
    let st = f_stable_period(&eff.rep.map, &ext, cap);
    Ok((ext, st))
}

/// The orientation and case analysis of a unit.
#[derive(Clone, Debug)]
struct Plan {
    unit: PathUnit,
    d: usize,
    case: SigmaCase,
    /// Tail edges treated with prefixes and loops: `a`, then `b` if both.
    sides: Vec<usize>,
    /// Edges of index below this bound form the part extended to covers.
    allowed_below: usize,
    /// Edges whose circles are attached in the cascade, highest first.
    cascade: Vec<usize>,
    /// Literal tail length before adjusting for the degree of `alpha_{a,l}`.
    l_literal: usize,
}

fn suffix_top(eff: &Efficient, g: usize) -> usize {
    top(eff.rep.suffix(g).expect("non-fixed edge")).expect("nontrivial suffix")
}

fn semiperiod(eff: &Efficient, g: usize) -> Result<usize, AptError> {
    Ok(tails(eff, g, 1)?.0.s)
}

/// Orients `alpha` so that the dominant tail is at its start.
fn normalize(eff: &Efficient, unit: &PathUnit) -> (PathUnit, bool) {
    let flip = match (unit.a, unit.b) {
        (None, Some(_)) => true,
        (Some(a), Some(b)) => suffix_top(eff, b) > suffix_top(eff, a),
        _ => false,
    };
    if !flip {
        return (unit.clone(), false);
    }
    let path = unit.path.reverse();
    let kind = match unit.kind {
        UnitType::II => UnitType::III,
        UnitType::III => UnitType::II,
        k => k,
    };
    let u = PathUnit {
        kind,
        degree: unit.degree,
        a: unit.b,
        b: unit.a,
        gamma: unit.gamma.reverse(),
        path,
    };
    (u, true)
}

impl Plan {
    fn new(eff: &Efficient, unit: PathUnit) -> Result<Plan, AptError> {
        let d = unit.degree;
        let a = unit.a.expect("normalized units start with a tail edge");
        let sa = semiperiod(eff, a)?;
        let sb = match unit.b {
            Some(b) => semiperiod(eff, b)?,
            None => 1,
        };
        let k = sa * sb + sa.min(sb) + 1;
        let g_len = unit.gamma.len();
        if d >= 3 {
            let sides = std::iter::once(a).chain(unit.b).collect();
            let g = if unit.gamma.is_trivial() {
                0
            } else {
                canonical_f_split(eff, &unit.gamma, DEFAULT_PROBE_DEPTH)?.len()
            };
            return Ok(Plan {
                unit,
                d,
                case: SigmaCase::Recursive,
                sides,
                allowed_below: eff.l(d),
                cascade: Vec::new(),
                l_literal: g + 2 * k,
            });
        }
        let hua = suffix_top(eff, a);
        let hg = top(&unit.gamma);
        let low_gamma = hg.is_none_or(|h| h <= hua);
        let both = unit.b.is_some_and(|b| suffix_top(eff, b) == hua);
        let case = match (low_gamma, both) {
            (true, true) => SigmaCase::Quadratic1,
            (true, false) => SigmaCase::Quadratic2,
            (false, true) => SigmaCase::Quadratic3,
            (false, false) => SigmaCase::Quadratic4,
        };
        let sides = if both {
            vec![a, unit.b.unwrap()]
        } else {
            vec![a]
        };
        let (allowed_below, cascade, l_literal) = if low_gamma {
            (hua, Vec::new(), g_len + 2 * k + 1)
        } else {
            let h = hg.unwrap();
            let cascade = (hua..=h).rev().filter(|&i| eff.degree[i] == 1).collect();
            (h, cascade, g_len + sa.max(sb) + 1)
        };
        Ok(Plan {
            unit,
            d,
            case,
            sides,
            allowed_below,
            cascade,
            l_literal,
        })
    }

    /// The least `l >= from` with `alpha_{a,l}` of degree `d - 1` (a path
    /// unit of that degree when `d >= 3`).
    fn admissible_l(&self, eff: &Efficient, tail: &Tail, from: usize) -> Option<usize> {
        (from.max(1)..tail.pieces.len()).find(|&i| {
            let p = &tail.pieces[i];
            eff.path_degree(p) == self.d - 1
                && (self.d == 2 || classify_piece(eff, p, self.d - 1).is_some())
        })
    }
}

fn concat_all(pieces: &[Path]) -> Result<Path, AptError> {
    let mut acc = pieces[0].clone();
    for p in &pieces[1..] {
        acc = acc.concat(p)?;
    }
    Ok(acc.tighten())
}

fn diameter(g: &Graph) -> usize {
    let n = g.vertex_count();
    let mut best = 0;
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in g.star(v) {
                let w = g.terminal(e);
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    best = best.max(dist[w]);
                    queue.push_back(w);
                }
            }
        }
    }
    best
}

/// The tracked vertices of one side: `v_x`, `v_x^+`, `v_x^-`.
#[derive(Clone, Copy, Debug)]
struct Anchors {
    v: Vertex,
    plus: Vertex,
    minus: Vertex,
}

/// `T*` with the tracked vertices, the end points of `L(alpha)` and the
/// stability period of `T*` minus the top-degree edges.
struct Core {
    tstar: LabelledGraph,
    anchors: Vec<Anchors>,
    ends: (Vertex, Vertex),
    q0: usize,
}

fn build_core(
    eff: &Efficient,
    plan: &Plan,
    tails_by_side: &[(Tail, Tail)],
    params: &SigmaParams,
    cfg: &SigmaConfig,
) -> Result<Core, AptError> {
    let base = &eff.rep.graph;
    let alpha = &plan.unit.path;
    let n = alpha.len();
    let mut t = line(base, alpha)?;
    let mut anchors = Vec::new();
    for (i, (plus, minus)) in tails_by_side.iter().enumerate() {
        let at = if i == 0 { 1 } else { n - 1 };
        let up = line(base, &concat_all(&plus.pieces[..params.l])?)?;
        let um = line(base, &concat_all(&minus.pieces[..params.l])?)?;
        let (g1, m1) = t.attach(&up, &[(at, 0)])?;
        let (g2, m2) = g1.attach(&um, &[(at, 0)])?;
        anchors.push(Anchors {
            v: at,
            plus: m1[up.terminal_point.unwrap()],
            minus: m2[um.terminal_point.unwrap()],
        });
        t = g2;
    }
    let mut ends = (0, n);
    let remap =
        |f: &crate::folding::Folded, anchors: &mut Vec<Anchors>, ends: &mut (Vertex, Vertex)| {
            for x in anchors.iter_mut() {
                *x = Anchors {
                    v: f.vertex_map[x.v],
                    plus: f.vertex_map[x.plus],
                    minus: f.vertex_map[x.minus],
                };
            }
            *ends = (f.vertex_map[ends.0], f.vertex_map[ends.1]);
        };
    let f = fold(&t);
    remap(&f, &mut anchors, &mut ends);
    t = f.graph;
    if !is_tree(&t) {
        return Err(AptError::Construction(
            "the folded tail tree is not a tree".into(),
        ));
    }
    let units = Units::new(eff)?;
    for &i in &plan.cascade {
        let mu = &units.linear(i).expect("cascade edges are linear").mu;
        let qi = params
            .cascade
            .unwrap_or_else(|| diameter(&t.carrier) / mu.len() + 3);
        let c = circle(base, &mu.power(qi))?;
        let spots: Vec<Vertex> = (0..t.carrier.edge_count())
            .filter(|&g| t.edge_label[g].geometric() == i)
            .map(|g| {
                let [x, y] = t.carrier.geometric_ends()[g];
                if t.edge_label[g].is_reversed() {
                    x
                } else {
                    y
                }
            })
            .collect();
        for v in spots {
            t = t.attach(&c, &[(v, 0)])?.0;
        }
        let f = fold(&t);
        remap(&f, &mut anchors, &mut ends);
        t = f.graph;
    }
    let allowed: Vec<bool> = (0..eff.rep.edge_count())
        .map(|g| g < plan.allowed_below)
        .collect();
    let tstar = extend_components(&t, &allowed, |v| wants_cover(&t, &allowed, v));
    let keep_v = vec![true; tstar.carrier.vertex_count()];
    let keep_e: Vec<bool> = tstar
        .edge_label
        .iter()
        .map(|l| eff.degree[l.geometric()] < plan.d)
        .collect();
    let rest = tstar.restrict(&keep_v, &keep_e);
    let q0 = match f_stable_period(&eff.rep.map, &rest, cfg.period_cap) {
        Stability::Stable { period } => period,
        Stability::Unstable { reason } => {
            return Err(AptError::Construction(format!(
                "T* minus the top edges is not f-stable: {reason}"
            )))
        }
    };
    Ok(Core {
        tstar,
        anchors,
        ends,
        q0,
    })
}

/// `Gamma_{x,i}` for `i >= 1` from the families of `alpha_{x,1..s}`.
fn gamma(fams: &[OpenFamily], i: usize) -> &LabelledGraph {
    let s = fams.len();
    fams[(i - 1) % s].at((i - 1) / s)
}

fn assemble(
    eff: &Efficient,
    plan: &Plan,
    params: SigmaParams,
    cfg: &SigmaConfig,
) -> Result<(LabelledGraph, usize), AptError> {
    let prefix: Vec<(Tail, Tail)> = plan
        .sides
        .iter()
        .map(|&x| tails(eff, x, params.l + 1))
        .collect::<Result<_, _>>()?;
    let core = build_core(eff, plan, &prefix, &params, cfg)?;
    let (pa, _) = &prefix[0];
    let la = &pa.pieces[params.l];
    let (lambda, q1) = if plan.d == 2 {
        if eff.path_degree(la) != 1 {
            return Err(AptError::Construction("alpha_{a,l} is not linear".into()));
        }
        let units = Units::new(eff)?;
        let q1 = params.q1.unwrap_or_else(|| linear_q(&units, la));
        (build_lambda(&units, la, q1, 2)?.folded.graph, q1)
    } else {
        let sub = nonlinear_sigma(eff, la, cfg)?;
        (sub.sigma, sub.q)
    };
    let mut fams = Vec::new();
    let mut qs = Vec::new();
    for (plus, _) in &prefix {
        let s = plus.s;
        let more = tails(eff, plus.a, s + 1)?.0;
        let f: Vec<OpenFamily> = more.pieces[1..=s]
            .iter()
            .map(|p| open_family(eff, p, &cfg.open()))
            .collect::<Result<_, _>>()?;
        qs.push(f.iter().fold(1usize, |acc, x| acc.lcm(&x.q)));
        fams.push(f);
    }
    let sa = prefix[0].0.s;
    let mut step = sa * core.q0.lcm(&q1).lcm(&qs[0]);
    if prefix.len() == 2 {
        step = step.lcm(&(prefix[1].0.s * core.q0.lcm(&qs[1])));
    }
    let q = step * ((2 * params.l + 1) / step + 1);
    // folding only shrinks fibers, so an unfolded size far past the budget
    // is not worth assembling
    let budget = 8 * cfg.max_sheets * eff.rep.graph.vertex_count();
    let mut size = core.tstar.carrier.vertex_count() + lambda.carrier.vertex_count();
    for (side, fam) in fams.iter().enumerate() {
        size += (params.l..q)
            .map(|i| gamma(fam, i).carrier.vertex_count())
            .sum::<usize>();
        if size > budget {
            return Err(AptError::Resource(format!(
                "side {side}: Sigma would have over {budget} vertices before folding (q = {q})"
            )));
        }
    }
    let full: Vec<Tail> = plan
        .sides
        .iter()
        .map(|&x| tails(eff, x, q).map(|t| t.0))
        .collect::<Result<_, _>>()?;
    let lifter = Lifter::new(&core.tstar);
    // The tail word of one block is the suffix of f^{q/s}(e_x). Its pieces
    // up to q - m are carried by the prefix line, Lambda and the Gamma
    // chain; the rest, including a trailing fragment when u_x is not
    // well-chosen, must return from v^- to v inside T*.
    let closing = |side: usize, x: &Anchors| -> Option<usize> {
        let t = &full[side];
        let word = eff.rep.map.power_image(t.a, q / t.s);
        let word = &word.edges()[1..];
        (0..=params.l).rev().find(|&m| {
            let Ok(prefix) = concat_all(&t.pieces[..q - m]) else {
                return false;
            };
            let n = prefix.len();
            n <= word.len()
                && prefix.edges() == &word[..n]
                && lifter.endpoint(x.minus, &word[n..]) == Some(x.v)
        })
    };
    let mut sigma = core.tstar.clone();
    let (mut i0, mut t0) = core.ends;
    for (side, x) in core.anchors.iter().enumerate() {
        let m = closing(side, x)
            .ok_or_else(|| AptError::Construction("no tail block closes at v^-".into()))?;
        let first = if side == 0 { params.l + 1 } else { params.l };
        let mut parts: Vec<LabelledGraph> = Vec::new();
        if side == 0 {
            parts.push(lambda.clone());
        }
        parts.extend((first..q - m).map(|i| gamma(&fams[side], i).clone()));
        if parts.is_empty() {
            if x.plus != x.minus {
                return Err(AptError::Construction("tail loop is empty".into()));
            }
            continue;
        }
        let chain = combine(&parts)?;
        let (glued, map) = sigma.attach(
            &chain,
            &[
                (x.plus, chain.initial_point.unwrap()),
                (x.minus, chain.terminal_point.unwrap()),
            ],
        )?;
        let _ = map;
        sigma = glued;
    }
    sigma.initial_point = Some(i0);
    sigma.terminal_point = Some(t0);
    if !sigma.is_immersion() {
        let f = fold(&sigma);
        i0 = f.vertex_map[i0];
        t0 = f.vertex_map[t0];
        sigma = f.graph.with_points(Some(i0), Some(t0));
    }
    Ok((sigma, q))
}

fn verify(
    eff: &Efficient,
    plan: &Plan,
    sigma: &LabelledGraph,
    q: usize,
    cfg: &SigmaConfig,
) -> Result<(Vec<Sample>, Option<usize>, Option<usize>), AptError> {
    let (i, t) = (sigma.initial_point.unwrap(), sigma.terminal_point.unwrap());
    if i == t {
        return Err(AptError::Construction("Sigma has equal end points".into()));
    }
    let need_i = plan.unit.a.is_some();
    let need_t = plan.unit.b.is_some();
    if (need_i && valence(sigma, i) != 1) || (need_t && valence(sigma, t) != 1) {
        return Err(AptError::Construction(
            "an end point of Sigma has valence above 1".into(),
        ));
    }
    let samples = sample_lifts(sigma, &eff.rep.map, &plan.unit.path, q, cfg.k_max, i, t)?;
    let (l_fit, ab_fit) = fits(&samples);
    if ab_fit != Some(plan.d) || l_fit != Some(plan.d) {
        return Err(AptError::Construction(format!(
            "degree fits l = {l_fit:?}, l_ab = {ab_fit:?}, expected {}",
            plan.d
        )));
    }
    Ok((samples, l_fit, ab_fit))
}

/// Attempts in order: the literal parameters, then small tail lengths with
/// small `q_1` and cascade powers.
fn schedule(eff: &Efficient, plan: &Plan, cfg: &SigmaConfig) -> Result<Vec<SigmaParams>, AptError> {
    let a = plan.sides[0];
    let limit = plan.l_literal + 4 * semiperiod(eff, a)? + 8;
    let t = tails(eff, a, limit)?.0;
    let mut out = Vec::new();
    if let Some(l) = plan.admissible_l(eff, &t, plan.l_literal) {
        out.push(SigmaParams {
            l,
            q1: None,
            cascade: None,
            literal: true,
        });
    }
    let mut from = 1;
    while out.len() < cfg.search_width + 1 {
        let Some(l) = plan.admissible_l(eff, &t, from) else {
            break;
        };
        for q1 in [1, 2] {
            out.push(SigmaParams {
                l,
                q1: (plan.d == 2).then_some(q1),
                cascade: (!plan.cascade.is_empty()).then_some(q1 + 1),
                literal: false,
            });
        }
        from = l + 1;
    }
    Ok(out)
}

/// `Sigma` and `q` for a path unit of degree `d >= 2`: `f^{kq}_#(alpha)`
/// labels a path across `Sigma` and the abelianized lengths of these paths
/// grow with degree `d`. The first attempt that verifies within the sheet
/// budget is returned; failing that, the smallest verified one.
pub fn nonlinear_sigma(
    eff: &Efficient,
    alpha: &Path,
    cfg: &SigmaConfig,
) -> Result<PathUnitSigma, AptError> {
    if alpha.is_trivial() || !alpha.is_tight() {
        return Err(AptError::Domain(
            "Sigma needs a nontrivial tight path".into(),
        ));
    }
    let d = eff.path_degree(alpha);
    if d < 2 {
        return Err(AptError::Domain(format!(
            "path has degree {d}; the linear construction applies"
        )));
    }
    let unit =
        classify_piece(eff, alpha, d).ok_or_else(|| AptError::Domain("not a path unit".into()))?;
    let (work, reversed) = normalize(eff, &unit);
    let plan = Plan::new(eff, work)?;
    let mut rejected = Vec::new();
    let mut over_budget: Option<PathUnitSigma> = None;
    for params in schedule(eff, &plan, cfg)? {
        let attempt = assemble(eff, &plan, params, cfg).and_then(|(sigma, q)| {
            let v = verify(eff, &plan, &sigma, q, cfg)?;
            Ok((sigma, q, v))
        });
        match attempt {
            Ok((sigma, q, (samples, l_fit, l_ab_fit))) => {
                let sigma = if reversed {
                    let (i, t) = (sigma.initial_point, sigma.terminal_point);
                    sigma.with_points(t, i)
                } else {
                    sigma
                };
                let out = PathUnitSigma {
                    alpha: alpha.clone(),
                    unit: unit.clone(),
                    case: plan.case,
                    params,
                    reversed,
                    q,
                    sigma,
                    samples,
                    l_fit,
                    l_ab_fit,
                    rejected: rejected.clone(),
                };
                if out.max_fiber() <= cfg.max_sheets {
                    return Ok(out);
                }
                rejected.push(format!(
                    "{params:?}: fiber {} over the sheet budget",
                    out.max_fiber()
                ));
                if over_budget
                    .as_ref()
                    .is_none_or(|b| b.max_fiber() > out.max_fiber())
                {
                    over_budget = Some(out);
                }
            }
            Err(e) => rejected.push(format!("{params:?}: {e}")),
        }
    }
    if let Some(mut best) = over_budget {
        best.rejected = rejected;
        return Ok(best);
    }
    Err(AptError::Construction(format!(
        "no parameter choice verified: {}",
        rejected.join("; ")
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apt::testing::eff;
    use crate::rep::tests::{E1, E2};

    #[test]
    fn tree_extension_of_the_top_edge() {
        let e = eff(E1);
        let t = line(&e.rep.graph, &e.rep.path("e3").unwrap()).unwrap();
        let (ext, st) = tree_extend(&e, &t, DEFAULT_PERIOD_CAP).unwrap();
        // a rose cover at the terminal end only
        assert_eq!(ext.carrier.vertex_count(), 2);
        assert_eq!(ext.carrier.edge_count(), 3);
        assert_eq!(valence(&ext, 0), 1);
        assert!(st.period().is_some());
    }

    #[test]
    fn tree_extension_rejects_cycles() {
        let e = eff(E1);
        let c = circle(&e.rep.graph, &e.rep.path("e3").unwrap()).unwrap();
        assert!(matches!(
            tree_extend(&e, &c, DEFAULT_PERIOD_CAP),
            Err(AptError::Domain(_))
        ));
    }

    #[test]
    fn cases_of_e1_and_e2() {
        let e = eff(E1);
        let u = classify_piece(&e, &e.rep.path("e3 e1 ~e3").unwrap(), 2).unwrap();
        assert_eq!(Plan::new(&e, u).unwrap().case, SigmaCase::Quadratic1);
        let e = eff(E2);
        let u = classify_piece(&e, &e.rep.path("c").unwrap(), 2).unwrap();
        assert_eq!(Plan::new(&e, u).unwrap().case, SigmaCase::Quadratic2);
    }

    #[test]
    fn sigma_for_e2_unit_is_quadratic() {
        let e = eff(E2);
        let s = nonlinear_sigma(&e, &e.rep.path("c").unwrap(), &SigmaConfig::default()).unwrap();
        assert_eq!(s.l_ab_fit, Some(2));
        assert_eq!(s.l_fit, Some(2));
        let (i, t) = (
            s.sigma.initial_point.unwrap(),
            s.sigma.terminal_point.unwrap(),
        );
        assert_ne!(i, t);
        assert_eq!(valence(&s.sigma, i), 1);
    }

    #[test]
    fn sigma_for_e1_closed_unit() {
        let e = eff(E1);
        let s = nonlinear_sigma(
            &e,
            &e.rep.path("e3 e1 ~e3").unwrap(),
            &SigmaConfig::default(),
        )
        .unwrap();
        assert_eq!(s.l_ab_fit, Some(2));
        let (i, t) = (
            s.sigma.initial_point.unwrap(),
            s.sigma.terminal_point.unwrap(),
        );
        assert_eq!((valence(&s.sigma, i), valence(&s.sigma, t)), (1, 1));
    }

    #[test]
    fn linear_paths_are_rejected() {
        let e = eff(E1);
        assert!(matches!(
            nonlinear_sigma(&e, &e.rep.path("e2").unwrap(), &SigmaConfig::default()),
            Err(AptError::Domain(_))
        ));
    }
}
