//! Growth units of the linear stratum and the canonical separation of a
//! linear path into them.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{edge_name, Edge, Path};
use crate::rep::{Efficient, NielsenStatus, DEFAULT_PERIOD_BOUND};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnitError {
    #[error("{0}")]
    Domain(String),
    #[error("two distinct initial units at edge position {position}: {first} and {second}")]
    Ambiguous {
        position: usize,
        first: String,
        second: String,
    },
    #[error("the suffix of {0} is not a concatenation of passive units")]
    NoSplitting(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnitKind {
    FF,
    FR,
    FE,
    LF,
    LR,
    LE,
    QE,
}

impl UnitKind {
    pub fn is_passive(self) -> bool {
        matches!(self, UnitKind::FF | UnitKind::FR | UnitKind::FE)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthUnit {
    pub kind: UnitKind,
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub d: Option<i64>,
    pub path: Path,
}

impl GrowthUnit {
    /// `LF(a=e2,len=2)`, `FE(a=e2,b=e2,d=1)` and so on.
    pub fn token(&self, names: &[String]) -> String {
        let mut s = format!("{:?}(", self.kind);
        let mut parts = Vec::new();
        if let Some(a) = self.a {
            parts.push(format!("a={}", names[a]));
        }
        if let Some(b) = self.b {
            parts.push(format!("b={}", names[b]));
        }
        if let Some(d) = self.d {
            parts.push(format!("d={d}"));
        }
        parts.push(format!("len={}", self.path.len()));
        write!(s, "{})", parts.join(",")).unwrap();
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separation {
    pub units: Vec<GrowthUnit>,
    pub canonical: bool,
}

impl Separation {
    pub fn concat(&self) -> Vec<Edge> {
        self.units
            .iter()
            .flat_map(|u| u.path.edges().iter().copied())
            .collect()
    }

    /// Units joined by ` <> `.
    pub fn display(&self, names: &[String]) -> String {
        self.units
            .iter()
            .map(|u| u.path.display(names).to_string())
            .collect::<Vec<_>>()
            .join(" <> ")
    }
}

/// Data attached to a linear edge `e_i`: `u_i = mu^m` with `mu` primitive,
/// and the splitting of `mu` into passive units `kappa_{i,j}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearData {
    pub mu: Path,
    pub m: usize,
    pub kappas: Vec<GrowthUnit>,
}

/// Linear-stratum data of an efficient representative.
pub struct Units<'a> {
    pub eff: &'a Efficient,
    linear: Vec<Option<LinearData>>,
}

/// `mu_i`, `m_i` and the kappa list of a linear edge.
pub fn mu_of(eff: &Efficient, i: usize) -> Result<LinearData, UnitError> {
    let units = Units::new(eff)?;
    units
        .linear(i)
        .cloned()
        .ok_or_else(|| UnitError::Domain(format!("{} is not a linear edge", eff.rep.edge_names[i])))
}

impl<'a> Units<'a> {
    pub fn new(eff: &'a Efficient) -> Result<Units<'a>, UnitError> {
        let n = eff.rep.edge_count();
        let mut units = Units {
            eff,
            linear: vec![None; n],
        };
        // suffixes lie below their edges, so lower data is ready in time
        for i in 0..n {
            if !eff.is_linear_edge(i) {
                continue;
            }
            let u = eff.rep.suffix(i).expect("linear edges are not fixed");
            let (mu, m) = u
                .primitive_root()
                .map_err(|e| UnitError::Domain(e.to_string()))?;
            let kappas = units
                .split_passive(mu.edges())
                .ok_or_else(|| UnitError::NoSplitting(eff.rep.edge_names[i].clone()))?;
            units.linear[i] = Some(LinearData { mu, m, kappas });
        }
        Ok(units)
    }

    pub fn linear(&self, g: usize) -> Option<&LinearData> {
        self.linear.get(g).and_then(|x| x.as_ref())
    }

    fn names(&self) -> &[String] {
        &self.eff.rep.edge_names
    }

    fn is_fixed(&self, e: Edge) -> bool {
        self.eff.rep.suffix(e.geometric()).is_none()
    }

    fn path_of(&self, edges: &[Edge]) -> Path {
        Path::from_edges(&self.eff.rep.graph, edges.to_vec()).expect("subpath of a path")
    }

    /// `kappa_{a,j}` with `j` taken modulo `s_a`.
    pub fn kappa(&self, a: usize, j: i64) -> &Path {
        let k = &self.linear(a).expect("linear edge").kappas;
        &k[j.rem_euclid(k.len() as i64) as usize].path
    }

    fn forward_linear(&self, e: Edge) -> Option<usize> {
        (!e.is_reversed() && self.linear(e.geometric()).is_some()).then(|| e.geometric())
    }

    fn reversed_linear(&self, e: Edge) -> Option<usize> {
        (e.is_reversed() && self.linear(e.geometric()).is_some()).then(|| e.geometric())
    }

    /// `d >= 0` with `rest = kappa_{a,0} ... kappa_{a,d-1}`.
    fn forward_chain(&self, a: usize, rest: &[Edge]) -> Option<usize> {
        let mut pos = 0;
        let mut d = 0;
        while pos < rest.len() {
            let k = self.kappa(a, d as i64).edges();
            if !rest[pos..].starts_with(k) {
                return None;
            }
            pos += k.len();
            d += 1;
        }
        Some(d)
    }

    /// `d >= 0` with `rest = ~kappa_{a,-1} ... ~kappa_{a,-d}`.
    fn backward_chain(&self, a: usize, rest: &[Edge]) -> Option<usize> {
        let mut pos = 0;
        let mut d = 0;
        while pos < rest.len() {
            let k = self.kappa(a, -(d as i64) - 1).reverse();
            if !rest[pos..].starts_with(k.edges()) {
                return None;
            }
            pos += k.len();
            d += 1;
        }
        Some(d)
    }

    /// Signed `d` with `rest = mu^d`; negative powers use `reverse(mu)`.
    fn power_of(mu: &[Edge], rest: &[Edge]) -> Option<i64> {
        if rest.is_empty() {
            return Some(0);
        }
        if !rest.len().is_multiple_of(mu.len()) {
            return None;
        }
        let d = (rest.len() / mu.len()) as i64;
        if rest.chunks(mu.len()).all(|c| c == mu) {
            return Some(d);
        }
        let rev: Vec<Edge> = mu.iter().rev().map(|e| e.reverse()).collect();
        if rest.chunks(mu.len()).all(|c| c == rev.as_slice()) {
            return Some(-d);
        }
        None
    }

    /// Every growth-unit reading of a tight path.
    pub fn classify_all(&self, edges: &[Edge]) -> Vec<GrowthUnit> {
        let mut out = Vec::new();
        let Some(&first) = edges.first() else {
            return out;
        };
        let path = || self.path_of(edges);
        let unit = |kind, a, b, d| GrowthUnit {
            kind,
            a,
            b,
            d,
            path: path(),
        };
        let last = *edges.last().unwrap();
        if edges.len() == 1 && self.is_fixed(first) {
            let g = first.geometric();
            out.push(if first.is_reversed() {
                unit(UnitKind::FR, None, Some(g), None)
            } else {
                unit(UnitKind::FF, Some(g), None, None)
            });
            return out;
        }
        if let Some(a) = self.forward_linear(first) {
            let rest = &edges[1..];
            if let Some(d) = self.forward_chain(a, rest) {
                out.push(unit(UnitKind::LF, Some(a), None, Some(d as i64)));
            } else if let Some(d) = self.backward_chain(a, rest) {
                out.push(unit(UnitKind::LF, Some(a), None, Some(-(d as i64))));
            }
        }
        if let Some(b) = self.reversed_linear(last) {
            let rev: Vec<Edge> = edges.iter().rev().map(|e| e.reverse()).collect();
            let rest = &rev[1..];
            if let Some(d) = self.forward_chain(b, rest) {
                out.push(unit(UnitKind::LR, None, Some(b), Some(d as i64)));
            } else if let Some(d) = self.backward_chain(b, rest) {
                out.push(unit(UnitKind::LR, None, Some(b), Some(-(d as i64))));
            }
        }
        if edges.len() >= 2 {
            if let (Some(a), Some(b)) = (self.forward_linear(first), self.reversed_linear(last)) {
                let mid = &edges[1..edges.len() - 1];
                let la = self.linear(a).unwrap();
                let lb = self.linear(b).unwrap();
                if la.mu == lb.mu {
                    if let Some(d) = Self::power_of(la.mu.edges(), mid) {
                        if la.m == lb.m {
                            if a != b || d != 0 {
                                out.push(unit(UnitKind::FE, Some(a), Some(b), Some(d)));
                            }
                        } else {
                            out.push(unit(UnitKind::LE, Some(a), Some(b), Some(d)));
                        }
                    }
                }
                if let Some(d) = self.quasi_exceptional(a, b, mid) {
                    out.push(unit(UnitKind::QE, Some(a), Some(b), Some(d)));
                }
            }
        }
        out
    }

    /// Signed chain length `d` of a quasi-exceptional middle section.
    fn quasi_exceptional(&self, a: usize, b: usize, mid: &[Edge]) -> Option<i64> {
        let la = self.linear(a).unwrap();
        let mu_b = &self.linear(b).unwrap().mu;
        // mu_b = mu_a is the exceptional case: those paths are FE or LE
        if *mu_b == la.mu {
            return None;
        }
        let s = la.kappas.len() as i64;
        if mid.is_empty() {
            return (la.mu.reverse() == *mu_b).then_some(0);
        }
        let joined = |range: Vec<i64>, reverse: bool| -> Vec<Edge> {
            let mut out = Vec::new();
            for j in range {
                let k = self.kappa(a, j);
                if reverse {
                    out.extend(k.reverse().edges());
                } else {
                    out.extend(k.edges());
                }
            }
            out
        };
        if let Some(d) = self.forward_chain(a, mid) {
            let d = d as i64;
            // mu_b = ~kappa_{a,d+s-1} ... ~kappa_{a,d}
            if joined((d..d + s).rev().collect(), true) == mu_b.edges() {
                return Some(d);
            }
        }
        if let Some(d) = self.backward_chain(a, mid) {
            let d = d as i64;
            // mu_b = kappa_{a,-(d+s)} ... kappa_{a,-(d+1)}
            if joined((-(d + s)..=-(d + 1)).collect(), false) == mu_b.edges() {
                return Some(-d);
            }
        }
        None
    }

    /// The unique splitting of a path into passive units, if any. Each step
    /// is forced: a fixed edge is a unit by itself, and after `e_a` the
    /// closing `~e_b` is the first edge outside `mu_a` powers.
    pub fn split_passive(&self, edges: &[Edge]) -> Option<Vec<GrowthUnit>> {
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < edges.len() {
            let e = edges[pos];
            if self.is_fixed(e) {
                out.extend(self.classify_all(&edges[pos..pos + 1]));
                pos += 1;
                continue;
            }
            let a = self.forward_linear(e)?;
            let mu = self.linear(a).unwrap().mu.edges().to_vec();
            let rev: Vec<Edge> = mu.iter().rev().map(|x| x.reverse()).collect();
            let mut found = None;
            for pattern in [&mu, &rev] {
                let mut end = pos + 1;
                loop {
                    if end < edges.len() {
                        if let Some(u) = self
                            .classify_all(&edges[pos..=end])
                            .into_iter()
                            .find(|u| u.kind == UnitKind::FE)
                        {
                            found = Some(u);
                            break;
                        }
                    }
                    if edges.len() >= end + pattern.len()
                        && edges[end..end + pattern.len()] == pattern[..]
                    {
                        end += pattern.len();
                    } else {
                        break;
                    }
                }
                if found.is_some() {
                    break;
                }
            }
            let u = found?;
            pos += u.path.len();
            out.push(u);
        }
        Some(out)
    }

    fn check_linear_path(&self, edges: &[Edge]) -> Result<(), UnitError> {
        if let Some(e) = edges.iter().find(|e| self.eff.degree[e.geometric()] > 1) {
            return Err(UnitError::Domain(format!(
                "{} is not in the linear stratum",
                edge_name(*e, self.names())
            )));
        }
        Ok(())
    }

    /// Canonical separation: repeatedly take the unique initial unit of kind
    /// LR, LE or QE; else an initial FE unit; else the maximal initial LF
    /// unit when the path starts with a linear edge; else the first edge.
    pub fn separate(&self, path: &Path) -> Result<Separation, UnitError> {
        let edges = path.edges();
        self.check_linear_path(edges)?;
        if !path.is_tight() {
            return Err(UnitError::Domain("separation needs a tight path".into()));
        }
        let mut units = Vec::new();
        let mut pos = 0;
        while pos < edges.len() {
            let mut active: Option<GrowthUnit> = None;
            let mut fe: Option<GrowthUnit> = None;
            for end in pos + 1..=edges.len() {
                if self.reversed_linear(edges[end - 1]).is_none() {
                    continue;
                }
                for u in self.classify_all(&edges[pos..end]) {
                    match u.kind {
                        UnitKind::LR | UnitKind::LE | UnitKind::QE => {
                            if let Some(prev) = &active {
                                if prev.path != u.path {
                                    return Err(UnitError::Ambiguous {
                                        position: pos,
                                        first: prev.token(self.names()),
                                        second: u.token(self.names()),
                                    });
                                }
                            } else {
                                active = Some(u);
                            }
                        }
                        UnitKind::FE if fe.is_none() => fe = Some(u),
                        _ => {}
                    }
                }
            }
            let unit = if let Some(u) = active {
                u
            } else if let Some(u) = fe {
                u
            } else if self.forward_linear(edges[pos]).is_some() {
                self.maximal_lf(&edges[pos..])
            } else {
                self.classify_all(&edges[pos..pos + 1])
                    .into_iter()
                    .next()
                    .expect("a fixed edge is a unit")
            };
            pos += unit.path.len();
            units.push(unit);
        }
        Ok(Separation {
            units,
            canonical: true,
        })
    }

    fn maximal_lf(&self, edges: &[Edge]) -> GrowthUnit {
        let a = edges[0].geometric();
        let mut best = 1;
        for backward in [false, true] {
            let mut pos = 1;
            let mut j = 0i64;
            loop {
                let k = if backward {
                    self.kappa(a, -j - 1).reverse()
                } else {
                    self.kappa(a, j).clone()
                };
                if !edges[pos..].starts_with(k.edges()) {
                    break;
                }
                pos += k.len();
                j += 1;
            }
            best = best.max(pos);
        }
        self.classify_all(&edges[..best])
            .into_iter()
            .find(|u| u.kind == UnitKind::LF)
            .expect("maximal LF prefix")
    }

    fn mu_window(&self, a: usize, len: usize) -> [Vec<Edge>; 2] {
        let mu = &self.linear(a).unwrap().mu;
        let reps = if mu.is_cyclically_reduced() {
            len / mu.len() + 2
        } else {
            1
        };
        let fwd = mu.power(reps);
        [fwd.edges().to_vec(), fwd.reverse().edges().to_vec()]
    }

    /// Nonempty suffix of some passive unit.
    fn is_unit_suffix(&self, seg: &[Edge]) -> bool {
        let Some(&last) = seg.last() else {
            return false;
        };
        if seg.len() == 1 && self.is_fixed(last) {
            return true;
        }
        let Some(b) = self.reversed_linear(last) else {
            return false;
        };
        let head = &seg[..seg.len() - 1];
        if head.is_empty() {
            // ~e_b closes e_b mu_b ~e_b
            return true;
        }
        if self
            .classify_all(seg)
            .iter()
            .any(|u| u.kind == UnitKind::FE)
        {
            return true;
        }
        self.mu_window(b, head.len())
            .iter()
            .any(|w| w.ends_with(head))
    }

    fn is_unit_prefix(&self, seg: &[Edge]) -> bool {
        let rev: Vec<Edge> = seg.iter().rev().map(|e| e.reverse()).collect();
        self.is_unit_suffix(&rev)
    }

    fn is_unit_infix(&self, seg: &[Edge]) -> bool {
        if self.is_unit_prefix(seg) || self.is_unit_suffix(seg) {
            return true;
        }
        (0..self.linear.len())
            .filter(|&a| self.linear(a).is_some())
            .any(|a| {
                self.mu_window(a, seg.len())
                    .iter()
                    .any(|w| w.windows(seg.len()).any(|x| x == seg))
            })
    }

    fn is_passive_unit(&self, seg: &[Edge]) -> bool {
        self.classify_all(seg).iter().any(|u| u.kind.is_passive())
    }

    /// Whether a tight path in the linear stratum is not a subpath of any
    /// Nielsen path. Nielsen paths are exactly the tight concatenations of
    /// passive units, so the path is bounded iff it reads as (suffix of a
    /// unit) (units) (prefix of a unit), or lies inside a single unit.
    pub fn is_essentially_unbounded(&self, path: &Path) -> bool {
        let edges = path.edges();
        let n = edges.len();
        if n == 0 || self.check_linear_path(edges).is_err() {
            return n > 0;
        }
        if self.is_unit_infix(edges) {
            return false;
        }
        let mut reach = vec![false; n + 1];
        for i in 1..=n {
            reach[i] = self.is_unit_suffix(&edges[..i])
                || (1..i).any(|j| reach[j] && self.is_passive_unit(&edges[j..i]));
        }
        if reach[n] {
            return false;
        }
        !(1..n).any(|i| reach[i] && self.is_unit_prefix(&edges[i..]))
    }

    /// Checks the consequence of the separation: if the middle units do not
    /// form a Nielsen path, some LE/QE unit, LF unit with its successor, or
    /// LR unit with its predecessor is essentially unbounded.
    pub fn separation_properties_check(&self, path: &Path) -> Result<SeparationReport, UnitError> {
        let sep = self.separate(path)?;
        let s = sep.units.len();
        if s < 3 {
            return Ok(SeparationReport {
                vacuous: true,
                witnesses: vec![],
            });
        }
        let middle: Vec<Edge> = sep.units[1..s - 1]
            .iter()
            .flat_map(|u| u.path.edges().iter().copied())
            .collect();
        let middle = self.path_of(&middle);
        if self.eff.rep.is_nielsen(&middle, DEFAULT_PERIOD_BOUND) == NielsenStatus::Nielsen {
            return Ok(SeparationReport {
                vacuous: true,
                witnesses: vec![],
            });
        }
        let mut candidates = Vec::new();
        for (i, u) in sep.units.iter().enumerate() {
            match u.kind {
                UnitKind::LE | UnitKind::QE => candidates.push((i, i + 1)),
                UnitKind::LF if i + 1 < s => candidates.push((i, i + 2)),
                UnitKind::LR if i >= 1 => candidates.push((i - 1, i + 1)),
                _ => {}
            }
        }
        let witnesses = candidates
            .into_iter()
            .filter(|&(from, to)| {
                let e: Vec<Edge> = sep.units[from..to]
                    .iter()
                    .flat_map(|u| u.path.edges().iter().copied())
                    .collect();
                self.is_essentially_unbounded(&self.path_of(&e))
            })
            .collect();
        Ok(SeparationReport {
            vacuous: false,
            witnesses,
        })
    }
}

/// Outcome of [`Units::separation_properties_check`]; `witnesses` are unit
/// index ranges `[from, to)` spanning essentially unbounded subpaths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationReport {
    pub vacuous: bool,
    pub witnesses: Vec<(usize, usize)>,
}

impl SeparationReport {
    pub fn passed(&self) -> bool {
        self.vacuous || !self.witnesses.is_empty()
    }
}
