//! f-stability of immersions and their periods.

use std::collections::HashSet;

use crate::folding::Lifter;
use crate::graph::{Edge, Path};
use crate::labelled::LabelledGraph;
use crate::rep::SuffixMap;

pub const DEFAULT_PERIOD_CAP: usize = 720;

/// Edges of suffix iterates walked before the search gives up.
const WORK_BUDGET: usize = 50_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stability {
    Stable { period: usize },
    Unstable { reason: String },
}

impl Stability {
    pub fn period(&self) -> Option<usize> {
        match self {
            Stability::Stable { period } => Some(*period),
            Stability::Unstable { .. } => None,
        }
    }
}

fn factorial_cap(n: usize, cap: usize) -> usize {
    let mut acc: usize = 1;
    for i in 2..=n {
        acc = acc.saturating_mul(i);
        if acc >= cap {
            return cap;
        }
    }
    acc.min(cap)
}

/// Stability test and least period. Each positively oriented edge `d` with a
/// non-fixed label `e` is tracked through `w_q(d)`, the end of the lift of
/// `f^q_#(e) = e u f_#(u) ... f^{q-1}_#(u)` from `iota(d)`; the period is the
/// least `q` with `w_q(d) = tau(d)` for all `d`. The search stops at
/// `min(cap, |V_H|!)`.
pub fn f_stable_period(map: &SuffixMap, h: &LabelledGraph, cap: usize) -> Stability {
    if h.is_cover() {
        return cover_period(map, h, cap);
    }
    immersion_period(map, h, cap)
}

/// The edge-tracking search of `f_stable_period`, valid for any immersion.
pub fn immersion_period(map: &SuffixMap, h: &LabelledGraph, cap: usize) -> Stability {
    let lifter = Lifter::new(h);
    let mut tracked: Vec<(usize, usize, usize)> = Vec::new();
    for (g, &[a, b]) in h.carrier.geometric_ends().iter().enumerate() {
        let l = h.edge_label[g];
        let (from, to) = if l.is_reversed() { (b, a) } else { (a, b) };
        let e = l.positive();
        if lifter.endpoint(from, map.image(e).edges()).is_none() {
            return Stability::Unstable {
                reason: format!(
                    "the image of the label of edge {g} does not lift from its initial vertex"
                ),
            };
        }
        if !map.is_fixed(e.geometric()) {
            tracked.push((e.geometric(), from, to));
        }
    }
    if tracked.is_empty() {
        return Stability::Stable { period: 1 };
    }
    let limit = factorial_cap(h.carrier.vertex_count(), cap).max(1);
    let edge_count = map.graph.edge_count();
    let mut iterate: Vec<Option<Path>> = (0..edge_count).map(|g| map.suffix[g].clone()).collect();
    let mut state: Vec<usize> = tracked.iter().map(|&(_, _, to)| to).collect();
    let mut work = 0usize;
    for q in 1..=limit {
        for (i, &(g, _, _)) in tracked.iter().enumerate() {
            let u = iterate[g].as_ref().unwrap();
            work += u.len();
            match lifter.endpoint(state[i], u.edges()) {
                Some(w) => state[i] = w,
                None => {
                    return Stability::Unstable {
                        reason: format!("f^{q} of the label of edge {g} leaves the immersion"),
                    };
                }
            }
        }
        if tracked.iter().zip(&state).all(|(&(_, _, to), &w)| w == to) {
            return Stability::Stable { period: q };
        }
        if work > WORK_BUDGET {
            return Stability::Unstable {
                reason: format!("work budget exhausted at q = {q}"),
            };
        }
        for g in 0..edge_count {
            if let Some(u) = &iterate[g] {
                iterate[g] = Some(map.apply(u));
            }
        }
    }
    Stability::Unstable {
        reason: format!("no period up to {limit}"),
    }
}

/// Period of a finite cover. Lifts in a cover do not see cancellation, so
/// the fiber map of `f^{q+1}(e_g)` is the composite of the fiber maps of
/// `f^q` along the letters of `f(e_g)`. The sequence of fiber maps is
/// eventually periodic, so a repeated state without a return proves
/// instability.
pub fn cover_period(map: &SuffixMap, cover: &LabelledGraph, cap: usize) -> Stability {
    let n = cover.carrier.vertex_count();
    let m = map.graph.edge_count();
    let index = cover.star_index();
    let none = usize::MAX;
    let one: Vec<Vec<usize>> = (0..m)
        .map(|g| {
            let e = Edge::new(g, false);
            (0..n)
                .map(|x| index.step(x, e).map_or(none, |d| cover.carrier.terminal(d)))
                .collect()
        })
        .collect();
    let invert = |t: &[usize]| {
        let mut inv = vec![none; n];
        for (x, &y) in t.iter().enumerate() {
            if y != none {
                inv[y] = x;
            }
        }
        inv
    };
    let words: Vec<Vec<Edge>> = (0..m)
        .map(|g| map.image(Edge::new(g, false)).into_edges())
        .collect();
    let mut cur = one.clone();
    let mut seen: HashSet<Vec<Vec<usize>>> = HashSet::new();
    for q in 1..=cap.max(1) {
        let inv: Vec<Vec<usize>> = cur.iter().map(|t| invert(t)).collect();
        let next: Vec<Vec<usize>> = (0..m)
            .map(|g| {
                if map.is_fixed(g) {
                    return one[g].clone();
                }
                (0..n)
                    .map(|x| {
                        if one[g][x] == none {
                            return none;
                        }
                        words[g].iter().fold(x, |y, &e| {
                            if e.is_reversed() {
                                inv[e.geometric()][y]
                            } else {
                                cur[e.geometric()][y]
                            }
                        })
                    })
                    .collect()
            })
            .collect();
        if next == one {
            return Stability::Stable { period: q };
        }
        if !seen.insert(next.clone()) {
            return Stability::Unstable {
                reason: format!("fiber maps repeat at q = {q} without returning"),
            };
        }
        cur = next;
    }
    Stability::Unstable {
        reason: format!("no period up to {cap}"),
    }
}

/// Whether `f^{kq}_#` of the label of `p` lifts between the ends of `p` for
/// `k = 1..=k_max`.
pub fn carries_path(map: &SuffixMap, h: &LabelledGraph, p: &Path, q: usize, k_max: usize) -> bool {
    let lifter = Lifter::new(h);
    let label = h.path_label(p);
    let mut cur = label;
    let images = map.power_map(q);
    for _ in 0..k_max {
        cur = crate::rep::substitute(&images, &cur);
        if lifter.endpoint(p.start(), cur.edges()) != Some(p.end()) {
            return false;
        }
    }
    true
}
