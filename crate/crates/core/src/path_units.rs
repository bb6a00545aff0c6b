//! Path units of degree `d >= 2`, the canonical f-splitting and the path
//! unit structure.

use std::fmt;

use thiserror::Error;

use crate::graph::{Edge, Path};
use crate::rep::Efficient;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SplitError {
    #[error("cut at edge position {position} cancels after {depth} iterations")]
    Violation { position: usize, depth: usize },
    #[error("{0}")]
    Domain(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnitType {
    I,
    II,
    III,
}

/// `e_a gamma ~e_b`, `e_a gamma` or `gamma ~e_b` with `gamma` below the
/// degree-`d` edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathUnit {
    pub kind: UnitType,
    pub degree: usize,
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub gamma: Path,
    pub path: Path,
}

impl PathUnit {
    pub fn structure(&self) -> Structure {
        match self.kind {
            UnitType::I => Structure::I(self.a.unwrap(), self.b.unwrap()),
            UnitType::II => Structure::II(self.a.unwrap()),
            UnitType::III => Structure::III(self.b.unwrap()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Structure {
    I(usize, usize),
    II(usize),
    III(usize),
}

/// One entry per piece of the canonical f-splitting: `None` for pieces of
/// lower degree.
pub type UnitStructure = Vec<Option<Structure>>;

pub struct StructureDisplay<'a>(pub &'a UnitStructure, pub &'a [String]);

impl fmt::Display for StructureDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.1;
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|s| match s {
                None => "-".to_string(),
                Some(Structure::I(a, b)) => format!("((i),{},{})", names[*a], names[*b]),
                Some(Structure::II(a)) => format!("((ii),{})", names[*a]),
                Some(Structure::III(b)) => format!("((iii),{})", names[*b]),
            })
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Whether the canonical splitting cuts at edge `g` for a path whose top
/// edge is `h`.
pub fn is_cut_edge(eff: &Efficient, h: usize, g: usize) -> bool {
    match eff.degree[h] {
        0 => false,
        1 => g == h,
        d => eff.degree[g] == d,
    }
}

/// Cut positions (edge offsets) of the canonical f-splitting.
pub fn cut_positions(eff: &Efficient, path: &Path) -> Vec<usize> {
    let edges = path.edges();
    let Some(h) = edges.iter().map(|e| e.geometric()).max() else {
        return vec![];
    };
    let mut cuts = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        if !is_cut_edge(eff, h, e.geometric()) {
            continue;
        }
        let at = if e.is_reversed() { i + 1 } else { i };
        if at > 0 && at < edges.len() && cuts.last() != Some(&at) {
            cuts.push(at);
        }
    }
    cuts
}

/// The canonical f-splitting of a tight path, with every cut checked to
/// survive `probe_depth` iterations of `f_#`.
pub fn canonical_f_split(
    eff: &Efficient,
    path: &Path,
    probe_depth: usize,
) -> Result<Vec<Path>, SplitError> {
    if !path.is_tight() {
        return Err(SplitError::Domain(
            "canonical splitting needs a tight path".into(),
        ));
    }
    let graph = &eff.rep.graph;
    let cuts = cut_positions(eff, path);
    let mut bounds = vec![0];
    bounds.extend(&cuts);
    bounds.push(path.len());
    let pieces: Vec<Path> = bounds
        .windows(2)
        .map(|w| path.subpath(graph, w[0], w[1]))
        .collect();
    let mut images = pieces.clone();
    for depth in 1..=probe_depth {
        images = images.iter().map(|p| eff.rep.map.apply(p)).collect();
        for (i, w) in images.windows(2).enumerate() {
            if let (Some(l), Some(r)) = (w[0].last(), w[1].first()) {
                if l == r.reverse() {
                    return Err(SplitError::Violation {
                        position: cuts[i],
                        depth,
                    });
                }
            }
        }
    }
    Ok(pieces)
}

/// Reads a piece as a path unit of degree `d`.
pub fn classify_piece(eff: &Efficient, piece: &Path, d: usize) -> Option<PathUnit> {
    let edges = piece.edges();
    let top = |e: Edge| eff.degree[e.geometric()] == d;
    let first = *edges.first()?;
    let last = *edges.last()?;
    let head = (!first.is_reversed() && top(first)).then(|| first.geometric());
    let tail = (last.is_reversed() && top(last) && (edges.len() >= 2 || head.is_none()))
        .then(|| last.geometric());
    let from = usize::from(head.is_some());
    let to = edges.len() - usize::from(tail.is_some());
    if from > to {
        return None;
    }
    let gamma = &edges[from..to];
    if gamma.iter().any(|e| eff.degree[e.geometric()] >= d) {
        return None;
    }
    let kind = match (head, tail) {
        (Some(_), Some(_)) => UnitType::I,
        (Some(_), None) => UnitType::II,
        (None, Some(_)) => UnitType::III,
        (None, None) => return None,
    };
    Some(PathUnit {
        kind,
        degree: d,
        a: head,
        b: tail,
        gamma: piece.subpath(&eff.rep.graph, from, to),
        path: piece.clone(),
    })
}

/// The path unit structure of a tight path of degree at least 2.
pub fn unit_structure(
    eff: &Efficient,
    path: &Path,
    probe_depth: usize,
) -> Result<UnitStructure, SplitError> {
    let d = eff.path_degree(path);
    if d < 2 {
        return Err(SplitError::Domain(format!(
            "path has degree {d}; unit structure needs degree at least 2"
        )));
    }
    let pieces = canonical_f_split(eff, path, probe_depth)?;
    Ok(pieces
        .iter()
        .map(|p| {
            if eff.path_degree(p) < d {
                None
            } else {
                Some(
                    classify_piece(eff, p, d)
                        .expect("a top-degree piece of the canonical splitting is a path unit")
                        .structure(),
                )
            }
        })
        .collect())
}
