//! The witness circuit, the closed apt immersion for it and the cover-level
//! homology certificate, with an exhaustive search over small covers as an
//! independent check.

use std::collections::VecDeque;
use std::sync::Arc;

use num_integer::Integer;
use serde::Serialize;

use crate::apt::linear::linear_apt;
use crate::apt::open::{can_open, open_family, OpenConfig};
use crate::apt::sigma::{nonlinear_sigma, SigmaConfig};
use crate::apt::stable::cover_period;
use crate::apt::{
    fits, sample_lifts, AptCertificate, AptError, Stability, DEFAULT_MAX_SHEETS, K_MAX_LINEAR,
    K_MAX_NONLINEAR,
};
use crate::folding::{complete_to_cover, enumerate_covers, fold, Lift, Lifter};
use crate::graph::{Edge, Graph, Path};
use crate::homology::{
    induced_matrix, matrix_growth_class, pg_abelianized_degree, CycleBasis, GrowthClass,
};
use crate::labelled::{combine_based, LabelledGraph};
use crate::path_units::canonical_f_split;
use crate::rep::{well_chosen, Efficient, Representative, DEFAULT_PROBE_DEPTH};

/// Default sheet bound of the exhaustive cover search.
pub const DEFAULT_FALLBACK_BOUND: usize = 5;

/// Coset tables tried per sheet count before the exhaustive search stops.
const FALLBACK_TABLE_BUDGET: u128 = 2_000_000;

#[derive(Clone, Copy, Debug)]
pub struct TheoremConfig {
    pub max_sheets: usize,
    /// Samples per certificate; `None` for 12 (linear) or 8 (otherwise).
    pub k_max: Option<usize>,
    pub fallback_bound: usize,
    /// Run the exhaustive search even when the pipeline succeeds.
    pub confirm: bool,
    pub jobs: usize,
    /// Cap on the period of the lifted map on a cover.
    pub cover_period_cap: usize,
    pub sigma: SigmaConfig,
}

impl Default for TheoremConfig {
    fn default() -> Self {
        TheoremConfig {
            max_sheets: DEFAULT_MAX_SHEETS,
            k_max: None,
            fallback_bound: DEFAULT_FALLBACK_BOUND,
            confirm: true,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            cover_period_cap: 100_000,
            sigma: SigmaConfig::default(),
        }
    }
}

/// A shortest tight circuit through the top edge `e_h`, read from `e_h`.
pub fn witness_circuit(eff: &Efficient) -> Result<Path, AptError> {
    let g = &eff.rep.graph;
    let n = g.edge_count();
    if n == 0 {
        return Err(AptError::Domain("the graph has no edges".into()));
    }
    let eh = Edge::new(n - 1, false);
    let home = g.initial(eh);
    // states are directed edges: the last edge crossed
    let mut prev: Vec<Option<Edge>> = vec![None; 2 * n];
    let mut seen = vec![false; 2 * n];
    let idx = |e: Edge| 2 * e.geometric() + usize::from(e.is_reversed());
    seen[idx(eh)] = true;
    let mut queue = VecDeque::from([eh]);
    while let Some(last) = queue.pop_front() {
        let v = g.terminal(last);
        if v == home && last != eh.reverse() {
            let mut edges = vec![last];
            let mut cur = last;
            while let Some(p) = prev[idx(cur)] {
                edges.push(p);
                cur = p;
            }
            edges.reverse();
            return Ok(Path::from_parts(home, home, edges));
        }
        for &e in g.star(v) {
            if e == last.reverse() || seen[idx(e)] {
                continue;
            }
            seen[idx(e)] = true;
            prev[idx(e)] = Some(last);
            queue.push_back(e);
        }
    }
    Err(AptError::Domain(
        "no tight circuit crosses the top edge".into(),
    ))
}

/// Apt immersion for a circuit of degree at least 2: `Sigma` for the piece
/// of the well-chosen rotation that starts with the top edge, open
/// immersions for the other pieces, joined into a base-pointed immersion.
pub fn nonlinear_apt(
    eff: &Efficient,
    circuit: &Path,
    cfg: &TheoremConfig,
) -> Result<(AptCertificate, Vec<String>), AptError> {
    let d = eff.path_degree(circuit);
    if d < 2 {
        return Err(AptError::Domain(format!("circuit has degree {d}")));
    }
    let (mut rho, _) = well_chosen(&eff.rep, circuit)?;
    let h = rho.edges().iter().map(|e| e.geometric()).max().unwrap();
    if rho.first() != Some(Edge::new(h, false)) {
        rho = rho.reverse();
    }
    let pieces = canonical_f_split(eff, &rho, DEFAULT_PROBE_DEPTH)?;
    let mut notes = Vec::new();
    let sigma_cfg = SigmaConfig {
        k_max: cfg.k_max.unwrap_or(K_MAX_NONLINEAR),
        max_sheets: cfg.max_sheets,
        ..cfg.sigma
    };
    let first = nonlinear_sigma(eff, &pieces[0], &sigma_cfg)?;
    notes.push(format!(
        "Sigma for {}: {:?}, l = {}, q = {}, {} vertices",
        eff.rep.show(&pieces[0]),
        first.case,
        first.params.l,
        first.q,
        first.sigma.carrier.vertex_count()
    ));
    let mut q = first.q;
    let mut parts = vec![first.sigma];
    let open_cfg = OpenConfig {
        index_bound: cfg.sigma.index_bound,
        period_cap: cfg.sigma.period_cap,
    };
    for p in &pieces[1..] {
        let (g, period) = match can_open(eff, p, cfg.sigma.period_cap) {
            Ok(o) => (o.graph, o.period),
            Err(_) => {
                let fam = open_family(eff, p, &open_cfg)?;
                (fam.graphs[0].clone(), fam.q)
            }
        };
        q = q.lcm(&period);
        parts.push(g);
    }
    let glued = combine_based(&parts)?;
    let f = fold(&glued);
    let v = f.vertex_map[glued.initial_point.unwrap()];
    let sigma = f.graph.with_points(Some(v), Some(v));
    let k_max = cfg.k_max.unwrap_or(K_MAX_NONLINEAR);
    let samples = sample_lifts(&sigma, &eff.rep.map, &rho, q, k_max, v, v)?;
    let (l_fit, l_ab_fit) = fits(&samples);
    Ok((
        AptCertificate {
            sigma,
            base_vertex: v,
            q,
            rho,
            samples,
            l_fit,
            l_ab_fit,
        },
        notes,
    ))
}

/// Dispatch by the degree of the circuit.
pub fn apt_certificate(
    eff: &Efficient,
    circuit: &Path,
    cfg: &TheoremConfig,
) -> Result<(AptCertificate, Vec<String>), AptError> {
    match eff.path_degree(circuit) {
        0 => Err(AptError::Domain("circuit has bounded growth".into())),
        1 => Ok((
            linear_apt(eff, circuit, Some(cfg.k_max.unwrap_or(K_MAX_LINEAR)))?,
            Vec::new(),
        )),
        _ => nonlinear_apt(eff, circuit, cfg),
    }
}

/// A finite cover with the homology growth of a vertex-fixing lift of a
/// power of the map.
#[derive(Clone, Debug)]
pub struct CoverWitness {
    pub cover: LabelledGraph,
    pub sheets: usize,
    /// The power `N` of `f` whose lift fixes every vertex.
    pub power: usize,
    pub rank: usize,
    pub class: GrowthClass,
}

#[derive(Serialize)]
struct WitnessJson {
    sheets: usize,
    vertices: usize,
    edges: usize,
    power: usize,
    rank: usize,
    homology_degree: Option<usize>,
}

impl CoverWitness {
    pub fn degree(&self) -> Option<usize> {
        self.class.degree()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(WitnessJson {
            sheets: self.sheets,
            vertices: self.cover.carrier.vertex_count(),
            edges: self.cover.carrier.edge_count(),
            power: self.power,
            rank: self.rank,
            homology_degree: self.degree(),
        })
        .unwrap()
    }
}

/// The lift of `f^N` fixing every vertex of a finite cover, with `N` the
/// least such power, and the growth class of the induced map on homology.
pub fn cover_homology(
    eff: &Efficient,
    cover: &LabelledGraph,
    cap: usize,
) -> Result<CoverWitness, AptError> {
    if !cover.is_cover() {
        return Err(AptError::Domain("not a cover".into()));
    }
    let map = &eff.rep.map;
    let n = match cover_period(map, cover, cap) {
        Stability::Stable { period } => period,
        Stability::Unstable { reason } => {
            return Err(AptError::Resource(format!(
                "no vertex-fixing lift: {reason}"
            )))
        }
    };
    let images = map.power_map(n);
    let lifter = Lifter::new(cover);
    let mut lifted = Vec::with_capacity(cover.carrier.edge_count());
    for (g, &[a, b]) in cover.carrier.geometric_ends().iter().enumerate() {
        let l = cover.edge_label[g];
        let img = if l.is_reversed() {
            images[l.geometric()].reverse()
        } else {
            images[l.geometric()].clone()
        };
        match lifter.lift(a, &img)? {
            Lift::Complete(p) if p.end() == b => lifted.push(p),
            _ => {
                return Err(AptError::Construction(format!(
                    "the image of carrier edge {g} does not lift between its ends"
                )))
            }
        }
    }
    let basis = CycleBasis::new(&cover.carrier, 0);
    let m = induced_matrix(&lifted, &cover.carrier, &basis)?;
    let class = matrix_growth_class(&m, None)?;
    let sheets = cover.fiber_sizes().into_iter().max().unwrap_or(0);
    Ok(CoverWitness {
        cover: cover.clone(),
        sheets,
        power: n,
        rank: basis.rank(),
        class,
    })
}

/// Smallest cover (by sheets, then canonical order) among the connected
/// covers with at most `bound` sheets whose homology degree is `target`.
/// Returns the witness and the notes on skipped sheet counts.
pub fn fallback_search(
    eff: &Efficient,
    target: usize,
    bound: usize,
    jobs: usize,
    cap: usize,
) -> (Option<CoverWitness>, Vec<String>) {
    let base: &Arc<Graph> = &eff.rep.graph;
    let rank = (base.edge_count() + 1).saturating_sub(base.vertex_count()) as u32;
    let mut notes = Vec::new();
    for s in 1..=bound {
        let tables = (1..=s as u128).product::<u128>().saturating_pow(rank);
        if tables > FALLBACK_TABLE_BUDGET {
            notes.push(format!(
                "cover search stopped before {s} sheets ({tables} coset tables)"
            ));
            break;
        }
        let covers = match enumerate_covers(base, s, bound.max(crate::folding::DEFAULT_COVER_BOUND))
        {
            Ok(c) => c,
            Err(e) => {
                notes.push(format!("cover enumeration at {s} sheets failed: {e}"));
                break;
            }
        };
        let jobs = jobs.max(1).min(covers.len().max(1));
        let chunk = covers.len().div_ceil(jobs).max(1);
        let found: Vec<Option<(usize, CoverWitness)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = covers
                .chunks(chunk)
                .enumerate()
                .map(|(c, part)| {
                    scope.spawn(move || {
                        part.iter().enumerate().find_map(|(i, cov)| {
                            let w = cover_homology(eff, cov, cap).ok()?;
                            (w.degree() == Some(target)).then_some((c * chunk + i, w))
                        })
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("search thread"))
                .collect()
        });
        if let Some((_, w)) = found.into_iter().flatten().min_by_key(|x| x.0) {
            return (Some(w), notes);
        }
    }
    (None, notes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// The representative's own graph already has homology degree `eta`.
    Base,
    /// The completion of the apt immersion.
    Pipeline,
    /// A cover found by exhaustive search.
    Fallback,
    /// No cover with homology degree `eta` was found.
    None,
}

#[derive(Clone, Debug)]
pub struct MainTheoremCertificate {
    pub eta: usize,
    pub base_degree: Option<usize>,
    pub circuit: Option<Path>,
    pub apt: Option<AptCertificate>,
    pub pipeline: Option<CoverWitness>,
    pub fallback: Option<CoverWitness>,
    pub route: Route,
    pub notes: Vec<String>,
}

impl MainTheoremCertificate {
    fn chosen(&self) -> Option<&CoverWitness> {
        match self.route {
            Route::Pipeline => self.pipeline.as_ref(),
            Route::Fallback => self.fallback.as_ref(),
            _ => None,
        }
    }

    pub fn homology_degree(&self) -> Option<usize> {
        match self.route {
            Route::Base => self.base_degree,
            _ => self.chosen().and_then(|w| w.degree()),
        }
    }

    pub fn sheets(&self) -> Option<usize> {
        match self.route {
            Route::Base => Some(1),
            _ => self.chosen().map(|w| w.sheets),
        }
    }

    /// A cover realizing the growth degree was found.
    pub fn holds(&self) -> bool {
        self.homology_degree() == Some(self.eta)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "eta": self.eta,
            "q": self.apt.as_ref().map(|a| a.q),
            "sheets": self.sheets(),
            "homology_degree": self.homology_degree(),
            "samples": self.apt.as_ref().map(|a| a.samples.clone()).unwrap_or_default(),
            "route": self.route,
            "circuit_length": self.circuit.as_ref().map(|c| c.len()),
            "sigma": self.apt.as_ref().map(|a| serde_json::json!({
                "vertices": a.sigma.carrier.vertex_count(),
                "edges": a.sigma.carrier.edge_count(),
                "l_fit": a.l_fit,
                "l_ab_fit": a.l_ab_fit,
            })),
            "base_degree": self.base_degree,
            "pipeline": self.pipeline.as_ref().map(|w| w.to_json()),
            "fallback": self.fallback.as_ref().map(|w| w.to_json()),
            "holds": self.holds(),
            "notes": self.notes,
        })
    }
}

/// Builds the apt immersion for the witness circuit, completes it to a
/// cover and measures the homology growth of the lifted map. Failures of
/// the pipeline are recorded in the notes and the exhaustive search decides.
pub fn verify_main_theorem(
    rep: &Representative,
    cfg: &TheoremConfig,
) -> Result<MainTheoremCertificate, AptError> {
    let eff = Efficient::new(rep)?;
    let eta = eff.eta;
    let base_degree = pg_abelianized_degree(&eff.rep).ok();
    let mut cert = MainTheoremCertificate {
        eta,
        base_degree,
        circuit: None,
        apt: None,
        pipeline: None,
        fallback: None,
        route: Route::None,
        notes: Vec::new(),
    };
    if eta == 0 {
        cert.route = Route::Base;
        cert.notes
            .push("bounded growth: the base graph is its own certificate".into());
        return Ok(cert);
    }
    let circuit = witness_circuit(&eff)?;
    cert.circuit = Some(circuit.clone());
    match apt_certificate(&eff, &circuit, cfg) {
        Ok((apt, notes)) => {
            cert.notes.extend(notes);
            if apt.l_ab_fit != Some(eta) {
                cert.notes.push(format!(
                    "apt immersion l_ab fit {:?} differs from eta",
                    apt.l_ab_fit
                ));
            }
            match complete_to_cover(&apt.sigma) {
                Ok((cover, c)) if c.sheets <= cfg.max_sheets => {
                    match cover_homology(&eff, &cover, cfg.cover_period_cap) {
                        Ok(w) => cert.pipeline = Some(w),
                        Err(e) => cert.notes.push(format!("pipeline cover: {e}")),
                    }
                }
                Ok((_, c)) => cert.notes.push(format!(
                    "pipeline cover needs {} sheets, over the bound {}",
                    c.sheets, cfg.max_sheets
                )),
                Err(e) => cert.notes.push(format!("cover completion failed: {e}")),
            }
            cert.apt = Some(apt);
        }
        Err(e) => cert.notes.push(format!("apt immersion: {e}")),
    }
    let pipeline_ok = cert.pipeline.as_ref().and_then(|w| w.degree()) == Some(eta);
    if let Some(w) = &cert.pipeline {
        if !pipeline_ok {
            cert.notes
                .push(format!("pipeline cover has homology class {:?}", w.class));
        }
    }
    if cfg.confirm || !pipeline_ok {
        let (found, notes) = fallback_search(
            &eff,
            eta,
            cfg.fallback_bound,
            cfg.jobs,
            cfg.cover_period_cap,
        );
        cert.notes.extend(notes);
        if found.is_none() {
            cert.notes.push(format!(
                "no cover with at most {} sheets has homology degree {eta}",
                cfg.fallback_bound
            ));
        }
        cert.fallback = found;
    }
    cert.route = if pipeline_ok {
        Route::Pipeline
    } else if cert.fallback.is_some() {
        Route::Fallback
    } else if base_degree == Some(eta) {
        Route::Base
    } else {
        Route::None
    };
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apt::testing::eff;
    use crate::rep::tests::{E1, E2};

    #[test]
    fn witness_circuits() {
        let e = eff(E1);
        assert_eq!(e.rep.show(&witness_circuit(&e).unwrap()), "e3");
        let e = eff(E2);
        assert_eq!(e.rep.show(&witness_circuit(&e).unwrap()), "c");
    }

    #[test]
    fn witness_through_a_tree() {
        let e = eff("rep T\nvertices v0 v1\nedge a : v0 -> v0\nedge t : v0 -> v1\nedge b : v1 -> v1\nedge c : v0 -> v1\nmap a -> a\nmap t -> t\nmap b -> b\nmap c -> c b\n");
        let w = witness_circuit(&e).unwrap();
        assert!(w.is_closed() && w.is_cyclically_reduced());
        assert_eq!(w.first(), Some(Edge::new(3, false)));
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn e1_base_graph_suffices() {
        let cfg = TheoremConfig {
            confirm: false,
            ..TheoremConfig::default()
        };
        let cert = verify_main_theorem(&Representative::parse(E1).unwrap(), &cfg).unwrap();
        assert_eq!(cert.eta, 2);
        assert_eq!(cert.base_degree, Some(2));
        assert!(cert.holds());
        assert_eq!(cert.pipeline.as_ref().and_then(|w| w.degree()), Some(2));
    }

    #[test]
    fn identity_is_trivial() {
        let rep = Representative::parse(
            "rep I\nedge a : v0 -> v0\nedge b : v0 -> v0\nmap a -> a\nmap b -> b\n",
        )
        .unwrap();
        let cert = verify_main_theorem(&rep, &TheoremConfig::default()).unwrap();
        assert_eq!(
            (cert.eta, cert.route, cert.homology_degree()),
            (0, Route::Base, Some(0))
        );
    }

    #[test]
    fn e2_cover_sees_quadratic_growth() {
        let cfg = TheoremConfig {
            confirm: false,
            ..TheoremConfig::default()
        };
        let cert = verify_main_theorem(&Representative::parse(E2).unwrap(), &cfg).unwrap();
        assert_eq!(cert.base_degree, Some(1));
        assert_eq!(cert.route, Route::Pipeline, "{:?}", cert.notes);
        assert!(cert.sheets().unwrap() <= DEFAULT_MAX_SHEETS);
        assert_eq!(cert.homology_degree(), Some(2));
    }

    #[test]
    fn degree_three_uses_the_recursion() {
        let rep = Representative::parse("rep D3\nedge a : v0 -> v0\nedge b : v0 -> v0\nedge c : v0 -> v0\nedge d : v0 -> v0\nmap a -> a\nmap b -> b a\nmap c -> c b\nmap d -> d c\n").unwrap();
        let cfg = TheoremConfig {
            confirm: false,
            ..TheoremConfig::default()
        };
        let cert = verify_main_theorem(&rep, &cfg).unwrap();
        assert_eq!(cert.eta, 3);
        assert_eq!(cert.apt.as_ref().unwrap().l_ab_fit, Some(3));
        assert_eq!(cert.homology_degree(), Some(3));
    }
}
