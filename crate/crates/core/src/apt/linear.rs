//! Diagram units, the `Lambda` and `Sigma` constructions for linear paths and
//! the linear certificate.

use num_integer::Integer;

use crate::apt::{fits, sample_lifts, AptCertificate, AptError, K_MAX_LINEAR};
use crate::folding::{fold, Folded};
use crate::graph::{Edge, Path};
use crate::growth_units::{GrowthUnit, UnitKind, Units};
use crate::labelled::{circle, combine, combine_based, line, LabelledGraph};
use crate::rep::{well_chosen, Efficient};

/// `(lambda_0, lambda_1)`: the lcm of the `l(mu_i)` over linear edges and the
/// longest exceptional subpath of any `mu_i`. `(1, 0)` without linear edges.
pub fn lambda_constants(units: &Units) -> (usize, usize) {
    let eff = units.eff;
    let mut l0 = 1usize;
    let mut l1 = 0usize;
    for i in 0..eff.rep.edge_count() {
        let Some(data) = units.linear(i) else {
            continue;
        };
        l0 = l0.lcm(&data.mu.len());
        let mu = data.mu.edges();
        for p in 0..mu.len() {
            let Some(a) = forward_linear(units, mu[p]) else {
                continue;
            };
            for r in p + 1..mu.len() {
                let Some(b) = reversed_linear(units, mu[r]) else {
                    continue;
                };
                if is_exceptional(units, a, b, &mu[p + 1..r]) {
                    l1 = l1.max(r - p + 1);
                }
            }
        }
    }
    (l0, l1)
}

fn forward_linear(units: &Units, e: Edge) -> Option<usize> {
    (!e.is_reversed() && units.linear(e.geometric()).is_some()).then(|| e.geometric())
}

fn reversed_linear(units: &Units, e: Edge) -> Option<usize> {
    (e.is_reversed() && units.linear(e.geometric()).is_some()).then(|| e.geometric())
}

/// `e_a mid ~e_b` with `mu_a = mu_b` and `mid` a power of `mu_a`.
fn is_exceptional(units: &Units, a: usize, b: usize, mid: &[Edge]) -> bool {
    let (ma, mb) = (&units.linear(a).unwrap().mu, &units.linear(b).unwrap().mu);
    if ma != mb {
        return false;
    }
    let mu = ma.edges();
    if mid.is_empty() {
        return true;
    }
    let rev: Vec<Edge> = mu.iter().rev().map(|e| e.reverse()).collect();
    [mu.to_vec(), rev].iter().any(|m| {
        mid.len().is_multiple_of(m.len()) && mid.chunks(m.len()).all(|c| c == m.as_slice())
    })
}

/// `Lambda(delta, q)` before and after folding, with the balloon edges of the
/// unfolded graph for active units.
#[derive(Clone, Debug)]
pub struct DiagramUnit {
    pub unit: GrowthUnit,
    pub q: usize,
    pub pre_fold: LabelledGraph,
    pub folded: LabelledGraph,
    pub balloon: Option<Vec<usize>>,
}

pub fn diagram_unit(units: &Units, unit: &GrowthUnit, q: usize) -> Result<DiagramUnit, AptError> {
    let base = &units.eff.rep.graph;
    let l = line(base, &unit.path)?;
    let n = unit.path.len();
    let anchor = match unit.kind {
        k if k.is_passive() => None,
        UnitKind::LF | UnitKind::LE | UnitKind::QE => Some((unit.a.unwrap(), 1)),
        UnitKind::LR => Some((unit.b.unwrap(), n - 1)),
        _ => unreachable!(),
    };
    let (pre_fold, balloon) = match anchor {
        None => (l, None),
        Some((g, at)) => {
            let mu = &units
                .linear(g)
                .expect("active units start or end at linear edges")
                .mu;
            let c = circle(base, &mu.power(q))?;
            let (glued, _) = l.attach(&c, &[(at, 0)])?;
            (glued, Some((n..n + c.carrier.edge_count()).collect()))
        }
    };
    let folded = fold(&pre_fold).graph;
    Ok(DiagramUnit {
        unit: unit.clone(),
        q,
        pre_fold,
        folded,
        balloon,
    })
}

/// `Lambda(rho, q)`, the immersion `Lambda[rho, q]` it determines and, for
/// closed `rho`, `Sigma[rho, q]`.
#[derive(Clone, Debug)]
pub struct Lambda {
    pub rho: Path,
    pub q: usize,
    pub units: Vec<DiagramUnit>,
    pub pre_fold: LabelledGraph,
    pub folded: Folded,
    pub sigma: Option<Folded>,
    /// Balloon edges of each active unit in the numbering of `pre_fold`.
    pub balloons: Vec<Vec<usize>>,
}

impl Lambda {
    /// For each balloon, whether some edge of `Lambda[rho, q]` is covered by
    /// that balloon and by no other.
    pub fn balloon_distinctness(&self) -> Vec<bool> {
        distinct_images(&self.folded, &self.balloons)
    }
}

pub fn distinct_images(folded: &Folded, balloons: &[Vec<usize>]) -> Vec<bool> {
    let images: Vec<Vec<usize>> = balloons
        .iter()
        .map(|b| {
            let mut v: Vec<usize> = b.iter().map(|&g| folded.edge_map[g].geometric()).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    (0..images.len())
        .map(|j| {
            images[j]
                .iter()
                .any(|e| (0..images.len()).all(|k| k == j || images[k].binary_search(e).is_err()))
        })
        .collect()
}

/// Builds `Lambda(rho, q)` from the separation of `rho` and checks that
/// `f^{kq}_#(rho)` crosses `Lambda[rho, q]` for `k <= k_max`.
pub fn build_lambda(units: &Units, rho: &Path, q: usize, k_max: usize) -> Result<Lambda, AptError> {
    if q == 0 {
        return Err(AptError::Domain("q must be positive".into()));
    }
    let sep = units.separate(rho)?;
    let mut parts = Vec::new();
    let mut dus = Vec::new();
    let mut balloons = Vec::new();
    let mut offset = 0;
    for u in &sep.units {
        let du = diagram_unit(units, u, q)?;
        if let Some(b) = &du.balloon {
            balloons.push(b.iter().map(|g| g + offset).collect());
        }
        offset += du.pre_fold.carrier.edge_count();
        parts.push(du.pre_fold.clone());
        dus.push(du);
    }
    let pre_fold = combine(&parts)?;
    let folded = fold(&pre_fold);
    let map = &units.eff.rep.map;
    let (i, t) = (
        folded.graph.initial_point.unwrap(),
        folded.graph.terminal_point.unwrap(),
    );
    sample_lifts(&folded.graph, map, rho, q, k_max, i, t)?;
    let sigma = if rho.is_closed() {
        Some(fold(&combine_based(&parts)?))
    } else {
        None
    };
    Ok(Lambda {
        rho: rho.clone(),
        q,
        units: dus,
        pre_fold,
        folded,
        sigma,
        balloons,
    })
}

/// The least `q` exceeding both `2 max(lambda_0, lambda_1) + 4 lambda_0` and
/// `2 l(rho)`.
pub fn linear_q(units: &Units, rho: &Path) -> usize {
    let (l0, l1) = lambda_constants(units);
    (2 * l0.max(l1) + 4 * l0).max(2 * rho.len()) + 1
}

/// Certificate for a circuit of linear growth: `Sigma[rho, q]` for the
/// well-chosen rotation `rho`, with the lifts of `f^{kq}_#(rho)` sampled.
pub fn linear_apt(
    eff: &Efficient,
    circuit: &Path,
    k_max: Option<usize>,
) -> Result<AptCertificate, AptError> {
    let units = Units::new(eff)?;
    match eff.path_degree(circuit) {
        1 => {}
        0 => return Err(AptError::Domain("circuit has bounded growth".into())),
        d => {
            return Err(AptError::Domain(format!(
                "circuit has degree {d}, not linear growth"
            )))
        }
    }
    let (rho, _) = well_chosen(&eff.rep, circuit)?;
    let q = linear_q(&units, &rho);
    let k_max = k_max.unwrap_or(K_MAX_LINEAR);
    let lambda = build_lambda(&units, &rho, q, k_max.min(3))?;
    let sigma = lambda.sigma.expect("closed path").graph;
    let v = sigma.initial_point.unwrap();
    let samples = sample_lifts(&sigma, &eff.rep.map, &rho, q, k_max, v, v)?;
    let (l_fit, l_ab_fit) = fits(&samples);
    Ok(AptCertificate {
        sigma,
        base_vertex: v,
        q,
        rho,
        samples,
        l_fit,
        l_ab_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apt::testing::{eff, E1_RESTRICTED};
    use crate::rep::tests::E1;

    #[test]
    fn constants_for_e1() {
        let e = eff(E1);
        let u = Units::new(&e).unwrap();
        assert_eq!(lambda_constants(&u), (1, 0));
    }

    #[test]
    fn constants_lcm_of_mu_lengths() {
        let e = eff("rep L\nedge a : v0 -> v0\nedge b : v0 -> v0\nedge c : v0 -> v0\nedge d : v0 -> v0\nmap a -> a\nmap b -> b\nmap c -> c a b\nmap d -> d a a b\n");
        let u = Units::new(&e).unwrap();
        assert_eq!(lambda_constants(&u).0, 6);
    }

    #[test]
    fn constants_without_linear_edges() {
        let e = eff("rep F\nedge a : v0 -> v0\nedge b : v0 -> v0\nmap a -> a\nmap b -> b\n");
        let u = Units::new(&e).unwrap();
        assert_eq!(lambda_constants(&u), (1, 0));
    }

    #[test]
    fn single_balloon_lambda() {
        let e = eff(E1_RESTRICTED);
        let u = Units::new(&e).unwrap();
        let rho = e.rep.path("e2").unwrap();
        let lam = build_lambda(&u, &rho, 3, 5).unwrap();
        assert_eq!(lam.folded.graph.carrier.vertex_count(), 4);
        assert_eq!(lam.folded.graph.carrier.edge_count(), 4);
        assert_eq!(lam.balloon_distinctness(), vec![true]);
    }

    #[test]
    fn passive_lambda_is_the_line() {
        let e = eff(E1);
        let u = Units::new(&e).unwrap();
        let rho = e.rep.path("e1 e1").unwrap();
        let lam = build_lambda(&u, &rho, 5, 3).unwrap();
        assert!(lam.balloons.is_empty());
        assert_eq!(
            lam.folded.graph.canonical_form(),
            line(&e.rep.graph, &rho).unwrap().canonical_form()
        );
    }

    #[test]
    fn two_balloons_stay_distinct() {
        let e = eff(E1_RESTRICTED);
        let u = Units::new(&e).unwrap();
        let rho = e.rep.path("e2 e2").unwrap();
        let lam = build_lambda(&u, &rho, 3, 5).unwrap();
        assert_eq!(lam.balloon_distinctness(), vec![true, true]);
    }

    #[test]
    fn linear_certificate_grows_by_q() {
        let e = eff(E1_RESTRICTED);
        let cert = linear_apt(&e, &e.rep.path("e2").unwrap(), None).unwrap();
        assert_eq!(cert.q, 7);
        let ab: Vec<usize> = cert.samples.iter().map(|s| s.l_ab).collect();
        assert_eq!(ab, (0..=12).map(|k| 1 + 7 * k).collect::<Vec<_>>());
        assert_eq!((cert.l_fit, cert.l_ab_fit), (Some(1), Some(1)));
    }

    #[test]
    fn bounded_circuit_is_rejected() {
        let e = eff(E1);
        assert!(matches!(
            linear_apt(&e, &e.rep.path("e1").unwrap(), None),
            Err(AptError::Domain(_))
        ));
    }

    #[test]
    fn doubled_circuit_is_linear() {
        let e = eff(E1_RESTRICTED);
        let cert = linear_apt(&e, &e.rep.path("e2 e2").unwrap(), None).unwrap();
        assert_eq!(cert.l_ab_fit, Some(1));
        assert!(cert.is_valid());
    }
}
