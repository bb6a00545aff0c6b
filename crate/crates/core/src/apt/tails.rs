//! The tails `S_a^+` and `S_a^-` of a non-fixed edge, materialized as lists
//! of canonical splitting pieces, and window scans for the balloon lemmas.

use crate::apt::AptError;
use crate::graph::{Edge, Path};
use crate::growth_units::Units;
use crate::path_units::{canonical_f_split, is_cut_edge};
use crate::rep::{reverse_rep, Efficient, SuffixMap, DEFAULT_PROBE_DEPTH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

/// A materialized prefix of `S_a^+` (pieces `alpha_{a,i}`) or `S_a^-`
/// (pieces `beta_{a,i}`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tail {
    pub a: usize,
    pub sign: Sign,
    /// The semiperiod `s_a`.
    pub s: usize,
    /// Whether `u_a` was split by the rule for well-chosen suffixes.
    pub well_chosen: bool,
    pub pieces: Vec<Path>,
}

impl Tail {
    pub fn edges(&self) -> Vec<Edge> {
        self.pieces
            .iter()
            .flat_map(|p| p.edges().iter().copied())
            .collect()
    }

    /// Index of the first piece from which `piece[i + s] = g(piece[i])`
    /// holds.
    pub fn periodic_from(&self) -> usize {
        1
    }

    /// Checks `piece[i + s] = g(piece[i])` for `i >= 1` on the prefix, with
    /// `g = f_#` for `S^+` and `g = fbar_#` for `S^-`.
    pub fn semiperiodic(&self, g: &SuffixMap) -> bool {
        (self.periodic_from()..self.pieces.len().saturating_sub(self.s))
            .all(|i| g.apply(&self.pieces[i]) == self.pieces[i + self.s])
    }
}

/// The pieces `epsilon` of `u_a` and whether the rule for well-chosen
/// suffixes applies. The rule is used whenever the splitting of `u_a` has no
/// leading or trailing fragment, that is when `u_a` begins with a cut edge or
/// ends with a reversed cut edge.
fn suffix_pieces(eff: &Efficient, u: &Path) -> Result<(Vec<Path>, bool), AptError> {
    let pieces = canonical_f_split(eff, u, DEFAULT_PROBE_DEPTH)?;
    let h = u
        .edges()
        .iter()
        .map(|e| e.geometric())
        .max()
        .expect("nontrivial suffix");
    let first = u.first().unwrap();
    let last = u.last().unwrap();
    let starts = !first.is_reversed() && is_cut_edge(eff, h, first.geometric());
    let ends = last.is_reversed() && is_cut_edge(eff, h, last.geometric());
    Ok((pieces, starts || ends))
}

/// The first `count` pieces of `S_a^+` and `S_a^-`. For a linear edge the
/// pieces are copies of `u_a` and of its reverse.
pub fn tails(eff: &Efficient, a: usize, count: usize) -> Result<(Tail, Tail), AptError> {
    let map = &eff.rep.map;
    let Some(u) = eff.rep.suffix(a).cloned() else {
        return Err(AptError::Domain(format!(
            "{} is a fixed edge and has no tails",
            eff.rep.edge_names[a]
        )));
    };
    let fbar = reverse_rep(&eff.rep)?;
    if eff.degree[a] == 1 {
        let ubar = u.reverse();
        let plus = Tail {
            a,
            sign: Sign::Plus,
            s: 1,
            well_chosen: true,
            pieces: vec![u; count],
        };
        let minus = Tail {
            a,
            sign: Sign::Minus,
            s: 1,
            well_chosen: true,
            pieces: vec![ubar; count],
        };
        return Ok((plus, minus));
    }
    let (parts, wc) = suffix_pieces(eff, &u)?;
    let (eps, s, first_plus, first_minus): (Vec<Path>, usize, Option<Path>, Option<Path>) = if wc {
        let s = parts.len();
        (parts, s, None, None)
    } else {
        let t = parts.len();
        let head = parts[0].clone();
        let tail = parts[t - 1].clone();
        let eps0 = fbar.apply(&tail).concat(&head)?.tighten();
        let mut eps = vec![eps0];
        eps.extend(parts[1..t - 1].iter().cloned());
        let first_minus = fbar.apply(&tail.reverse());
        (eps, t - 1, Some(head), Some(first_minus))
    };
    // S^+: alpha_i = f^{floor(i/s)}(eps_{i mod s}), alpha_0 replaced by the
    // leading fragment when there is one
    let mut plus = Vec::with_capacity(count);
    let mut cur: Vec<Path> = eps.clone();
    let mut i = 0;
    'outer: loop {
        for j in 0..s {
            if plus.len() == count {
                break 'outer;
            }
            if i == 0 && j == 0 {
                if let Some(h) = &first_plus {
                    plus.push(h.clone());
                    continue;
                }
            }
            plus.push(cur[j].clone());
        }
        cur = cur.iter().map(|p| map.apply(p)).collect();
        i += 1;
    }
    // S^-: fbar of the reversed pieces in descending order, one more power
    // per block, after the reversed trailing fragment when there is one
    let mut minus = Vec::with_capacity(count);
    if let Some(m) = first_minus {
        if count > 0 {
            minus.push(m);
        }
    }
    let mut cur: Vec<Path> = eps.iter().map(|p| fbar.apply(&p.reverse())).collect();
    while minus.len() < count {
        for j in (0..s).rev() {
            if minus.len() == count {
                break;
            }
            minus.push(cur[j].clone());
        }
        cur = cur.iter().map(|p| fbar.apply(p)).collect();
    }
    Ok((
        Tail {
            a,
            sign: Sign::Plus,
            s,
            well_chosen: wc,
            pieces: plus,
        },
        Tail {
            a,
            sign: Sign::Minus,
            s,
            well_chosen: wc,
            pieces: minus,
        },
    ))
}

/// Pieces enough to cover `window` edges.
pub fn tails_window(eff: &Efficient, a: usize, window: usize) -> Result<(Tail, Tail), AptError> {
    let mut count = 4;
    loop {
        let (p, m) = tails(eff, a, count)?;
        let lp: usize = p.pieces.iter().map(|x| x.len()).sum();
        let lm: usize = m.pieces.iter().map(|x| x.len()).sum();
        if (lp >= window && lm >= window) || count > 4 * window {
            return Ok((p, m));
        }
        count *= 2;
    }
}

/// Outcome of the balloon window scans for a pair of edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalloonReport {
    pub a: usize,
    pub b: usize,
    pub linear: bool,
    /// Overlap threshold: edges for linear tails, complete pieces otherwise.
    pub k: usize,
    pub window: usize,
    /// Largest overlap seen for `(+,+)`, `(-,-)` and mixed signs, in the
    /// same unit as `k`.
    pub max_plus_plus: usize,
    pub max_minus_minus: usize,
    pub max_mixed: usize,
    pub violations: Vec<String>,
}

impl BalloonReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `lcp[x][y]`: length of the longest common run starting at `x` in `s` and
/// `y` in `t`.
fn run_table(s: &[Edge], t: &[Edge]) -> Vec<Vec<u32>> {
    let mut lcp = vec![vec![0u32; t.len() + 1]; s.len() + 1];
    for x in (0..s.len()).rev() {
        for y in (0..t.len()).rev() {
            if s[x] == t[y] {
                lcp[x][y] = lcp[x + 1][y + 1] + 1;
            }
        }
    }
    lcp
}

fn truncate(e: Vec<Edge>, window: usize) -> Vec<Edge> {
    let mut e = e;
    e.truncate(window);
    e
}

/// Piece boundaries of a tail as edge offsets.
fn boundaries(t: &Tail) -> Vec<usize> {
    let mut out = vec![0];
    for p in &t.pieces {
        out.push(out.last().unwrap() + p.len());
    }
    out
}

/// Complete pieces of `bounds` inside `[x, x + len)`.
fn complete_pieces(bounds: &[usize], x: usize, len: usize) -> usize {
    bounds
        .windows(2)
        .filter(|w| w[0] >= x && w[1] <= x + len && w[1] > w[0])
        .count()
}

fn is_cyclic_permutation(a: &[Edge], b: &[Edge]) -> bool {
    a.len() == b.len()
        && (0..a.len().max(1)).any(|r| a.iter().cycle().skip(r).take(a.len()).eq(b.iter()))
}

/// Scans windows of the tails of `a` and `b` for common subpaths and checks
/// the conclusions of the balloon lemmas. Linear edges: an overlap of at
/// least `l(mu_a) l(mu_b)` edges forces `mu_a = mu_b` (same signs) or `mu_a`
/// a cyclic permutation of `reverse(mu_b)` (mixed signs). Higher degree: an
/// overlap containing `s_a s_b + min(s_a, s_b) + 1` complete pieces forces
/// `a = b` at the same offset, and is impossible for mixed signs.
pub fn balloon_checks(
    eff: &Efficient,
    a: usize,
    b: usize,
    window: usize,
) -> Result<BalloonReport, AptError> {
    let (da, db) = (eff.degree[a], eff.degree[b]);
    if da == 0 || db == 0 || da != db {
        return Err(AptError::Domain(
            "balloon checks need two non-fixed edges of equal degree".into(),
        ));
    }
    let (pa, ma) = tails_window(eff, a, window)?;
    let (pb, mb) = tails_window(eff, b, window)?;
    let (spa, sma, spb, smb) = (
        truncate(pa.edges(), window),
        truncate(ma.edges(), window),
        truncate(pb.edges(), window),
        truncate(mb.edges(), window),
    );
    let mut violations = Vec::new();
    if da == 1 {
        let units = Units::new(eff)?;
        let mu_a = units.linear(a).unwrap().mu.edges().to_vec();
        let mu_b = units.linear(b).unwrap().mu.edges().to_vec();
        let k = mu_a.len() * mu_b.len();
        let longest = |s: &[Edge], t: &[Edge]| {
            run_table(s, t)
                .iter()
                .flat_map(|r| r.iter().copied())
                .max()
                .unwrap_or(0) as usize
        };
        let pp = longest(&spa, &spb);
        let mm = longest(&sma, &smb);
        let mixed = longest(&spa, &smb).max(longest(&spb, &sma));
        if pp >= k && mu_a != mu_b {
            violations.push(format!("S+ overlap of {pp} edges but mu_a != mu_b"));
        }
        if mm >= k && mu_a != mu_b {
            violations.push(format!("S- overlap of {mm} edges but mu_a != mu_b"));
        }
        let rev_b: Vec<Edge> = mu_b.iter().rev().map(|e| e.reverse()).collect();
        if mixed >= k && !is_cyclic_permutation(&mu_a, &rev_b) {
            violations.push(format!("mixed overlap of {mixed} edges but mu_a is not a cyclic permutation of reverse(mu_b)"));
        }
        return Ok(BalloonReport {
            a,
            b,
            linear: true,
            k,
            window,
            max_plus_plus: pp,
            max_minus_minus: mm,
            max_mixed: mixed,
            violations,
        });
    }
    let k = pa.s * pb.s + pa.s.min(pb.s) + 1;
    // overlaps measured in complete pieces of the first tail
    let scan = |s: &[Edge],
                ts: &Tail,
                t: &[Edge],
                same_sign: bool,
                label: &str,
                violations: &mut Vec<String>|
     -> usize {
        let bounds = boundaries(ts);
        let lcp = run_table(s, t);
        let mut best = 0;
        for x in 0..s.len() {
            for y in 0..t.len() {
                let len = lcp[x][y] as usize;
                if len == 0 || (x > 0 && y > 0 && s[x - 1] == t[y - 1]) {
                    continue;
                }
                let units = complete_pieces(&bounds, x, len);
                best = best.max(units);
                if units >= k {
                    if !same_sign {
                        violations.push(format!(
                            "{label}: overlap at ({x},{y}) holds {units} complete pieces"
                        ));
                    } else if a != b || x != y {
                        violations.push(format!("{label}: overlap at ({x},{y}) holds {units} complete pieces but tails differ"));
                    }
                }
            }
        }
        best
    };
    let pp = scan(&spa, &pa, &spb, true, "S+ vs S+", &mut violations);
    let mm = scan(&sma, &ma, &smb, true, "S- vs S-", &mut violations);
    let mixed = scan(&spa, &pa, &smb, false, "S_a+ vs S_b-", &mut violations).max(scan(
        &spb,
        &pb,
        &sma,
        false,
        "S_b+ vs S_a-",
        &mut violations,
    ));
    Ok(BalloonReport {
        a,
        b,
        linear: false,
        k,
        window,
        max_plus_plus: pp,
        max_minus_minus: mm,
        max_mixed: mixed,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apt::testing::eff;
    use crate::rep::tests::{E1, E2};

    fn show(e: &Efficient, t: &Tail) -> Vec<String> {
        t.pieces.iter().map(|p| e.rep.show(p)).collect()
    }

    /// Longest common prefix of `g^k(e_a)` and `g^{k+1}(e_a)` after `e_a`.
    fn stable_limit(g: &SuffixMap, a: usize, k: usize) -> Vec<Edge> {
        let e = Path::edge(&g.graph, Edge::new(a, false));
        let x = g.iterate_naive(&e, k);
        let y = g.iterate_naive(&e, k + 1);
        let n = x
            .edges()
            .iter()
            .zip(y.edges())
            .take_while(|(p, q)| p == q)
            .count();
        x.edges()[1..n].to_vec()
    }

    fn check_against_limits(e: &Efficient, a: usize, count: usize, k: usize) {
        let (p, m) = tails(e, a, count).unwrap();
        let fbar = reverse_rep(&e.rep).unwrap();
        for (t, g) in [(&p, &e.rep.map), (&m, &fbar)] {
            let lim = stable_limit(g, a, k);
            let edges = t.edges();
            let n = edges.len().min(lim.len());
            assert!(n >= 10, "limit too short to compare");
            assert_eq!(
                &edges[..n],
                &lim[..n],
                "tail {:?} of {}",
                t.sign,
                e.rep.edge_names[a]
            );
            assert!(t.semiperiodic(g));
        }
    }

    #[test]
    fn e1_tails() {
        let e = eff(E1);
        let (p, m) = tails(&e, 2, 3).unwrap();
        assert_eq!(show(&e, &p), vec!["e1", "e2 e1", "e2 e1 e1"]);
        assert_eq!(p.edges(), e.rep.path("e1 e2 e1 e2 e1 e1").unwrap().edges());
        assert_eq!(show(&e, &m)[..2], ["e1 ~e2", "e1 ~e2"]);
        check_against_limits(&e, 2, 12, 8);
    }

    #[test]
    fn linear_tails_repeat_the_suffix() {
        let e = eff(E1);
        let (p, m) = tails(&e, 1, 4).unwrap();
        assert_eq!(show(&e, &p), vec!["e1"; 4]);
        assert_eq!(show(&e, &m), vec!["~e1"; 4]);
        check_against_limits(&e, 1, 12, 14);
    }

    #[test]
    fn e2_tails() {
        let e = eff(E2);
        let (p, _) = tails(&e, 2, 8).unwrap();
        assert_eq!(p.s, 4);
        assert_eq!(show(&e, &p)[..5], ["b", "b a ~b", "~b", "~a", "b a"]);
        check_against_limits(&e, 2, 16, 7);
    }

    #[test]
    fn fixed_edges_have_no_tails() {
        let e = eff(E1);
        assert!(matches!(tails(&e, 0, 3), Err(AptError::Domain(_))));
    }

    #[test]
    fn balloon_scans_on_small_reps() {
        let e = eff(E1);
        for (a, b) in [(1, 1), (2, 2)] {
            let r = balloon_checks(&e, a, b, 200).unwrap();
            assert!(r.passed(), "{:?}", r.violations);
        }
        let r = balloon_checks(&e, 1, 1, 200).unwrap();
        assert_eq!(r.max_mixed, 0);
        let e = eff(E2);
        assert!(balloon_checks(&e, 2, 2, 200).unwrap().passed());
        assert!(balloon_checks(&e, 1, 1, 200).unwrap().passed());
    }
}
