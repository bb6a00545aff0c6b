//! First homology of graphs: cycle bases, induced integer matrices and the
//! polynomial growth class of an integer matrix.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Edge, Graph, Path, Vertex};
use crate::rep::{substitute, Representative};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error("the map moves vertex {0}")]
    MovesVertex(Vertex),
    #[error("no unipotent power up to {0}")]
    Bound(u64),
    #[error("matrix is not square")]
    NotSquare,
    #[error("exponential growth on homology: not a polynomially growing map")]
    Exponential,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: Vec<Vec<BigInt>>,
}

impl IntMatrix {
    pub fn from_i64(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix {
            rows: rows
                .iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        }
    }

    pub fn zero(n: usize) -> IntMatrix {
        IntMatrix {
            rows: vec![vec![BigInt::zero(); n]; n],
        }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zero(n);
        for i in 0..n {
            m.rows[i][i] = BigInt::one();
        }
        m
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows.iter().all(|r| r.len() == self.rows.len())
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.size();
        let m = other.rows.first().map_or(0, |r| r.len());
        let mut out = vec![vec![BigInt::zero(); m]; n];
        for i in 0..n {
            for (k, a) in self.rows[i].iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for j in 0..m {
                    let b = &other.rows[k][j];
                    if !b.is_zero() {
                        out[i][j] += a * b;
                    }
                }
            }
        }
        IntMatrix { rows: out }
    }

    pub fn pow(&self, mut k: u64) -> IntMatrix {
        let mut result = IntMatrix::identity(self.size());
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn minus_identity(&self) -> IntMatrix {
        let mut m = self.clone();
        for i in 0..m.size() {
            m.rows[i][i] -= 1;
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(|x| x.is_zero()))
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.rows
            .iter()
            .flatten()
            .map(|x| x.abs())
            .max()
            .unwrap_or_default()
    }

    pub fn trace(&self) -> BigInt {
        (0..self.size()).map(|i| self.rows[i][i].clone()).sum()
    }

    /// Characteristic polynomial `det(xI - M)`, coefficients from the
    /// constant term up, by the Faddeev-LeVerrier recursion (all divisions
    /// are exact over the integers).
    pub fn char_poly(&self) -> Vec<BigInt> {
        let n = self.size();
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[n] = BigInt::one();
        let mut m = IntMatrix::zero(n);
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I
            let mut next = self.mul(&m);
            for i in 0..n {
                next.rows[i][i] += &coeffs[n - k + 1];
            }
            m = next;
            let t = self.mul(&m).trace();
            coeffs[n - k] = -t / BigInt::from(k as i64);
        }
        coeffs
    }
}

impl std::fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// A spanning tree and the fundamental cycles of the non-tree edges, all
/// based at `root`.
#[derive(Clone, Debug)]
pub struct CycleBasis {
    pub root: Vertex,
    pub in_tree: Vec<bool>,
    /// Non-tree geometric edges, in increasing order; one basis element each.
    pub generators: Vec<usize>,
    /// Tree path from the root to every vertex.
    pub tree_paths: Vec<Path>,
    pub cycles: Vec<Path>,
}

impl CycleBasis {
    pub fn new(graph: &Graph, root: Vertex) -> CycleBasis {
        let n = graph.vertex_count();
        let mut in_tree = vec![false; graph.edge_count()];
        let mut tree_paths: Vec<Option<Path>> = vec![None; n];
        tree_paths[root] = Some(Path::trivial(root));
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &e in graph.star(v) {
                let w = graph.terminal(e);
                if tree_paths[w].is_none() {
                    in_tree[e.geometric()] = true;
                    let p = tree_paths[v]
                        .as_ref()
                        .unwrap()
                        .concat(&Path::edge(graph, e))
                        .unwrap();
                    tree_paths[w] = Some(p);
                    queue.push_back(w);
                }
            }
        }
        let tree_paths: Vec<Path> = tree_paths
            .into_iter()
            .map(|p| p.expect("connected graph"))
            .collect();
        let generators: Vec<usize> = (0..graph.edge_count()).filter(|&g| !in_tree[g]).collect();
        let cycles = generators
            .iter()
            .map(|&g| {
                let e = Edge::new(g, false);
                tree_paths[graph.initial(e)]
                    .concat(&Path::edge(graph, e))
                    .unwrap()
                    .concat(&tree_paths[graph.terminal(e)].reverse())
                    .unwrap()
                    .tighten()
            })
            .collect();
        CycleBasis {
            root,
            in_tree,
            generators,
            tree_paths,
            cycles,
        }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Coordinates of a closed path: signed crossings of non-tree edges.
    pub fn coordinates(&self, p: &Path) -> Vec<BigInt> {
        let mut pos = vec![usize::MAX; self.in_tree.len()];
        for (j, &g) in self.generators.iter().enumerate() {
            pos[g] = j;
        }
        let mut c = vec![BigInt::zero(); self.generators.len()];
        for e in p.edges() {
            let j = pos[e.geometric()];
            if j != usize::MAX {
                if e.is_reversed() {
                    c[j] -= 1;
                } else {
                    c[j] += 1;
                }
            }
        }
        c
    }

    /// Matrix whose column `j` holds the coordinates of `image(cycle_j)`.
    pub fn matrix_of(&self, image: impl Fn(&Path) -> Path) -> IntMatrix {
        let r = self.rank();
        let mut m = IntMatrix::zero(r);
        for (j, c) in self.cycles.iter().enumerate() {
            let col = self.coordinates(&image(c));
            for i in 0..r {
                m.rows[i][j] = col[i].clone();
            }
        }
        m
    }
}

/// Matrix of a vertex-fixing self-map given by the images of the stored
/// directions of the carrier's edges.
pub fn induced_matrix(
    images: &[Path],
    carrier: &Graph,
    basis: &CycleBasis,
) -> Result<IntMatrix, HomologyError> {
    for (g, img) in images.iter().enumerate() {
        let e = Edge::new(g, false);
        if img.start() != carrier.initial(e) {
            return Err(HomologyError::MovesVertex(carrier.initial(e)));
        }
        if img.end() != carrier.terminal(e) {
            return Err(HomologyError::MovesVertex(carrier.terminal(e)));
        }
    }
    Ok(basis.matrix_of(|c| substitute(images, c)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum GrowthClass {
    Exponential,
    Degree { d: usize },
}

impl GrowthClass {
    pub fn degree(&self) -> Option<usize> {
        match self {
            GrowthClass::Degree { d } => Some(*d),
            GrowthClass::Exponential => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap()
    }
}

type Poly = Vec<BigInt>;

fn trim(p: &mut Poly) {
    while p.len() > 1 && p.last().is_some_and(|x| x.is_zero()) {
        p.pop();
    }
}

/// Exact division by a monic polynomial; `None` if the remainder is nonzero.
fn divide_monic(p: &Poly, d: &Poly) -> Option<Poly> {
    let dn = d.len() - 1;
    if p.len() - 1 < dn {
        return None;
    }
    let mut r = p.clone();
    let mut q = vec![BigInt::zero(); p.len() - dn];
    for i in (0..q.len()).rev() {
        let c = r[i + dn].clone();
        if !c.is_zero() {
            for (j, dj) in d.iter().enumerate() {
                r[i + j] -= &c * dj;
            }
        }
        q[i] = c;
    }
    if r.iter().all(|x| x.is_zero()) {
        Some(q)
    } else {
        None
    }
}

pub fn euler_phi(mut m: u64) -> u64 {
    let mut result = m;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

fn mobius(mut m: u64) -> i32 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if m > 1 {
        sign = -sign;
    }
    sign
}

/// The `m`-th cyclotomic polynomial as the product of `(x^d - 1)^mu(m/d)`;
/// multiplications and divisions by `x^d - 1` are sparse.
pub fn cyclotomic(m: u64) -> Vec<i64> {
    let divisors: Vec<u64> = (1..=m).filter(|d| m.is_multiple_of(*d)).collect();
    let mut p: Vec<i128> = vec![1];
    for &d in &divisors {
        if mobius(m / d) == 1 {
            // multiply by x^d - 1
            let d = d as usize;
            let mut q = vec![0i128; p.len() + d];
            for (i, &c) in p.iter().enumerate() {
                q[i + d] += c;
                q[i] -= c;
            }
            p = q;
        }
    }
    for &d in &divisors {
        if mobius(m / d) == -1 {
            // divide by x^d - 1 (exact): q_i = p_{i+d} + q_{i+d} from the top
            let d = d as usize;
            let n = p.len() - 1;
            let mut q = vec![0i128; n - d + 1];
            for i in (0..q.len()).rev() {
                let above = if i + d < q.len() { q[i + d] } else { 0 };
                q[i] = p[i + d] + above;
            }
            p = q;
        }
    }
    p.into_iter().map(|c| c as i64).collect()
}

/// Orders `m` of the cyclotomic factors of the characteristic polynomial
/// (with multiplicity), or `None` if a non-cyclotomic factor remains.
pub fn cyclotomic_factorization(char_poly: &[BigInt]) -> Option<Vec<u64>> {
    let n = char_poly.len() as u64 - 1;
    let mut rest: Poly = char_poly.to_vec();
    trim(&mut rest);
    let mut found = Vec::new();
    let bound = (n * n).max(6);
    for m in 1..=bound {
        if rest.len() == 1 {
            break;
        }
        if euler_phi(m) > rest.len() as u64 - 1 {
            continue;
        }
        let phi: Poly = cyclotomic(m).into_iter().map(BigInt::from).collect();
        while let Some(q) = divide_monic(&rest, &phi) {
            rest = q;
            found.push(m);
            if rest.len() == 1 {
                break;
            }
        }
    }
    if rest.len() == 1 {
        Some(found)
    } else {
        None
    }
}

/// `degree(d)` when the matrix is quasi-unipotent, where `d` is the largest
/// `j` with `(M^k - I)^j != 0` for the least `k` making `M^k` unipotent;
/// `exponential` otherwise. `k_bound` caps the power tried (default: the
/// least common multiple of the cyclotomic orders found).
pub fn matrix_growth_class(
    m: &IntMatrix,
    k_bound: Option<u64>,
) -> Result<GrowthClass, HomologyError> {
    if !m.is_square() {
        return Err(HomologyError::NotSquare);
    }
    let n = m.size();
    if n == 0 {
        return Ok(GrowthClass::Degree { d: 0 });
    }
    let Some(orders) = cyclotomic_factorization(&m.char_poly()) else {
        return Ok(GrowthClass::Exponential);
    };
    let k = orders.iter().fold(1u64, |acc, &o| acc.lcm(&o));
    let bound = k_bound.unwrap_or(k);
    if k > bound {
        return Err(HomologyError::Bound(bound));
    }
    let nm = m.pow(k).minus_identity();
    let mut power = nm.clone();
    let mut d = 0;
    while !power.is_zero() {
        d += 1;
        if d > n {
            return Err(HomologyError::Bound(bound));
        }
        power = power.mul(&nm);
    }
    Ok(GrowthClass::Degree { d })
}

/// Growth degree of the map induced on the homology of the
/// representative's own graph.
pub fn pg_abelianized_degree(rep: &Representative) -> Result<usize, HomologyError> {
    let m = rep_matrix(rep)?;
    match matrix_growth_class(&m, None)? {
        GrowthClass::Degree { d } => Ok(d),
        GrowthClass::Exponential => Err(HomologyError::Exponential),
    }
}

pub fn rep_matrix(rep: &Representative) -> Result<IntMatrix, HomologyError> {
    let images: Vec<Path> = (0..rep.edge_count())
        .map(|g| rep.map.image(Edge::new(g, false)))
        .collect();
    let basis = CycleBasis::new(&rep.graph, 0);
    induced_matrix(&images, &rep.graph, &basis)
}

/// Degree fitted from the largest entry of `M^(t k)`, `k = 0..=k_max`; an
/// oracle independent of the characteristic polynomial. `t` should clear the
/// periodic part.
pub fn max_entry_degree(m: &IntMatrix, t: u64, k_max: u64) -> Option<usize> {
    let step = m.pow(t);
    let mut cur = IntMatrix::identity(m.size());
    let mut seq = Vec::new();
    for _ in 0..=k_max {
        seq.push(cur.max_abs_entry());
        cur = cur.mul(&step);
    }
    crate::fit::fit_degree_big(&seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::Representative;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic(1), vec![-1, 1]);
        assert_eq!(cyclotomic(2), vec![1, 1]);
        assert_eq!(cyclotomic(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic(12), vec![1, 0, -1, 0, 1]);
        let p105 = cyclotomic(105);
        assert_eq!(p105.len() as u64 - 1, euler_phi(105));
        assert!(p105.contains(&-2));
    }

    #[test]
    fn char_poly_of_small_matrices() {
        let m = IntMatrix::from_i64(&[vec![2, 1], vec![1, 1]]);
        let expect: Vec<BigInt> = [1, -3, 1].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(m.char_poly(), expect);
    }

    #[test]
    fn growth_classes() {
        let cases: Vec<(Vec<Vec<i64>>, GrowthClass)> = vec![
            (vec![vec![1, 1], vec![0, 1]], GrowthClass::Degree { d: 1 }),
            (
                vec![vec![1, 1, 1], vec![0, 1, 1], vec![0, 0, 1]],
                GrowthClass::Degree { d: 2 },
            ),
            (vec![vec![2, 1], vec![1, 1]], GrowthClass::Exponential),
            (vec![vec![0, -1], vec![1, 0]], GrowthClass::Degree { d: 0 }),
        ];
        for (rows, expect) in cases {
            let m = IntMatrix::from_i64(&rows);
            assert_eq!(matrix_growth_class(&m, None).unwrap(), expect);
        }
        assert_eq!(
            GrowthClass::Degree { d: 2 }.to_json().to_string(),
            r#"{"class":"degree","d":2}"#
        );
        assert_eq!(
            GrowthClass::Exponential.to_json().to_string(),
            r#"{"class":"exponential"}"#
        );
    }

    #[test]
    fn max_entry_oracle_agrees() {
        let m = IntMatrix::from_i64(&[vec![1, 1, 1], vec![0, 1, 1], vec![0, 0, 1]]);
        assert_eq!(max_entry_degree(&m, 1, 30), Some(2));
        let rot = IntMatrix::from_i64(&[vec![0, -1], vec![1, 0]]);
        assert_eq!(max_entry_degree(&rot, 4, 30), Some(0));
    }

    #[test]
    fn representative_matrices() {
        let e1 = Representative::parse("rep E1\nedge e1 : v0 -> v0\nedge e2 : v0 -> v0\nedge e3 : v0 -> v0\nmap e1 -> e1\nmap e2 -> e2 e1\nmap e3 -> e3 e1 e2\n").unwrap();
        // columns are the images of e1, e2, e3: (1,0,0), (1,1,0), (1,1,1)
        assert_eq!(
            rep_matrix(&e1).unwrap(),
            IntMatrix::from_i64(&[vec![1, 1, 1], vec![0, 1, 1], vec![0, 0, 1]])
        );
        assert_eq!(pg_abelianized_degree(&e1).unwrap(), 2);
        let e2 = Representative::parse("rep E2\nedge a : v0 -> v0\nedge b : v0 -> v0\nedge c : v0 -> v0\nmap a -> a\nmap b -> b a\nmap c -> c b b a ~b ~b ~a\n").unwrap();
        let m = rep_matrix(&e2).unwrap();
        assert_eq!(
            (0..3).map(|i| m.rows[i][2].clone()).collect::<Vec<_>>(),
            vec![BigInt::zero(), BigInt::zero(), BigInt::one()]
        );
        assert_eq!(pg_abelianized_degree(&e2).unwrap(), 1);
        let id = Representative::parse(
            "rep id\nedge a : v0 -> v0\nedge b : v0 -> v0\nmap a -> a\nmap b -> b\n",
        )
        .unwrap();
        assert_eq!(rep_matrix(&id).unwrap(), IntMatrix::identity(2));
        assert_eq!(pg_abelianized_degree(&id).unwrap(), 0);
    }

    #[test]
    fn cycle_basis_of_theta_graph() {
        let g = Graph::new(2, vec![[0, 1], [0, 1], [0, 1]]).unwrap();
        let b = CycleBasis::new(&g, 0);
        assert_eq!(b.rank(), 2);
        assert!(b.cycles.iter().all(|c| c.is_closed() && c.start() == 0));
        let images: Vec<Path> = (0..3)
            .map(|i| Path::edge(&g, Edge::new(i, false)))
            .collect();
        assert_eq!(
            induced_matrix(&images, &g, &b).unwrap(),
            IntMatrix::identity(2)
        );
        let moved = vec![
            Path::edge(&g, Edge::new(0, true)),
            images[1].clone(),
            images[2].clone(),
        ];
        assert!(induced_matrix(&moved, &g, &b).is_err());
    }
}
