//! Classical compact-group data: polynomial generators of H(BG), torus
//! restrictions as symmetric functions, Weyl orders, and subgroup
//! inclusions given by integer weight matrices.
//!
//! All catalog data lives over the rationals; models base-change as needed.
//! Restriction maps are computed through the maximal torus: substitute the
//! weight matrix into the torus expressions, then rewrite the result in the
//! subgroup's invariant generators by a degreewise linear solve.

use crate::gca::{FreeCga, GcaError, GeneratorSpec, GradedElement, Monomial};
use crate::ring::{CoefficientRing, ExactMatrix, RingError};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("catalog restricted to char != 2 for orthogonal groups")]
    OrthogonalChar2,
    #[error("weight matrix does not define a subgroup inclusion")]
    NotASubgroup,
    #[error("action cannot be free")]
    ActionNotFree,
    #[error("weight matrix shape must be rank(target) x rank(source): expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    WeightShape {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("unknown group {0}")]
    UnknownGroup(String),
    #[error(transparent)]
    Gca(#[from] GcaError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// One catalog entry: a compact connected Lie group presented through the
/// invariants that drive the models.
#[derive(Debug, Clone)]
pub struct GroupDatum {
    pub name: String,
    pub rank: usize,
    pub dimension: usize,
    pub weyl_order: u128,
    /// polynomial algebra H(BG; Q)
    bg: FreeCga,
    /// Q[t1..tr], every variable in degree 2
    torus: FreeCga,
    /// image of each bg generator in the torus algebra
    torus_expressions: Vec<GradedElement>,
    /// generators of the Weyl action as integer substitution matrices on
    /// the torus coordinates (t_i -> sum_j m[i][j] t_j)
    weyl_generators: Vec<Vec<Vec<i64>>>,
    /// true when the datum involves an orthogonal factor (needs 2 a unit)
    orthogonal: bool,
}

impl PartialEq for GroupDatum {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.bg == other.bg
            && self.torus_expressions == other.torus_expressions
    }
}
impl Eq for GroupDatum {}

impl fmt::Display for GroupDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

fn q() -> CoefficientRing {
    CoefficientRing::Rationals
}

fn torus_algebra(rank: usize) -> FreeCga {
    let names: Vec<String> = if rank == 1 {
        vec!["s".into()]
    } else {
        (1..=rank).map(|i| format!("t{}", i)).collect()
    };
    FreeCga::new(
        q(),
        names
            .iter()
            .map(|n| GeneratorSpec::polynomial(n, 2))
            .collect(),
    )
    .expect("torus algebra")
}

/// Elementary symmetric polynomials e_1..e_k of the given elements.
fn elementary_symmetric(alg: &FreeCga, xs: &[GradedElement], k: usize) -> Vec<GradedElement> {
    let mut e: Vec<GradedElement> = vec![alg.zero(); k + 1];
    e[0] = alg.one();
    for x in xs {
        for j in (1..=k).rev() {
            let bump = e[j - 1].mul(x);
            e[j] = e[j].add(&bump);
        }
    }
    e.remove(0);
    e
}

fn transposition(rank: usize, i: usize, j: usize) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; rank]; rank];
    for (r, row) in m.iter_mut().enumerate() {
        let c = if r == i {
            j
        } else if r == j {
            i
        } else {
            r
        };
        row[c] = 1;
    }
    m
}

fn identity_matrix(rank: usize) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; rank]; rank];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

impl GroupDatum {
    /// H(BG; Q) as a polynomial algebra.
    pub fn bg(&self) -> &FreeCga {
        &self.bg
    }

    /// H(BT; Q) for the maximal torus.
    pub fn torus(&self) -> &FreeCga {
        &self.torus
    }

    pub fn torus_expressions(&self) -> &[GradedElement] {
        &self.torus_expressions
    }

    pub fn weyl_generator_matrices(&self) -> &[Vec<Vec<i64>>] {
        &self.weyl_generators
    }

    /// Degrees of the polynomial generators of H(BG).
    pub fn bg_degrees(&self) -> Vec<usize> {
        self.bg.generators().iter().map(|g| g.degree).collect()
    }

    /// Degrees of the exterior generators of H(G): one below each
    /// polynomial degree, by the transgression pairing.
    pub fn exterior_degrees(&self) -> Vec<usize> {
        self.bg_degrees().iter().map(|d| d - 1).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.bg.n_gens() == 0
    }

    /// Whether the datum's invariant theory is valid over the ring.
    pub fn admissible_over(&self, ring: CoefficientRing) -> Result<(), CatalogError> {
        if self.orthogonal && !ring.two_is_unit() {
            return Err(CatalogError::OrthogonalChar2);
        }
        Ok(())
    }

    pub fn unitary(n: usize) -> GroupDatum {
        assert!(n >= 1);
        let torus = torus_algebra(n);
        let ts: Vec<GradedElement> = (0..n).map(|i| torus.generator(i)).collect();
        let es = elementary_symmetric(&torus, &ts, n);
        let bg = FreeCga::new(
            q(),
            (1..=n)
                .map(|j| GeneratorSpec::polynomial(&format!("c{}", j), 2 * j))
                .collect(),
        )
        .unwrap();
        let weyl = (0..n.saturating_sub(1))
            .map(|i| transposition(n, i, i + 1))
            .collect();
        GroupDatum {
            name: format!("U({})", n),
            rank: n,
            dimension: n * n,
            weyl_order: factorial(n),
            bg,
            torus,
            torus_expressions: es,
            weyl_generators: weyl,
            orthogonal: false,
        }
    }

    pub fn special_unitary(n: usize) -> GroupDatum {
        assert!(n >= 2);
        let rank = n - 1;
        let torus = torus_algebra(rank);
        let mut lam: Vec<GradedElement> = (0..rank).map(|i| torus.generator(i)).collect();
        let minus_sum = lam
            .iter()
            .fold(torus.zero(), |a, b| a.add(b))
            .scale(&q().from_i64(-1));
        lam.push(minus_sum);
        let mut es = elementary_symmetric(&torus, &lam, n);
        debug_assert!(es[0].is_zero(), "e1 of the traceless weights");
        es.remove(0);
        let bg = FreeCga::new(
            q(),
            (2..=n)
                .map(|j| GeneratorSpec::polynomial(&format!("c{}", j), 2 * j))
                .collect(),
        )
        .unwrap();
        // transpositions of adjacent visible coordinates, plus the exchange
        // of the last visible coordinate with the hidden one:
        // t_{rank} -> -(t_1+..+t_rank), t_i -> t_i otherwise
        let mut weyl: Vec<Vec<Vec<i64>>> = (0..rank.saturating_sub(1))
            .map(|i| transposition(rank, i, i + 1))
            .collect();
        let mut hidden = identity_matrix(rank);
        for j in 0..rank {
            hidden[rank - 1][j] = -1;
        }
        weyl.push(hidden);
        GroupDatum {
            name: format!("SU({})", n),
            rank,
            dimension: n * n - 1,
            weyl_order: factorial(n),
            bg,
            torus,
            torus_expressions: es,
            weyl_generators: weyl,
            orthogonal: false,
        }
    }

    pub fn symplectic(n: usize) -> GroupDatum {
        assert!(n >= 1);
        let torus = torus_algebra(n);
        let sq: Vec<GradedElement> = (0..n).map(|i| torus.generator(i).pow(2)).collect();
        let es = elementary_symmetric(&torus, &sq, n);
        let bg = FreeCga::new(
            q(),
            (1..=n)
                .map(|j| GeneratorSpec::polynomial(&format!("q{}", j), 4 * j))
                .collect(),
        )
        .unwrap();
        let mut weyl: Vec<Vec<Vec<i64>>> = (0..n.saturating_sub(1))
            .map(|i| transposition(n, i, i + 1))
            .collect();
        let mut flip = identity_matrix(n);
        flip[0][0] = -1;
        weyl.push(flip);
        GroupDatum {
            name: format!("Sp({})", n),
            rank: n,
            dimension: n * (2 * n + 1),
            weyl_order: (1u128 << n) * factorial(n),
            bg,
            torus,
            torus_expressions: es,
            weyl_generators: weyl,
            orthogonal: false,
        }
    }

    /// SO(2n+1).
    pub fn special_orthogonal_odd(n: usize) -> GroupDatum {
        assert!(n >= 1);
        let torus = torus_algebra(n);
        let sq: Vec<GradedElement> = (0..n).map(|i| torus.generator(i).pow(2)).collect();
        let es = elementary_symmetric(&torus, &sq, n);
        let bg = FreeCga::new(
            q(),
            (1..=n)
                .map(|j| GeneratorSpec::polynomial(&format!("p{}", j), 4 * j))
                .collect(),
        )
        .unwrap();
        let mut weyl: Vec<Vec<Vec<i64>>> = (0..n.saturating_sub(1))
            .map(|i| transposition(n, i, i + 1))
            .collect();
        let mut flip = identity_matrix(n);
        flip[0][0] = -1;
        weyl.push(flip);
        let m = 2 * n + 1;
        GroupDatum {
            name: format!("SO({})", m),
            rank: n,
            dimension: m * (m - 1) / 2,
            weyl_order: (1u128 << n) * factorial(n),
            bg,
            torus,
            torus_expressions: es,
            weyl_generators: weyl,
            orthogonal: true,
        }
    }

    /// SO(2n): Pontrjagin classes p_1..p_{n-1} plus the Euler class.
    pub fn special_orthogonal_even(n: usize) -> GroupDatum {
        assert!(n >= 1);
        let torus = torus_algebra(n);
        let sq: Vec<GradedElement> = (0..n).map(|i| torus.generator(i).pow(2)).collect();
        let mut exprs = elementary_symmetric(&torus, &sq, n - 1);
        let euler = (0..n)
            .map(|i| torus.generator(i))
            .fold(torus.one(), |a, b| a.mul(&b));
        exprs.push(euler);
        let mut gens: Vec<GeneratorSpec> = (1..n)
            .map(|j| GeneratorSpec::polynomial(&format!("p{}", j), 4 * j))
            .collect();
        gens.push(GeneratorSpec::polynomial("e", 2 * n));
        let bg = FreeCga::new(q(), gens).unwrap();
        let mut weyl: Vec<Vec<Vec<i64>>> = (0..n.saturating_sub(1))
            .map(|i| transposition(n, i, i + 1))
            .collect();
        if n >= 2 {
            let mut flip2 = identity_matrix(n);
            flip2[0][0] = -1;
            flip2[1][1] = -1;
            weyl.push(flip2);
        }
        let m = 2 * n;
        GroupDatum {
            name: format!("SO({})", m),
            rank: n,
            dimension: m * (m - 1) / 2,
            weyl_order: (1u128 << (n - 1)) * factorial(n),
            bg,
            torus,
            torus_expressions: exprs,
            weyl_generators: weyl,
            orthogonal: true,
        }
    }

    pub fn torus_group(rank: usize) -> GroupDatum {
        let torus = torus_algebra(rank);
        let exprs: Vec<GradedElement> = (0..rank).map(|i| torus.generator(i)).collect();
        GroupDatum {
            name: if rank == 1 {
                "T1".into()
            } else {
                format!("T{}", rank)
            },
            rank,
            dimension: rank,
            weyl_order: 1,
            bg: torus.clone(),
            torus,
            torus_expressions: exprs,
            weyl_generators: vec![],
            orthogonal: false,
        }
    }

    pub fn trivial() -> GroupDatum {
        let torus = FreeCga::new(q(), vec![]).unwrap();
        GroupDatum {
            name: "1".into(),
            rank: 0,
            dimension: 0,
            weyl_order: 1,
            bg: torus.clone(),
            torus,
            torus_expressions: vec![],
            weyl_generators: vec![],
            orthogonal: false,
        }
    }

    /// Direct product: concatenated generators (later factors primed on
    /// name collision), block Weyl action, renumbered torus coordinates.
    pub fn product(factors: &[GroupDatum]) -> GroupDatum {
        if factors.is_empty() {
            return GroupDatum::trivial();
        }
        if factors.len() == 1 {
            return factors[0].clone();
        }
        let rank: usize = factors.iter().map(|f| f.rank).sum();
        let torus = torus_algebra(rank);
        let mut gens: Vec<GeneratorSpec> = Vec::new();
        let mut exprs: Vec<GradedElement> = Vec::new();
        let mut weyl: Vec<Vec<Vec<i64>>> = Vec::new();
        let mut taken: BTreeMap<String, usize> = BTreeMap::new();
        let mut offset = 0usize;
        for f in factors {
            // factor torus coordinates map to a contiguous block
            let images: Vec<GradedElement> =
                (0..f.rank).map(|i| torus.generator(offset + i)).collect();
            for (g, expr) in f.bg.generators().iter().zip(&f.torus_expressions) {
                let mut name = g.name.clone();
                let seen = taken.entry(g.name.clone()).or_insert(0);
                for _ in 0..*seen {
                    name.push('\'');
                }
                *seen += 1;
                gens.push(GeneratorSpec::polynomial(&name, g.degree));
                exprs.push(
                    f.torus
                        .substitute(expr, &torus, &images)
                        .expect("torus block substitution"),
                );
            }
            for w in &f.weyl_generators {
                let mut m = identity_matrix(rank);
                for i in 0..f.rank {
                    for j in 0..rank {
                        m[offset + i][j] = 0;
                    }
                    for j in 0..f.rank {
                        m[offset + i][offset + j] = w[i][j];
                    }
                }
                weyl.push(m);
            }
            offset += f.rank;
        }
        GroupDatum {
            name: factors
                .iter()
                .map(|f| f.name.clone())
                .collect::<Vec<_>>()
                .join("x"),
            rank,
            dimension: factors.iter().map(|f| f.dimension).sum(),
            weyl_order: factors.iter().map(|f| f.weyl_order).product(),
            bg: FreeCga::new(q(), gens).unwrap(),
            torus,
            torus_expressions: exprs,
            weyl_generators: weyl,
            orthogonal: factors.iter().any(|f| f.orthogonal),
        }
    }

    /// Apply a Weyl generator matrix to a torus polynomial.
    pub fn apply_torus_substitution(
        &self,
        m: &[Vec<i64>],
        x: &GradedElement,
    ) -> Result<GradedElement, CatalogError> {
        let images: Vec<GradedElement> = (0..self.rank)
            .map(|i| {
                (0..self.rank).fold(self.torus.zero(), |acc, j| {
                    acc.add(&self.torus.generator(j).scale(&q().from_i64(m[i][j])))
                })
            })
            .collect();
        Ok(self.torus.substitute(x, &self.torus, &images)?)
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product::<u128>().max(1)
}

/// Parse a group spec: `U(3)`, `SU(4)`, `Sp(5)`, `SO(7)`, `T2`, `circle`,
/// `1`, or an `x`-separated product of these. The ring is checked for
/// orthogonal admissibility.
pub fn lookup(spec: &str, ring: CoefficientRing) -> Result<GroupDatum, CatalogError> {
    let parts: Vec<&str> = spec.split('x').collect();
    let factors: Vec<GroupDatum> = parts
        .iter()
        .map(|p| lookup_atom(p.trim()))
        .collect::<Result<_, _>>()?;
    let g = GroupDatum::product(&factors);
    g.admissible_over(ring)?;
    Ok(g)
}

fn lookup_atom(s: &str) -> Result<GroupDatum, CatalogError> {
    let bad = || CatalogError::UnknownGroup(s.to_string());
    if s == "1" || s.eq_ignore_ascii_case("trivial") {
        return Ok(GroupDatum::trivial());
    }
    if s.eq_ignore_ascii_case("circle") {
        return Ok(GroupDatum::torus_group(1));
    }
    if let Some(r) = s.strip_prefix('T').and_then(|r| r.parse::<usize>().ok()) {
        if r == 0 {
            return Ok(GroupDatum::trivial());
        }
        return Ok(GroupDatum::torus_group(r));
    }
    let (head, tail) = match s.find('(') {
        Some(i) if s.ends_with(')') => (&s[..i], &s[i + 1..s.len() - 1]),
        _ => return Err(bad()),
    };
    let n: usize = tail.parse().map_err(|_| bad())?;
    match head {
        "U" if n >= 1 => Ok(GroupDatum::unitary(n)),
        "SU" if n >= 2 => Ok(GroupDatum::special_unitary(n)),
        "Sp" if n >= 1 => Ok(GroupDatum::symplectic(n)),
        "SO" if n >= 2 && n % 2 == 0 => Ok(GroupDatum::special_orthogonal_even(n / 2)),
        "SO" if n >= 3 => Ok(GroupDatum::special_orthogonal_odd(n / 2)),
        _ => Err(bad()),
    }
}

/// A subgroup inclusion K -> G through torus weights: each target torus
/// coordinate is an integer combination of source coordinates (rows =
/// target rank, cols = source rank).
#[derive(Debug, Clone)]
pub struct EmbeddingSpec {
    pub source: GroupDatum,
    pub target: GroupDatum,
    pub weights: Vec<Vec<i64>>,
}

impl EmbeddingSpec {
    pub fn new(
        source: GroupDatum,
        target: GroupDatum,
        weights: Vec<Vec<i64>>,
    ) -> Result<Self, CatalogError> {
        if weights.len() != target.rank || weights.iter().any(|r| r.len() != source.rank) {
            return Err(CatalogError::WeightShape {
                expected_rows: target.rank,
                expected_cols: source.rank,
                rows: weights.len(),
                cols: weights.first().map_or(0, |r| r.len()),
            });
        }
        Ok(EmbeddingSpec {
            source,
            target,
            weights,
        })
    }

    pub fn identity(g: GroupDatum) -> Self {
        let weights = identity_matrix(g.rank);
        EmbeddingSpec {
            source: g.clone(),
            target: g,
            weights,
        }
    }

    /// The trivial map from the trivial group.
    pub fn from_trivial(target: GroupDatum) -> Self {
        let weights = vec![vec![]; target.rank];
        EmbeddingSpec {
            source: GroupDatum::trivial(),
            target,
            weights,
        }
    }
}

/// Images of the target's H(BG) generators in the source's H(BK),
/// computed through the torus and rewritten in invariant generators.
pub fn restriction_map(e: &EmbeddingSpec) -> Result<Vec<GradedElement>, CatalogError> {
    let g = &e.target;
    let k = &e.source;
    // target torus coordinate i maps to sum_j weights[i][j] * s_j
    let coord_images: Vec<GradedElement> = (0..g.rank)
        .map(|i| {
            (0..k.rank).fold(k.torus().zero(), |acc, j| {
                acc.add(&k.torus().generator(j).scale(&q().from_i64(e.weights[i][j])))
            })
        })
        .collect();
    let mut images = Vec::with_capacity(g.bg.n_gens());
    for expr in &g.torus_expressions {
        let on_k_torus = g.torus.substitute(expr, k.torus(), &coord_images)?;
        images.push(rewrite_in_invariants(k, &on_k_torus)?);
    }
    Ok(images)
}

/// Express a torus polynomial in the group's H(BG) generators, or fail
/// when it does not lie in the invariant subring.
pub fn rewrite_in_invariants(
    k: &GroupDatum,
    x: &GradedElement,
) -> Result<GradedElement, CatalogError> {
    if x.is_zero() {
        return Ok(k.bg.zero());
    }
    let Some(deg) = x.homogeneous_degree() else {
        return Err(CatalogError::NotASubgroup);
    };
    let torus_basis = k.torus().basis_of_degree(deg);
    let index: BTreeMap<&Monomial, usize> = torus_basis
        .iter()
        .enumerate()
        .map(|(i, m)| (m, i))
        .collect();
    let candidates = k.bg.basis_of_degree(deg);
    let mut mat = ExactMatrix::new(q(), torus_basis.len(), candidates.len());
    for (j, cand) in candidates.iter().enumerate() {
        let elem = k.bg.monomial_element(cand.clone(), q().one());
        let img = k
            .bg
            .substitute_unchecked(&elem, k.torus(), &k.torus_expressions)?;
        for (m, c) in img.terms() {
            mat.set(index[m], j, c.clone());
        }
    }
    let mut rhs = vec![q().zero(); torus_basis.len()];
    for (m, c) in x.terms() {
        let Some(i) = index.get(m) else {
            return Err(CatalogError::NotASubgroup);
        };
        rhs[*i] = c.clone();
    }
    let sol = mat
        .solve_columns(&[rhs])?
        .pop()
        .flatten()
        .ok_or(CatalogError::NotASubgroup)?;
    let mut out = k.bg.zero();
    for (j, c) in sol.iter().enumerate() {
        if !c.is_zero() {
            out = out.add(&k.bg.monomial_element(candidates[j].clone(), c.clone()));
        }
    }
    Ok(out)
}

/// Euler characteristic of a free biquotient H\G/K by Weyl orders:
/// |W_G| / (|W_H| |W_K|) in the equal-rank case, 0 when the ranks fall
/// short, an error when they overshoot.
pub fn weyl_euler_characteristic(
    g: &GroupDatum,
    h: &GroupDatum,
    k: &GroupDatum,
) -> Result<u128, CatalogError> {
    let sub = h.rank + k.rank;
    if sub > g.rank {
        return Err(CatalogError::ActionNotFree);
    }
    if sub < g.rank {
        return Ok(0);
    }
    let denom = h.weyl_order * k.weyl_order;
    if g.weyl_order % denom != 0 {
        return Err(CatalogError::NotASubgroup);
    }
    Ok(g.weyl_order / denom)
}

/// Verify that every torus expression is fixed by every Weyl generator.
pub fn check_weyl_invariance(g: &GroupDatum) -> Result<(), CatalogError> {
    for w in &g.weyl_generators {
        for expr in &g.torus_expressions {
            let moved = g.apply_torus_substitution(w, expr)?;
            if moved != *expr {
                return Err(CatalogError::NotASubgroup);
            }
        }
    }
    Ok(())
}

/// Base-change an element with rational (integral where required)
/// coefficients into the same algebra over another ring.
pub fn base_change(
    x: &GradedElement,
    from: &FreeCga,
    to: &FreeCga,
) -> Result<GradedElement, CatalogError> {
    Ok(from.element_into_ring(x, to)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_three() {
        let g = GroupDatum::unitary(3);
        assert_eq!(g.rank, 3);
        assert_eq!(g.dimension, 9);
        assert_eq!(g.weyl_order, 6);
        assert_eq!(g.bg_degrees(), vec![2, 4, 6]);
        assert_eq!(g.torus_expressions()[0].to_string(), "t1 + t2 + t3");
        assert_eq!(g.torus_expressions()[2].to_string(), "t1*t2*t3");
    }

    #[test]
    fn orthogonal_five() {
        let g = lookup("SO(5)", CoefficientRing::Rationals).unwrap();
        assert_eq!(g.rank, 2);
        assert_eq!(g.dimension, 10);
        assert_eq!(g.weyl_order, 8);
        assert_eq!(g.bg_degrees(), vec![4, 8]);
        assert_eq!(g.torus_expressions()[0].to_string(), "t1^2 + t2^2");
        assert!(matches!(
            lookup("SO(5)", CoefficientRing::PrimeField(2)),
            Err(CatalogError::OrthogonalChar2)
        ));
        assert!(matches!(
            lookup("SO(4)", CoefficientRing::Integers),
            Err(CatalogError::OrthogonalChar2)
        ));
        assert!(lookup("SO(4)", CoefficientRing::LocalizedIntegers(2)).is_ok());
    }

    #[test]
    fn torus_and_trivial() {
        let t = lookup("T1", CoefficientRing::Rationals).unwrap();
        assert_eq!((t.rank, t.dimension, t.weyl_order), (1, 1, 1));
        assert_eq!(t.bg_degrees(), vec![2]);
        assert_eq!(t.bg().generators()[0].name, "s");
        let one = lookup("1", CoefficientRing::Rationals).unwrap();
        assert!(one.is_trivial());
        let c = lookup("circle", CoefficientRing::Rationals).unwrap();
        assert_eq!(c.rank, 1);
    }

    #[test]
    fn exterior_degrees_sum_to_dimension() {
        let specs = [
            "U(1)", "U(2)", "U(4)", "SU(2)", "SU(5)", "Sp(1)", "Sp(3)", "SO(3)", "SO(5)",
            "SO(7)", "SO(4)", "SO(6)", "SO(8)", "T3", "SO(2)xSO(3)", "U(2)xT2xSp(1)",
        ];
        for s in specs {
            let g = lookup(s, CoefficientRing::Rationals).unwrap();
            let total: usize = g.exterior_degrees().iter().sum();
            assert_eq!(total, g.dimension, "{}", s);
            assert_eq!(g.exterior_degrees().len(), g.rank, "{}", s);
        }
    }

    #[test]
    fn weyl_invariance_of_catalog_expressions() {
        for s in ["U(3)", "SU(3)", "SU(4)", "Sp(2)", "SO(5)", "SO(4)", "SO(6)", "SO(2)xSO(3)"] {
            let g = lookup(s, CoefficientRing::Rationals).unwrap();
            check_weyl_invariance(&g).unwrap_or_else(|e| panic!("{}: {}", s, e));
        }
    }

    #[test]
    fn weights_into_special_unitary() {
        // circle -> SU(4) with weights (-3,1,1,1): the visible torus rows
        // are the first three, the hidden fourth weight is forced
        let su4 = GroupDatum::special_unitary(4);
        let circle = GroupDatum::torus_group(1);
        let e = EmbeddingSpec::new(circle, su4, vec![vec![-3], vec![1], vec![1]]).unwrap();
        let images = restriction_map(&e).unwrap();
        assert_eq!(images[0].to_string(), "-6*s^2");
        assert_eq!(images[1].to_string(), "-8*s^3");
        assert_eq!(images[2].to_string(), "-3*s^4");
    }

    #[test]
    fn orthogonal_block_rewrite() {
        // SO(2)xSO(3) inside SO(5) with identity weights
        let so5 = GroupDatum::special_orthogonal_odd(2);
        let k = GroupDatum::product(&[
            GroupDatum::special_orthogonal_even(1),
            GroupDatum::special_orthogonal_odd(1),
        ]);
        assert_eq!(k.bg_degrees(), vec![2, 4]);
        let e = EmbeddingSpec::new(k.clone(), so5, identity_matrix(2)).unwrap();
        let images = restriction_map(&e).unwrap();
        assert_eq!(images[0].to_string(), "e^2 + p1");
        assert_eq!(images[1].to_string(), "e^2*p1");
    }

    #[test]
    fn identity_embedding_is_identity() {
        let g = GroupDatum::unitary(2);
        let e = EmbeddingSpec::identity(g.clone());
        let images = restriction_map(&e).unwrap();
        for (i, img) in images.iter().enumerate() {
            assert_eq!(*img, g.bg().generator(i));
        }
    }

    #[test]
    fn torus_restriction_factors_through_subgroups() {
        // U(3) > U(2)xU(1) > T3: composite equals the direct restriction
        let u3 = GroupDatum::unitary(3);
        let mid = GroupDatum::product(&[GroupDatum::unitary(2), GroupDatum::unitary(1)]);
        let t3 = GroupDatum::torus_group(3);
        let top = EmbeddingSpec::new(mid.clone(), u3.clone(), identity_matrix(3)).unwrap();
        let bottom = EmbeddingSpec::new(t3.clone(), mid.clone(), identity_matrix(3)).unwrap();
        let direct = EmbeddingSpec::new(t3.clone(), u3.clone(), identity_matrix(3)).unwrap();
        let top_images = restriction_map(&top).unwrap();
        let bottom_images = restriction_map(&bottom).unwrap();
        let direct_images = restriction_map(&direct).unwrap();
        for (ti, di) in top_images.iter().zip(&direct_images) {
            let composed = mid
                .bg()
                .substitute(ti, t3.bg(), &bottom_images)
                .unwrap();
            assert_eq!(composed, *di);
        }
    }

    #[test]
    fn non_invariant_weights_rejected() {
        // scaling one torus direction of U(2) by 2 is not a subgroup map
        let g = GroupDatum::unitary(2);
        let e = EmbeddingSpec::new(g.clone(), g.clone(), vec![vec![1, 0], vec![0, 2]]).unwrap();
        assert!(matches!(
            restriction_map(&e),
            Err(CatalogError::NotASubgroup)
        ));
    }

    #[test]
    fn euler_characteristics() {
        let u3 = GroupDatum::unitary(3);
        let t3 = GroupDatum::torus_group(3);
        let one = GroupDatum::trivial();
        assert_eq!(weyl_euler_characteristic(&u3, &one, &t3).unwrap(), 6);
        let su2 = GroupDatum::special_unitary(2);
        let t1 = GroupDatum::torus_group(1);
        assert_eq!(weyl_euler_characteristic(&su2, &one, &t1).unwrap(), 2);
        let su3 = GroupDatum::special_unitary(3);
        assert_eq!(weyl_euler_characteristic(&su3, &one, &one).unwrap(), 0);
        let t2 = GroupDatum::torus_group(2);
        assert!(matches!(
            weyl_euler_characteristic(&t1, &t1, &t1),
            Err(CatalogError::ActionNotFree)
        ));
        assert_eq!(weyl_euler_characteristic(&t2, &t1, &t1).unwrap(), 1);
    }

    #[test]
    fn product_collisions_primed() {
        let so3 = GroupDatum::special_orthogonal_odd(1);
        let p = GroupDatum::product(&[so3.clone(), so3.clone()]);
        let names: Vec<&str> = p.bg().generators().iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, vec!["p1", "p1'"]);
        assert_eq!(p.weyl_order, 4);
        assert_eq!(p.dimension, 6);
    }

    #[test]
    fn group_name_parse_failures() {
        assert!(lookup("E8", CoefficientRing::Rationals).is_err());
        assert!(lookup("SO(2.5)", CoefficientRing::Rationals).is_err());
        assert!(lookup("SU(1)", CoefficientRing::Rationals).is_err());
    }
}
