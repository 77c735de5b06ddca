//! Commutative differential graded algebras on free underlying algebras,
//! and their cohomology over fields, the integers, and localized integers.
//!
//! A differential is specified by generator images and extended as a graded
//! derivation. `d^2 = 0` is verified on generators, which suffices because
//! `d^2` is again a derivation.

use crate::gca::{FreeCga, GcaError, GradedElement, Monomial};
use crate::ring::{Coeff, CoefficientRing, Echelon, ExactMatrix, RingError, SmithForm};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum CdgaError {
    #[error("d^2 != 0 at generator {generator}: {value}")]
    SquareNotZero { generator: String, value: String },
    #[error("differential of {generator} is not homogeneous of degree {expected}")]
    WrongDegree { generator: String, expected: usize },
    #[error("algebra mismatch")]
    AlgebraMismatch,
    #[error(transparent)]
    Gca(#[from] GcaError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A free graded-commutative algebra with a degree +1 derivation squaring
/// to zero.
#[derive(Debug, Clone)]
pub struct Cdga {
    algebra: FreeCga,
    diffs: Vec<GradedElement>,
}

impl Cdga {
    pub fn new(algebra: FreeCga, diffs: Vec<GradedElement>) -> Result<Self, CdgaError> {
        if diffs.len() != algebra.n_gens() {
            return Err(CdgaError::AlgebraMismatch);
        }
        for (g, dg) in algebra.generators().iter().zip(&diffs) {
            if *dg.algebra() != algebra {
                return Err(CdgaError::AlgebraMismatch);
            }
            if !dg.is_zero() && dg.homogeneous_degree() != Some(g.degree + 1) {
                return Err(CdgaError::WrongDegree {
                    generator: g.name.clone(),
                    expected: g.degree + 1,
                });
            }
        }
        let cdga = Cdga { algebra, diffs };
        for (i, g) in cdga.algebra.generators().iter().enumerate() {
            let dd = cdga.d(&cdga.diffs[i]);
            if !dd.is_zero() {
                return Err(CdgaError::SquareNotZero {
                    generator: g.name.clone(),
                    value: dd.to_string(),
                });
            }
        }
        Ok(cdga)
    }

    /// The underlying algebra with the zero differential.
    pub fn with_zero_differential(algebra: FreeCga) -> Self {
        let diffs = vec![algebra.zero(); algebra.n_gens()];
        Cdga { algebra, diffs }
    }

    pub fn algebra(&self) -> &FreeCga {
        &self.algebra
    }

    pub fn ring(&self) -> CoefficientRing {
        self.algebra.ring()
    }

    pub fn generator_differential(&self, i: usize) -> &GradedElement {
        &self.diffs[i]
    }

    pub fn is_zero_differential(&self) -> bool {
        self.diffs.iter().all(|d| d.is_zero())
    }

    /// Extend the generator assignments as a graded derivation.
    pub fn d(&self, a: &GradedElement) -> GradedElement {
        assert!(*a.algebra() == self.algebra, "algebra mismatch");
        let alg = &self.algebra;
        let ring = alg.ring();
        let gens = alg.generators();
        let mut acc = alg.zero();
        for (m, c) in a.terms() {
            for i in 0..gens.len() {
                let e = m.0[i];
                if e == 0 || self.diffs[i].is_zero() {
                    continue;
                }
                // differentiate the last of the e copies of generator i:
                // the sign is the parity of everything to its left
                let left_par: usize = (0..i)
                    .map(|j| m.0[j] as usize * gens[j].degree)
                    .sum::<usize>()
                    + (e as usize - 1) * gens[i].degree;
                let mut coeff = ring.mul(c, &ring.from_i64(e as i64));
                if ring.characteristic() != 2 && left_par % 2 == 1 {
                    coeff = ring.neg(&coeff);
                }
                if coeff.is_zero() {
                    continue;
                }
                let mut lexp = vec![0u32; gens.len()];
                let mut rexp = vec![0u32; gens.len()];
                for j in 0..gens.len() {
                    match j.cmp(&i) {
                        std::cmp::Ordering::Less => lexp[j] = m.0[j],
                        std::cmp::Ordering::Equal => lexp[j] = e - 1,
                        std::cmp::Ordering::Greater => rexp[j] = m.0[j],
                    }
                }
                let left = alg.monomial_element(Monomial(lexp), coeff);
                let right = alg.monomial_element(Monomial(rexp), ring.one());
                let term = left.mul(&self.diffs[i]).mul(&right);
                acc = acc.add(&term);
            }
        }
        acc
    }

    /// Matrix of d from degree `n` to degree `n+1` on the canonical bases.
    /// Rows are indexed by the degree n+1 basis, columns by the degree n
    /// basis.
    pub fn matrix_of_d(&self, n: usize) -> (Vec<Monomial>, ExactMatrix) {
        let dom = self.algebra.basis_of_degree(n);
        let cod = self.algebra.basis_of_degree(n + 1);
        let index: BTreeMap<&Monomial, usize> =
            cod.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut mat = ExactMatrix::new(self.ring(), cod.len(), dom.len());
        for (j, m) in dom.iter().enumerate() {
            let dm = self.d(&self.algebra.monomial_element(m.clone(), self.ring().one()));
            for (mono, c) in dm.terms() {
                let i = *index.get(mono).expect("differential left the degree");
                mat.set(i, j, c.clone());
            }
        }
        (dom, mat)
    }

    /// Cohomology in degrees 0..=max over a field, with canonical
    /// representatives (kernel vectors reduced against the image span).
    pub fn cohomology(&self, max: usize) -> Result<FieldCohomology, CdgaError> {
        if !self.ring().is_field() {
            return Err(CdgaError::Ring(RingError::FieldRequired));
        }
        let ring = self.ring();
        let mut dims = Vec::with_capacity(max + 1);
        let mut reps: Vec<Vec<GradedElement>> = Vec::with_capacity(max + 1);
        let mut prev: Option<ExactMatrix> = None; // d out of degree n-1
        for n in 0..=max {
            let (dom, mat) = self.matrix_of_d(n);
            let rk = mat.rank_and_kernel()?;
            let mut ech = Echelon::new(ring);
            if let Some(pm) = &prev {
                debug_assert_eq!(pm.rows, dom.len());
                for j in 0..pm.cols {
                    let col: Vec<Coeff> = (0..pm.rows).map(|i| pm.get(i, j)).collect();
                    ech.insert(&col);
                }
            }
            let mut degree_reps = Vec::new();
            for k in &rk.kernel {
                let red = ech.reduce(k);
                let Some((_, lead)) = red.iter().next() else {
                    continue; // cocycle is a coboundary
                };
                let inv = ring.inv(lead).expect("leading entry invertible");
                let mut elem = self.algebra.zero();
                for (idx, c) in &red {
                    elem = elem.add(
                        &self
                            .algebra
                            .monomial_element(dom[*idx].clone(), ring.mul(c, &inv)),
                    );
                }
                degree_reps.push(elem);
                ech.insert_map(red);
            }
            dims.push(degree_reps.len());
            reps.push(degree_reps);
            prev = Some(mat);
        }
        Ok(FieldCohomology {
            ring,
            dims,
            representatives: reps,
        })
    }

    pub fn vector_to_element(&self, basis: &[Monomial], v: &[Coeff]) -> GradedElement {
        let mut acc = self.algebra.zero();
        for (m, c) in basis.iter().zip(v) {
            if !c.is_zero() {
                acc = acc.add(&self.algebra.monomial_element(m.clone(), c.clone()));
            }
        }
        acc
    }

    pub fn element_to_vector(&self, basis: &[Monomial], a: &GradedElement) -> Option<Vec<Coeff>> {
        let index: BTreeMap<&Monomial, usize> =
            basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut v = vec![self.ring().zero(); basis.len()];
        for (m, c) in a.terms() {
            let i = *index.get(m)?;
            v[i] = c.clone();
        }
        Some(v)
    }

    /// Cohomology groups in degrees 0..=max over Z, or over Z with the
    /// primes of a modulus inverted. Works on the kernel lattice: a Smith
    /// form of d_n picks out the kernel as trailing columns of its column
    /// transform, the previous differential is rewritten in those
    /// coordinates, and a second Smith form reads off rank and torsion.
    pub fn integral_cohomology(&self, max: usize) -> Result<IntegralCohomology, CdgaError> {
        let ring = self.ring();
        let inverted: Option<u32> = match ring {
            CoefficientRing::Integers => None,
            CoefficientRing::LocalizedIntegers(m) => Some(m),
            _ => return Err(CdgaError::Ring(RingError::IntegersRequired)),
        };
        let mut groups = Vec::with_capacity(max + 1);
        let mut prev: Option<Vec<Vec<BigInt>>> = None;
        for n in 0..=max {
            let (dom, d_n) = self.matrix_of_d(n);
            let d_n_int = integral_columns(&d_n);
            let snf = SmithForm::of_matrix(d_n_int, d_n.rows, d_n.cols);
            let rank = snf.invariants.iter().filter(|x| !x.is_zero()).count();
            let kdim = dom.len() - rank;
            let mut torsion = Vec::new();
            let mut free_rank = kdim;
            if let Some(d_prev) = &prev {
                let p_cols = if d_prev.is_empty() { 0 } else { d_prev[0].len() };
                if kdim > 0 && p_cols > 0 {
                    // coordinates of the incoming image on the kernel lattice
                    let full = crate::ring::bigint_mat_mul(&snf.v_inv, d_prev);
                    for row in full.iter().take(rank) {
                        debug_assert!(
                            row.iter().all(|x| x.is_zero()),
                            "image escaped the kernel"
                        );
                    }
                    let m: Vec<Vec<BigInt>> = full[rank..].to_vec();
                    let msnf = SmithForm::of_matrix(m, kdim, p_cols);
                    for inv in &msnf.invariants {
                        if inv.is_zero() {
                            continue;
                        }
                        free_rank -= 1;
                        let stripped = strip_inverted_primes(inv, inverted);
                        if !stripped.is_one() {
                            torsion.push(stripped);
                        }
                    }
                }
            }
            groups.push(IntegralGroup { free_rank, torsion });
            prev = Some(integral_columns(&d_n));
        }
        Ok(IntegralCohomology { groups })
    }
}

/// Densify a matrix over Z or Z[1/m] into BigInt entries, clearing any
/// denominators by unit column scalings (powers of the inverted modulus).
fn integral_columns(mat: &ExactMatrix) -> Vec<Vec<BigInt>> {
    let (rows, cols) = (mat.rows, mat.cols);
    let mut out = vec![vec![BigInt::zero(); cols]; rows];
    for j in 0..cols {
        let mut lcd = BigInt::one();
        for i in 0..rows {
            if let Coeff::Rat(q) = mat.get(i, j) {
                let d = q.denom().clone();
                let g = lcd.gcd(&d);
                lcd = lcd / g * d;
            }
        }
        for i in 0..rows {
            if let Coeff::Rat(q) = mat.get(i, j) {
                out[i][j] = q.numer() * (&lcd / q.denom());
            }
        }
    }
    out
}

fn strip_inverted_primes(inv: &BigInt, inverted: Option<u32>) -> BigInt {
    let mut d = inv.abs();
    if let Some(m) = inverted {
        let m = BigInt::from(m);
        loop {
            let g = d.gcd(&m);
            if g.is_one() {
                break;
            }
            d /= g;
        }
    }
    d
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldCohomology {
    pub ring: CoefficientRing,
    /// dims[n] = dim H^n
    pub dims: Vec<usize>,
    /// canonical cocycle representatives per degree
    pub representatives: Vec<Vec<GradedElement>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntegralGroup {
    pub free_rank: usize,
    /// invariant factors > 1, each dividing the next
    #[serde(serialize_with = "ser_bigints")]
    pub torsion: Vec<BigInt>,
}

fn ser_bigints<S: serde::Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

impl fmt::Display for IntegralGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{}", r)),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{}", t));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntegralCohomology {
    pub groups: Vec<IntegralGroup>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gca::GeneratorSpec;

    fn q() -> CoefficientRing {
        CoefficientRing::Rationals
    }

    fn koszul_pair(ring: CoefficientRing, scale: i64) -> Cdga {
        let a = FreeCga::new(
            ring,
            vec![
                GeneratorSpec::polynomial("x", 2),
                GeneratorSpec::exterior("z", 1),
            ],
        )
        .unwrap();
        let x = a.generator_by_name("x").unwrap();
        let diffs = vec![a.zero(), x.scale(&ring.from_i64(scale))];
        Cdga::new(a, diffs).unwrap()
    }

    #[test]
    fn leibniz_rule_holds() {
        let c = koszul_pair(q(), 1);
        let a = c.algebra().clone();
        let x = a.generator_by_name("x").unwrap();
        let z = a.generator_by_name("z").unwrap();
        let u = x.pow(2).add(&z.mul(&x));
        let v = x.add(&z).add(&a.from_i64(3));
        // check the derivation property on each homogeneous piece of u
        for (m, coeff) in u.terms() {
            let um = a.monomial_element(m.clone(), coeff.clone());
            let sign = if a.monomial_degree(m) % 2 == 1 { -1 } else { 1 };
            let left = c.d(&um.mul(&v));
            let right = c
                .d(&um)
                .mul(&v)
                .add(&um.mul(&c.d(&v)).scale(&q().from_i64(sign)));
            assert_eq!(left, right);
        }
    }

    #[test]
    fn square_zero_verified() {
        // dz = x and dx = u forces d^2 z != 0
        let a = FreeCga::new(
            q(),
            vec![
                GeneratorSpec::polynomial("x", 2),
                GeneratorSpec::exterior("z", 1),
                GeneratorSpec::exterior("u", 3),
            ],
        )
        .unwrap();
        let x = a.generator_by_name("x").unwrap();
        let u = a.generator_by_name("u").unwrap();
        let err = Cdga::new(a.clone(), vec![u.clone(), x.clone(), a.zero()]).unwrap_err();
        assert!(matches!(err, CdgaError::SquareNotZero { ref generator, .. } if generator == "z"));
    }

    #[test]
    fn contractible_koszul_pair() {
        let c = koszul_pair(q(), 1);
        let h = c.cohomology(8).unwrap();
        assert_eq!(h.dims, vec![1, 0, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn exterior_three_five() {
        // zero differential on two odd generators: a compact rank-2 pattern
        let a = FreeCga::new(
            q(),
            vec![
                GeneratorSpec::exterior("z3", 3),
                GeneratorSpec::exterior("z5", 5),
            ],
        )
        .unwrap();
        let c = Cdga::with_zero_differential(a);
        let h = c.cohomology(8).unwrap();
        assert_eq!(h.dims, vec![1, 0, 0, 1, 0, 1, 0, 0, 1]);
        assert_eq!(h.representatives[5][0].to_string(), "z5");
        assert_eq!(h.representatives[8][0].to_string(), "z3*z5");
    }

    #[test]
    fn two_torsion_from_doubling() {
        // dz = 2x over Z: Z/2 in positive even degrees
        let c = koszul_pair(CoefficientRing::Integers, 2);
        let h = c.integral_cohomology(5).unwrap();
        let z2 = IntegralGroup {
            free_rank: 0,
            torsion: vec![BigInt::from(2)],
        };
        let zero = IntegralGroup {
            free_rank: 0,
            torsion: vec![],
        };
        let z = IntegralGroup {
            free_rank: 1,
            torsion: vec![],
        };
        assert_eq!(
            h.groups,
            vec![z, zero.clone(), z2.clone(), zero.clone(), z2, zero]
        );
        assert_eq!(h.groups[2].to_string(), "Z/2");
        assert_eq!(h.groups[1].to_string(), "0");
    }

    #[test]
    fn localization_kills_inverted_torsion() {
        let c = koszul_pair(CoefficientRing::LocalizedIntegers(2), 2);
        let h = c.integral_cohomology(5).unwrap();
        for (n, g) in h.groups.iter().enumerate() {
            assert_eq!(g.free_rank, usize::from(n == 0), "degree {}", n);
            assert!(g.torsion.is_empty(), "degree {}", n);
        }
    }

    #[test]
    fn char_two_kills_the_differential() {
        let c = koszul_pair(CoefficientRing::PrimeField(2), 2);
        let h = c.cohomology(6).unwrap();
        assert_eq!(h.dims, vec![1, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn field_cohomology_requires_field() {
        let c = koszul_pair(CoefficientRing::Integers, 2);
        assert!(matches!(
            c.cohomology(3).unwrap_err(),
            CdgaError::Ring(RingError::FieldRequired)
        ));
    }

    #[test]
    fn half_coefficient_differential_over_localized_integers() {
        // dz = x/2 is a legal Z[1/2] differential; x/2 spans the same
        // lattice as x up to units, so nothing survives above degree 0
        let ring = CoefficientRing::LocalizedIntegers(2);
        let a = FreeCga::new(
            ring,
            vec![
                GeneratorSpec::polynomial("x", 2),
                GeneratorSpec::exterior("z", 1),
            ],
        )
        .unwrap();
        let x = a.generator_by_name("x").unwrap();
        let dz = x.scale(&ring.parse_coeff("1/2").unwrap());
        let c = Cdga::new(a.clone(), vec![a.zero(), dz]).unwrap();
        let h = c.integral_cohomology(4).unwrap();
        assert_eq!(h.groups[0].free_rank, 1);
        for g in &h.groups[1..] {
            assert_eq!(g.free_rank, 0);
            assert!(g.torsion.is_empty());
        }
    }

    #[test]
    fn integral_matches_field_ranks_without_torsion() {
        // zero differential: integral free ranks equal rational dims
        let a = FreeCga::new(
            CoefficientRing::Integers,
            vec![
                GeneratorSpec::polynomial("x", 2),
                GeneratorSpec::exterior("z", 3),
            ],
        )
        .unwrap();
        let c = Cdga::with_zero_differential(a.clone());
        let h = c.integral_cohomology(10).unwrap();
        let hs = a.hilbert_series(10);
        for n in 0..=10 {
            assert_eq!(h.groups[n].free_rank as u64, hs[n]);
            assert!(h.groups[n].torsion.is_empty());
        }
    }
}
