//! Free graded-commutative algebras.
//!
//! An algebra here is a tensor product of a polynomial part (even-degree
//! generators) and an exterior part (odd-degree generators), with the Koszul
//! sign rule `a b = (-1)^{|a||b|} b a`. In characteristic 2 the sign rule is
//! vacuous and odd-degree generators may be declared polynomial; whether a
//! generator squares to zero is always governed by its declared sort, never
//! inferred from its degree alone.

use crate::ring::{Coeff, CoefficientRing, RingError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum GcaError {
    #[error("algebra mismatch")]
    AlgebraMismatch,
    #[error("not a CGA map: {0}")]
    NotACgaMap(String),
    #[error("invalid generator {name}: {reason}")]
    InvalidGenerator { name: String, reason: String },
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    /// Free powers.
    Polynomial,
    /// Square is zero.
    Exterior,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub degree: usize,
    pub sort: Sort,
}

impl GeneratorSpec {
    pub fn polynomial(name: &str, degree: usize) -> Self {
        GeneratorSpec {
            name: name.into(),
            degree,
            sort: Sort::Polynomial,
        }
    }
    pub fn exterior(name: &str, degree: usize) -> Self {
        GeneratorSpec {
            name: name.into(),
            degree,
            sort: Sort::Exterior,
        }
    }
}

/// Exponent vector over the ambient algebra's generator list. Exterior
/// generators never exceed exponent 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn unit(n_gens: usize) -> Self {
        Monomial(vec![0; n_gens])
    }
    pub fn generator(n_gens: usize, i: usize) -> Self {
        let mut e = vec![0; n_gens];
        e[i] = 1;
        Monomial(e)
    }
    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|e| *e == 0)
    }
}

#[derive(Debug, PartialEq, Eq)]
struct CgaInner {
    ring: CoefficientRing,
    gens: Vec<GeneratorSpec>,
}

/// A free graded-commutative algebra over one of the coefficient rings.
/// Cheap to clone; equality is structural.
#[derive(Debug, Clone)]
pub struct FreeCga(Arc<CgaInner>);

impl PartialEq for FreeCga {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}
impl Eq for FreeCga {}

impl FreeCga {
    pub fn new(ring: CoefficientRing, gens: Vec<GeneratorSpec>) -> Result<Self, GcaError> {
        ring.validate()?;
        let char2 = ring.characteristic() == 2;
        let mut seen = std::collections::BTreeSet::new();
        for g in &gens {
            if g.degree == 0 {
                return Err(GcaError::InvalidGenerator {
                    name: g.name.clone(),
                    reason: "degree must be positive".into(),
                });
            }
            if !seen.insert(g.name.clone()) {
                return Err(GcaError::InvalidGenerator {
                    name: g.name.clone(),
                    reason: "duplicate name".into(),
                });
            }
            if !char2 {
                let odd = g.degree % 2 == 1;
                match g.sort {
                    Sort::Polynomial if odd => {
                        return Err(GcaError::InvalidGenerator {
                            name: g.name.clone(),
                            reason: "odd-degree generators are exterior unless 2 = 0".into(),
                        })
                    }
                    Sort::Exterior if !odd => {
                        return Err(GcaError::InvalidGenerator {
                            name: g.name.clone(),
                            reason: "even-degree generators are polynomial".into(),
                        })
                    }
                    _ => {}
                }
            }
        }
        Ok(FreeCga(Arc::new(CgaInner { ring, gens })))
    }

    pub fn ring(&self) -> CoefficientRing {
        self.0.ring
    }

    pub fn generators(&self) -> &[GeneratorSpec] {
        &self.0.gens
    }

    pub fn n_gens(&self) -> usize {
        self.0.gens.len()
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.0.gens.iter().position(|g| g.name == name)
    }

    /// Same generators, different coefficient ring. Fails if a generator's
    /// sort/parity combination is illegal over the new ring.
    pub fn with_ring(&self, ring: CoefficientRing) -> Result<FreeCga, GcaError> {
        FreeCga::new(ring, self.0.gens.to_vec())
    }

    pub fn monomial_degree(&self, m: &Monomial) -> usize {
        m.0.iter()
            .zip(&self.0.gens)
            .map(|(e, g)| *e as usize * g.degree)
            .sum()
    }

    /// Number of exterior factors in the monomial (its exterior word
    /// length); drives the resolution grading of Koszul complexes.
    pub fn exterior_weight(&self, m: &Monomial) -> usize {
        m.0.iter()
            .zip(&self.0.gens)
            .filter(|(e, g)| **e > 0 && g.sort == Sort::Exterior)
            .map(|(e, _)| *e as usize)
            .sum()
    }

    pub fn zero(&self) -> GradedElement {
        GradedElement {
            algebra: self.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(&self) -> GradedElement {
        self.monomial_element(Monomial::unit(self.n_gens()), self.ring().one())
    }

    pub fn generator(&self, i: usize) -> GradedElement {
        assert!(i < self.n_gens(), "generator index out of range");
        self.monomial_element(Monomial::generator(self.n_gens(), i), self.ring().one())
    }

    pub fn generator_by_name(&self, name: &str) -> Option<GradedElement> {
        self.generator_index(name).map(|i| self.generator(i))
    }

    pub fn monomial_element(&self, m: Monomial, c: Coeff) -> GradedElement {
        assert_eq!(m.0.len(), self.n_gens(), "monomial width mismatch");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        GradedElement {
            algebra: self.clone(),
            terms,
        }
    }

    pub fn from_i64(&self, n: i64) -> GradedElement {
        self.monomial_element(Monomial::unit(self.n_gens()), self.ring().from_i64(n))
    }

    /// Product of two monomials: `None` when an exterior generator squares.
    /// The sign is the Koszul sign of interleaving the odd-degree factors.
    pub fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(Monomial, i64)> {
        let gens = &self.0.gens;
        let mut out = Vec::with_capacity(gens.len());
        for i in 0..gens.len() {
            let e = a.0[i] + b.0[i];
            if e > 1 && gens[i].sort == Sort::Exterior {
                return None;
            }
            out.push(e);
        }
        if self.ring().characteristic() == 2 {
            return Some((Monomial(out), 1));
        }
        // count crossings of odd-degree factor instances
        let mut crossings: u64 = 0;
        let mut b_odd_prefix: u64 = 0; // odd instances of b with index < i
        for i in 0..gens.len() {
            if gens[i].degree % 2 == 1 {
                b_odd_prefix += b.0[i] as u64;
                crossings += a.0[i] as u64 * (b_odd_prefix - b.0[i] as u64);
            }
        }
        // a_i crosses b_j for j < i: accumulate odd b instances strictly
        // before the current odd a instance
        let sign = if crossings % 2 == 0 { 1 } else { -1 };
        Some((Monomial(out), sign))
    }

    /// Checked product; `Err` when the elements live in different algebras.
    pub fn multiply(
        &self,
        a: &GradedElement,
        b: &GradedElement,
    ) -> Result<GradedElement, GcaError> {
        if a.algebra != *self || b.algebra != *self {
            return Err(GcaError::AlgebraMismatch);
        }
        let ring = self.ring();
        let mut terms: BTreeMap<Monomial, Coeff> = BTreeMap::new();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let Some((m, sign)) = self.mul_monomials(ma, mb) else {
                    continue;
                };
                let mut c = ring.mul(ca, cb);
                if sign < 0 {
                    c = ring.neg(&c);
                }
                match terms.entry(m) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        if !c.is_zero() {
                            e.insert(c);
                        }
                    }
                    std::collections::btree_map::Entry::Occupied(e) => {
                        let s = ring.add(e.get(), &c);
                        if s.is_zero() {
                            e.remove();
                        } else {
                            *e.into_mut() = s;
                        }
                    }
                }
            }
        }
        Ok(GradedElement {
            algebra: self.clone(),
            terms,
        })
    }

    /// All monomials of the given total degree, in canonical order:
    /// within a degree, descending lexicographic exponent vectors along the
    /// generator list.
    pub fn basis_of_degree(&self, n: usize) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut current = vec![0u32; self.n_gens()];
        self.enumerate(0, n, &mut current, &mut out);
        out
    }

    fn enumerate(&self, i: usize, remaining: usize, current: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if remaining == 0 {
            let mut m = current.clone();
            for e in m.iter_mut().skip(i) {
                *e = 0;
            }
            out.push(Monomial(m));
            return;
        }
        if i >= self.n_gens() {
            return;
        }
        let g = &self.0.gens[i];
        let max_e = if g.sort == Sort::Exterior {
            1.min(remaining / g.degree) as u32
        } else {
            (remaining / g.degree) as u32
        };
        for e in (0..=max_e).rev() {
            current[i] = e;
            self.enumerate(i + 1, remaining - e as usize * g.degree, current, out);
        }
        current[i] = 0;
    }

    /// Dimensions of the graded pieces through degree `n`, from the product
    /// formula: polynomial generators contribute 1/(1-t^d), exterior ones
    /// (1+t^d).
    pub fn hilbert_series(&self, n: usize) -> Vec<u64> {
        let mut series = vec![0u64; n + 1];
        series[0] = 1;
        for g in &self.0.gens {
            let d = g.degree;
            match g.sort {
                Sort::Exterior => {
                    // multiply by (1 + t^d)
                    for k in (d..=n).rev() {
                        series[k] += series[k - d];
                    }
                }
                Sort::Polynomial => {
                    // multiply by 1/(1-t^d): prefix recurrence
                    for k in d..=n {
                        series[k] += series[k - d];
                    }
                }
            }
        }
        series
    }

    /// Apply the algebra map determined by generator images. Verifies that
    /// the images are homogeneous of the right degrees and that images of
    /// exterior generators square to zero.
    pub fn substitute(
        &self,
        a: &GradedElement,
        target: &FreeCga,
        images: &[GradedElement],
    ) -> Result<GradedElement, GcaError> {
        if a.algebra != *self {
            return Err(GcaError::AlgebraMismatch);
        }
        self.check_cga_map(target, images)?;
        self.substitute_unchecked(a, target, images)
    }

    /// Verify that generator images define a map of graded-commutative
    /// algebras into `target`.
    pub fn check_cga_map(
        &self,
        target: &FreeCga,
        images: &[GradedElement],
    ) -> Result<(), GcaError> {
        if images.len() != self.n_gens() {
            return Err(GcaError::NotACgaMap(format!(
                "expected {} generator images, got {}",
                self.n_gens(),
                images.len()
            )));
        }
        if target.ring() != self.ring() {
            return Err(GcaError::NotACgaMap(
                "source and target coefficient rings differ".into(),
            ));
        }
        for (g, im) in self.0.gens.iter().zip(images) {
            if im.algebra != *target {
                return Err(GcaError::AlgebraMismatch);
            }
            if !im.is_zero() && im.homogeneous_degree() != Some(g.degree) {
                return Err(GcaError::NotACgaMap(format!(
                    "image of {} is not homogeneous of degree {}",
                    g.name, g.degree
                )));
            }
            if g.sort == Sort::Exterior {
                let sq = target.multiply(im, im)?;
                if !sq.is_zero() {
                    return Err(GcaError::NotACgaMap(format!(
                        "image of exterior generator {} has nonzero square",
                        g.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Evaluate the map without re-verifying it (verification is done once
    /// by the caller of `substitute`).
    pub fn substitute_unchecked(
        &self,
        a: &GradedElement,
        target: &FreeCga,
        images: &[GradedElement],
    ) -> Result<GradedElement, GcaError> {
        let ring = target.ring();
        let mut acc = target.zero();
        for (m, c) in &a.terms {
            let mut term = target.one();
            for (i, e) in m.0.iter().enumerate() {
                for _ in 0..*e {
                    term = target.multiply(&term, &images[i])?;
                }
            }
            term = term.scale(c);
            debug_assert_eq!(term.algebra.ring(), ring);
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Reinterpret an element with coefficients in another ring; fails when
    /// a coefficient is not a member (e.g. 1/3 into Z).
    pub fn element_into_ring(
        &self,
        a: &GradedElement,
        target: &FreeCga,
    ) -> Result<GradedElement, GcaError> {
        assert_eq!(self.generators(), target.generators(), "generator lists differ");
        let ring = target.ring();
        let mut terms = BTreeMap::new();
        for (m, c) in &a.terms {
            let q = match c {
                Coeff::Rat(q) => q.clone(),
                Coeff::Mod(_) => {
                    return Err(GcaError::NotACgaMap(
                        "cannot transport prime-field coefficients".into(),
                    ))
                }
            };
            let nc = ring.from_rational(&q)?;
            if !nc.is_zero() {
                terms.insert(m.clone(), nc);
            }
        }
        Ok(GradedElement {
            algebra: target.clone(),
            terms,
        })
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        if m.is_unit() {
            return "1".into();
        }
        let mut parts = Vec::new();
        for (i, e) in m.0.iter().enumerate() {
            if *e == 0 {
                continue;
            }
            let name = &self.0.gens[i].name;
            if *e == 1 {
                parts.push(name.clone());
            } else {
                parts.push(format!("{}^{}", name, e));
            }
        }
        parts.join("*")
    }
}

/// Sparse element of a [`FreeCga`]; zero coefficients are never stored.
#[derive(Debug, Clone)]
pub struct GradedElement {
    algebra: FreeCga,
    terms: BTreeMap<Monomial, Coeff>,
}

impl PartialEq for GradedElement {
    fn eq(&self, other: &Self) -> bool {
        self.algebra == other.algebra && self.terms == other.terms
    }
}
impl Eq for GradedElement {}

impl GradedElement {
    pub fn algebra(&self) -> &FreeCga {
        &self.algebra
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff_of(&self, m: &Monomial) -> Coeff {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| self.algebra.ring().zero())
    }

    /// The degree when the element is homogeneous and nonzero.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut it = self.terms.keys();
        let first = self.algebra.monomial_degree(it.next()?);
        for m in it {
            if self.algebra.monomial_degree(m) != first {
                return None;
            }
        }
        Some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.homogeneous_degree().is_some()
    }

    pub fn add(&self, other: &GradedElement) -> GradedElement {
        assert!(self.algebra == other.algebra, "algebra mismatch");
        let ring = self.algebra.ring();
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            match terms.entry(m.clone()) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c.clone());
                }
                std::collections::btree_map::Entry::Occupied(e) => {
                    let s = ring.add(e.get(), c);
                    if s.is_zero() {
                        e.remove();
                    } else {
                        *e.into_mut() = s;
                    }
                }
            }
        }
        GradedElement {
            algebra: self.algebra.clone(),
            terms,
        }
    }

    pub fn sub(&self, other: &GradedElement) -> GradedElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GradedElement {
        let ring = self.algebra.ring();
        GradedElement {
            algebra: self.algebra.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), ring.neg(c)))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Coeff) -> GradedElement {
        let ring = self.algebra.ring();
        if c.is_zero() {
            return self.algebra.zero();
        }
        GradedElement {
            algebra: self.algebra.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.clone(), ring.mul(x, c)))
                .collect(),
        }
    }

    pub fn mul(&self, other: &GradedElement) -> GradedElement {
        self.algebra
            .multiply(self, other)
            .expect("algebra mismatch")
    }

    pub fn pow(&self, e: usize) -> GradedElement {
        let mut out = self.algebra.one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// The component of the given degree.
    pub fn component(&self, degree: usize) -> GradedElement {
        GradedElement {
            algebra: self.algebra.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| self.algebra.monomial_degree(m) == degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // order terms by (degree, canonical monomial order)
        let mut terms: Vec<(&Monomial, &Coeff)> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            self.algebra
                .monomial_degree(a)
                .cmp(&self.algebra.monomial_degree(b))
                .then_with(|| b.cmp(a))
        });
        let one = self.algebra.ring().one();
        let minus_one = self.algebra.ring().neg(&one);
        for (i, (m, c)) in terms.iter().enumerate() {
            let ms = self.algebra.format_monomial(m);
            let lead = i == 0;
            if **c == one && !m.is_unit() {
                if lead {
                    write!(f, "{}", ms)?;
                } else {
                    write!(f, " + {}", ms)?;
                }
            } else if **c == minus_one && !m.is_unit() {
                if lead {
                    write!(f, "-{}", ms)?;
                } else {
                    write!(f, " - {}", ms)?;
                }
            } else {
                let cs = c.to_string();
                let (sign, mag) = match cs.strip_prefix('-') {
                    Some(rest) if !lead => (" - ", rest.to_string()),
                    _ => (if lead { "" } else { " + " }, cs),
                };
                if m.is_unit() {
                    write!(f, "{}{}", sign, mag)?;
                } else {
                    write!(f, "{}{}*{}", sign, mag, ms)?;
                }
            }
        }
        Ok(())
    }
}

impl Serialize for GradedElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
