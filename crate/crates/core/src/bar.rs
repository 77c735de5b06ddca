//! Bar and cobar constructions, twisting cochains, twisted tensor
//! products, and the shuffle map, all as finite tables truncated at an
//! explicit degree cap.
//!
//! Algebras and coalgebras are stored basis-wise: names per degree,
//! structure constants, differentials. Every construction validates its
//! own laws (associativity, coassociativity, Leibniz, d² = 0) on the
//! stored basis, so a sign error cannot survive construction.
//!
//! Sign conventions. The bar differential deletes with sign
//! −(−1)^{ε_i}, ε_i = Σ_{j≤i}(|a_j|−1), and differentiates letters
//! through s⁻¹d s with a leading minus; the cobar suspension raises
//! degree by one and splits with sign (−1)^{|c′|}. These choices force
//! the tautological twisting cochain and the bar–cobar counit to send
//! [a] to −a; all three facts are asserted by the construction checks.

use crate::cdga::Cdga;
use crate::ring::{Coeff, CoefficientRing, ExactMatrix, RingError};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum BarError {
    #[error("bar complex not finite per degree")]
    BarNotFinite,
    #[error("cobar not finite per degree")]
    CobarNotFinite,
    #[error("structure tables violate {0}")]
    BadStructure(String),
    #[error("twisting cochain invalid: {0}")]
    BadCochain(String),
    #[error("cohomology requires field coefficients")]
    FieldRequired,
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Basis element handle: (degree, index within the degree).
pub type Idx = (usize, usize);

/// Sparse linear combination of basis elements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lin(pub BTreeMap<Idx, Coeff>);

impl Lin {
    pub fn zero() -> Lin {
        Lin(BTreeMap::new())
    }

    pub fn term(idx: Idx, c: Coeff) -> Lin {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(idx, c);
        }
        Lin(m)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_in(&mut self, ring: CoefficientRing, idx: Idx, c: &Coeff) {
        if c.is_zero() {
            return;
        }
        let cur = self.0.get(&idx).cloned().unwrap_or_else(|| ring.zero());
        let s = ring.add(&cur, c);
        if s.is_zero() {
            self.0.remove(&idx);
        } else {
            self.0.insert(idx, s);
        }
    }

    pub fn add(&mut self, ring: CoefficientRing, other: &Lin) {
        for (&idx, c) in &other.0 {
            self.add_in(ring, idx, c);
        }
    }

    pub fn add_scaled(&mut self, ring: CoefficientRing, other: &Lin, s: &Coeff) {
        for (&idx, c) in &other.0 {
            self.add_in(ring, idx, &ring.mul(s, c));
        }
    }
}

/// Sparse element of a two-fold tensor product.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lin2(pub BTreeMap<(Idx, Idx), Coeff>);

impl Lin2 {
    pub fn add_in(&mut self, ring: CoefficientRing, key: (Idx, Idx), c: &Coeff) {
        if c.is_zero() {
            return;
        }
        let cur = self.0.get(&key).cloned().unwrap_or_else(|| ring.zero());
        let s = ring.add(&cur, c);
        if s.is_zero() {
            self.0.remove(&key);
        } else {
            self.0.insert(key, s);
        }
    }
}

fn sign_of(ring: CoefficientRing, exp: usize) -> Coeff {
    if exp % 2 == 0 {
        ring.one()
    } else {
        ring.from_i64(-1)
    }
}

/// Finite-type differential graded algebra as explicit tables.
#[derive(Debug, Clone)]
pub struct Dga {
    pub ring: CoefficientRing,
    pub cap: usize,
    /// basis names per degree 0..=cap
    pub names: Vec<Vec<String>>,
    /// differential per basis element (value in the next degree)
    pub diff: Vec<Vec<Lin>>,
    /// products of basis pairs with total degree ≤ cap
    pub mult: BTreeMap<(Idx, Idx), Lin>,
    /// index of the unit in degree 0
    pub unit: usize,
}

impl Dga {
    pub fn dim(&self, d: usize) -> usize {
        self.names.get(d).map_or(0, |v| v.len())
    }

    pub fn total_dim(&self) -> usize {
        self.names.iter().map(|v| v.len()).sum()
    }

    pub fn unit_lin(&self) -> Lin {
        Lin::term((0, self.unit), self.ring.one())
    }

    pub fn mul_basis(&self, x: Idx, y: Idx) -> Lin {
        self.mult.get(&(x, y)).cloned().unwrap_or_default()
    }

    pub fn mul_lin(&self, x: &Lin, y: &Lin) -> Lin {
        let mut out = Lin::zero();
        for (&ix, cx) in &x.0 {
            for (&iy, cy) in &y.0 {
                if ix.0 + iy.0 > self.cap {
                    continue;
                }
                let prod = self.mul_basis(ix, iy);
                out.add_scaled(self.ring, &prod, &self.ring.mul(cx, cy));
            }
        }
        out
    }

    pub fn d_lin(&self, x: &Lin) -> Lin {
        let mut out = Lin::zero();
        for (&(d, i), c) in &x.0 {
            if d < self.cap {
                out.add_scaled(self.ring, &self.diff[d][i], c);
            }
        }
        out
    }

    /// Augmentation: the coefficient of the unit.
    pub fn augment(&self, x: &Lin) -> Coeff {
        x.0.get(&(0, self.unit))
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    /// Validate unit laws, degree additivity, associativity, the Leibniz
    /// rule, and d² = 0 on the stored basis.
    pub fn validate(&self) -> Result<(), BarError> {
        let bad = |s: &str| Err(BarError::BadStructure(s.to_string()));
        if self.names.len() != self.cap + 1 || self.diff.len() != self.cap + 1 {
            return bad("table lengths");
        }
        for d in 0..=self.cap {
            if self.diff[d].len() != self.names[d].len() {
                return bad("differential table length");
            }
            for l in &self.diff[d] {
                if l.0.keys().any(|&(dd, _)| dd != d + 1) {
                    return bad("differential degree");
                }
            }
        }
        let all: Vec<Idx> = (0..=self.cap)
            .flat_map(|d| (0..self.dim(d)).map(move |i| (d, i)))
            .collect();
        let unit = (0usize, self.unit);
        for &x in &all {
            if self.mul_basis(unit, x) != Lin::term(x, self.ring.one())
                || self.mul_basis(x, unit) != Lin::term(x, self.ring.one())
            {
                return bad("unit law");
            }
        }
        for (&(x, y), l) in &self.mult {
            if l.0.keys().any(|&(dd, _)| dd != x.0 + y.0) {
                return bad("product degree");
            }
        }
        // associativity and Leibniz within the cap
        for &x in &all {
            for &y in &all {
                if x.0 + y.0 > self.cap {
                    continue;
                }
                let xy = self.mul_basis(x, y);
                // Leibniz: d(xy) = dx·y + (−1)^{|x|} x·dy
                if x.0 + y.0 < self.cap {
                    let left = self.d_lin(&xy);
                    let mut right = self.mul_lin(&self.d_lin(&Lin::term(x, self.ring.one())), &Lin::term(y, self.ring.one()));
                    let mut t2 = self.mul_lin(
                        &Lin::term(x, self.ring.one()),
                        &self.d_lin(&Lin::term(y, self.ring.one())),
                    );
                    t2 = scale_lin(self.ring, &t2, &sign_of(self.ring, x.0));
                    right.add(self.ring, &t2);
                    if left != right {
                        return bad("Leibniz rule");
                    }
                }
                for &z in &all {
                    if x.0 + y.0 + z.0 > self.cap {
                        continue;
                    }
                    let a = self.mul_lin(&xy, &Lin::term(z, self.ring.one()));
                    let b = self.mul_lin(
                        &Lin::term(x, self.ring.one()),
                        &self.mul_basis(y, z),
                    );
                    if a != b {
                        return bad("associativity");
                    }
                }
            }
        }
        for &x in &all {
            if x.0 + 2 <= self.cap {
                let dd = self.d_lin(&self.d_lin(&Lin::term(x, self.ring.one())));
                if !dd.is_zero() {
                    return bad("d^2 = 0");
                }
            }
        }
        Ok(())
    }

    /// The ground ring as a Dga.
    pub fn scalar(ring: CoefficientRing, cap: usize) -> Dga {
        let mut names = vec![Vec::new(); cap + 1];
        names[0].push("1".to_string());
        let mut diff = vec![Vec::new(); cap + 1];
        diff[0].push(Lin::zero());
        let mut mult = BTreeMap::new();
        mult.insert(((0, 0), (0, 0)), Lin::term((0, 0), ring.one()));
        Dga {
            ring,
            cap,
            names,
            diff,
            mult,
            unit: 0,
        }
    }

    /// Tabulate a free graded-commutative model into basis form.
    pub fn from_cdga(cdga: &Cdga, cap: usize) -> Dga {
        let alg = cdga.algebra();
        let ring = cdga.ring();
        let mut names = Vec::with_capacity(cap + 1);
        let mut monos = Vec::with_capacity(cap + 1);
        let mut index: BTreeMap<crate::gca::Monomial, Idx> = BTreeMap::new();
        for d in 0..=cap {
            let basis = alg.basis_of_degree(d);
            let mut row = Vec::with_capacity(basis.len());
            for (i, m) in basis.iter().enumerate() {
                row.push(
                    alg.monomial_element(m.clone(), ring.one())
                        .to_string(),
                );
                index.insert(m.clone(), (d, i));
            }
            names.push(row);
            monos.push(basis);
        }
        let decompose = |el: &crate::gca::GradedElement| -> Lin {
            let mut out = Lin::zero();
            for (m, c) in el.terms() {
                if let Some(&idx) = index.get(m) {
                    out.add_in(ring, idx, c);
                }
            }
            out
        };
        let mut diff = Vec::with_capacity(cap + 1);
        for d in 0..=cap {
            let mut row = Vec::with_capacity(monos[d].len());
            for m in &monos[d] {
                let el = alg.monomial_element(m.clone(), ring.one());
                row.push(if d < cap {
                    decompose(&cdga.d(&el))
                } else {
                    Lin::zero()
                });
            }
            diff.push(row);
        }
        let mut mult = BTreeMap::new();
        for d1 in 0..=cap {
            for i1 in 0..monos[d1].len() {
                for d2 in 0..=cap - d1 {
                    for i2 in 0..monos[d2].len() {
                        let a = alg.monomial_element(monos[d1][i1].clone(), ring.one());
                        let b = alg.monomial_element(monos[d2][i2].clone(), ring.one());
                        let prod = a.mul(&b);
                        mult.insert(((d1, i1), (d2, i2)), decompose(&prod));
                    }
                }
            }
        }
        Dga {
            ring,
            cap,
            names,
            diff,
            mult,
            unit: 0,
        }
    }

    /// Tensor product algebra with Koszul-sign multiplication.
    pub fn tensor(a: &Dga, b: &Dga, cap: usize) -> Dga {
        let ring = a.ring;
        let cap = cap.min(a.cap + b.cap);
        // basis of degree d: pairs (x, y), |x|+|y| = d
        let mut names = vec![Vec::new(); cap + 1];
        let mut pairs: Vec<Vec<(Idx, Idx)>> = vec![Vec::new(); cap + 1];
        let mut index: BTreeMap<(Idx, Idx), Idx> = BTreeMap::new();
        for d in 0..=cap {
            for da in 0..=d.min(a.cap) {
                let db = d - da;
                if db > b.cap {
                    continue;
                }
                for ia in 0..a.dim(da) {
                    for ib in 0..b.dim(db) {
                        let idx = (d, names[d].len());
                        names[d].push(format!(
                            "{}(x){}",
                            a.names[da][ia], b.names[db][ib]
                        ));
                        pairs[d].push(((da, ia), (db, ib)));
                        index.insert(((da, ia), (db, ib)), idx);
                    }
                }
            }
        }
        let mut diff = vec![Vec::new(); cap + 1];
        for d in 0..=cap {
            for &(xa, xb) in &pairs[d] {
                let mut out = Lin::zero();
                if d < cap {
                    if xa.0 < a.cap {
                        for (&ya, c) in &a.diff[xa.0][xa.1].0 {
                            if let Some(&idx) = index.get(&(ya, xb)) {
                                out.add_in(ring, idx, c);
                            }
                        }
                    }
                    if xb.0 < b.cap {
                        let s = sign_of(ring, xa.0);
                        for (&yb, c) in &b.diff[xb.0][xb.1].0 {
                            if let Some(&idx) = index.get(&(xa, yb)) {
                                out.add_in(ring, idx, &ring.mul(&s, c));
                            }
                        }
                    }
                }
                diff[d].push(out);
            }
        }
        let mut mult = BTreeMap::new();
        for d1 in 0..=cap {
            for (i1, &(xa, xb)) in pairs[d1].iter().enumerate() {
                for d2 in 0..=cap - d1 {
                    for (i2, &(ya, yb)) in pairs[d2].iter().enumerate() {
                        // (x_a ⊗ x_b)(y_a ⊗ y_b) = (−1)^{|x_b||y_a|} x_a y_a ⊗ x_b y_b
                        let s = sign_of(ring, xb.0 * ya.0);
                        let pa = a.mul_basis(xa, ya);
                        let pb = b.mul_basis(xb, yb);
                        let mut out = Lin::zero();
                        for (&za, ca) in &pa.0 {
                            for (&zb, cb) in &pb.0 {
                                if let Some(&idx) = index.get(&(za, zb)) {
                                    out.add_in(
                                        ring,
                                        idx,
                                        &ring.mul(&s, &ring.mul(ca, cb)),
                                    );
                                }
                            }
                        }
                        mult.insert(((d1, i1), (d2, i2)), out);
                    }
                }
            }
        }
        Dga {
            ring,
            cap,
            names,
            diff,
            mult,
            unit: 0,
        }
    }

    /// Cohomology dimensions through max (≤ cap − 1, where the kernel is
    /// still determined by the stored tables).
    pub fn cohomology_dims(&self, max: usize) -> Result<Vec<usize>, BarError> {
        if !self.ring.is_field() {
            return Err(BarError::FieldRequired);
        }
        assert!(max + 1 <= self.cap, "cap too small for requested degree");
        let mut ranks = vec![0usize; max + 2];
        for n in 0..=max {
            let mut mat = ExactMatrix::new(self.ring, self.dim(n + 1), self.dim(n));
            for i in 0..self.dim(n) {
                for (&(dd, j), c) in &self.diff[n][i].0 {
                    debug_assert_eq!(dd, n + 1);
                    mat.set(j, i, c.clone());
                }
            }
            ranks[n + 1] = mat.rank()?;
        }
        Ok((0..=max)
            .map(|n| self.dim(n) - ranks[n + 1] - ranks[n])
            .collect())
    }
}

fn scale_lin(ring: CoefficientRing, x: &Lin, s: &Coeff) -> Lin {
    let mut out = Lin::zero();
    out.add_scaled(ring, x, s);
    out
}

impl Serialize for Dga {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        struct Triple {
            left: (usize, usize),
            right: (usize, usize),
            value: Vec<((usize, usize), String)>,
        }
        let triples: Vec<Triple> = self
            .mult
            .iter()
            .filter(|(_, l)| !l.is_zero())
            .map(|(&(x, y), l)| Triple {
                left: x,
                right: y,
                value: l.0.iter().map(|(&i, c)| (i, c.to_string())).collect(),
            })
            .collect();
        let diff: Vec<Vec<Vec<((usize, usize), String)>>> = self
            .diff
            .iter()
            .map(|row| {
                row.iter()
                    .map(|l| l.0.iter().map(|(&i, c)| (i, c.to_string())).collect())
                    .collect()
            })
            .collect();
        let mut st = s.serialize_struct("Dga", 4)?;
        st.serialize_field("cap", &self.cap)?;
        st.serialize_field("basis", &self.names)?;
        st.serialize_field("products", &triples)?;
        st.serialize_field("differential", &diff)?;
        st.end()
    }
}

/// Finite-type differential graded coalgebra as explicit tables.
#[derive(Debug, Clone)]
pub struct Dgc {
    pub ring: CoefficientRing,
    pub cap: usize,
    pub names: Vec<Vec<String>>,
    pub diff: Vec<Vec<Lin>>,
    /// full comultiplication including the unit terms
    pub comult: Vec<Vec<Lin2>>,
    /// coaugmentation: index of the grouplike unit in degree 0
    pub coaug: usize,
    /// counit values on the degree-0 basis
    pub counit: Vec<Coeff>,
}

impl Dgc {
    pub fn dim(&self, d: usize) -> usize {
        self.names.get(d).map_or(0, |v| v.len())
    }

    pub fn d_lin(&self, x: &Lin) -> Lin {
        let mut out = Lin::zero();
        for (&(d, i), c) in &x.0 {
            if d < self.cap {
                out.add_scaled(self.ring, &self.diff[d][i], c);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), BarError> {
        let bad = |s: &str| Err(BarError::BadStructure(s.to_string()));
        let ring = self.ring;
        if self.names.len() != self.cap + 1 {
            return bad("table lengths");
        }
        if self.counit.len() != self.dim(0) {
            return bad("counit table length");
        }
        for d in 0..=self.cap {
            for i in 0..self.dim(d) {
                let x = (d, i);
                let delta = &self.comult[d][i];
                // counit laws: (ε⊗id)Δx = x = (id⊗ε)Δx
                let mut left = Lin::zero();
                let mut right = Lin::zero();
                for (&(a, b), c) in &delta.0 {
                    if a.0 == 0 {
                        left.add_in(ring, b, &ring.mul(&self.counit[a.1], c));
                    }
                    if b.0 == 0 {
                        right.add_in(ring, a, &ring.mul(c, &self.counit[b.1]));
                    }
                }
                let x_lin = Lin::term(x, ring.one());
                if left != x_lin || right != x_lin {
                    return bad("counit law");
                }
                // coassociativity
                let mut lhs: BTreeMap<(Idx, Idx, Idx), Coeff> = BTreeMap::new();
                let mut rhs: BTreeMap<(Idx, Idx, Idx), Coeff> = BTreeMap::new();
                for (&(a, b), c) in &delta.0 {
                    for (&(a1, a2), c2) in &self.comult[a.0][a.1].0 {
                        let key = (a1, a2, b);
                        let cur = lhs.get(&key).cloned().unwrap_or_else(|| ring.zero());
                        let v = ring.add(&cur, &ring.mul(c, c2));
                        if v.is_zero() {
                            lhs.remove(&key);
                        } else {
                            lhs.insert(key, v);
                        }
                    }
                    for (&(b1, b2), c2) in &self.comult[b.0][b.1].0 {
                        let key = (a, b1, b2);
                        let cur = rhs.get(&key).cloned().unwrap_or_else(|| ring.zero());
                        let v = ring.add(&cur, &ring.mul(c, c2));
                        if v.is_zero() {
                            rhs.remove(&key);
                        } else {
                            rhs.insert(key, v);
                        }
                    }
                }
                if lhs != rhs {
                    return bad("coassociativity");
                }
                // co-Leibniz: Δ(dx) = (d⊗1 + 1⊗d)Δx with Koszul sign
                if d < self.cap {
                    let mut lhs2 = Lin2::default();
                    for (&y, c) in &self.diff[d][i].0 {
                        for (&(a, b), c2) in &self.comult[y.0][y.1].0 {
                            lhs2.add_in(ring, (a, b), &ring.mul(c, c2));
                        }
                    }
                    let mut rhs2 = Lin2::default();
                    for (&(a, b), c) in &delta.0 {
                        if a.0 < self.cap {
                            for (&a2, c2) in &self.diff[a.0][a.1].0 {
                                rhs2.add_in(ring, (a2, b), &ring.mul(c, c2));
                            }
                        }
                        if b.0 < self.cap {
                            let s = sign_of(ring, a.0);
                            for (&b2, c2) in &self.diff[b.0][b.1].0 {
                                rhs2.add_in(ring, (a, b2), &ring.mul(&ring.mul(&s, c), c2));
                            }
                        }
                    }
                    if lhs2 != rhs2 {
                        return bad("co-Leibniz rule");
                    }
                    if d + 2 <= self.cap {
                        let dd = self.d_lin(&self.d_lin(&Lin::term(x, ring.one())));
                        if !dd.is_zero() {
                            return bad("d^2 = 0");
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl Serialize for Dgc {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let comult: Vec<Vec<Vec<((usize, usize), (usize, usize), String)>>> = self
            .comult
            .iter()
            .map(|row| {
                row.iter()
                    .map(|l| {
                        l.0.iter()
                            .map(|(&(a, b), c)| (a, b, c.to_string()))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut st = s.serialize_struct("Dgc", 3)?;
        st.serialize_field("cap", &self.cap)?;
        st.serialize_field("basis", &self.names)?;
        st.serialize_field("comultiplication", &comult)?;
        st.end()
    }
}

/// The bar construction of a Dga, with the word structure retained.
#[derive(Debug, Clone)]
pub struct BarDgc {
    pub dgc: Dgc,
    /// per degree, per index: the word as letters into the algebra basis
    pub words: Vec<Vec<Vec<Idx>>>,
    index: Vec<BTreeMap<Vec<Idx>, usize>>,
    /// suspension degree of each letter list, cached for sign work
    pub algebra_cap: usize,
}

impl BarDgc {
    pub fn word_index(&self, degree: usize, word: &[Idx]) -> Option<usize> {
        self.index.get(degree)?.get(word).copied()
    }
}

fn word_name(a: &Dga, word: &[Idx]) -> String {
    if word.is_empty() {
        return "[]".to_string();
    }
    let mut s = String::from("[");
    for (k, &(d, i)) in word.iter().enumerate() {
        if k > 0 {
            s.push('|');
        }
        s.push_str(&a.names[d][i]);
    }
    s.push(']');
    s
}

/// Build B A through total degree `cap`. Letters are the positive-degree
/// basis elements of A; the degree of [a_1|..|a_p] is Σ(|a_i| − 1).
pub fn bar(a: &Dga, cap: usize, word_cap: Option<usize>) -> Result<BarDgc, BarError> {
    let ring = a.ring;
    if a.dim(0) != 1 {
        return Err(BarError::BadStructure("bar input must be connected".into()));
    }
    let has_degree_one = a.dim(1) > 0;
    if has_degree_one && word_cap.is_none() {
        return Err(BarError::BarNotFinite);
    }
    // enumerate words by bar degree
    let mut words: Vec<Vec<Vec<Idx>>> = vec![Vec::new(); cap + 1];
    words[0].push(Vec::new());
    // letters by suspension degree |a| − 1
    let mut letters: Vec<Vec<Idx>> = vec![Vec::new(); cap + 2];
    for d in 1..=a.cap {
        for i in 0..a.dim(d) {
            if d - 1 <= cap {
                letters[d - 1].push((d, i));
            }
        }
    }
    for deg in 1..=cap {
        let mut acc: Vec<Vec<Idx>> = Vec::new();
        for sd in 0..=deg {
            for &l in &letters[sd] {
                let rest = deg - sd;
                // extend every shorter word on the left
                let tail_words: Vec<Vec<Idx>> = words[rest].clone();
                for t in tail_words {
                    if let Some(wc) = word_cap {
                        if t.len() + 1 > wc {
                            continue;
                        }
                    }
                    if sd == 0 && rest == deg && t.len() == 0 && deg > 0 && sd == 0 {
                        // fall through: zero-suspension letters still extend
                    }
                    let mut w = Vec::with_capacity(t.len() + 1);
                    w.push(l);
                    w.extend(t);
                    acc.push(w);
                }
            }
        }
        acc.sort();
        acc.dedup();
        words[deg] = acc;
    }
    // guard: zero-suspension letters make a degree's word list unbounded
    // only through the word cap, which is already enforced above

    let mut index: Vec<BTreeMap<Vec<Idx>, usize>> = Vec::with_capacity(cap + 1);
    let mut names: Vec<Vec<String>> = Vec::with_capacity(cap + 1);
    for deg in 0..=cap {
        let mut m = BTreeMap::new();
        let mut row = Vec::with_capacity(words[deg].len());
        for (i, w) in words[deg].iter().enumerate() {
            m.insert(w.clone(), i);
            row.push(word_name(a, w));
        }
        index.push(m);
        names.push(row);
    }

    // differential: internal letters −(−1)^{ε_{i−1}} [..|da_i|..],
    // deletions −(−1)^{ε_i} [..|a_i a_{i+1}|..]
    let mut diff: Vec<Vec<Lin>> = Vec::with_capacity(cap + 1);
    for deg in 0..=cap {
        let mut row = Vec::with_capacity(words[deg].len());
        for w in &words[deg] {
            let mut out = Lin::zero();
            if deg < cap {
                let p = w.len();
                let mut eps = vec![0usize; p + 1];
                for (j, &(d, _)) in w.iter().enumerate() {
                    eps[j + 1] = eps[j] + (d - 1);
                }
                for i in 0..p {
                    // internal: replace letter i by its differential
                    let (d, li) = w[i];
                    if d < a.cap {
                        let s = sign_of(ring, eps[i] + 1);
                        for (&(d2, l2), c) in &a.diff[d][li].0 {
                            let mut nw = w.clone();
                            nw[i] = (d2, l2);
                            if let Some(&j) = index[deg + 1].get(&nw) {
                                out.add_in(ring, (deg + 1, j), &ring.mul(&s, c));
                            }
                        }
                    }
                }
                for i in 0..p.saturating_sub(1) {
                    // deletion: merge letters i and i+1
                    let prod = a.mul_basis(w[i], w[i + 1]);
                    let s = sign_of(ring, eps[i + 1] + 1);
                    for (&m, c) in &prod.0 {
                        if m.0 == 0 {
                            continue; // letters have positive degree
                        }
                        let mut nw = Vec::with_capacity(p - 1);
                        nw.extend_from_slice(&w[..i]);
                        nw.push(m);
                        nw.extend_from_slice(&w[i + 2..]);
                        if let Some(&j) = index[deg + 1].get(&nw) {
                            out.add_in(ring, (deg + 1, j), &ring.mul(&s, c));
                        }
                    }
                }
            }
            row.push(out);
        }
        diff.push(row);
    }

    // deconcatenation comultiplication
    let mut comult: Vec<Vec<Lin2>> = Vec::with_capacity(cap + 1);
    for deg in 0..=cap {
        let mut row = Vec::with_capacity(words[deg].len());
        for w in &words[deg] {
            let mut delta = Lin2::default();
            for cut in 0..=w.len() {
                let (lft, rgt) = w.split_at(cut);
                let dl: usize = lft.iter().map(|&(d, _)| d - 1).sum();
                let dr = deg - dl;
                let li = index[dl][&lft.to_vec()];
                let ri = index[dr][&rgt.to_vec()];
                delta.add_in(ring, ((dl, li), (dr, ri)), &ring.one());
            }
            row.push(delta);
        }
        comult.push(row);
    }

    let dgc = Dgc {
        ring,
        cap,
        names,
        diff,
        comult,
        coaug: 0,
        counit: vec![ring.one()],
    };
    dgc.validate()?;
    Ok(BarDgc {
        dgc,
        words,
        index,
        algebra_cap: a.cap,
    })
}

/// The cobar construction of a connected Dgc. The suspension raises
/// degree: a letter over c has degree |c| + 1, so words stay finite per
/// degree whenever C̄ sits in positive degrees.
#[derive(Debug, Clone)]
pub struct CobarDga {
    pub dga: Dga,
    pub words: Vec<Vec<Vec<Idx>>>,
    index: Vec<BTreeMap<Vec<Idx>, usize>>,
}

impl CobarDga {
    pub fn word_index(&self, degree: usize, word: &[Idx]) -> Option<usize> {
        self.index.get(degree)?.get(word).copied()
    }
}

pub fn cobar(c: &Dgc, cap: usize) -> Result<CobarDga, BarError> {
    let ring = c.ring;
    if c.dim(0) != 1 {
        // extra degree-0 elements would put letters in degree 1 with
        // unbounded word lengths in the reduced-coalgebra sense
        return Err(BarError::CobarNotFinite);
    }
    let mut words: Vec<Vec<Vec<Idx>>> = vec![Vec::new(); cap + 1];
    words[0].push(Vec::new());
    // letters: positive-degree basis of C, letter degree |c| + 1
    let mut letters: Vec<Vec<Idx>> = vec![Vec::new(); cap + 1];
    for d in 1..=c.cap.min(cap.saturating_sub(1)) {
        for i in 0..c.dim(d) {
            if d + 1 <= cap {
                letters[d + 1].push((d, i));
            }
        }
    }
    for deg in 1..=cap {
        let mut acc = Vec::new();
        for sd in 2..=deg {
            for &l in &letters[sd] {
                for t in words[deg - sd].clone() {
                    let mut w = Vec::with_capacity(t.len() + 1);
                    w.push(l);
                    w.extend(t);
                    acc.push(w);
                }
            }
        }
        acc.sort();
        acc.dedup();
        words[deg] = acc;
    }

    let mut index: Vec<BTreeMap<Vec<Idx>, usize>> = Vec::with_capacity(cap + 1);
    let mut names = Vec::with_capacity(cap + 1);
    for deg in 0..=cap {
        let mut m = BTreeMap::new();
        let mut row = Vec::with_capacity(words[deg].len());
        for (i, w) in words[deg].iter().enumerate() {
            m.insert(w.clone(), i);
            let mut s = String::from("<");
            for (k, &(d, j)) in w.iter().enumerate() {
                if k > 0 {
                    s.push('|');
                }
                s.push_str(&c.names[d][j]);
            }
            s.push('>');
            row.push(if w.is_empty() { "1".into() } else { s });
        }
        index.push(m);
        names.push(row);
    }

    // differential: on a letter over c, −<dc> plus splittings
    // Σ (−1)^{|c′|} <c′|c″> over the reduced comultiplication, extended
    // as a derivation with suspension-degree prefix signs
    let letter_diff = |l: Idx| -> Vec<(Vec<Idx>, Coeff)> {
        let mut out: Vec<(Vec<Idx>, Coeff)> = Vec::new();
        let (d, i) = l;
        if d < c.cap {
            for (&y, cc) in &c.diff[d][i].0 {
                out.push((vec![y], ring.mul(&ring.from_i64(-1), cc)));
            }
        }
        for (&(x, y), cc) in &c.comult[d][i].0 {
            if x.0 == 0 || y.0 == 0 {
                continue; // reduced part only
            }
            let s = sign_of(ring, x.0);
            out.push((vec![x, y], ring.mul(&s, cc)));
        }
        out
    };
    let mut diff: Vec<Vec<Lin>> = Vec::with_capacity(cap + 1);
    for deg in 0..=cap {
        let mut row = Vec::with_capacity(words[deg].len());
        for w in &words[deg] {
            let mut out = Lin::zero();
            if deg < cap {
                let mut prefix = 0usize; // sum of letter degrees before i
                for i in 0..w.len() {
                    let s = sign_of(ring, prefix);
                    for (repl, cc) in letter_diff(w[i]) {
                        let mut nw = Vec::with_capacity(w.len() + repl.len() - 1);
                        nw.extend_from_slice(&w[..i]);
                        nw.extend(repl);
                        nw.extend_from_slice(&w[i + 1..]);
                        if let Some(&j) = index[deg + 1].get(&nw) {
                            out.add_in(ring, (deg + 1, j), &ring.mul(&s, &cc));
                        }
                    }
                    prefix += w[i].0 + 1;
                }
            }
            row.push(out);
        }
        diff.push(row);
    }

    // free multiplication: concatenation
    let mut mult = BTreeMap::new();
    for d1 in 0..=cap {
        for (i1, w1) in words[d1].iter().enumerate() {
            for d2 in 0..=cap - d1 {
                for (i2, w2) in words[d2].iter().enumerate() {
                    let mut w = w1.clone();
                    w.extend(w2.iter().cloned());
                    let j = index[d1 + d2][&w];
                    mult.insert(
                        ((d1, i1), (d2, i2)),
                        Lin::term((d1 + d2, j), ring.one()),
                    );
                }
            }
        }
    }

    let dga = Dga {
        ring,
        cap,
        names,
        diff,
        mult,
        unit: 0,
    };
    dga.validate()?;
    Ok(CobarDga { dga, words, index })
}

/// A degree-+1 map C → A on basis elements.
#[derive(Debug, Clone)]
pub struct TwistingCochain {
    /// per source degree, per index: the image (degree + 1 in A)
    pub vals: Vec<Vec<Lin>>,
}

impl TwistingCochain {
    pub fn zero(c: &Dgc) -> TwistingCochain {
        TwistingCochain {
            vals: (0..=c.cap)
                .map(|d| vec![Lin::zero(); c.dim(d)])
                .collect(),
        }
    }

    pub fn apply(&self, x: &Lin, ring: CoefficientRing) -> Lin {
        let mut out = Lin::zero();
        for (&(d, i), c) in &x.0 {
            if let Some(row) = self.vals.get(d) {
                out.add_scaled(ring, &row[i], c);
            }
        }
        out
    }
}

/// The tautological cochain B A → A: a one-letter word [a] goes to −a,
/// everything else to 0. The sign pairs with the stored bar-deletion
/// sign; check_twisting_cochain verifies the package.
pub fn tautological_cochain(b: &BarDgc, a: &Dga) -> TwistingCochain {
    let ring = a.ring;
    let mut vals: Vec<Vec<Lin>> = Vec::with_capacity(b.dgc.cap + 1);
    for d in 0..=b.dgc.cap {
        let mut row = Vec::with_capacity(b.words[d].len());
        for w in &b.words[d] {
            if w.len() == 1 {
                row.push(Lin::term(w[0], ring.from_i64(-1)));
            } else {
                row.push(Lin::zero());
            }
        }
        vals.push(row);
    }
    TwistingCochain { vals }
}

/// Post-compose a cochain with an algebra map A → A′ given on basis.
pub fn push_cochain(t: &TwistingCochain, f: &AlgMap, ring: CoefficientRing) -> TwistingCochain {
    TwistingCochain {
        vals: t
            .vals
            .iter()
            .map(|row| row.iter().map(|l| f.apply(l, ring)).collect())
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub ok: bool,
    pub violation: Option<String>,
}

impl Verdict {
    fn pass() -> Verdict {
        Verdict {
            ok: true,
            violation: None,
        }
    }
    fn fail(s: String) -> Verdict {
        Verdict {
            ok: false,
            violation: Some(s),
        }
    }
}

/// Verify ε_A t = 0, t η_C = 0, and Dt = t ∪ t basis-wise through the
/// common cap. Reports the first violation.
pub fn check_twisting_cochain(c: &Dgc, a: &Dga, t: &TwistingCochain) -> Verdict {
    let ring = a.ring;
    // t η_C = 0: the coaugmentation goes to zero
    let unit_img = &t.vals[0][c.coaug];
    if !unit_img.is_zero() {
        return Verdict::fail("t does not kill the coaugmentation".into());
    }
    // ε_A t = 0: no unit component in any image
    for (d, row) in t.vals.iter().enumerate() {
        for (i, l) in row.iter().enumerate() {
            if l.0.keys().any(|&(dd, ii)| dd == 0 && ii == a.unit) {
                return Verdict::fail(format!(
                    "augmentation of t({}) is nonzero",
                    c.names[d][i]
                ));
            }
        }
    }
    let cap = c.cap.min(a.cap);
    for d in 0..=cap {
        for i in 0..c.dim(d) {
            if d + 2 > a.cap {
                continue;
            }
            // Dt = d_A t + t d_C (|t| = 1)
            let x = Lin::term((d, i), ring.one());
            let mut lhs = a.d_lin(&t.apply(&x, ring));
            lhs.add(ring, &t.apply(&c.d_lin(&x), ring));
            // (t ∪ t)(x) = Σ (−1)^{|x′|} t(x′) t(x″)
            let mut rhs = Lin::zero();
            for (&(p, q), cc) in &c.comult[d][i].0 {
                let s = sign_of(ring, p.0);
                let tp = t.apply(&Lin::term(p, ring.one()), ring);
                let tq = t.apply(&Lin::term(q, ring.one()), ring);
                let prod = a.mul_lin(&tp, &tq);
                rhs.add_scaled(ring, &prod, &ring.mul(&s, cc));
            }
            if lhs != rhs {
                return Verdict::fail(format!(
                    "Dt != t u t at degree {} element {}",
                    d, c.names[d][i]
                ));
            }
        }
    }
    Verdict::pass()
}

/// A degree-preserving algebra map between table algebras, on basis.
#[derive(Debug, Clone)]
pub struct AlgMap {
    pub vals: Vec<Vec<Lin>>,
}

impl AlgMap {
    pub fn apply(&self, x: &Lin, ring: CoefficientRing) -> Lin {
        let mut out = Lin::zero();
        for (&(d, i), c) in &x.0 {
            if let Some(row) = self.vals.get(d) {
                if let Some(l) = row.get(i) {
                    out.add_scaled(ring, l, c);
                }
            }
        }
        out
    }

    /// The augmentation A → k (scalar target).
    pub fn augmentation(a: &Dga) -> AlgMap {
        let mut vals: Vec<Vec<Lin>> = (0..=a.cap).map(|d| vec![Lin::zero(); a.dim(d)]).collect();
        vals[0][a.unit] = Lin::term((0, 0), a.ring.one());
        AlgMap { vals }
    }

    /// The identity map.
    pub fn identity(a: &Dga) -> AlgMap {
        AlgMap {
            vals: (0..=a.cap)
                .map(|d| {
                    (0..a.dim(d))
                        .map(|i| Lin::term((d, i), a.ring.one()))
                        .collect()
                })
                .collect(),
        }
    }
}

/// Verify an AlgMap is a unital algebra chain map on the stored basis.
pub fn check_alg_map(a: &Dga, n: &Dga, f: &AlgMap) -> Verdict {
    let ring = a.ring;
    if f.apply(&a.unit_lin(), ring) != n.unit_lin() {
        return Verdict::fail("unit not preserved".into());
    }
    let cap = a.cap.min(n.cap);
    for d in 0..=cap {
        for i in 0..a.dim(d) {
            let x = Lin::term((d, i), ring.one());
            if d < cap {
                let lhs = n.d_lin(&f.apply(&x, ring));
                let rhs = f.apply(&a.d_lin(&x), ring);
                if lhs != rhs {
                    return Verdict::fail(format!("not a chain map at {}", a.names[d][i]));
                }
            }
            for d2 in 0..=cap - d {
                for i2 in 0..a.dim(d2) {
                    let y = Lin::term((d2, i2), ring.one());
                    let lhs = f.apply(&a.mul_lin(&x, &y), ring);
                    let rhs = n.mul_lin(&f.apply(&x, ring), &f.apply(&y, ring));
                    if lhs != rhs {
                        return Verdict::fail(format!(
                            "not multiplicative at {} * {}",
                            a.names[d][i], a.names[d2][i2]
                        ));
                    }
                }
            }
        }
    }
    Verdict::pass()
}

/// A finite cochain complex given by differential matrices per degree.
#[derive(Debug)]
pub struct FiniteComplex {
    pub ring: CoefficientRing,
    pub dims: Vec<usize>,
    /// d[n]: matrix from degree n to degree n+1
    pub d: Vec<ExactMatrix>,
}

impl FiniteComplex {
    pub fn cohomology_dims(&self, max: usize) -> Result<Vec<usize>, BarError> {
        if !self.ring.is_field() {
            return Err(BarError::FieldRequired);
        }
        let mut ranks = vec![0usize; max + 2];
        for n in 0..=max {
            ranks[n + 1] = self.d[n].rank()?;
        }
        Ok((0..=max)
            .map(|n| self.dims[n] - ranks[n + 1] - ranks[n])
            .collect())
    }

    pub fn check_d_squared(&self) -> bool {
        for n in 0..self.d.len().saturating_sub(1) {
            // (d_{n+1} ∘ d_n) must vanish entrywise
            let a = &self.d[n + 1];
            let b = &self.d[n];
            for j in 0..b.cols {
                // compute column j of the composite
                let mut col: BTreeMap<usize, Coeff> = BTreeMap::new();
                for (i, k, c) in b.iter() {
                    if k != j {
                        continue;
                    }
                    for (i2, k2, c2) in a.iter() {
                        if k2 != i {
                            continue;
                        }
                        let cur = col.get(&i2).cloned().unwrap_or_else(|| self.ring.zero());
                        let v = self.ring.add(&cur, &self.ring.mul(c, c2));
                        if v.is_zero() {
                            col.remove(&i2);
                        } else {
                            col.insert(i2, v);
                        }
                    }
                }
                if !col.is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

/// Two-sided twisted tensor product M ⊗_t C ⊗_t N, where both module
/// structures are induced from algebra maps A → M and A → N and a single
/// twisting cochain t: C → A. Pass scalar Dgas to drop a side.
///
/// Differential: tensor differential + δ^L − δ^R with
/// δ^L(m⊗c⊗n) = Σ (−1)^{|m|} m·αt(c′) ⊗ c″ ⊗ n and
/// δ^R(m⊗c⊗n) = Σ (−1)^{|m|+|c′|} m ⊗ c′ ⊗ βt(c″)·n.
#[allow(clippy::too_many_arguments)]
pub fn twisted_tensor(
    m: &Dga,
    act_m: &AlgMap,
    c: &Dgc,
    t: &TwistingCochain,
    n: &Dga,
    act_n: &AlgMap,
    a: &Dga,
    cap: usize,
) -> Result<FiniteComplex, BarError> {
    let ring = a.ring;
    let check = check_twisting_cochain(c, a, t);
    if !check.ok {
        return Err(BarError::BadCochain(check.violation.unwrap_or_default()));
    }
    let cap = cap.min(m.cap + c.cap + n.cap);
    // basis: triples (im, ic, in) by total degree
    let mut triples: Vec<Vec<(Idx, Idx, Idx)>> = vec![Vec::new(); cap + 1];
    let mut index: BTreeMap<(Idx, Idx, Idx), Idx> = BTreeMap::new();
    for deg in 0..=cap {
        for dm in 0..=deg.min(m.cap) {
            for dc in 0..=(deg - dm).min(c.cap) {
                let dn = deg - dm - dc;
                if dn > n.cap {
                    continue;
                }
                for im in 0..m.dim(dm) {
                    for ic in 0..c.dim(dc) {
                        for i_n in 0..n.dim(dn) {
                            let key = ((dm, im), (dc, ic), (dn, i_n));
                            index.insert(key, (deg, triples[deg].len()));
                            triples[deg].push(key);
                        }
                    }
                }
            }
        }
    }
    let mut mats: Vec<ExactMatrix> = Vec::with_capacity(cap + 1);
    for deg in 0..=cap {
        let target = if deg + 1 <= cap {
            triples[deg + 1].len()
        } else {
            0
        };
        let mut mat = ExactMatrix::new(ring, target, triples[deg].len());
        if deg + 1 > cap {
            mats.push(mat);
            continue;
        }
        for (col, &(xm, xc, xn)) in triples[deg].iter().enumerate() {
            let mut out: BTreeMap<(Idx, Idx, Idx), Coeff> = BTreeMap::new();
            let mut emit = |key: (Idx, Idx, Idx), v: Coeff| {
                if v.is_zero() {
                    return;
                }
                let cur = out.get(&key).cloned().unwrap_or_else(|| ring.zero());
                let s = ring.add(&cur, &v);
                if s.is_zero() {
                    out.remove(&key);
                } else {
                    out.insert(key, s);
                }
            };
            // tensor differential
            if xm.0 < m.cap {
                for (&ym, cc) in &m.diff[xm.0][xm.1].0 {
                    emit((ym, xc, xn), cc.clone());
                }
            }
            if xc.0 < c.cap {
                let s = sign_of(ring, xm.0);
                for (&yc, cc) in &c.diff[xc.0][xc.1].0 {
                    emit((xm, yc, xn), ring.mul(&s, cc));
                }
            }
            if xn.0 < n.cap {
                let s = sign_of(ring, xm.0 + xc.0);
                for (&yn, cc) in &n.diff[xn.0][xn.1].0 {
                    emit((xm, xc, yn), ring.mul(&s, cc));
                }
            }
            // twists
            for (&(cp, cq), cc) in &c.comult[xc.0][xc.1].0 {
                // left: consume c′ through t into M
                let tl = act_m.apply(&t.apply(&Lin::term(cp, ring.one()), ring), ring);
                if !tl.is_zero() {
                    let s = ring.mul(&sign_of(ring, xm.0), cc);
                    let mprod = m.mul_lin(&Lin::term(xm, ring.one()), &tl);
                    for (&ym, c2) in &mprod.0 {
                        emit((ym, cq, xn), ring.mul(&s, c2));
                    }
                }
                // right: consume c″ through t into N
                let tr = act_n.apply(&t.apply(&Lin::term(cq, ring.one()), ring), ring);
                if !tr.is_zero() {
                    let s = ring.mul(
                        &sign_of(ring, xm.0 + cp.0 + 1),
                        cc,
                    );
                    let nprod = n.mul_lin(&tr, &Lin::term(xn, ring.one()));
                    for (&yn, c2) in &nprod.0 {
                        emit((xm, cp, yn), ring.mul(&s, c2));
                    }
                }
            }
            for (key, v) in out {
                if let Some(&(dd, row)) = index.get(&key) {
                    debug_assert_eq!(dd, deg + 1);
                    mat.set(row, col, v);
                }
            }
        }
        mats.push(mat);
    }
    let complex = FiniteComplex {
        ring,
        dims: triples.iter().map(|v| v.len()).collect(),
        d: mats,
    };
    if !complex.check_d_squared() {
        return Err(BarError::BadStructure(
            "twisted differential does not square to zero".into(),
        ));
    }
    Ok(complex)
}

/// One-sided twisted tensor product C ⊗_t N (trivial left module).
pub fn twisted_tensor_right(
    c: &Dgc,
    t: &TwistingCochain,
    n: &Dga,
    act_n: &AlgMap,
    a: &Dga,
    cap: usize,
) -> Result<FiniteComplex, BarError> {
    let scalar = Dga::scalar(a.ring, 0);
    let act = AlgMap::augmentation(a);
    twisted_tensor(&scalar, &act, c, t, n, act_n, a, cap)
}

/// Left-sided twisted tensor product M ⊗_t C (trivial right module).
pub fn twisted_tensor_left(
    m: &Dga,
    act_m: &AlgMap,
    c: &Dgc,
    t: &TwistingCochain,
    a: &Dga,
    cap: usize,
) -> Result<FiniteComplex, BarError> {
    let scalar = Dga::scalar(a.ring, 0);
    let act = AlgMap::augmentation(a);
    twisted_tensor(m, act_m, c, t, &scalar, &act, a, cap)
}

/// Image of [x-word] ⊗ [y-word] under the shuffle map into
/// B(A₁ ⊗ A₂): all order-preserving interleavings, with Koszul signs in
/// the suspension degrees.
pub fn shuffle_word(
    a1: &Dga,
    a2: &Dga,
    tensor: &Dga,
    bt: &BarDgc,
    w1: &[Idx],
    w2: &[Idx],
) -> Lin {
    let ring = a1.ring;
    // letters in the tensor algebra: x ⊗ 1 and 1 ⊗ y; find their indices
    let letter1 = |x: Idx| -> Idx {
        let name = format!("{}(x){}", a1.names[x.0][x.1], "1");
        let pos = tensor.names[x.0]
            .iter()
            .position(|n| *n == name)
            .expect("x(x)1 letter");
        (x.0, pos)
    };
    let letter2 = |y: Idx| -> Idx {
        let name = format!("{}(x){}", "1", a2.names[y.0][y.1]);
        let pos = tensor.names[y.0]
            .iter()
            .position(|n| *n == name)
            .expect("1(x)y letter");
        (y.0, pos)
    };
    let deg: usize = w1.iter().map(|&(d, _)| d - 1).sum::<usize>()
        + w2.iter().map(|&(d, _)| d - 1).sum::<usize>();
    let s1: Vec<usize> = w1.iter().map(|&(d, _)| d - 1).collect();
    let s2: Vec<usize> = w2.iter().map(|&(d, _)| d - 1).collect();
    let mut out = Lin::zero();
    // enumerate shuffles as bitmasks of positions taken by w1
    let total = w1.len() + w2.len();
    let mut stack: Vec<(usize, usize, usize, Vec<Idx>, usize)> = vec![(0, 0, 0, Vec::new(), 0)];
    while let Some((i, j, _pos, word, sgn)) = stack.pop() {
        if i == w1.len() && j == w2.len() {
            if let Some(k) = bt.word_index(deg, &word) {
                out.add_in(ring, (deg, k), &sign_of(ring, sgn));
            }
            continue;
        }
        if i < w1.len() {
            let mut w = word.clone();
            w.push(letter1(w1[i]));
            stack.push((i + 1, j, _pos + 1, w, sgn));
        }
        if j < w2.len() {
            // y_j moves past the remaining x_i..: Koszul sign
            let pass: usize = s1[i..].iter().sum();
            let mut w = word.clone();
            w.push(letter2(w2[j]));
            stack.push((i, j + 1, _pos + 1, w, sgn + s2[j] * pass));
        }
    }
    let _ = total;
    out
}

/// Verify the shuffle map B A₁ ⊗ B A₂ → B(A₁ ⊗ A₂) is a chain map and a
/// coalgebra map on every basis pair through the cap.
pub fn check_shuffle_identities(a1: &Dga, a2: &Dga, cap: usize) -> Result<Verdict, BarError> {
    let ring = a1.ring;
    let b1 = bar(a1, cap, None)?;
    let b2 = bar(a2, cap, None)?;
    let at = Dga::tensor(a1, a2, cap + 1);
    let bt = bar(&at, cap, None)?;
    let shuffle = |d1: usize, i1: usize, d2: usize, i2: usize| -> Lin {
        shuffle_word(a1, a2, &at, &bt, &b1.words[d1][i1], &b2.words[d2][i2])
    };
    for d1 in 0..=cap {
        for i1 in 0..b1.dgc.dim(d1) {
            for d2 in 0..=cap - d1 {
                for i2 in 0..b2.dgc.dim(d2) {
                    let deg = d1 + d2;
                    // chain map: d∇ = ∇d
                    if deg < cap {
                        let lhs = bt.dgc.d_lin(&shuffle(d1, i1, d2, i2));
                        let mut rhs = Lin::zero();
                        for (&(dd, ii), c) in &b1.dgc.diff[d1][i1].0 {
                            rhs.add_scaled(ring, &shuffle(dd, ii, d2, i2), c);
                        }
                        let s = sign_of(ring, d1);
                        for (&(dd, ii), c) in &b2.dgc.diff[d2][i2].0 {
                            rhs.add_scaled(ring, &shuffle(d1, i1, dd, ii), &ring.mul(&s, c));
                        }
                        if lhs != rhs {
                            return Ok(Verdict::fail(format!(
                                "chain-map identity fails on {} (x) {}",
                                b1.dgc.names[d1][i1], b2.dgc.names[d2][i2]
                            )));
                        }
                    }
                    // coalgebra map: Δ∇ = (∇⊗∇)(1⊗χ⊗1)(Δ⊗Δ)
                    let mut lhs: Lin2 = Lin2::default();
                    for (&(dd, ii), c) in &shuffle(d1, i1, d2, i2).0 {
                        for (&pair, c2) in &bt.dgc.comult[dd][ii].0 {
                            lhs.add_in(ring, pair, &ring.mul(c, c2));
                        }
                    }
                    let mut rhs: Lin2 = Lin2::default();
                    for (&(p1, q1), c1) in &b1.dgc.comult[d1][i1].0 {
                        for (&(p2, q2), c2) in &b2.dgc.comult[d2][i2].0 {
                            // swap q1 past p2
                            let s = sign_of(ring, q1.0 * p2.0);
                            let left = shuffle(p1.0, p1.1, p2.0, p2.1);
                            let right = shuffle(q1.0, q1.1, q2.0, q2.1);
                            let coeff = ring.mul(&s, &ring.mul(c1, c2));
                            for (&li, lc) in &left.0 {
                                for (&ri, rc) in &right.0 {
                                    rhs.add_in(
                                        ring,
                                        (li, ri),
                                        &ring.mul(&coeff, &ring.mul(lc, rc)),
                                    );
                                }
                            }
                        }
                    }
                    if lhs != rhs {
                        return Ok(Verdict::fail(format!(
                            "coalgebra identity fails on {} (x) {}",
                            b1.dgc.names[d1][i1], b2.dgc.names[d2][i2]
                        )));
                    }
                }
            }
        }
    }
    Ok(Verdict::pass())
}

/// Verify the counit Ω B A → A is a chain map and induces an isomorphism
/// on cohomology through degree cap − 2.
pub fn counit_quasi_iso_check(a: &Dga, cap: usize) -> Result<bool, BarError> {
    let ring = a.ring;
    if !ring.is_field() {
        return Err(BarError::FieldRequired);
    }
    let b = bar(a, cap, None)?;
    let om = cobar(&b.dgc, cap)?;
    // the counit: algebra map sending a one-letter word over the
    // one-letter bar word [x] to −x, longer letters to 0
    let phi_letter = |l: Idx| -> Lin {
        let w = &b.words[l.0][l.1];
        if w.len() == 1 {
            Lin::term(w[0], ring.from_i64(-1))
        } else {
            Lin::zero()
        }
    };
    let phi = |deg: usize, i: usize| -> Lin {
        let word = &om.words[deg][i];
        let mut acc = a.unit_lin();
        for &l in word {
            acc = a.mul_lin(&acc, &phi_letter(l));
            if acc.is_zero() {
                return acc;
            }
        }
        acc
    };
    // chain-map check
    for deg in 0..cap {
        for i in 0..om.dga.dim(deg) {
            let lhs = a.d_lin(&phi(deg, i));
            let mut rhs = Lin::zero();
            for (&(dd, ii), c) in &om.dga.diff[deg][i].0 {
                rhs.add_scaled(ring, &phi(dd, ii), c);
            }
            if lhs != rhs {
                return Err(BarError::BadStructure(
                    "counit is not a chain map".into(),
                ));
            }
        }
    }
    // quasi-isomorphism through cap − 2
    let max = cap.saturating_sub(2);
    let h_om = om.dga.cohomology_dims(max)?;
    let h_a = a.cohomology_dims(max.min(a.cap - 1))?;
    for n in 0..=max.min(a.cap - 1) {
        if h_om[n] != h_a[n] {
            return Ok(false);
        }
        // surjectivity on cohomology: the images of Ω-cocycles must span
        // H^n(A) over the coboundaries
        let dim_n = om.dga.dim(n);
        let mut mat = ExactMatrix::new(ring, om.dga.dim(n + 1), dim_n);
        for i in 0..dim_n {
            for (&(dd, j), c) in &om.dga.diff[n][i].0 {
                debug_assert_eq!(dd, n + 1);
                mat.set(j, i, c.clone());
            }
        }
        let kernel = mat.rank_and_kernel()?.kernel;
        let a_n = a.dim(n);
        let mut ech = crate::ring::Echelon::new(ring);
        // seed with coboundaries of A
        if n > 0 {
            for i in 0..a.dim(n - 1) {
                let img = a.d_lin(&Lin::term((n - 1, i), ring.one()));
                let mut v = vec![ring.zero(); a_n];
                for (&(_, j), c) in &img.0 {
                    v[j] = c.clone();
                }
                ech.insert(&v);
            }
        }
        let boundary_rank = ech.rank();
        for z in kernel {
            let mut img = Lin::zero();
            for (i, c) in z.iter().enumerate() {
                if !c.is_zero() {
                    img.add_scaled(ring, &phi(n, i), c);
                }
            }
            let mut v = vec![ring.zero(); a_n];
            for (&(_, j), c) in &img.0 {
                v[j] = c.clone();
            }
            ech.insert(&v);
        }
        if ech.rank() - boundary_rank != h_a[n] {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gca::{FreeCga, GeneratorSpec};

    fn q() -> CoefficientRing {
        CoefficientRing::Rationals
    }

    fn exterior(names: &[(&str, usize)], cap: usize) -> Dga {
        let alg = FreeCga::new(
            q(),
            names
                .iter()
                .map(|(n, d)| GeneratorSpec::exterior(n, *d))
                .collect(),
        )
        .unwrap();
        Dga::from_cdga(&Cdga::with_zero_differential(alg), cap)
    }

    fn truncated_polynomial(cap: usize) -> Dga {
        // Q[x]/(x^4) with |x| = 2, tabulated through the cap
        let alg = FreeCga::new(q(), vec![GeneratorSpec::polynomial("x", 2)]).unwrap();
        let full = Dga::from_cdga(&Cdga::with_zero_differential(alg), cap);
        let mut t = full;
        for d in (0..=t.cap).filter(|d| *d > 6) {
            t.names[d].clear();
            t.diff[d].clear();
        }
        t.mult.retain(|&(x, y), _| x.0 + y.0 <= t.cap && t.dim(x.0) > x.1 && t.dim(y.0) > y.1);
        for l in t.mult.values_mut() {
            l.0.retain(|&(d, i), _| i < if d > 6 { 0 } else { 1 });
        }
        t.validate().unwrap();
        t
    }

    #[test]
    fn scalar_bar_is_trivial() {
        let a = Dga::scalar(q(), 6);
        let b = bar(&a, 6, None).unwrap();
        assert_eq!(b.dgc.dim(0), 1);
        for d in 1..=6 {
            assert_eq!(b.dgc.dim(d), 0);
        }
    }

    #[test]
    fn bar_of_odd_sphere_has_divided_power_pattern() {
        let a = exterior(&[("z3", 3)], 10);
        let b = bar(&a, 10, None).unwrap();
        let dims: Vec<usize> = (0..=10).map(|d| b.dgc.dim(d)).collect();
        assert_eq!(dims, vec![1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
        // the bar differential vanishes here, so cohomology = basis dims
        for d in 0..=9 {
            for i in 0..b.dgc.dim(d) {
                assert!(b.dgc.diff[d][i].is_zero());
            }
        }
    }

    #[test]
    fn bar_deletion_sign_matches_convention() {
        // A = Λ[z3, z5]: d[z3|z5] must contain −(−1)^{|σz3|}[z3 z5]
        let a = exterior(&[("z3", 3), ("z5", 5)], 12);
        let b = bar(&a, 12, None).unwrap();
        let z3 = (3usize, 0usize);
        let z5 = (5usize, 0usize);
        let d1 = b.word_index(6, &[z3, z5]).unwrap();
        let image = &b.dgc.diff[6][d1];
        // find the one-letter word [z3*z5]
        let prod = a.mul_basis(z3, z5);
        let (&target, c0) = prod.0.iter().next().unwrap();
        assert_eq!(c0, &q().one());
        let j = b.word_index(7, &[target]).unwrap();
        let coeff = image.0.get(&(7, j)).unwrap();
        // |σz3| = 2, so the stored sign is −(+1) = −1
        assert_eq!(*coeff, q().from_i64(-1));
    }

    #[test]
    fn cobar_of_primitive_coalgebra_is_free_on_one_generator() {
        // C = k ⊕ k·c, |c| = 2, Δc = c⊗1 + 1⊗c, dc = 0
        let ring = q();
        let mut names = vec![vec!["1".to_string()], vec![], vec!["c".to_string()]];
        names.resize(10, vec![]);
        let mut diff = vec![vec![Lin::zero()], vec![], vec![Lin::zero()]];
        diff.resize(10, vec![]);
        let mut comult = vec![Vec::new(), Vec::new(), Vec::new()];
        let mut d0 = Lin2::default();
        d0.add_in(ring, ((0, 0), (0, 0)), &ring.one());
        comult[0].push(d0);
        let mut dc = Lin2::default();
        dc.add_in(ring, ((2, 0), (0, 0)), &ring.one());
        dc.add_in(ring, ((0, 0), (2, 0)), &ring.one());
        comult[2].push(dc);
        comult.resize(10, Vec::new());
        let c = Dgc {
            ring,
            cap: 9,
            names,
            diff,
            comult,
            coaug: 0,
            counit: vec![ring.one()],
        };
        c.validate().unwrap();
        let om = cobar(&c, 9).unwrap();
        let dims: Vec<usize> = (0..=9).map(|d| om.dga.dim(d)).collect();
        // free algebra on one degree-3 generator
        assert_eq!(dims, vec![1, 0, 0, 1, 0, 0, 1, 0, 0, 1]);
        let h = om.dga.cohomology_dims(8).unwrap();
        assert_eq!(h, vec![1, 0, 0, 1, 0, 0, 1, 0, 0]);
    }

    #[test]
    fn cobar_refuses_nonconnected_coalgebras() {
        let ring = q();
        // two grouplikes in degree 0
        let names = vec![vec!["1".to_string(), "g".to_string()]];
        let diff = vec![vec![Lin::zero(), Lin::zero()]];
        let mut d0 = Lin2::default();
        d0.add_in(ring, ((0, 0), (0, 0)), &ring.one());
        let mut dg = Lin2::default();
        dg.add_in(ring, ((0, 1), (0, 1)), &ring.one());
        let comult = vec![vec![d0, dg]];
        let c = Dgc {
            ring,
            cap: 0,
            names,
            diff,
            comult,
            coaug: 0,
            counit: vec![ring.one(), ring.one()],
        };
        let err = cobar(&c, 4).unwrap_err();
        assert_eq!(err.to_string(), "cobar not finite per degree");
    }

    #[test]
    fn counit_is_a_quasi_isomorphism_for_the_corpus() {
        let z3 = exterior(&[("z3", 3)], 10);
        assert!(counit_quasi_iso_check(&z3, 10).unwrap());
        let z35 = exterior(&[("z3", 3), ("z5", 5)], 10);
        assert!(counit_quasi_iso_check(&z35, 10).unwrap());
        let tp = truncated_polynomial(10);
        assert!(counit_quasi_iso_check(&tp, 10).unwrap());
    }

    #[test]
    fn tautological_cochain_is_twisting() {
        let a = exterior(&[("z3", 3)], 12);
        let b = bar(&a, 12, None).unwrap();
        let t = tautological_cochain(&b, &a);
        let v = check_twisting_cochain(&b.dgc, &a, &t);
        assert!(v.ok, "{:?}", v.violation);
        // zero cochain is trivially twisting
        let z = TwistingCochain::zero(&b.dgc);
        assert!(check_twisting_cochain(&b.dgc, &a, &z).ok);
    }

    #[test]
    fn flipped_sign_is_reported_with_location() {
        let a = exterior(&[("z3", 3)], 8);
        let b = bar(&a, 8, None).unwrap();
        let mut t = tautological_cochain(&b, &a);
        // flip the sign on the degree-2 basis element [z3]
        let j = b.word_index(2, &[(3, 0)]).unwrap();
        t.vals[2][j] = Lin::term((3, 0), q().one());
        let v = check_twisting_cochain(&b.dgc, &a, &t);
        assert!(!v.ok);
        let msg = v.violation.unwrap();
        assert!(msg.contains("degree 4") || msg.contains("[z3"), "{}", msg);
    }

    #[test]
    fn zero_twist_gives_kuenneth() {
        // C = bar(Λ[z3]) with t = 0 against N = Λ[z5]
        let a = exterior(&[("z3", 3)], 8);
        let b = bar(&a, 8, None).unwrap();
        let n = exterior(&[("z5", 5)], 8);
        let act = AlgMap {
            vals: (0..=a.cap)
                .map(|d| {
                    (0..a.dim(d))
                        .map(|i| {
                            if d == 0 && i == 0 {
                                n.unit_lin()
                            } else {
                                Lin::zero()
                            }
                        })
                        .collect()
                })
                .collect(),
        };
        let t = TwistingCochain::zero(&b.dgc);
        let cx = twisted_tensor_right(&b.dgc, &t, &n, &act, &a, 8).unwrap();
        let h = cx.cohomology_dims(7).unwrap();
        // H(BΛ[z3]) ⊗ Λ[z5]: dims 1 at 0,2,4,5,6,7(2,5 -> 7)
        assert_eq!(h, vec![1, 0, 1, 0, 1, 1, 1, 2]);
    }

    #[test]
    fn tautological_twist_recovers_the_cartan_complex() {
        use crate::catalog::{lookup, EmbeddingSpec};
        use crate::models::{cartan_model, ModelRecipe};
        let ring = q();
        let g = lookup("U(2)", ring).unwrap();
        let t2 = lookup("T2", ring).unwrap();
        let e = EmbeddingSpec::new(
            t2.clone(),
            g.clone(),
            vec![vec![1, 0], vec![0, 1]],
        )
        .unwrap();
        let recipe = ModelRecipe::one_sided(g.clone(), e.clone(), ring).unwrap();
        let model = cartan_model(&recipe).unwrap();
        let expected = model.cdga.cohomology(8).unwrap().dims;

        // A = H(BU(2)), N = H(BT^2), action = restriction, t = tautological
        let a_cga = Cdga::with_zero_differential(g.bg().clone());
        let a = Dga::from_cdga(&a_cga, 9);
        let n_cga = Cdga::with_zero_differential(t2.bg().clone());
        let n = Dga::from_cdga(&n_cga, 9);
        let images = crate::catalog::restriction_map(&e).unwrap();
        // tabulate the action A -> N on basis
        let mut act_vals: Vec<Vec<Lin>> = Vec::new();
        let mut n_index: BTreeMap<crate::gca::Monomial, Idx> = BTreeMap::new();
        for d in 0..=n.cap {
            for (i, m) in t2.bg().basis_of_degree(d).into_iter().enumerate() {
                n_index.insert(m, (d, i));
            }
        }
        for d in 0..=a.cap {
            let mut row = Vec::new();
            for m in g.bg().basis_of_degree(d) {
                let el = g.bg().monomial_element(m, ring.one());
                let img = g
                    .bg()
                    .substitute_unchecked(&el, t2.bg(), &images)
                    .unwrap();
                let mut l = Lin::zero();
                for (mono, c) in img.terms() {
                    if let Some(&idx) = n_index.get(mono) {
                        l.add_in(ring, idx, c);
                    }
                }
                row.push(l);
            }
            act_vals.push(row);
        }
        let act = AlgMap { vals: act_vals };
        assert!(check_alg_map(&a, &n, &act).ok);

        let b = bar(&a, 9, None).unwrap();
        let t = tautological_cochain(&b, &a);
        let cx = twisted_tensor_right(&b.dgc, &t, &n, &act, &a, 9).unwrap();
        let h = cx.cohomology_dims(8).unwrap();
        assert_eq!(h, expected[..9].to_vec());
    }

    #[test]
    fn shuffle_identities_hold_for_odd_spheres() {
        let a1 = exterior(&[("z3", 3)], 8);
        let a2 = exterior(&[("z3'", 3)], 8);
        let v = check_shuffle_identities(&a1, &a2, 8).unwrap();
        assert!(v.ok, "{:?}", v.violation);
    }

    #[test]
    fn shuffle_of_two_singletons_has_the_stated_shape() {
        let a1 = exterior(&[("a", 3)], 8);
        let a2 = exterior(&[("b", 5)], 8);
        let at = Dga::tensor(&a1, &a2, 9);
        let bt = bar(&at, 8, None).unwrap();
        let b1 = bar(&a1, 8, None).unwrap();
        let b2 = bar(&a2, 8, None).unwrap();
        let img = shuffle_word(&a1, &a2, &at, &bt, &b1.words[2][0], &b2.words[4][0]);
        // [a]⊗[b] ↦ [a⊗1|1⊗b] + (−1)^{|σa||σb|}[1⊗b|a⊗1], here sign +1
        assert_eq!(img.0.len(), 2);
        for (_, c) in &img.0 {
            assert_eq!(*c, q().one());
        }
    }

    #[test]
    fn shuffle_with_scalar_side_is_canonical() {
        let a1 = exterior(&[("z3", 3)], 6);
        let a2 = Dga::scalar(q(), 6);
        let v = check_shuffle_identities(&a1, &a2, 6).unwrap();
        assert!(v.ok);
        let at = Dga::tensor(&a1, &a2, 7);
        let bt = bar(&at, 6, None).unwrap();
        let b1 = bar(&a1, 6, None).unwrap();
        let img = shuffle_word(&a1, &a2, &at, &bt, &b1.words[4][0], &[]);
        assert_eq!(img.0.len(), 1);
    }

    #[test]
    fn two_sided_scalar_twist_computes_bar_cohomology() {
        let a = exterior(&[("z3", 3)], 8);
        let b = bar(&a, 8, None).unwrap();
        let t = tautological_cochain(&b, &a);
        let scalar = Dga::scalar(q(), 0);
        let aug = AlgMap::augmentation(&a);
        let cx = twisted_tensor(&scalar, &aug, &b.dgc, &t, &scalar, &aug, &a, 8).unwrap();
        let h = cx.cohomology_dims(7).unwrap();
        // the twists vanish on scalars, leaving the bar complex itself
        assert_eq!(h, vec![1, 0, 1, 0, 1, 0, 1, 0]);
    }
}
