//! Coefficient rings and exact linear algebra.
//!
//! Every computation in this crate runs over one of four coefficient rings:
//! the rationals, a prime field F_p, the integers, or a localization Z[1/m].
//! Arithmetic is exact everywhere; there are no floating point numbers in
//! this crate. Rank and kernel computations require a field, integral
//! structure is extracted through Smith normal form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("field required")]
    FieldRequired,
    #[error("integer matrix required")]
    IntegersRequired,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid localization modulus {0}")]
    InvalidModulus(u64),
    #[error("coefficient {0} does not lie in {1}")]
    NotAMember(String, String),
    #[error("cannot parse coefficient `{0}`")]
    BadCoefficient(String),
    #[error("unknown coefficient ring `{0}`")]
    UnknownRing(String),
}

/// One of the supported coefficient rings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoefficientRing {
    /// The field Q.
    Rationals,
    /// The field F_p, p prime.
    PrimeField(u32),
    /// The ring Z.
    Integers,
    /// The localization Z[1/m], m >= 2.
    LocalizedIntegers(u32),
}

impl CoefficientRing {
    pub fn validate(&self) -> Result<(), RingError> {
        match *self {
            CoefficientRing::PrimeField(p) => {
                if !is_prime(p as u64) {
                    return Err(RingError::NotPrime(p as u64));
                }
            }
            CoefficientRing::LocalizedIntegers(m) => {
                if m < 2 {
                    return Err(RingError::InvalidModulus(m as u64));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Parse a ring spec as used by the CLI: `Q`, `F2`, `F7`, `Z`, `Z-inv2`.
    pub fn parse_spec(s: &str) -> Result<CoefficientRing, RingError> {
        let t = s.trim();
        let ring = if t.eq_ignore_ascii_case("q") {
            CoefficientRing::Rationals
        } else if t.eq_ignore_ascii_case("z") {
            CoefficientRing::Integers
        } else if let Some(p) = t.strip_prefix('F').or_else(|| t.strip_prefix('f')) {
            let p: u32 = p.parse().map_err(|_| RingError::UnknownRing(s.into()))?;
            CoefficientRing::PrimeField(p)
        } else if let Some(m) = t
            .strip_prefix("Z-inv")
            .or_else(|| t.strip_prefix("z-inv"))
            .or_else(|| t.strip_prefix("Z-Inv"))
        {
            let m: u32 = m.parse().map_err(|_| RingError::UnknownRing(s.into()))?;
            CoefficientRing::LocalizedIntegers(m)
        } else {
            return Err(RingError::UnknownRing(s.into()));
        };
        ring.validate()?;
        Ok(ring)
    }

    pub fn is_field(&self) -> bool {
        matches!(
            self,
            CoefficientRing::Rationals | CoefficientRing::PrimeField(_)
        )
    }

    /// 0 for Q, Z and Z[1/m]; p for F_p.
    pub fn characteristic(&self) -> u32 {
        match *self {
            CoefficientRing::PrimeField(p) => p,
            _ => 0,
        }
    }

    /// Whether 2 is invertible. This gates the orthogonal-group catalog and
    /// all multiplicative output of two-sided computations.
    pub fn two_is_unit(&self) -> bool {
        match *self {
            CoefficientRing::Rationals => true,
            CoefficientRing::PrimeField(p) => p != 2,
            CoefficientRing::Integers => false,
            CoefficientRing::LocalizedIntegers(m) => m % 2 == 0,
        }
    }

    pub fn zero(&self) -> Coeff {
        match *self {
            CoefficientRing::PrimeField(_) => Coeff::Mod(0),
            _ => Coeff::Rat(BigRational::zero()),
        }
    }

    pub fn one(&self) -> Coeff {
        match *self {
            CoefficientRing::PrimeField(_) => Coeff::Mod(1),
            _ => Coeff::Rat(BigRational::one()),
        }
    }

    pub fn from_i64(&self, n: i64) -> Coeff {
        match *self {
            CoefficientRing::PrimeField(p) => Coeff::Mod(n.rem_euclid(p as i64) as u64),
            _ => Coeff::Rat(BigRational::from_integer(BigInt::from(n))),
        }
    }

    pub fn from_bigint(&self, n: &BigInt) -> Coeff {
        match *self {
            CoefficientRing::PrimeField(p) => {
                let p_big = BigInt::from(p);
                Coeff::Mod(n.mod_floor(&p_big).to_u64().unwrap())
            }
            _ => Coeff::Rat(BigRational::from_integer(n.clone())),
        }
    }

    /// Convert an exact rational into this ring, checking membership:
    /// denominators must be invertible.
    pub fn from_rational(&self, q: &BigRational) -> Result<Coeff, RingError> {
        match *self {
            CoefficientRing::Rationals => Ok(Coeff::Rat(q.clone())),
            CoefficientRing::Integers => {
                if q.is_integer() {
                    Ok(Coeff::Rat(q.clone()))
                } else {
                    Err(RingError::NotAMember(q.to_string(), self.to_string()))
                }
            }
            CoefficientRing::LocalizedIntegers(m) => {
                if denominator_divides_power(q.denom(), m) {
                    Ok(Coeff::Rat(q.clone()))
                } else {
                    Err(RingError::NotAMember(q.to_string(), self.to_string()))
                }
            }
            CoefficientRing::PrimeField(p) => {
                let p_big = BigInt::from(p);
                let den = q.denom().mod_floor(&p_big);
                if den.is_zero() {
                    return Err(RingError::NotAMember(q.to_string(), self.to_string()));
                }
                let den = den.to_u64().unwrap();
                let num = q.numer().mod_floor(&p_big).to_u64().unwrap();
                Ok(Coeff::Mod(mod_mul(num, mod_inv(den, p as u64), p as u64)))
            }
        }
    }

    pub fn parse_coeff(&self, s: &str) -> Result<Coeff, RingError> {
        let t = s.trim();
        let q: BigRational = if let Some((a, b)) = t.split_once('/') {
            let n: BigInt = a.trim().parse().map_err(|_| RingError::BadCoefficient(s.into()))?;
            let d: BigInt = b.trim().parse().map_err(|_| RingError::BadCoefficient(s.into()))?;
            if d.is_zero() {
                return Err(RingError::BadCoefficient(s.into()));
            }
            BigRational::new(n, d)
        } else {
            let n: BigInt = t.parse().map_err(|_| RingError::BadCoefficient(s.into()))?;
            BigRational::from_integer(n)
        };
        self.from_rational(&q)
    }

    pub fn add(&self, a: &Coeff, b: &Coeff) -> Coeff {
        match (self, a, b) {
            (CoefficientRing::PrimeField(p), Coeff::Mod(x), Coeff::Mod(y)) => {
                Coeff::Mod((x + y) % (*p as u64))
            }
            (_, Coeff::Rat(x), Coeff::Rat(y)) => Coeff::Rat(x + y),
            _ => panic!("coefficient does not belong to this ring"),
        }
    }

    pub fn sub(&self, a: &Coeff, b: &Coeff) -> Coeff {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &Coeff) -> Coeff {
        match (self, a) {
            (CoefficientRing::PrimeField(p), Coeff::Mod(x)) => {
                let p = *p as u64;
                Coeff::Mod(if *x == 0 { 0 } else { p - x })
            }
            (_, Coeff::Rat(x)) => Coeff::Rat(-x),
            _ => panic!("coefficient does not belong to this ring"),
        }
    }

    pub fn mul(&self, a: &Coeff, b: &Coeff) -> Coeff {
        match (self, a, b) {
            (CoefficientRing::PrimeField(p), Coeff::Mod(x), Coeff::Mod(y)) => {
                Coeff::Mod(mod_mul(*x, *y, *p as u64))
            }
            (_, Coeff::Rat(x), Coeff::Rat(y)) => Coeff::Rat(x * y),
            _ => panic!("coefficient does not belong to this ring"),
        }
    }

    pub fn is_unit(&self, a: &Coeff) -> bool {
        match (self, a) {
            (CoefficientRing::PrimeField(_), Coeff::Mod(x)) => *x != 0,
            (CoefficientRing::Rationals, Coeff::Rat(x)) => !x.is_zero(),
            (CoefficientRing::Integers, Coeff::Rat(x)) => {
                x.is_integer() && x.numer().abs().is_one()
            }
            (CoefficientRing::LocalizedIntegers(m), Coeff::Rat(x)) => {
                !x.is_zero() && denominator_divides_power(x.numer(), *m)
            }
            _ => panic!("coefficient does not belong to this ring"),
        }
    }

    /// Multiplicative inverse, if `a` is a unit of the ring.
    pub fn inv(&self, a: &Coeff) -> Option<Coeff> {
        if !self.is_unit(a) {
            return None;
        }
        match (self, a) {
            (CoefficientRing::PrimeField(p), Coeff::Mod(x)) => {
                Some(Coeff::Mod(mod_inv(*x, *p as u64)))
            }
            (_, Coeff::Rat(x)) => Some(Coeff::Rat(x.recip())),
            _ => unreachable!(),
        }
    }

    /// Pivot preference weight: smaller is better. Keeps rational
    /// elimination from blowing up coefficient sizes.
    fn pivot_weight(&self, a: &Coeff) -> u64 {
        match a {
            Coeff::Mod(_) => 0,
            Coeff::Rat(x) => x.numer().magnitude().bits() + x.denom().magnitude().bits(),
        }
    }
}

impl fmt::Display for CoefficientRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CoefficientRing::Rationals => write!(f, "Q"),
            CoefficientRing::PrimeField(p) => write!(f, "F{}", p),
            CoefficientRing::Integers => write!(f, "Z"),
            CoefficientRing::LocalizedIntegers(m) => write!(f, "Z[1/{}]", m),
        }
    }
}

/// A scalar. `Rat` backs Q, Z and Z[1/m]; `Mod` backs F_p with the value
/// reduced into `0..p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coeff {
    Rat(BigRational),
    Mod(u64),
}

impl Coeff {
    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Rat(x) => x.is_zero(),
            Coeff::Mod(x) => *x == 0,
        }
    }

    /// The underlying rational, when this scalar is not a prime-field value.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Coeff::Rat(x) => Some(x),
            Coeff::Mod(_) => None,
        }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Rat(x) => write!(f, "{}", x),
            Coeff::Mod(x) => write!(f, "{}", x),
        }
    }
}

impl Serialize for Coeff {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn denominator_divides_power(d: &BigInt, m: u32) -> bool {
    let mut d = d.abs();
    let m = BigInt::from(m);
    loop {
        let g = d.gcd(&m);
        if g.is_one() {
            return d.is_one();
        }
        d /= g;
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2u64;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

fn mod_mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // extended Euclid; a != 0 mod p, p prime
    let (mut t, mut new_t): (i128, i128) = (0, 1);
    let (mut r, mut new_r): (i128, i128) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert!(r == 1, "not invertible");
    t.rem_euclid(p as i128) as u64
}

/// Sparse exact matrix; absent entries are zero.
#[derive(Debug, Clone)]
pub struct ExactMatrix {
    pub rows: usize,
    pub cols: usize,
    ring: CoefficientRing,
    entries: BTreeMap<(usize, usize), Coeff>,
}

#[derive(Debug, Clone)]
pub struct RankKernel {
    pub rank: usize,
    /// Canonical kernel basis (one vector per free column of the reduced
    /// echelon form, in column order).
    pub kernel: Vec<Vec<Coeff>>,
}

impl ExactMatrix {
    pub fn new(ring: CoefficientRing, rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            ring,
            entries: BTreeMap::new(),
        }
    }

    pub fn ring(&self) -> CoefficientRing {
        self.ring
    }

    pub fn set(&mut self, r: usize, c: usize, v: Coeff) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Coeff {
        self.entries
            .get(&(r, c))
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    pub fn from_dense(ring: CoefficientRing, data: &[Vec<i64>]) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        let mut m = ExactMatrix::new(ring, rows, cols);
        for (i, row) in data.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, ring.from_i64(*v));
            }
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Coeff)> {
        self.entries.iter()
    }

    fn sparse_rows(&self) -> Vec<BTreeMap<usize, Coeff>> {
        let mut rows = vec![BTreeMap::new(); self.rows];
        for ((r, c), v) in &self.entries {
            rows[*r].insert(*c, v.clone());
        }
        rows
    }

    /// Rank and canonical kernel basis over a field.
    pub fn rank_and_kernel(&self) -> Result<RankKernel, RingError> {
        if !self.ring.is_field() {
            return Err(RingError::FieldRequired);
        }
        let rref = rref(self.ring, self.sparse_rows(), self.cols);
        let rank = rref.pivots.len();
        let pivot_of_col: BTreeMap<usize, usize> = rref
            .pivots
            .iter()
            .enumerate()
            .map(|(i, c)| (*c, i))
            .collect();
        let mut kernel = Vec::new();
        for j in 0..self.cols {
            if pivot_of_col.contains_key(&j) {
                continue;
            }
            let mut v = vec![self.ring.zero(); self.cols];
            v[j] = self.ring.one();
            for (i, pc) in rref.pivots.iter().enumerate() {
                if let Some(x) = rref.rows[i].get(&j) {
                    v[*pc] = self.ring.neg(x);
                }
            }
            kernel.push(v);
        }
        Ok(RankKernel { rank, kernel })
    }

    /// Rank only (field).
    pub fn rank(&self) -> Result<usize, RingError> {
        if !self.ring.is_field() {
            return Err(RingError::FieldRequired);
        }
        Ok(rref(self.ring, self.sparse_rows(), self.cols).pivots.len())
    }

    /// Solve `self * x = b` for each right-hand side over a field. Returns
    /// `None` entries for inconsistent systems; free variables are set to 0.
    pub fn solve_columns(&self, rhs: &[Vec<Coeff>]) -> Result<Vec<Option<Vec<Coeff>>>, RingError> {
        if !self.ring.is_field() {
            return Err(RingError::FieldRequired);
        }
        let k = rhs.len();
        let mut rows = self.sparse_rows();
        for (r, row) in rows.iter_mut().enumerate() {
            for (j, b) in rhs.iter().enumerate() {
                assert_eq!(b.len(), self.rows, "rhs length mismatch");
                if !b[r].is_zero() {
                    row.insert(self.cols + j, b[r].clone());
                }
            }
        }
        // eliminate only on the first `cols` columns
        let rref = rref_bounded(self.ring, rows, self.cols, self.cols + k);
        let mut out = Vec::with_capacity(k);
        for j in 0..k {
            let col = self.cols + j;
            // inconsistent iff some zero-prefix row has a nonzero entry here
            let mut bad = false;
            for (i, row) in rref.rows.iter().enumerate() {
                if i >= rref.pivots.len() && row.get(&col).map_or(false, |v| !v.is_zero()) {
                    bad = true;
                }
            }
            if bad {
                out.push(None);
                continue;
            }
            let mut x = vec![self.ring.zero(); self.cols];
            for (i, pc) in rref.pivots.iter().enumerate() {
                if let Some(v) = rref.rows[i].get(&col) {
                    x[*pc] = v.clone();
                }
            }
            out.push(Some(x));
        }
        Ok(out)
    }

    /// Smith normal form over Z. Entries must be integers.
    pub fn smith_normal_form(&self) -> Result<SmithForm, RingError> {
        if self.ring.is_field() {
            return Err(RingError::IntegersRequired);
        }
        let mut a = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for ((r, c), v) in &self.entries {
            let q = v.as_rational().ok_or(RingError::IntegersRequired)?;
            if !q.is_integer() {
                return Err(RingError::IntegersRequired);
            }
            a[*r][*c] = q.numer().clone();
        }
        Ok(smith(a, self.rows, self.cols))
    }
}

struct Rref {
    rows: Vec<BTreeMap<usize, Coeff>>,
    pivots: Vec<usize>, // pivot column of row i, strictly increasing
}

fn rref(ring: CoefficientRing, rows: Vec<BTreeMap<usize, Coeff>>, cols: usize) -> Rref {
    rref_bounded(ring, rows, cols, cols)
}

/// Reduced row echelon form, pivoting only in columns `< pivot_cols` but
/// carrying all `cols` columns along. Pivot choice: smallest weight entry
/// in the leftmost unfinished column.
fn rref_bounded(
    ring: CoefficientRing,
    mut rows: Vec<BTreeMap<usize, Coeff>>,
    pivot_cols: usize,
    _cols: usize,
) -> Rref {
    let n = rows.len();
    let mut pivots = Vec::new();
    let mut done_rows = 0usize;
    for col in 0..pivot_cols {
        // find best pivot among rows[done_rows..]
        let mut best: Option<(usize, u64)> = None;
        for (i, row) in rows.iter().enumerate().skip(done_rows) {
            if let Some(v) = row.get(&col) {
                if v.is_zero() {
                    continue;
                }
                let w = ring.pivot_weight(v);
                if best.map_or(true, |(_, bw)| w < bw) {
                    best = Some((i, w));
                }
            }
        }
        let Some((pi, _)) = best else { continue };
        rows.swap(done_rows, pi);
        // normalize pivot row
        let inv = ring.inv(&rows[done_rows][&col]).expect("pivot is a unit");
        if ring.one() != rows[done_rows][&col] {
            let row = std::mem::take(&mut rows[done_rows]);
            rows[done_rows] = row
                .into_iter()
                .map(|(c, v)| (c, ring.mul(&v, &inv)))
                .collect();
        }
        // eliminate everywhere else
        let pivot_row = rows[done_rows].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == done_rows {
                continue;
            }
            let Some(f) = row.get(&col).cloned() else {
                continue;
            };
            if f.is_zero() {
                continue;
            }
            for (c, v) in &pivot_row {
                let delta = ring.mul(&f, v);
                let cur = row.get(c).cloned().unwrap_or_else(|| ring.zero());
                let nv = ring.sub(&cur, &delta);
                if nv.is_zero() {
                    row.remove(c);
                } else {
                    row.insert(*c, nv);
                }
            }
        }
        pivots.push(col);
        done_rows += 1;
        if done_rows == n {
            break;
        }
    }
    Rref { rows, pivots }
}

/// Incremental reduced echelon span over a field. Rows are kept fully
/// reduced against each other with unit pivots, so reduction against the
/// span is canonical.
#[derive(Debug, Clone)]
pub struct Echelon {
    ring: CoefficientRing,
    rows: Vec<BTreeMap<usize, Coeff>>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(ring: CoefficientRing) -> Self {
        assert!(ring.is_field(), "echelon spans require a field");
        Echelon {
            ring,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn vec_to_map(v: &[Coeff]) -> BTreeMap<usize, Coeff> {
        v.iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, x)| (i, x.clone()))
            .collect()
    }

    /// Reduce `v` against the span; the result has no support on pivot
    /// columns.
    pub fn reduce(&self, v: &[Coeff]) -> BTreeMap<usize, Coeff> {
        let mut w = Self::vec_to_map(v);
        self.reduce_map(&mut w);
        w
    }

    fn reduce_map(&self, w: &mut BTreeMap<usize, Coeff>) {
        for (i, p) in self.pivots.iter().enumerate() {
            let Some(f) = w.get(p).cloned() else { continue };
            for (c, v) in &self.rows[i] {
                let delta = self.ring.mul(&f, v);
                let cur = w.get(c).cloned().unwrap_or_else(|| self.ring.zero());
                let nv = self.ring.sub(&cur, &delta);
                if nv.is_zero() {
                    w.remove(c);
                } else {
                    w.insert(*c, nv);
                }
            }
        }
    }

    /// Insert a vector; returns true if it enlarged the span.
    pub fn insert(&mut self, v: &[Coeff]) -> bool {
        self.insert_map(Self::vec_to_map(v)).is_some()
    }

    /// Insert a sparse vector; returns the new pivot column if independent.
    pub fn insert_map(&mut self, mut w: BTreeMap<usize, Coeff>) -> Option<usize> {
        self.reduce_map(&mut w);
        let (&pivot, pv) = w.iter().next()?;
        let inv = self.ring.inv(pv).expect("leading entry is a unit");
        let w: BTreeMap<usize, Coeff> = w
            .iter()
            .map(|(c, v)| (*c, self.ring.mul(v, &inv)))
            .collect();
        // back-eliminate the new pivot from existing rows
        for row in self.rows.iter_mut() {
            let Some(f) = row.get(&pivot).cloned() else {
                continue;
            };
            for (c, v) in &w {
                let delta = self.ring.mul(&f, v);
                let cur = row.get(c).cloned().unwrap_or_else(|| self.ring.zero());
                let nv = self.ring.sub(&cur, &delta);
                if nv.is_zero() {
                    row.remove(c);
                } else {
                    row.insert(*c, nv);
                }
            }
        }
        // keep rows sorted by pivot column
        let at = self.pivots.partition_point(|p| *p < pivot);
        self.pivots.insert(at, pivot);
        self.rows.insert(at, w);
        Some(pivot)
    }

    pub fn contains(&self, v: &[Coeff]) -> bool {
        self.reduce(v).is_empty()
    }
}

/// Smith normal form `s = u * m * v` with unimodular transforms and their
/// inverses, so `m = u_inv * s * v_inv`. Invariant factors are nonnegative
/// and each divides the next.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub invariants: Vec<BigInt>,
    pub u: Vec<Vec<BigInt>>,
    pub u_inv: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
    pub v_inv: Vec<Vec<BigInt>>,
    pub rows: usize,
    pub cols: usize,
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // nearest integer to a/b, ties toward zero
    let (q, r) = a.div_rem(b);
    if (&r * BigInt::from(2)).abs() > b.abs() {
        if r.sign() == b.sign() {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

impl SmithForm {
    /// Smith form of a dense integer matrix given with explicit dimensions
    /// (so empty matrices keep their shape).
    pub fn of_matrix(a: Vec<Vec<BigInt>>, rows: usize, cols: usize) -> SmithForm {
        debug_assert_eq!(a.len(), rows);
        debug_assert!(a.iter().all(|r| r.len() == cols));
        smith(a, rows, cols)
    }
}

fn smith(mut a: Vec<Vec<BigInt>>, rows: usize, cols: usize) -> SmithForm {
    let mut u = identity(rows);
    let mut u_inv = identity(rows);
    let mut v = identity(cols);
    let mut v_inv = identity(cols);

    // row_i -= q * row_t
    macro_rules! row_sub {
        ($i:expr, $t:expr, $q:expr) => {{
            let (i, t, q) = ($i, $t, &$q);
            for j in 0..cols {
                let d = &a[t][j] * q;
                a[i][j] -= d;
            }
            for j in 0..rows {
                let d = &u[t][j] * q;
                u[i][j] -= d;
                let d2 = &u_inv[j][i] * q;
                u_inv[j][t] += d2;
            }
        }};
    }
    macro_rules! col_sub {
        ($j:expr, $t:expr, $q:expr) => {{
            let (j, t, q) = ($j, $t, &$q);
            for i in 0..rows {
                let d = &a[i][t] * q;
                a[i][j] -= d;
            }
            for i in 0..cols {
                let d = &v[i][t] * q;
                v[i][j] -= d;
                let d2 = &v_inv[j][i] * q;
                v_inv[t][i] += d2;
            }
        }};
    }

    let mut t = 0usize;
    while t < rows.min(cols) {
        // locate smallest nonzero entry in the trailing submatrix
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero()
                    && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        if bi != t {
            a.swap(bi, t);
            u.swap(bi, t);
            for r in u_inv.iter_mut() {
                r.swap(bi, t);
            }
        }
        if bj != t {
            for r in a.iter_mut() {
                r.swap(bj, t);
            }
            for r in v.iter_mut() {
                r.swap(bj, t);
            }
            v_inv.swap(bj, t);
        }
        // clear column t
        let mut dirty = false;
        for i in t + 1..rows {
            if !a[i][t].is_zero() {
                let q = div_round(&a[i][t], &a[t][t]);
                if !q.is_zero() {
                    row_sub!(i, t, q);
                }
                if !a[i][t].is_zero() {
                    dirty = true;
                }
            }
        }
        if dirty {
            continue;
        }
        for j in t + 1..cols {
            if !a[t][j].is_zero() {
                let q = div_round(&a[t][j], &a[t][t]);
                if !q.is_zero() {
                    col_sub!(j, t, q);
                }
                if !a[t][j].is_zero() {
                    dirty = true;
                }
            }
        }
        if dirty {
            continue;
        }
        // pivot must divide the whole trailing submatrix
        let mut fix: Option<usize> = None;
        'scan: for i in t + 1..rows {
            for j in t + 1..cols {
                if !(&a[i][j] % &a[t][t]).is_zero() {
                    fix = Some(i);
                    break 'scan;
                }
            }
        }
        if let Some(i) = fix {
            // fold row i into row t and restart this pivot
            let q = BigInt::from(-1);
            row_sub!(t, i, q);
            continue;
        }
        if a[t][t].sign() == num_bigint::Sign::Minus {
            for j in 0..cols {
                a[t][j] = -std::mem::take(&mut a[t][j]);
            }
            for j in 0..rows {
                u[t][j] = -std::mem::take(&mut u[t][j]);
                u_inv[j][t] = -std::mem::take(&mut u_inv[j][t]);
            }
        }
        t += 1;
    }
    let mut invariants = Vec::new();
    for k in 0..rows.min(cols) {
        if a[k][k].is_zero() {
            break;
        }
        invariants.push(a[k][k].clone());
    }
    SmithForm {
        invariants,
        u,
        u_inv,
        v,
        v_inv,
        rows,
        cols,
    }
}

/// Dense BigInt matrix product, for transform verification and for the
/// integral cohomology path.
pub fn bigint_mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let k = if n == 0 { 0 } else { a[0].len() };
    let m = if b.is_empty() { 0 } else { b[0].len() };
    assert!(b.len() == k, "shape mismatch");
    let mut out = vec![vec![BigInt::zero(); m]; n];
    for i in 0..n {
        for (l, bl) in b.iter().enumerate() {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                if !bl[j].is_zero() {
                    let d = &a[i][l] * &bl[j];
                    out[i][j] += d;
                }
            }
        }
    }
    out
}
