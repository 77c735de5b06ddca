//! Differential Tor over a polynomial algebra, two ways: the Koszul
//! complex M ⊗ Λ[z_j] ⊗ N (small, the default) and the two-sided bar
//! complex (independent oracle). Both produce a table bigraded by
//! resolution degree p ≤ 0 and internal degree q, with total degree
//! n = p + q.
//!
//! Conventions: in the Koszul path p is minus the exterior word count;
//! in the bar path p is minus the bar word length and the internal
//! degree of m[a_1|..|a_p]n is |m| + Σ|a_i| + |n|. Both differentials
//! raise p by one and preserve q, so each q-slice is an independent
//! complex.

use crate::cdga::{Cdga, CdgaError};
use crate::gca::{FreeCga, GcaError, GeneratorSpec, GradedElement, Monomial, Sort};
use crate::models::Model;
use crate::ring::{Coeff, CoefficientRing, ExactMatrix, RingError};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum TorError {
    #[error("non-homogeneous structure maps")]
    StructureMap,
    #[error("bar complex not finite per degree")]
    BarNotFinite,
    #[error("Tor tables require field coefficients")]
    FieldRequired,
    #[error("Koszul path requires a polynomial algebra on even generators")]
    NotPolynomial,
    #[error("module is not an algebra over the given ring")]
    RingMismatch,
    #[error(transparent)]
    Gca(#[from] GcaError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Cdga(#[from] CdgaError),
}

/// A module given as a graded-commutative algebra together with the
/// images of the base algebra's generators (the structure map).
#[derive(Debug, Clone)]
pub struct TorModule {
    pub algebra: FreeCga,
    pub images: Vec<GradedElement>,
}

impl TorModule {
    pub fn new(
        base: &FreeCga,
        algebra: FreeCga,
        images: Vec<GradedElement>,
    ) -> Result<Self, TorError> {
        if algebra.ring() != base.ring() {
            return Err(TorError::RingMismatch);
        }
        if images.len() != base.n_gens() {
            return Err(TorError::StructureMap);
        }
        for (g, im) in base.generators().iter().zip(&images) {
            if !im.is_zero() && im.homogeneous_degree() != Some(g.degree) {
                return Err(TorError::StructureMap);
            }
        }
        Ok(TorModule { algebra, images })
    }

    /// The ground field as a module via the augmentation.
    pub fn scalar(base: &FreeCga) -> Self {
        let algebra = FreeCga::new(base.ring(), vec![]).expect("scalar algebra");
        let images = vec![algebra.zero(); base.n_gens()];
        TorModule { algebra, images }
    }
}

/// Bigraded dimension table of a differential Tor computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorTable {
    /// (p, q) -> dim, nonzero entries only, p ≤ 0 ≤ q
    pub entries: BTreeMap<(i64, i64), usize>,
    /// dims by total degree n = p + q, indexed 0..=cap
    pub total_dims: Vec<usize>,
    pub cap: usize,
}

impl TorTable {
    fn from_entries(entries: BTreeMap<(i64, i64), usize>, cap: usize) -> TorTable {
        let mut total = vec![0usize; cap + 1];
        for (&(p, q), &d) in &entries {
            let n = p + q;
            debug_assert!(0 <= n && n as usize <= cap);
            total[n as usize] += d;
        }
        TorTable {
            entries,
            total_dims: total,
            cap,
        }
    }

    pub fn dim(&self, p: i64, q: i64) -> usize {
        self.entries.get(&(p, q)).copied().unwrap_or(0)
    }

    /// Least resolution degree with a nonzero entry (0 when empty).
    pub fn min_p(&self) -> i64 {
        self.entries.keys().map(|&(p, _)| p).min().unwrap_or(0)
    }

    /// True when every nonzero entry sits in resolution degree 0.
    pub fn concentrated_in_p_zero(&self) -> bool {
        self.entries.keys().all(|&(p, _)| p == 0)
    }

    /// Second-quadrant text rendering: p increases left to right toward 0,
    /// q increases upward.
    pub fn to_text_grid(&self) -> String {
        if self.entries.is_empty() {
            return String::from("(empty table)\n");
        }
        let p_min = self.min_p();
        let q_max = self.entries.keys().map(|&(_, q)| q).max().unwrap_or(0);
        let mut out = String::new();
        let width = 4;
        for q in (0..=q_max).rev() {
            out.push_str(&format!("q={:<3} |", q));
            for p in p_min..=0 {
                let d = self.dim(p, q);
                if d == 0 {
                    out.push_str(&format!("{:>width$}", ".", width = width));
                } else {
                    out.push_str(&format!("{:>width$}", d, width = width));
                }
            }
            out.push('\n');
        }
        out.push_str(&format!("{:6} +", ""));
        for _ in p_min..=0 {
            out.push_str(&"-".repeat(width));
        }
        out.push('\n');
        out.push_str(&format!("{:7}", ""));
        for p in p_min..=0 {
            out.push_str(&format!("{:>width$}", p, width = width));
        }
        out.push_str("  (p)\n");
        out
    }
}

impl Serialize for TorTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        struct Entry {
            p: i64,
            q: i64,
            dim: usize,
        }
        let entries: Vec<Entry> = self
            .entries
            .iter()
            .map(|(&(p, q), &dim)| Entry { p, q, dim })
            .collect();
        let mut st = s.serialize_struct("TorTable", 3)?;
        st.serialize_field("cap", &self.cap)?;
        st.serialize_field("entries", &entries)?;
        st.serialize_field("total_dims", &self.total_dims)?;
        st.end()
    }
}

/// Result of the Koszul-complex computation: the table plus the complex
/// itself (its cohomology carries the product).
#[derive(Debug)]
pub struct KoszulTor {
    pub table: TorTable,
    pub complex: Cdga,
    /// exterior generator count (the Koszul width)
    pub width: usize,
}

/// Rank ladder shared by both paths: given per-word-count bases of one
/// q-slice and the differential (lowering the word count by one),
/// return dims of homology per word count.
fn ladder_dims<T, F>(
    ring: CoefficientRing,
    slices: &BTreeMap<usize, Vec<T>>,
    apply_d: F,
) -> Result<BTreeMap<usize, usize>, TorError>
where
    T: Ord + Clone,
    F: Fn(&T) -> Vec<(T, Coeff)>,
{
    let max_w = slices.keys().max().copied().unwrap_or(0);
    let mut ranks: BTreeMap<usize, usize> = BTreeMap::new();
    for w in 1..=max_w {
        let Some(source) = slices.get(&w) else {
            continue;
        };
        let empty = Vec::new();
        let target = slices.get(&(w - 1)).unwrap_or(&empty);
        let index: BTreeMap<&T, usize> = target.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut mat = ExactMatrix::new(ring, target.len(), source.len());
        for (j, el) in source.iter().enumerate() {
            for (t, c) in apply_d(el) {
                if c.is_zero() {
                    continue;
                }
                let i = *index
                    .get(&t)
                    .expect("differential leaves the enumerated slice");
                let prev = mat.get(i, j);
                mat.set(i, j, ring.add(&prev, &c));
            }
        }
        ranks.insert(w, mat.rank()?);
    }
    let mut dims = BTreeMap::new();
    for (&w, basis) in slices {
        let r_out = ranks.get(&w).copied().unwrap_or(0);
        let r_in = ranks.get(&(w + 1)).copied().unwrap_or(0);
        let d = basis.len() - r_out - r_in;
        if d > 0 {
            dims.insert(w, d);
        }
    }
    Ok(dims)
}

/// Differential Tor_A(M, N) through total degree `cap` via the Koszul
/// complex M ⊗ Λ[z_j] ⊗ N, dz_j = 1 ⊗ ν(x_j) − μ(x_j) ⊗ 1.
pub fn koszul_tor(
    a: &FreeCga,
    m: &TorModule,
    n: &TorModule,
    cap: usize,
) -> Result<KoszulTor, TorError> {
    if !a.ring().is_field() {
        return Err(TorError::FieldRequired);
    }
    if a.generators()
        .iter()
        .any(|g| g.sort != Sort::Polynomial || g.degree % 2 != 0)
    {
        return Err(TorError::NotPolynomial);
    }
    validate_module(a, m)?;
    validate_module(a, n)?;

    // combined algebra: M gens, N gens, exterior z's
    let mut taken: BTreeMap<String, usize> = BTreeMap::new();
    let mut gens: Vec<GeneratorSpec> = Vec::new();
    for spec in m.algebra.generators().iter().chain(n.algebra.generators()) {
        let mut name = spec.name.clone();
        let seen = taken.entry(spec.name.clone()).or_insert(0);
        for _ in 0..*seen {
            name.push('\'');
        }
        *seen += 1;
        gens.push(GeneratorSpec {
            name,
            degree: spec.degree,
            sort: spec.sort,
        });
    }
    let m_count = m.algebra.n_gens();
    let base_count = gens.len();
    for g in a.generators() {
        let mut name = format!("z{}", g.degree - 1);
        let seen = taken.entry(name.clone()).or_insert(0);
        for _ in 0..*seen {
            name.push('\'');
        }
        *seen += 1;
        gens.push(GeneratorSpec::exterior(&name, g.degree - 1));
    }
    let width = a.n_gens();
    let combined = FreeCga::new(a.ring(), gens)?;
    let m_into: Vec<GradedElement> = (0..m_count).map(|i| combined.generator(i)).collect();
    let n_into: Vec<GradedElement> = (0..n.algebra.n_gens())
        .map(|i| combined.generator(m_count + i))
        .collect();
    let mut diffs = vec![combined.zero(); base_count];
    for j in 0..width {
        let nu = n
            .algebra
            .substitute_unchecked(&n.images[j], &combined, &n_into)?;
        let mu = m
            .algebra
            .substitute_unchecked(&m.images[j], &combined, &m_into)?;
        diffs.push(nu.sub(&mu));
    }
    let cdga = Cdga::new(combined.clone(), diffs)?;

    // bucket monomials by (q, word count)
    let mut slices: BTreeMap<i64, BTreeMap<usize, Vec<Monomial>>> = BTreeMap::new();
    for total in 0..=(cap + width) {
        for mono in combined.basis_of_degree(total) {
            let w = combined.exterior_weight(&mono);
            let q = (total + w) as i64;
            if q <= (cap + width) as i64 {
                slices.entry(q).or_default().entry(w).or_default().push(mono);
            }
        }
    }

    let ring = a.ring();
    let per_q: Vec<(i64, BTreeMap<usize, usize>)> = slices
        .par_iter()
        .map(|(&q, by_w)| {
            let dims = ladder_dims(ring, by_w, |mono| {
                let el = combined.monomial_element(mono.clone(), ring.one());
                cdga.d(&el)
                    .terms()
                    .map(|(t, c)| (t.clone(), c.clone()))
                    .collect()
            })?;
            Ok((q, dims))
        })
        .collect::<Result<_, TorError>>()?;

    let mut entries = BTreeMap::new();
    for (q, dims) in per_q {
        for (w, d) in dims {
            let p = -(w as i64);
            if p + q >= 0 && (p + q) as usize <= cap {
                entries.insert((p, q), d);
            }
        }
    }
    Ok(KoszulTor {
        table: TorTable::from_entries(entries, cap),
        complex: cdga,
        width,
    })
}

/// The Koszul Tor of a built model: Tor_{H(BG)}(H(BH), H(BK)).
pub fn koszul_tor_of_model(model: &Model, cap: usize) -> Result<KoszulTor, TorError> {
    if !model.cdga.ring().is_field() {
        return Err(TorError::FieldRequired);
    }
    // reuse the model's own complex; regrade by exterior weight
    let combined = model.cdga.algebra().clone();
    let width = combined.n_gens() - model.base_gens;
    let ring = combined.ring();
    let mut slices: BTreeMap<i64, BTreeMap<usize, Vec<Monomial>>> = BTreeMap::new();
    for total in 0..=(cap + width) {
        for mono in combined.basis_of_degree(total) {
            let w = combined.exterior_weight(&mono);
            let q = (total + w) as i64;
            if q <= (cap + width) as i64 {
                slices.entry(q).or_default().entry(w).or_default().push(mono);
            }
        }
    }
    let per_q: Vec<(i64, BTreeMap<usize, usize>)> = slices
        .par_iter()
        .map(|(&q, by_w)| {
            let dims = ladder_dims(ring, by_w, |mono| {
                let el = combined.monomial_element(mono.clone(), ring.one());
                model
                    .cdga
                    .d(&el)
                    .terms()
                    .map(|(t, c)| (t.clone(), c.clone()))
                    .collect()
            })?;
            Ok((q, dims))
        })
        .collect::<Result<_, TorError>>()?;
    let mut entries = BTreeMap::new();
    for (q, dims) in per_q {
        for (w, d) in dims {
            let p = -(w as i64);
            if p + q >= 0 && (p + q) as usize <= cap {
                entries.insert((p, q), d);
            }
        }
    }
    Ok(KoszulTor {
        table: TorTable::from_entries(entries, cap),
        complex: model.cdga.clone(),
        width,
    })
}

fn validate_module(a: &FreeCga, m: &TorModule) -> Result<(), TorError> {
    if m.algebra.ring() != a.ring() {
        return Err(TorError::RingMismatch);
    }
    if m.images.len() != a.n_gens() {
        return Err(TorError::StructureMap);
    }
    for (g, im) in a.generators().iter().zip(&m.images) {
        if !im.is_zero() && im.homogeneous_degree() != Some(g.degree) {
            return Err(TorError::StructureMap);
        }
    }
    Ok(())
}

/// An element of the two-sided bar complex: m [a_1 | .. | a_p] n with
/// m, n basis monomials of the modules and a_i basis monomials of Ā.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct BarElem {
    m: Monomial,
    word: Vec<Monomial>,
    n: Monomial,
}

/// Differential Tor via the two-sided bar complex, bigraded by bar word
/// length. `word_cap` is required when Ā has degree-1 elements.
pub fn bar_tor(
    a: &FreeCga,
    m: &TorModule,
    n: &TorModule,
    cap: usize,
    word_cap: Option<usize>,
) -> Result<TorTable, TorError> {
    let ring = a.ring();
    if !ring.is_field() {
        return Err(TorError::FieldRequired);
    }
    validate_module(a, m)?;
    validate_module(a, n)?;
    let has_degree_one = a.generators().iter().any(|g| g.degree == 1);
    if has_degree_one && word_cap.is_none() {
        return Err(TorError::BarNotFinite);
    }
    // maximal word length: a letter of degree d >= 2 costs d - 1 >= 1 of
    // total degree, so untouched entries need at most cap/(min-1) letters;
    // degree-1 letters cost nothing and require the explicit cap
    let min_letter = a
        .generators()
        .iter()
        .map(|g| g.degree)
        .min()
        .unwrap_or(usize::MAX);
    let wmax = if min_letter == usize::MAX {
        0
    } else if min_letter >= 2 {
        let by_total = cap / (min_letter - 1);
        word_cap.map_or(by_total, |w| w.min(by_total))
    } else {
        word_cap.unwrap()
    };
    let qmax = cap + wmax;
    // letters: nonunit basis monomials of A, by degree; a single letter
    // can carry a whole slice's degree
    let max_letter_deg = qmax;
    let mut letters_by_degree: Vec<Vec<Monomial>> = vec![Vec::new(); max_letter_deg + 1];
    for (d, slot) in letters_by_degree.iter_mut().enumerate().skip(1) {
        *slot = a.basis_of_degree(d);
    }

    // enumerate q-slices
    let mut slices: BTreeMap<i64, BTreeMap<usize, Vec<BarElem>>> = BTreeMap::new();
    let mut words_of: Vec<Vec<Vec<Monomial>>> = vec![Vec::new(); qmax + 1];
    words_of[0].push(Vec::new());
    for q in 1..=qmax {
        let mut acc: Vec<Vec<Monomial>> = Vec::new();
        for d in 1..=q.min(max_letter_deg) {
            for letter in &letters_by_degree[d] {
                for tail in &words_of[q - d] {
                    if tail.len() + 1 > wmax {
                        continue;
                    }
                    let mut w = Vec::with_capacity(tail.len() + 1);
                    w.push(letter.clone());
                    w.extend(tail.iter().cloned());
                    acc.push(w);
                }
            }
        }
        words_of[q] = acc;
    }
    for q in 0..=qmax {
        for dm in 0..=q {
            let m_basis = m.algebra.basis_of_degree(dm);
            if m_basis.is_empty() {
                continue;
            }
            for dw in 0..=(q - dm) {
                let dn = q - dm - dw;
                let n_basis = n.algebra.basis_of_degree(dn);
                if n_basis.is_empty() {
                    continue;
                }
                for word in &words_of[dw] {
                    if dw == 0 && !word.is_empty() {
                        continue;
                    }
                    let wlen = word.len();
                    // keep the slice complete for every q we touch
                    for mb in &m_basis {
                        for nb in &n_basis {
                            slices
                                .entry(q as i64)
                                .or_default()
                                .entry(wlen)
                                .or_default()
                                .push(BarElem {
                                    m: mb.clone(),
                                    word: word.clone(),
                                    n: nb.clone(),
                                });
                        }
                    }
                }
            }
        }
    }

    let per_q: Vec<(i64, BTreeMap<usize, usize>)> = slices
        .par_iter()
        .map(|(&q, by_w)| {
            let dims = ladder_dims(ring, by_w, |el| bar_differential(a, m, n, el))?;
            Ok((q, dims))
        })
        .collect::<Result<_, TorError>>()?;

    let mut entries = BTreeMap::new();
    for (q, dims) in per_q {
        for (w, d) in dims {
            let p = -(w as i64);
            if p + q >= 0 && (p + q) as usize <= cap {
                entries.insert((p, q), d);
            }
        }
    }
    Ok(TorTable::from_entries(entries, cap))
}

/// The two-sided bar differential on a basis element, as a list of
/// (basis element, coefficient) pairs. Signs follow the suspension
/// convention with sign exponent |m| + Σ_{j≤i}(|a_j| − 1) before slot i,
/// verified square-zero by tests.
fn bar_differential(
    a: &FreeCga,
    m: &TorModule,
    n: &TorModule,
    el: &BarElem,
) -> Vec<(BarElem, Coeff)> {
    let ring = a.ring();
    let p = el.word.len();
    if p == 0 {
        return Vec::new();
    }
    let mut out: Vec<(BarElem, Coeff)> = Vec::new();
    let deg_m = m.algebra.monomial_degree(&el.m);
    let mut push = |e: BarElem, c: Coeff| {
        if !c.is_zero() {
            out.push((e, c));
        }
    };
    let sign = |exp: usize| -> Coeff {
        if exp % 2 == 0 {
            ring.one()
        } else {
            ring.from_i64(-1)
        }
    };
    // suspension degrees prefix: eps[i] = sum_{j<i} (|a_j| - 1)
    let mut eps = vec![0usize; p + 1];
    for (j, letter) in el.word.iter().enumerate() {
        eps[j + 1] = eps[j] + (a.monomial_degree(letter) - 1);
    }

    // left action: move a_1 into M through the structure map
    {
        let letter_el = a.monomial_element(el.word[0].clone(), ring.one());
        let mu = a
            .substitute_unchecked(&letter_el, &m.algebra, &m.images)
            .expect("structure map evaluation");
        let m_el = m.algebra.monomial_element(el.m.clone(), ring.one());
        let prod = m_el.mul(&mu);
        let s = sign(deg_m);
        for (mono, c) in prod.terms() {
            push(
                BarElem {
                    m: mono.clone(),
                    word: el.word[1..].to_vec(),
                    n: el.n.clone(),
                },
                ring.mul(&s, c),
            );
        }
    }
    // interior deletions: merge letters i and i+1 inside A
    for i in 1..p {
        if let Some((mono, coeff)) = a.mul_monomials(&el.word[i - 1], &el.word[i]) {
            let mut word = Vec::with_capacity(p - 1);
            word.extend(el.word[..i - 1].iter().cloned());
            word.push(mono);
            word.extend(el.word[i + 1..].iter().cloned());
            let s = sign(deg_m + eps[i]);
            push(
                BarElem {
                    m: el.m.clone(),
                    word,
                    n: el.n.clone(),
                },
                ring.mul(&s, &ring.from_i64(coeff)),
            );
        }
    }
    // right action: move a_p into N
    {
        let letter_el = a.monomial_element(el.word[p - 1].clone(), ring.one());
        let nu = a
            .substitute_unchecked(&letter_el, &n.algebra, &n.images)
            .expect("structure map evaluation");
        let n_el = n.algebra.monomial_element(el.n.clone(), ring.one());
        let prod = nu.mul(&n_el);
        let s = sign(deg_m + eps[p - 1] + 1);
        for (mono, c) in prod.terms() {
            push(
                BarElem {
                    m: el.m.clone(),
                    word: el.word[..p - 1].to_vec(),
                    n: mono.clone(),
                },
                ring.mul(&s, c),
            );
        }
    }
    out
}

/// Report of the Hilbert-series regularity test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegularityReport {
    pub regular: bool,
    /// first degree where the quotient series deviates from the
    /// complete-intersection prediction
    pub first_failure: Option<usize>,
    pub quotient_dims: Vec<i64>,
    pub expected_dims: Vec<i64>,
}

/// Decide whether `images` form a regular sequence in the polynomial
/// algebra `b`, by comparing the Hilbert series of b/(images) with
/// HS(b) · ∏(1 − t^{d_j}) coefficientwise through `cap`.
pub fn regular_sequence_check(
    b: &FreeCga,
    images: &[GradedElement],
    cap: usize,
) -> Result<RegularityReport, TorError> {
    if !b.ring().is_field() {
        return Err(TorError::FieldRequired);
    }
    let degs: Vec<usize> = images
        .iter()
        .map(|im| im.homogeneous_degree().ok_or(TorError::StructureMap))
        .collect::<Result<_, _>>()?;

    // expected series: HS(b) * prod (1 - t^d), truncated
    let hs = b.hilbert_series(cap);
    let mut expected: Vec<i64> = hs.iter().map(|&u| u as i64).collect();
    for &d in &degs {
        let mut next = expected.clone();
        for i in d..=cap {
            next[i] -= expected[i - d];
        }
        expected = next;
    }

    // actual quotient dims by degreewise span of the ideal
    let ring = b.ring();
    let mut quotient: Vec<i64> = Vec::with_capacity(cap + 1);
    for deg in 0..=cap {
        let basis = b.basis_of_degree(deg);
        let index: BTreeMap<&Monomial, usize> =
            basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut spanners: Vec<Vec<Coeff>> = Vec::new();
        for (im, &d) in images.iter().zip(&degs) {
            if d > deg || im.is_zero() {
                continue;
            }
            for cof in b.basis_of_degree(deg - d) {
                let prod = b.monomial_element(cof, ring.one()).mul(im);
                let mut v = vec![ring.zero(); basis.len()];
                for (mono, c) in prod.terms() {
                    v[index[mono]] = c.clone();
                }
                spanners.push(v);
            }
        }
        let rank = if spanners.is_empty() {
            0
        } else {
            let mut mat = ExactMatrix::new(ring, basis.len(), spanners.len());
            for (j, v) in spanners.iter().enumerate() {
                for (i, c) in v.iter().enumerate() {
                    if !c.is_zero() {
                        mat.set(i, j, c.clone());
                    }
                }
            }
            mat.rank()?
        };
        quotient.push(basis.len() as i64 - rank as i64);
    }

    let first_failure = (0..=cap).find(|&i| quotient[i] != expected[i]);
    Ok(RegularityReport {
        regular: first_failure.is_none(),
        first_failure,
        quotient_dims: quotient,
        expected_dims: expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{lookup, EmbeddingSpec};
    use crate::models::{cartan_model, ModelRecipe};

    fn q() -> CoefficientRing {
        CoefficientRing::Rationals
    }

    fn poly(ring: CoefficientRing, gens: &[(&str, usize)]) -> FreeCga {
        FreeCga::new(
            ring,
            gens.iter()
                .map(|(n, d)| GeneratorSpec::polynomial(n, *d))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn one_variable_scalar_tor() {
        let a = poly(q(), &[("x", 2)]);
        let k = TorModule::scalar(&a);
        let t = koszul_tor(&a, &k.clone(), &k, 6).unwrap();
        assert_eq!(t.table.dim(0, 0), 1);
        assert_eq!(t.table.dim(-1, 2), 1);
        assert_eq!(t.table.total_dims, vec![1, 1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn flag_tor_from_generic_and_model_routes() {
        let a = poly(q(), &[("c1", 2), ("c2", 4)]);
        let nalg = poly(q(), &[("t1", 2), ("t2", 2)]);
        let t1 = nalg.generator(0);
        let t2 = nalg.generator(1);
        let images = vec![t1.add(&t2), t1.mul(&t2)];
        let n = TorModule::new(&a, nalg, images).unwrap();
        let m = TorModule::scalar(&a);
        let generic = koszul_tor(&a, &m, &n, 8).unwrap();
        assert_eq!(generic.table.total_dims, vec![1, 0, 1, 0, 0, 0, 0, 0, 0]);
        assert!(generic.table.concentrated_in_p_zero());

        let g = lookup("U(2)", q()).unwrap();
        let k = lookup("T2", q()).unwrap();
        let e = EmbeddingSpec::new(k, g.clone(), vec![vec![1, 0], vec![0, 1]]).unwrap();
        let recipe = ModelRecipe::one_sided(g, e, q()).unwrap();
        let model = cartan_model(&recipe).unwrap();
        let via_model = koszul_tor_of_model(&model, 8).unwrap();
        assert_eq!(via_model.table, generic.table);
    }

    #[test]
    fn char_two_central_quotient_table() {
        let f2 = CoefficientRing::PrimeField(2);
        let a = poly(f2, &[("c1", 2), ("c2", 4)]);
        let nalg = poly(f2, &[("y", 2)]);
        let y = nalg.generator(0);
        let images = vec![nalg.zero(), y.mul(&y)];
        let n = TorModule::new(&a, nalg, images).unwrap();
        let m = TorModule::scalar(&a);
        let t = koszul_tor(&a, &m, &n, 6).unwrap();
        assert_eq!(t.table.total_dims, vec![1, 1, 1, 1, 0, 0, 0]);
        assert_eq!(t.table.dim(-1, 2), 1);
        assert_eq!(t.table.dim(0, 2), 1);
        assert_eq!(t.table.dim(-1, 4), 1);
    }

    #[test]
    fn bar_differential_squares_to_zero() {
        // sign-rich input: exterior letters and module elements
        let a = FreeCga::new(
            q(),
            vec![
                GeneratorSpec::exterior("z3", 3),
                GeneratorSpec::polynomial("x4", 4),
            ],
        )
        .unwrap();
        let malg = FreeCga::new(
            q(),
            vec![
                GeneratorSpec::exterior("w3", 3),
                GeneratorSpec::polynomial("u4", 4),
            ],
        )
        .unwrap();
        let images = vec![malg.generator(0), malg.generator(1)];
        let m = TorModule::new(&a, malg, images.clone()).unwrap();
        let n = m.clone();
        // brute-force d twice over every element of moderate bidegree
        let mut checked = 0usize;
        for dm in 0..=4 {
            for dn in 0..=4 {
                for dw in 0..=8 {
                    for mb in m.algebra.basis_of_degree(dm) {
                        for nb in n.algebra.basis_of_degree(dn) {
                            for word in words_up_to(&a, dw, 3) {
                                let el = BarElem {
                                    m: mb.clone(),
                                    word,
                                    n: nb.clone(),
                                };
                                let mut acc: BTreeMap<BarElem, Coeff> = BTreeMap::new();
                                for (e1, c1) in bar_differential(&a, &m, &n, &el) {
                                    for (e2, c2) in bar_differential(&a, &m, &n, &e1) {
                                        let c = q().mul(&c1, &c2);
                                        let cur =
                                            acc.get(&e2).cloned().unwrap_or_else(|| q().zero());
                                        acc.insert(e2, q().add(&cur, &c));
                                    }
                                }
                                for (_, c) in acc {
                                    assert!(c.is_zero(), "d^2 != 0 on {:?}", el);
                                }
                                checked += 1;
                            }
                        }
                    }
                }
            }
        }
        assert!(checked > 50);
    }

    fn words_up_to(a: &FreeCga, total: usize, max_len: usize) -> Vec<Vec<Monomial>> {
        let mut out = Vec::new();
        if total == 0 {
            out.push(Vec::new());
            return out;
        }
        for d in 1..=total {
            for letter in a.basis_of_degree(d) {
                for tail in words_up_to(a, total - d, max_len.saturating_sub(1)) {
                    if tail.len() + 1 > max_len {
                        continue;
                    }
                    let mut w = vec![letter.clone()];
                    w.extend(tail);
                    out.push(w);
                }
            }
        }
        out
    }

    #[test]
    fn loops_on_the_three_sphere_pattern() {
        let a = FreeCga::new(q(), vec![GeneratorSpec::exterior("z3", 3)]).unwrap();
        let m = TorModule::scalar(&a);
        let n = TorModule::scalar(&a);
        let t = bar_tor(&a, &m, &n, 10, None).unwrap();
        assert_eq!(t.total_dims, vec![1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
        // the p-grading puts the 2k-dimensional class in word length k
        assert_eq!(t.dim(-2, 6), 1);
    }

    #[test]
    fn bar_resolution_of_ring_is_contractible() {
        let a = FreeCga::new(q(), vec![GeneratorSpec::exterior("z3", 3)]).unwrap();
        let m = TorModule::new(&a, a.clone(), vec![a.generator(0)]).unwrap();
        let n = TorModule::scalar(&a);
        let t = bar_tor(&a, &m, &n, 9, None).unwrap();
        assert_eq!(t.total_dims, vec![1, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn bar_agrees_with_koszul_on_the_flag() {
        let a = poly(q(), &[("c1", 2), ("c2", 4)]);
        let nalg = poly(q(), &[("t1", 2), ("t2", 2)]);
        let t1 = nalg.generator(0);
        let t2 = nalg.generator(1);
        let n = TorModule::new(&a, nalg, vec![t1.add(&t2), t1.mul(&t2)]).unwrap();
        let m = TorModule::scalar(&a);
        let koszul = koszul_tor(&a, &m, &n, 8).unwrap();
        let bar = bar_tor(&a, &m, &n, 8, None).unwrap();
        assert_eq!(bar.total_dims, koszul.table.total_dims);
        // vanishing window: nothing below p = -rank
        assert!(bar.entries.keys().all(|&(p, _)| (-2..=0).contains(&p)));
    }

    #[test]
    fn degree_one_letters_need_a_word_cap() {
        let f2 = CoefficientRing::PrimeField(2);
        let a = FreeCga::new(f2, vec![GeneratorSpec::exterior("z1", 1)]).unwrap();
        let m = TorModule::scalar(&a);
        let n = TorModule::scalar(&a);
        let err = bar_tor(&a, &m, &n, 4, None).unwrap_err();
        assert_eq!(err.to_string(), "bar complex not finite per degree");
        let t = bar_tor(&a, &m, &n, 4, Some(6)).unwrap();
        // every word [z1|..|z1] sits in total degree 0, one per length up
        // to the cap; the table reports the truncation it computed
        assert_eq!(t.total_dims[0], 7);
    }

    #[test]
    fn regularity_verdicts() {
        let b = poly(q(), &[("t1", 2), ("t2", 2)]);
        let t1 = b.generator(0);
        let t2 = b.generator(1);
        let r = regular_sequence_check(&b, &[t1.add(&t2), t1.mul(&t2)], 10).unwrap();
        assert!(r.regular);
        assert_eq!(r.first_failure, None);

        let s_alg = poly(q(), &[("s", 2)]);
        let s = s_alg.generator(0);
        let images = vec![
            s.pow(2).scale(&q().from_i64(-6)),
            s.pow(3).scale(&q().from_i64(-8)),
            s.pow(4).scale(&q().from_i64(-3)),
        ];
        let r = regular_sequence_check(&s_alg, &images, 12).unwrap();
        assert!(!r.regular);
        assert_eq!(r.first_failure, Some(6));

        let r = regular_sequence_check(&b, &[], 6).unwrap();
        assert!(r.regular);
    }

    #[test]
    fn structure_map_validation() {
        let a = poly(q(), &[("x", 4)]);
        let nalg = poly(q(), &[("u", 2)]);
        let bad = vec![nalg.generator(0)]; // degree 2 image for degree 4
        let err = TorModule::new(&a, nalg, bad).unwrap_err();
        assert_eq!(err.to_string(), "non-homogeneous structure maps");
    }

    #[test]
    fn text_grid_renders_second_quadrant() {
        let a = poly(q(), &[("c1", 2), ("c2", 4)]);
        let nalg = poly(q(), &[("t1", 2), ("t2", 2)]);
        let t1 = nalg.generator(0);
        let t2 = nalg.generator(1);
        let n = TorModule::new(&a, nalg, vec![t1.add(&t2), t1.mul(&t2)]).unwrap();
        let t = koszul_tor(&a, &TorModule::scalar(&a), &n, 6).unwrap();
        let grid = t.table.to_text_grid();
        assert!(grid.contains("q=2"));
        assert!(grid.contains("(p)"));
    }
}
