//! Koszul-type models for homogeneous spaces and biquotients: the
//! one-sided model over H(BK), the two-sided model over H(BH) ⊗ H(BK),
//! and the reduction of an arbitrary biquotient to a two-sided recipe
//! on G × G.
//!
//! Every emitted model is a free graded-commutative algebra on the base
//! polynomial generators together with one exterior generator z_j of
//! degree |x_j| − 1 per polynomial generator x_j of H(BG), with the
//! differential vanishing on the base.

use crate::catalog::{
    self, base_change, restriction_map, CatalogError, EmbeddingSpec, GroupDatum,
};
use crate::cdga::{Cdga, CdgaError};
use crate::gca::{FreeCga, GcaError, GeneratorSpec, GradedElement};
use crate::ring::CoefficientRing;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("embedding target does not match the ambient group")]
    TargetMismatch,
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Gca(#[from] GcaError),
    #[error(transparent)]
    Cdga(#[from] CdgaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    OneSided,
    TwoSided,
}

/// Input data for a model: ambient group, one or two subgroup embeddings,
/// coefficients, and the sign orientation of the differential.
#[derive(Debug, Clone)]
pub struct ModelRecipe {
    pub g: GroupDatum,
    pub h: Option<EmbeddingSpec>,
    pub k: EmbeddingSpec,
    pub ring: CoefficientRing,
    /// globally negate dz (the cohomology is unaffected)
    pub negate: bool,
}

impl ModelRecipe {
    pub fn one_sided(
        g: GroupDatum,
        k: EmbeddingSpec,
        ring: CoefficientRing,
    ) -> Result<Self, ModelError> {
        if k.target != g {
            return Err(ModelError::TargetMismatch);
        }
        Ok(ModelRecipe {
            g,
            h: None,
            k,
            ring,
            negate: false,
        })
    }

    pub fn two_sided(
        g: GroupDatum,
        h: EmbeddingSpec,
        k: EmbeddingSpec,
        ring: CoefficientRing,
    ) -> Result<Self, ModelError> {
        if k.target != g || h.target != g {
            return Err(ModelError::TargetMismatch);
        }
        Ok(ModelRecipe {
            g,
            h: Some(h),
            k,
            ring,
            negate: false,
        })
    }

    pub fn with_orientation(mut self, negate: bool) -> Self {
        self.negate = negate;
        self
    }

    pub fn kind(&self) -> ModelKind {
        match &self.h {
            Some(h) if !h.source.is_trivial() => ModelKind::TwoSided,
            _ => ModelKind::OneSided,
        }
    }
}

/// An assembled model, ready for cohomology or Tor extraction.
#[derive(Debug, Clone)]
pub struct Model {
    pub cdga: Cdga,
    pub kind: ModelKind,
    /// rank H + rank K == rank G
    pub equal_rank: bool,
    /// number of leading polynomial (base) generators; the exterior z's
    /// occupy the remaining slots
    pub base_gens: usize,
    /// count of base generators contributed by H (a prefix of the base)
    pub h_gens: usize,
    /// restriction images inside the base subalgebra, one per z generator
    pub k_images: Vec<GradedElement>,
    pub h_images: Vec<GradedElement>,
}

impl Model {
    /// The base polynomial subalgebra H(BH) ⊗ H(BK) as a standalone algebra.
    pub fn base_algebra(&self) -> FreeCga {
        let gens: Vec<GeneratorSpec> = self.cdga.algebra().generators()[..self.base_gens].to_vec();
        FreeCga::new(self.cdga.ring(), gens).expect("base subalgebra")
    }
}

fn primed(taken: &mut BTreeMap<String, usize>, name: &str) -> String {
    let mut out = name.to_string();
    let seen = taken.entry(name.to_string()).or_insert(0);
    for _ in 0..*seen {
        out.push('\'');
    }
    *seen += 1;
    out
}

/// One-sided model: H(BK) ⊗ Λ[z_j], dz_j = ρ_K*(x_j).
pub fn cartan_model(recipe: &ModelRecipe) -> Result<Model, ModelError> {
    build(recipe)
}

/// Two-sided model: H(BH) ⊗ H(BK) ⊗ Λ[z_j],
/// dz_j = 1 ⊗ ρ_K*(x_j) − ρ_H*(x_j) ⊗ 1.
pub fn kapovitch_model(recipe: &ModelRecipe) -> Result<Model, ModelError> {
    build(recipe)
}

fn build(recipe: &ModelRecipe) -> Result<Model, ModelError> {
    let g = &recipe.g;
    let ring = recipe.ring;
    g.admissible_over(ring)?;
    recipe.k.source.admissible_over(ring)?;
    if let Some(h) = &recipe.h {
        h.source.admissible_over(ring)?;
    }
    let trivial_h = EmbeddingSpec::from_trivial(g.clone());
    let h_embed = recipe.h.as_ref().unwrap_or(&trivial_h);

    let rho_k = restriction_map(&recipe.k)?;
    let rho_h = restriction_map(h_embed)?;

    let h_bg = h_embed.source.bg();
    let k_bg = recipe.k.source.bg();

    // assemble generator list: H base, K base, exterior z's
    let mut taken: BTreeMap<String, usize> = BTreeMap::new();
    let mut gens: Vec<GeneratorSpec> = Vec::new();
    for spec in h_bg.generators() {
        gens.push(GeneratorSpec::polynomial(
            &primed(&mut taken, &spec.name),
            spec.degree,
        ));
    }
    for spec in k_bg.generators() {
        gens.push(GeneratorSpec::polynomial(
            &primed(&mut taken, &spec.name),
            spec.degree,
        ));
    }
    let base_gens = gens.len();
    let h_gens = h_bg.n_gens();
    for d in g.exterior_degrees() {
        gens.push(GeneratorSpec::exterior(
            &primed(&mut taken, &format!("z{}", d)),
            d,
        ));
    }

    let over_q = FreeCga::new(CoefficientRing::Rationals, gens.clone())?;
    let h_into: Vec<GradedElement> = (0..h_gens).map(|i| over_q.generator(i)).collect();
    let k_into: Vec<GradedElement> = (0..k_bg.n_gens())
        .map(|i| over_q.generator(h_gens + i))
        .collect();

    let mut k_images = Vec::new();
    let mut h_images = Vec::new();
    let mut dz_q = Vec::new();
    for j in 0..g.bg().n_gens() {
        let k_img = k_bg.substitute_unchecked(&rho_k[j], &over_q, &k_into)?;
        let h_img = h_bg.substitute_unchecked(&rho_h[j], &over_q, &h_into)?;
        let mut dz = k_img.sub(&h_img);
        if recipe.negate {
            dz = dz.neg();
        }
        k_images.push(k_img);
        h_images.push(h_img);
        dz_q.push(dz);
    }

    // base-change to the requested coefficients
    let (algebra, diffs, k_images, h_images) = if ring == CoefficientRing::Rationals {
        (over_q, dz_q, k_images, h_images)
    } else {
        let alg = FreeCga::new(ring, gens)?;
        let move_all = |v: Vec<GradedElement>| -> Result<Vec<GradedElement>, ModelError> {
            v.iter()
                .map(|x| base_change(x, &over_q, &alg).map_err(ModelError::from))
                .collect()
        };
        let diffs = move_all(dz_q)?;
        let ki = move_all(k_images)?;
        let hi = move_all(h_images)?;
        (alg, diffs, ki, hi)
    };

    let mut all_diffs = vec![algebra.zero(); base_gens];
    all_diffs.extend(diffs);
    let cdga = Cdga::new(algebra, all_diffs)?;

    let h_rank = h_embed.source.rank;
    Ok(Model {
        cdga,
        kind: recipe.kind(),
        equal_rank: h_rank + recipe.k.source.rank == g.rank,
        base_gens,
        h_gens,
        k_images,
        h_images,
    })
}

/// Reduce a biquotient G/U, for U ⊂ G × G given by torus weights, to the
/// two-sided recipe on G × G with right subgroup the diagonal copy of G.
pub fn biquotient_reduce(
    g: &GroupDatum,
    u_source: &GroupDatum,
    u_weights: Vec<Vec<i64>>,
    ring: CoefficientRing,
) -> Result<ModelRecipe, ModelError> {
    let gg = GroupDatum::product(&[g.clone(), g.clone()]);
    let u = EmbeddingSpec::new(u_source.clone(), gg.clone(), u_weights)?;
    let mut diag = Vec::with_capacity(2 * g.rank);
    for block in 0..2 {
        let _ = block;
        for i in 0..g.rank {
            let mut row = vec![0i64; g.rank];
            row[i] = 1;
            diag.push(row);
        }
    }
    let delta = EmbeddingSpec::new(g.clone(), gg.clone(), diag)?;
    ModelRecipe::two_sided(gg, u, delta, ring)
}

/// Reduce H\G/K: stack the two one-sided weight matrices into a block
/// embedding of H × K in G × G and defer to the general reduction.
pub fn biquotient_reduce_pair(
    g: &GroupDatum,
    h: &EmbeddingSpec,
    k: &EmbeddingSpec,
    ring: CoefficientRing,
) -> Result<ModelRecipe, ModelError> {
    if h.target != *g || k.target != *g {
        return Err(ModelError::TargetMismatch);
    }
    let u = GroupDatum::product(&[h.source.clone(), k.source.clone()]);
    let hr = h.source.rank;
    let kr = k.source.rank;
    let mut weights = Vec::with_capacity(2 * g.rank);
    for row in &h.weights {
        let mut r = row.clone();
        r.extend(std::iter::repeat(0).take(kr));
        weights.push(r);
    }
    for row in &k.weights {
        let mut r = vec![0i64; hr];
        r.extend(row.iter().copied());
        weights.push(r);
    }
    biquotient_reduce(g, &u, weights, ring)
}

/// Alternating sum of Betti numbers; meaningful once the dims vanish
/// above the dimension of the space.
pub fn euler_characteristic(dims: &[usize]) -> i64 {
    dims.iter()
        .enumerate()
        .map(|(n, d)| if n % 2 == 0 { *d as i64 } else { -(*d as i64) })
        .sum()
}

/// The catalog Euler characteristic of the recipe's space.
pub fn recipe_weyl_euler(recipe: &ModelRecipe) -> Result<u128, CatalogError> {
    let trivial = GroupDatum::trivial();
    let h = recipe.h.as_ref().map_or(&trivial, |e| &e.source);
    catalog::weyl_euler_characteristic(&recipe.g, h, &recipe.k.source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::lookup;

    fn q() -> CoefficientRing {
        CoefficientRing::Rationals
    }

    fn one_sided(gspec: &str, kspec: &str, weights: Vec<Vec<i64>>) -> ModelRecipe {
        let g = lookup(gspec, q()).unwrap();
        let k = lookup(kspec, q()).unwrap();
        let e = EmbeddingSpec::new(k, g.clone(), weights).unwrap();
        ModelRecipe::one_sided(g, e, q()).unwrap()
    }

    fn identity(n: usize) -> Vec<Vec<i64>> {
        (0..n)
            .map(|i| (0..n).map(|j| (i == j) as i64).collect())
            .collect()
    }

    #[test]
    fn full_flag_of_rank_two() {
        let recipe = one_sided("U(2)", "T2", identity(2));
        let m = cartan_model(&recipe).unwrap();
        let names: Vec<&str> = m
            .cdga
            .algebra()
            .generators()
            .iter()
            .map(|g| g.name.as_str())
            .collect();
        assert_eq!(names, vec!["t1", "t2", "z1", "z3"]);
        assert_eq!(m.cdga.generator_differential(2).to_string(), "t1 + t2");
        assert_eq!(m.cdga.generator_differential(3).to_string(), "t1*t2");
        let h = m.cdga.cohomology(8).unwrap();
        assert_eq!(h.dims, vec![1, 0, 1, 0, 0, 0, 0, 0, 0]);
        assert!(m.equal_rank);
    }

    #[test]
    fn oriented_two_plane_grassmannian() {
        let recipe = one_sided("SO(5)", "SO(2)xSO(3)", identity(2));
        let m = cartan_model(&recipe).unwrap();
        let h = m.cdga.cohomology(10).unwrap();
        assert_eq!(h.dims, vec![1, 0, 1, 0, 1, 0, 1, 0, 0, 0, 0]);
        assert_eq!(
            euler_characteristic(&h.dims),
            recipe_weyl_euler(&recipe).unwrap() as i64
        );
    }

    #[test]
    fn ambient_group_quotient_is_acyclic() {
        let recipe = one_sided("U(2)", "U(2)", identity(2));
        let m = cartan_model(&recipe).unwrap();
        let h = m.cdga.cohomology(8).unwrap();
        assert_eq!(h.dims[0], 1);
        assert!(h.dims[1..].iter().all(|&d| d == 0));
    }

    #[test]
    fn trivial_left_subgroup_reduces_to_one_sided() {
        let g = lookup("U(2)", q()).unwrap();
        let t2 = lookup("T2", q()).unwrap();
        let k = EmbeddingSpec::new(t2, g.clone(), identity(2)).unwrap();
        let one = ModelRecipe::one_sided(g.clone(), k.clone(), q()).unwrap();
        let h_triv = EmbeddingSpec::from_trivial(g.clone());
        let two = ModelRecipe::two_sided(g, h_triv, k, q()).unwrap();
        let m1 = cartan_model(&one).unwrap();
        let m2 = kapovitch_model(&two).unwrap();
        assert_eq!(m2.kind, ModelKind::OneSided);
        assert_eq!(
            m1.cdga.algebra().generators(),
            m2.cdga.algebra().generators()
        );
        for i in 0..m1.cdga.algebra().n_gens() {
            assert_eq!(
                m1.cdga.generator_differential(i),
                m2.cdga.generator_differential(i)
            );
        }
    }

    #[test]
    fn reflected_circle_in_su3() {
        let g = lookup("SU(3)", q()).unwrap();
        let circle = lookup("circle", q()).unwrap();
        let w = vec![vec![1], vec![-1]];
        let h = EmbeddingSpec::new(circle.clone(), g.clone(), w.clone()).unwrap();
        let k = EmbeddingSpec::new(circle, g.clone(), w).unwrap();
        let recipe = ModelRecipe::two_sided(g, h, k, q()).unwrap();
        let m = kapovitch_model(&recipe).unwrap();
        let coh = m.cdga.cohomology(12).unwrap();
        assert_eq!(coh.dims, vec![1, 0, 2, 0, 2, 1, 2, 2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn orientation_flag_does_not_change_betti_numbers() {
        let flag = one_sided("U(2)", "T2", identity(2));
        let grass = one_sided("SO(5)", "SO(2)xSO(3)", identity(2));
        let g = lookup("SU(3)", q()).unwrap();
        let circle = lookup("circle", q()).unwrap();
        let w = vec![vec![1], vec![-1]];
        let h = EmbeddingSpec::new(circle.clone(), g.clone(), w.clone()).unwrap();
        let k = EmbeddingSpec::new(circle, g.clone(), w).unwrap();
        let refl = ModelRecipe::two_sided(g, h, k, q()).unwrap();
        for recipe in [flag, grass, refl] {
            let plus = build(&recipe).unwrap().cdga.cohomology(10).unwrap();
            let minus = build(&recipe.clone().with_orientation(true))
                .unwrap()
                .cdga
                .cohomology(10)
                .unwrap();
            assert_eq!(plus.dims, minus.dims);
        }
    }

    #[test]
    fn char_two_central_circle_quotient() {
        let g = lookup("U(2)", CoefficientRing::PrimeField(2)).unwrap();
        let circle = lookup("circle", CoefficientRing::PrimeField(2)).unwrap();
        let k = EmbeddingSpec::new(circle, g.clone(), vec![vec![1], vec![1]]).unwrap();
        let recipe = ModelRecipe::one_sided(g, k, CoefficientRing::PrimeField(2)).unwrap();
        let m = cartan_model(&recipe).unwrap();
        // dz1 = 2s = 0 and dz3 = s^2 over F2
        assert!(m.cdga.generator_differential(1).is_zero());
        assert_eq!(m.cdga.generator_differential(2).to_string(), "s^2");
        let h = m.cdga.cohomology(6).unwrap();
        assert_eq!(h.dims, vec![1, 1, 1, 1, 0, 0, 0]);
        assert!(!m.equal_rank);
    }

    #[test]
    fn reduction_of_homogeneous_space_agrees() {
        // SU(2)/circle as a biquotient with U = 1 x circle
        let g = lookup("SU(2)", q()).unwrap();
        let circle = lookup("circle", q()).unwrap();
        let direct = {
            let k = EmbeddingSpec::new(circle.clone(), g.clone(), vec![vec![1]]).unwrap();
            let recipe = ModelRecipe::one_sided(g.clone(), k, q()).unwrap();
            cartan_model(&recipe).unwrap().cdga.cohomology(6).unwrap()
        };
        let reduced = {
            let recipe = biquotient_reduce(&g, &circle, vec![vec![0], vec![1]], q()).unwrap();
            kapovitch_model(&recipe).unwrap().cdga.cohomology(6).unwrap()
        };
        assert_eq!(direct.dims, vec![1, 0, 1, 0, 0, 0, 0]);
        assert_eq!(direct.dims, reduced.dims);
    }

    #[test]
    fn diagonal_subgroup_gives_free_module_on_exterior_part() {
        let g = lookup("SU(2)", q()).unwrap();
        let recipe = biquotient_reduce(&g, &g, vec![vec![1], vec![1]], q()).unwrap();
        let m = kapovitch_model(&recipe).unwrap();
        let h = m.cdga.cohomology(8).unwrap();
        assert_eq!(h.dims, vec![1, 0, 0, 1, 1, 0, 0, 1, 1]);
    }

    #[test]
    fn eschenburg_circle_matches_one_sided_route() {
        let g = lookup("SU(3)", q()).unwrap();
        let circle = lookup("circle", q()).unwrap();
        let reduced = {
            let recipe = biquotient_reduce(
                &g,
                &circle,
                vec![vec![1], vec![1], vec![0], vec![0]],
                q(),
            )
            .unwrap();
            kapovitch_model(&recipe).unwrap().cdga.cohomology(7).unwrap()
        };
        let direct = {
            let k = EmbeddingSpec::new(circle, g.clone(), vec![vec![1], vec![1]]).unwrap();
            let recipe = ModelRecipe::one_sided(g, k, q()).unwrap();
            cartan_model(&recipe).unwrap().cdga.cohomology(7).unwrap()
        };
        assert_eq!(direct.dims, reduced.dims);
        // seven-dimensional space: Poincare series is palindromic
        let d = &direct.dims;
        for n in 0..=7 {
            assert_eq!(d[n], d[7 - n], "degree {}", n);
        }
    }

    #[test]
    fn blocked_pair_reduction_matches_two_sided_model() {
        // reflected circle, via the pair reduction instead of the direct model
        let g = lookup("SU(3)", q()).unwrap();
        let circle = lookup("circle", q()).unwrap();
        let w = vec![vec![1], vec![-1]];
        let h = EmbeddingSpec::new(circle.clone(), g.clone(), w.clone()).unwrap();
        let k = EmbeddingSpec::new(circle, g.clone(), w).unwrap();
        let two = ModelRecipe::two_sided(g.clone(), h.clone(), k.clone(), q()).unwrap();
        let direct = kapovitch_model(&two).unwrap().cdga.cohomology(9).unwrap();
        let recipe = biquotient_reduce_pair(&g, &h, &k, q()).unwrap();
        let reduced = kapovitch_model(&recipe).unwrap().cdga.cohomology(9).unwrap();
        assert_eq!(direct.dims, reduced.dims);
    }

    #[test]
    fn base_algebra_splits_off() {
        let recipe = one_sided("U(2)", "T2", identity(2));
        let m = cartan_model(&recipe).unwrap();
        let base = m.base_algebra();
        assert_eq!(base.n_gens(), 2);
        assert_eq!(m.k_images.len(), 2);
    }
}
