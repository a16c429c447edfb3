//! The isometry group of `(G_λ, k_λ)`.

pub mod curv;
pub mod group;
pub mod lattice;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::LambdaSpec;

pub use curv::{
    act_sigma_on_u, act_u_on_sigma, conjugation_projection, isom_inv, isom_mul, orthogonality_residual, polar,
    polar_via_log,
    triple_bracket_preserving, BlockIso, CurvIsometry, IsomElem,
};
pub use group::{dl, g_exp, g_inv, g_log, g_mul, geodesic_exponential, GroupElem};
pub use lattice::{lattice_criterion, parse_frequency_list, ExactReal, LatticeInput, LatticeVerdict};

/// `3n + 2 + 2 Σ r_i²`.
pub fn isom_dim(spec: &LambdaSpec) -> usize {
    3 * spec.n() + 2 + 2 * spec.blocks().iter().map(|b| b.multiplicity * b.multiplicity).sum::<usize>()
}

/// `(2n+2) + Σ (2r_i + dim SO(2r_i))`: group coordinates plus `(v_i, u_i)`.
pub fn parameter_count(spec: &LambdaSpec) -> usize {
    spec.dim() + spec.blocks().iter().map(|b| 2 * b.multiplicity + b.multiplicity * (2 * b.multiplicity - 1)).sum::<usize>()
}

/// Haar-like random element of `SO(m)` via QR of a Gaussian matrix.
pub fn random_so<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..m {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Random element of `U(r) ⊂ SO(2r)` in `(Re, Im)` coordinates.
pub fn random_unitary<R: Rng + ?Sized>(r: usize, rng: &mut R) -> DMatrix<f64> {
    let g = |rng: &mut R| rng.sample::<f64, _>(StandardNormal);
    let a = nalgebra::DMatrix::<Complex64>::from_fn(r, r, |_, _| Complex64::new(g(rng), g(rng)));
    let q = a.qr().q();
    let mut m = DMatrix::zeros(2 * r, 2 * r);
    for i in 0..r {
        for j in 0..r {
            let c = q[(i, j)];
            m[(i, j)] = c.re;
            m[(i, r + j)] = -c.im;
            m[(r + i, j)] = c.im;
            m[(r + i, r + j)] = c.re;
        }
    }
    m
}

/// Random `ρ = 1` element with Gaussian `v_i` and `u_i` drawn from `SO(2r_i)` or `U(r_i)`.
pub fn random_curv_isometry<R: Rng + ?Sized>(spec: &LambdaSpec, rng: &mut R, unitary: bool) -> CurvIsometry {
    let blocks = spec
        .blocks()
        .iter()
        .map(|b| {
            let m = 2 * b.multiplicity;
            let v = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
            let u = if unitary { random_unitary(b.multiplicity, rng) } else { random_so(m, rng) };
            BlockIso { v, u }
        })
        .collect();
    CurvIsometry { rho: 1, blocks }
}

/// Random group element with `|t| ≤ t_bound` and Gaussian `s`, `z`.
pub fn random_group_elem<R: Rng + ?Sized>(spec: &LambdaSpec, rng: &mut R, t_bound: f64) -> GroupElem {
    let t = t_bound * (2.0 * rng.random::<f64>() - 1.0);
    let s = rng.sample(StandardNormal);
    let z = (0..spec.n()).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    GroupElem { t, s, z }
}

/// All multiplicity vectors (compositions) of `n`, i.e. every block structure.
pub fn block_structures(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in block_structures(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// A spec with the given block multiplicities and frequencies `1, 2, 3, …`.
pub fn spec_with_blocks(mults: &[usize]) -> LambdaSpec {
    let lambdas = mults.iter().enumerate().flat_map(|(i, &r)| std::iter::repeat_n((i + 1) as f64, r)).collect();
    LambdaSpec::new(lambdas).expect("positive non-decreasing")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgElem, OscillatorAlgebra};
    use crate::metric::k_lambda;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(l: &[f64]) -> LambdaSpec {
        LambdaSpec::new(l.to_vec()).unwrap()
    }

    #[test]
    fn dimension_formula_examples() {
        assert_eq!(isom_dim(&spec(&[1.0])), 7);
        assert_eq!(isom_dim(&spec(&[1.0, 1.0, 2.0])), 21);
        for n in 1..=6 {
            for mults in block_structures(n) {
                let s = spec_with_blocks(&mults);
                assert_eq!(isom_dim(&s), parameter_count(&s), "{mults:?}");
            }
        }
        assert_eq!(block_structures(4).len(), 8);
    }

    #[test]
    fn induced_maps_are_orthogonal_and_curvature_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for l in [vec![1.0], vec![1.0, 1.0, 2.0], vec![0.5, 2.0, 2.0]] {
            let s = spec(&l);
            let form = k_lambda(&s);
            let alg = OscillatorAlgebra::new(s.clone());
            for unitary in [false, true] {
                let mut iso = random_curv_isometry(&s, &mut rng, unitary);
                for rho in [1, -1] {
                    iso.rho = rho;
                    let u = iso.to_matrix(&s);
                    assert!(orthogonality_residual(form.gram(), &u) < 1e-12);
                    assert!(triple_bracket_preserving(&alg, &u) < 1e-10);
                    let back = CurvIsometry::from_matrix(&s, &u).unwrap();
                    assert!(IsomElem { sigma: GroupElem::identity(s.n()), iso: back }
                        .distance(&IsomElem { sigma: GroupElem::identity(s.n()), iso: iso.clone() })
                        < 1e-12);
                }
            }
        }
    }

    #[test]
    fn swapping_distinct_blocks_breaks_triple_brackets() {
        let s = spec(&[1.0, 2.0]);
        let alg = OscillatorAlgebra::new(s.clone());
        let mut u = DMatrix::identity(6, 6);
        u.swap_columns(2, 3);
        u.swap_columns(4, 5);
        let form = k_lambda(&s);
        // not k-orthogonal either, but the triple bracket test alone must reject it
        assert!(triple_bracket_preserving(&alg, &u) > 0.1);
        assert!(orthogonality_residual(form.gram(), &u) > 0.1);
        assert!(triple_bracket_preserving(&alg, &DMatrix::identity(6, 6)) == 0.0);
    }

    #[test]
    fn polar_matches_exp_u_log() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = spec(&[1.0, 1.0, 2.0]);
        for _ in 0..20 {
            let mut iso = random_curv_isometry(&s, &mut rng, false);
            if rng.random::<bool>() {
                iso.rho = -1;
            }
            let g = random_group_elem(&s, &mut rng, 2.5);
            let x = g_log(&s, &g).unwrap();
            let via = g_exp(&s, &x.mapped(&iso.to_matrix(&s))).unwrap();
            assert!(polar(&s, &iso, &g).unwrap().distance(&via) < 1e-12);
        }
    }

    #[test]
    fn polar_fixes_identity_and_trivial_iso() {
        let s = spec(&[1.0, 3.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut iso = random_curv_isometry(&s, &mut rng, false);
        let g = random_group_elem(&s, &mut rng, 10.0);
        assert!(polar(&s, &CurvIsometry::identity(&s), &g).unwrap().distance(&g) < 1e-15);
        iso.blocks.iter_mut().for_each(|b| b.v.fill(0.0));
        assert!(polar(&s, &iso, &GroupElem::identity(2)).unwrap().distance(&GroupElem::identity(2)) == 0.0);
    }

    #[test]
    fn product_realises_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = spec(&[1.0, 1.0, 1.0]);
        for _ in 0..10 {
            let a = IsomElem { sigma: random_group_elem(&s, &mut rng, 3.0), iso: random_curv_isometry(&s, &mut rng, false) };
            let b = IsomElem { sigma: random_group_elem(&s, &mut rng, 3.0), iso: random_curv_isometry(&s, &mut rng, false) };
            let g = random_group_elem(&s, &mut rng, 3.0);
            let ab = isom_mul(&s, &a, &b).unwrap();
            let lhs = ab.apply(&s, &g).unwrap();
            let rhs = a.apply(&s, &b.apply(&s, &g).unwrap()).unwrap();
            assert!(lhs.distance(&rhs) < 1e-12);
            let e = isom_mul(&s, &a, &isom_inv(&s, &a).unwrap()).unwrap();
            assert!(e.distance(&IsomElem::identity(&s)) < 1e-12);
            assert!(isom_mul(&s, &IsomElem::identity(&s), &a).unwrap().distance(&a) < 1e-15);
        }
    }

    #[test]
    fn unitary_conjugation_is_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = spec(&[1.0, 1.0, 1.0]);
        let a = IsomElem { sigma: random_group_elem(&s, &mut rng, 2.0), iso: random_curv_isometry(&s, &mut rng, true) };
        let p = conjugation_projection(&s, &a, &random_group_elem(&s, &mut rng, 2.0)).unwrap();
        assert!(p.distance_from_identity() < 1e-12);
        let a = IsomElem { sigma: a.sigma, iso: random_curv_isometry(&s, &mut rng, false) };
        let p = conjugation_projection(&s, &a, &random_group_elem(&s, &mut rng, 2.0)).unwrap();
        assert!(p.distance_from_identity() > 1e-3);
    }

    #[test]
    fn actions_for_simple_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = spec(&[1.0, 2.0, 3.5]);
        let iso = random_curv_isometry(&s, &mut rng, false);
        let sigma = random_group_elem(&s, &mut rng, 4.0);
        let moved = act_sigma_on_u(&s, &sigma, &iso).unwrap();
        assert!(IsomElem { sigma: sigma.clone(), iso: moved }.distance(&IsomElem { sigma: sigma.clone(), iso: iso.clone() }) < 1e-14);
        assert!(act_u_on_sigma(&s, &CurvIsometry::identity(&s), &sigma).unwrap().distance(&sigma) < 1e-15);
        let (a, b) = (random_group_elem(&s, &mut rng, 4.0), random_group_elem(&s, &mut rng, 4.0));
        let lhs = polar(&s, &iso, &g_mul(&s, &a, &b).unwrap()).unwrap();
        let rhs = g_mul(&s, &polar(&s, &iso, &a).unwrap(), &polar(&s, &iso, &b).unwrap()).unwrap();
        assert!(lhs.distance(&rhs) < 1e-10);
    }

    #[test]
    fn json_round_trip() {
        let s = spec(&[1.0, 1.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let iso = random_curv_isometry(&s, &mut rng, false);
        let back = CurvIsometry::from_json(&s, &iso.to_json()).unwrap();
        assert_eq!(back, iso);
        assert!(CurvIsometry::from_json(&s, r#"{"rho":1,"blocks":[]}"#).is_err());
        assert!(CurvIsometry::from_json(&s, r#"{"rho":2,"blocks":[{"v":[[0,0],[0,0]],"u":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]},{"v":[[0,0]],"u":[[1,0],[0,1]]}]}"#).is_err());
    }

    #[test]
    fn exp_matches_geodesic_integration() {
        let s = spec(&[1.0, 2.0]);
        let m = crate::metric::Metric::bi_invariant(&s);
        let x = AlgElem::new(vec![1.3, -0.4, 0.7, 0.2, -0.5, 1.1]);
        let g = geodesic_exponential(&m, &x, 1.0, &Default::default()).unwrap();
        assert!(g.distance(&g_exp(&s, &x).unwrap()) < 1e-9);
    }
}
