use osclab_core::algebra::{AlgElem, LambdaSpec, OscillatorAlgebra};
use osclab_core::connection::levi_civita;
use osclab_core::isometry::{g_exp, g_inv, g_log, g_mul, polar, BlockIso, CurvIsometry, GroupElem};
use osclab_core::metric::{k_lambda, IsoDescriptor, Metric};
use num_complex::Complex64;
use proptest::prelude::*;

fn lambdas() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..4.0, 1..=4).prop_map(|mut v| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    })
}

fn elem(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, d)
}

fn group_elem(n: usize) -> impl Strategy<Value = GroupElem> {
    (-4.0f64..4.0, -3.0f64..3.0, prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n))
        .prop_map(|(t, s, z)| GroupElem::new(t, s, z.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()))
}

fn with_spec<S: Strategy>(f: impl Fn(usize) -> S + Clone) -> impl Strategy<Value = (Vec<f64>, S::Value)> {
    lambdas().prop_flat_map(move |l| {
        let n = l.len();
        (Just(l), f(n))
    })
}

fn spec(l: &[f64]) -> LambdaSpec {
    LambdaSpec::new(l.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi(
        (l, (x, y, z)) in with_spec(|n| (elem(2 * n + 2), elem(2 * n + 2), elem(2 * n + 2)))
    ) {
        let alg = OscillatorAlgebra::new(spec(&l));
        let (x, y, z) = (AlgElem::new(x), AlgElem::new(y), AlgElem::new(z));
        let skew = (&alg.bracket(&x, &y).unwrap() + &alg.bracket(&y, &x).unwrap()).max_abs();
        prop_assert!(skew <= 1e-13);
        prop_assert!(alg.jacobi_residual(&x, &y, &z).unwrap() <= 1e-11);
        let form = k_lambda(alg.spec());
        prop_assert!(form.ad_invariance_residual(&x, &y, &z).unwrap() <= 1e-11);
    }

    #[test]
    fn group_law_is_associative_with_inverses(
        (l, (a, b, c)) in with_spec(|n| (group_elem(n), group_elem(n), group_elem(n)))
    ) {
        let s = spec(&l);
        let ab_c = g_mul(&s, &g_mul(&s, &a, &b).unwrap(), &c).unwrap();
        let a_bc = g_mul(&s, &a, &g_mul(&s, &b, &c).unwrap()).unwrap();
        prop_assert!(ab_c.distance(&a_bc) <= 1e-10);
        let e = g_mul(&s, &a, &g_inv(&s, &a).unwrap()).unwrap();
        prop_assert!(e.distance(&GroupElem::identity(s.n())) <= 1e-12);
    }

    #[test]
    fn exp_of_multiples_is_a_homomorphism((l, x) in with_spec(|n| elem(2 * n + 2)), p in -1.0f64..1.0, q in -1.0f64..1.0) {
        let s = spec(&l);
        let x = AlgElem::new(x);
        let lhs = g_mul(&s, &g_exp(&s, &(&x * p)).unwrap(), &g_exp(&s, &(&x * q)).unwrap()).unwrap();
        let rhs = g_exp(&s, &(&x * (p + q))).unwrap();
        prop_assert!(lhs.distance(&rhs) <= 1e-10 * (1.0 + rhs.s.abs()));
    }

    #[test]
    fn log_inverts_exp_on_its_domain((l, x) in with_spec(|n| elem(2 * n + 2)), frac in -0.9f64..0.9) {
        let s = spec(&l);
        let lmax = l.iter().cloned().fold(0.0, f64::max);
        let mut x = x;
        x[0] = frac * 2.0 * std::f64::consts::PI / lmax;
        let x = AlgElem::new(x);
        prop_assert!((&g_log(&s, &g_exp(&s, &x).unwrap()).unwrap() - &x).max_abs() <= 1e-10);
    }

    #[test]
    fn rotations_give_group_automorphisms(
        (l, (g, h, angles)) in with_spec(|n| (group_elem(n), group_elem(n), prop::collection::vec(-3.2f64..3.2, n)))
    ) {
        // distinct frequencies only, so every block is a plane rotation
        let mut l = l;
        for j in 1..l.len() {
            if l[j] <= l[j - 1] + 1e-3 {
                l[j] = l[j - 1] + 0.5;
            }
        }
        let s = spec(&l);
        let blocks = angles
            .iter()
            .map(|a| BlockIso {
                v: nalgebra::DVector::from_vec(vec![a.sin(), a.cos()]),
                u: osclab_core::isometry::curv::rotation(1, *a),
            })
            .collect();
        let iso = CurvIsometry::new(&s, 1, blocks).unwrap();
        let lhs = polar(&s, &iso, &g_mul(&s, &g, &h).unwrap()).unwrap();
        let rhs = g_mul(&s, &polar(&s, &iso, &g).unwrap(), &polar(&s, &iso, &h).unwrap()).unwrap();
        prop_assert!(lhs.distance(&rhs) <= 1e-10);
    }

    #[test]
    fn diagonal_metrics_have_torsion_free_compatible_connections(
        (l, (eta, eta_check)) in with_spec(|n| (prop::collection::vec(0.2f64..3.0, n), prop::collection::vec(0.2f64..3.0, n))),
        rho in -1.0f64..1.0,
    ) {
        let s = spec(&l);
        let m = Metric::from_descriptor(&s, &IsoDescriptor::DiagonalSym { eta, eta_check, rho }).unwrap();
        let c = levi_civita(&m).unwrap();
        prop_assert!(c.torsion_residual() <= 1e-10);
        prop_assert!(c.compat_residual() <= 1e-10);
    }
}
