use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use osclab_core::algebra::{AlgElem, LambdaSpec};
use osclab_core::flow::{
    analytic_gamma1, coadjoint_residual, completeness_probe, first_integrals, integrate, random_initial_state,
    scalar_blowup_numeric, scalar_blowup_oracle, FlowForm, FlowProblem, ProbeConfig, Sampling, Tolerances,
};
use osclab_core::metric::{k_lambda, random_symmetric, IsoDescriptor, Metric};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec(l: &[f64]) -> LambdaSpec {
    LambdaSpec::new(l.to_vec()).unwrap()
}

fn u1() -> Metric {
    Metric::from_descriptor(&spec(&[1.0]), &IsoDescriptor::U1Dim4).unwrap()
}

#[test]
fn gamma1_solves_euler_equation() {
    let m = u1();
    let u = m.u();
    let (c, rho) = (1.3, 0.8);
    for k in 0..100 {
        let t = -1.9 + 3.8 * k as f64 / 99.0;
        let g = analytic_gamma1(c, rho, t).unwrap();
        let sec2 = 1.0 / (rho * t).cos().powi(2);
        let tan = (rho * t).tan();
        let gdot = AlgElem::new(vec![0.0, 0.0, -4.0 * rho.powi(3) / c * sec2 * tan, -2.0 * rho * rho * sec2]);
        let lhs = gdot.mapped(u);
        let rhs = m.algebra().bracket(&g.mapped(u), &g).unwrap();
        let scale = 1.0 + g.max_abs().powi(2);
        assert!((&lhs - &rhs).max_abs() / scale <= 1e-10, "t = {t}");
    }
}

#[test]
fn gamma1_blowup_brackets_half_pi() {
    let m = u1();
    for form in [FlowForm::EulerU, FlowForm::Body, FlowForm::Lax] {
        let p = FlowProblem::new(&m, form, analytic_gamma1(1.0, 1.0, 0.0).unwrap(), (0.0, 3.0));
        let tr = integrate(&p).unwrap();
        assert!(tr.status.is_blowup(), "{form:?}: {:?}", tr.status);
        let t = tr.status.t_star().unwrap();
        assert!(t > FRAC_PI_2 - 0.01 && t < FRAC_PI_2, "{form:?}: t* = {t}");
    }
}

#[test]
fn gamma1_numeric_tracks_analytic() {
    let m = u1();
    let grid: Vec<f64> = (0..=14).map(|k| k as f64 * 0.1).collect();
    let p = FlowProblem::new(&m, FlowForm::EulerU, analytic_gamma1(1.0, 1.0, 0.0).unwrap(), (0.0, 1.4))
        .with_sampling(Sampling::Grid(grid));
    let tr = integrate(&p).unwrap();
    for (t, x) in &tr.samples {
        let g = analytic_gamma1(1.0, 1.0, *t).unwrap();
        assert!((x - &g).max_abs() <= 1e-8 * (1.0 + g.max_abs()), "t = {t}");
    }
}

#[test]
fn scalar_oracle_calibration() {
    for x0 in [2.0, 1.0, 0.5, 7.0] {
        let want = scalar_blowup_oracle(x0).unwrap();
        let got = scalar_blowup_numeric(x0, 3.0 * want, &Tolerances::default()).unwrap().t_star().unwrap();
        assert!(got < want && got > 0.99 * want, "x0 = {x0}: {got} vs {want}");
    }
}

#[test]
fn u2_invariants_conserved_before_blowup() {
    let m = Metric::from_descriptor(&spec(&[1.0]), &IsoDescriptor::U2Dim4).unwrap();
    let x0 = AlgElem::new(vec![0.02364325, 0.90092739, -0.71168077, 0.89729889]);
    let tr = integrate(&FlowProblem::new(&m, FlowForm::EulerU, x0, (0.0, 5.0))).unwrap();
    assert!(tr.status.is_blowup(), "{:?}", tr.status);
    let t_star = tr.status.t_star().unwrap();
    assert!((t_star - 1.852).abs() < 0.01, "t* = {t_star}");
    for name in ["I1", "I2"] {
        let i = tr.integral_names.iter().position(|n| n == name).unwrap();
        assert!(tr.relative_drift_until(i, 0.9 * t_star) <= 1e-8, "{name}");
    }
}

#[test]
fn diagonal_family_completes_with_small_drift() {
    let s = spec(&[1.0, 2.0]);
    let m = Metric::from_descriptor(
        &s,
        &IsoDescriptor::DiagonalSym { eta: vec![0.3, 1.5], eta_check: vec![0.7, 1.5], rho: 0.4 },
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let x0 = AlgElem::new(random_initial_state(&s, &mut rng));
        let tr = integrate(&FlowProblem::new(&m, FlowForm::Body, x0, (0.0, 50.0))).unwrap();
        assert!(tr.status.is_completed());
        assert!(tr.max_drift() <= 1e-8, "{:?}", tr.drifts());
    }
}

#[test]
fn cartan_family_is_conserved() {
    let s = spec(&[1.0, 2.0]);
    let form = k_lambda(&s);
    let mut u = DMatrix::<f64>::identity(6, 6);
    u[(0, 1)] = 0.5;
    u[(1, 0)] = -1.0;
    u[(2, 2)] = 2.0;
    u[(4, 4)] = -0.7;
    u[(2, 4)] = 0.3;
    u[(4, 2)] = 0.3;
    let m = Metric::from_matrix(&form, u).unwrap();
    let set = first_integrals(&m);
    assert!(set.get("F_1").is_some());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..3 {
        let x0 = AlgElem::new(random_initial_state(&s, &mut rng));
        let tr = integrate(&FlowProblem::new(&m, FlowForm::EulerU, x0, (0.0, 30.0))).unwrap();
        assert!(tr.status.is_completed());
        assert!(tr.max_drift() <= 1e-8, "{:?}", tr.drifts());
    }
}

#[test]
fn euler_and_lax_agree_on_grid() {
    let s = spec(&[1.0, 1.5]);
    let form = k_lambda(&s);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let m = Metric::from_matrix(&form, random_symmetric(&form, &mut rng, true)).unwrap();
    let x0 = AlgElem::new(random_initial_state(&s, &mut rng));
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
    let run = |f| {
        integrate(&FlowProblem::new(&m, f, x0.clone(), (0.0, 10.0)).with_sampling(Sampling::Grid(grid.clone()))).unwrap()
    };
    let (e, l) = (run(FlowForm::EulerU), run(FlowForm::Lax));
    assert_eq!(e.samples.len(), l.samples.len());
    for ((te, xe), (tl, xl)) in e.samples.iter().zip(&l.samples) {
        assert_eq!(te, tl);
        let (ye, yl) = (xe.mapped(m.u()), xl.mapped(m.u()));
        assert!((&ye - &yl).max_abs() <= 1e-7 * (1.0 + ye.max_abs()));
    }
}

#[test]
fn time_reversal_returns_home() {
    let s = spec(&[1.0, 3.0]);
    let m = Metric::from_descriptor(
        &s,
        &IsoDescriptor::DiagonalSym { eta: vec![2.0, 0.25], eta_check: vec![2.0, 0.75], rho: 0.0 },
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x0 = AlgElem::new(random_initial_state(&s, &mut rng));
    let fwd = integrate(&FlowProblem::new(&m, FlowForm::EulerU, x0.clone(), (0.0, 20.0))).unwrap();
    let back = integrate(&FlowProblem::new(&m, FlowForm::EulerU, fwd.final_state().clone(), (20.0, 0.0))).unwrap();
    assert_eq!(back.final_time(), 0.0);
    assert!((back.final_state() - &x0).max_abs() <= 1e-7);
}

#[test]
fn coadjoint_form_holds_along_solutions() {
    let m = u1();
    let p = FlowProblem::new(&m, FlowForm::EulerU, AlgElem::new(vec![0.2, -0.1, 0.5, 0.3]), (0.0, 2.0));
    for (_, x) in &integrate(&p).unwrap().samples {
        assert!(coadjoint_residual(&m, x).unwrap() <= 1e-9 * (1.0 + x.max_abs().powi(2)));
    }
}

#[test]
fn probes_on_named_metrics() {
    let s = spec(&[1.0]);
    let diag = Metric::from_descriptor(
        &s,
        &IsoDescriptor::DiagonalSym { eta: vec![0.3], eta_check: vec![0.7], rho: 0.0 },
    )
    .unwrap();
    let r = completeness_probe(&diag, &ProbeConfig { samples: 20, t_max: 100.0, seed: 1, ..Default::default() }).unwrap();
    assert_eq!(r.blown_up_samples, 0);
    assert!(r.max_drift_completed <= 1e-8);

    let gamma = analytic_gamma1(1.0, 1.0, 0.0).unwrap().as_slice().to_vec();
    let cfg = ProbeConfig { samples: 10, t_max: 10.0, seed: 1, seeded: vec![gamma], ..Default::default() };
    let r = completeness_probe(&u1(), &cfg).unwrap();
    assert!(r.outcomes.iter().any(|o| o.seeded && o.status.is_blowup()));
}

#[test]
fn direct_sum_carries_embedded_trajectory() {
    let s = spec(&[1.0, 2.0]);
    let desc = IsoDescriptor::DirectSum {
        base: osclab_core::metric::DirectSumBase::U1,
        blocks: vec![[[1.5, 0.0], [0.0, 0.5]]],
    };
    let m = Metric::from_descriptor(&s, &desc).unwrap();
    let g = analytic_gamma1(1.0, 1.0, 0.0).unwrap();
    let x0 = vec![g[0], g[1], g[2], 0.0, g[3], 0.0];
    let cfg = ProbeConfig { samples: 1, t_max: 3.0, seeded: vec![x0], ..Default::default() };
    let r = completeness_probe(&m, &cfg).unwrap();
    let t = r.earliest_blowup.unwrap();
    assert!(t > FRAC_PI_2 - 0.01 && t < FRAC_PI_2);
}
