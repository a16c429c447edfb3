//! Verification suites behind the command-line tasks.
//!
//! Every function is a pure computation of its arguments and seed, so equal
//! inputs give byte-identical reports.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::algebra::{check_index, e_index, AlgElem, LambdaSpec, OscillatorAlgebra, E_MINUS1, E_ZERO};
use crate::connection::{closed_form_l, levi_civita};
use crate::error::Result;
use crate::flow::{completeness_probe, first_integrals, integrate, FlowProblem, ProbeConfig, Trajectory};
use crate::isometry::{
    g_mul, isom_dim, lattice_criterion, orthogonality_residual, parameter_count, polar, polar_via_log,
    random_group_elem, triple_bracket_preserving, CurvIsometry, LatticeInput, LatticeVerdict,
};
use crate::linalg::max_abs;
use crate::metric::{completeness_criteria, k_lambda, signature, CompletenessVerdict, Metric};
use crate::report::{Check, Report};

pub const JACOBI_TOL: f64 = 1e-12;
pub const AD_INVARIANCE_TOL: f64 = 1e-12;
pub const SYMMETRY_TOL: f64 = 1e-10;
pub const TORSION_TOL: f64 = 1e-10;
pub const CLOSED_FORM_TOL: f64 = 1e-11;
pub const QUARTER_AD_TOL: f64 = 1e-12;
pub const LOCSYM_TOL: f64 = 1e-10;
pub const LOCSYM_IDENTITY_TOL: f64 = 1e-12;
pub const DRIFT_TOL: f64 = 1e-8;
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
pub const TRIPLE_BRACKET_TOL: f64 = 1e-10;
pub const ROUND_TRIP_TOL: f64 = 1e-12;
pub const POLAR_TOL: f64 = 1e-9;
pub const AUTOMORPHISM_TOL: f64 = 1e-10;

fn gaussian(dim: usize, rng: &mut ChaCha8Rng) -> AlgElem {
    AlgElem::new((0..dim).map(|_| rng.sample(StandardNormal)).collect())
}

/// Structure constants, Jacobi identity, distinguished subalgebras and `k_λ`.
pub fn algebra_check(spec: &LambdaSpec, seed: u64, triples: usize) -> Result<Report> {
    let alg = OscillatorAlgebra::new(spec.clone());
    let form = k_lambda(spec);
    let (n, d) = (spec.n(), spec.dim());
    let mut r = Report::new("algebra-check", spec);

    let mut structure: f64 = 0.0;
    for j in 0..n {
        let l = spec.lambda(j);
        let (ej, ecj) = (e_index(j), check_index(n, j));
        let want = [
            (E_MINUS1, ej, &AlgElem::basis(d, ecj) * l),
            (E_MINUS1, ecj, &AlgElem::basis(d, ej) * -l),
            (ej, ecj, AlgElem::basis(d, E_ZERO)),
        ];
        for (a, b, w) in want {
            structure = structure.max((&alg.bracket_basis(a, b) - &w).max_abs());
        }
    }
    r.check(Check::at_most("structure_constants", "[e_-1,e_j] = λ_j ě_j, [e_-1,ě_j] = -λ_j e_j, [e_j,ě_j] = e_0", structure, 0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut skew: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            skew = skew.max((&alg.bracket_basis(a, b) + &alg.bracket_basis(b, a)).max_abs());
        }
    }
    let (mut jacobi, mut inv): (f64, f64) = (0.0, 0.0);
    for _ in 0..triples {
        let (x, y, z) = (gaussian(d, &mut rng), gaussian(d, &mut rng), gaussian(d, &mut rng));
        jacobi = jacobi.max(alg.jacobi_residual(&x, &y, &z)?);
        inv = inv.max(form.ad_invariance_residual(&x, &y, &z)?);
    }
    r.check(Check::at_most("jacobi", "Jacobi identity on random triples", jacobi, JACOBI_TOL));
    r.check(Check::at_most("antisymmetry", "[e_a,e_b] = -[e_b,e_a]", skew, 0.0));
    r.check(Check::at_most("ad_invariance", "k_λ([x,y],z) + k_λ(y,[x,z]) = 0", inv, AD_INVARIANCE_TOL));
    r.check(Check::equal("index", "k_λ is Lorentzian", form.index(), 1));

    let (center, derived, cartan) = (alg.center().dim(), alg.derived_ideal().dim(), alg.cartan().dim());
    r.check(Check::equal("center_dim", "centre = span{e_0}", center, 1));
    r.check(Check::equal("derived_dim", "derived ideal = span{e_0, e_j, ě_j}", derived, 2 * n + 1));
    r.check(Check::equal("cartan_dim", "Cartan subalgebra = span{e_-1, e_0}", cartan, 2));
    r.insert("dim", d).insert("triples", triples).insert("seed", seed);
    r.insert("center_dim", center).insert("derived_dim", derived).insert("cartan_dim", cartan);
    r.insert("max_jacobi_residual", jacobi);
    Ok(r)
}

#[derive(Serialize)]
struct Signature {
    positive: usize,
    negative: usize,
}

/// Signature, conditioning and the sufficient completeness conditions of a metric.
pub fn metric_info(metric: &Metric) -> Result<Report> {
    let mut r = Report::new("metric-info", metric.spec());
    let iso = metric.iso();
    r.check(Check::at_most("k_symmetry", "k_λ(ux,y) = k_λ(x,uy)", iso.symmetry_residual(), SYMMETRY_TOL));
    let (positive, negative) = signature(metric)?;
    r.insert("descriptor", iso.provenance());
    r.insert("kind", iso.provenance().kind());
    r.insert("signature", Signature { positive, negative });
    r.insert("index", metric.index());
    r.insert("lorentzian", metric.is_lorentzian());
    r.insert("eigenvalues", metric.eigenvalues());
    r.insert("condition_number", iso.condition_number());
    r.insert("symmetry_residual", iso.symmetry_residual());
    r.insert("block_conditions", iso.conditions());
    r.insert("completeness_verdict", completeness_criteria(metric.form(), metric.u()));
    r.insert("first_integrals", first_integrals(metric).names());
    Ok(r)
}

fn is_identity(u: &DMatrix<f64>) -> bool {
    max_abs(&(u - DMatrix::identity(u.nrows(), u.ncols()))) == 0.0
}

/// Levi-Civita table, its residuals and the closed-form cross-check.
pub fn connection_report(metric: &Metric) -> Result<Report> {
    let conn = levi_civita(metric)?;
    let alg = metric.algebra();
    let d = metric.dim();
    let mut r = Report::new("connection-report", metric.spec());
    let summary = conn.report();
    r.check(Check::at_most("torsion", "r(x,y) - r(y,x) = [x,y]", summary.torsion_residual, TORSION_TOL));
    r.check(Check::at_most("metric_compatibility", "L_x is k_u-skew", summary.compat_residual, TORSION_TOL));

    let mut closed: f64 = 0.0;
    for a in 0..d {
        closed = closed.max(max_abs(&(closed_form_l(metric, &AlgElem::basis(d, a))? - conn.table().left_basis(a))));
    }
    r.check(Check::at_most(
        "closed_form",
        "L_x = ½(ad_x - u⁻¹ad_{ux} + u⁻¹ad_x u)",
        closed,
        CLOSED_FORM_TOL,
    ));

    let curv = conn.table().curvature_basis(alg);
    let mut skew: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            skew = skew.max(max_abs(&(&curv[a * d + b] + &curv[b * d + a])));
        }
    }
    r.check(Check::at_most("curvature_antisymmetry", "𝓡(x,y) = -𝓡(y,x)", skew, 0.0));

    if is_identity(metric.u()) {
        let mut quarter: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let ad = alg.ad(&alg.bracket_basis(a, b))? * 0.25;
                quarter = quarter.max(max_abs(&(&curv[a * d + b] - ad)));
            }
        }
        r.check(Check::at_most("quarter_ad", "bi-invariant metric: 𝓡(x,y) = ¼ ad_[x,y]", quarter, QUARTER_AD_TOL));
    }

    r.insert("torsion_residual", summary.torsion_residual);
    r.insert("compat_residual", summary.compat_residual);
    r.insert("flatness_residual", summary.flatness_residual);
    r.insert("locsym_residual", summary.locsym_residual);
    r.insert("curvature_norms", &summary.curvature_norms);
    r.insert("closed_form_residual", closed);
    Ok(r)
}

/// Local symmetry `∇𝓡 = 0`. Only asserted where it is known to hold.
pub fn locsym_check(metric: &Metric) -> Result<Report> {
    let conn = levi_civita(metric)?;
    let residual = conn.local_symmetry_residual();
    let mut r = Report::new("locsym-check", metric.spec());
    let conditions = metric.iso().conditions();
    let asserted = if is_identity(metric.u()) {
        r.check(Check::at_most("locsym", "bi-invariant metrics are locally symmetric", residual, LOCSYM_IDENTITY_TOL));
        true
    } else if !conditions.is_empty() && conditions.iter().all(|c| c.is_locally_symmetric_case()) {
        r.check(Check::at_most(
            "locsym",
            "diagonal metric with η_i + η̌_i = 1 or η_i = η̌_i in every block is locally symmetric",
            residual,
            LOCSYM_TOL,
        ));
        true
    } else {
        false
    };
    r.insert("locsym_residual", residual);
    r.insert("asserted", asserted);
    r.insert("block_conditions", conditions);
    Ok(r)
}

/// Integrates one geodesic and checks first-integral drift if it completes.
pub fn geodesic_integrate(problem: &FlowProblem) -> Result<(Report, Trajectory)> {
    let tr = integrate(problem)?;
    let mut r = Report::new("geodesic-integrate", problem.metric.spec());
    if tr.status.is_completed() {
        for (name, drift) in tr.drifts() {
            r.check(Check::at_most(format!("drift.{name}"), "first integral conserved", drift, DRIFT_TOL));
        }
    }
    r.insert("form", tr.form);
    r.insert("x0", problem.x0.as_slice());
    r.insert("t_span", [problem.t_span.0, problem.t_span.1]);
    r.insert("status", tr.status);
    r.insert("t_end", tr.final_time());
    r.insert("final_state", tr.final_state().as_slice());
    r.insert("accepted_steps", tr.accepted);
    r.insert("rejected_steps", tr.rejected);
    r.insert("samples", tr.samples.len());
    r.insert("drifts", tr.drifts().into_iter().collect::<std::collections::BTreeMap<_, _>>());
    Ok((r, tr))
}

/// Random search for incomplete geodesics. Zero blow-ups are asserted when a
/// sufficient completeness condition holds.
pub fn probe(metric: &Metric, cfg: &ProbeConfig) -> Result<Report> {
    let p = completeness_probe(metric, cfg)?;
    let mut r = Report::new("completeness-probe", metric.spec());
    if p.verdict != CompletenessVerdict::Undetermined {
        r.check(Check::at_most(
            "no_blowup",
            "u preserving the centre or the Cartan subalgebra gives a complete metric",
            p.blown_up_samples as f64,
            0.0,
        ));
    }
    r.check(Check::at_most("drift", "first integrals conserved on completed runs", p.max_drift_completed, DRIFT_TOL));
    r.insert("probe", &p);
    Ok(r)
}

/// Orthogonality, curvature preservation, parametrisation round trip and the
/// polar closed form for one isotropy element.
pub fn isometry_verify(spec: &LambdaSpec, iso: &CurvIsometry, seed: u64, samples: usize) -> Result<Report> {
    let form = k_lambda(spec);
    let alg = form.algebra();
    let m = iso.to_matrix(spec);
    let mut r = Report::new("isometry-verify", spec);
    r.check(Check::at_most("orthogonality", "Uᵀ k_λ U = k_λ", orthogonality_residual(form.gram(), &m), ORTHOGONALITY_TOL));
    r.check(Check::at_most(
        "triple_bracket",
        "U[[x,y],z] = [[Ux,Uy],Uz]",
        triple_bracket_preserving(alg, &m),
        TRIPLE_BRACKET_TOL,
    ));
    let back = CurvIsometry::from_matrix(spec, &m)?;
    r.check(Check::at_most("round_trip", "(ρ, v, u) ↦ U ↦ (ρ, v, u)", back.distance(iso), ROUND_TRIP_TOL));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lmax = spec.lambdas().iter().cloned().fold(0.0, f64::max);
    // stay inside |tλ| < 2π where Log is defined
    let t_bound = 1.9 * std::f64::consts::PI / lmax;
    let (mut worst, mut auto): (f64, f64) = (0.0, 0.0);
    for _ in 0..samples {
        let g = random_group_elem(spec, &mut rng, t_bound);
        worst = worst.max(polar(spec, iso, &g)?.distance(&polar_via_log(spec, iso, &g)?));
        if spec.strictly_increasing() {
            let h = random_group_elem(spec, &mut rng, 10.0);
            let lhs = polar(spec, iso, &g_mul(spec, &g, &h)?)?;
            let rhs = g_mul(spec, &polar(spec, iso, &g)?, &polar(spec, iso, &h)?)?;
            auto = auto.max(lhs.distance(&rhs));
        }
    }
    r.check(Check::at_most("polar_closed_form", "𝒫_u = Exp ∘ U ∘ Log", worst, POLAR_TOL));
    if spec.strictly_increasing() {
        r.check(Check::at_most("polar_automorphism", "distinct frequencies: 𝒫_u(gh) = 𝒫_u(g)𝒫_u(h)", auto, AUTOMORPHISM_TOL));
    }
    r.insert("rho", iso.rho);
    r.insert("unitary", iso.is_unitary());
    r.insert("samples", samples);
    r.insert("seed", seed);
    r.insert("matrix", m.row_iter().map(|row| row.iter().cloned().collect::<Vec<_>>()).collect::<Vec<_>>());
    Ok(r)
}

/// Dimension of the isometry group, checked against a direct parameter count.
pub fn isometry_dimension(spec: &LambdaSpec) -> Report {
    let mut r = Report::new("isometry-dim", spec);
    let (dim, count) = (isom_dim(spec), parameter_count(spec));
    r.check(Check::equal("parameter_count", "dim = 3n + 2 + 2 Σ r_i²", count, dim));
    r.insert("dim", dim);
    r.insert("multiplicities", spec.blocks().iter().map(|b| b.multiplicity).collect::<Vec<_>>());
    r
}

/// Lattice existence. For a positive verdict every `λ_j / generator` must be an integer.
pub fn lattice_check(inputs: &[LatticeInput]) -> Report {
    let verdict = lattice_criterion(inputs);
    let lambdas: Vec<f64> = inputs.iter().map(LatticeInput::to_f64).collect();
    let mut r = Report {
        task: "lattice-check".into(),
        lambda: lambdas.clone(),
        pass: true,
        checks: Vec::new(),
        data: Default::default(),
    };
    if let LatticeVerdict::Lattice { generator } = &verdict {
        if let Ok(LatticeInput::Exact(g)) = crate::isometry::lattice::parse_frequency(generator) {
            let g = g.to_f64();
            let worst = lambdas.iter().map(|l| (l / g - (l / g).round()).abs()).fold(0.0, f64::max);
            r.check(Check::at_most("generator_divides", "λ_j ∈ generator · ℤ", worst, 1e-9));
        }
    }
    r.insert("admits_lattice", verdict.admits_lattice());
    r.insert("verdict", &verdict);
    r
}

/// Everything that applies to one metric, with a short completeness probe.
pub fn full_report(metric: &Metric, seed: u64, probe_cfg: &ProbeConfig) -> Result<Report> {
    let spec = metric.spec();
    let mut r = Report::new("full-report", spec);
    r.absorb("algebra", algebra_check(spec, seed, 200)?);
    r.absorb("metric", metric_info(metric)?);
    let conn = connection_report(metric)?;
    let locsym = locsym_check(metric)?;
    r.insert("locsym_residual", locsym.data.get("locsym_residual"));
    r.insert("flatness_residual", conn.data.get("flatness_residual"));
    r.absorb("connection", conn);
    r.absorb("locsym", locsym);
    let pr = probe(metric, probe_cfg)?;
    r.insert("completeness_verdict", completeness_criteria(metric.form(), metric.u()));
    r.absorb("probe", pr);
    Ok(r)
}

/// Probe settings used by [`full_report`] unless overridden.
pub fn default_full_report_probe(seed: u64) -> ProbeConfig {
    ProbeConfig { samples: 20, t_max: 20.0, seed, ..Default::default() }
}
