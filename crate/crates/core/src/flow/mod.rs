//! Geodesic flows of left-invariant metrics.
//!
//! A geodesic through the identity is determined by its body velocity
//! `x(t)`, which solves one of three equivalent systems:
//!
//! * [`FlowForm::Body`]: `ẋ = −r(x,x)` with the Levi-Civita product `r`;
//! * [`FlowForm::EulerU`]: `u(ẋ) = [u(x), x]`;
//! * [`FlowForm::Lax`]: `ẏ = [y, u⁻¹(y)]` in the variable `y = u(x)`.
//!
//! Trajectories always record `x`, whatever form was integrated.

pub mod integrals;
pub mod probe;
pub mod rk;

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgElem, OscillatorAlgebra};
use crate::connection::{levi_civita, ProductTable};
use crate::error::{Error, Result};
use crate::linalg::max_abs_vec;
use crate::metric::Metric;

pub use integrals::{first_integrals, FirstIntegral, FirstIntegralSet};
pub use probe::{completeness_probe, random_initial_state, ProbeConfig, ProbeReport, SampleOutcome};
pub use rk::{dopri5, Outcome, Sampling, Status, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowForm {
    Body,
    EulerU,
    Lax,
}

/// Precomputed vector field of one flow form.
#[derive(Clone, Debug)]
pub struct FlowSystem {
    form: FlowForm,
    algebra: OscillatorAlgebra,
    u: DMatrix<f64>,
    u_inv: DMatrix<f64>,
    table: Option<ProductTable>,
}

impl FlowSystem {
    pub fn new(metric: &Metric, form: FlowForm) -> Result<Self> {
        let u = metric.u().clone();
        let u_inv = u.clone().try_inverse().ok_or(Error::Singular { sigma_min: 0.0 })?;
        let table = match form {
            FlowForm::Body => Some(levi_civita(metric)?.table().clone()),
            _ => None,
        };
        Ok(Self { form, algebra: metric.algebra().clone(), u, u_inv, table })
    }

    pub fn form(&self) -> FlowForm {
        self.form
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// Vector field in the form's own variables.
    pub fn rhs_slice(&self, s: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let sv = DVector::from_column_slice(s);
        match self.form {
            FlowForm::Body => {
                let table = self.table.as_ref().expect("body form carries a table");
                table.product_acc(s, s, out);
                out.iter_mut().for_each(|v| *v = -*v);
            }
            FlowForm::EulerU => {
                let ux = &self.u * &sv;
                let mut br = vec![0.0; s.len()];
                self.algebra.bracket_acc(ux.as_slice(), s, &mut br);
                out.copy_from_slice((&self.u_inv * DVector::from_vec(br)).as_slice());
            }
            FlowForm::Lax => {
                let w = &self.u_inv * &sv;
                self.algebra.bracket_acc(s, w.as_slice(), out);
            }
        }
    }

    pub fn rhs(&self, state: &AlgElem) -> AlgElem {
        let mut out = vec![0.0; state.dim()];
        self.rhs_slice(state.as_slice(), &mut out);
        AlgElem::new(out)
    }

    /// Body velocity `x` to the form's variable.
    pub fn to_state(&self, x: &[f64]) -> Vec<f64> {
        match self.form {
            FlowForm::Lax => (&self.u * DVector::from_column_slice(x)).as_slice().to_vec(),
            _ => x.to_vec(),
        }
    }

    /// The form's variable back to `x`.
    pub fn to_body(&self, s: &[f64]) -> Vec<f64> {
        match self.form {
            FlowForm::Lax => (&self.u_inv * DVector::from_column_slice(s)).as_slice().to_vec(),
            _ => s.to_vec(),
        }
    }
}

/// `rhs(problem, x)`: the vector field of `form` at `state`.
pub fn rhs(metric: &Metric, form: FlowForm, state: &AlgElem) -> Result<AlgElem> {
    Ok(FlowSystem::new(metric, form)?.rhs(state))
}

/// A geodesic initial-value problem; `x0` is always the body velocity.
#[derive(Clone, Debug)]
pub struct FlowProblem {
    pub metric: Metric,
    pub form: FlowForm,
    pub x0: AlgElem,
    pub t_span: (f64, f64),
    pub tol: Tolerances,
    pub sampling: Sampling,
}

impl FlowProblem {
    pub fn new(metric: &Metric, form: FlowForm, x0: AlgElem, t_span: (f64, f64)) -> Self {
        Self { metric: metric.clone(), form, x0, t_span, tol: Tolerances::default(), sampling: Sampling::EveryStep }
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }
}

/// Samples of `x(t)` with the first integrals logged alongside.
///
/// Times are monotone in the direction of integration.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub form: FlowForm,
    pub integral_names: Vec<String>,
    pub samples: Vec<(f64, AlgElem)>,
    pub invariant_log: Vec<Vec<f64>>,
    /// Largest term magnitude of each integral seen along the run.
    pub magnitudes: Vec<f64>,
    pub status: Status,
    pub accepted: usize,
    pub rejected: usize,
}

pub fn integrate(problem: &FlowProblem) -> Result<Trajectory> {
    let system = FlowSystem::new(&problem.metric, problem.form)?;
    let integrals = first_integrals(&problem.metric);
    if problem.x0.dim() != system.dim() {
        return Err(Error::DimensionMismatch { expected: system.dim(), found: problem.x0.dim() });
    }
    let mut samples = Vec::new();
    let mut log = Vec::new();
    let mut magnitudes = vec![0.0f64; integrals.len()];
    let y0 = system.to_state(problem.x0.as_slice());
    let out = dopri5(
        |_, s, d| system.rhs_slice(s, d),
        problem.t_span.0,
        problem.t_span.1,
        &y0,
        &problem.tol,
        &problem.sampling,
        |t, s| {
            let x = system.to_body(s);
            log.push(integrals.eval(&x));
            for (m, i) in magnitudes.iter_mut().zip(&integrals.items) {
                *m = m.max(i.magnitude(&x));
            }
            samples.push((t, AlgElem::new(x)));
        },
    )?;
    Ok(Trajectory {
        form: problem.form,
        integral_names: integrals.names(),
        samples,
        invariant_log: log,
        magnitudes,
        status: out.status,
        accepted: out.accepted,
        rejected: out.rejected,
    })
}

impl Trajectory {
    pub fn final_state(&self) -> &AlgElem {
        &self.samples.last().expect("a trajectory holds its initial sample").1
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().map(|s| s.0).unwrap_or(0.0)
    }

    /// `max_t |I(t) − I(0)|` over samples with `|t − t0| ≤ until`, relative to the term magnitude.
    pub fn relative_drift_until(&self, index: usize, until: f64) -> f64 {
        let t0 = self.samples[0].0;
        let i0 = self.invariant_log[0][index];
        let worst = self
            .samples
            .iter()
            .zip(&self.invariant_log)
            .filter(|(s, _)| (s.0 - t0).abs() <= until)
            .map(|(_, v)| (v[index] - i0).abs())
            .fold(0.0, f64::max);
        worst / self.magnitudes[index].max(1e-300)
    }

    pub fn relative_drift(&self, index: usize) -> f64 {
        self.relative_drift_until(index, f64::INFINITY)
    }

    /// `(name, drift)` for every logged integral.
    pub fn drifts(&self) -> Vec<(String, f64)> {
        self.integral_names.iter().enumerate().map(|(i, n)| (n.clone(), self.relative_drift(i))).collect()
    }

    pub fn max_drift(&self) -> f64 {
        (0..self.integral_names.len()).map(|i| self.relative_drift(i)).fold(0.0, f64::max)
    }

    /// CSV with full-precision columns and a trailing status comment.
    pub fn to_csv(&self, algebra: &OscillatorAlgebra) -> String {
        let mut s = String::from("t");
        for k in 0..algebra.dim() {
            let label = algebra.basis_label(k).replace("ec_", "xc_").replace("e_", "x_");
            s.push(',');
            s.push_str(&label);
        }
        for n in &self.integral_names {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for ((t, x), inv) in self.samples.iter().zip(&self.invariant_log) {
            let _ = write!(s, "{t:.16e}");
            for v in x.as_slice().iter().chain(inv) {
                let _ = write!(s, ",{v:.16e}");
            }
            s.push('\n');
        }
        let t_star = self.status.t_star().map(|t| format!("{t:.16e}")).unwrap_or_else(|| "none".into());
        let _ = writeln!(s, "# status={} t_star={}", self.status.label(), t_star);
        s
    }
}

/// The incomplete geodesic of the `u1_dim4` metric:
/// `γ₁(t) = (c, c, c − (2ρ²/c) sec²(ρt), −2ρ tan(ρt))`.
pub fn analytic_gamma1(c: f64, rho: f64, t: f64) -> Result<AlgElem> {
    if c == 0.0 {
        return Err(Error::Domain("gamma1 needs c != 0".into()));
    }
    let cos = (rho * t).cos();
    if cos.abs() < 1e-12 {
        return Err(Error::Domain(format!("gamma1 is singular at t = {t} (rho t = pi/2 mod pi)")));
    }
    let sec2 = 1.0 / (cos * cos);
    Ok(AlgElem::new(vec![c, c, c - 2.0 * rho * rho / c * sec2, -2.0 * rho * (rho * t).tan()]))
}

/// Blow-up time `2/x0` of `ẋ = x²/2`; `None` when the solution is global forward.
pub fn scalar_blowup_oracle(x0: f64) -> Option<f64> {
    (x0 > 0.0).then(|| 2.0 / x0)
}

/// Integrates `ẋ = x²/2` numerically and returns the run status.
pub fn scalar_blowup_numeric(x0: f64, t_max: f64, tol: &Tolerances) -> Result<Status> {
    let out = dopri5(|_, y, d| d[0] = 0.5 * y[0] * y[0], 0.0, t_max, &[x0], tol, &Sampling::EveryStep, |_, _| {})?;
    Ok(out.status)
}

/// `‖Φ_u ẋ − ad_xᵀ Φ_u x‖` with `Φ_u x = k_u(x, ·)`: the coadjoint form of the flow at `x`.
pub fn coadjoint_residual(metric: &Metric, x: &AlgElem) -> Result<f64> {
    let system = FlowSystem::new(metric, FlowForm::EulerU)?;
    let xdot = system.rhs(x);
    let gu = metric.gram_u();
    let ad = metric.algebra().ad(x)?;
    let lhs = gu * xdot.coords();
    let rhs = ad.transpose() * (gu * x.coords());
    Ok(max_abs_vec(&(lhs - rhs)))
}
