//! Scenarios: a task, its inputs and a seed, fully describing one run.

use std::path::Path;

use osclab_core::algebra::{AlgElem, LambdaSpec};
use osclab_core::flow::{analytic_gamma1, random_initial_state, FlowForm, FlowProblem, ProbeConfig, Tolerances};
use osclab_core::isometry::lattice::parse_frequency;
use osclab_core::isometry::{polar, polar_via_log, random_curv_isometry, CurvIsometry, GroupElem, LatticeInput};
use osclab_core::metric::{IsoDescriptor, Metric};
use osclab_core::report::{Check, Report};
use osclab_core::suite;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    AlgebraCheck,
    MetricInfo,
    ConnectionReport,
    LocsymCheck,
    GeodesicIntegrate,
    CompletenessProbe,
    IsometryVerify,
    IsometryDim,
    IsometryPolar,
    LatticeCheck,
    FullReport,
}

/// A frequency as written: integers and strings stay exact, other numbers are floats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Frequency {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Frequency {
    fn to_input(&self) -> Result<LatticeInput, CliError> {
        match self {
            Frequency::Int(v) => Ok(parse_frequency(&v.to_string())?),
            Frequency::Float(v) => Ok(LatticeInput::Float(*v)),
            Frequency::Text(t) => Ok(parse_frequency(t)?),
        }
    }
}

/// Initial state: explicit coordinates or a text form (`gamma1:c=..,rho=..`, `random`, `a,b,..`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Coords(Vec<f64>),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub x0: Option<StateSpec>,
    pub t_span: Option<[f64; 2]>,
    pub form: FlowForm,
    pub tolerances: Tolerances,
    pub samples: Option<usize>,
    pub t_max: Option<f64>,
    pub seeded: Vec<StateSpec>,
    pub triples: usize,
    /// CurvIsometry JSON object.
    pub isometry: Option<Value>,
    /// Group element `t,s,re_1,im_1,..`.
    pub g: Option<String>,
    /// Reject float frequencies instead of reporting them undecidable.
    pub exact: bool,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            x0: None,
            t_span: None,
            form: FlowForm::EulerU,
            tolerances: Tolerances::default(),
            samples: None,
            t_max: None,
            seeded: Vec::new(),
            triples: 1000,
            isometry: None,
            g: None,
            exact: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub task: Task,
    #[serde(default = "default_lambda")]
    pub lambda: Vec<Frequency>,
    /// Descriptor object or bare kind name.
    #[serde(default)]
    pub metric: Option<Value>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: Params,
}

fn default_lambda() -> Vec<Frequency> {
    vec![Frequency::Int(1)]
}

impl Scenario {
    pub fn new(task: Task) -> Self {
        Self { task, lambda: default_lambda(), metric: None, seed: 0, params: Params::default() }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_json(&crate::read_file(path)?)
    }

    fn inputs(&self) -> Result<Vec<LatticeInput>, CliError> {
        self.lambda.iter().map(Frequency::to_input).collect()
    }

    pub fn spec(&self) -> Result<LambdaSpec, CliError> {
        let values = self.inputs()?.iter().map(LatticeInput::to_f64).collect();
        Ok(LambdaSpec::new(values)?)
    }

    pub fn descriptor(&self) -> Result<IsoDescriptor, CliError> {
        match &self.metric {
            None => Ok(IsoDescriptor::Identity),
            Some(Value::String(name)) => Ok(IsoDescriptor::parse(name)?),
            Some(v @ Value::Object(_)) => {
                serde_json::from_value(v.clone()).map_err(|e| CliError::Input(format!("metric descriptor: {e}")))
            }
            Some(other) => Err(CliError::Input(format!("metric must be a kind name or an object, got {other}"))),
        }
    }

    pub fn metric(&self) -> Result<Metric, CliError> {
        Ok(Metric::from_descriptor(&self.spec()?, &self.descriptor()?)?)
    }

    fn state(&self, spec: &LambdaSpec, s: &StateSpec, rng: &mut ChaCha8Rng) -> Result<AlgElem, CliError> {
        let x = match s {
            StateSpec::Coords(v) => AlgElem::new(v.clone()),
            StateSpec::Text(t) => parse_state(t, spec, rng)?,
        };
        if x.dim() != spec.dim() {
            return Err(CliError::Input(format!("initial state has {} coordinates, the algebra has {}", x.dim(), spec.dim())));
        }
        Ok(x)
    }

    fn t_span(&self) -> (f64, f64) {
        match (self.params.t_span, self.params.t_max) {
            (Some([a, b]), _) => (a, b),
            (None, Some(t)) => (0.0, t),
            (None, None) => (0.0, 10.0),
        }
    }

    fn isometry(&self, spec: &LambdaSpec) -> Result<CurvIsometry, CliError> {
        match &self.params.isometry {
            Some(v) => Ok(CurvIsometry::from_json(spec, &v.to_string())?),
            None => Ok(random_curv_isometry(spec, &mut ChaCha8Rng::seed_from_u64(self.seed), false)),
        }
    }

    fn probe_config(&self, spec: &LambdaSpec, samples: usize, t_max: f64) -> Result<ProbeConfig, CliError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let seeded = self
            .params
            .seeded
            .iter()
            .map(|s| self.state(spec, s, &mut rng).map(|x| x.as_slice().to_vec()))
            .collect::<Result<_, _>>()?;
        Ok(ProbeConfig {
            samples: self.params.samples.unwrap_or(samples),
            t_max: self.params.t_max.unwrap_or(t_max),
            seed: self.seed,
            tol: self.params.tolerances.clone(),
            seeded,
            threads: None,
        })
    }
}

/// `gamma1:c=1,rho=1[,t=0]`, `random`, or a comma separated coordinate list.
pub fn parse_state(text: &str, spec: &LambdaSpec, rng: &mut ChaCha8Rng) -> Result<AlgElem, CliError> {
    let t = text.trim();
    if let Some(args) = t.strip_prefix("gamma1:").or_else(|| (t == "gamma1").then_some("")) {
        if spec.n() != 1 {
            return Err(CliError::Input("gamma1 lives in dimension 4 (one frequency)".into()));
        }
        let (mut c, mut rho, mut t0) = (1.0, 1.0, 0.0);
        for kv in args.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Input(format!("expected key=value in `{kv}`")))?;
            let v: f64 = v.trim().parse().map_err(|e| CliError::Input(format!("gamma1 parameter `{kv}`: {e}")))?;
            match k.trim() {
                "c" => c = v,
                "rho" => rho = v,
                "t" => t0 = v,
                other => return Err(CliError::Input(format!("unknown gamma1 parameter `{other}`"))),
            }
        }
        return Ok(analytic_gamma1(c, rho, t0)?);
    }
    if t == "random" {
        return Ok(AlgElem::new(random_initial_state(spec, rng)));
    }
    let coords = t
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| CliError::Input(format!("state coordinate `{p}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AlgElem::new(coords))
}

/// Report plus an optional trajectory CSV.
pub struct Artifacts {
    pub report: Report,
    pub csv: Option<String>,
}

pub fn run(sc: &Scenario) -> Result<Artifacts, CliError> {
    let mut csv = None;
    let mut report = match sc.task {
        Task::AlgebraCheck => suite::algebra_check(&sc.spec()?, sc.seed, sc.params.triples)?,
        Task::MetricInfo => suite::metric_info(&sc.metric()?)?,
        Task::ConnectionReport => suite::connection_report(&sc.metric()?)?,
        Task::LocsymCheck => suite::locsym_check(&sc.metric()?)?,
        Task::GeodesicIntegrate => {
            let metric = sc.metric()?;
            let spec = metric.spec().clone();
            let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
            let x0 = match &sc.params.x0 {
                Some(s) => sc.state(&spec, s, &mut rng)?,
                None => return Err(CliError::Input("geodesic-integrate needs an initial state (x0)".into())),
            };
            let problem = FlowProblem::new(&metric, sc.params.form, x0, sc.t_span())
                .with_tolerances(sc.params.tolerances.clone());
            let (report, tr) = suite::geodesic_integrate(&problem)?;
            csv = Some(tr.to_csv(metric.algebra()));
            report
        }
        Task::CompletenessProbe => {
            let metric = sc.metric()?;
            suite::probe(&metric, &sc.probe_config(metric.spec(), 100, 100.0)?)?
        }
        Task::IsometryVerify => {
            let spec = sc.spec()?;
            suite::isometry_verify(&spec, &sc.isometry(&spec)?, sc.seed, sc.params.samples.unwrap_or(100))?
        }
        Task::IsometryDim => suite::isometry_dimension(&sc.spec()?),
        Task::IsometryPolar => polar_task(sc)?,
        Task::LatticeCheck => {
            let inputs = sc.inputs()?;
            if sc.params.exact {
                if let Some(j) = inputs.iter().position(|x| matches!(x, LatticeInput::Float(_))) {
                    return Err(CliError::Input(format!("lambda_{} is not an exact number", j + 1)));
                }
            }
            suite::lattice_check(&inputs)
        }
        Task::FullReport => {
            let metric = sc.metric()?;
            let cfg = sc.probe_config(metric.spec(), 20, 20.0)?;
            suite::full_report(&metric, sc.seed, &cfg)?
        }
    };
    report.insert("scenario", sc);
    Ok(Artifacts { report, csv })
}

fn polar_task(sc: &Scenario) -> Result<Report, CliError> {
    let spec = sc.spec()?;
    let iso = sc.isometry(&spec)?;
    let text = sc.params.g.as_deref().ok_or_else(|| CliError::Input("isometry polar needs a group element (g)".into()))?;
    let g = GroupElem::parse(text)?;
    let image = polar(&spec, &iso, &g)?;
    let mut r = Report::new("isometry-polar", &spec);
    match polar_via_log(&spec, &iso, &g) {
        Ok(via) => {
            r.check(Check::at_most("polar_closed_form", "𝒫_u = Exp ∘ U ∘ Log", image.distance(&via), suite::POLAR_TOL));
        }
        Err(e) => {
            r.insert("log_undefined", e.to_string());
        }
    }
    r.insert("g", &g);
    r.insert("image", &image);
    Ok(r)
}
