//! Randomised search for incomplete geodesics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrals::first_integrals;
use super::rk::{dopri5, Sampling, Status, Tolerances};
use super::{FlowForm, FlowSystem};
use crate::algebra::{LambdaSpec, E_MINUS1, E_ZERO};
use crate::error::{Error, Result};
use crate::metric::{completeness_criteria, CompletenessVerdict, Metric};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub samples: usize,
    pub t_max: f64,
    pub seed: u64,
    pub tol: Tolerances,
    /// Initial states used before any random draw.
    pub seeded: Vec<Vec<f64>>,
    /// Worker count; falls back to `OSCLAB_THREADS`, then rayon's default.
    pub threads: Option<usize>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { samples: 100, t_max: 100.0, seed: 0, tol: Tolerances::default(), seeded: Vec::new(), threads: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleOutcome {
    pub index: usize,
    pub direction: i8,
    pub seeded: bool,
    #[serde(flatten)]
    pub status: Status,
    pub t_end: f64,
    /// Largest relative first-integral drift; only meaningful for completed runs.
    pub max_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub samples: usize,
    pub t_max: f64,
    pub seed: u64,
    pub trajectories: usize,
    /// Samples that blew up in at least one time direction.
    pub blown_up_samples: usize,
    pub fraction_blown_up: f64,
    pub earliest_blowup: Option<f64>,
    pub max_drift_completed: f64,
    pub verdict: CompletenessVerdict,
    pub outcomes: Vec<SampleOutcome>,
}

/// Unit `k_λ`-norm on `V = span{e_j, ě_j}` plus uniform `[−1,1]` components on `e_{-1}`, `e_0`.
pub fn random_initial_state<R: Rng + ?Sized>(spec: &LambdaSpec, rng: &mut R) -> Vec<f64> {
    let n = spec.n();
    let mut x = vec![0.0; spec.dim()];
    loop {
        let mut q = 0.0;
        for k in 0..2 * n {
            let v: f64 = rng.sample(StandardNormal);
            x[2 + k] = v;
            q += v * v / spec.lambda(k % n);
        }
        if q > 1e-12 {
            let s = q.sqrt();
            x[2..].iter_mut().for_each(|v| *v /= s);
            break;
        }
    }
    x[E_MINUS1] = rng.random_range(-1.0..=1.0);
    x[E_ZERO] = rng.random_range(-1.0..=1.0);
    x
}

fn thread_count(cfg: &ProbeConfig) -> Option<usize> {
    cfg.threads.or_else(|| std::env::var("OSCLAB_THREADS").ok().and_then(|s| s.parse().ok())).filter(|&n| n > 0)
}

fn run_one(system: &FlowSystem, metric: &Metric, x0: &[f64], t1: f64, tol: &Tolerances) -> Result<(Status, f64, f64)> {
    let integrals = first_integrals(metric);
    let m = integrals.len();
    let mut start: Option<Vec<f64>> = None;
    let mut worst = vec![0.0f64; m];
    let mut mags = vec![0.0f64; m];
    let out = dopri5(|_, s, d| system.rhs_slice(s, d), 0.0, t1, x0, tol, &Sampling::EveryStep, |_, x| {
        let v = integrals.eval(x);
        let i0 = start.get_or_insert_with(|| v.clone());
        for k in 0..m {
            worst[k] = worst[k].max((v[k] - i0[k]).abs());
            mags[k] = mags[k].max(integrals.items[k].magnitude(x));
        }
    })?;
    let drift = (0..m).map(|k| worst[k] / mags[k].max(1e-300)).fold(0.0, f64::max);
    Ok((out.status, out.t_end, drift))
}

/// Integrates `samples` initial states forward and backward to `±t_max`.
///
/// Initial states are drawn sequentially from one seeded stream, so the
/// report is independent of the worker count.
pub fn completeness_probe(metric: &Metric, cfg: &ProbeConfig) -> Result<ProbeReport> {
    let dim = metric.dim();
    let system = FlowSystem::new(metric, FlowForm::EulerU)?;
    let total = cfg.samples.max(cfg.seeded.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut states = Vec::with_capacity(total);
    for i in 0..total {
        if let Some(s) = cfg.seeded.get(i) {
            if s.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: s.len() });
            }
            states.push((s.clone(), true));
        } else {
            states.push((random_initial_state(metric.spec(), &mut rng), false));
        }
    }
    let jobs: Vec<(usize, i8)> = (0..total).flat_map(|i| [(i, 1i8), (i, -1i8)]).collect();
    let work = || -> Vec<Result<SampleOutcome>> {
        jobs.par_iter()
            .map(|&(index, direction)| {
                let (x0, seeded) = &states[index];
                let (status, t_end, max_drift) = run_one(&system, metric, x0, direction as f64 * cfg.t_max, &cfg.tol)?;
                Ok(SampleOutcome { index, direction, seeded: *seeded, status, t_end, max_drift })
            })
            .collect()
    };
    let results = match thread_count(cfg) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut blown = vec![false; total];
    let mut earliest: Option<f64> = None;
    let mut max_drift_completed: f64 = 0.0;
    for o in &outcomes {
        if o.status.is_blowup() {
            blown[o.index] = true;
            let t = o.t_end.abs();
            earliest = Some(earliest.map_or(t, |e| e.min(t)));
        } else if o.status.is_completed() {
            max_drift_completed = max_drift_completed.max(o.max_drift);
        }
    }
    let blown_up_samples = blown.iter().filter(|&&b| b).count();
    Ok(ProbeReport {
        samples: total,
        t_max: cfg.t_max,
        seed: cfg.seed,
        trajectories: outcomes.len(),
        blown_up_samples,
        fraction_blown_up: if total == 0 { 0.0 } else { blown_up_samples as f64 / total as f64 },
        earliest_blowup: earliest,
        max_drift_completed,
        verdict: completeness_criteria(metric.form(), metric.u()),
        outcomes,
    })
}
