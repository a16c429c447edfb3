//! Embedded Dormand–Prince 5(4) integrator with PI step control.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integrator settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub blowup_threshold: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_min: 1e-13, blowup_threshold: 1e8, max_steps: 2_000_000 }
    }
}

/// How an integration ended.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Completed,
    /// The state norm exceeded the blow-up threshold at `t`.
    Blowup { t: f64 },
    /// The controller asked for a step below `h_min` at `t`.
    StepUnderflow { t: f64, norm_increasing: bool },
    /// `max_steps` accepted steps were taken before reaching the end.
    StepLimit { t: f64 },
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Completed => "completed",
            Status::Blowup { .. } => "blowup",
            Status::StepUnderflow { .. } => "step_underflow",
            Status::StepLimit { .. } => "step_limit",
        }
    }

    /// Blow-up, or step underflow with a growing norm.
    pub fn is_blowup(&self) -> bool {
        matches!(self, Status::Blowup { .. } | Status::StepUnderflow { norm_increasing: true, .. })
    }

    pub fn is_completed(&self) -> bool {
        matches!(self, Status::Completed)
    }

    /// Time at which the run stopped early, if it did.
    pub fn t_star(&self) -> Option<f64> {
        match *self {
            Status::Completed => None,
            Status::Blowup { t } | Status::StepUnderflow { t, .. } | Status::StepLimit { t } => Some(t),
        }
    }
}

/// Where the observer is called.
#[derive(Clone, Debug, PartialEq)]
pub enum Sampling {
    EveryStep,
    /// Steps are shortened to land on each grid point inside the time span.
    Grid(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub t_end: f64,
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const ALPHA: f64 = 0.17;
const BETA: f64 = 0.04;

fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn scaled_rms(v: &[f64], y: &[f64], tol: &Tolerances) -> f64 {
    let s: f64 = v.iter().zip(y).map(|(a, b)| (a / (tol.atol + tol.rtol * b.abs())).powi(2)).sum();
    (s / v.len().max(1) as f64).sqrt()
}

fn eval<F>(f: &mut F, t: f64, y: &[f64], out: &mut [f64]) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    f(t, y, out);
    if out.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite { t });
    }
    Ok(())
}

fn initial_step<F>(f: &mut F, t0: f64, y0: &[f64], f0: &[f64], span: f64, dir: f64, tol: &Tolerances) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let d0 = scaled_rms(y0, y0, tol);
    let d1 = scaled_rms(f0, y0, tol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, k)| y + dir * h0 * k).collect();
    let mut f1 = vec![0.0; y0.len()];
    eval(f, t0 + dir * h0, &y1, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scaled_rms(&diff, y0, tol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Integrates `ẏ = f(t, y)` from `t0` to `t1` (either direction).
///
/// `observe` sees the initial state, every accepted step or grid point, and
/// the final state. A NaN produced by `f` aborts with [`Error::NonFinite`].
pub fn dopri5<F, O>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    tol: &Tolerances,
    sampling: &Sampling,
    mut observe: O,
) -> Result<Outcome>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(f64, &[f64]),
{
    let n = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut y = y0.to_vec();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: t0 });
    }
    let mut k = vec![vec![0.0; n]; 7];
    eval(&mut f, t0, &y, &mut k[0])?;
    observe(t0, &y);
    let mut t = t0;
    let mut out = Outcome { status: Status::Completed, t_end: t0, accepted: 0, rejected: 0 };
    if t0 == t1 {
        return Ok(out);
    }

    let grid: Vec<f64> = match sampling {
        Sampling::EveryStep => Vec::new(),
        Sampling::Grid(g) => {
            let mut g: Vec<f64> = g.iter().copied().filter(|&s| (s - t0) * dir > 0.0 && (s - t1) * dir <= 0.0).collect();
            g.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
            g.dedup();
            g
        }
    };
    let every_step = grid.is_empty() && matches!(sampling, Sampling::EveryStep);
    let mut next_grid = 0;

    let mut h = dir * initial_step(&mut f, t0, &y, &k[0], (t1 - t0).abs(), dir, tol)?;
    let mut err_prev: f64 = 1e-4;
    let mut last_rejected = false;
    let mut last_observed = t0;
    let mut prev_norm = norm(&y);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut errv = vec![0.0; n];

    loop {
        if out.accepted >= tol.max_steps {
            out.status = Status::StepLimit { t };
            break;
        }
        let target = if next_grid < grid.len() { grid[next_grid] } else { t1 };
        let mut h_try = h;
        let mut clipped = false;
        if (t + h_try - target) * dir >= 0.0 {
            h_try = target - t;
            clipped = true;
        }

        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h_try * A[s][j] * kj[i];
                }
                ytmp[i] = acc;
            }
            eval(&mut f, t + C[s] * h_try, &ytmp, &mut k[s])?;
            if s == 6 {
                ynew.copy_from_slice(&ytmp);
            }
        }
        for i in 0..n {
            errv[i] = h_try * E.iter().zip(&k).map(|(e, kj)| e * kj[i]).sum::<f64>();
        }
        let err = {
            let s: f64 = (0..n)
                .map(|i| (errv[i] / (tol.atol + tol.rtol * y[i].abs().max(ynew[i].abs()))).powi(2))
                .sum();
            (s / n.max(1) as f64).sqrt()
        };

        if err.is_finite() && err <= 1.0 {
            t = if clipped { target } else { t + h_try };
            y.copy_from_slice(&ynew);
            k.swap(0, 6);
            out.accepted += 1;

            let hit_grid = clipped && next_grid < grid.len();
            if hit_grid {
                next_grid += 1;
            }
            if every_step || hit_grid {
                observe(t, &y);
                last_observed = t;
            }

            let nrm = norm(&y);
            if nrm > tol.blowup_threshold {
                out.status = Status::Blowup { t };
                break;
            }
            prev_norm = nrm;
            if (t1 - t) * dir <= 0.0 {
                break;
            }

            let e = err.max(1e-10);
            let mut fac = SAFETY * e.powf(-ALPHA) * err_prev.powf(BETA);
            fac = fac.clamp(FAC_MIN, if last_rejected { 1.0 } else { FAC_MAX });
            let proposal = h_try * fac;
            if !(clipped && fac >= 1.0 && proposal.abs() < h.abs()) {
                h = proposal;
            }
            err_prev = err.max(1e-4);
            last_rejected = false;
        } else {
            let fac = if err.is_finite() { (SAFETY * err.powf(-0.2)).max(FAC_MIN) } else { FAC_MIN };
            h = h_try * fac;
            out.rejected += 1;
            last_rejected = true;
        }

        if h.abs() < tol.h_min {
            out.status = Status::StepUnderflow { t, norm_increasing: norm(&y) > prev_norm || last_rejected };
            break;
        }
    }
    if last_observed != t {
        observe(t, &y);
    }
    out.t_end = t;
    Ok(out)
}
