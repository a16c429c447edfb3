//! The oscillator group `G_λ = ℝ × ℝ × ℂⁿ` with product
//! `(t,s,z)·(t',s',z') = (t+t', s+s'+½ Σ Im(z̄_j e^{itλ_j} z'_j), z + e^{itλ} z')`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgElem, LambdaSpec};
use crate::error::{Error, Result};
use crate::flow::{dopri5, FlowForm, FlowSystem, Sampling, Status, Tolerances};
use crate::metric::Metric;

/// Below this `|θ/2|` the multiplier uses its Taylor series.
const SINC_SWITCH: f64 = 1e-4;
/// Below this `|θ|` the s-correction `(θ − sin θ)/θ²` uses its Taylor series.
const SCORR_SWITCH: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElem {
    pub t: f64,
    pub s: f64,
    pub z: Vec<Complex64>,
}

impl GroupElem {
    pub fn new(t: f64, s: f64, z: Vec<Complex64>) -> Self {
        Self { t, s, z }
    }

    pub fn identity(n: usize) -> Self {
        Self { t: 0.0, s: 0.0, z: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// Coordinates in the algebra layout `(t, s, Re z, Im z)`.
    pub fn to_coords(&self) -> Vec<f64> {
        let mut v = vec![self.t, self.s];
        v.extend(self.z.iter().map(|c| c.re));
        v.extend(self.z.iter().map(|c| c.im));
        v
    }

    pub fn from_coords(v: &[f64]) -> Result<Self> {
        if v.len() < 2 || !v.len().is_multiple_of(2) {
            return Err(Error::Parse(format!("group coordinates need 2n+2 entries, got {}", v.len())));
        }
        let n = (v.len() - 2) / 2;
        let z = (0..n).map(|j| Complex64::new(v[2 + j], v[2 + n + j])).collect();
        Ok(Self { t: v[0], s: v[1], z })
    }

    /// Parses `t,s,re_1,im_1,…,re_n,im_n`.
    pub fn parse(text: &str) -> Result<Self> {
        let vals = text
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| Error::Parse(format!("group element `{p}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() < 2 || vals.len() % 2 != 0 {
            return Err(Error::Parse("group element must read t,s followed by re,im pairs".into()));
        }
        let z = vals[2..].chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        Ok(Self { t: vals[0], s: vals[1], z })
    }

    /// Max-abs coordinate distance.
    pub fn distance(&self, other: &GroupElem) -> f64 {
        let dz = self.z.iter().zip(&other.z).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        (self.t - other.t).abs().max((self.s - other.s).abs()).max(dz)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.s.is_finite() && self.z.iter().all(|c| c.is_finite())
    }
}

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}", self.t, self.s)?;
        for c in &self.z {
            write!(f, ", {}{:+}i", c.re, c.im)?;
        }
        write!(f, ")")
    }
}

fn check(spec: &LambdaSpec, g: &GroupElem) -> Result<()> {
    if g.n() != spec.n() {
        return Err(Error::DimensionMismatch { expected: spec.n(), found: g.n() });
    }
    Ok(())
}

/// `e^{iθ}`.
pub(crate) fn phase(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

pub fn g_mul(spec: &LambdaSpec, a: &GroupElem, b: &GroupElem) -> Result<GroupElem> {
    check(spec, a)?;
    check(spec, b)?;
    let mut s = a.s + b.s;
    let mut z = Vec::with_capacity(a.n());
    for (j, (za, zb)) in a.z.iter().zip(&b.z).enumerate() {
        let w = phase(a.t * spec.lambda(j)) * zb;
        s += 0.5 * (za.conj() * w).im;
        z.push(za + w);
    }
    Ok(GroupElem { t: a.t + b.t, s, z })
}

pub fn g_inv(spec: &LambdaSpec, a: &GroupElem) -> Result<GroupElem> {
    check(spec, a)?;
    let z = a.z.iter().enumerate().map(|(j, c)| -phase(-a.t * spec.lambda(j)) * c).collect();
    Ok(GroupElem { t: -a.t, s: -a.s, z })
}

/// `(e^{iθ} − 1)/(iθ) = e^{iθ/2} sin(θ/2)/(θ/2)`.
pub fn multiplier(theta: f64) -> Complex64 {
    let h = 0.5 * theta;
    let sinc = if h.abs() < SINC_SWITCH {
        let h2 = h * h;
        1.0 - h2 / 6.0 + h2 * h2 / 120.0
    } else {
        h.sin() / h
    };
    phase(h) * sinc
}

/// `(θ − sin θ)/θ²`.
pub fn s_correction(theta: f64) -> f64 {
    if theta.abs() < SCORR_SWITCH {
        // Σ_{k≥1} (−1)^{k+1} θ^{2k−1} / (2k+1)!
        let t2 = theta * theta;
        let mut term = theta / 6.0;
        let mut sum = term;
        for k in 2..=9u32 {
            let k = k as f64;
            term *= -t2 / ((2.0 * k) * (2.0 * k + 1.0));
            sum += term;
        }
        sum
    } else {
        (theta - theta.sin()) / (theta * theta)
    }
}

/// Group exponential of `x = (t, s, z)`, which is also the geodesic exponential of `k_λ`.
pub fn g_exp(spec: &LambdaSpec, x: &AlgElem) -> Result<GroupElem> {
    if x.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: x.dim() });
    }
    let v = GroupElem::from_coords(x.as_slice())?;
    let mut s = v.s;
    let mut z = Vec::with_capacity(v.n());
    for (j, c) in v.z.iter().enumerate() {
        let lam = spec.lambda(j);
        let theta = v.t * lam;
        s += 0.5 * c.norm_sqr() * s_correction(theta);
        z.push(multiplier(theta) * c);
    }
    Ok(GroupElem { t: v.t, s, z })
}

/// Inverse of [`g_exp`] on `|tλ_j| < 2π`.
pub fn g_log(spec: &LambdaSpec, g: &GroupElem) -> Result<AlgElem> {
    check(spec, g)?;
    let n = g.n();
    let mut z = Vec::with_capacity(n);
    let mut s = g.s;
    for (j, c) in g.z.iter().enumerate() {
        let lam = spec.lambda(j);
        let theta = g.t * lam;
        if theta.abs() >= TAU {
            return Err(Error::LogDomain { block: spec.block_of(j), value: theta });
        }
        let w = c / multiplier(theta);
        s -= 0.5 * w.norm_sqr() * s_correction(theta);
        z.push(w);
    }
    Ok(AlgElem::new(GroupElem { t: g.t, s, z }.to_coords()))
}

/// `d(L_σ)_ε x`: the left-invariant field of `x` evaluated at `σ`, in group coordinates.
pub fn dl(spec: &LambdaSpec, sigma: &GroupElem, x: &AlgElem) -> Result<Vec<f64>> {
    check(spec, sigma)?;
    let xi = GroupElem::from_coords(x.as_slice())?;
    let mut s = xi.s;
    let mut z = Vec::with_capacity(xi.n());
    for (j, (zs, c)) in sigma.z.iter().zip(&xi.z).enumerate() {
        let w = phase(sigma.t * spec.lambda(j)) * c;
        s += 0.5 * (zs.conj() * w).im;
        z.push(w);
    }
    Ok(GroupElem { t: xi.t, s, z }.to_coords())
}

/// Geodesic of `k_u` from the identity with initial velocity `x`, integrated to time `tau`
/// together with its body velocity.
pub fn geodesic_exponential(metric: &Metric, x: &AlgElem, tau: f64, tol: &Tolerances) -> Result<GroupElem> {
    let spec = metric.spec().clone();
    let system = FlowSystem::new(metric, FlowForm::Body)?;
    let d = metric.dim();
    let mut y0 = GroupElem::identity(spec.n()).to_coords();
    y0.extend_from_slice(x.as_slice());
    let mut last = y0.clone();
    let out = dopri5(
        |_, y, dy| {
            let sigma = GroupElem::from_coords(&y[..d]).expect("even length");
            let v = AlgElem::new(y[d..].to_vec());
            let sd = dl(&spec, &sigma, &v).expect("dimensions agree");
            dy[..d].copy_from_slice(&sd);
            system.rhs_slice(&y[d..], &mut dy[d..]);
        },
        0.0,
        tau,
        &y0,
        tol,
        &Sampling::EveryStep,
        |_, y| last.copy_from_slice(y),
    )?;
    if out.status != Status::Completed {
        return Err(Error::Domain(format!("geodesic integration stopped early: {}", out.status.label())));
    }
    GroupElem::from_coords(&last[..d])
}
