//! Orthogonal maps of `(𝒢_λ, k_λ)` preserving the curvature, their polar
//! isometries `𝒫_u = Exp ∘ u ∘ Log`, and the identity component of the
//! isometry group `G_λ ⋊ O_R`.
//!
//! A block `V_i ≅ ℂ^{r_i}` carries real coordinates `(Re z, Im z)` of length
//! `2r_i`; `u_i` is a real orthogonal matrix in those coordinates and the
//! inner product is `k_i(v,w) = (v·w)/λ_i`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::group::{g_exp, g_inv, g_log, g_mul, phase, GroupElem};
use crate::algebra::{check_index, e_index, AlgElem, Block, LambdaSpec, OscillatorAlgebra, E_MINUS1, E_ZERO};
use crate::error::{Error, Result};
use crate::linalg::max_abs;

/// Orthogonality tolerance for `u_i` and for recovered matrices.
pub const ISOMETRY_TOL: f64 = 1e-10;

/// `(v_i, u_i)` on one frequency block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockIso {
    /// `(Re v, Im v)`, length `2r`.
    pub v: DVector<f64>,
    /// Orthogonal `2r × 2r`.
    pub u: DMatrix<f64>,
}

impl BlockIso {
    pub fn identity(r: usize) -> Self {
        Self { v: DVector::zeros(2 * r), u: DMatrix::identity(2 * r, 2 * r) }
    }

    pub fn r(&self) -> usize {
        self.v.len() / 2
    }
}

/// An element `(ρ, (v_i, u_i))` of `O_R(𝒢_λ, k_λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvIsometry {
    pub rho: i8,
    pub blocks: Vec<BlockIso>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockJson {
    v: Vec<[f64; 2]>,
    u: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurvIsometryJson {
    rho: i8,
    blocks: Vec<BlockJson>,
}

/// Real rotation `R(θ)` (multiplication by `e^{iθ}`) on `ℂ^r`.
pub fn rotation(r: usize, theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    let mut m = DMatrix::zeros(2 * r, 2 * r);
    for k in 0..r {
        m[(k, k)] = c;
        m[(r + k, r + k)] = c;
        m[(k, r + k)] = -s;
        m[(r + k, k)] = s;
    }
    m
}

/// Multiplication by `i` on `ℂ^r`.
pub fn complex_structure(r: usize) -> DMatrix<f64> {
    rotation(r, std::f64::consts::FRAC_PI_2).map(|v| v.round())
}

fn block_real(z: &[Complex64]) -> DVector<f64> {
    let r = z.len();
    DVector::from_fn(2 * r, |k, _| if k < r { z[k].re } else { z[k - r].im })
}

fn block_complex(v: &DVector<f64>) -> Vec<Complex64> {
    let r = v.len() / 2;
    (0..r).map(|k| Complex64::new(v[k], v[r + k])).collect()
}

impl CurvIsometry {
    pub fn identity(spec: &LambdaSpec) -> Self {
        Self { rho: 1, blocks: spec.blocks().iter().map(|b| BlockIso::identity(b.multiplicity)).collect() }
    }

    /// Validates shapes, `ρ = ±1` and orthogonality of every `u_i`.
    pub fn new(spec: &LambdaSpec, rho: i8, blocks: Vec<BlockIso>) -> Result<Self> {
        if rho != 1 && rho != -1 {
            return Err(Error::InvalidIsometry(format!("rho must be +1 or -1, got {rho}")));
        }
        if blocks.len() != spec.blocks().len() {
            return Err(Error::InvalidIsometry(format!(
                "expected {} blocks, got {}",
                spec.blocks().len(),
                blocks.len()
            )));
        }
        for (i, (b, blk)) in blocks.iter().zip(spec.blocks()).enumerate() {
            let m = 2 * blk.multiplicity;
            if b.v.len() != m || b.u.nrows() != m || b.u.ncols() != m {
                return Err(Error::InvalidIsometry(format!("block {i} must have v of length {m} and u of size {m}x{m}")));
            }
            let res = max_abs(&(b.u.transpose() * &b.u - DMatrix::identity(m, m)));
            if res > ISOMETRY_TOL {
                return Err(Error::InvalidIsometry(format!("block {i}: u is not orthogonal (residual {res:.3e})")));
            }
        }
        Ok(Self { rho, blocks })
    }

    pub fn from_json(spec: &LambdaSpec, text: &str) -> Result<Self> {
        let raw: CurvIsometryJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("curvature isometry: {e}")))?;
        let mut blocks = Vec::with_capacity(raw.blocks.len());
        for (i, b) in raw.blocks.into_iter().enumerate() {
            let r = b.v.len();
            let mut v = DVector::zeros(2 * r);
            for (k, [re, im]) in b.v.iter().enumerate() {
                v[k] = *re;
                v[r + k] = *im;
            }
            if b.u.len() != 2 * r || b.u.iter().any(|row| row.len() != 2 * r) {
                return Err(Error::InvalidIsometry(format!("block {i}: u must be {0}x{0}", 2 * r)));
            }
            let u = DMatrix::from_fn(2 * r, 2 * r, |a, c| b.u[a][c]);
            blocks.push(BlockIso { v, u });
        }
        Self::new(spec, raw.rho, blocks)
    }

    pub fn to_json(&self) -> String {
        let raw = CurvIsometryJson {
            rho: self.rho,
            blocks: self
                .blocks
                .iter()
                .map(|b| {
                    let r = b.r();
                    BlockJson {
                        v: (0..r).map(|k| [b.v[k], b.v[r + k]]).collect(),
                        u: b.u.row_iter().map(|row| row.iter().copied().collect()).collect(),
                    }
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("plain data serialises")
    }

    /// `α = −(ρ/2) Σ k_i(v_i, v_i)`.
    pub fn alpha(&self, spec: &LambdaSpec) -> f64 {
        -0.5 * self.rho as f64
            * self.blocks.iter().zip(spec.blocks()).map(|(b, blk)| b.v.norm_squared() / blk.value).sum::<f64>()
    }

    /// The induced linear map `U` of the algebra.
    pub fn to_matrix(&self, spec: &LambdaSpec) -> DMatrix<f64> {
        let n = spec.n();
        let dim = spec.dim();
        let rho = self.rho as f64;
        let mut m = DMatrix::zeros(dim, dim);
        m[(E_MINUS1, E_MINUS1)] = rho;
        m[(E_ZERO, E_MINUS1)] = self.alpha(spec);
        m[(E_ZERO, E_ZERO)] = rho;
        for (b, blk) in self.blocks.iter().zip(spec.blocks()) {
            let idx = block_indices(n, blk);
            for (a, &ia) in idx.iter().enumerate() {
                m[(ia, E_MINUS1)] = b.v[a];
                // U w = −ρ k(u w, v) e_0 + u w, w a basis vector of V_i
                let col = b.u.column(a);
                m[(E_ZERO, ia)] = -rho * col.dot(&b.v) / blk.value;
                for (c, &ic) in idx.iter().enumerate() {
                    m[(ic, ia)] = col[c];
                }
            }
        }
        m
    }

    /// Recovers `(ρ, v_i, u_i)` from a matrix of the induced form.
    pub fn from_matrix(spec: &LambdaSpec, m: &DMatrix<f64>) -> Result<Self> {
        let n = spec.n();
        let dim = spec.dim();
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: m.nrows() });
        }
        let rho_f = m[(E_ZERO, E_ZERO)];
        let rho = if (rho_f - 1.0).abs() <= ISOMETRY_TOL {
            1
        } else if (rho_f + 1.0).abs() <= ISOMETRY_TOL {
            -1
        } else {
            return Err(Error::InvalidIsometry(format!("U(e_0) = {rho_f} e_0 + ..., expected ±e_0")));
        };
        let blocks = spec
            .blocks()
            .iter()
            .map(|blk| {
                let idx = block_indices(n, blk);
                let v = DVector::from_fn(idx.len(), |a, _| m[(idx[a], E_MINUS1)]);
                let u = DMatrix::from_fn(idx.len(), idx.len(), |c, a| m[(idx[c], idx[a])]);
                BlockIso { v, u }
            })
            .collect();
        let iso = Self::new(spec, rho, blocks)?;
        let res = max_abs(&(iso.to_matrix(spec) - m));
        if res > ISOMETRY_TOL {
            return Err(Error::InvalidIsometry(format!("matrix is not of the induced form (residual {res:.3e})")));
        }
        Ok(iso)
    }

    /// `(v_a + u_a v_b, u_a u_b)`, the composition `self ∘ other` for `ρ = 1`.
    pub fn compose(&self, other: &CurvIsometry) -> CurvIsometry {
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| BlockIso { v: &a.v + &a.u * &b.v, u: &a.u * &b.u })
            .collect();
        CurvIsometry { rho: self.rho * other.rho, blocks }
    }

    /// `(−u_iᵀ v_i, u_iᵀ)` for `ρ = 1`.
    pub fn inverse(&self) -> CurvIsometry {
        let blocks = self.blocks.iter().map(|b| BlockIso { v: -(b.u.transpose() * &b.v), u: b.u.transpose() }).collect();
        CurvIsometry { rho: self.rho, blocks }
    }

    /// `max(|v_i|, |u_i − Id|)` over blocks.
    pub fn distance_from_identity(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.v.amax().max(max_abs(&(&b.u - DMatrix::identity(b.u.nrows(), b.u.ncols())))))
            .fold(((self.rho - 1) as f64).abs(), f64::max)
    }

    /// Max-abs distance in `(ρ, v_i, u_i)` coordinates.
    pub fn distance(&self, other: &CurvIsometry) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (&a.v - &b.v).amax().max(max_abs(&(&a.u - &b.u))))
            .fold(((self.rho - other.rho) as f64).abs(), f64::max)
    }

    /// Whether every `u_i` commutes with multiplication by `i`.
    pub fn is_unitary(&self) -> bool {
        self.blocks.iter().all(|b| {
            let j = complex_structure(b.r());
            max_abs(&(&j * &b.u - &b.u * &j)) <= ISOMETRY_TOL
        })
    }
}

/// Algebra indices of a block in `(Re, Im)` order: `e_j` then `ě_j`.
pub fn block_indices(n: usize, blk: &Block) -> Vec<usize> {
    let re = (0..blk.multiplicity).map(|k| e_index(blk.start + k));
    let im = (0..blk.multiplicity).map(|k| check_index(n, blk.start + k));
    re.chain(im).collect()
}

fn block_z(g: &GroupElem, blk: &Block) -> DVector<f64> {
    block_real(&g.z[blk.start..blk.start + blk.multiplicity])
}

/// `max |U[x,[y,z]] − [Ux,[Uy,Uz]]|` over basis triples.
pub fn triple_bracket_preserving(algebra: &OscillatorAlgebra, u: &DMatrix<f64>) -> f64 {
    let d = algebra.dim();
    let cols: Vec<Vec<f64>> = (0..d).map(|a| u.column(a).iter().copied().collect()).collect();
    let mut worst: f64 = 0.0;
    for b in 0..d {
        for c in 0..d {
            let bc = algebra.bracket_basis(b, c);
            let mut ubc = vec![0.0; d];
            algebra.bracket_acc(&cols[b], &cols[c], &mut ubc);
            for (a, ua) in cols.iter().enumerate() {
                let mut lhs_in = vec![0.0; d];
                algebra.bracket_acc(AlgElem::basis(d, a).as_slice(), bc.as_slice(), &mut lhs_in);
                let lhs = u * DVector::from_vec(lhs_in);
                let mut rhs = vec![0.0; d];
                algebra.bracket_acc(ua, &ubc, &mut rhs);
                worst = lhs.iter().zip(&rhs).map(|(p, q)| (p - q).abs()).fold(worst, f64::max);
            }
        }
    }
    worst
}

/// `max |UᵀGU − G|`.
pub fn orthogonality_residual(gram: &DMatrix<f64>, u: &DMatrix<f64>) -> f64 {
    max_abs(&(u.transpose() * gram * u - gram))
}

/// Closed-form polar isometry `𝒫_u`, global in `T`.
pub fn polar(spec: &LambdaSpec, iso: &CurvIsometry, g: &GroupElem) -> Result<GroupElem> {
    if g.n() != spec.n() {
        return Err(Error::DimensionMismatch { expected: spec.n(), found: g.n() });
    }
    if iso.rho == -1 {
        // (−1, v, u) = (1, −v, u) ∘ F with 𝒫_F(T,S,Z) = (−T, −S, e^{−iTλ} Z)
        let z = g.z.iter().enumerate().map(|(j, c)| phase(-g.t * spec.lambda(j)) * c).collect();
        let flipped = GroupElem { t: -g.t, s: -g.s, z };
        let plus = CurvIsometry {
            rho: 1,
            blocks: iso.blocks.iter().map(|b| BlockIso { v: -&b.v, u: b.u.clone() }).collect(),
        };
        return polar(spec, &plus, &flipped);
    }
    let t = g.t;
    let mut s = g.s;
    let mut z = g.z.clone();
    for (b, blk) in iso.blocks.iter().zip(spec.blocks()) {
        let r = blk.multiplicity;
        let lam = blk.value;
        let half = t * lam / 2.0;
        let rp = rotation(r, half);
        let urz = &b.u * rotation(r, -half) * block_z(g, blk);
        let a = &b.v * ((t * lam).sin() / (2.0 * lam)) + &urz * half.cos();
        s -= b.v.dot(&a) / lam;
        let zn = &rp * &b.v * (2.0 / lam * half.sin()) + &rp * urz;
        z[blk.start..blk.start + r].copy_from_slice(&block_complex(&zn));
    }
    Ok(GroupElem { t, s, z })
}

/// `Exp ∘ U ∘ Log`; agrees with [`polar`] wherever `Log` is defined.
pub fn polar_via_log(spec: &LambdaSpec, iso: &CurvIsometry, g: &GroupElem) -> Result<GroupElem> {
    g_exp(spec, &g_log(spec, g)?.mapped(&iso.to_matrix(spec)))
}

/// `u·σ = 𝒫_u(σ)`.
pub fn act_u_on_sigma(spec: &LambdaSpec, iso: &CurvIsometry, sigma: &GroupElem) -> Result<GroupElem> {
    polar(spec, iso, sigma)
}

/// `σ·u`: `u_i ↦ R(−tλ/2) u_i R(tλ/2)`, `v_i ↦ v_i + (λ/2) R(−tλ/2) [J, u_i] R(−tλ/2) z_i`.
pub fn act_sigma_on_u(spec: &LambdaSpec, sigma: &GroupElem, iso: &CurvIsometry) -> Result<CurvIsometry> {
    if iso.rho != 1 {
        return Err(Error::InvalidIsometry("group actions are defined on the identity component (rho = 1)".into()));
    }
    if sigma.n() != spec.n() {
        return Err(Error::DimensionMismatch { expected: spec.n(), found: sigma.n() });
    }
    let blocks = iso
        .blocks
        .iter()
        .zip(spec.blocks())
        .map(|(b, blk)| {
            let r = blk.multiplicity;
            let half = sigma.t * blk.value / 2.0;
            let (rm, rp) = (rotation(r, -half), rotation(r, half));
            let j = complex_structure(r);
            let comm = &j * &b.u - &b.u * &j;
            let v = &b.v + &rm * comm * &rm * block_z(sigma, blk) * (blk.value / 2.0);
            BlockIso { v, u: &rm * &b.u * rp }
        })
        .collect();
    Ok(CurvIsometry { rho: 1, blocks })
}

/// An element `(σ, u)` of the identity component of the isometry group.
#[derive(Clone, Debug, PartialEq)]
pub struct IsomElem {
    pub sigma: GroupElem,
    pub iso: CurvIsometry,
}

impl IsomElem {
    pub fn identity(spec: &LambdaSpec) -> Self {
        Self { sigma: GroupElem::identity(spec.n()), iso: CurvIsometry::identity(spec) }
    }

    /// `g ↦ σ · 𝒫_u(g)`.
    pub fn apply(&self, spec: &LambdaSpec, g: &GroupElem) -> Result<GroupElem> {
        g_mul(spec, &self.sigma, &polar(spec, &self.iso, g)?)
    }

    /// Max-abs distance in `(σ, v_i, u_i)` coordinates.
    pub fn distance(&self, other: &IsomElem) -> f64 {
        let d = self.iso.blocks.iter().zip(&other.iso.blocks).map(|(a, b)| {
            (&a.v - &b.v).amax().max(max_abs(&(&a.u - &b.u)))
        });
        d.fold(self.sigma.distance(&other.sigma), f64::max)
    }
}

/// `(σ,u)·(σ',u') = (σ (u·σ'), (σ'·u) ∘ u')`.
pub fn isom_mul(spec: &LambdaSpec, a: &IsomElem, b: &IsomElem) -> Result<IsomElem> {
    let sigma = g_mul(spec, &a.sigma, &act_u_on_sigma(spec, &a.iso, &b.sigma)?)?;
    let iso = act_sigma_on_u(spec, &b.sigma, &a.iso)?.compose(&b.iso);
    Ok(IsomElem { sigma, iso })
}

/// `(σ,u)⁻¹ = (u⁻¹·σ⁻¹, σ⁻¹·u⁻¹)`.
pub fn isom_inv(spec: &LambdaSpec, a: &IsomElem) -> Result<IsomElem> {
    let ui = a.iso.inverse();
    let si = g_inv(spec, &a.sigma)?;
    Ok(IsomElem { sigma: act_u_on_sigma(spec, &ui, &si)?, iso: act_sigma_on_u(spec, &si, &ui)? })
}

/// Isotropy part of `(σ₁,u₁)(σ₂,Id)(σ₁,u₁)⁻¹`; `(0, Id)` whenever `G_λ` is normal.
pub fn conjugation_projection(spec: &LambdaSpec, a: &IsomElem, sigma2: &GroupElem) -> Result<CurvIsometry> {
    let pure = IsomElem { sigma: sigma2.clone(), iso: CurvIsometry::identity(spec) };
    let c = isom_mul(spec, &isom_mul(spec, a, &pure)?, &isom_inv(spec, a)?)?;
    Ok(c.iso)
}
