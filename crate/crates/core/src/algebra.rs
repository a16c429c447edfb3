//! The oscillator algebra attached to a frequency vector λ.
//!
//! Coordinates are always taken in the ordered basis
//! `(e_{-1}, e_0, e_1, …, e_n, ě_1, …, ě_n)`, so index 0 is `e_{-1}`, index 1
//! is the central element `e_0`, indices `2..2+n` are the `e_j` and
//! `2+n..2+2n` the `ě_j`. Every matrix in the crate uses this ordering.
//!
//! The only non-zero brackets of basis vectors are
//! `[e_{-1}, e_j] = λ_j ě_j`, `[e_{-1}, ě_j] = -λ_j e_j` and `[e_j, ě_j] = e_0`.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RANK_TOL};

/// A run of equal frequencies `λ_k = … = λ_{k+r-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Block {
    pub value: f64,
    pub multiplicity: usize,
    /// Zero-based index of the first frequency of the block.
    pub start: usize,
}

/// The frequency vector `0 < λ_1 ≤ … ≤ λ_n` with its multiplicity blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LambdaJson", into = "LambdaJson")]
pub struct LambdaSpec {
    lambdas: Vec<f64>,
    #[serde(skip)]
    blocks: Vec<Block>,
}

#[derive(Serialize, Deserialize)]
struct LambdaJson {
    lambda: Vec<f64>,
}

impl TryFrom<LambdaJson> for LambdaSpec {
    type Error = Error;
    fn try_from(value: LambdaJson) -> Result<Self> {
        LambdaSpec::new(value.lambda)
    }
}

impl From<LambdaSpec> for LambdaJson {
    fn from(value: LambdaSpec) -> Self {
        LambdaJson { lambda: value.lambdas }
    }
}

impl LambdaSpec {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidLambda("at least one frequency is required".into()));
        }
        for (j, &l) in lambdas.iter().enumerate() {
            if !l.is_finite() || l <= 0.0 {
                return Err(Error::InvalidLambda(format!(
                    "lambda_{} = {} is not a positive finite number",
                    j + 1,
                    l
                )));
            }
            if j > 0 && l < lambdas[j - 1] {
                return Err(Error::InvalidLambda(format!(
                    "frequencies must be non-decreasing: lambda_{} = {} < lambda_{} = {}",
                    j + 1,
                    l,
                    j,
                    lambdas[j - 1]
                )));
            }
        }
        let mut blocks: Vec<Block> = Vec::new();
        for (j, &l) in lambdas.iter().enumerate() {
            match blocks.last_mut() {
                Some(b) if b.value == l => b.multiplicity += 1,
                _ => blocks.push(Block { value: l, multiplicity: 1, start: j }),
            }
        }
        Ok(Self { lambdas, blocks })
    }

    /// Parses `{"lambda": [..]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parses a comma separated list such as `1,2,3`.
    pub fn parse_list(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad frequency `{}`: {}", s.trim(), e)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda(&self, j: usize) -> f64 {
        self.lambdas[j]
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Number of frequencies.
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// Dimension `2n + 2` of the algebra.
    pub fn dim(&self) -> usize {
        2 * self.n() + 2
    }

    /// Block containing frequency `j` (zero-based).
    pub fn block_of(&self, j: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| j >= b.start && j < b.start + b.multiplicity)
            .expect("frequency index in range")
    }

    pub fn strictly_increasing(&self) -> bool {
        self.blocks.len() == self.n()
    }
}

/// Index of `e_{-1}`.
pub const E_MINUS1: usize = 0;
/// Index of the central element `e_0`.
pub const E_ZERO: usize = 1;

/// Index of `e_{j+1}` for zero-based `j`.
#[inline]
pub fn e_index(j: usize) -> usize {
    2 + j
}

/// Index of `ě_{j+1}` for zero-based `j`.
#[inline]
pub fn check_index(n: usize, j: usize) -> usize {
    2 + n + j
}

/// An element of the algebra, as a coordinate vector.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgElem {
    coords: DVector<f64>,
}

impl AlgElem {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords: DVector::from_vec(coords) }
    }

    pub fn from_vector(coords: DVector<f64>) -> Self {
        Self { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { coords: DVector::zeros(dim) }
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[k] = 1.0;
        Self { coords: v }
    }

    pub fn e_minus1(spec: &LambdaSpec) -> Self {
        Self::basis(spec.dim(), E_MINUS1)
    }

    pub fn e0(spec: &LambdaSpec) -> Self {
        Self::basis(spec.dim(), E_ZERO)
    }

    /// `e_{j+1}` for zero-based `j`.
    pub fn e(spec: &LambdaSpec, j: usize) -> Self {
        Self::basis(spec.dim(), e_index(j))
    }

    /// `ě_{j+1}` for zero-based `j`.
    pub fn e_check(spec: &LambdaSpec, j: usize) -> Self {
        Self::basis(spec.dim(), check_index(spec.n(), j))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs_vec(&self.coords)
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|v| v.is_finite())
    }

    /// Applies a linear map given as a matrix in the canonical basis.
    pub fn mapped(&self, m: &DMatrix<f64>) -> AlgElem {
        AlgElem { coords: m * &self.coords }
    }
}

impl Index<usize> for AlgElem {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl Add for &AlgElem {
    type Output = AlgElem;
    fn add(self, rhs: &AlgElem) -> AlgElem {
        AlgElem { coords: &self.coords + &rhs.coords }
    }
}

impl Sub for &AlgElem {
    type Output = AlgElem;
    fn sub(self, rhs: &AlgElem) -> AlgElem {
        AlgElem { coords: &self.coords - &rhs.coords }
    }
}

impl Neg for &AlgElem {
    type Output = AlgElem;
    fn neg(self) -> AlgElem {
        AlgElem { coords: -&self.coords }
    }
}

impl Mul<f64> for &AlgElem {
    type Output = AlgElem;
    fn mul(self, rhs: f64) -> AlgElem {
        AlgElem { coords: &self.coords * rhs }
    }
}

impl fmt::Display for AlgElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// A linearly independent family of algebra elements.
#[derive(Clone, Debug)]
pub struct Subspace {
    basis: Vec<AlgElem>,
}

impl Subspace {
    /// Builds a subspace from the columns of `m`, rejecting dependent columns.
    pub fn from_columns(m: &DMatrix<f64>) -> Result<Self> {
        if m.ncols() > 0 && linalg::rank(m, RANK_TOL) != m.ncols() {
            return Err(Error::Domain("subspace basis is linearly dependent".into()));
        }
        let basis = m.column_iter().map(|c| AlgElem::from_vector(c.into_owned())).collect();
        Ok(Self { basis })
    }

    pub fn span(elems: &[AlgElem]) -> Result<Self> {
        if elems.is_empty() {
            return Ok(Self { basis: Vec::new() });
        }
        let cols: Vec<DVector<f64>> = elems.iter().map(|e| e.coords.clone()).collect();
        Self::from_columns(&DMatrix::from_columns(&cols))
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[AlgElem] {
        &self.basis
    }

    pub fn matrix(&self, ambient: usize) -> DMatrix<f64> {
        if self.basis.is_empty() {
            return DMatrix::zeros(ambient, 0);
        }
        let cols: Vec<DVector<f64>> = self.basis.iter().map(|e| e.coords.clone()).collect();
        DMatrix::from_columns(&cols)
    }

    /// Distance of `x` from the subspace (least squares residual, max-abs).
    pub fn residual(&self, x: &AlgElem) -> f64 {
        if self.basis.is_empty() {
            return x.max_abs();
        }
        let b = self.matrix(x.dim());
        let q = linalg::column_space(&b, RANK_TOL);
        let proj = &q * (q.transpose() * x.coords());
        linalg::max_abs_vec(&(x.coords() - proj))
    }

    pub fn contains(&self, x: &AlgElem, tol: f64) -> bool {
        self.residual(x) <= tol
    }

    pub fn is_contained_in(&self, other: &Subspace, tol: f64) -> bool {
        self.basis.iter().all(|b| other.contains(b, tol))
    }

    /// Whether `m` maps the subspace into itself.
    pub fn is_stable_under(&self, m: &DMatrix<f64>, tol: f64) -> bool {
        self.basis.iter().all(|b| self.contains(&b.mapped(m), tol))
    }
}

/// Sparse structure constants: `[e_a, e_b] = Σ c · e_c` for each entry.
#[derive(Clone, Debug)]
struct StructureConstants {
    entries: Vec<(usize, usize, usize, f64)>,
}

impl StructureConstants {
    fn build(spec: &LambdaSpec) -> Self {
        let n = spec.n();
        let mut entries = Vec::with_capacity(6 * n);
        for j in 0..n {
            let l = spec.lambda(j);
            let (e, c) = (e_index(j), check_index(n, j));
            entries.push((E_MINUS1, e, c, l));
            entries.push((e, E_MINUS1, c, -l));
            entries.push((E_MINUS1, c, e, -l));
            entries.push((c, E_MINUS1, e, l));
            entries.push((e, c, E_ZERO, 1.0));
            entries.push((c, e, E_ZERO, -1.0));
        }
        Self { entries }
    }
}

/// The oscillator algebra for one frequency vector.
#[derive(Clone, Debug)]
pub struct OscillatorAlgebra {
    spec: LambdaSpec,
    constants: StructureConstants,
}

impl OscillatorAlgebra {
    pub fn new(spec: LambdaSpec) -> Self {
        let constants = StructureConstants::build(&spec);
        Self { spec, constants }
    }

    pub fn spec(&self) -> &LambdaSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn check(&self, x: &AlgElem) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        Ok(())
    }

    /// Adds `[x, y]` into `out`; slices must have length `dim`.
    pub fn bracket_acc(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        for &(a, b, c, v) in &self.constants.entries {
            out[c] += v * x[a] * y[b];
        }
    }

    pub fn bracket(&self, x: &AlgElem, y: &AlgElem) -> Result<AlgElem> {
        self.check(x)?;
        self.check(y)?;
        let mut out = vec![0.0; self.dim()];
        self.bracket_acc(x.as_slice(), y.as_slice(), &mut out);
        Ok(AlgElem::new(out))
    }

    /// Bracket of two basis vectors.
    pub fn bracket_basis(&self, a: usize, b: usize) -> AlgElem {
        let mut out = vec![0.0; self.dim()];
        for &(i, j, c, v) in &self.constants.entries {
            if i == a && j == b {
                out[c] += v;
            }
        }
        AlgElem::new(out)
    }

    /// Matrix `M` with `M y = [x, y]`.
    pub fn ad(&self, x: &AlgElem) -> Result<DMatrix<f64>> {
        self.check(x)?;
        Ok(self.ad_slice(x.as_slice()))
    }

    pub fn ad_slice(&self, x: &[f64]) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for &(a, b, c, v) in &self.constants.entries {
            m[(c, b)] += v * x[a];
        }
        m
    }

    pub fn ad_basis(&self, a: usize) -> DMatrix<f64> {
        self.ad_slice(AlgElem::basis(self.dim(), a).as_slice())
    }

    /// Common kernel of all adjoint maps.
    pub fn center(&self) -> Subspace {
        let dim = self.dim();
        let mut stacked = DMatrix::zeros(dim * dim, dim);
        for a in 0..dim {
            stacked.view_mut((a * dim, 0), (dim, dim)).copy_from(&self.ad_basis(a));
        }
        Subspace::from_columns(&linalg::null_space(&stacked, RANK_TOL))
            .expect("orthonormal kernel basis is independent")
    }

    /// Span of all brackets: the image of all adjoint maps together.
    pub fn derived_ideal(&self) -> Subspace {
        let dim = self.dim();
        let mut side = DMatrix::zeros(dim, dim * dim);
        for a in 0..dim {
            side.view_mut((0, a * dim), (dim, dim)).copy_from(&self.ad_basis(a));
        }
        Subspace::from_columns(&linalg::column_space(&side, RANK_TOL))
            .expect("orthonormal image basis is independent")
    }

    /// `Ker ad(E)`; a Cartan subalgebra when `E` is regular.
    pub fn ker_ad(&self, e: &AlgElem) -> Result<Subspace> {
        let m = self.ad(e)?;
        Subspace::from_columns(&linalg::null_space(&m, RANK_TOL))
    }

    /// The canonical Cartan subalgebra `Ker ad(e_{-1}) = span{e_{-1}, e_0}`.
    pub fn cartan(&self) -> Subspace {
        self.ker_ad(&AlgElem::e_minus1(&self.spec)).expect("e_{-1} belongs to the algebra")
    }

    /// Max-abs norm of `[x,[y,z]] + [y,[z,x]] + [z,[x,y]]`.
    pub fn jacobi_residual(&self, x: &AlgElem, y: &AlgElem, z: &AlgElem) -> Result<f64> {
        let xyz = self.bracket(x, &self.bracket(y, z)?)?;
        let yzx = self.bracket(y, &self.bracket(z, x)?)?;
        let zxy = self.bracket(z, &self.bracket(x, y)?)?;
        Ok((&(&xyz + &yzx) + &zxy).max_abs())
    }

    /// Human readable basis label for index `k`.
    pub fn basis_label(&self, k: usize) -> String {
        let n = self.spec.n();
        match k {
            E_MINUS1 => "e_-1".to_string(),
            E_ZERO => "e_0".to_string(),
            k if k < 2 + n => format!("e_{}", k - 1),
            k => format!("ec_{}", k - 1 - n),
        }
    }
}
