//! The bi-invariant form `k_λ` and the left-invariant metrics `k_u(x,y) = k_λ(u x, y)`
//! built from `k_λ`-symmetric isomorphisms `u`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{check_index, e_index, AlgElem, LambdaSpec, OscillatorAlgebra, E_MINUS1, E_ZERO};
use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};

/// Acceptance bound on `‖G u − (G u)ᵀ‖_max`.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Eigenvalues of a Gram matrix closer than this to zero are degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Tolerance for subspace stabilisation tests.
pub const STABILITY_TOL: f64 = 1e-10;

/// The ad-invariant Lorentzian form `2x_{-1}x_0 + Σ (x_j² + x̌_j²)/λ_j`.
#[derive(Clone, Debug)]
pub struct BiInvariantForm {
    algebra: OscillatorAlgebra,
    gram: DMatrix<f64>,
}

pub fn k_lambda(spec: &LambdaSpec) -> BiInvariantForm {
    BiInvariantForm::new(OscillatorAlgebra::new(spec.clone()))
}

impl BiInvariantForm {
    pub fn new(algebra: OscillatorAlgebra) -> Self {
        let spec = algebra.spec();
        let n = spec.n();
        let mut gram = DMatrix::zeros(spec.dim(), spec.dim());
        gram[(E_MINUS1, E_ZERO)] = 1.0;
        gram[(E_ZERO, E_MINUS1)] = 1.0;
        for j in 0..n {
            let w = 1.0 / spec.lambda(j);
            gram[(e_index(j), e_index(j))] = w;
            gram[(check_index(n, j), check_index(n, j))] = w;
        }
        Self { algebra, gram }
    }

    pub fn algebra(&self) -> &OscillatorAlgebra {
        &self.algebra
    }

    pub fn spec(&self) -> &LambdaSpec {
        self.algebra.spec()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn eval(&self, x: &AlgElem, y: &AlgElem) -> f64 {
        x.coords().dot(&(&self.gram * y.coords()))
    }

    /// `|k([x,y],z) + k(y,[x,z])|`.
    pub fn ad_invariance_residual(&self, x: &AlgElem, y: &AlgElem, z: &AlgElem) -> Result<f64> {
        let a = self.algebra.bracket(x, y)?;
        let b = self.algebra.bracket(x, z)?;
        Ok((self.eval(&a, z) + self.eval(y, &b)).abs())
    }

    /// Number of negative eigenvalues of the Gram matrix.
    pub fn index(&self) -> usize {
        linalg::symmetric_eigenvalues(&self.gram).iter().filter(|&&v| v < 0.0).count()
    }

    /// `‖G u − (G u)ᵀ‖_max`.
    pub fn symmetry_residual(&self, u: &DMatrix<f64>) -> f64 {
        let gu = &self.gram * u;
        max_abs(&(&gu - gu.transpose()))
    }
}

/// Which local-symmetry condition a diagonal block satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockCondition {
    /// `η + η̌ = 1`
    A,
    /// `η = η̌`
    B,
    /// both, i.e. `η = η̌ = 1/2`
    Both,
    Neither,
}

impl BlockCondition {
    pub fn classify(eta: f64, eta_check: f64, tol: f64) -> Self {
        let a = (eta + eta_check - 1.0).abs() <= tol;
        let b = (eta - eta_check).abs() <= tol;
        match (a, b) {
            (true, true) => BlockCondition::Both,
            (true, false) => BlockCondition::A,
            (false, true) => BlockCondition::B,
            (false, false) => BlockCondition::Neither,
        }
    }

    pub fn is_locally_symmetric_case(self) -> bool {
        self != BlockCondition::Neither
    }
}

/// JSON descriptor of a symmetric isomorphism.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IsoDescriptor {
    Identity,
    DiagonalSym {
        eta: Vec<f64>,
        eta_check: Vec<f64>,
        #[serde(default)]
        rho: f64,
    },
    U1Dim4,
    U2Dim4,
    LatticeDim4 {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    DirectSum {
        base: DirectSumBase,
        /// One symmetric 2×2 block per frequency `λ_2..λ_n`, acting on `(e_i, ě_i)`.
        blocks: Vec<[[f64; 2]; 2]>,
    },
    Matrix {
        rows: Vec<Vec<f64>>,
    },
}

fn default_alpha() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectSumBase {
    U1,
    U2,
}

impl IsoDescriptor {
    /// Parses either a JSON object or one of the parameterless kind names.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.starts_with('{') {
            return serde_json::from_str(t).map_err(|e| Error::Parse(format!("metric descriptor: {e}")));
        }
        match t {
            "identity" => Ok(IsoDescriptor::Identity),
            "u1_dim4" => Ok(IsoDescriptor::U1Dim4),
            "u2_dim4" => Ok(IsoDescriptor::U2Dim4),
            "lattice_dim4" => Ok(IsoDescriptor::LatticeDim4 { alpha: 1.0 }),
            other => Err(Error::Parse(format!("unknown metric kind `{other}`"))),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            IsoDescriptor::Identity => "identity",
            IsoDescriptor::DiagonalSym { .. } => "diagonal_sym",
            IsoDescriptor::U1Dim4 => "u1_dim4",
            IsoDescriptor::U2Dim4 => "u2_dim4",
            IsoDescriptor::LatticeDim4 { .. } => "lattice_dim4",
            IsoDescriptor::DirectSum { .. } => "direct_sum",
            IsoDescriptor::Matrix { .. } => "matrix",
        }
    }
}

/// A `k_λ`-symmetric invertible map, the datum of a left-invariant metric.
#[derive(Clone, Debug)]
pub struct SymIso {
    matrix: DMatrix<f64>,
    provenance: IsoDescriptor,
    symmetry_residual: f64,
    condition_number: f64,
    conditions: Vec<BlockCondition>,
}

impl SymIso {
    /// Validates `matrix` against `form`.
    pub fn new(form: &BiInvariantForm, matrix: DMatrix<f64>, provenance: IsoDescriptor) -> Result<Self> {
        let dim = form.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows().max(matrix.ncols()) });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFamily { family: provenance.kind().into(), reason: "non-finite entry".into() });
        }
        let symmetry_residual = form.symmetry_residual(&matrix);
        if symmetry_residual > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { residual: symmetry_residual });
        }
        let sv = linalg::singular_values(&matrix);
        let (hi, lo) = (sv[0], *sv.last().unwrap());
        if lo <= hi * 1e-14 || lo == 0.0 {
            return Err(Error::Singular { sigma_min: lo });
        }
        Ok(Self {
            matrix,
            provenance,
            symmetry_residual,
            condition_number: hi / lo,
            conditions: Vec::new(),
        })
    }

    pub fn identity(form: &BiInvariantForm) -> Self {
        Self::new(form, DMatrix::identity(form.dim(), form.dim()), IsoDescriptor::Identity)
            .expect("identity is symmetric and invertible")
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn provenance(&self) -> &IsoDescriptor {
        &self.provenance
    }

    pub fn symmetry_residual(&self) -> f64 {
        self.symmetry_residual
    }

    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    /// Per-frequency local-symmetry condition; empty unless built as `diagonal_sym`.
    pub fn conditions(&self) -> &[BlockCondition] {
        &self.conditions
    }
}

/// Builds the map described by `desc`.
pub fn named_family(form: &BiInvariantForm, desc: &IsoDescriptor) -> Result<SymIso> {
    let spec = form.spec();
    let n = spec.n();
    let dim = spec.dim();
    let fail = |reason: String| Error::InvalidFamily { family: desc.kind().into(), reason };
    let mut conditions = Vec::new();
    let matrix = match desc {
        IsoDescriptor::Identity => DMatrix::identity(dim, dim),
        IsoDescriptor::DiagonalSym { eta, eta_check, rho } => {
            if eta.len() != n || eta_check.len() != n {
                return Err(fail(format!(
                    "expected {n} values for eta and eta_check, got {} and {}",
                    eta.len(),
                    eta_check.len()
                )));
            }
            if !rho.is_finite() {
                return Err(fail("rho must be finite".into()));
            }
            let mut m = DMatrix::identity(dim, dim);
            m[(E_ZERO, E_MINUS1)] = *rho;
            for j in 0..n {
                let (a, b) = (eta[j], eta_check[j]);
                if !a.is_finite() || !b.is_finite() || a == 0.0 || b == 0.0 {
                    return Err(fail(format!("eta_{0} and eta_check_{0} must be finite and non-zero", j + 1)));
                }
                m[(e_index(j), e_index(j))] = a;
                m[(check_index(n, j), check_index(n, j))] = b;
                conditions.push(BlockCondition::classify(a, b, 1e-12));
            }
            m
        }
        IsoDescriptor::U1Dim4 | IsoDescriptor::U2Dim4 => {
            if n != 1 {
                return Err(fail(format!("defined on the 4-dimensional group only (n = {n})")));
            }
            base_block(*desc == IsoDescriptor::U2Dim4, spec).map_err(fail)?
        }
        IsoDescriptor::LatticeDim4 { alpha } => {
            if n != 1 {
                return Err(fail(format!("defined on the 4-dimensional group only (n = {n})")));
            }
            if !alpha.is_finite() {
                return Err(fail("alpha must be finite".into()));
            }
            let mut m = DMatrix::identity(dim, dim);
            m[(E_ZERO, E_MINUS1)] = *alpha;
            m
        }
        IsoDescriptor::DirectSum { base, blocks } => {
            if blocks.len() + 1 != n {
                return Err(fail(format!("expected {} blocks for n = {n}, got {}", n.saturating_sub(1), blocks.len())));
            }
            let small = base_block(*base == DirectSumBase::U2, spec).map_err(fail)?;
            let mut m = DMatrix::zeros(dim, dim);
            let first = [E_MINUS1, E_ZERO, e_index(0), check_index(n, 0)];
            for (r, &gr) in first.iter().enumerate() {
                for (c, &gc) in first.iter().enumerate() {
                    m[(gr, gc)] = small[(r, c)];
                }
            }
            for (k, blk) in blocks.iter().enumerate() {
                let j = k + 1;
                let idx = [e_index(j), check_index(n, j)];
                for r in 0..2 {
                    for c in 0..2 {
                        m[(idx[r], idx[c])] = blk[r][c];
                    }
                }
            }
            m
        }
        IsoDescriptor::Matrix { rows } => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(fail(format!("expected a {dim}x{dim} matrix")));
            }
            DMatrix::from_fn(dim, dim, |r, c| rows[r][c])
        }
    };
    let mut iso = SymIso::new(form, matrix, desc.clone())?;
    iso.conditions = conditions;
    Ok(iso)
}

/// `u₁` or `u₂` on `span{e_{-1}, e_0, e_1, ě_1}` (local 4×4 matrix, columns are images).
fn base_block(second: bool, spec: &LambdaSpec) -> std::result::Result<DMatrix<f64>, String> {
    if (spec.lambda(0) - 1.0).abs() > 1e-15 {
        return Err(format!("requires lambda_1 = 1 for k-symmetry (got {})", spec.lambda(0)));
    }
    // images of (e_{-1}, e_0, e_1, ě_1) expressed in the local basis order 0..4
    let images: [usize; 4] = if second { [3, 2, 0, 1] } else { [2, 0, 1, 3] };
    let mut m = DMatrix::zeros(4, 4);
    for (col, &row) in images.iter().enumerate() {
        m[(row, col)] = 1.0;
    }
    Ok(m)
}

/// A left-invariant metric `k_u`.
#[derive(Clone, Debug)]
pub struct Metric {
    form: BiInvariantForm,
    iso: SymIso,
    gram_u: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    index: usize,
}

pub fn metric_from_iso(form: &BiInvariantForm, iso: SymIso) -> Result<Metric> {
    let dim = form.dim();
    if iso.matrix().nrows() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: iso.matrix().nrows() });
    }
    let residual = form.symmetry_residual(iso.matrix());
    if residual > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { residual });
    }
    let gu = form.gram() * iso.matrix();
    let gram_u = (&gu + gu.transpose()) * 0.5;
    let eigenvalues = linalg::symmetric_eigenvalues(&gram_u);
    if let Some(&ev) = eigenvalues.iter().find(|v| v.abs() <= DEGENERACY_TOL) {
        return Err(Error::Degenerate { eigenvalue: ev });
    }
    let index = eigenvalues.iter().filter(|&&v| v < 0.0).count();
    Ok(Metric { form: form.clone(), iso, gram_u, eigenvalues, index })
}

impl Metric {
    /// Builds `k_λ` itself as a metric (u = identity).
    pub fn bi_invariant(spec: &LambdaSpec) -> Self {
        let form = k_lambda(spec);
        let iso = SymIso::identity(&form);
        metric_from_iso(&form, iso).expect("k_lambda is nondegenerate")
    }

    pub fn from_descriptor(spec: &LambdaSpec, desc: &IsoDescriptor) -> Result<Self> {
        let form = k_lambda(spec);
        let iso = named_family(&form, desc)?;
        metric_from_iso(&form, iso)
    }

    /// Metric of a raw matrix `u`, validated like any other iso.
    pub fn from_matrix(form: &BiInvariantForm, u: DMatrix<f64>) -> Result<Self> {
        let rows = u.row_iter().map(|r| r.iter().copied().collect()).collect();
        let iso = SymIso::new(form, u, IsoDescriptor::Matrix { rows })?;
        metric_from_iso(form, iso)
    }

    pub fn form(&self) -> &BiInvariantForm {
        &self.form
    }

    pub fn algebra(&self) -> &OscillatorAlgebra {
        self.form.algebra()
    }

    pub fn spec(&self) -> &LambdaSpec {
        self.form.spec()
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn iso(&self) -> &SymIso {
        &self.iso
    }

    pub fn u(&self) -> &DMatrix<f64> {
        self.iso.matrix()
    }

    pub fn gram_u(&self) -> &DMatrix<f64> {
        &self.gram_u
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn is_lorentzian(&self) -> bool {
        self.index == 1
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eval(&self, x: &AlgElem, y: &AlgElem) -> f64 {
        x.coords().dot(&(&self.gram_u * y.coords()))
    }
}

/// `(positive, negative)` eigenvalue counts of the metric's Gram matrix.
pub fn signature(metric: &Metric) -> Result<(usize, usize)> {
    signature_of(metric.gram_u())
}

/// Signature of an arbitrary symmetric matrix; degenerate input is an error.
pub fn signature_of(gram: &DMatrix<f64>) -> Result<(usize, usize)> {
    let ev = linalg::symmetric_eigenvalues(gram);
    if let Some(&v) = ev.iter().find(|v| v.abs() <= DEGENERACY_TOL) {
        return Err(Error::Degenerate { eigenvalue: v });
    }
    let neg = ev.iter().filter(|&&v| v < 0.0).count();
    Ok((ev.len() - neg, neg))
}

/// Sufficient-condition verdict for geodesic completeness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletenessVerdict {
    /// `u` maps the centre into itself.
    CompleteCenter,
    /// `u` stabilises the canonical Cartan subalgebra `span{e_{-1}, e_0}`.
    CompleteCartan,
    Undetermined,
}

pub fn completeness_criteria(form: &BiInvariantForm, u: &DMatrix<f64>) -> CompletenessVerdict {
    let alg = form.algebra();
    if alg.center().is_stable_under(u, STABILITY_TOL) {
        CompletenessVerdict::CompleteCenter
    } else if alg.cartan().is_stable_under(u, STABILITY_TOL) {
        CompletenessVerdict::CompleteCartan
    } else {
        CompletenessVerdict::Undetermined
    }
}

/// Random `k_λ`-symmetric map `G⁻¹ S` with `S` a Gaussian symmetric matrix.
///
/// With `center_line` set, `u(e_0)` is forced onto `ℝ e_0`.
pub fn random_symmetric<R: Rng + ?Sized>(form: &BiInvariantForm, rng: &mut R, center_line: bool) -> DMatrix<f64> {
    let dim = form.dim();
    let mut s = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in r..dim {
            let v: f64 = rng.sample(StandardNormal);
            s[(r, c)] = v;
            s[(c, r)] = v;
        }
    }
    if center_line {
        // G u e_0 = ν G e_0 = ν e_{-1}^* : column e_0 of S is ν at row e_{-1} only
        let nu: f64 = rng.sample(StandardNormal);
        for r in 0..dim {
            s[(r, E_ZERO)] = 0.0;
            s[(E_ZERO, r)] = 0.0;
        }
        s[(E_MINUS1, E_ZERO)] = nu;
        s[(E_ZERO, E_MINUS1)] = nu;
    }
    form.gram().clone().try_inverse().expect("k_lambda is invertible") * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(l: &[f64]) -> LambdaSpec {
        LambdaSpec::new(l.to_vec()).unwrap()
    }

    #[test]
    fn gram_entries() {
        let f = k_lambda(&spec(&[1.0]));
        let g = f.gram();
        assert_eq!(g[(0, 1)], 1.0);
        assert_eq!(g[(2, 2)], 1.0);
        assert_eq!(g[(3, 3)], 1.0);
        assert_eq!(g[(0, 0)], 0.0);
        assert_eq!(g[(1, 1)], 0.0);
        let f2 = k_lambda(&spec(&[2.0]));
        assert_eq!(f2.gram()[(2, 2)], 0.5);
        assert_eq!(f.index(), 1);
    }

    #[test]
    fn identity_reproduces_k_lambda() {
        let s = spec(&[1.0, 3.0]);
        let m = Metric::bi_invariant(&s);
        assert_eq!(m.gram_u(), k_lambda(&s).gram());
        assert_eq!(m.index(), 1);
        assert_eq!(signature(&m).unwrap(), (5, 1));
    }

    #[test]
    fn u1_and_u2_indices() {
        let s = spec(&[1.0]);
        let m1 = Metric::from_descriptor(&s, &IsoDescriptor::U1Dim4).unwrap();
        assert_eq!(m1.index(), 1);
        let m2 = Metric::from_descriptor(&s, &IsoDescriptor::U2Dim4).unwrap();
        assert_eq!(m2.index(), 2);
        assert_eq!(signature(&m2).unwrap(), (2, 2));
        assert_eq!(m2.iso().symmetry_residual(), 0.0);
        // permutation matrix
        let u = m2.u();
        for c in 0..4 {
            assert_eq!(u.column(c).iter().filter(|&&v| v == 1.0).count(), 1);
            assert_eq!(u.column(c).sum(), 1.0);
        }
        // e_{-1} ↦ ě_1, e_0 ↦ e_1, e_1 ↦ e_{-1}, ě_1 ↦ e_0
        assert_eq!(u[(3, 0)], 1.0);
        assert_eq!(u[(2, 1)], 1.0);
        assert_eq!(u[(0, 2)], 1.0);
        assert_eq!(u[(1, 3)], 1.0);
    }

    #[test]
    fn u1_requires_unit_frequency() {
        let err = Metric::from_descriptor(&spec(&[2.0]), &IsoDescriptor::U1Dim4).unwrap_err();
        assert!(matches!(err, Error::InvalidFamily { .. }));
        let err = Metric::from_descriptor(&spec(&[1.0, 2.0]), &IsoDescriptor::U2Dim4).unwrap_err();
        assert!(matches!(err, Error::InvalidFamily { .. }));
    }

    #[test]
    fn lattice_metric_quadratic_form() {
        let s = spec(&[1.0]);
        let alpha = 0.7;
        let m = Metric::from_descriptor(&s, &IsoDescriptor::LatticeDim4 { alpha }).unwrap();
        let x = AlgElem::new(vec![0.3, -1.2, 0.8, 2.0]);
        let expected = alpha * 0.3 * 0.3 + 2.0 * 0.3 * -1.2 + 0.8 * 0.8 + 2.0 * 2.0;
        assert!((m.eval(&x, &x) - expected).abs() < 1e-14);
    }

    #[test]
    fn diagonal_family() {
        let s = spec(&[1.0]);
        let id = named_family(&k_lambda(&s), &IsoDescriptor::DiagonalSym { eta: vec![1.0], eta_check: vec![1.0], rho: 0.0 })
            .unwrap();
        assert_eq!(id.matrix(), &DMatrix::identity(4, 4));
        let a = named_family(&k_lambda(&s), &IsoDescriptor::DiagonalSym { eta: vec![0.3], eta_check: vec![0.7], rho: 0.0 })
            .unwrap();
        assert_eq!(a.conditions(), &[BlockCondition::A]);
        let bad = named_family(&k_lambda(&s), &IsoDescriptor::DiagonalSym { eta: vec![0.0], eta_check: vec![1.0], rho: 0.0 });
        assert!(bad.is_err());
        let short = named_family(&k_lambda(&s), &IsoDescriptor::DiagonalSym { eta: vec![], eta_check: vec![1.0], rho: 0.0 });
        assert!(short.is_err());
    }

    #[test]
    fn rejects_non_symmetric_and_singular() {
        let s = spec(&[1.0]);
        let f = k_lambda(&s);
        let mut m = DMatrix::identity(4, 4);
        m[(2, 3)] = 0.5;
        match SymIso::new(&f, m, IsoDescriptor::Matrix { rows: vec![] }) {
            Err(Error::NotSymmetric { residual }) => assert!((residual - 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        let mut z = DMatrix::identity(4, 4);
        z[(2, 2)] = 0.0;
        assert!(matches!(SymIso::new(&f, z, IsoDescriptor::Matrix { rows: vec![] }), Err(Error::Singular { .. })));
    }

    #[test]
    fn descriptor_json() {
        let d = IsoDescriptor::parse(r#"{"kind":"diagonal_sym","eta":[0.3],"eta_check":[0.7]}"#).unwrap();
        assert_eq!(d, IsoDescriptor::DiagonalSym { eta: vec![0.3], eta_check: vec![0.7], rho: 0.0 });
        assert_eq!(IsoDescriptor::parse(r#"{"kind":"lattice_dim4"}"#).unwrap(), IsoDescriptor::LatticeDim4 { alpha: 1.0 });
        assert_eq!(IsoDescriptor::parse("u2_dim4").unwrap(), IsoDescriptor::U2Dim4);
        assert!(IsoDescriptor::parse(r#"{"kind":"bogus"}"#).is_err());
        let m = IsoDescriptor::parse(r#"{"kind":"matrix","rows":[[1,0],[0,1]]}"#).unwrap();
        assert!(matches!(m, IsoDescriptor::Matrix { .. }));
    }

    #[test]
    fn direct_sum_extends_u2() {
        let s = spec(&[1.0, 2.0]);
        let d = IsoDescriptor::DirectSum { base: DirectSumBase::U2, blocks: vec![[[-1.0, 0.0], [0.0, 2.0]]] };
        let m = Metric::from_descriptor(&s, &d).unwrap();
        assert_eq!(m.index(), 3);
        let bad = IsoDescriptor::DirectSum { base: DirectSumBase::U2, blocks: vec![[[1.0, 0.5], [0.0, 2.0]]] };
        assert!(matches!(Metric::from_descriptor(&s, &bad), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn completeness_verdicts() {
        let s = spec(&[1.0]);
        let f = k_lambda(&s);
        assert_eq!(completeness_criteria(&f, &DMatrix::identity(4, 4)), CompletenessVerdict::CompleteCenter);
        let u1 = named_family(&f, &IsoDescriptor::U1Dim4).unwrap();
        assert_eq!(completeness_criteria(&f, u1.matrix()), CompletenessVerdict::Undetermined);
        let d = named_family(&f, &IsoDescriptor::DiagonalSym { eta: vec![2.0], eta_check: vec![5.0], rho: 0.3 }).unwrap();
        assert_eq!(completeness_criteria(&f, d.matrix()), CompletenessVerdict::CompleteCenter);
        // u(e_0) = a e_{-1} + α e_0 with a ≠ 0, stabilising span{e_{-1}, e_0}
        let mut c = DMatrix::identity(4, 4);
        c[(0, 1)] = 0.5;
        let ci = SymIso::new(&f, c, IsoDescriptor::Matrix { rows: vec![] }).unwrap();
        assert_eq!(completeness_criteria(&f, ci.matrix()), CompletenessVerdict::CompleteCartan);
    }

    #[test]
    fn random_symmetric_maps_are_symmetric() {
        let f = k_lambda(&spec(&[1.0, 1.5]));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for center in [false, true] {
            let u = random_symmetric(&f, &mut rng, center);
            assert!(f.symmetry_residual(&u) < 1e-13);
            if center {
                let ue0 = u.column(E_ZERO);
                for (k, v) in ue0.iter().enumerate() {
                    if k != E_ZERO {
                        assert!(v.abs() < 1e-14);
                    }
                }
            }
        }
    }
}
