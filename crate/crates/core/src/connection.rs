//! Left-invariant connections as bilinear products on the algebra.
//!
//! A left-invariant connection is stored as its product table
//! `r(e_a, e_b) = L_{e_a} e_b = Σ_c L[a][b][c] e_c`. The Levi-Civita product of
//! a metric `k_u` is obtained from the Koszul identity
//!
//! ```text
//! k_u(r(x,y), z) = ½ (k_u([x,y],z) − k_u([y,z],x) + k_u([z,x],y))
//! ```
//!
//! Curvature follows the sign convention `𝓡(x,y) = L_{[x,y]} − [L_x, L_y]`,
//! which is the opposite of the common `[∇_x,∇_y] − ∇_{[x,y]}`. With it the
//! bi-invariant metric has `𝓡(x,y) = ¼ ad_{[x,y]}`.
//!
//! All residuals are max-absolute-entry norms.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::algebra::{AlgElem, OscillatorAlgebra, E_MINUS1};
use crate::error::{Error, Result};
use crate::linalg::{commutator, max_abs};
use crate::metric::Metric;

/// Dense rank-3 table of a bilinear product on the algebra.
#[derive(Clone, Debug)]
pub struct ProductTable {
    dim: usize,
    coeffs: Vec<f64>,
}

impl ProductTable {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, coeffs: vec![0.0; dim * dim * dim] }
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.dim + b) * self.dim + c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient of `e_c` in `r(e_a, e_b)`.
    pub fn coeff(&self, a: usize, b: usize, c: usize) -> f64 {
        self.coeffs[self.idx(a, b, c)]
    }

    fn set_column(&mut self, a: usize, b: usize, v: &[f64]) {
        let start = self.idx(a, b, 0);
        self.coeffs[start..start + self.dim].copy_from_slice(v);
    }

    pub fn basis_product(&self, a: usize, b: usize) -> AlgElem {
        let start = self.idx(a, b, 0);
        AlgElem::new(self.coeffs[start..start + self.dim].to_vec())
    }

    /// Adds `r(x, y)` into `out`.
    pub fn product_acc(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for (a, &xa) in x.iter().enumerate().take(d) {
            if xa == 0.0 {
                continue;
            }
            for (b, &yb) in y.iter().enumerate().take(d) {
                let w = xa * yb;
                if w == 0.0 {
                    continue;
                }
                let start = (a * d + b) * d;
                for (o, c) in out.iter_mut().zip(&self.coeffs[start..start + d]) {
                    *o += w * c;
                }
            }
        }
    }

    pub fn product(&self, x: &AlgElem, y: &AlgElem) -> AlgElem {
        let mut out = vec![0.0; self.dim];
        self.product_acc(x.as_slice(), y.as_slice(), &mut out);
        AlgElem::new(out)
    }

    /// Matrix of `y ↦ r(e_a, y)`.
    pub fn left_basis(&self, a: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |c, b| self.coeff(a, b, c))
    }

    /// Matrix of `y ↦ r(x, y)`.
    pub fn left_mul(&self, x: &AlgElem) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (a, &xa) in x.as_slice().iter().enumerate() {
            if xa != 0.0 {
                m += self.left_basis(a) * xa;
            }
        }
        m
    }

    /// Matrix of `x ↦ r(x, y)`.
    pub fn right_mul(&self, y: &AlgElem) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |c, a| (0..d).map(|b| self.coeff(a, b, c) * y[b]).sum())
    }

    /// `max |r(e_a,e_b) − r(e_b,e_a) − [e_a,e_b]|`.
    pub fn torsion_residual(&self, algebra: &OscillatorAlgebra) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.dim {
            for b in 0..self.dim {
                let t = &(&self.basis_product(a, b) - &self.basis_product(b, a)) - &algebra.bracket_basis(a, b);
                worst = worst.max(t.max_abs());
            }
        }
        worst
    }

    /// `𝓡(x,y) = L_{[x,y]} − [L_x, L_y]`.
    pub fn curvature(&self, algebra: &OscillatorAlgebra, x: &AlgElem, y: &AlgElem) -> Result<CurvOp> {
        let xy = algebra.bracket(x, y)?;
        let matrix = self.left_mul(&xy) - commutator(&self.left_mul(x), &self.left_mul(y));
        Ok(CurvOp { x: x.clone(), y: y.clone(), matrix })
    }

    /// All `𝓡(e_a, e_b)`, indexed `a * dim + b`.
    pub fn curvature_basis(&self, algebra: &OscillatorAlgebra) -> Vec<DMatrix<f64>> {
        let d = self.dim;
        let lefts: Vec<DMatrix<f64>> = (0..d).map(|a| self.left_basis(a)).collect();
        let mut out = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let br = algebra.bracket_basis(a, b);
                out.push(self.left_mul(&br) - commutator(&lefts[a], &lefts[b]));
            }
        }
        out
    }

    /// Largest curvature entry over all basis pairs; zero means flat.
    pub fn flatness_residual(&self, algebra: &OscillatorAlgebra) -> f64 {
        self.curvature_basis(algebra).iter().map(max_abs).fold(0.0, f64::max)
    }

    /// Largest residual of `[L_z, 𝓡(x,y)] = 𝓡(L_z x, y) + 𝓡(x, L_z y)` over basis triples.
    pub fn local_symmetry_residual(&self, algebra: &OscillatorAlgebra) -> f64 {
        let d = self.dim;
        let lefts: Vec<DMatrix<f64>> = (0..d).map(|a| self.left_basis(a)).collect();
        let curv = self.curvature_basis(algebra);
        let mut worst: f64 = 0.0;
        for lz in &lefts {
            for a in 0..d {
                for b in 0..d {
                    let mut res = commutator(lz, &curv[a * d + b]);
                    for c in 0..d {
                        // 𝓡(L_z e_a, e_b) + 𝓡(e_a, L_z e_b), by bilinearity
                        let (wa, wb) = (lz[(c, a)], lz[(c, b)]);
                        if wa != 0.0 {
                            res -= &curv[c * d + b] * wa;
                        }
                        if wb != 0.0 {
                            res -= &curv[a * d + c] * wb;
                        }
                    }
                    worst = worst.max(max_abs(&res));
                }
            }
        }
        worst
    }
}

/// The curvature operator `𝓡(x, y)` as a matrix.
#[derive(Clone, Debug)]
pub struct CurvOp {
    pub x: AlgElem,
    pub y: AlgElem,
    pub matrix: DMatrix<f64>,
}

/// The Levi-Civita product of a metric.
#[derive(Clone, Debug)]
pub struct ConnTable {
    table: ProductTable,
    metric: Metric,
}

/// Solves the Koszul system for every basis pair with one LU factorisation of `gram_u`.
pub fn levi_civita(metric: &Metric) -> Result<ConnTable> {
    let alg = metric.algebra();
    let d = metric.dim();
    let k = metric.gram_u();
    let lu = k.clone().lu();
    if !lu.is_invertible() {
        return Err(Error::Singular { sigma_min: 0.0 });
    }
    let brackets: Vec<AlgElem> = (0..d * d).map(|i| alg.bracket_basis(i / d, i % d)).collect();
    // ku[(c, w)] = k_u(w, e_c) for a bracket w
    let ku = |w: &AlgElem, c: usize| -> f64 { k.row(c).iter().zip(w.as_slice()).map(|(p, q)| p * q).sum() };
    let mut table = ProductTable::zeros(d);
    for a in 0..d {
        for b in 0..d {
            let rhs = DVector::from_fn(d, |c, _| {
                0.5 * (ku(&brackets[a * d + b], c) - ku(&brackets[b * d + c], a) + ku(&brackets[c * d + a], b))
            });
            let sol = lu.solve(&rhs).ok_or(Error::Singular { sigma_min: 0.0 })?;
            table.set_column(a, b, sol.as_slice());
        }
    }
    Ok(ConnTable { table, metric: metric.clone() })
}

impl ConnTable {
    pub fn table(&self) -> &ProductTable {
        &self.table
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn algebra(&self) -> &OscillatorAlgebra {
        self.metric.algebra()
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    /// `L_x y`.
    pub fn product(&self, x: &AlgElem, y: &AlgElem) -> AlgElem {
        self.table.product(x, y)
    }

    pub fn left_mul(&self, x: &AlgElem) -> DMatrix<f64> {
        self.table.left_mul(x)
    }

    pub fn torsion_residual(&self) -> f64 {
        self.table.torsion_residual(self.algebra())
    }

    /// `max |k_u(L_a y, z) + k_u(y, L_a z)|` over basis triples.
    pub fn compat_residual(&self) -> f64 {
        let k = self.metric.gram_u();
        (0..self.dim())
            .map(|a| {
                let kl = k * self.table.left_basis(a);
                max_abs(&(&kl + kl.transpose()))
            })
            .fold(0.0, f64::max)
    }

    pub fn curvature(&self, x: &AlgElem, y: &AlgElem) -> Result<CurvOp> {
        self.table.curvature(self.algebra(), x, y)
    }

    pub fn flatness_residual(&self) -> f64 {
        self.table.flatness_residual(self.algebra())
    }

    pub fn local_symmetry_residual(&self) -> f64 {
        self.table.local_symmetry_residual(self.algebra())
    }

    /// `max |𝓡(e_a,e_b)|` for each basis pair `a < b`, keyed by labels.
    pub fn curvature_norms(&self) -> BTreeMap<String, f64> {
        let alg = self.algebra();
        let d = self.dim();
        let curv = self.table.curvature_basis(alg);
        let mut out = BTreeMap::new();
        for a in 0..d {
            for b in (a + 1)..d {
                out.insert(format!("R({},{})", alg.basis_label(a), alg.basis_label(b)), max_abs(&curv[a * d + b]));
            }
        }
        out
    }

    pub fn report(&self) -> ConnectionReport {
        ConnectionReport {
            torsion_residual: self.torsion_residual(),
            compat_residual: self.compat_residual(),
            flatness_residual: self.flatness_residual(),
            locsym_residual: self.local_symmetry_residual(),
            curvature_norms: self.curvature_norms(),
        }
    }
}

/// `L_x = ½ (ad_x − u⁻¹ ad_{u(x)} + u⁻¹ ad_x u)`, valid because the base form is bi-invariant.
pub fn closed_form_l(metric: &Metric, x: &AlgElem) -> Result<DMatrix<f64>> {
    let alg = metric.algebra();
    let u = metric.u();
    let u_inv = u.clone().try_inverse().ok_or(Error::Singular { sigma_min: 0.0 })?;
    let ad_x = alg.ad(x)?;
    let ad_ux = alg.ad(&x.mapped(u))?;
    Ok((&ad_x - &u_inv * ad_ux + &u_inv * &ad_x * u) * 0.5)
}

/// Residual summary of a Levi-Civita table.
#[derive(Clone, Debug, Serialize)]
pub struct ConnectionReport {
    pub torsion_residual: f64,
    pub compat_residual: f64,
    pub flatness_residual: f64,
    pub locsym_residual: f64,
    pub curvature_norms: BTreeMap<String, f64>,
}

/// The flat torsion-free left-invariant product: `r(x,y) = ½[x,y]` and
/// `r(e_{-1},y) = [e_{-1},y]`, `r(y,e_{-1}) = 0` for `x, y` in the derived
/// ideal, and `r(e_{-1},e_{-1}) = 0`.
#[derive(Clone, Debug)]
pub struct AffineProduct {
    table: ProductTable,
    algebra: OscillatorAlgebra,
}

pub fn affine_product(algebra: &OscillatorAlgebra) -> AffineProduct {
    let d = algebra.dim();
    let mut table = ProductTable::zeros(d);
    for a in 0..d {
        for b in 0..d {
            let br = algebra.bracket_basis(a, b);
            let v = match (a == E_MINUS1, b == E_MINUS1) {
                (false, false) => &br * 0.5,
                (true, false) => br,
                _ => AlgElem::zeros(d),
            };
            table.set_column(a, b, v.as_slice());
        }
    }
    AffineProduct { table, algebra: algebra.clone() }
}

impl AffineProduct {
    pub fn table(&self) -> &ProductTable {
        &self.table
    }

    pub fn product(&self, x: &AlgElem, y: &AlgElem) -> AlgElem {
        self.table.product(x, y)
    }

    /// `r(x,y) − r(y,x) − [x,y]` over basis pairs.
    pub fn skew_residual(&self) -> f64 {
        self.table.torsion_residual(&self.algebra)
    }

    /// `max |A(x,y,z) − A(y,x,z)|` with `A(x,y,z) = r(x,r(y,z)) − r(r(x,y),z)`.
    pub fn associator_residual(&self) -> f64 {
        let d = self.table.dim();
        let basis: Vec<AlgElem> = (0..d).map(|k| AlgElem::basis(d, k)).collect();
        let assoc = |x: &AlgElem, y: &AlgElem, z: &AlgElem| {
            &self.product(x, &self.product(y, z)) - &self.product(&self.product(x, y), z)
        };
        let mut worst: f64 = 0.0;
        for x in &basis {
            for y in &basis {
                for z in &basis {
                    worst = worst.max((&assoc(x, y, z) - &assoc(y, x, z)).max_abs());
                }
            }
        }
        worst
    }

    pub fn flatness_residual(&self) -> f64 {
        self.table.flatness_residual(&self.algebra)
    }

    /// `‖R_y^{dim}‖` for the right multiplication `R_y: x ↦ r(x, y)`.
    pub fn right_nilpotency_residual(&self, y: &AlgElem) -> f64 {
        let r = self.table.right_mul(y);
        let mut p = DMatrix::identity(r.nrows(), r.ncols());
        for _ in 0..r.nrows() {
            p = &p * &r;
        }
        max_abs(&p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{check_index, e_index, LambdaSpec};
    use crate::metric::IsoDescriptor;

    fn spec(l: &[f64]) -> LambdaSpec {
        LambdaSpec::new(l.to_vec()).unwrap()
    }

    #[test]
    fn bi_invariant_product_is_half_bracket() {
        let m = Metric::bi_invariant(&spec(&[1.0, 2.0]));
        let c = levi_civita(&m).unwrap();
        let alg = m.algebra();
        for a in 0..m.dim() {
            for b in 0..m.dim() {
                let diff = &c.table().basis_product(a, b) - &(&alg.bracket_basis(a, b) * 0.5);
                assert!(diff.max_abs() < 1e-14);
            }
        }
        assert!(c.torsion_residual() < 1e-14);
        assert!(c.compat_residual() < 1e-14);
    }

    #[test]
    fn diagonal_table_entries() {
        let (l, eta, etc) = (1.7, 1.3, 0.4);
        let s = spec(&[l]);
        let m = Metric::from_descriptor(&s, &IsoDescriptor::DiagonalSym { eta: vec![eta], eta_check: vec![etc], rho: 0.0 })
            .unwrap();
        let c = levi_civita(&m).unwrap();
        let t = c.table();
        let (e1, c1) = (e_index(0), check_index(1, 0));
        assert!(max_abs(&t.left_basis(1)) < 1e-14);
        assert!((t.coeff(c1, e1, 1) + 0.5 * (eta - etc + 1.0)).abs() < 1e-13);
        assert!((t.coeff(e1, c1, 1) + 0.5 * (eta - etc - 1.0)).abs() < 1e-13);
        assert!((t.coeff(0, e1, c1) - l / (2.0 * etc) * (eta + etc - 1.0)).abs() < 1e-13);
        assert!((t.coeff(e1, 0, c1) - l / (2.0 * etc) * (eta - etc - 1.0)).abs() < 1e-13);
        assert!((t.coeff(0, c1, e1) + l / (2.0 * eta) * (eta + etc - 1.0)).abs() < 1e-13);
        assert!((t.coeff(c1, 0, e1) - l / (2.0 * eta) * (eta - etc + 1.0)).abs() < 1e-13);
    }

    #[test]
    fn case_a_kills_e_minus1_action() {
        let s = spec(&[2.5]);
        let m = Metric::from_descriptor(&s, &IsoDescriptor::DiagonalSym { eta: vec![0.3], eta_check: vec![0.7], rho: 0.0 })
            .unwrap();
        let c = levi_civita(&m).unwrap();
        let l = c.table().left_basis(0);
        assert!(l.column(e_index(0)).amax() < 1e-13);
        assert!(l.column(check_index(1, 0)).amax() < 1e-13);
    }

    #[test]
    fn identity_curvature_is_quarter_ad() {
        let m = Metric::bi_invariant(&spec(&[1.0, 3.0]));
        let c = levi_civita(&m).unwrap();
        let alg = m.algebra();
        let d = m.dim();
        for a in 0..d {
            for b in 0..d {
                let (x, y) = (AlgElem::basis(d, a), AlgElem::basis(d, b));
                let r = c.curvature(&x, &y).unwrap();
                let q = alg.ad(&alg.bracket(&x, &y).unwrap()).unwrap() * 0.25;
                assert!(max_abs(&(&r.matrix - q)) < 1e-14);
            }
        }
        let r = c.curvature(&AlgElem::e(m.spec(), 0), &AlgElem::e_check(m.spec(), 0)).unwrap();
        assert!(max_abs(&r.matrix) < 1e-15);
        assert!(c.flatness_residual() > 0.1);
        assert!(c.local_symmetry_residual() < 1e-14);
    }

    #[test]
    fn affine_product_values() {
        let s = spec(&[1.5]);
        let alg = OscillatorAlgebra::new(s.clone());
        let p = affine_product(&alg);
        let (em1, e1, c1) = (AlgElem::e_minus1(&s), AlgElem::e(&s, 0), AlgElem::e_check(&s, 0));
        assert_eq!(p.product(&e1, &c1), &AlgElem::e0(&s) * 0.5);
        assert_eq!(p.product(&e1, &em1), AlgElem::zeros(4));
        assert_eq!(p.product(&em1, &e1), &c1 * 1.5);
        assert_eq!(p.skew_residual(), 0.0);
        assert!(p.associator_residual() < 1e-15);
        assert!(p.flatness_residual() < 1e-15);
        for k in 0..4 {
            assert_eq!(p.right_nilpotency_residual(&AlgElem::basis(4, k)), 0.0);
        }
    }

    #[test]
    fn closed_form_matches_identity() {
        let m = Metric::bi_invariant(&spec(&[1.0]));
        let x = AlgElem::new(vec![0.2, 1.0, -0.5, 0.7]);
        let l = closed_form_l(&m, &x).unwrap();
        assert!(max_abs(&(l - m.algebra().ad(&x).unwrap() * 0.5)) < 1e-15);
    }

    #[test]
    fn case_b_values() {
        let (l, eta) = (1.3, 0.8);
        let s = spec(&[l]);
        let m = Metric::from_descriptor(&s, &IsoDescriptor::DiagonalSym { eta: vec![eta], eta_check: vec![eta], rho: 0.0 })
            .unwrap();
        let c = levi_civita(&m).unwrap();
        let (em1, ei) = (AlgElem::e_minus1(&s), AlgElem::e(&s, 0));
        let li = c.product(&em1, &ei);
        assert!((li[check_index(1, 0)] - l / (2.0 * eta) * (2.0 * eta - 1.0)).abs() < 1e-13);
        let r = c.curvature(&em1, &ei).unwrap();
        let lm = c.left_mul(&em1);
        let v = (&lm * &r.matrix - &r.matrix * &lm) * em1.coords();
        let expect = l.powi(3) / (8.0 * eta.powi(3)) * (2.0 * eta - 1.0);
        assert!((v[check_index(1, 0)] - expect).abs() < 1e-12);
        assert!(c.local_symmetry_residual() < 1e-12);
    }

    #[test]
    fn koszul_matches_closed_form_on_random_metrics() {
        use rand::SeedableRng;
        let s = spec(&[1.0, 2.0]);
        let form = crate::metric::k_lambda(&s);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let m = Metric::from_matrix(&form, crate::metric::random_symmetric(&form, &mut rng, false)).unwrap();
            let c = levi_civita(&m).unwrap();
            assert!(c.torsion_residual() < 1e-10);
            assert!(c.compat_residual() < 1e-10);
            for a in 0..m.dim() {
                let l = closed_form_l(&m, &AlgElem::basis(m.dim(), a)).unwrap();
                assert!(max_abs(&(l - c.table().left_basis(a))) < 1e-11);
            }
        }
    }

    #[test]
    fn generic_diagonal_is_not_locally_symmetric() {
        let s = spec(&[1.0]);
        let m = Metric::from_descriptor(&s, &IsoDescriptor::DiagonalSym { eta: vec![2.0], eta_check: vec![5.0], rho: 0.0 })
            .unwrap();
        let c = levi_civita(&m).unwrap();
        assert!(c.local_symmetry_residual() > 1e-3);
    }

    #[test]
    fn curvature_is_antisymmetric() {
        let s = spec(&[1.0, 1.5]);
        let m = Metric::from_descriptor(&s, &IsoDescriptor::DiagonalSym { eta: vec![2.0, 0.5], eta_check: vec![3.0, 0.5], rho: 1.0 })
            .unwrap();
        let c = levi_civita(&m).unwrap();
        let x = AlgElem::new(vec![0.3, -1.0, 0.2, 0.5, 0.9, -0.4]);
        let y = AlgElem::new(vec![1.1, 0.4, -0.7, 0.1, 0.0, 0.6]);
        let (a, b) = (c.curvature(&x, &y).unwrap(), c.curvature(&y, &x).unwrap());
        assert!(max_abs(&(a.matrix + b.matrix)) == 0.0);
    }
}
