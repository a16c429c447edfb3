//! First integrals of the geodesic flow, as quadratic or linear forms in `x`.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{e_index, E_MINUS1, E_ZERO};
use crate::metric::{IsoDescriptor, Metric, STABILITY_TOL};

#[derive(Clone, Debug)]
pub enum Form {
    /// `xᵀ Q x`, `Q` symmetric.
    Quadratic(DMatrix<f64>),
    /// `c · x`.
    Linear(DVector<f64>),
}

#[derive(Clone, Debug)]
pub struct FirstIntegral {
    pub name: String,
    pub form: Form,
}

impl FirstIntegral {
    fn quadratic(name: impl Into<String>, q: DMatrix<f64>) -> Self {
        let q = (&q + q.transpose()) * 0.5;
        Self { name: name.into(), form: Form::Quadratic(q) }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        match &self.form {
            Form::Quadratic(q) => x.dot(&(q * &x)),
            Form::Linear(c) => c.dot(&x),
        }
    }

    /// Scale used for relative drift: `Σ |Q_ab| |x_a| |x_b|` or `Σ |c_a| |x_a|`.
    pub fn magnitude(&self, x: &[f64]) -> f64 {
        let ax = DVector::from_iterator(x.len(), x.iter().map(|v| v.abs()));
        match &self.form {
            Form::Quadratic(q) => ax.dot(&(q.abs() * &ax)),
            Form::Linear(c) => c.abs().dot(&ax),
        }
    }
}

/// The named first integrals that apply to a metric.
#[derive(Clone, Debug, Default)]
pub struct FirstIntegralSet {
    pub items: Vec<FirstIntegral>,
}

impl FirstIntegralSet {
    pub fn names(&self) -> Vec<String> {
        self.items.iter().map(|i| i.name.clone()).collect()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.items.iter().map(|i| i.eval(x)).collect()
    }

    pub fn get(&self, name: &str) -> Option<&FirstIntegral> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Builds the applicable set, in body variables `x` (with `y = u x`).
///
/// Always: `k_yy = k(y,y)`, `k_y_uinv_y = k(y,u⁻¹y)` and `C = k(x,u e_0)`.
/// When `u` stabilises `span{e_{-1}, e_0}` and moves the centre, the family
/// `F_j` built on a `k`-orthonormal eigenbasis of `u` on its complement.
/// For the pure `u2_dim4` metric, the two polynomial invariants `I1`, `I2`.
pub fn first_integrals(metric: &Metric) -> FirstIntegralSet {
    let g = metric.form().gram();
    let u = metric.u();
    let gu = metric.gram_u();
    let mut items = vec![
        FirstIntegral::quadratic("k_yy", u.transpose() * g * u),
        FirstIntegral::quadratic("k_y_uinv_y", gu.clone()),
        FirstIntegral { name: "C".into(), form: Form::Linear(gu.column(E_ZERO).into_owned()) },
    ];
    items.extend(cartan_family(metric));
    if *metric.iso().provenance() == IsoDescriptor::U2Dim4 {
        let c = e_index(0);
        let cc = c + 1;
        let mut q1 = DMatrix::zeros(4, 4);
        q1[(c, cc)] = 1.0;
        q1[(cc, c)] = 1.0;
        q1[(E_MINUS1, E_MINUS1)] = 1.0;
        q1[(E_ZERO, E_ZERO)] = 1.0;
        let mut q2 = DMatrix::zeros(4, 4);
        q2[(E_MINUS1, cc)] = 0.5;
        q2[(cc, E_MINUS1)] = 0.5;
        q2[(E_ZERO, c)] = 0.5;
        q2[(c, E_ZERO)] = 0.5;
        items.push(FirstIntegral::quadratic("I1", q1));
        items.push(FirstIntegral::quadratic("I2", q2));
    }
    FirstIntegralSet { items }
}

/// `F_j(x) = (ab−α²)/(aμ_j) (μ_j x̄_{-1} − C(x))² + Σ_i μ_i(μ_j−μ_i) x̄_i²`.
fn cartan_family(metric: &Metric) -> Vec<FirstIntegral> {
    let alg = metric.algebra();
    let u = metric.u();
    if !alg.cartan().is_stable_under(u, STABILITY_TOL) {
        return Vec::new();
    }
    // u(e_0) = a e_{-1} + α e_0, u(e_{-1}) = α e_{-1} + b e_0
    let (a, alpha, b) = (u[(E_MINUS1, E_ZERO)], u[(E_ZERO, E_ZERO)], u[(E_ZERO, E_MINUS1)]);
    if a.abs() <= STABILITY_TOL {
        return Vec::new();
    }
    let dim = metric.dim();
    let m = dim - 2;
    let lambdas = metric.spec().lambdas();
    let n = lambdas.len();
    // k on V is diag(1/λ) over (e_j, ě_j); symmetrise through D^{1/2}
    let sqrt_d: Vec<f64> = (0..m).map(|i| (1.0 / lambdas[i % n]).sqrt()).collect();
    let uv = u.view((2, 2), (m, m));
    let s = DMatrix::from_fn(m, m, |r, c| sqrt_d[r] * uv[(r, c)] / sqrt_d[c]);
    let s = (&s + s.transpose()) * 0.5;
    let eig = s.symmetric_eigen();
    // x̄_i = k(x, E_i) with E_i = D^{-1/2} q_i, so the coefficient row is D^{1/2} q_i on V
    let coords: Vec<DVector<f64>> = (0..m)
        .map(|i| {
            let q = eig.eigenvectors.column(i);
            let mut f = DVector::zeros(dim);
            for r in 0..m {
                f[2 + r] = sqrt_d[r] * q[r];
            }
            f
        })
        .collect();
    let mus: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut c_lin = DVector::zeros(dim);
    c_lin[E_ZERO] = a;
    c_lin[E_MINUS1] = alpha;
    (0..m)
        .map(|j| {
            let mu = mus[j];
            let mut ell = -&c_lin;
            ell[E_MINUS1] += mu;
            let mut q = &ell * ell.transpose() * ((a * b - alpha * alpha) / (a * mu));
            for (i, f) in coords.iter().enumerate() {
                q += f * f.transpose() * (mus[i] * (mu - mus[i]));
            }
            FirstIntegral::quadratic(format!("F_{}", j + 1), q)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::LambdaSpec;

    #[test]
    fn u2_invariants_match_polynomials() {
        let s = LambdaSpec::new(vec![1.0]).unwrap();
        let m = Metric::from_descriptor(&s, &IsoDescriptor::U2Dim4).unwrap();
        let set = first_integrals(&m);
        let x = [0.3, -1.2, 0.7, 2.0];
        let i1 = 2.0 * x[2] * x[3] + x[0] * x[0] + x[1] * x[1];
        let i2 = x[0] * x[3] + x[1] * x[2];
        assert!((set.get("I1").unwrap().eval(&x) - i1).abs() < 1e-15);
        assert!((set.get("I2").unwrap().eval(&x) - i2).abs() < 1e-15);
        assert!(set.get("F_1").is_none());
    }

    #[test]
    fn family_registered_only_off_centre() {
        let s = LambdaSpec::new(vec![1.0, 2.0]).unwrap();
        let diag = IsoDescriptor::DiagonalSym { eta: vec![1.0, 2.0], eta_check: vec![3.0, 0.5], rho: 0.0 };
        assert_eq!(first_integrals(&Metric::from_descriptor(&s, &diag).unwrap()).len(), 3);
        let form = crate::metric::k_lambda(&s);
        let mut u = DMatrix::identity(6, 6);
        u[(E_MINUS1, E_ZERO)] = 0.5;
        u[(E_ZERO, E_MINUS1)] = -1.0;
        let m = Metric::from_matrix(&form, u).unwrap();
        assert_eq!(first_integrals(&m).len(), 3 + 4);
    }

    #[test]
    fn lorentz_energy_is_k_u() {
        let s = LambdaSpec::new(vec![1.0]).unwrap();
        let m = Metric::from_descriptor(&s, &IsoDescriptor::U1Dim4).unwrap();
        let set = first_integrals(&m);
        let x = [0.1, 0.2, -0.3, 0.4];
        let xe = crate::algebra::AlgElem::new(x.to_vec());
        assert!((set.get("k_y_uinv_y").unwrap().eval(&x) - m.eval(&xe, &xe)).abs() < 1e-15);
    }
}
