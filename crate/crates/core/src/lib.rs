//! Numerical geometry of the oscillator groups `G_λ`.
//!
//! The crate builds the oscillator algebra for a frequency vector λ, the
//! bi-invariant Lorentzian form `k_λ` and the left-invariant metrics it
//! induces, derives their Levi-Civita connections and curvature, integrates
//! geodesic flows with first-integral monitoring and blow-up detection, and
//! realises the isometry group of `(G_λ, k_λ)` in closed form.

pub mod algebra;
pub mod connection;
pub mod error;
pub mod flow;
pub mod isometry;
pub mod linalg;
pub mod metric;
pub mod report;
pub mod suite;

pub use algebra::{AlgElem, LambdaSpec, OscillatorAlgebra, Subspace};
pub use error::{Error, Result};
pub use metric::{BiInvariantForm, IsoDescriptor, Metric, SymIso};
