//! Twistor spaces of pairs of Riemannian metrics, evaluated pointwise on a chart.
//!
//! The crate is split into four layers:
//!
//! * [`fiber`]: linear algebra of a Euclidean vector space: compatible complex
//!   structures, `so(V)` and `Λ²V`, the metric-transfer map `Ψ(I) = Q⁻¹IQ`,
//!   and the isoclinic factorization of `SO(4)`.
//! * [`riemann`]: chart metrics, Levi-Civita connections, curvature in the
//!   `R(X,Y) = ∇_[X,Y] − [∇_X, ∇_Y]` convention and its operator decomposition.
//! * [`twistor`]: horizontal/vertical tangents of the twistor space, the
//!   Atiyah-Hitchin-Singer and Eells-Salamon structures, the pushforward of `Ψ`,
//!   holomorphy residuals, and the harmonicity criterion for conformal pairs.
//! * [`scenario`]: declarative check suites, their execution and reports.

pub mod error;
pub mod fiber;
pub mod linalg;
pub mod riemann;
pub mod scenario;
pub mod twistor;

pub use error::{Error, Result};

/// Tolerances shared across the crate.
pub mod tol {
    /// Pure matrix algebra.
    pub const ALGEBRAIC: f64 = 1e-12;
    /// Anything that went through an eigendecomposition or a factorization.
    pub const EIGEN: f64 = 1e-10;
    /// Constructor-side validation of user data (relative).
    pub const VALIDATION: f64 = 1e-9;
}
