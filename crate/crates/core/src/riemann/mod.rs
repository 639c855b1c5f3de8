//! Chart-based Riemannian geometry.
//!
//! Curvature follows `R(X,Y)Z = ∇_[X,Y]Z − ∇_X∇_Y Z + ∇_Y∇_X Z`, the
//! negative of the most common textbook tensor. Ricci is traced so that round
//! spheres have positive scalar curvature.

mod connection;
mod curvature;
pub mod fd;
mod metric;

pub use connection::*;
pub use curvature::*;
pub use metric::*;
