//! Pointwise linear algebra of a Euclidean vector space `(V, g)`.
//!
//! Vectors are coordinate columns in a fixed working basis `e_1..e_n`, the
//! metric is its Gram matrix `G`, and an endomorphism is the matrix acting on
//! coordinate columns. With this convention `g(x, y) = xᵀGy`, and `A` is
//! g-skew exactly when `GA` is antisymmetric.

mod bivector;
mod isoclinic;
mod transfer;

pub use bivector::{
    endo_of_wedge, hodge_split, hodge_star, lambda2_gram, s_basis, s_basis_from_frame,
    wedge_of_endo, wedge_of_endo_fast, TwoVector,
};
pub use isoclinic::{
    isoclinic_factor, left_isoclinic, quaternion_rotation, random_so4, right_isoclinic, IsoclinicPair,
    Quaternion,
};
pub use transfer::{
    log_via_integral, make_compatible_structure, principal_sqrt, principal_sqrt_via_log,
    psi_endo, psi_point, sqrt_symmetric, transfer_endomorphism, MetricTransfer,
};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{pfaffian, random_orthogonal};
use crate::{tol, Error, Result};

/// Square real matrix acting on coordinate columns.
pub type Endomorphism = DMatrix<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }
}

/// `(V, g)` with `dim V = n = 2m`, given by its Gram matrix in the working basis.
///
/// The working basis is taken as positively oriented when `oriented` is set.
#[derive(Clone, Debug)]
pub struct InnerProductSpace {
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    // columns form a positively oriented g-orthonormal basis
    frame: DMatrix<f64>,
    frame_inv: DMatrix<f64>,
    oriented: bool,
}

impl InnerProductSpace {
    pub fn new(gram: DMatrix<f64>, oriented: bool) -> Result<Self> {
        let n = gram.nrows();
        if gram.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: gram.ncols(),
            });
        }
        if n < 2 || n % 2 == 1 {
            return Err(Error::OddDimension(n));
        }
        let asym = (&gram - gram.transpose()).norm();
        if asym > 1e-12 * gram.norm() {
            return Err(Error::NotSymmetric(asym));
        }
        let gram = (&gram + gram.transpose()) * 0.5;
        let chol = gram.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
        let l = chol.l();
        let frame_inv = l.transpose();
        let frame = frame_inv
            .clone()
            .try_inverse()
            .ok_or(Error::NotPositiveDefinite)?;
        let gram_inv = chol.inverse();
        Ok(Self {
            gram,
            gram_inv,
            frame,
            frame_inv,
            oriented,
        })
    }

    /// Standard Euclidean space of dimension `n`, oriented.
    pub fn euclidean(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n), true)
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    /// Half the dimension.
    pub fn m(&self) -> usize {
        self.dim() / 2
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    /// Positively oriented g-orthonormal basis, as columns.
    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn frame_inv(&self) -> &DMatrix<f64> {
        &self.frame_inv
    }

    pub fn is_oriented(&self) -> bool {
        self.oriented
    }

    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.gram * y)[(0, 0)]
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Index raising: the vector dual to a covector.
    pub fn sharp(&self, covector: &DVector<f64>) -> DVector<f64> {
        &self.gram_inv * covector
    }

    /// g-adjoint `A* = G⁻¹AᵀG`.
    pub fn adjoint(&self, a: &Endomorphism) -> Endomorphism {
        &self.gram_inv * a.transpose() * &self.gram
    }

    fn check_dim(&self, a: &Endomorphism) -> Result<()> {
        let n = self.dim();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.nrows(),
            });
        }
        Ok(())
    }

    /// Relative skewness residual `‖GA + AᵀG‖ / max(1, ‖G‖‖A‖)`.
    pub fn skew_residual(&self, a: &Endomorphism) -> f64 {
        let ga = &self.gram * a;
        (&ga + ga.transpose()).norm() / (self.gram.norm() * a.norm()).max(1.0)
    }

    pub fn symmetric_residual(&self, a: &Endomorphism) -> f64 {
        let ga = &self.gram * a;
        (&ga - ga.transpose()).norm() / (self.gram.norm() * a.norm()).max(1.0)
    }

    pub fn is_skew(&self, a: &Endomorphism, tol: f64) -> bool {
        a.nrows() == self.dim() && self.skew_residual(a) <= tol
    }

    pub fn is_symmetric(&self, a: &Endomorphism, tol: f64) -> bool {
        a.nrows() == self.dim() && self.symmetric_residual(a) <= tol
    }

    /// g-symmetric with strictly positive spectrum.
    pub fn is_positive(&self, a: &Endomorphism, tol: f64) -> bool {
        if !self.is_symmetric(a, tol) {
            return false;
        }
        let m = self.to_orthonormal(a);
        let m = (&m + m.transpose()) * 0.5;
        m.symmetric_eigenvalues().iter().all(|&l| l > tol)
    }

    /// Matrix of `a` in the oriented orthonormal frame.
    pub fn to_orthonormal(&self, a: &Endomorphism) -> DMatrix<f64> {
        &self.frame_inv * a * &self.frame
    }

    pub fn from_orthonormal(&self, a: &DMatrix<f64>) -> Endomorphism {
        &self.frame * a * &self.frame_inv
    }

    /// Metric on `Hom(V, V)`: `½ Trace{X ↦ g(A X, B X)}`.
    pub fn hom_metric(&self, a: &Endomorphism, b: &Endomorphism) -> f64 {
        0.5 * (self.adjoint(a) * b).trace()
    }

    pub fn hom_norm(&self, a: &Endomorphism) -> f64 {
        self.hom_metric(a, a).max(0.0).sqrt()
    }

    /// `G(S, T) = −½ Trace(S∘T)` on `so(V)`, rejecting non-skew input.
    pub fn so_metric(&self, s: &Endomorphism, t: &Endomorphism) -> Result<f64> {
        for a in [s, t] {
            self.check_dim(a)?;
            let r = self.skew_residual(a);
            if r > tol::VALIDATION {
                return Err(Error::NotSkew(r));
            }
        }
        Ok(self.so_metric_fast(s, t))
    }

    pub fn so_metric_fast(&self, s: &Endomorphism, t: &Endomorphism) -> f64 {
        -0.5 * (s * t).trace()
    }

    /// `Pf(JᵀG)` sign: `+1` when `J` induces the orientation of the working basis.
    pub fn orientation_of(&self, j: &Endomorphism) -> Orientation {
        let omega = j.transpose() * &self.gram;
        let omega = (&omega - omega.transpose()) * 0.5;
        if pfaffian(&omega) >= 0.0 {
            Orientation::Positive
        } else {
            Orientation::Negative
        }
    }
}

/// A g-orthogonal complex structure `J`, `J² = −Id`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalComplexStructure {
    mat: Endomorphism,
}

impl OrthogonalComplexStructure {
    pub fn new(space: &InnerProductSpace, mat: Endomorphism) -> Result<Self> {
        Self::with_tolerance(space, mat, tol::VALIDATION)
    }

    pub fn with_tolerance(space: &InnerProductSpace, mat: Endomorphism, tol: f64) -> Result<Self> {
        space.check_dim(&mat)?;
        let (square, orth) = Self::residuals(space, &mat);
        if square > tol {
            return Err(Error::NotComplexStructure(square));
        }
        if orth > tol {
            return Err(Error::NotCompatible(orth));
        }
        Ok(Self { mat })
    }

    /// Skips every check.
    pub fn new_unchecked(mat: Endomorphism) -> Self {
        Self { mat }
    }

    /// `(‖J² + Id‖, ‖JᵀGJ − G‖/‖G‖)`, both relative to `‖J‖²`.
    pub fn residuals(space: &InnerProductSpace, mat: &Endomorphism) -> (f64, f64) {
        let n = space.dim();
        let scale = mat.norm_squared().max(1.0);
        let square = (mat * mat + DMatrix::identity(n, n)).norm() / scale;
        let g = space.gram();
        let orth = (mat.transpose() * g * mat - g).norm() / (g.norm() * scale);
        (square, orth)
    }

    /// `J₀` in the space's oriented orthonormal frame: `f_{2k-1} ↦ f_{2k}`.
    pub fn standard(space: &InnerProductSpace) -> Self {
        Self::new_unchecked(space.from_orthonormal(&standard_block(space.dim(), Orientation::Positive)))
    }

    pub fn mat(&self) -> &Endomorphism {
        &self.mat
    }

    pub fn into_mat(self) -> Endomorphism {
        self.mat
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.mat * x
    }

    pub fn orientation(&self, space: &InnerProductSpace) -> Result<Orientation> {
        if !space.is_oriented() {
            return Err(Error::NotOriented);
        }
        Ok(space.orientation_of(&self.mat))
    }
}

/// Block-diagonal standard structure in orthonormal coordinates; the last
/// block is reversed for the negative orientation.
fn standard_block(n: usize, orientation: Orientation) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(n, n);
    for k in 0..n / 2 {
        let sign = if k + 1 == n / 2 { orientation.sign() } else { 1.0 };
        j[(2 * k + 1, 2 * k)] = sign;
        j[(2 * k, 2 * k + 1)] = -sign;
    }
    j
}

/// Tangent vector to the fibre `F(V)` at `J`: g-skew and anticommuting with `J`.
#[derive(Clone, Debug)]
pub struct VerticalVector {
    base: Endomorphism,
    value: Endomorphism,
}

impl VerticalVector {
    pub fn new(
        space: &InnerProductSpace,
        base: &OrthogonalComplexStructure,
        value: Endomorphism,
    ) -> Result<Self> {
        Self::with_tolerance(space, base, value, tol::VALIDATION)
    }

    pub fn with_tolerance(
        space: &InnerProductSpace,
        base: &OrthogonalComplexStructure,
        value: Endomorphism,
        tol: f64,
    ) -> Result<Self> {
        space.check_dim(&value)?;
        let skew = space.skew_residual(&value);
        if skew > tol {
            return Err(Error::NotSkew(skew));
        }
        let r = vertical_residual(base, &value);
        if r > tol {
            return Err(Error::NotVertical(r));
        }
        Ok(Self {
            base: base.mat().clone(),
            value,
        })
    }

    pub fn zero(base: &OrthogonalComplexStructure) -> Self {
        let n = base.mat().nrows();
        Self {
            base: base.mat().clone(),
            value: DMatrix::zeros(n, n),
        }
    }

    pub fn base(&self) -> &Endomorphism {
        &self.base
    }

    pub fn value(&self) -> &Endomorphism {
        &self.value
    }

    pub fn into_value(self) -> Endomorphism {
        self.value
    }
}

/// `‖VJ + JV‖ / max(1, ‖V‖‖J‖)`.
pub fn vertical_residual(j: &OrthogonalComplexStructure, v: &Endomorphism) -> f64 {
    let j = j.mat();
    (v * j + j * v).norm() / (v.norm() * j.norm()).max(1.0)
}

/// Orthogonal projection `½(φ + JφJ)` of `so(V)` onto `T_J F(V)`.
pub fn vertical_project(
    space: &InnerProductSpace,
    j: &OrthogonalComplexStructure,
    phi: &Endomorphism,
) -> Result<VerticalVector> {
    space.check_dim(phi)?;
    let r = space.skew_residual(phi);
    if r > tol::VALIDATION {
        return Err(Error::NotSkew(r));
    }
    Ok(VerticalVector {
        base: j.mat().clone(),
        value: vertical_project_fast(j, phi),
    })
}

pub fn vertical_project_fast(j: &OrthogonalComplexStructure, phi: &Endomorphism) -> Endomorphism {
    let j = j.mat();
    (phi + j * phi * j) * 0.5
}

/// G-orthonormal basis of `T_J F(V)` (dimension `m² − m`).
pub fn vertical_basis(space: &InnerProductSpace, j: &OrthogonalComplexStructure) -> Vec<Endomorphism> {
    let n = space.dim();
    let mut basis: Vec<Endomorphism> = Vec::new();
    for (a, b) in crate::linalg::pairs(n) {
        // elementary rotation in the orthonormal frame
        let mut e = DMatrix::zeros(n, n);
        e[(b, a)] = 1.0;
        e[(a, b)] = -1.0;
        let mut v = vertical_project_fast(j, &space.from_orthonormal(&e));
        for u in &basis {
            let c = space.so_metric_fast(u, &v);
            v -= u * c;
        }
        let norm = space.so_metric_fast(&v, &v).max(0.0).sqrt();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
    }
    basis
}

/// Random compatible structure: `J₀` conjugated by a Haar-random g-orthogonal map.
///
/// With `Some(orientation)` the conjugating map is special orthogonal and the
/// base structure has the requested orientation; with `None` the orientation
/// is random.
pub fn random_compatible(
    space: &InnerProductSpace,
    seed: u64,
    orientation: Option<Orientation>,
) -> OrthogonalComplexStructure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.dim();
    let (o, base) = match orientation {
        Some(orient) => (random_orthogonal(&mut rng, n, true), standard_block(n, orient)),
        None => (
            random_orthogonal(&mut rng, n, false),
            standard_block(n, Orientation::Positive),
        ),
    };
    let j = &o * base * o.transpose();
    OrthogonalComplexStructure::new_unchecked(space.from_orthonormal(&j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation12(n: usize) -> DMatrix<f64> {
        let mut e = DMatrix::zeros(n, n);
        e[(1, 0)] = 1.0;
        e[(0, 1)] = -1.0;
        e
    }

    #[test]
    fn so_metric_examples() {
        let v = InnerProductSpace::euclidean(4).unwrap();
        let r = rotation12(4);
        assert!((v.so_metric(&r, &r).unwrap() - 1.0).abs() < 1e-15);
        let j0 = OrthogonalComplexStructure::standard(&v);
        assert!((v.so_metric(j0.mat(), j0.mat()).unwrap() - 2.0).abs() < 1e-15);

        let j = random_compatible(&v, 5, Some(Orientation::Positive));
        let phi = crate::linalg::gaussian_matrix(&mut ChaCha8Rng::seed_from_u64(1), 4, 4);
        let phi = &phi - phi.transpose();
        let ver = vertical_project_fast(&j, &phi);
        let hor = &phi - &ver; // commutes with J
        assert!(v.so_metric(&ver, &hor).unwrap().abs() < 1e-13);
    }

    #[test]
    fn so_metric_rejects_symmetric_input() {
        let v = InnerProductSpace::euclidean(2).unwrap();
        let s = DMatrix::identity(2, 2);
        assert!(matches!(v.so_metric(&s, &s), Err(Error::NotSkew(_))));
        assert!(matches!(
            v.so_metric(&DMatrix::zeros(4, 4), &DMatrix::zeros(4, 4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn space_validation() {
        assert!(matches!(
            InnerProductSpace::new(DMatrix::identity(3, 3), true),
            Err(Error::OddDimension(3))
        ));
        let mut g = DMatrix::identity(2, 2);
        g[(0, 1)] = 0.5;
        assert!(matches!(InnerProductSpace::new(g, true), Err(Error::NotSymmetric(_))));
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(InnerProductSpace::new(g, true), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn projection_examples() {
        let v = InnerProductSpace::euclidean(4).unwrap();
        let j = OrthogonalComplexStructure::standard(&v);
        // J commutes with itself
        let p = vertical_project(&v, &j, j.mat()).unwrap();
        assert!(p.value().norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let phi = crate::linalg::gaussian_matrix(&mut rng, 4, 4);
        let phi = &phi - phi.transpose();
        let r = vertical_project(&v, &j, &phi).unwrap();
        assert!(vertical_residual(&j, r.value()) < 1e-15);
        let rr = vertical_project(&v, &j, r.value()).unwrap();
        assert!((rr.value() - r.value()).norm() < 1e-15);
        // already vertical input is fixed
        let again = vertical_project(&v, &j, rr.value()).unwrap();
        assert!((again.value() - rr.value()).norm() < 1e-15);
    }

    #[test]
    fn vertical_dimension_is_m_squared_minus_m() {
        for n in [2usize, 4, 6, 8] {
            let mut g = crate::linalg::random_spd(&mut ChaCha8Rng::seed_from_u64(n as u64), n, 0.5, 2.0);
            g = (&g + g.transpose()) * 0.5;
            let v = InnerProductSpace::new(g, true).unwrap();
            let j = random_compatible(&v, 100 + n as u64, None);
            let m = n / 2;
            assert_eq!(vertical_basis(&v, &j).len(), m * m - m, "n = {n}");
        }
    }

    #[test]
    fn random_compatible_is_deterministic_and_valid() {
        let g = crate::linalg::random_spd(&mut ChaCha8Rng::seed_from_u64(2), 6, 0.3, 3.0);
        let v = InnerProductSpace::new(g, true).unwrap();
        let a = random_compatible(&v, 42, Some(Orientation::Negative));
        let b = random_compatible(&v, 42, Some(Orientation::Negative));
        assert_eq!(a, b);
        assert!(OrthogonalComplexStructure::new(&v, a.mat().clone()).is_ok());
        assert_eq!(a.orientation(&v).unwrap(), Orientation::Negative);
        let c = random_compatible(&v, 43, Some(Orientation::Positive));
        assert_eq!(c.orientation(&v).unwrap(), Orientation::Positive);
    }

    #[test]
    fn complex_structure_validation() {
        let v = InnerProductSpace::euclidean(2).unwrap();
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 0.5, 0.0]);
        // squares to -Id but is not orthogonal
        assert!(matches!(
            OrthogonalComplexStructure::new(&v, bad),
            Err(Error::NotCompatible(_))
        ));
        assert!(matches!(
            OrthogonalComplexStructure::new(&v, DMatrix::identity(2, 2)),
            Err(Error::NotComplexStructure(_))
        ));
    }
}
