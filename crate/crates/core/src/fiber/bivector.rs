//! `Λ²V` in the coordinate wedge basis `e_i∧e_j`, `i < j`.
//!
//! A 2-vector is also handled as its antisymmetric coefficient matrix `Σ̂`
//! with `σ = ½ Σ_{a,b} Σ̂_{ab} e_a∧e_b`; for `u∧v` this is `uvᵀ − vuᵀ`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use super::{Endomorphism, InnerProductSpace};
use crate::linalg::{pair_index, pairs};
use crate::{tol, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TwoVector {
    n: usize,
    coeffs: DVector<f64>,
}

impl TwoVector {
    pub fn new(n: usize, coeffs: DVector<f64>) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: coeffs.len(),
            });
        }
        Ok(Self { n, coeffs })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            coeffs: DVector::zeros(n * n.saturating_sub(1) / 2),
        }
    }

    /// `e_i ∧ e_j` for any `i ≠ j`.
    pub fn basis(n: usize, i: usize, j: usize) -> Self {
        let mut out = Self::zero(n);
        if i < j {
            out.coeffs[pair_index(n, i, j)] = 1.0;
        } else if j < i {
            out.coeffs[pair_index(n, j, i)] = -1.0;
        }
        out
    }

    pub fn wedge(u: &DVector<f64>, v: &DVector<f64>) -> Self {
        let n = u.len();
        let coeffs = DVector::from_iterator(
            n * (n - 1) / 2,
            pairs(n).into_iter().map(|(i, j)| u[i] * v[j] - u[j] * v[i]),
        );
        Self { n, coeffs }
    }

    /// From the antisymmetric coefficient matrix.
    pub fn from_antisymmetric(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let coeffs = DVector::from_iterator(
            n * (n - 1) / 2,
            pairs(n).into_iter().map(|(i, j)| 0.5 * (m[(i, j)] - m[(j, i)])),
        );
        Self { n, coeffs }
    }

    pub fn to_antisymmetric(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (k, (i, j)) in pairs(self.n).into_iter().enumerate() {
            m[(i, j)] = self.coeffs[k];
            m[(j, i)] = -self.coeffs[k];
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> DVector<f64> {
        self.coeffs
    }

    /// `⟨σ, τ⟩ = ¼ Tr(Σ̂ᵀ G T̂ G)`; on an orthonormal basis `|e_i∧e_j|² = ½`.
    pub fn inner(&self, space: &InnerProductSpace, other: &TwoVector) -> f64 {
        let g = space.gram();
        0.25 * (self.to_antisymmetric().transpose() * g * other.to_antisymmetric() * g).trace()
    }

    pub fn norm(&self, space: &InnerProductSpace) -> f64 {
        self.inner(space, self).max(0.0).sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            n: self.n,
            coeffs: &self.coeffs * c,
        }
    }
}

impl Add for &TwoVector {
    type Output = TwoVector;
    fn add(self, rhs: &TwoVector) -> TwoVector {
        TwoVector {
            n: self.n,
            coeffs: &self.coeffs + &rhs.coeffs,
        }
    }
}

impl Sub for &TwoVector {
    type Output = TwoVector;
    fn sub(self, rhs: &TwoVector) -> TwoVector {
        TwoVector {
            n: self.n,
            coeffs: &self.coeffs - &rhs.coeffs,
        }
    }
}

impl Neg for &TwoVector {
    type Output = TwoVector;
    fn neg(self) -> TwoVector {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &TwoVector {
    type Output = TwoVector;
    fn mul(self, c: f64) -> TwoVector {
        self.scale(c)
    }
}

impl Add for TwoVector {
    type Output = TwoVector;
    fn add(self, rhs: TwoVector) -> TwoVector {
        &self + &rhs
    }
}

impl Sub for TwoVector {
    type Output = TwoVector;
    fn sub(self, rhs: TwoVector) -> TwoVector {
        &self - &rhs
    }
}

/// Gram matrix of the coordinate wedge basis: `H_PQ = ½(G_ik G_jl − G_il G_jk)`.
pub fn lambda2_gram(space: &InnerProductSpace) -> DMatrix<f64> {
    let g = space.gram();
    let ps = pairs(space.dim());
    DMatrix::from_fn(ps.len(), ps.len(), |p, q| {
        let (i, j) = ps[p];
        let (k, l) = ps[q];
        0.5 * (g[(i, k)] * g[(j, l)] - g[(i, l)] * g[(j, k)])
    })
}

/// `φ ↦ φ^`, defined by `2g(φ^, u∧v) = g(φu, v)`.
pub fn wedge_of_endo(space: &InnerProductSpace, phi: &Endomorphism) -> Result<TwoVector> {
    if phi.nrows() != space.dim() || phi.ncols() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: phi.nrows(),
        });
    }
    let r = space.skew_residual(phi);
    if r > tol::VALIDATION {
        return Err(Error::NotSkew(r));
    }
    Ok(wedge_of_endo_fast(space, phi))
}

pub fn wedge_of_endo_fast(space: &InnerProductSpace, phi: &Endomorphism) -> TwoVector {
    TwoVector::from_antisymmetric(&(-(phi * space.gram_inv())))
}

/// `σ ↦ σ^∨`, with `g(σ^∨X, Y) = 2g(σ, X∧Y)`; `(A∧B)^∨X = g(A,X)B − g(B,X)A`.
pub fn endo_of_wedge(space: &InnerProductSpace, sigma: &TwoVector) -> Endomorphism {
    -(sigma.to_antisymmetric() * space.gram())
}

/// Decomposable 2-vectors `f_a∧f_b` of the oriented orthonormal frame, as
/// coordinate coefficients; column `P` holds the image of the frame pair `P`.
fn frame_change(frame: &DMatrix<f64>) -> DMatrix<f64> {
    let n = frame.nrows();
    let ps = pairs(n);
    let mut t = DMatrix::zeros(ps.len(), ps.len());
    for (col, &(a, b)) in ps.iter().enumerate() {
        let w = TwoVector::wedge(&frame.column(a).into_owned(), &frame.column(b).into_owned());
        t.set_column(col, w.coeffs());
    }
    t
}

// ∗ on f-coefficients in pair order 01, 02, 03, 12, 13, 23.
const STAR_ORTHONORMAL: [(usize, f64); 6] =
    [(5, 1.0), (4, -1.0), (3, 1.0), (2, 1.0), (1, -1.0), (0, 1.0)];

fn require_oriented_four(space: &InnerProductSpace, op: &'static str) -> Result<()> {
    if space.dim() != 4 {
        return Err(Error::UnsupportedDimension {
            op,
            required: "n = 4",
            found: space.dim(),
        });
    }
    if !space.is_oriented() {
        return Err(Error::NotOriented);
    }
    Ok(())
}

/// Hodge star on `Λ²V`, `n = 4`, as a matrix acting on coordinate coefficients.
pub fn hodge_star(space: &InnerProductSpace) -> Result<DMatrix<f64>> {
    require_oriented_four(space, "hodge_star")?;
    let t = frame_change(space.frame());
    let mut s = DMatrix::zeros(6, 6);
    for (p, &(q, sign)) in STAR_ORTHONORMAL.iter().enumerate() {
        s[(q, p)] = sign;
    }
    let t_inv = t.clone().try_inverse().ok_or(Error::Singular)?;
    Ok(&t * s * t_inv)
}

/// `[s₁⁺, s₂⁺, s₃⁺, s₁⁻, s₂⁻, s₃⁻]` for an oriented orthonormal basis given as columns.
pub fn s_basis_from_frame(frame: &DMatrix<f64>) -> [TwoVector; 6] {
    let col = |k: usize| frame.column(k).into_owned();
    let w = |a: usize, b: usize| TwoVector::wedge(&col(a), &col(b));
    let (w12, w34) = (w(0, 1), w(2, 3));
    let (w13, w42) = (w(0, 2), w(3, 1));
    let (w14, w23) = (w(0, 3), w(1, 2));
    [
        &w12 + &w34,
        &w13 + &w42,
        &w14 + &w23,
        &w12 - &w34,
        &w13 - &w42,
        &w14 - &w23,
    ]
}

/// s-basis built on the space's own oriented orthonormal frame.
pub fn s_basis(space: &InnerProductSpace) -> Result<[TwoVector; 6]> {
    require_oriented_four(space, "s_basis")?;
    Ok(s_basis_from_frame(space.frame()))
}

/// `σ = σ₊ + σ₋` with `∗σ± = ±σ±`.
pub fn hodge_split(space: &InnerProductSpace, sigma: &TwoVector) -> Result<(TwoVector, TwoVector)> {
    let star = hodge_star(space)?;
    let s = star * sigma.coeffs();
    let plus = TwoVector::new(4, (sigma.coeffs() + &s) * 0.5)?;
    let minus = TwoVector::new(4, (sigma.coeffs() - &s) * 0.5)?;
    Ok((plus, minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::{random_compatible, OrthogonalComplexStructure, Orientation};
    use crate::linalg::{gaussian_matrix, gaussian_vector, random_spd};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn skew(space: &InnerProductSpace, rng: &mut ChaCha8Rng) -> Endomorphism {
        let m = gaussian_matrix(rng, space.dim(), space.dim());
        space.gram_inv() * (&m - m.transpose())
    }

    #[test]
    fn unit_rotation_maps_to_e1_wedge_e2() {
        let v = InnerProductSpace::euclidean(4).unwrap();
        let mut phi = DMatrix::zeros(4, 4);
        phi[(1, 0)] = 1.0;
        phi[(0, 1)] = -1.0;
        let w = wedge_of_endo(&v, &phi).unwrap();
        assert_eq!(w, TwoVector::basis(4, 0, 1));
        assert!((w.inner(&v, &w) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn standard_structure_maps_to_s1_plus() {
        let v = InnerProductSpace::euclidean(4).unwrap();
        let j0 = OrthogonalComplexStructure::standard(&v);
        let w = wedge_of_endo(&v, j0.mat()).unwrap();
        let expected = &TwoVector::basis(4, 0, 1) + &TwoVector::basis(4, 2, 3);
        assert!((w.coeffs() - expected.coeffs()).norm() < 1e-15);
        // defining identity on every basis pair
        for (i, j) in pairs(4) {
            let (ei, ej) = (unit(4, i), unit(4, j));
            let lhs = 2.0 * w.inner(&v, &TwoVector::wedge(&ei, &ej));
            let rhs = v.inner(&(j0.mat() * &ei), &ej);
            assert!((lhs - rhs).abs() < 1e-15);
        }
        assert!(wedge_of_endo(&v, &DMatrix::zeros(4, 4)).unwrap().coeffs().norm() == 0.0);
    }

    fn unit(n: usize, i: usize) -> DVector<f64> {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        e
    }

    #[test]
    fn vee_of_decomposable() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = InnerProductSpace::new(random_spd(&mut rng, 4, 0.5, 2.0), true).unwrap();
        let e = endo_of_wedge(&v, &TwoVector::basis(4, 0, 1));
        // orthonormal case gives e2 exactly; in general g(e1,e1)e2 − g(e2,e1)e1
        let x = unit(4, 0);
        let expected = unit(4, 1) * v.inner(&x, &x) - unit(4, 0) * v.inner(&unit(4, 1), &x);
        assert!((&e * &x - expected).norm() < 1e-13);
        let flat = InnerProductSpace::euclidean(4).unwrap();
        assert_eq!(endo_of_wedge(&flat, &TwoVector::basis(4, 0, 1)) * unit(4, 0), unit(4, 1));
        assert!(endo_of_wedge(&v, &TwoVector::zero(4)).norm() == 0.0);

        let (a, b, x) = (
            gaussian_vector(&mut rng, 4),
            gaussian_vector(&mut rng, 4),
            gaussian_vector(&mut rng, 4),
        );
        let lhs = endo_of_wedge(&v, &TwoVector::wedge(&a, &b)) * &x;
        let rhs = &b * v.inner(&a, &x) - &a * v.inner(&b, &x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn wedge_round_trip_and_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [2usize, 4, 6] {
            let v = InnerProductSpace::new(random_spd(&mut rng, n, 0.3, 3.0), true).unwrap();
            let (s, t) = (skew(&v, &mut rng), skew(&v, &mut rng));
            let sw = wedge_of_endo(&v, &s).unwrap();
            let tw = wedge_of_endo(&v, &t).unwrap();
            assert!((endo_of_wedge(&v, &sw) - &s).norm() < 1e-12 * s.norm());
            let lhs = 0.5 * v.so_metric(&s, &t).unwrap();
            assert!((lhs - sw.inner(&v, &tw)).abs() < 1e-10);
            // inner product through the Gram matrix agrees with the trace form
            let h = lambda2_gram(&v);
            let via_h = (sw.coeffs().transpose() * &h * tw.coeffs())[(0, 0)];
            assert!((via_h - sw.inner(&v, &tw)).abs() < 1e-12);
        }
    }

    #[test]
    fn wedge_rejects_non_skew() {
        let v = InnerProductSpace::euclidean(4).unwrap();
        assert!(matches!(
            wedge_of_endo(&v, &DMatrix::identity(4, 4)),
            Err(Error::NotSkew(_))
        ));
    }

    #[test]
    fn hodge_examples() {
        let v = InnerProductSpace::euclidean(4).unwrap();
        let star = hodge_star(&v).unwrap();
        let s12 = TwoVector::basis(4, 0, 1);
        assert!((&star * s12.coeffs() - TwoVector::basis(4, 2, 3).coeffs()).norm() < 1e-15);
        let s = s_basis(&v).unwrap();
        let (p, m) = hodge_split(&v, &s[0]).unwrap();
        assert!((p.coeffs() - s[0].coeffs()).norm() < 1e-15 && m.coeffs().norm() < 1e-15);
        let (p, m) = hodge_split(&v, &s[3]).unwrap();
        assert!(p.coeffs().norm() < 1e-15 && (m.coeffs() - s[3].coeffs()).norm() < 1e-15);
        // s-basis vectors are eigenvectors and orthonormal
        for (k, sk) in s.iter().enumerate() {
            let sign = if k < 3 { 1.0 } else { -1.0 };
            assert!((&star * sk.coeffs() - sk.coeffs() * sign).norm() < 1e-14);
            for (l, sl) in s.iter().enumerate() {
                let d = if k == l { 1.0 } else { 0.0 };
                assert!((sk.inner(&v, sl) - d).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hodge_star_involution_on_curved_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let v = InnerProductSpace::new(random_spd(&mut rng, 4, 0.2, 5.0), true).unwrap();
        let star = hodge_star(&v).unwrap();
        assert!((&star * &star - DMatrix::<f64>::identity(6, 6)).norm() < 1e-12);
        let sigma = TwoVector::new(4, gaussian_vector(&mut rng, 6)).unwrap();
        let (p, m) = hodge_split(&v, &sigma).unwrap();
        assert!(((&p + &m).coeffs() - sigma.coeffs()).norm() < 1e-13);
        assert!(p.inner(&v, &m).abs() < 1e-12);
    }

    #[test]
    fn hodge_dimension_and_orientation_errors() {
        let v6 = InnerProductSpace::euclidean(6).unwrap();
        assert!(matches!(hodge_star(&v6), Err(Error::UnsupportedDimension { .. })));
        let v = InnerProductSpace::new(DMatrix::identity(4, 4), false).unwrap();
        assert!(matches!(hodge_star(&v), Err(Error::NotOriented)));
    }

    #[test]
    fn positive_structures_live_in_the_unit_sphere_of_lambda2_plus() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let v = InnerProductSpace::new(random_spd(&mut rng, 4, 0.4, 2.5), true).unwrap();
        for seed in 0..50 {
            let j = random_compatible(&v, seed, Some(Orientation::Positive));
            let w = wedge_of_endo(&v, j.mat()).unwrap();
            let (_, minus) = hodge_split(&v, &w).unwrap();
            assert!(minus.norm(&v) < 1e-10);
            assert!((w.norm(&v) - 1.0).abs() < 1e-10);
            let j = random_compatible(&v, seed, Some(Orientation::Negative));
            let (plus, _) = hodge_split(&v, &wedge_of_endo(&v, j.mat()).unwrap()).unwrap();
            assert!(plus.norm(&v) < 1e-10);
        }
    }
}
