//! The endomorphism `C` relating two metrics, its principal square root `Q`,
//! and the conjugation `Ψ(I) = Q⁻¹IQ`.

use nalgebra::DMatrix;

use super::{Endomorphism, InnerProductSpace, OrthogonalComplexStructure};
use crate::linalg::gauss_legendre;
use crate::{tol, Error, Result};

/// `C = G⁻¹G̃`, i.e. `g(CX, Y) = g̃(X, Y)`.
pub fn transfer_endomorphism(g: &InnerProductSpace, gtilde: &DMatrix<f64>) -> Result<Endomorphism> {
    let target = InnerProductSpace::new(gtilde.clone(), g.is_oriented())?;
    if target.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: target.dim(),
        });
    }
    Ok(g.gram_inv() * target.gram())
}

/// Principal square root of a g-symmetric positive endomorphism, through the
/// symmetric eigendecomposition of its matrix in a g-orthonormal frame.
pub fn principal_sqrt(space: &InnerProductSpace, c: &Endomorphism) -> Result<Endomorphism> {
    let r = space.symmetric_residual(c);
    if r > tol::VALIDATION {
        return Err(Error::NotSymmetric(r));
    }
    let s = sqrt_symmetric(&space.to_orthonormal(c))?;
    Ok(space.from_orthonormal(&s))
}

/// Square root of a symmetric positive definite matrix (any size).
pub fn sqrt_symmetric(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = (m + m.transpose()) * 0.5;
    let eig = m.symmetric_eigen();
    let top = eig.eigenvalues.max().abs().max(f64::MIN_POSITIVE);
    let low = eig.eigenvalues.min();
    if low <= tol::EIGEN * top {
        return Err(Error::NonPositiveSpectrum(low));
    }
    let root = eig.eigenvalues.map(f64::sqrt);
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose())
}

/// `ln A = (A − I) ∫₀¹ [(1−λ)I + λA]⁻¹ dλ` by Gauss-Legendre quadrature.
///
/// `A` must have positive real spectrum. It is rescaled to unit mean
/// eigenvalue before integrating and the shift is added back.
pub fn log_via_integral(a: &DMatrix<f64>, nodes: usize) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let trace = a.trace();
    if trace <= 0.0 {
        return Err(Error::NonPositiveSpectrum(trace));
    }
    let c = n as f64 / trace;
    let scaled = a * c;
    let id = DMatrix::<f64>::identity(n, n);
    let (x, w) = gauss_legendre(nodes);
    let mut integral = DMatrix::zeros(n, n);
    for (lam, wt) in x.iter().zip(&w) {
        let m = &id * (1.0 - lam) + &scaled * *lam;
        let inv = m.try_inverse().ok_or(Error::Singular)?;
        integral += inv * *wt;
    }
    Ok((&scaled - &id) * integral - id * c.ln())
}

/// `exp(½ ln C)` with the quadrature logarithm; cross-check for [`principal_sqrt`].
pub fn principal_sqrt_via_log(c: &Endomorphism, nodes: usize) -> Result<Endomorphism> {
    Ok((log_via_integral(c, nodes)? * 0.5).exp())
}

/// `C`, `Q = √C` and `Q⁻¹` for an ordered pair of inner products on one space.
#[derive(Clone, Debug)]
pub struct MetricTransfer {
    source: InnerProductSpace,
    target: InnerProductSpace,
    c: Endomorphism,
    q: Endomorphism,
    q_inv: Endomorphism,
}

impl MetricTransfer {
    pub fn new(source: &InnerProductSpace, target: &InnerProductSpace) -> Result<Self> {
        if source.dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: source.dim(),
                found: target.dim(),
            });
        }
        let c = source.gram_inv() * target.gram();
        let q = principal_sqrt(source, &c)?;
        let q_inv = q.clone().try_inverse().ok_or(Error::Singular)?;
        Ok(Self {
            source: source.clone(),
            target: target.clone(),
            c,
            q,
            q_inv,
        })
    }

    pub fn source(&self) -> &InnerProductSpace {
        &self.source
    }

    pub fn target(&self) -> &InnerProductSpace {
        &self.target
    }

    pub fn c(&self) -> &Endomorphism {
        &self.c
    }

    pub fn q(&self) -> &Endomorphism {
        &self.q
    }

    pub fn q_inv(&self) -> &Endomorphism {
        &self.q_inv
    }

    /// `A ↦ Q⁻¹AQ`.
    pub fn conjugate(&self, a: &Endomorphism) -> Endomorphism {
        &self.q_inv * a * &self.q
    }

    pub fn psi(&self, i: &OrthogonalComplexStructure) -> Result<OrthogonalComplexStructure> {
        OrthogonalComplexStructure::new(&self.target, self.conjugate(i.mat()))
    }
}

/// `Q⁻¹AQ` for an arbitrary endomorphism.
pub fn psi_endo(transfer: &MetricTransfer, a: &Endomorphism) -> Endomorphism {
    transfer.conjugate(a)
}

/// `Ψ(I)` for `I` compatible with `g`; the result is checked against `g̃`.
pub fn psi_point(
    g: &InnerProductSpace,
    gtilde: &InnerProductSpace,
    i: &OrthogonalComplexStructure,
) -> Result<OrthogonalComplexStructure> {
    OrthogonalComplexStructure::new(g, i.mat().clone())?;
    MetricTransfer::new(g, gtilde)?.psi(i)
}

/// g̃-compatible structure from an arbitrary almost complex `I`: average the
/// metric with `g(X,Y) = g̃(X,Y) + g̃(IX,IY)`, then transfer.
pub fn make_compatible_structure(
    gtilde: &InnerProductSpace,
    i: &Endomorphism,
) -> Result<OrthogonalComplexStructure> {
    let n = gtilde.dim();
    if i.nrows() != n || i.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: i.nrows(),
        });
    }
    let square = (i * i + DMatrix::identity(n, n)).norm() / i.norm_squared().max(1.0);
    if square > tol::VALIDATION {
        return Err(Error::NotComplexStructure(square));
    }
    let gt = gtilde.gram();
    let aux = gt + i.transpose() * gt * i;
    let aux = (&aux + aux.transpose()) * 0.5;
    let g = InnerProductSpace::new(aux, gtilde.is_oriented())?;
    let i = OrthogonalComplexStructure::new(&g, i.clone())?;
    MetricTransfer::new(&g, gtilde)?.psi(&i)
}
