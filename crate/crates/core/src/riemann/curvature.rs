//! Curvature tensor, curvature operator on `Λ²` and its decomposition.

use nalgebra::{DMatrix, DVector};

use super::{Christoffel, MetricField, MetricJet};
use crate::fiber::{hodge_star, lambda2_gram, InnerProductSpace, TwoVector};
use crate::linalg::pairs;
use crate::{Error, Result};

/// The endomorphisms `R(e_i, e_j)` of the coordinate basis.
#[derive(Clone, Debug)]
pub struct CurvatureTensor {
    n: usize,
    endos: Vec<DMatrix<f64>>,
}

impl CurvatureTensor {
    /// `R^l_{kij} = −(∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{im}Γ^m_{jk} − Γ^l_{jm}Γ^m_{ik})`.
    pub fn from_connection(gamma: &Christoffel, dgamma: &[Christoffel]) -> Self {
        let n = gamma.dim();
        let mut endos = vec![DMatrix::zeros(n, n); n * n];
        for i in 0..n {
            for j in 0..n {
                endos[i * n + j] = DMatrix::from_fn(n, n, |l, k| {
                    let mut v = dgamma[i].get(l, j, k) - dgamma[j].get(l, i, k);
                    for m in 0..n {
                        v += gamma.get(l, i, m) * gamma.get(m, j, k)
                            - gamma.get(l, j, m) * gamma.get(m, i, k);
                    }
                    -v
                });
            }
        }
        Self { n, endos }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `R(e_i, e_j)`.
    pub fn endo(&self, i: usize, j: usize) -> &DMatrix<f64> {
        &self.endos[i * self.n + j]
    }

    /// `R(X, Y)` as an endomorphism.
    pub fn apply_pair(&self, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let c = x[i] * y[j];
                if c != 0.0 {
                    out += self.endo(i, j) * c;
                }
            }
        }
        out
    }

    /// `R(X, Y)Z`.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        self.apply_pair(x, y) * z
    }

    /// `R(σ) = Σ_{i<j} σ^{ij} R(e_i, e_j)`, the linear extension to `Λ²`.
    pub fn of_bivector(&self, sigma: &TwoVector) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (k, (i, j)) in pairs(self.n).into_iter().enumerate() {
            out += self.endo(i, j) * sigma.coeffs()[k];
        }
        out
    }

    /// `g(R(e_i, e_j)e_k, e_l)`.
    pub fn lowered(&self, gram: &DMatrix<f64>, i: usize, j: usize, k: usize, l: usize) -> f64 {
        (gram.row(l) * self.endo(i, j).column(k))[(0, 0)]
    }
}

/// Curvature data at one point.
#[derive(Clone, Debug)]
pub struct CurvatureData {
    space: InnerProductSpace,
    christoffel: Christoffel,
    tensor: CurvatureTensor,
    operator: DMatrix<f64>,
    ricci: DMatrix<f64>,
    rho: DMatrix<f64>,
    tau: f64,
}

impl CurvatureData {
    pub fn from_jet(jet: &MetricJet) -> Result<Self> {
        let space = InnerProductSpace::new(jet.g.clone(), true)?;
        let christoffel = Christoffel::from_jet(jet);
        let dgamma = Christoffel::derivatives_from_jet(jet);
        let tensor = CurvatureTensor::from_connection(&christoffel, &dgamma);
        let n = space.dim();
        let g = space.gram();
        let ginv = space.gram_inv();
        let ps = pairs(n);
        // K_QP = g(R(e_p1, e_p2)e_q1, e_q2) and H·M = K
        let k = DMatrix::from_fn(ps.len(), ps.len(), |q, p| {
            tensor.lowered(g, ps[p].0, ps[p].1, ps[q].0, ps[q].1)
        });
        let k = (&k + k.transpose()) * 0.5;
        let h = lambda2_gram(&space);
        let operator = h.cholesky().ok_or(Error::Singular)?.solve(&k);
        let ricci = DMatrix::from_fn(n, n, |x, y| {
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s += ginv[(a, b)] * tensor.lowered(g, a, x, b, y);
                }
            }
            s
        });
        let ricci = (&ricci + ricci.transpose()) * 0.5;
        let rho = ginv * &ricci;
        let tau = rho.trace();
        Ok(Self {
            space,
            christoffel,
            tensor,
            operator,
            ricci,
            rho,
            tau,
        })
    }

    pub fn space(&self) -> &InnerProductSpace {
        &self.space
    }

    pub fn christoffel(&self) -> &Christoffel {
        &self.christoffel
    }

    pub fn tensor(&self) -> &CurvatureTensor {
        &self.tensor
    }

    /// Matrix of `ℛ` on coordinate wedge coefficients.
    pub fn operator(&self) -> &DMatrix<f64> {
        &self.operator
    }

    /// `Ricci(e_a, e_b)`.
    pub fn ricci(&self) -> &DMatrix<f64> {
        &self.ricci
    }

    /// Ricci operator `ρ` with `g(ρX, Y) = Ricci(X, Y)`.
    pub fn rho(&self) -> &DMatrix<f64> {
        &self.rho
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn decompose(&self) -> Result<CurvatureParts> {
        decompose(&self.space, &self.operator, &self.rho, self.tau)
    }

    /// `R(σ)`; equals `½(ℛσ)^∨`.
    pub fn of_bivector(&self, sigma: &TwoVector) -> DMatrix<f64> {
        self.tensor.of_bivector(sigma)
    }
}

pub fn curvature(metric: &MetricField, p: &DVector<f64>) -> Result<CurvatureData> {
    CurvatureData::from_jet(&metric.jet(p)?)
}

/// `ℛ = (2τ/(n(n−1))) Id + ℬ + 𝒲`, and `𝒲 = 𝒲₊ + 𝒲₋` in oriented dimension 4.
#[derive(Clone, Debug)]
pub struct CurvatureParts {
    pub scalar: DMatrix<f64>,
    pub traceless_ricci: DMatrix<f64>,
    pub weyl: DMatrix<f64>,
    pub weyl_plus: Option<DMatrix<f64>>,
    pub weyl_minus: Option<DMatrix<f64>>,
}

/// Operator on wedge coefficients induced by `X∧Y ↦ X∧AY + AX∧Y`.
pub fn derivation_operator(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let ps = pairs(n);
    let mut out = DMatrix::zeros(ps.len(), ps.len());
    for (col, &(i, j)) in ps.iter().enumerate() {
        let s = TwoVector::basis(n, i, j).to_antisymmetric();
        let image = a * &s + &s * a.transpose();
        out.set_column(col, TwoVector::from_antisymmetric(&image).coeffs());
    }
    out
}

pub fn decompose(
    space: &InnerProductSpace,
    operator: &DMatrix<f64>,
    rho: &DMatrix<f64>,
    tau: f64,
) -> Result<CurvatureParts> {
    let n = space.dim();
    if n < 3 {
        return Err(Error::UnsupportedDimension {
            op: "decompose",
            required: "n >= 3",
            found: n,
        });
    }
    let nf = n as f64;
    let dim = operator.nrows();
    let id = DMatrix::<f64>::identity(dim, dim);
    let scalar = &id * (2.0 * tau / (nf * (nf - 1.0)));
    let traceless_ricci =
        (derivation_operator(rho) - &id * (2.0 * tau / nf)) * (2.0 / (nf - 2.0));
    let weyl = operator - &scalar - &traceless_ricci;
    let (weyl_plus, weyl_minus) = if n == 4 && space.is_oriented() {
        let star = hodge_star(space)?;
        let sw = &star * &weyl;
        (Some((&weyl + &sw) * 0.5), Some((&weyl - &sw) * 0.5))
    } else {
        (None, None)
    };
    Ok(CurvatureParts {
        scalar,
        traceless_ricci,
        weyl,
        weyl_plus,
        weyl_minus,
    })
}

/// `Tr(A ∘ B)`; an inner product on operators self-adjoint for the `Λ²` metric.
pub fn operator_pairing(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a * b).trace()
}

pub fn operator_norm(a: &DMatrix<f64>) -> f64 {
    operator_pairing(a, a).max(0.0).sqrt()
}

/// `‖R(X,Y)Z + R(Y,Z)X + R(Z,X)Y‖`.
pub fn bianchi_residual(
    tensor: &CurvatureTensor,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> f64 {
    (tensor.apply(x, y, z) + tensor.apply(y, z, x) + tensor.apply(z, x, y)).norm()
}

/// `(div Ricci, dτ)` at `p` as coordinate covectors, with
/// `(div Ricci)_b = g^{ac} (∇_a Ricci)_{cb}`. Both are obtained by
/// finite differences of the curvature field.
pub fn ricci_divergence(metric: &MetricField, p: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = metric.dim();
    let h = metric.step();
    let reach = super::fd::REACH * h;
    metric.domain().check_reach(p, reach)?;
    let ric = |q: &DVector<f64>| Ok(curvature(metric, q)?.ricci().clone());
    let tau = |q: &DVector<f64>| Ok(DMatrix::from_element(1, 1, curvature(metric, q)?.tau()));
    let d_ric = super::fd::partials(&ric, p, h)?;
    let d_tau = super::fd::partials(&tau, p, h)?;
    let here = curvature(metric, p)?;
    let gamma = here.christoffel();
    let ginv = here.space().gram_inv();
    let r = here.ricci();
    let mut div = DVector::zeros(n);
    for b in 0..n {
        let mut s = 0.0;
        for a in 0..n {
            for c in 0..n {
                // (∇_a Ric)_{cb} = ∂_a Ric_cb − Γ^m_{ac} Ric_mb − Γ^m_{ab} Ric_cm
                let mut nabla = d_ric[a][(c, b)];
                for m in 0..n {
                    nabla -= gamma.get(m, a, c) * r[(m, b)] + gamma.get(m, a, b) * r[(c, m)];
                }
                s += ginv[(a, c)] * nabla;
            }
        }
        div[b] = s;
    }
    let dtau = DVector::from_fn(n, |k, _| d_tau[k][(0, 0)]);
    Ok((div, dtau))
}
