//! Levi-Civita connection coefficients and covariant derivatives of fields.

use nalgebra::{DMatrix, DVector};

use super::{fd, MetricField, MetricJet, ScalarField};
use crate::Result;

/// `Γ^k_{ij}` with `∇_{e_i} e_j = Γ^k_{ij} e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.n + i) * self.n + j] = v;
    }

    pub(crate) fn set_entry(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.set(k, i, j, v);
    }

    /// Levi-Civita coefficients from a metric jet.
    pub fn from_jet(jet: &MetricJet) -> Self {
        let n = jet.dim();
        let ginv = jet.g.clone().try_inverse().expect("metric jets are positive definite");
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                // lowered: Γ_{m,ij} = ½(∂_i g_mj + ∂_j g_mi − ∂_m g_ij)
                let low = DVector::from_fn(n, |m, _| {
                    0.5 * (jet.dg[i][(m, j)] + jet.dg[j][(m, i)] - jet.dg[m][(i, j)])
                });
                let up = &ginv * low;
                for k in 0..n {
                    out.set(k, i, j, up[k]);
                }
            }
        }
        out
    }

    /// `∂_a Γ` for every coordinate axis `a`, from the same jet.
    pub fn derivatives_from_jet(jet: &MetricJet) -> Vec<Self> {
        let n = jet.dim();
        let ginv = jet.g.clone().try_inverse().expect("metric jets are positive definite");
        (0..n)
            .map(|a| {
                let dginv = -(&ginv * &jet.dg[a] * &ginv);
                let mut out = Self::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        let low = DVector::from_fn(n, |m, _| {
                            0.5 * (jet.dg[i][(m, j)] + jet.dg[j][(m, i)] - jet.dg[m][(i, j)])
                        });
                        let dlow = DVector::from_fn(n, |m, _| {
                            0.5 * (jet.ddg[a][i][(m, j)] + jet.ddg[a][j][(m, i)]
                                - jet.ddg[a][m][(i, j)])
                        });
                        let up = &dginv * low + &ginv * dlow;
                        for k in 0..n {
                            out.set(k, i, j, up[k]);
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// `Γ(X, Y)^k = Γ^k_{ij} X^i Y^j`.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        &self.contract(x) * y
    }

    /// The matrix `Γ_X` with `(Γ_X)^k_j = Γ^k_{ij} X^i`, so `∇_X Y = ∂_X Y + Γ_X Y`.
    pub fn contract(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |k, j| (0..n).map(|i| self.get(k, i, j) * x[i]).sum())
    }

    pub fn sub(&self, other: &Christoffel) -> Christoffel {
        Christoffel {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `max |Γ^k_{ij} − Γ^k_{ji}|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut m: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    m = m.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        m
    }
}

pub fn christoffel(metric: &MetricField, p: &DVector<f64>) -> Result<Christoffel> {
    Ok(Christoffel::from_jet(&metric.jet(p)?))
}

/// `max |∂_k g_ij − Γ^m_{ki} g_mj − Γ^m_{kj} g_im|`.
pub fn metric_compatibility_residual(jet: &MetricJet, gamma: &Christoffel) -> f64 {
    let n = jet.dim();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let mut e = DVector::zeros(n);
        e[k] = 1.0;
        let gk = gamma.contract(&e);
        let r = &jet.dg[k] - gk.transpose() * &jet.g - &jet.g * gk;
        worst = worst.max(r.amax());
    }
    worst
}

/// `∇f = G⁻¹ df`.
pub fn gradient(metric: &MetricField, f: &ScalarField, p: &DVector<f64>) -> Result<DVector<f64>> {
    let g = metric.gram(p)?;
    let df = f.jet(p).grad;
    Ok(g.cholesky().expect("metric is positive definite").solve(&df))
}

/// `X(f)Y + Y(f)X − g(X,Y)∇f`: the difference `∇̃_X Y − ∇_X Y` for `g̃ = e^{2f}g`.
pub fn conformal_difference_tensor(
    gram: &DMatrix<f64>,
    df: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> DVector<f64> {
    let grad = gram.clone().cholesky().expect("metric is positive definite").solve(df);
    y * df.dot(x) + x * df.dot(y) - grad * (x.transpose() * gram * y)[(0, 0)]
}

/// `Γ̃ − Γ` at `p` for two metrics on the same chart.
pub fn difference_tensor(g: &MetricField, gtilde: &MetricField, p: &DVector<f64>) -> Result<Christoffel> {
    Ok(christoffel(gtilde, p)?.sub(&christoffel(g, p)?))
}

/// Matrix-valued field on the chart.
pub type EndoField<'a> = dyn Fn(&DVector<f64>) -> Result<DMatrix<f64>> + Sync + 'a;

/// `(∇_X L)(p) = ∂_X L + [Γ_X, L]`, with `∂_X L` by finite differences of step `metric.step()`.
pub fn cov_deriv_endofield(
    metric: &MetricField,
    field: &EndoField<'_>,
    x: &DVector<f64>,
    p: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let h = metric.step();
    metric.domain().check_reach(p, fd::REACH * h)?;
    let partials = fd::partials(&|q: &DVector<f64>| field(q), p, h)?;
    let mut d = DMatrix::zeros(metric.dim(), metric.dim());
    for (k, pk) in partials.iter().enumerate() {
        d += pk * x[k];
    }
    let gx = christoffel(metric, p)?.contract(x);
    let l = field(p)?;
    Ok(d + &gx * &l - &l * &gx)
}

/// `∇²_{X,Y} L = ∇_X(∇_Y L) − ∇_{∇_X Y} L` for constant coordinate vectors `X`, `Y`.
pub fn second_cov_deriv_endofield(
    metric: &MetricField,
    field: &EndoField<'_>,
    x: &DVector<f64>,
    y: &DVector<f64>,
    p: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let inner = |q: &DVector<f64>| cov_deriv_endofield(metric, field, y, q);
    let outer = cov_deriv_endofield(metric, &inner, x, p)?;
    let nxy = christoffel(metric, p)?.apply(x, y);
    Ok(outer - cov_deriv_endofield(metric, field, &nxy, p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann::{DerivativeMode, DomainBox, MetricKind};
    use crate::linalg::gaussian_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn field(kind: MetricKind, half: f64) -> MetricField {
        let n = kind.dim();
        MetricField::new(kind, DomainBox::cube(n, half), DerivativeMode::Analytic).unwrap()
    }

    #[test]
    fn flat_has_zero_christoffels() {
        let m = field(MetricKind::Diagonal(vec![1.0, 2.0, 3.0, 4.0]), 1.0);
        assert_eq!(christoffel(&m, &DVector::zeros(4)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn conformal_flat_closed_form() {
        let f = ScalarField::Quadratic {
            constant: 0.0,
            coeffs: vec![0.4, 0.0, -0.3, 0.1],
            hessian: vec![
                vec![0.2, 0.1, 0.0, 0.0],
                vec![0.1, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, -0.4, 0.0],
                vec![0.0, 0.0, 0.0, 0.3],
            ],
        };
        let m = field(MetricKind::conformal(MetricKind::Flat(4), f.clone()), 1.0);
        let p = DVector::from_row_slice(&[0.1, -0.2, 0.3, 0.4]);
        let gamma = christoffel(&m, &p).unwrap();
        let df = f.jet(&p).grad;
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    let expected = d(i, k) * df[j] + d(j, k) * df[i] - d(i, j) * df[k];
                    assert!((gamma.get(k, i, j) - expected).abs() < 1e-13);
                }
            }
        }
        assert!(gamma.asymmetry() < 1e-15);
        assert!(metric_compatibility_residual(&m.jet(&p).unwrap(), &gamma) < 1e-13);
    }

    #[test]
    fn polar_two_sphere() {
        let m = MetricField::new(
            MetricKind::SpherePolar { radius: 1.0 },
            DomainBox {
                lo: vec![0.3, -1.0],
                hi: vec![2.8, 1.0],
            },
            DerivativeMode::Analytic,
        )
        .unwrap();
        let theta: f64 = 1.1;
        let gamma = christoffel(&m, &DVector::from_row_slice(&[theta, 0.2])).unwrap();
        assert!((gamma.get(0, 1, 1) + theta.sin() * theta.cos()).abs() < 1e-14);
        assert!((gamma.get(1, 0, 1) - theta.cos() / theta.sin()).abs() < 1e-14);
        assert!(gamma.get(0, 0, 0).abs() < 1e-15);
    }

    #[test]
    fn difference_tensor_examples() {
        let g = DMatrix::<f64>::identity(4, 4);
        let df = DVector::from_row_slice(&[1.0, 0.0, 0.0, 0.0]);
        let e = |i: usize| {
            let mut v = DVector::zeros(4);
            v[i] = 1.0;
            v
        };
        assert_eq!(conformal_difference_tensor(&g, &df, &e(0), &e(0)), e(0));
        assert_eq!(conformal_difference_tensor(&g, &df, &e(1), &e(2)), DVector::zeros(4));
        let zero = DVector::zeros(4);
        assert_eq!(conformal_difference_tensor(&g, &zero, &e(1), &e(1)), DVector::zeros(4));

        // agrees with Γ̃ − Γ
        let f = ScalarField::coordinate(4, 0);
        let flat = field(MetricKind::Flat(4), 1.0);
        let conf = field(MetricKind::conformal(MetricKind::Flat(4), f), 1.0);
        let p = DVector::from_row_slice(&[0.2, 0.1, 0.0, -0.3]);
        let a = difference_tensor(&flat, &conf, &p).unwrap();
        let x = DVector::from_row_slice(&[0.3, -1.0, 0.5, 2.0]);
        let y = DVector::from_row_slice(&[1.0, 0.2, -0.4, 0.1]);
        assert!((a.apply(&x, &y) - conformal_difference_tensor(&g, &df, &x, &y)).norm() < 1e-13);
    }

    #[test]
    fn gradient_examples() {
        let flat = field(MetricKind::Flat(4), 1.0);
        let p = DVector::from_row_slice(&[0.2, 0.1, 0.0, -0.3]);
        let x1 = ScalarField::coordinate(4, 0);
        let e1 = DVector::from_row_slice(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(gradient(&flat, &x1, &p).unwrap(), e1);
        assert_eq!(gradient(&flat, &ScalarField::constant(2.0), &p).unwrap(), DVector::zeros(4));
        let h = ScalarField::Linear {
            constant: 0.0,
            coeffs: vec![0.5, 0.2, 0.1, -0.3],
        };
        let conf = field(MetricKind::conformal(MetricKind::Flat(4), h.clone()), 1.0);
        let scale = (-2.0 * h.value(&p)).exp();
        let expected = gradient(&flat, &x1, &p).unwrap() * scale;
        assert!((gradient(&conf, &x1, &p).unwrap() - expected).norm() < 1e-14);
    }

    fn random_field(seed: u64) -> impl Fn(&DVector<f64>) -> Result<DMatrix<f64>> + Sync {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian_matrix(&mut rng, 4, 4);
        let b: Vec<DMatrix<f64>> = (0..4).map(|_| gaussian_matrix(&mut rng, 4, 4)).collect();
        move |q: &DVector<f64>| {
            let mut m = a.clone();
            for (k, bk) in b.iter().enumerate() {
                m += bk * (q[k] * (1.0 + 0.5 * q[(k + 1) % 4])).sin();
            }
            Ok(m)
        }
    }

    #[test]
    fn constant_field_on_flat_metric() {
        let flat = field(MetricKind::Flat(4), 1.0);
        let c = DMatrix::from_fn(4, 4, |i, j| (i * 4 + j) as f64);
        let x = DVector::from_row_slice(&[0.3, -1.0, 0.5, 2.0]);
        let d = cov_deriv_endofield(&flat, &|_| Ok(c.clone()), &x, &DVector::zeros(4)).unwrap();
        assert!(d.amax() < 1e-12);
    }

    #[test]
    fn product_rule() {
        let m = field(MetricKind::RoundSphere { n: 4, radius: 1.0 }, 0.6);
        let (s, t) = (random_field(1), random_field(2));
        let st = |q: &DVector<f64>| Ok(s(q)? * t(q)?);
        let p = DVector::from_row_slice(&[0.1, -0.2, 0.15, 0.05]);
        let x = DVector::from_row_slice(&[0.3, -1.0, 0.5, 2.0]);
        let lhs = cov_deriv_endofield(&m, &st, &x, &p).unwrap();
        let rhs = cov_deriv_endofield(&m, &s, &x, &p).unwrap() * t(&p).unwrap()
            + s(&p).unwrap() * cov_deriv_endofield(&m, &t, &x, &p).unwrap();
        assert!((lhs - rhs).amax() < 1e-8);
    }

    #[test]
    fn second_derivative_commutator_is_curvature() {
        // ∇²_{X,Y}L − ∇²_{Y,X}L = −[R(X,Y), L] with this crate's curvature sign
        let m = field(MetricKind::RoundSphere { n: 4, radius: 1.0 }, 0.6);
        let l = random_field(3);
        let p = DVector::from_row_slice(&[0.1, -0.2, 0.15, 0.05]);
        let x = DVector::from_row_slice(&[1.0, 0.0, 0.5, 0.0]);
        let y = DVector::from_row_slice(&[0.0, 1.0, 0.0, -0.3]);
        let a = second_cov_deriv_endofield(&m, &l, &x, &y, &p).unwrap();
        let b = second_cov_deriv_endofield(&m, &l, &y, &x, &p).unwrap();
        let r = crate::riemann::curvature(&m, &p).unwrap().tensor().apply_pair(&x, &y);
        let lp = l(&p).unwrap();
        let expected = -(&r * &lp - &lp * &r);
        assert!((a - b - expected).amax() < 1e-5);
    }
}
