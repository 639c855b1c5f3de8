//! Chart metrics with closed-form first and second derivatives.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fd;
use crate::fiber::InnerProductSpace;
use crate::{Error, Result};

/// Smooth function on the chart from a small closed family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScalarField {
    Const {
        value: f64,
    },
    /// `c + b·x`
    Linear {
        #[serde(default)]
        constant: f64,
        coeffs: Vec<f64>,
    },
    /// `c + b·x + ½ xᵀHx`
    Quadratic {
        #[serde(default)]
        constant: f64,
        #[serde(default)]
        coeffs: Vec<f64>,
        hessian: Vec<Vec<f64>>,
    },
    /// `ln(2r²) − ln(r² + |x|²)`, the stereographic conformal factor of a round sphere.
    SphereFactor {
        radius: f64,
    },
}

/// Value, gradient and Hessian of a scalar at one point.
#[derive(Clone, Debug)]
pub struct ScalarJet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl ScalarField {
    pub fn constant(value: f64) -> Self {
        ScalarField::Const { value }
    }

    /// `f = x_axis` (0-based axis) in dimension `n`.
    pub fn coordinate(n: usize, axis: usize) -> Self {
        let mut coeffs = vec![0.0; n];
        coeffs[axis] = 1.0;
        ScalarField::Linear {
            constant: 0.0,
            coeffs,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            ScalarField::Const { .. } => true,
            ScalarField::Linear { coeffs, .. } => coeffs.iter().all(|&c| c == 0.0),
            ScalarField::Quadratic {
                coeffs, hessian, ..
            } => coeffs.iter().all(|&c| c == 0.0) && hessian.iter().flatten().all(|&c| c == 0.0),
            ScalarField::SphereFactor { .. } => false,
        }
    }

    /// Checks that vector and matrix data fit dimension `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match self {
            ScalarField::Const { value } if !value.is_finite() => bad("non-finite constant".into()),
            ScalarField::Linear { coeffs, .. } if coeffs.len() != n => bad(format!(
                "linear field has {} coefficients, expected {n}",
                coeffs.len()
            )),
            ScalarField::Quadratic {
                coeffs, hessian, ..
            } => {
                if !coeffs.is_empty() && coeffs.len() != n {
                    return bad(format!(
                        "quadratic field has {} linear coefficients, expected {n}",
                        coeffs.len()
                    ));
                }
                if hessian.len() != n || hessian.iter().any(|r| r.len() != n) {
                    return bad(format!("quadratic field hessian must be {n}×{n}"));
                }
                for i in 0..n {
                    for j in 0..n {
                        if hessian[i][j] != hessian[j][i] {
                            return bad("quadratic field hessian must be symmetric".into());
                        }
                    }
                }
                Ok(())
            }
            ScalarField::SphereFactor { radius } if !(*radius > 0.0) => {
                bad("sphere radius must be positive".into())
            }
            _ => Ok(()),
        }
    }

    pub fn jet(&self, p: &DVector<f64>) -> ScalarJet {
        let n = p.len();
        match self {
            ScalarField::Const { value } => ScalarJet {
                value: *value,
                grad: DVector::zeros(n),
                hess: DMatrix::zeros(n, n),
            },
            ScalarField::Linear { constant, coeffs } => {
                let b = DVector::from_column_slice(coeffs);
                ScalarJet {
                    value: constant + b.dot(p),
                    grad: b,
                    hess: DMatrix::zeros(n, n),
                }
            }
            ScalarField::Quadratic {
                constant,
                coeffs,
                hessian,
            } => {
                let b = if coeffs.is_empty() {
                    DVector::zeros(n)
                } else {
                    DVector::from_column_slice(coeffs)
                };
                let h = DMatrix::from_fn(n, n, |i, j| hessian[i][j]);
                let hp = &h * p;
                ScalarJet {
                    value: constant + b.dot(p) + 0.5 * p.dot(&hp),
                    grad: b + hp,
                    hess: h,
                }
            }
            ScalarField::SphereFactor { radius } => {
                let r2 = radius * radius;
                let d = r2 + p.norm_squared();
                ScalarJet {
                    value: (2.0 * r2).ln() - d.ln(),
                    grad: p * (-2.0 / d),
                    hess: DMatrix::identity(n, n) * (-2.0 / d) + (p * p.transpose()) * (4.0 / (d * d)),
                }
            }
        }
    }

    pub fn value(&self, p: &DVector<f64>) -> f64 {
        self.jet(p).value
    }
}

/// Built-in chart metrics.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricKind {
    Flat(usize),
    /// Constant diagonal metric.
    Diagonal(Vec<f64>),
    /// `e^{2f} · base`
    Conformal {
        base: Box<MetricKind>,
        factor: ScalarField,
    },
    /// Round sphere of the given radius in a stereographic chart.
    RoundSphere { n: usize, radius: f64 },
    /// `r²(dθ² + sin²θ dφ²)` on coordinates `(θ, φ)`.
    SpherePolar { radius: f64 },
    /// Block-diagonal product; each factor sees only its own coordinates.
    Product(Vec<MetricKind>),
}

/// Metric value and coordinate derivatives `∂_k g`, `∂_k∂_l g` at one point.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    pub dg: Vec<DMatrix<f64>>,
    pub ddg: Vec<Vec<DMatrix<f64>>>,
}

impl MetricJet {
    fn constant(g: DMatrix<f64>) -> Self {
        let n = g.nrows();
        MetricJet {
            dg: vec![DMatrix::zeros(n, n); n],
            ddg: vec![vec![DMatrix::zeros(n, n); n]; n],
            g,
        }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// Largest entrywise difference over value and both derivative orders.
    pub fn max_difference(&self, other: &MetricJet) -> f64 {
        let mut m = (&self.g - &other.g).amax();
        for k in 0..self.dim() {
            m = m.max((&self.dg[k] - &other.dg[k]).amax());
            for l in 0..self.dim() {
                m = m.max((&self.ddg[k][l] - &other.ddg[k][l]).amax());
            }
        }
        m
    }
}

impl MetricKind {
    pub fn dim(&self) -> usize {
        match self {
            MetricKind::Flat(n) => *n,
            MetricKind::Diagonal(d) => d.len(),
            MetricKind::Conformal { base, .. } => base.dim(),
            MetricKind::RoundSphere { n, .. } => *n,
            MetricKind::SpherePolar { .. } => 2,
            MetricKind::Product(fs) => fs.iter().map(MetricKind::dim).sum(),
        }
    }

    pub fn conformal(base: MetricKind, factor: ScalarField) -> Self {
        MetricKind::Conformal {
            base: Box::new(base),
            factor,
        }
    }

    /// `(base, f)` when the metric is presented as `e^{2f} base`.
    pub fn conformal_parts(&self) -> Option<(MetricKind, ScalarField)> {
        match self {
            MetricKind::Conformal { base, factor } => Some(((**base).clone(), factor.clone())),
            MetricKind::RoundSphere { n, radius } => Some((
                MetricKind::Flat(*n),
                ScalarField::SphereFactor { radius: *radius },
            )),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MetricKind::Flat(n) if *n == 0 => Err(Error::Config("flat metric of dimension 0".into())),
            MetricKind::Diagonal(d) if d.is_empty() || d.iter().any(|&x| !(x > 0.0)) => Err(
                Error::Config("diagonal metric entries must be positive".into()),
            ),
            MetricKind::Conformal { base, factor } => {
                base.validate()?;
                factor.validate(base.dim())
            }
            MetricKind::RoundSphere { radius, .. } | MetricKind::SpherePolar { radius }
                if !(*radius > 0.0) =>
            {
                Err(Error::Config("sphere radius must be positive".into()))
            }
            MetricKind::Product(fs) if fs.is_empty() => {
                Err(Error::Config("product of no factors".into()))
            }
            MetricKind::Product(fs) => fs.iter().try_for_each(MetricKind::validate),
            _ => Ok(()),
        }
    }

    pub fn gram(&self, p: &DVector<f64>) -> DMatrix<f64> {
        self.jet(p).g
    }

    /// Closed-form jet.
    pub fn jet(&self, p: &DVector<f64>) -> MetricJet {
        let n = self.dim();
        match self {
            MetricKind::Flat(n) => MetricJet::constant(DMatrix::identity(*n, *n)),
            MetricKind::Diagonal(d) => {
                MetricJet::constant(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
            }
            MetricKind::Conformal { base, factor } => conformal_jet(&base.jet(p), &factor.jet(p)),
            MetricKind::RoundSphere { radius, .. } => conformal_jet(
                &MetricJet::constant(DMatrix::identity(n, n)),
                &ScalarField::SphereFactor { radius: *radius }.jet(p),
            ),
            MetricKind::SpherePolar { radius } => {
                let r2 = radius * radius;
                let (s, c) = p[0].sin_cos();
                let mut jet = MetricJet::constant(DMatrix::from_diagonal(&DVector::from_column_slice(
                    &[r2, r2 * s * s],
                )));
                jet.dg[0][(1, 1)] = r2 * 2.0 * s * c;
                jet.ddg[0][0][(1, 1)] = r2 * 2.0 * (c * c - s * s);
                jet
            }
            MetricKind::Product(fs) => {
                let mut jet = MetricJet::constant(DMatrix::zeros(n, n));
                let mut off = 0;
                for f in fs {
                    let m = f.dim();
                    let sub = f.jet(&p.rows(off, m).into_owned());
                    jet.g.view_mut((off, off), (m, m)).copy_from(&sub.g);
                    for k in 0..m {
                        jet.dg[off + k].view_mut((off, off), (m, m)).copy_from(&sub.dg[k]);
                        for l in 0..m {
                            jet.ddg[off + k][off + l]
                                .view_mut((off, off), (m, m))
                                .copy_from(&sub.ddg[k][l]);
                        }
                    }
                    off += m;
                }
                jet
            }
        }
    }
}

/// Jet of `e^{2f} g₀` from the jets of `g₀` and `f`.
fn conformal_jet(base: &MetricJet, f: &ScalarJet) -> MetricJet {
    let n = base.dim();
    let e = (2.0 * f.value).exp();
    let g = &base.g * e;
    let dg: Vec<_> = (0..n)
        .map(|k| (&base.g * (2.0 * f.grad[k]) + &base.dg[k]) * e)
        .collect();
    let ddg = (0..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    let a = 4.0 * f.grad[k] * f.grad[l] + 2.0 * f.hess[(k, l)];
                    (&base.g * a
                        + &base.dg[l] * (2.0 * f.grad[k])
                        + &base.dg[k] * (2.0 * f.grad[l])
                        + &base.ddg[k][l])
                        * e
                })
                .collect()
        })
        .collect();
    MetricJet { g, dg, ddg }
}

/// Axis-aligned box in chart coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn cube(n: usize, half_width: f64) -> Self {
        Self {
            lo: vec![-half_width; n],
            hi: vec![half_width; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.len() != self.hi.len() {
            return Err(Error::Config("domain bounds have different lengths".into()));
        }
        if self.lo.iter().zip(&self.hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Config("domain needs lo < hi on every axis".into()));
        }
        Ok(())
    }

    pub fn max_extent(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max)
    }

    pub fn center(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)))
    }

    /// Fails unless `p ± reach·e_k` stays in the box for every axis.
    pub fn check_reach(&self, p: &DVector<f64>, reach: f64) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.len(),
            });
        }
        for axis in 0..self.dim() {
            let slack = 1e-12 * (self.hi[axis] - self.lo[axis]);
            if p[axis] - reach < self.lo[axis] - slack || p[axis] + reach > self.hi[axis] + slack {
                return Err(Error::StencilOutOfDomain { axis, reach });
            }
        }
        Ok(())
    }

    /// Uniform point at distance at least `margin` from the boundary.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, margin: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.lo.iter().zip(&self.hi).map(|(a, b)| {
                let (a, b) = (a + margin, b - margin);
                if a >= b {
                    0.5 * (a + b)
                } else {
                    a + (b - a) * rng.random::<f64>()
                }
            }),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum DerivativeMode {
    #[default]
    Analytic,
    /// Central 4th-order differences of the metric values; `step` defaults to
    /// `1e-3` times the largest domain extent.
    FiniteDifference {
        #[serde(default)]
        step: Option<f64>,
    },
}

/// A metric on a chart box together with the policy for its derivatives.
#[derive(Clone, Debug)]
pub struct MetricField {
    kind: MetricKind,
    domain: DomainBox,
    mode: DerivativeMode,
}

impl MetricField {
    pub fn new(kind: MetricKind, domain: DomainBox, mode: DerivativeMode) -> Result<Self> {
        kind.validate()?;
        domain.validate()?;
        if kind.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: kind.dim(),
                found: domain.dim(),
            });
        }
        if let DerivativeMode::FiniteDifference { step: Some(h) } = mode {
            if !(h > 0.0) {
                return Err(Error::Config("finite-difference step must be positive".into()));
            }
        }
        Ok(Self { kind, domain, mode })
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn with_mode(&self, mode: DerivativeMode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    /// Step used by every finite-difference stencil built on this field.
    pub fn step(&self) -> f64 {
        match self.mode {
            DerivativeMode::FiniteDifference { step: Some(h) } => h,
            _ => 1e-3 * self.domain.max_extent(),
        }
    }

    pub fn gram(&self, p: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.domain.check_reach(p, 0.0)?;
        Ok(self.kind.gram(p))
    }

    pub fn space(&self, p: &DVector<f64>) -> Result<InnerProductSpace> {
        InnerProductSpace::new(self.gram(p)?, true)
    }

    pub fn jet(&self, p: &DVector<f64>) -> Result<MetricJet> {
        match self.mode {
            DerivativeMode::Analytic => self.analytic_jet(p),
            DerivativeMode::FiniteDifference { .. } => self.fd_jet(p),
        }
    }

    pub fn analytic_jet(&self, p: &DVector<f64>) -> Result<MetricJet> {
        self.domain.check_reach(p, 0.0)?;
        Ok(self.kind.jet(p))
    }

    pub fn fd_jet(&self, p: &DVector<f64>) -> Result<MetricJet> {
        let h = self.step();
        self.domain.check_reach(p, fd::REACH * h)?;
        let eval = |q: &DVector<f64>| Ok(self.kind.gram(q));
        Ok(MetricJet {
            g: self.kind.gram(p),
            dg: fd::partials(&eval, p, h)?,
            ddg: fd::second_partials(&eval, p, h)?,
        })
    }

    pub fn conformal_parts(&self) -> Option<(MetricKind, ScalarField)> {
        self.kind.conformal_parts()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quad() -> ScalarField {
        ScalarField::Quadratic {
            constant: 0.1,
            coeffs: vec![0.3, -0.2, 0.0, 0.5],
            hessian: vec![
                vec![0.5, 0.1, 0.0, 0.0],
                vec![0.1, -0.3, 0.2, 0.0],
                vec![0.0, 0.2, 0.4, 0.0],
                vec![0.0, 0.0, 0.0, 0.0],
            ],
        }
    }

    #[test]
    fn scalar_jets_match_differences() {
        let p = DVector::from_row_slice(&[0.2, -0.1, 0.3, 0.05]);
        for f in [quad(), ScalarField::SphereFactor { radius: 1.3 }, ScalarField::coordinate(4, 2)] {
            let jet = f.jet(&p);
            let h = 1e-4;
            for k in 0..4 {
                let mut e = DVector::zeros(4);
                e[k] = h;
                let d = (f.value(&(&p + &e)) - f.value(&(&p - &e))) / (2.0 * h);
                assert!((d - jet.grad[k]).abs() < 1e-7);
                let dd = (f.value(&(&p + &e)) - 2.0 * jet.value + f.value(&(&p - &e))) / (h * h);
                assert!((dd - jet.hess[(k, k)]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn sphere_factor_gives_round_metric() {
        // e^{2f} = 4r⁴/(r²+|x|²)²
        let r = 2.0;
        let p = DVector::from_row_slice(&[0.3, 0.4]);
        let g = MetricKind::RoundSphere { n: 2, radius: r }.gram(&p);
        let expected = 4.0 * r.powi(4) / (r * r + 0.25f64).powi(2);
        assert!((g[(0, 0)] - expected).abs() < 1e-13 && g[(0, 1)] == 0.0);
    }

    #[test]
    fn analytic_jets_match_finite_differences() {
        let kinds = [
            MetricKind::conformal(MetricKind::Flat(4), quad()),
            MetricKind::RoundSphere { n: 4, radius: 1.0 },
            MetricKind::Product(vec![
                MetricKind::RoundSphere { n: 2, radius: 1.0 },
                MetricKind::Diagonal(vec![1.0, 2.0]),
            ]),
            MetricKind::conformal(
                MetricKind::Product(vec![MetricKind::SpherePolar { radius: 1.0 }, MetricKind::Flat(2)]),
                ScalarField::coordinate(4, 1),
            ),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in kinds {
            let domain = DomainBox {
                lo: vec![0.6, -0.5, -0.5, -0.5],
                hi: vec![1.4, 0.5, 0.5, 0.5],
            };
            let m = MetricField::new(kind, domain, DerivativeMode::FiniteDifference { step: None }).unwrap();
            for _ in 0..5 {
                let p = m.domain().sample(&mut rng, 0.05);
                let diff = m.analytic_jet(&p).unwrap().max_difference(&m.fd_jet(&p).unwrap());
                assert!(diff < 1e-5, "{:?}: {diff}", m.kind());
            }
        }
    }

    #[test]
    fn stencil_must_fit_in_domain() {
        let m = MetricField::new(
            MetricKind::Flat(2),
            DomainBox::cube(2, 1.0),
            DerivativeMode::FiniteDifference { step: Some(0.1) },
        )
        .unwrap();
        let p = DVector::from_row_slice(&[0.0, 0.9]);
        assert!(matches!(
            m.fd_jet(&p),
            Err(Error::StencilOutOfDomain { axis: 1, .. })
        ));
        assert!(m.fd_jet(&DVector::zeros(2)).is_ok());
    }

    #[test]
    fn validation_errors() {
        assert!(MetricField::new(MetricKind::Flat(4), DomainBox::cube(3, 1.0), DerivativeMode::Analytic).is_err());
        assert!(MetricKind::Diagonal(vec![1.0, -1.0]).validate().is_err());
        assert!(ScalarField::Linear { constant: 0.0, coeffs: vec![1.0] }.validate(4).is_err());
    }
}
