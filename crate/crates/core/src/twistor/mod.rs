//! Twistor spaces over a chart and the fibrewise map `Ψ(I) = Q⁻¹IQ` between
//! the twistor spaces of two metrics `g`, `g̃` on the same chart.
//!
//! A tangent vector at `I` is stored split as `X^h + V`: a base vector and a
//! vertical endomorphism anticommuting with `I`. The Levi-Civita connection
//! used for the splitting is always the one of the metric owning the twistor
//! space.
//!
//! Curvature of 2-vectors is the linear extension `R(σ) = Σ_{i<j} σ^{ij} R(e_i, e_j)`,
//! so `R(X∧Y) = R(X,Y)`. With the isomorphism `(u∧v)^∨ X = g(u,X)v − g(v,X)u`
//! this is the normalization for which `G(R(X,Y)a, b) = g(R([a,b]^∧)X, Y)`.

mod harmonic;
mod pair;
mod residual;

pub use harmonic::*;
pub use pair::*;
pub use residual::*;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::fiber::{
    vertical_residual, wedge_of_endo_fast, Endomorphism, InnerProductSpace,
    OrthogonalComplexStructure, VerticalVector,
};
use crate::riemann::{curvature, MetricField};
use crate::{tol, Error, Result};

/// `J₁` (Atiyah-Hitchin-Singer) or `J₂` (Eells-Salamon).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    Ahs,
    Es,
}

impl StructureKind {
    /// Sign of the action `V ↦ ±I∘V` on vertical vectors.
    pub fn vertical_sign(self) -> f64 {
        match self {
            StructureKind::Ahs => 1.0,
            StructureKind::Es => -1.0,
        }
    }

    /// 1 for AHS, 2 for ES.
    pub fn index(self) -> u8 {
        match self {
            StructureKind::Ahs => 1,
            StructureKind::Es => 2,
        }
    }
}

/// Almost complex structures on the source and target twistor spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructurePair {
    pub source: StructureKind,
    pub target: StructureKind,
}

impl StructurePair {
    pub fn new(source: StructureKind, target: StructureKind) -> Self {
        Self { source, target }
    }

    pub fn is_mixed(self) -> bool {
        self.source != self.target
    }
}

/// Scales of the vertical parts of `g_s` and `g̃_t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistorMetricParams {
    pub s: f64,
    pub t: f64,
}

impl Default for TwistorMetricParams {
    fn default() -> Self {
        Self { s: 1.0, t: 1.0 }
    }
}

impl TwistorMetricParams {
    pub fn new(s: f64, t: f64) -> Result<Self> {
        if !(s > 0.0 && t > 0.0) {
            return Err(Error::Config(format!("twistor metric parameters must be positive, got s = {s}, t = {t}")));
        }
        Ok(Self { s, t })
    }
}

/// A point `I` of the twistor space over the chart point `p`.
#[derive(Clone, Debug)]
pub struct TwistorPoint {
    p: DVector<f64>,
    space: InnerProductSpace,
    j: OrthogonalComplexStructure,
}

impl TwistorPoint {
    pub fn new(metric: &MetricField, p: DVector<f64>, j: Endomorphism) -> Result<Self> {
        let space = metric.space(&p)?;
        Self::from_space(space, p, j)
    }

    pub fn from_space(space: InnerProductSpace, p: DVector<f64>, j: Endomorphism) -> Result<Self> {
        let j = OrthogonalComplexStructure::new(&space, j)?;
        Ok(Self { p, space, j })
    }

    pub(crate) fn from_parts(space: InnerProductSpace, p: DVector<f64>, j: OrthogonalComplexStructure) -> Self {
        Self { p, space, j }
    }

    pub fn p(&self) -> &DVector<f64> {
        &self.p
    }

    pub fn space(&self) -> &InnerProductSpace {
        &self.space
    }

    pub fn structure(&self) -> &OrthogonalComplexStructure {
        &self.j
    }

    pub fn j(&self) -> &Endomorphism {
        self.j.mat()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

/// `X^h + V` at a twistor point.
#[derive(Clone, Debug)]
pub struct TwistorTangent {
    hor: DVector<f64>,
    ver: VerticalVector,
}

impl TwistorTangent {
    pub fn new(point: &TwistorPoint, hor: DVector<f64>, ver: Endomorphism) -> Result<Self> {
        Self::with_tolerance(point, hor, ver, tol::VALIDATION)
    }

    pub fn with_tolerance(point: &TwistorPoint, hor: DVector<f64>, ver: Endomorphism, tol: f64) -> Result<Self> {
        if hor.len() != point.dim() {
            return Err(Error::DimensionMismatch {
                expected: point.dim(),
                found: hor.len(),
            });
        }
        let ver = VerticalVector::with_tolerance(point.space(), point.structure(), ver, tol)?;
        Ok(Self { hor, ver })
    }

    pub fn horizontal(point: &TwistorPoint, x: DVector<f64>) -> Self {
        Self {
            hor: x,
            ver: VerticalVector::zero(point.structure()),
        }
    }

    pub fn vertical(point: &TwistorPoint, v: VerticalVector) -> Result<Self> {
        if (v.base() - point.j()).amax() > tol::VALIDATION {
            return Err(Error::PointMismatch);
        }
        Ok(Self {
            hor: DVector::zeros(point.dim()),
            ver: v,
        })
    }

    pub(crate) fn raw(point: &TwistorPoint, hor: DVector<f64>, ver: Endomorphism) -> Self {
        let ver = VerticalVector::with_tolerance(point.space(), point.structure(), ver, f64::INFINITY)
            .expect("shape checked by caller");
        Self { hor, ver }
    }

    pub fn hor(&self) -> &DVector<f64> {
        &self.hor
    }

    pub fn ver(&self) -> &Endomorphism {
        self.ver.value()
    }

    pub fn base(&self) -> &Endomorphism {
        self.ver.base()
    }
}

/// `J_k` on `X^h + V`: `(IX)^h ± I∘V`, with `+` for AHS and `−` for ES.
pub fn jk_apply(kind: StructureKind, point: &TwistorPoint, t: &TwistorTangent) -> TwistorTangent {
    let j = point.j();
    TwistorTangent::raw(point, j * t.hor(), j * t.ver() * kind.vertical_sign())
}

/// `g_s(X^h + V, Y^h + W) = g(X, Y) + s·G(V, W)`.
pub fn gs_inner(
    s: f64,
    point: &TwistorPoint,
    a: &TwistorTangent,
    b: &TwistorTangent,
) -> Result<f64> {
    let tol = tol::VALIDATION;
    if (a.base() - point.j()).amax() > tol || (b.base() - point.j()).amax() > tol {
        return Err(Error::PointMismatch);
    }
    let space = point.space();
    Ok(space.inner(a.hor(), b.hor()) + s * space.so_metric_fast(a.ver(), b.ver()))
}

/// `‖X^h + V‖` in `g_s`.
pub fn gs_norm(s: f64, point: &TwistorPoint, a: &TwistorTangent) -> f64 {
    let space = point.space();
    (space.inner(a.hor(), a.hor()) + s * space.so_metric_fast(a.ver(), a.ver()))
        .max(0.0)
        .sqrt()
}

/// Terms of the Levi-Civita connection `D` of `g_s` at a twistor point.
#[derive(Clone, Debug)]
pub struct TwistorConnectionTerms {
    /// `D_{X^h} Y^h = (∇_X Y)^h + ½R(X∧Y)J`
    pub hh: TwistorTangent,
    /// horizontal vector `−s R((J∘V)^∧)X`, the horizontal part of `D_V X^h`
    pub vh: DVector<f64>,
}

/// Evaluates the `hh` and `vh` terms for horizontal lifts of `X`, `Y` and a vertical `V`.
///
/// `dxy` is the directional derivative `∂_X Y` of the field germ behind `Y`;
/// `None` means `Y` is a constant coordinate field.
pub fn twistor_connection(
    metric: &MetricField,
    params: TwistorMetricParams,
    point: &TwistorPoint,
    x: &DVector<f64>,
    y: &DVector<f64>,
    dxy: Option<&DVector<f64>>,
    v: &VerticalVector,
) -> Result<TwistorConnectionTerms> {
    let n = point.dim();
    for w in [x, y] {
        if w.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: w.len() });
        }
    }
    let data = curvature(metric, point.p())?;
    let j = point.j();
    let mut nabla = data.christoffel().apply(x, y);
    if let Some(d) = dxy {
        nabla += d;
    }
    let r = data.tensor().apply_pair(x, y);
    let ver = (&r * j - j * &r) * 0.5;
    let hh = TwistorTangent::new(point, nabla, ver)?;
    let jv = wedge_of_endo_fast(point.space(), &(j * v.value()));
    let vh = data.tensor().of_bivector(&jv) * x * (-params.s);
    Ok(TwistorConnectionTerms { hh, vh })
}

/// Fails unless `v` is tangent to the fibre at `j` within `tol`.
pub(crate) fn assert_vertical(j: &OrthogonalComplexStructure, v: &Endomorphism, tol: f64) -> Result<()> {
    let r = vertical_residual(j, v);
    if r > tol {
        return Err(Error::NotVertical(r));
    }
    Ok(())
}

/// Max, mean and min of a sample sweep with the indices of the extremes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub max: f64,
    pub mean: f64,
    pub min: f64,
    pub argmax: usize,
    pub argmin: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mut s = Summary {
            max: f64::NEG_INFINITY,
            mean: 0.0,
            min: f64::INFINITY,
            argmax: 0,
            argmin: 0,
        };
        if values.is_empty() {
            s.max = 0.0;
            s.min = 0.0;
            return s;
        }
        for (i, &v) in values.iter().enumerate() {
            if v > s.max {
                s.max = v;
                s.argmax = i;
            }
            if v < s.min {
                s.min = v;
                s.argmin = i;
            }
            s.mean += v;
        }
        s.mean /= values.len() as f64;
        s
    }
}

fn basis_vector(n: usize, k: usize) -> DVector<f64> {
    let mut e = DVector::zeros(n);
    e[k] = 1.0;
    e
}

fn column(m: &DMatrix<f64>, k: usize) -> DVector<f64> {
    m.column(k).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::{random_compatible, vertical_basis};
    use crate::linalg::gaussian_vector;
    use crate::riemann::{DerivativeMode, DomainBox, MetricKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_tangent(point: &TwistorPoint, seed: u64) -> TwistorTangent {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian_vector(&mut rng, point.dim());
        let basis = vertical_basis(point.space(), point.structure());
        let c = gaussian_vector(&mut rng, basis.len());
        let mut v = DMatrix::zeros(point.dim(), point.dim());
        for (b, ci) in basis.iter().zip(c.iter()) {
            v += b * *ci;
        }
        TwistorTangent::new(point, x, v).unwrap()
    }

    fn sphere_point(seed: u64) -> (MetricField, TwistorPoint) {
        let m = MetricField::new(
            MetricKind::RoundSphere { n: 4, radius: 1.0 },
            DomainBox::cube(4, 0.8),
            DerivativeMode::Analytic,
        )
        .unwrap();
        let p = DVector::from_vec(vec![0.1, -0.2, 0.3, 0.05]);
        let space = m.space(&p).unwrap();
        let j = random_compatible(&space, seed, None);
        (m, TwistorPoint::from_parts(space, p, j))
    }

    #[test]
    fn jk_twice_is_minus_identity_and_isometric() {
        let (_, point) = sphere_point(3);
        for seed in 0..20 {
            let a = random_tangent(&point, seed);
            let b = random_tangent(&point, seed + 100);
            for kind in [StructureKind::Ahs, StructureKind::Es] {
                let twice = jk_apply(kind, &point, &jk_apply(kind, &point, &a));
                assert!((twice.hor() + a.hor()).amax() < 1e-12);
                assert!((twice.ver() + a.ver()).amax() < 1e-12);
                for s in [0.3, 1.0, 2.5] {
                    let lhs = gs_inner(s, &point, &jk_apply(kind, &point, &a), &jk_apply(kind, &point, &b)).unwrap();
                    let rhs = gs_inner(s, &point, &a, &b).unwrap();
                    assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn jk_on_pure_parts() {
        let (_, point) = sphere_point(5);
        let t = random_tangent(&point, 9);
        let vert = TwistorTangent::raw(&point, DVector::zeros(4), t.ver().clone());
        let ahs = jk_apply(StructureKind::Ahs, &point, &vert);
        let es = jk_apply(StructureKind::Es, &point, &vert);
        assert!((ahs.ver() - point.j() * t.ver()).amax() < 1e-15);
        assert!((es.ver() + point.j() * t.ver()).amax() < 1e-15);
        let hor = TwistorTangent::horizontal(&point, t.hor().clone());
        for kind in [StructureKind::Ahs, StructureKind::Es] {
            let out = jk_apply(kind, &point, &hor);
            assert!((out.hor() - point.j() * t.hor()).amax() < 1e-15);
            assert_eq!(out.ver().amax(), 0.0);
        }
    }

    #[test]
    fn gs_splits_orthogonally() {
        let (_, point) = sphere_point(7);
        let t = random_tangent(&point, 1);
        let u = random_tangent(&point, 2);
        let h = TwistorTangent::horizontal(&point, t.hor().clone());
        let v = TwistorTangent::raw(&point, DVector::zeros(4), u.ver().clone());
        assert!(gs_inner(2.0, &point, &h, &v).unwrap().abs() < 1e-15);
        let gh = gs_inner(2.0, &point, &h, &h).unwrap();
        assert!((gh - point.space().inner(t.hor(), t.hor())).abs() < 1e-13);
        let gv = gs_inner(2.0, &point, &v, &v).unwrap();
        assert!((gv - 2.0 * point.space().so_metric(u.ver(), u.ver()).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn gs_rejects_foreign_tangents() {
        let (_, a) = sphere_point(1);
        let (_, b) = sphere_point(2);
        let ta = random_tangent(&a, 0);
        let tb = random_tangent(&b, 0);
        assert!(matches!(gs_inner(1.0, &a, &ta, &tb), Err(Error::PointMismatch)));
    }

    #[test]
    fn connection_terms_on_flat_base() {
        let m = MetricField::new(MetricKind::Flat(4), DomainBox::cube(4, 1.0), DerivativeMode::Analytic).unwrap();
        let p = DVector::zeros(4);
        let space = m.space(&p).unwrap();
        let point = TwistorPoint::from_parts(space.clone(), p, random_compatible(&space, 4, None));
        let t = random_tangent(&point, 3);
        let x = basis_vector(4, 1);
        let y = basis_vector(4, 2);
        let dxy = DVector::from_vec(vec![0.5, 0.0, -1.0, 2.0]);
        let terms = twistor_connection(&m, TwistorMetricParams::default(), &point, &x, &y, Some(&dxy), &t.ver).unwrap();
        assert_eq!(terms.hh.hor(), &dxy);
        assert_eq!(terms.hh.ver().amax(), 0.0);
        assert_eq!(terms.vh.amax(), 0.0);
    }

    #[test]
    fn connection_terms_on_round_sphere() {
        let (m, point) = sphere_point(11);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..10 {
            let x = gaussian_vector(&mut rng, 4);
            let y = gaussian_vector(&mut rng, 4);
            let v = random_tangent(&point, seed).ver;
            let one = twistor_connection(&m, TwistorMetricParams::new(1.0, 1.0).unwrap(), &point, &x, &y, None, &v).unwrap();
            let three = twistor_connection(&m, TwistorMetricParams::new(3.0, 1.0).unwrap(), &point, &x, &y, None, &v).unwrap();
            let w = one.hh.ver();
            assert!(w.amax() > 1e-3);
            assert!(point.space().skew_residual(w) < 1e-12);
            assert!((w * point.j() + point.j() * w).amax() < 1e-12);
            assert!((&three.vh - &one.vh * 3.0).amax() < 1e-12);
        }
    }
}
