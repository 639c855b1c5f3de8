//! Cauchy-Riemann residuals of `Ψ` between twistor spaces.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::{column, jk_apply, MetricPair, PushforwardFrame, StructurePair, Summary, TwistorMetricParams, TwistorPoint, TwistorTangent};
use crate::fiber::vertical_basis;
use crate::Result;

/// Residual at one twistor point, maximized over a `g_s`-orthonormal test basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointResidual {
    pub total: f64,
    /// `Ψ(I)X − IX` (or the sum), on horizontal inputs
    pub horizontal: f64,
    /// vertical part on horizontal inputs
    pub mixed: f64,
    /// vertical inputs
    pub vertical: f64,
}

/// `g̃_t`-norm of a tangent at a target point.
fn gt_norm(t: f64, point: &TwistorPoint, v: &TwistorTangent) -> (f64, f64) {
    let space = point.space();
    let h = space.inner(v.hor(), v.hor()).max(0.0).sqrt();
    let w = (t * space.so_metric_fast(v.ver(), v.ver())).max(0.0).sqrt();
    (h, w)
}

/// `‖J̃_l Ψ_*T ∓ Ψ_* J_k T‖` over the test basis at one point; `anti` selects the sum.
pub fn point_residual(
    frame: &PushforwardFrame,
    params: TwistorMetricParams,
    structures: StructurePair,
    anti: bool,
) -> Result<PointResidual> {
    let source = frame.source();
    let target = frame.target();
    let n = source.dim();
    let sign = if anti { 1.0 } else { -1.0 };
    let mut out = PointResidual {
        total: 0.0,
        horizontal: 0.0,
        mixed: 0.0,
        vertical: 0.0,
    };
    let eval = |t: &TwistorTangent| -> Result<(f64, f64)> {
        let lhs = jk_apply(structures.target, target, &frame.push(t)?);
        let rhs = frame.push(&jk_apply(structures.source, source, t))?;
        let diff = TwistorTangent::raw(target, lhs.hor() + rhs.hor() * sign, lhs.ver() + rhs.ver() * sign);
        Ok(gt_norm(params.t, target, &diff))
    };
    let g_frame = source.space().frame();
    for k in 0..n {
        let t = TwistorTangent::horizontal(source, column(g_frame, k));
        let (h, w) = eval(&t)?;
        out.horizontal = out.horizontal.max(h);
        out.mixed = out.mixed.max(w);
        out.total = out.total.max(h.hypot(w));
    }
    let scale = 1.0 / params.s.sqrt();
    for u in vertical_basis(source.space(), source.structure()) {
        let t = TwistorTangent::raw(source, DVector::zeros(n), u * scale);
        let (h, w) = eval(&t)?;
        let r = h.hypot(w);
        out.vertical = out.vertical.max(r);
        out.total = out.total.max(r);
    }
    Ok(out)
}

/// Per-sample residuals of a sweep, with summaries.
#[derive(Clone, Debug, Serialize)]
pub struct HolomorphyReport {
    pub structures: StructurePair,
    pub anti: bool,
    pub samples: Vec<PointResidual>,
    #[serde(skip)]
    pub points: Vec<TwistorPoint>,
    pub total: Summary,
    pub horizontal: Summary,
    pub mixed: Summary,
    pub vertical: Summary,
}

impl HolomorphyReport {
    /// Chart point of sample `k`.
    pub fn point(&self, k: usize) -> &DVector<f64> {
        self.points[k].p()
    }
}

/// Holomorphy (or, with `anti`, anti-holomorphy) residuals of `Ψ` at `count`
/// sampled points. Samples are evaluated in parallel; the result does not
/// depend on the thread count.
pub fn holomorphy_residual(
    pair: &MetricPair,
    params: TwistorMetricParams,
    structures: StructurePair,
    anti: bool,
    count: usize,
    seed: u64,
) -> Result<HolomorphyReport> {
    let points = pair.sample_points(seed, count)?;
    holomorphy_at_points(pair, params, structures, anti, points)
}

pub fn holomorphy_at_points(
    pair: &MetricPair,
    params: TwistorMetricParams,
    structures: StructurePair,
    anti: bool,
    points: Vec<TwistorPoint>,
) -> Result<HolomorphyReport> {
    let samples = points
        .par_iter()
        .map(|point| point_residual(&PushforwardFrame::new(pair, point)?, params, structures, anti))
        .collect::<Result<Vec<_>>>()?;
    let pick = |f: fn(&PointResidual) -> f64| Summary::of(&samples.iter().map(f).collect::<Vec<_>>());
    Ok(HolomorphyReport {
        structures,
        anti,
        total: pick(|r| r.total),
        horizontal: pick(|r| r.horizontal),
        mixed: pick(|r| r.mixed),
        vertical: pick(|r| r.vertical),
        samples,
        points,
    })
}
