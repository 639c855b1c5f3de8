//! Registry of addressable checks.
//!
//! Every check maps a scenario to one scalar per sample. Small checks pass
//! when the largest value stays under the bound; large checks pass when the
//! smallest value reaches it.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{Expect, Side};
use crate::fiber::{
    hodge_star, isoclinic_factor, left_isoclinic, principal_sqrt_via_log, random_so4, right_isoclinic,
    vertical_basis, vertical_project_fast, vertical_residual, wedge_of_endo_fast, Endomorphism, InnerProductSpace,
    OrthogonalComplexStructure,
};
use crate::linalg::{derive_seed, gaussian_matrix, gaussian_vector};
use crate::riemann::{bianchi_residual, curvature, operator_norm, operator_pairing, ricci_divergence, DerivativeMode, MetricField};
use crate::twistor::{
    gs_inner, harmonicity_at, harmonicity_sign, holomorphy_at_points, iso_criterion, jk_apply, lemma_rab_residual,
    second_fund_form_vertical, sigma_form, ss_identity_residual, ConformalPoint, MetricPair, PushforwardFrame,
    StructureKind, StructurePair, TwistorMetricParams, TwistorPoint, TwistorTangent,
};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Requirement {
    Conformal,
    Dim4,
    AtLeast3,
    Target,
}

/// Inputs shared by every check of one scenario run.
pub struct CheckContext<'a> {
    pub pair: &'a MetricPair,
    pub params: TwistorMetricParams,
    pub samples: usize,
    pub seed: u64,
    pub expect: Expect,
    pub target: Option<f64>,
    pub side: Side,
}

/// Per-sample values of a check, with optional chart witnesses.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub values: Vec<f64>,
    pub points: Vec<Option<Vec<f64>>>,
    pub details: BTreeMap<String, Value>,
    /// `(name, max value, bound)`; all must hold (after tolerance scaling) for a pass.
    pub side_conditions: Vec<(String, f64, f64)>,
}

pub struct CheckInfo {
    pub id: &'static str,
    pub description: &'static str,
    pub requires: &'static [Requirement],
    /// Expectation and small-side bound when the config does not override them.
    pub default_expect: fn(&MetricPair) -> (Expect, f64),
    /// Default bound when the check expects large values.
    pub large_bound: f64,
    pub run: fn(&CheckContext) -> Result<Outcome>,
}

impl std::fmt::Debug for CheckInfo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CheckInfo").field("id", &self.id).finish()
    }
}

pub fn registry() -> &'static [CheckInfo] {
    &REGISTRY
}

pub fn lookup(id: &str) -> Option<&'static CheckInfo> {
    REGISTRY.iter().find(|c| c.id == id)
}

fn homothetic(pair: &MetricPair) -> bool {
    pair.factor().is_some_and(|f| f.is_constant())
}

fn uses_fd(pair: &MetricPair) -> bool {
    [pair.g(), pair.gtilde()]
        .iter()
        .any(|m| matches!(m.mode(), DerivativeMode::FiniteDifference { .. }))
}

/// Zero threshold: 1e-6 with analytic derivatives, 1e-4 with finite differences.
fn zero_bound(pair: &MetricPair) -> f64 {
    if uses_fd(pair) {
        1e-4
    } else {
        1e-6
    }
}

fn large(_: &MetricPair) -> (Expect, f64) {
    (Expect::Large, 1.0)
}

static REGISTRY: [CheckInfo; 29] = [
    CheckInfo {
        id: "psi-well-defined",
        description: "Ψ(I) = Q⁻¹IQ squares to −Id, is g̃-orthogonal, and Q-conjugation is a G → G̃ isometry on vertical vectors",
        requires: &[],
        default_expect: |_| (Expect::Small, 1e-9),
        large_bound: 0.1,
        run: psi_well_defined,
    },
    CheckInfo {
        id: "psi-fibers",
        description: "Ψ_* maps vertical tangents to vertical tangents at Ψ(I)",
        requires: &[],
        default_expect: |_| (Expect::Small, 1e-9),
        large_bound: 0.1,
        run: psi_fibers,
    },
    CheckInfo {
        id: "sqrt-quadrature",
        description: "square root of C by eigendecomposition against the log-integral quadrature",
        requires: &[],
        default_expect: |_| (Expect::Small, 1e-8),
        large_bound: 0.1,
        run: sqrt_quadrature,
    },
    CheckInfo {
        id: "isoclinic",
        description: "left/right isoclinic factorization of random SO(4) matrices reconstructs them",
        requires: &[],
        default_expect: |_| (Expect::Small, 1e-10),
        large_bound: 0.1,
        run: isoclinic,
    },
    CheckInfo {
        id: "wedge-isometry",
        description: "½·G(S,T) equals the Λ² inner product of S^∧ and T^∧",
        requires: &[],
        default_expect: |_| (Expect::Small, 1e-10),
        large_bound: 0.1,
        run: wedge_isometry,
    },
    CheckInfo {
        id: "ss-identity",
        description: "S∘(A∧B)^∨∘S = −(SA∧SB)^∨ for compatible S",
        requires: &[],
        default_expect: |_| (Expect::Small, 1e-12),
        large_bound: 0.1,
        run: ss_identity,
    },
    CheckInfo {
        id: "gs-isometry",
        description: "J_1 and J_2 preserve the twistor metric g_s",
        requires: &[],
        default_expect: |_| (Expect::Small, 1e-12),
        large_bound: 0.1,
        run: gs_isometry,
    },
    CheckInfo {
        id: "prop-j1",
        description: "AHS → AHS holomorphy residual of Ψ (zero iff the pair is conformal)",
        requires: &[],
        default_expect: |pair| {
            if pair.is_conformal() {
                (Expect::Small, zero_bound(pair))
            } else {
                (Expect::Large, 0.1)
            }
        },
        large_bound: 0.1,
        run: |ctx| holomorphy(ctx, &[(StructurePair::new(StructureKind::Ahs, StructureKind::Ahs), false)]),
    },
    CheckInfo {
        id: "prop-j2",
        description: "ES → ES holomorphy residual of Ψ (zero iff the pair is homothetic)",
        requires: &[],
        default_expect: |pair| {
            if homothetic(pair) {
                (Expect::Small, if uses_fd(pair) { 1e-4 } else { 1e-9 })
            } else {
                (Expect::Large, 0.1)
            }
        },
        large_bound: 0.1,
        run: |ctx| holomorphy(ctx, &[(StructurePair::new(StructureKind::Es, StructureKind::Es), false)]),
    },
    CheckInfo {
        id: "anti-holomorphy",
        description: "anti-holomorphy residual for AHS → AHS and ES → ES (never zero)",
        requires: &[],
        default_expect: large,
        large_bound: 1.0,
        run: |ctx| {
            holomorphy(
                ctx,
                &[
                    (StructurePair::new(StructureKind::Ahs, StructureKind::Ahs), true),
                    (StructurePair::new(StructureKind::Es, StructureKind::Es), true),
                ],
            )
        },
    },
    CheckInfo {
        id: "mixed-pairs",
        description: "holomorphy and anti-holomorphy residuals for AHS → ES and ES → AHS (never zero)",
        requires: &[],
        default_expect: large,
        large_bound: 1.0,
        run: |ctx| {
            holomorphy(
                ctx,
                &[
                    (StructurePair::new(StructureKind::Ahs, StructureKind::Es), false),
                    (StructurePair::new(StructureKind::Ahs, StructureKind::Es), true),
                    (StructurePair::new(StructureKind::Es, StructureKind::Ahs), false),
                    (StructurePair::new(StructureKind::Es, StructureKind::Ahs), true),
                ],
            )
        },
    },
    CheckInfo {
        id: "iso-criterion-k1",
        description: "I∘V_{I,X} = V_{I,IX} for conformal pairs",
        requires: &[Requirement::Conformal],
        default_expect: |_| (Expect::Small, 1e-12),
        large_bound: 0.1,
        run: |ctx| iso_criterion_check(ctx, 1),
    },
    CheckInfo {
        id: "iso-criterion-k2",
        description: "−I∘V_{I,X} = V_{I,IX} with X ⟂ {∇f, I∇f} (holds iff f is constant)",
        requires: &[Requirement::Conformal],
        default_expect: |pair| {
            if homothetic(pair) {
                (Expect::Small, 1e-12)
            } else {
                (Expect::Large, 0.1)
            }
        },
        large_bound: 0.1,
        run: |ctx| iso_criterion_check(ctx, 2),
    },
    CheckInfo {
        id: "lemma-rab",
        description: "G(R(X,Y)a, b) = g(R([a,b]^∧)X, Y) for vertical a, b, on both metrics",
        requires: &[],
        default_expect: |_| (Expect::Small, 1e-6),
        large_bound: 0.1,
        run: lemma_rab,
    },
    CheckInfo {
        id: "curvature-decomposition",
        description: "scalar, traceless Ricci and Weyl parts are orthogonal and reconstruct ℛ, on both metrics",
        requires: &[Requirement::AtLeast3],
        default_expect: |_| (Expect::Small, 1e-8),
        large_bound: 0.1,
        run: decomposition,
    },
    CheckInfo {
        id: "scalar-curvature",
        description: "|τ − target| on the selected metric",
        requires: &[Requirement::Target],
        default_expect: |_| (Expect::Small, 1e-4),
        large_bound: 0.1,
        run: |ctx| curvature_scalar(ctx, |c, target| Ok((c.tau() - target.unwrap_or(0.0)).abs())),
    },
    CheckInfo {
        id: "curvature-norm",
        description: "‖ℛ‖ on the selected metric",
        requires: &[],
        default_expect: |_| (Expect::Small, 1e-6),
        large_bound: 0.1,
        run: |ctx| curvature_scalar(ctx, |c, _| Ok(operator_norm(c.operator()))),
    },
    CheckInfo {
        id: "weyl-norm",
        description: "‖𝒲‖ on the selected metric",
        requires: &[Requirement::AtLeast3],
        default_expect: |_| (Expect::Small, 1e-6),
        large_bound: 0.1,
        run: |ctx| curvature_scalar(ctx, |c, _| Ok(operator_norm(&c.decompose()?.weyl))),
    },
    CheckInfo {
        id: "traceless-ricci-norm",
        description: "‖ℬ‖ on the selected metric",
        requires: &[Requirement::AtLeast3],
        default_expect: |_| (Expect::Small, 1e-6),
        large_bound: 0.1,
        run: |ctx| curvature_scalar(ctx, |c, _| Ok(operator_norm(&c.decompose()?.traceless_ricci))),
    },
    CheckInfo {
        id: "traceless-ricci-swap",
        description: "ℬ∘∗ + ∗∘ℬ = 0, i.e. ℬ exchanges Λ²₊ and Λ²₋, on both metrics",
        requires: &[Requirement::Dim4],
        default_expect: |_| (Expect::Small, 1e-8),
        large_bound: 0.1,
        run: traceless_ricci_swap,
    },
    CheckInfo {
        id: "weyl-conformal",
        description: "𝒲̃ = e^{−2f}𝒲 as operators on Λ²",
        requires: &[Requirement::Conformal, Requirement::AtLeast3],
        default_expect: |_| (Expect::Small, 1e-6),
        large_bound: 0.1,
        run: weyl_conformal,
    },
    CheckInfo {
        id: "hodge-conformal",
        description: "the Hodge star on Λ² is conformally invariant",
        requires: &[Requirement::Conformal, Requirement::Dim4],
        default_expect: |_| (Expect::Small, 1e-10),
        large_bound: 0.1,
        run: hodge_conformal,
    },
    CheckInfo {
        id: "bianchi",
        description: "first Bianchi identity on both metrics",
        requires: &[],
        default_expect: |_| (Expect::Small, 1e-8),
        large_bound: 0.1,
        run: bianchi,
    },
    CheckInfo {
        id: "contracted-bianchi",
        description: "div Ric − ½dτ on both metrics (finite differences of the curvature field)",
        requires: &[],
        default_expect: |_| (Expect::Small, 1e-6),
        large_bound: 0.1,
        run: contracted_bianchi,
    },
    CheckInfo {
        id: "sigma-form",
        description: "Σ is symmetric, and equals 2g(X,Y)∇f for conformal pairs",
        requires: &[],
        default_expect: |_| (Expect::Small, 1e-6),
        large_bound: 0.1,
        run: sigma_check,
    },
    CheckInfo {
        id: "vertical-trace",
        description: "Σ_i 𝒱(∇̃²_{E_iE_i}S − ∇²_{E_iE_i}S) = 0 over a g-orthonormal frame",
        requires: &[Requirement::Conformal],
        default_expect: |_| (Expect::Small, 1e-9),
        large_bound: 0.1,
        run: vertical_trace,
    },
    CheckInfo {
        id: "harmonicity",
        description: "trace of the second fundamental form and its closed form (zero iff homothetic); the two must agree",
        requires: &[Requirement::Conformal],
        default_expect: |pair| {
            if homothetic(pair) {
                (Expect::Small, 1e-9)
            } else {
                (Expect::Large, 0.1)
            }
        },
        large_bound: 0.1,
        run: harmonicity,
    },
    CheckInfo {
        id: "ver-ver-ii",
        description: "vertical-vertical block of the second fundamental form vanishes identically",
        requires: &[],
        default_expect: |_| (Expect::Small, f64::EPSILON),
        large_bound: 0.1,
        run: ver_ver_ii,
    },
    CheckInfo {
        id: "analytic-fd-agreement",
        description: "closed-form metric jets against finite differences, on both metrics",
        requires: &[],
        default_expect: |_| (Expect::Small, 1e-6),
        large_bound: 0.1,
        run: analytic_fd,
    },
];

fn salt(id: &str) -> u64 {
    // FNV-1a, so per-check streams do not depend on check order
    id.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn points(ctx: &CheckContext) -> Result<Vec<TwistorPoint>> {
    ctx.pair.sample_points(ctx.seed, ctx.samples)
}

/// Evaluates `f` at every sample point in parallel with a per-sample RNG.
fn per_point<F>(ctx: &CheckContext, id: &str, f: F) -> Result<Outcome>
where
    F: Fn(&TwistorPoint, &mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let pts = points(ctx)?;
    let root = derive_seed(ctx.seed, salt(id));
    let values = pts
        .par_iter()
        .enumerate()
        .map(|(k, pt)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(root, k as u64));
            f(pt, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome {
        values,
        points: pts.iter().map(|p| Some(p.p().iter().copied().collect())).collect(),
        ..Default::default()
    })
}

fn random_skew(space: &InnerProductSpace, rng: &mut ChaCha8Rng) -> Endomorphism {
    let n = space.dim();
    let a = gaussian_matrix(rng, n, n);
    space.from_orthonormal(&(&a - a.transpose()))
}

fn random_vertical(space: &InnerProductSpace, j: &OrthogonalComplexStructure, rng: &mut ChaCha8Rng) -> Endomorphism {
    vertical_project_fast(j, &random_skew(space, rng))
}

fn psi_well_defined(ctx: &CheckContext) -> Result<Outcome> {
    per_point(ctx, "psi-well-defined", |pt, _| {
        let n = pt.dim();
        let transfer = ctx.pair.transfer(pt.p())?;
        let psi = transfer.conjugate(pt.j());
        let gt = transfer.target().gram();
        let square = (&psi * &psi + DMatrix::identity(n, n)).amax();
        let orth = (psi.transpose() * gt * &psi - gt).amax() / gt.amax().max(1.0);
        let basis = vertical_basis(pt.space(), pt.structure());
        let mut iso: f64 = 0.0;
        for u in &basis {
            for w in &basis {
                let lhs = pt.space().so_metric_fast(u, w);
                let rhs = transfer.target().so_metric_fast(&transfer.conjugate(u), &transfer.conjugate(w));
                iso = iso.max((lhs - rhs).abs());
            }
        }
        Ok(square.max(orth).max(iso))
    })
}

fn psi_fibers(ctx: &CheckContext) -> Result<Outcome> {
    per_point(ctx, "psi-fibers", |pt, _| {
        let frame = PushforwardFrame::new(ctx.pair, pt)?;
        let mut worst: f64 = 0.0;
        for u in vertical_basis(pt.space(), pt.structure()) {
            let out = frame.push(&TwistorTangent::vertical(pt, crate::fiber::VerticalVector::new(pt.space(), pt.structure(), u)?)?)?;
            worst = worst
                .max(vertical_residual(frame.target().structure(), out.ver()))
                .max(frame.target().space().skew_residual(out.ver()))
                .max(out.hor().amax());
        }
        Ok(worst)
    })
}

fn sqrt_quadrature(ctx: &CheckContext) -> Result<Outcome> {
    per_point(ctx, "sqrt-quadrature", |pt, _| {
        let transfer = ctx.pair.transfer(pt.p())?;
        let q = principal_sqrt_via_log(transfer.c(), 64)?;
        Ok((&q - transfer.q()).norm() / transfer.q().norm())
    })
}

/// Fixed rotations whose factors are recorded in reports.
pub const ISOCLINIC_GOLDEN_SEEDS: [u64; 8] = [1, 2, 3, 5, 8, 13, 21, 34];

fn isoclinic(ctx: &CheckContext) -> Result<Outcome> {
    let root = derive_seed(ctx.seed, salt("isoclinic"));
    let values = (0..ctx.samples)
        .into_par_iter()
        .map(|k| {
            let a = random_so4(derive_seed(root, k as u64));
            let f = isoclinic_factor(&a)?;
            Ok((left_isoclinic(f.left) * right_isoclinic(f.right) - a).amax())
        })
        .collect::<Result<Vec<_>>>()?;
    let golden = ISOCLINIC_GOLDEN_SEEDS
        .iter()
        .map(|&s| {
            let f = isoclinic_factor(&random_so4(s))?;
            Ok(json!({ "seed": s, "left": f.left, "right": f.right }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut details = BTreeMap::new();
    details.insert("golden".to_string(), Value::Array(golden));
    Ok(Outcome {
        points: vec![None; values.len()],
        values,
        details,
        ..Default::default()
    })
}

fn wedge_isometry(ctx: &CheckContext) -> Result<Outcome> {
    per_point(ctx, "wedge-isometry", |pt, rng| {
        let space = pt.space();
        let s = random_skew(space, rng);
        let t = random_skew(space, rng);
        let lhs = 0.5 * space.so_metric_fast(&s, &t);
        let rhs = wedge_of_endo_fast(space, &s).inner(space, &wedge_of_endo_fast(space, &t));
        Ok((lhs - rhs).abs())
    })
}

fn ss_identity(ctx: &CheckContext) -> Result<Outcome> {
    per_point(ctx, "ss-identity", |pt, rng| {
        let n = pt.dim();
        let a = gaussian_vector(rng, n);
        let b = gaussian_vector(rng, n);
        let scale = (pt.space().norm(&a) * pt.space().norm(&b)).max(1.0);
        Ok(ss_identity_residual(pt.space(), pt.j(), &a, &b) / scale)
    })
}

fn gs_isometry(ctx: &CheckContext) -> Result<Outcome> {
    let s = ctx.params.s;
    per_point(ctx, "gs-isometry", |pt, rng| {
        let n = pt.dim();
        let tangent = |rng: &mut ChaCha8Rng| {
            let v = random_vertical(pt.space(), pt.structure(), rng);
            TwistorTangent::new(pt, gaussian_vector(rng, n), v)
        };
        let a = tangent(rng)?;
        let b = tangent(rng)?;
        let base = gs_inner(s, pt, &a, &b)?;
        let mut worst: f64 = 0.0;
        for kind in [StructureKind::Ahs, StructureKind::Es] {
            let ja = jk_apply(kind, pt, &a);
            let jb = jk_apply(kind, pt, &b);
            worst = worst.max((gs_inner(s, pt, &ja, &jb)? - base).abs() / base.abs().max(1.0));
        }
        Ok(worst)
    })
}

fn holomorphy(ctx: &CheckContext, sweeps: &[(StructurePair, bool)]) -> Result<Outcome> {
    let pts = points(ctx)?;
    let mut values: Option<Vec<f64>> = None;
    let mut details = BTreeMap::new();
    let large = ctx.expect == Expect::Large;
    for &(structures, anti) in sweeps {
        let r = holomorphy_at_points(ctx.pair, ctx.params, structures, anti, pts.clone())?;
        let key = format!(
            "{}-{}{}",
            kind_name(structures.source),
            kind_name(structures.target),
            if anti { "-anti" } else { "" }
        );
        details.insert(
            key,
            json!({
                "horizontal": { "max": r.horizontal.max, "min": r.horizontal.min },
                "mixed": { "max": r.mixed.max, "min": r.mixed.min },
                "vertical": { "max": r.vertical.max, "min": r.vertical.min },
            }),
        );
        let totals: Vec<f64> = r.samples.iter().map(|s| s.total).collect();
        values = Some(match values {
            None => totals,
            // several sweeps: the weakest one decides a large check, the worst one a small check
            Some(prev) => prev
                .iter()
                .zip(&totals)
                .map(|(a, b)| if large { a.min(*b) } else { a.max(*b) })
                .collect(),
        });
    }
    Ok(Outcome {
        values: values.unwrap_or_default(),
        points: pts.iter().map(|p| Some(p.p().iter().copied().collect())).collect(),
        details,
        ..Default::default()
    })
}

fn kind_name(k: StructureKind) -> &'static str {
    match k {
        StructureKind::Ahs => "ahs",
        StructureKind::Es => "es",
    }
}

fn iso_criterion_check(ctx: &CheckContext, k: u8) -> Result<Outcome> {
    let id = if k == 1 { "iso-criterion-k1" } else { "iso-criterion-k2" };
    per_point(ctx, id, |pt, rng| {
        let space = pt.space();
        let df = ctx.pair.factor_jet(pt.p())?.grad;
        let mut x = gaussian_vector(rng, pt.dim());
        if k == 2 {
            // witness direction: g-orthogonal to ∇f and I∇f, unit length
            let grad = space.sharp(&df);
            let igrad = pt.j() * &grad;
            for w in [&grad, &igrad] {
                let ww = space.inner(w, w);
                if ww > 1e-300 {
                    x -= w * (space.inner(&x, w) / ww);
                }
            }
            x /= space.norm(&x);
        }
        Ok(iso_criterion(k, space, &df, pt.j(), &x))
    })
}

fn lemma_rab(ctx: &CheckContext) -> Result<Outcome> {
    per_point(ctx, "lemma-rab", |pt, rng| {
        let n = pt.dim();
        let mut worst: f64 = 0.0;
        for metric in [ctx.pair.g(), ctx.pair.gtilde()] {
            let data = curvature(metric, pt.p())?;
            let space = data.space();
            let j = if std::ptr::eq(metric, ctx.pair.g()) {
                pt.structure().clone()
            } else {
                ctx.pair.transfer(pt.p())?.psi(pt.structure())?
            };
            let x = gaussian_vector(rng, n);
            let y = gaussian_vector(rng, n);
            let a = random_vertical(space, &j, rng);
            let b = random_vertical(space, &j, rng);
            worst = worst.max(lemma_rab_residual(space, &data, &x, &y, &a, &b));
        }
        Ok(worst)
    })
}

fn both<'a>(ctx: &CheckContext<'a>) -> [&'a MetricField; 2] {
    [ctx.pair.g(), ctx.pair.gtilde()]
}

fn selected<'a>(ctx: &CheckContext<'a>) -> &'a MetricField {
    match ctx.side {
        Side::G => ctx.pair.g(),
        Side::Gtilde => ctx.pair.gtilde(),
    }
}

fn decomposition(ctx: &CheckContext) -> Result<Outcome> {
    per_point(ctx, "curvature-decomposition", |pt, _| {
        let mut worst: f64 = 0.0;
        for metric in both(ctx) {
            let data = curvature(metric, pt.p())?;
            let parts = data.decompose()?;
            let r = data.operator();
            let scale = operator_norm(r).max(1.0);
            let rebuilt = &parts.scalar + &parts.traceless_ricci + &parts.weyl;
            worst = worst.max((rebuilt - r).amax() / scale);
            let list = [&parts.scalar, &parts.traceless_ricci, &parts.weyl];
            for a in 0..3 {
                for b in a + 1..3 {
                    worst = worst.max(operator_pairing(list[a], list[b]).abs() / (scale * scale));
                }
            }
            if let (Some(wp), Some(wm)) = (&parts.weyl_plus, &parts.weyl_minus) {
                worst = worst
                    .max((wp + wm - &parts.weyl).amax() / scale)
                    .max(operator_pairing(wp, wm).abs() / (scale * scale));
            }
        }
        Ok(worst)
    })
}

fn curvature_scalar<F>(ctx: &CheckContext, f: F) -> Result<Outcome>
where
    F: Fn(&crate::riemann::CurvatureData, Option<f64>) -> Result<f64> + Sync,
{
    let metric = selected(ctx);
    let mut out = per_point(ctx, "curvature", |pt, _| f(&curvature(metric, pt.p())?, ctx.target))?;
    out.details.insert(
        "metric".into(),
        json!(match ctx.side {
            Side::G => "g",
            Side::Gtilde => "gtilde",
        }),
    );
    Ok(out)
}

fn traceless_ricci_swap(ctx: &CheckContext) -> Result<Outcome> {
    per_point(ctx, "traceless-ricci-swap", |pt, _| {
        let mut worst: f64 = 0.0;
        for metric in both(ctx) {
            let data = curvature(metric, pt.p())?;
            let b = data.decompose()?.traceless_ricci;
            let star = hodge_star(data.space())?;
            worst = worst.max((&b * &star + &star * &b).amax());
        }
        Ok(worst)
    })
}

fn weyl_conformal(ctx: &CheckContext) -> Result<Outcome> {
    per_point(ctx, "weyl-conformal", |pt, _| {
        let f = ctx.pair.factor_jet(pt.p())?.value;
        let w = curvature(ctx.pair.g(), pt.p())?.decompose()?.weyl;
        let wt = curvature(ctx.pair.gtilde(), pt.p())?.decompose()?.weyl;
        Ok((wt - w * (-2.0 * f).exp()).amax())
    })
}

fn hodge_conformal(ctx: &CheckContext) -> Result<Outcome> {
    per_point(ctx, "hodge-conformal", |pt, _| {
        let a = hodge_star(&ctx.pair.g().space(pt.p())?)?;
        let b = hodge_star(&ctx.pair.gtilde().space(pt.p())?)?;
        Ok((a - b).amax())
    })
}

fn bianchi(ctx: &CheckContext) -> Result<Outcome> {
    per_point(ctx, "bianchi", |pt, rng| {
        let n = pt.dim();
        let mut worst: f64 = 0.0;
        for metric in both(ctx) {
            let data = curvature(metric, pt.p())?;
            let [x, y, z] = [0; 3].map(|_| gaussian_vector(rng, n));
            worst = worst.max(bianchi_residual(data.tensor(), &x, &y, &z));
        }
        Ok(worst)
    })
}

fn contracted_bianchi(ctx: &CheckContext) -> Result<Outcome> {
    let pts = points(ctx)?;
    let rows = pts
        .par_iter()
        .map(|pt| {
            let mut classical: f64 = 0.0;
            let mut printed: f64 = 0.0;
            for metric in both(ctx) {
                let (div, dtau) = ricci_divergence(metric, pt.p())?;
                classical = classical.max((&div - &dtau * 0.5).amax());
                printed = printed.max((&div - &dtau).amax());
            }
            Ok((classical, printed))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut details = BTreeMap::new();
    details.insert(
        "full-dtau-residual-max".into(),
        json!(rows.iter().map(|r| r.1).fold(0.0, f64::max)),
    );
    Ok(Outcome {
        values: rows.iter().map(|r| r.0).collect(),
        points: pts.iter().map(|p| Some(p.p().iter().copied().collect())).collect(),
        details,
        ..Default::default()
    })
}

fn sigma_check(ctx: &CheckContext) -> Result<Outcome> {
    let conformal = ctx.pair.is_conformal();
    per_point(ctx, "sigma-form", |pt, rng| {
        let n = pt.dim();
        let x = gaussian_vector(rng, n);
        let y = gaussian_vector(rng, n);
        let sxy = sigma_form(ctx.pair, &x, &y, pt.p())?;
        let syx = sigma_form(ctx.pair, &y, &x, pt.p())?;
        let mut r = (&sxy - &syx).amax();
        if conformal {
            let grad = pt.space().sharp(&ctx.pair.factor_jet(pt.p())?.grad);
            r = r.max((&sxy - grad * (2.0 * pt.space().inner(&x, &y))).amax());
        }
        Ok(r / (x.norm() * y.norm()).max(1.0))
    })
}

fn vertical_trace(ctx: &CheckContext) -> Result<Outcome> {
    per_point(ctx, "vertical-trace", |pt, _| {
        let c = ConformalPoint::new(ctx.pair, pt)?;
        let vt = c.vertical_gap_trace();
        Ok(pt.space().so_metric_fast(&vt, &vt).max(0.0).sqrt())
    })
}

fn harmonicity(ctx: &CheckContext) -> Result<Outcome> {
    let pts = points(ctx)?;
    let sign = harmonicity_sign();
    let samples = pts
        .par_iter()
        .map(|pt| harmonicity_at(ctx.pair, ctx.params.t, pt, sign))
        .collect::<Result<Vec<_>>>()?;
    let large = ctx.expect == Expect::Large;
    let values = samples
        .iter()
        .map(|s| if large { s.trace.min(s.closed_form) } else { s.trace.max(s.closed_form) })
        .collect();
    let fold = |f: fn(&crate::twistor::HarmonicitySample) -> f64, init: f64, op: fn(f64, f64) -> f64| {
        samples.iter().map(f).fold(init, op)
    };
    let agreement = fold(|s| s.agreement, 0.0, f64::max);
    let mut details = BTreeMap::new();
    details.insert("sign".into(), json!(sign));
    details.insert(
        "trace".into(),
        json!({ "max": fold(|s| s.trace, 0.0, f64::max), "min": fold(|s| s.trace, f64::INFINITY, f64::min) }),
    );
    details.insert(
        "closed-form".into(),
        json!({ "max": fold(|s| s.closed_form, 0.0, f64::max), "min": fold(|s| s.closed_form, f64::INFINITY, f64::min) }),
    );
    details.insert("agreement-max".into(), json!(agreement));
    Ok(Outcome {
        values,
        points: pts.iter().map(|p| Some(p.p().iter().copied().collect())).collect(),
        details,
        side_conditions: vec![("agreement".into(), agreement, 1e-6)],
    })
}

fn ver_ver_ii(ctx: &CheckContext) -> Result<Outcome> {
    per_point(ctx, "ver-ver-ii", |pt, _| {
        let basis = vertical_basis(pt.space(), pt.structure());
        let mut worst: f64 = 0.0;
        for u in &basis {
            for w in &basis {
                let (h, v) = second_fund_form_vertical(pt, u, w);
                worst = worst.max(h.amax()).max(v.amax());
            }
        }
        Ok(worst)
    })
}

fn analytic_fd(ctx: &CheckContext) -> Result<Outcome> {
    per_point(ctx, "analytic-fd-agreement", |pt, _| {
        let mut worst: f64 = 0.0;
        for metric in both(ctx) {
            let a = metric.analytic_jet(pt.p())?;
            let b = metric.fd_jet(pt.p())?;
            worst = worst.max(a.max_difference(&b));
        }
        Ok(worst)
    })
}
