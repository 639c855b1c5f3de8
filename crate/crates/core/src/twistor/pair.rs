//! Metric pairs on one chart and the pushforward of `Ψ`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{assert_vertical, basis_vector, TwistorPoint, TwistorTangent};
use crate::fiber::{
    random_compatible, Endomorphism, InnerProductSpace, MetricTransfer, OrthogonalComplexStructure,
};
use crate::linalg::derive_seed;
use crate::riemann::{christoffel, conformal_difference_tensor, difference_tensor, fd, Christoffel, MetricField, ScalarField};
use crate::{Error, Result};

/// Vertical parts assembled from finite differences are checked against this.
const PUSH_VERTICAL_TOL: f64 = 1e-6;

/// Two metrics on the same chart box; `factor` is set when `g̃ = e^{2f} g`.
#[derive(Clone, Debug)]
pub struct MetricPair {
    g: MetricField,
    gtilde: MetricField,
    factor: Option<ScalarField>,
}

impl MetricPair {
    pub fn new(g: MetricField, gtilde: MetricField) -> Result<Self> {
        if g.dim() != gtilde.dim() {
            return Err(Error::DimensionMismatch {
                expected: g.dim(),
                found: gtilde.dim(),
            });
        }
        if g.domain() != gtilde.domain() {
            return Err(Error::Config("both metrics of a pair must share the chart box".into()));
        }
        let factor = if g.kind() == gtilde.kind() {
            Some(ScalarField::constant(0.0))
        } else {
            match gtilde.conformal_parts() {
                Some((base, f)) if &base == g.kind() => Some(f),
                _ => None,
            }
        };
        Ok(Self { g, gtilde, factor })
    }

    /// `(g, e^{2f} g)` on the chart of `g`.
    pub fn conformal(g: MetricField, f: ScalarField) -> Result<Self> {
        let kind = crate::riemann::MetricKind::conformal(g.kind().clone(), f);
        let gtilde = MetricField::new(kind, g.domain().clone(), g.mode())?;
        Self::new(g, gtilde)
    }

    pub fn g(&self) -> &MetricField {
        &self.g
    }

    pub fn gtilde(&self) -> &MetricField {
        &self.gtilde
    }

    pub fn factor(&self) -> Option<&ScalarField> {
        self.factor.as_ref()
    }

    pub fn is_conformal(&self) -> bool {
        self.factor.is_some()
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn transfer(&self, p: &DVector<f64>) -> Result<MetricTransfer> {
        MetricTransfer::new(&self.g.space(p)?, &self.gtilde.space(p)?)
    }

    /// `Q(p) = C(p)^{1/2}`.
    pub fn q_field(&self, p: &DVector<f64>) -> Result<Endomorphism> {
        Ok(self.transfer(p)?.q().clone())
    }

    /// `C(p) = G⁻¹G̃`.
    pub fn c_field(&self, p: &DVector<f64>) -> Result<Endomorphism> {
        let g = self.g.space(p)?;
        Ok(g.gram_inv() * self.gtilde.gram(p)?)
    }

    /// `f` and its first two derivatives at `p`.
    pub fn factor_jet(&self, p: &DVector<f64>) -> Result<crate::riemann::ScalarJet> {
        let f = self.factor.as_ref().ok_or(Error::NotConformal)?;
        Ok(f.jet(p))
    }

    /// `Γ̃ − Γ` at `p`; closed form for conformal pairs.
    pub fn difference(&self, p: &DVector<f64>) -> Result<Christoffel> {
        match &self.factor {
            Some(f) => {
                let n = self.dim();
                let gram = self.g.gram(p)?;
                let df = f.jet(p).grad;
                let mut out = Christoffel::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        let v = conformal_difference_tensor(&gram, &df, &basis_vector(n, i), &basis_vector(n, j));
                        for k in 0..n {
                            out.set_entry(k, i, j, v[k]);
                        }
                    }
                }
                Ok(out)
            }
            None => difference_tensor(&self.g, &self.gtilde, p),
        }
    }

    /// Margin that keeps every stencil used by the twistor checks inside the box.
    pub fn sample_margin(&self) -> f64 {
        2.0 * fd::REACH * self.g.step().max(self.gtilde.step())
    }

    /// `count` deterministic samples `(p, I)`, each from its own derived seed.
    pub fn sample_points(&self, seed: u64, count: usize) -> Result<Vec<TwistorPoint>> {
        let margin = self.sample_margin();
        (0..count)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2 * i as u64));
                let p = self.g.domain().sample(&mut rng, margin);
                let space = self.g.space(&p)?;
                let j = random_compatible(&space, derive_seed(seed, 2 * i as u64 + 1), None);
                Ok(TwistorPoint::from_parts(space, p, j))
            })
            .collect()
    }
}

/// `∇̃_X S` at `p` for any section with `S(p) = I` and `∇S|_p = 0`.
///
/// Conformal pairs use `(∇̃_X S)Y = (IY)(f)X − Y(f)IX − g(X,IY)∇f + g(X,Y)I∇f`;
/// otherwise `[A_X, I]` with `A = Γ̃ − Γ`.
pub fn nabla_tilde_section(
    pair: &MetricPair,
    i: &OrthogonalComplexStructure,
    x: &DVector<f64>,
    p: &DVector<f64>,
) -> Result<Endomorphism> {
    let j = i.mat();
    match pair.factor() {
        Some(f) => {
            let gram = pair.g().gram(p)?;
            let df = f.jet(p).grad;
            let grad = gram.clone().cholesky().ok_or(Error::NotPositiveDefinite)?.solve(&df);
            let gx = (x.transpose() * &gram).transpose();
            let ix = j * x;
            let igrad = j * &grad;
            Ok(x * (df.transpose() * j) - &ix * df.transpose() - &grad * (gx.transpose() * j)
                + igrad * gx.transpose())
        }
        None => {
            let a = pair.difference(p)?.contract(x);
            Ok(&a * j - j * &a)
        }
    }
}

/// Everything needed to push tangents at one twistor point forward through `Ψ`.
#[derive(Clone, Debug)]
pub struct PushforwardFrame {
    source: TwistorPoint,
    target: TwistorPoint,
    transfer: MetricTransfer,
    // ∂_k Q
    dq: Vec<DMatrix<f64>>,
    gamma_tilde: Christoffel,
    // ∇̃_{e_k} S
    nabla_s: Vec<Endomorphism>,
}

impl PushforwardFrame {
    pub fn new(pair: &MetricPair, source: &TwistorPoint) -> Result<Self> {
        let p = source.p();
        let h = pair.g().step();
        pair.g().domain().check_reach(p, fd::REACH * h)?;
        let transfer = pair.transfer(p)?;
        let dq = fd::partials(&|q: &DVector<f64>| pair.q_field(q), p, h)?;
        let gamma_tilde = christoffel(pair.gtilde(), p)?;
        let n = source.dim();
        let nabla_s = (0..n)
            .map(|k| nabla_tilde_section(pair, source.structure(), &basis_vector(n, k), p))
            .collect::<Result<Vec<_>>>()?;
        let target_j = transfer.psi(source.structure())?;
        let target = TwistorPoint::from_parts(transfer.target().clone(), p.clone(), target_j);
        Ok(Self {
            source: source.clone(),
            target,
            transfer,
            dq,
            gamma_tilde,
            nabla_s,
        })
    }

    pub fn source(&self) -> &TwistorPoint {
        &self.source
    }

    /// The twistor point `Ψ(I)` of `g̃`.
    pub fn target(&self) -> &TwistorPoint {
        &self.target
    }

    pub fn transfer(&self) -> &MetricTransfer {
        &self.transfer
    }

    /// `∇̃_X Q` from the finite-difference partials of the `Q`-field.
    pub fn nabla_tilde_q(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let q = self.transfer.q();
        let mut d = DMatrix::zeros(q.nrows(), q.ncols());
        for (k, dk) in self.dq.iter().enumerate() {
            d += dk * x[k];
        }
        let gx = self.gamma_tilde.contract(x);
        d + &gx * q - q * &gx
    }

    /// `∇̃_X S` for the normalized section through `I`.
    pub fn nabla_tilde_s(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = x.len();
        let mut out = DMatrix::zeros(n, n);
        for (k, s) in self.nabla_s.iter().enumerate() {
            out += s * x[k];
        }
        out
    }

    /// `N_X = ∇̃_X(Q⁻¹SQ) = −Q⁻¹(∇̃_X Q)Q⁻¹IQ + Q⁻¹(∇̃_X S)Q + Q⁻¹I(∇̃_X Q)`.
    pub fn vertical_of_horizontal(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let q = self.transfer.q();
        let qi = self.transfer.q_inv();
        let i = self.source.j();
        let dq = self.nabla_tilde_q(x);
        -(qi * &dq * qi * i * q) + qi * self.nabla_tilde_s(x) * q + qi * i * dq
    }

    /// `Ψ_*(X^h + U) = X^h̃ + N_X + Q⁻¹UQ`, with the vertical part checked at `Ψ(I)`.
    pub fn push(&self, t: &TwistorTangent) -> Result<TwistorTangent> {
        let ver_u = self.transfer.conjugate(t.ver());
        assert_vertical(self.target.structure(), &ver_u, crate::tol::VALIDATION)?;
        let ver = self.vertical_of_horizontal(t.hor()) + ver_u;
        assert_vertical(self.target.structure(), &ver, PUSH_VERTICAL_TOL)?;
        Ok(TwistorTangent::raw(&self.target, t.hor().clone(), ver))
    }
}

/// `Ψ_* T` for a single tangent.
pub fn psi_pushforward(pair: &MetricPair, point: &TwistorPoint, t: &TwistorTangent) -> Result<TwistorTangent> {
    PushforwardFrame::new(pair, point)?.push(t)
}

/// `V_{I,X}(Y) = (IY)(f)X − g(X,IY)∇f − Y(f)IX + g(X,Y)I∇f`.
pub fn v_endomorphism(
    space: &InnerProductSpace,
    df: &DVector<f64>,
    i: &Endomorphism,
    x: &DVector<f64>,
) -> Endomorphism {
    let grad = space.sharp(df);
    let gx = space.gram() * x;
    x * (df.transpose() * i) - &grad * (gx.transpose() * i) - (i * x) * df.transpose()
        + (i * &grad) * gx.transpose()
}

/// `‖(−1)^{k+1} I∘V_{I,X} − V_{I,IX}‖` in the metric of `Hom(V, V)`.
pub fn iso_criterion(
    k: u8,
    space: &InnerProductSpace,
    df: &DVector<f64>,
    i: &Endomorphism,
    x: &DVector<f64>,
) -> f64 {
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    let lhs = i * v_endomorphism(space, df, i, x) * sign;
    let rhs = v_endomorphism(space, df, i, &(i * x));
    space.hom_norm(&(lhs - rhs))
}
