//! `SO(4) = (Sp(1) × Sp(1)) / Z₂`: every rotation of `R⁴ = H` is `x ↦ u x v`
//! for unit quaternions `u`, `v`, unique up to a simultaneous sign.

use nalgebra::{DMatrix, Matrix3, Matrix4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::random_orthogonal;
use crate::{Error, Result};

/// `(a, b, c, d)` for `a + ib + jc + kd`.
pub type Quaternion = [f64; 4];

/// Left multiplication `x ↦ u x`.
#[rustfmt::skip]
pub fn left_isoclinic(u: Quaternion) -> Matrix4<f64> {
    let [a, b, c, d] = u;
    Matrix4::new(
        a, -b, -c, -d,
        b,  a, -d,  c,
        c,  d,  a, -b,
        d, -c,  b,  a,
    )
}

/// Right multiplication `x ↦ x v`.
#[rustfmt::skip]
pub fn right_isoclinic(v: Quaternion) -> Matrix4<f64> {
    let [p, q, r, s] = v;
    Matrix4::new(
        p, -q, -r, -s,
        q,  p,  s, -r,
        r, -s,  p,  q,
        s,  r, -q,  p,
    )
}

/// Rotation of the imaginary quaternions by `x ↦ u x ū`.
#[rustfmt::skip]
pub fn quaternion_rotation(u: Quaternion) -> Matrix3<f64> {
    let [a, b, c, d] = u;
    Matrix3::new(
        a * a + b * b - c * c - d * d, -2.0 * (a * d - b * c), 2.0 * (a * c + b * d),
        2.0 * (a * d + b * c), a * a + c * c - b * b - d * d, -2.0 * (a * b - c * d),
        -2.0 * (a * c - b * d), 2.0 * (a * b + c * d), a * a + d * d - b * b - c * c,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoclinicPair {
    pub left: Quaternion,
    pub right: Quaternion,
}

const SO4_TOL: f64 = 1e-9;

/// Factor `A ∈ SO(4)` as `left_isoclinic(u) · right_isoclinic(v)`.
///
/// The sign is fixed by making the first entry of `u` that is not
/// negligible positive.
pub fn isoclinic_factor(a: &Matrix4<f64>) -> Result<IsoclinicPair> {
    let orth = (a.transpose() * a - Matrix4::identity()).amax();
    let det = a.determinant();
    if orth > SO4_TOL || (det - 1.0).abs() > SO4_TOL {
        return Err(Error::NotSpecialOrthogonal { orth, det });
    }
    // A = Σ u_k v_l L(e_k) R(e_l) and the 16 products are orthogonal with
    // squared Frobenius norm 4, so M = u vᵀ is read off by projection.
    let mut m = Matrix4::zeros();
    for k in 0..4 {
        for l in 0..4 {
            let basis = left_isoclinic(unit(k)) * right_isoclinic(unit(l));
            m[(k, l)] = 0.25 * basis.component_mul(a).sum();
        }
    }
    let col = (0..4)
        .max_by(|&x, &y| m.column(x).norm().total_cmp(&m.column(y).norm()))
        .unwrap_or(0);
    let mut u: Quaternion = m.column(col).normalize().into();
    let lead = u.iter().copied().find(|x| x.abs() > 1e-9).unwrap_or(1.0);
    if lead < 0.0 {
        u = u.map(|x| -x);
    }
    let v = m.transpose() * nalgebra::Vector4::from(u);
    Ok(IsoclinicPair {
        left: u,
        right: v.normalize().into(),
    })
}

fn unit(k: usize) -> Quaternion {
    let mut q = [0.0; 4];
    q[k] = 1.0;
    q
}

/// Haar-random rotation of `R⁴`.
pub fn random_so4(seed: u64) -> Matrix4<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q: DMatrix<f64> = random_orthogonal(&mut rng, 4, true);
    Matrix4::from_fn(|i, j| q[(i, j)])
}
