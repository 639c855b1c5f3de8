//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Ordered index pairs `(i, j)` with `i < j`, lexicographic. This is the
/// coordinate basis order of `Λ²V` used everywhere in the crate.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push((i, j));
        }
    }
    out
}

/// Position of `(i, j)`, `i < j`, in [`pairs`].
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    // rows 0..i contribute (n-1) + (n-2) + ... + (n-i)
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Pfaffian of an antisymmetric matrix by cofactor expansion along the first row.
/// Only meant for the small dimensions used here.
pub fn pfaffian(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 1.0;
    }
    if n % 2 == 1 {
        return 0.0;
    }
    if n == 2 {
        return a[(0, 1)];
    }
    let mut total = 0.0;
    for j in 1..n {
        let keep: Vec<usize> = (1..n).filter(|&k| k != j).collect();
        let minor = DMatrix::from_fn(n - 2, n - 2, |r, c| a[(keep[r], keep[c])]);
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * a[(0, j)] * pfaffian(&minor);
    }
    total
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[order - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[order - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed orthogonal matrix. With `special`, the determinant is forced to `+1`.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize, special: bool) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if special && q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Symmetric positive definite matrix with spectrum in `[lo, hi]` (log-uniform).
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let o = random_orthogonal(rng, n, false);
    let (a, b) = (lo.ln(), hi.ln());
    let d = DVector::from_fn(n, |_, _| (a + (b - a) * rng.random::<f64>()).exp());
    let m = &o * DMatrix::from_diagonal(&d) * o.transpose();
    (&m + m.transpose()) * 0.5
}

/// Stateless seed derivation (SplitMix64 finalizer), used to give every sample
/// of a sweep its own independent stream.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `‖a − b‖_F / max(1, ‖b‖_F)`.
pub fn relative_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

pub fn anticommutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b + b * a
}
