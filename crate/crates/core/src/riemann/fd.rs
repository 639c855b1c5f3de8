//! Central 4th-order finite differences of matrix-valued functions.

use nalgebra::{DMatrix, DVector};

use crate::Result;

/// Offsets and weights (times `1/h`) of the first-derivative stencil.
pub const FIRST: [(f64, f64); 4] = [
    (-2.0, 1.0 / 12.0),
    (-1.0, -8.0 / 12.0),
    (1.0, 8.0 / 12.0),
    (2.0, -1.0 / 12.0),
];

/// Offsets and weights (times `1/h²`) of the pure second-derivative stencil.
pub const SECOND: [(f64, f64); 5] = [
    (-2.0, -1.0 / 12.0),
    (-1.0, 16.0 / 12.0),
    (0.0, -30.0 / 12.0),
    (1.0, 16.0 / 12.0),
    (2.0, -1.0 / 12.0),
];

/// Stencil reach in units of `h`.
pub const REACH: f64 = 2.0;

fn shifted(p: &DVector<f64>, axis: usize, t: f64) -> DVector<f64> {
    let mut q = p.clone();
    q[axis] += t;
    q
}

/// `∂_k F(p)` for every axis `k`.
pub fn partials<F>(f: &F, p: &DVector<f64>, h: f64) -> Result<Vec<DMatrix<f64>>>
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>>,
{
    (0..p.len()).map(|k| partial(f, p, k, h)).collect()
}

pub fn partial<F>(f: &F, p: &DVector<f64>, axis: usize, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>>,
{
    let mut acc: Option<DMatrix<f64>> = None;
    for &(o, w) in &FIRST {
        let v = f(&shifted(p, axis, o * h))? * (w / h);
        acc = Some(match acc {
            Some(a) => a + v,
            None => v,
        });
    }
    Ok(acc.expect("non-empty stencil"))
}

/// `∂_k∂_l F(p)`; mixed entries use the 16-point tensor product of [`FIRST`].
pub fn second_partials<F>(f: &F, p: &DVector<f64>, h: f64) -> Result<Vec<Vec<DMatrix<f64>>>>
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>>,
{
    let n = p.len();
    let centre = f(p)?;
    let mut out = vec![vec![DMatrix::zeros(centre.nrows(), centre.ncols()); n]; n];
    for k in 0..n {
        let mut acc = &centre * (SECOND[2].1 / (h * h));
        for &(o, w) in SECOND.iter().filter(|(o, _)| *o != 0.0) {
            acc += f(&shifted(p, k, o * h))? * (w / (h * h));
        }
        out[k][k] = acc;
        for l in (k + 1)..n {
            let mut acc = DMatrix::zeros(centre.nrows(), centre.ncols());
            for &(ok, wk) in &FIRST {
                for &(ol, wl) in &FIRST {
                    let q = shifted(&shifted(p, k, ok * h), l, ol * h);
                    acc += f(&q)? * (wk * wl / (h * h));
                }
            }
            out[l][k] = acc.clone();
            out[k][l] = acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quartic_polynomials() {
        // 4th-order stencils differentiate polynomials of degree ≤ 4 exactly (up to rounding)
        let f = |q: &DVector<f64>| {
            let (x, y) = (q[0], q[1]);
            Ok(DMatrix::from_element(1, 1, x.powi(4) + x * x * y * y + 3.0 * x * y.powi(3)))
        };
        let p = DVector::from_row_slice(&[0.3, -0.7]);
        let (x, y) = (p[0], p[1]);
        let d = partials(&f, &p, 1e-2).unwrap();
        assert!((d[0][(0, 0)] - (4.0 * x.powi(3) + 2.0 * x * y * y + 3.0 * y.powi(3))).abs() < 1e-10);
        assert!((d[1][(0, 0)] - (2.0 * x * x * y + 9.0 * x * y * y)).abs() < 1e-10);
        let dd = second_partials(&f, &p, 1e-2).unwrap();
        assert!((dd[0][0][(0, 0)] - (12.0 * x * x + 2.0 * y * y)).abs() < 1e-8);
        assert!((dd[0][1][(0, 0)] - (4.0 * x * y + 9.0 * y * y)).abs() < 1e-8);
        assert!((dd[1][1][(0, 0)] - (2.0 * x * x + 18.0 * x * y)).abs() < 1e-8);
    }
}
