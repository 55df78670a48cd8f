//! The embedding `H = A + iB  ->  [[A, -B], [B, A]]` of `n x n` Hermitian
//! matrices into `2n x 2n` real symmetric ones.
//!
//! `H` is positive semidefinite iff its image is. Conversely every real
//! symmetric positive semidefinite `Y` projects back onto a Hermitian
//! positive semidefinite matrix through [`hermitian_part`].

use nalgebra::{Complex, DMatrix};

use crate::SymMatrix;

/// Adds the image of the Hermitian pair `H_ij = z`, `H_ji = conj(z)` to `out`.
///
/// `out` must have dimension `2n`. On the diagonal only the real part of `z`
/// is used.
pub fn push_hermitian(out: &mut SymMatrix, n: usize, i: usize, j: usize, z: Complex<f64>) {
    debug_assert_eq!(out.dim(), 2 * n);
    if i == j {
        if z.re != 0.0 {
            out.push(i, i, z.re);
            out.push(n + i, n + i, z.re);
        }
        return;
    }
    if z.re != 0.0 {
        out.push(i, j, z.re);
        out.push(n + i, n + j, z.re);
    }
    if z.im != 0.0 {
        out.push(n + i, j, z.im);
        out.push(n + j, i, -z.im);
    }
}

pub fn realify(h: &DMatrix<Complex<f64>>) -> DMatrix<f64> {
    let n = h.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for i in 0..n {
            let z = h[(i, j)];
            out[(i, j)] = z.re;
            out[(n + i, n + j)] = z.re;
            out[(n + i, j)] = z.im;
            out[(i, n + j)] = -z.im;
        }
    }
    out
}

/// Hermitian projection `(Y11 + Y22)/2 + i (Y21 - Y12)/2` of a `2n x 2n` matrix.
pub fn hermitian_part(y: &DMatrix<f64>) -> DMatrix<Complex<f64>> {
    let n = y.nrows() / 2;
    DMatrix::from_fn(n, n, |i, j| {
        Complex::new(
            0.5 * (y[(i, j)] + y[(n + i, n + j)]),
            0.5 * (y[(n + i, j)] - y[(i, n + j)]),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DMatrix<Complex<f64>> {
        let a = DMatrix::from_fn(3, 3, |i, j| Complex::new((i * 3 + j) as f64 * 0.1, (i as f64) - (j as f64) * 0.5));
        &a * a.adjoint()
    }

    #[test]
    fn push_matches_dense_embedding() {
        let h = sample();
        let mut s = SymMatrix::zeros(6);
        for j in 0..3 {
            for i in 0..=j {
                push_hermitian(&mut s, 3, i, j, h[(i, j)]);
            }
        }
        let d = s.to_dense();
        assert!((d - realify(&h)).amax() < 1e-14);
    }

    #[test]
    fn projection_inverts_embedding() {
        let h = sample();
        assert!((hermitian_part(&realify(&h)) - &h).camax() < 1e-14);
    }

    #[test]
    fn inner_products_double() {
        let h = sample();
        let k = sample().map(|z| z * 0.5 + Complex::new(0.1, 0.0));
        let k = (&k + k.adjoint()) * Complex::new(0.5, 0.0);
        let complex_dot: f64 = h.iter().zip(k.iter()).map(|(a, b)| (a * b.conj()).re).sum();
        assert!((realify(&h).dot(&realify(&k)) - 2.0 * complex_dot).abs() < 1e-12);
    }
}
