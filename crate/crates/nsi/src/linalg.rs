//! Small dense kernels: a Cholesky solver for the symmetric positive
//! definite systems the solver assembles, plus a couple of matrix helpers.
//!
//! Everything here is deterministic and single-threaded; sizes stay in the
//! hundreds-to-low-thousands range, so a compact factorization beats pulling
//! in a LAPACK binding.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Solves `A X = B` for symmetric positive definite `A` via an in-place
/// lower Cholesky factorization. Never forms an inverse.
///
/// Fails with [`Error::SingularSystem`] when a pivot drops to (numerical)
/// zero or below, which for the solver's systems means every regularizer
/// was switched off on rank-deficient data.
pub fn cholesky_solve(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "cholesky_solve: A is {}x{}, B has {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    let factor = cholesky_factor(a)?;
    Ok(cholesky_backsolve(&factor, n, b))
}

/// Lower-triangular factor stored row-major in a flat buffer.
fn cholesky_factor(a: &Array2<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    let mut l: Vec<f64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            l.push(a[[i, j]]);
        }
    }
    let diag_max = (0..n).map(|i| a[[i, i]].abs()).fold(0.0_f64, f64::max);
    let floor = diag_max * 1e-13;
    for j in 0..n {
        let (head, tail) = l.split_at_mut((j + 1) * n);
        let row_j = &mut head[j * n..];
        let mut d = row_j[j];
        for k in 0..j {
            d -= row_j[k] * row_j[k];
        }
        if !(d > floor) || !d.is_finite() {
            return Err(Error::SingularSystem);
        }
        let d = d.sqrt();
        row_j[j] = d;
        let prefix = &row_j[..j];
        for i in j + 1..n {
            let row_i = &mut tail[(i - j - 1) * n..(i - j - 1) * n + j + 1];
            let mut s = row_i[j];
            for (x, y) in row_i[..j].iter().zip(prefix) {
                s -= x * y;
            }
            row_i[j] = s / d;
        }
    }
    Ok(l)
}

/// Forward/backward substitution for every column of `b`.
fn cholesky_backsolve(l: &[f64], n: usize, b: &Array2<f64>) -> Array2<f64> {
    let c = b.ncols();
    let mut x = Array2::<f64>::zeros((n, c));
    let mut col = vec![0.0_f64; n];
    for k in 0..c {
        for i in 0..n {
            let mut s = b[[i, k]];
            let row = &l[i * n..i * n + i];
            for (j, lij) in row.iter().enumerate() {
                s -= lij * col[j];
            }
            col[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = col[i];
            for j in i + 1..n {
                s -= l[j * n + i] * col[j];
            }
            col[i] = s / l[i * n + i];
            x[[i, k]] = col[i];
        }
    }
    x
}

/// Largest absolute entry of `A - Aᵀ`; zero for exactly symmetric input.
pub fn asymmetry(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    worst
}

/// `tr(AᵀB)` for equally shaped matrices.
pub fn trace_dot(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Squared Frobenius norm.
pub fn frob_sq(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// Infinity norm of the difference of two vectors.
pub fn max_abs_diff(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
