//! Householder QR with column pivoting.

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Factors of `A·P = Q·R`.
#[derive(Debug, Clone)]
pub struct QrcpFactors {
    /// `m × n`, orthonormal columns.
    pub q: DenseMatrix,
    /// `n × n`, upper triangular with non-increasing diagonal magnitudes
    /// (beyond any fixed leading columns).
    pub r: DenseMatrix,
    /// `perm[k]` is the original index of the `k`-th pivoted column.
    pub perm: Vec<usize>,
    /// Number of diagonal entries of `R` above `max(m, n)·ε·|R₀₀|`.
    pub numerical_rank: usize,
}

impl QrcpFactors {
    pub fn rows(&self) -> usize {
        self.q.rows()
    }

    pub fn cols(&self) -> usize {
        self.r.cols()
    }

    /// Position of original column `j` in pivoted order.
    pub fn pivot_position(&self, j: usize) -> Option<usize> {
        self.perm.iter().position(|&p| p == j)
    }
}

pub fn qrcp(a: &DenseMatrix) -> Result<QrcpFactors> {
    qrcp_with_leading(a, 0)
}

/// QRCP where the first `fixed` columns are taken in their original order
/// before pivoting starts on the rest.
pub fn qrcp_with_leading(a: &DenseMatrix, fixed: usize) -> Result<QrcpFactors> {
    let (m, n) = (a.rows(), a.cols());
    if m == 0 || n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    if m < n {
        return Err(Error::DimensionMismatch { expected: n, got: m });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    // Column-major working copy; reflector vectors are stored below the diagonal.
    let mut w = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            w[j * m + i] = a[(i, j)];
        }
    }
    let col_norm = |w: &[f64], j: usize, from: usize| -> f64 {
        w[j * m + from..(j + 1) * m].iter().map(|x| x * x).sum::<f64>().sqrt()
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut vn1: Vec<f64> = (0..n).map(|j| col_norm(&w, j, 0)).collect();
    let mut vn2 = vn1.clone();
    let mut tau = vec![0.0; n];
    let tol3z = f64::EPSILON.sqrt();

    for k in 0..n {
        let pvt = if k < fixed {
            k
        } else {
            (k..n).fold(k, |best, j| if vn1[j] > vn1[best] { j } else { best })
        };
        if pvt != k {
            for i in 0..m {
                w.swap(pvt * m + i, k * m + i);
            }
            perm.swap(pvt, k);
            vn1.swap(pvt, k);
            vn2.swap(pvt, k);
        }

        let alpha = w[k * m + k];
        let xnorm = col_norm(&w, k, k + 1);
        if xnorm == 0.0 {
            tau[k] = 0.0;
        } else {
            let beta = -alpha.signum() * alpha.hypot(xnorm);
            let beta = if alpha == 0.0 { -alpha.hypot(xnorm) } else { beta };
            tau[k] = (beta - alpha) / beta;
            let s = 1.0 / (alpha - beta);
            for x in &mut w[k * m + k + 1..(k + 1) * m] {
                *x *= s;
            }
            w[k * m + k] = beta;
        }

        if tau[k] != 0.0 {
            for j in k + 1..n {
                let mut s = w[j * m + k];
                for i in k + 1..m {
                    s += w[k * m + i] * w[j * m + i];
                }
                s *= tau[k];
                w[j * m + k] -= s;
                for i in k + 1..m {
                    w[j * m + i] -= s * w[k * m + i];
                }
            }
        }

        for j in k + 1..n {
            if vn1[j] != 0.0 {
                let ratio = w[j * m + k].abs() / vn1[j];
                let temp = (1.0 - ratio * ratio).max(0.0);
                let temp2 = temp * (vn1[j] / vn2[j]).powi(2);
                if temp2 <= tol3z {
                    vn1[j] = col_norm(&w, j, k + 1);
                    vn2[j] = vn1[j];
                } else {
                    vn1[j] *= temp.sqrt();
                }
            }
        }
    }

    let r = DenseMatrix::from_fn(n, n, |i, j| if i <= j { w[j * m + i] } else { 0.0 });

    // Q = H₀ H₁ … H_{n−1} [I; 0], accumulated backwards.
    let mut qw = vec![0.0; m * n];
    for j in 0..n {
        qw[j * m + j] = 1.0;
    }
    for k in (0..n).rev() {
        if tau[k] == 0.0 {
            continue;
        }
        for j in k..n {
            let mut s = qw[j * m + k];
            for i in k + 1..m {
                s += w[k * m + i] * qw[j * m + i];
            }
            s *= tau[k];
            qw[j * m + k] -= s;
            for i in k + 1..m {
                qw[j * m + i] -= s * w[k * m + i];
            }
        }
    }
    let q = DenseMatrix::from_fn(m, n, |i, j| qw[j * m + i]);

    let r00 = r[(0, 0)].abs();
    let cutoff = m.max(n) as f64 * f64::EPSILON * r00;
    let numerical_rank = (0..n).filter(|&i| r[(i, i)].abs() > cutoff).count();
    Ok(QrcpFactors { q, r, perm, numerical_rank })
}

/// Solves `R[..k, ..k] x = b` in place.
pub(crate) fn solve_upper(r: &DenseMatrix, k: usize, b: &mut [f64]) -> Result<()> {
    for i in (0..k).rev() {
        let d = r[(i, i)];
        if d == 0.0 {
            return Err(Error::Singular);
        }
        let mut s = b[i];
        for j in i + 1..k {
            s -= r[(i, j)] * b[j];
        }
        b[i] = s / d;
    }
    Ok(())
}

/// Solves `R[..k, ..k]ᵀ x = b` in place.
pub(crate) fn solve_upper_transpose(r: &DenseMatrix, k: usize, b: &mut [f64]) -> Result<()> {
    for i in 0..k {
        let d = r[(i, i)];
        if d == 0.0 {
            return Err(Error::Singular);
        }
        let mut s = b[i];
        for j in 0..i {
            s -= r[(j, i)] * b[j];
        }
        b[i] = s / d;
    }
    Ok(())
}

/// Least-squares solution of `(A·T)·y ≈ rhs` using only the first `drop_to`
/// pivoted columns, returned as `x = T·y` in the original column order
/// (coefficients of dropped columns are zero).
pub fn solve_truncated(f: &QrcpFactors, t: &[f64], rhs: &[f64], drop_to: usize) -> Result<Vec<f64>> {
    let (m, n) = (f.rows(), f.cols());
    if rhs.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: rhs.len() });
    }
    if t.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: t.len() });
    }
    if drop_to > n {
        return Err(Error::DimensionMismatch { expected: n, got: drop_to });
    }
    let mut y: Vec<f64> = (0..drop_to)
        .map(|j| (0..m).map(|i| f.q[(i, j)] * rhs[i]).sum())
        .collect();
    solve_upper(&f.r, drop_to, &mut y)?;
    let mut x = vec![0.0; n];
    for (pos, &yi) in y.iter().enumerate() {
        let j = f.perm[pos];
        x[j] = t[j] * yi;
    }
    Ok(x)
}

/// Row functional `g` with `g · rhs = mono · x`, where `x` is the truncated
/// solution of [`solve_truncated`] with `drop_to = k`.
///
/// With `mono` the monomial values at a point this is the fitted polynomial's
/// value there as a linear function of the right-hand side.
pub fn evaluation_functional(f: &QrcpFactors, t: &[f64], k: usize, mono: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (f.rows(), f.cols());
    if mono.len() != n || t.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: mono.len().min(t.len()) });
    }
    if k > n {
        return Err(Error::DimensionMismatch { expected: n, got: k });
    }
    let mut z: Vec<f64> = (0..k).map(|pos| t[f.perm[pos]] * mono[f.perm[pos]]).collect();
    solve_upper_transpose(&f.r, k, &mut z)?;
    Ok((0..m)
        .map(|i| (0..k).map(|j| f.q[(i, j)] * z[j]).sum())
        .collect())
}
