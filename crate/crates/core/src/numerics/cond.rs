//! 1-norm condition estimation for upper-triangular matrices (Hager's
//! method with Higham's refinements).

use super::qrcp::{solve_upper, solve_upper_transpose};
use super::DenseMatrix;
use crate::error::{Error, Result};

const MAX_ITERS: usize = 5;

/// Exact 1-norm of the leading `k × k` block of an upper-triangular matrix.
pub fn norm1_upper(r: &DenseMatrix, k: usize) -> f64 {
    (0..k)
        .map(|j| (0..=j).map(|i| r[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Estimate of `‖R⁻¹‖₁` for the leading `k × k` block, using only solves
/// with `R` and `Rᵀ`. The estimate is a lower bound and usually exact.
pub fn inv_norm1_estimate(r: &DenseMatrix, k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    if (0..k).any(|i| r[(i, i)] == 0.0) {
        return Err(Error::Singular);
    }
    let alt: Vec<f64> = (0..k)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * (1.0 + i as f64 / (k.max(2) - 1) as f64)
        })
        .collect();
    let mut est = power_iteration(r, k, vec![1.0 / k as f64; k])?;
    if k == 1 {
        return Ok(est);
    }
    // A second start vector catches most of the cases where one iteration
    // stalls at a local maximum.
    let norm_alt = alt.iter().map(|x| x.abs()).sum::<f64>();
    est = est.max(power_iteration(r, k, alt.iter().map(|x| x / norm_alt).collect())?);
    // Higham's alternating-sign test vector guards against the rare cases
    // where the power iteration stalls far below the true norm.
    let mut y = alt;
    solve_upper(r, k, &mut y)?;
    Ok(est.max(2.0 * norm1(&y) / (3.0 * k as f64)))
}

fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Hager's iteration for `max ‖R⁻¹x‖₁` over `‖x‖₁ = 1`, from `x0`.
fn power_iteration(r: &DenseMatrix, k: usize, x0: Vec<f64>) -> Result<f64> {
    let sign = |v: &[f64]| -> Vec<f64> { v.iter().map(|&x| if x >= 0.0 { 1.0 } else { -1.0 }).collect() };
    let argmax_abs = |v: &[f64]| (0..v.len()).fold(0, |b, i| if v[i].abs() > v[b].abs() { i } else { b });
    let mut y = x0;
    solve_upper(r, k, &mut y)?;
    let mut est = norm1(&y);
    if k == 1 {
        return Ok(est);
    }
    let mut xi = sign(&y);
    let mut z = xi.clone();
    solve_upper_transpose(r, k, &mut z)?;
    let mut j = argmax_abs(&z);
    for _ in 0..MAX_ITERS {
        let mut y = vec![0.0; k];
        y[j] = 1.0;
        solve_upper(r, k, &mut y)?;
        let est_old = est;
        est = norm1(&y);
        let new_xi = sign(&y);
        if new_xi == xi || est <= est_old {
            est = est.max(est_old);
            break;
        }
        xi = new_xi;
        z.copy_from_slice(&xi);
        solve_upper_transpose(r, k, &mut z)?;
        let jlast = j;
        j = argmax_abs(&z);
        if z[jlast].abs() == z[j].abs() {
            break;
        }
    }
    Ok(est)
}

/// Estimated `κ₁(R) = ‖R‖₁·‖R⁻¹‖₁` of a square upper-triangular matrix.
/// A zero diagonal entry yields [`Error::Singular`].
pub fn cond_estimate_1norm(r: &DenseMatrix) -> Result<f64> {
    if r.rows() != r.cols() {
        return Err(Error::DimensionMismatch { expected: r.rows(), got: r.cols() });
    }
    cond_estimate_leading(r, r.rows())
}

/// Condition estimate of the leading `k × k` block.
pub(crate) fn cond_estimate_leading(r: &DenseMatrix, k: usize) -> Result<f64> {
    Ok(norm1_upper(r, k) * inv_norm1_estimate(r, k)?)
}
