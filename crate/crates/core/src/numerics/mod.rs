//! Dense rank-revealing factorization, condition estimation and sparse
//! row operators.

mod cond;
mod dense;
mod qrcp;
mod sparse;

pub use cond::{cond_estimate_1norm, inv_norm1_estimate, norm1_upper};
pub(crate) use cond::cond_estimate_leading;
pub use dense::DenseMatrix;
pub use qrcp::{evaluation_functional, qrcp, qrcp_with_leading, solve_truncated, QrcpFactors};
pub use sparse::SparseOperator;
