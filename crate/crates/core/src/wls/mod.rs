//! Weighted least-squares fitting in local tangent frames: frames, stencils,
//! weights, and the per-target transfer rows built from them.

mod fit;
mod frame;
mod stencil;
mod weights;

pub use fit::{
    build_transfer_row, conditioned_fit, equilibrate, fit_stencil, monomials, transfer_row_from, vandermonde,
    TransferRow, WlsConfig, WlsFit,
};
pub use frame::{build_frame, LocalFrame};
pub use stencil::{
    build_stencil, local_edge_length, min_stencil_size, monomial_count, stencil_from_seeds, Purpose, Stencil,
};
pub use weights::{
    buhmann, default_sigma, eval_weight, eval_weights, wendland_c4, wu_c4, EnoContext, WeightKind, WeightScheme,
};
