//! Truncated tensor algebra up to level 3, signatures of piecewise-linear
//! paths, and p-variation / Hölder metrics for scalar rough lifts.

mod lift;
mod path;
mod pvar;
mod tensor;

pub use lift::{
    holder_rough_distance, level_for_hurst, rough_pvar_distance, ScalarRoughLift,
};
pub use path::{pwl_signature, pwl_signature_nodes, PiecewiseLinearPath};
pub use pvar::{p_variation_norm, p_variation_norm_nd, p_variation_of};
pub use tensor::{segment_signature, shuffle_residual, shuffles, tensor_multiply, TruncatedTensor};

/// Highest supported truncation level.
pub const MAX_LEVEL: usize = 3;
