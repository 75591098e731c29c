//! Time reparameterizations, boundary flattening and the reparameterization bounds.

pub mod bounds;
pub mod construct;
pub mod curve;
pub mod lipschitz;
pub mod ops;

pub use bounds::{verify_rl2, verify_rl3, TranslationPair};
pub use construct::{boundary_flatten, kind_distance, max_mean, normalized_flatten, FlattenOptions};
pub use curve::{smooth_step, smooth_step_integral, CurveRecord, ReparamCurve};
pub use lipschitz::{
    assemble_constant, flow_lipschitz, lipschitz_constants, LipschitzData, LipschitzOptions,
};
pub use ops::{
    boundary_residual, c0_diff, flatten_curve, ham_norm, ham_norm_diff, is_boundary_flat,
    plateau_delta, reparametrize,
};
