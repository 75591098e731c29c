//! Flat models `T^{2n} × S¹` / `T^{2n} × R`, Fourier fields and forms.

pub mod forms;
pub mod fourier;
pub mod model;

pub use forms::{d, hodge_split, integrate, l2_norm_harmonic, OneFormField, OneFormRecord};
pub use fourier::{FourierScalar, FourierTerm, OscEnclosure, OscGrid};
pub use model::{
    pairing_i, pairing_i_inverse, wrap_signed, Coords, Covector, ModelSpec, Point, Tangent,
    ZTopology, MAX_DIM, MAX_HALF_DIM,
};
