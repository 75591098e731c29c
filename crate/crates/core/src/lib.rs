//! Co-Hamiltonian geometry on flat cosymplectic models.

pub mod cli;
pub mod config;
pub mod error;
pub mod fields;
pub mod fixpoints;
pub mod lift;
pub mod linalg;
pub mod manifold;
pub mod norms;
pub mod random;
pub mod reparam;
pub mod report;
pub mod suites;

pub use error::{Error, Result};
pub use config::Tolerances;
pub use report::{Check, VerificationReport};

#[cfg(test)]
pub(crate) mod test_helpers {
    use crate::fields::CoIsotopy;
    use crate::manifold::{FourierScalar, ModelSpec};

    pub fn scaled_sin_y_iso(a: f64, steps: usize) -> CoIsotopy {
        let f = FourierScalar::single(3, &[0, 1, 0], 0.0, a).unwrap();
        CoIsotopy::autonomous(ModelSpec::circle(1), &f, steps).unwrap()
    }

    pub fn sin_y_iso(steps: usize) -> CoIsotopy {
        scaled_sin_y_iso(1.0, steps)
    }
}
