//! Generators, co-Hamiltonian and almost co-Hamiltonian isotopies, and the
//! identities relating their velocities, generators and conformal factors.

pub mod derived;
pub mod generator;
pub mod invariants;
pub mod isotopy;
pub mod verify;

pub use derived::{
    compose_isotopies, conjugate_by_translation, conjugate_isotopy, inverse_isotopy,
    ComposedPath, ConjugatedIsotopy, Conjugator, InverseIsotopy,
};
pub use generator::{
    Amplitude, Generator, Normalization, ReebComponent, TermRecord, TimeFourier, TimeTerm,
};
pub use isotopy::{c_function, flow, CoIsotopy, Isotopy, Kind};
