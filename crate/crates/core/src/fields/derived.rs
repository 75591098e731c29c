//! Inverse, product and conjugated paths built from other isotopies.
//!
//! Their generators are kept as evaluable compositions through the stored
//! flows rather than re-expanded in Fourier modes.

use std::sync::Arc;

use super::generator::ReebComponent;
use super::isotopy::{kind_mismatch, CoIsotopy, Isotopy, Kind};
use crate::error::{Error, Result};
use crate::manifold::{FourierScalar, ModelSpec, Point};

macro_rules! forward_isotopy {
    ($($ty:ty),*) => {$(
        impl<T: Isotopy + ?Sized> Isotopy for $ty {
            fn model(&self) -> ModelSpec { (**self).model() }
            fn kind(&self) -> Kind { (**self).kind() }
            fn steps(&self) -> usize { (**self).steps() }
            fn map(&self, p: &Point, t: f64) -> Point { (**self).map(p, t) }
            fn inverse_map(&self, q: &Point, t: f64) -> Point { (**self).inverse_map(q, t) }
            fn map_many(&self, p: &Point, ts: &[f64]) -> Vec<Point> { (**self).map_many(p, ts) }
            fn z_map(&self, z: f64, t: f64) -> f64 { (**self).z_map(z, t) }
            fn z_inverse_map(&self, z: f64, t: f64) -> f64 { (**self).z_inverse_map(z, t) }
            fn log_conformal(&self, z: f64, t: f64) -> f64 { (**self).log_conformal(z, t) }
            fn reeb_velocity(&self, z: f64, t: f64) -> f64 { (**self).reeb_velocity(z, t) }
            fn generator_value(&self, q: &Point, t: f64) -> f64 { (**self).generator_value(q, t) }
            fn generator_fourier(&self, t: f64) -> Option<FourierScalar> { (**self).generator_fourier(t) }
            fn osc_representative(&self, t: f64) -> Option<FourierScalar> { (**self).osc_representative(t) }
            fn breakpoints(&self) -> Vec<f64> { (**self).breakpoints() }
            fn reeb_is_uniform(&self) -> bool { (**self).reeb_is_uniform() }
        }
    )*};
}

forward_isotopy!(&T, Box<T>, Arc<T>);

/// `t ↦ φ_t^{-1}`, with claimed generator `−F_t∘φ_t`.
#[derive(Debug, Clone)]
pub struct InverseIsotopy<I> {
    base: I,
}

impl<I: Isotopy> InverseIsotopy<I> {
    pub fn new(base: I) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &I {
        &self.base
    }
}

/// The inverse path of a co-Hamiltonian isotopy.
pub fn inverse_isotopy<I: Isotopy>(iso: I) -> Result<InverseIsotopy<I>> {
    if iso.kind() != Kind::CoHamiltonian {
        return Err(kind_mismatch(Kind::CoHamiltonian, iso.kind()));
    }
    Ok(InverseIsotopy::new(iso))
}

impl<I: Isotopy> Isotopy for InverseIsotopy<I> {
    fn model(&self) -> ModelSpec {
        self.base.model()
    }

    fn kind(&self) -> Kind {
        self.base.kind()
    }

    fn steps(&self) -> usize {
        self.base.steps()
    }

    fn map(&self, p: &Point, t: f64) -> Point {
        self.base.inverse_map(p, t)
    }

    fn inverse_map(&self, q: &Point, t: f64) -> Point {
        self.base.map(q, t)
    }

    fn z_map(&self, z: f64, t: f64) -> f64 {
        self.base.z_inverse_map(z, t)
    }

    fn z_inverse_map(&self, z: f64, t: f64) -> f64 {
        self.base.z_map(z, t)
    }

    fn log_conformal(&self, z: f64, t: f64) -> f64 {
        -self.base.log_conformal(self.base.z_inverse_map(z, t), t)
    }

    fn reeb_velocity(&self, w: f64, t: f64) -> f64 {
        // ∂_t Z_t^{-1} = −c(Z_t w) / Z_t'(w) at the current position w
        -(-self.base.log_conformal(w, t)).exp() * self.base.reeb_velocity(self.base.z_map(w, t), t)
    }

    fn generator_value(&self, q: &Point, t: f64) -> f64 {
        -self.base.generator_value(&self.base.map(q, t), t)
    }

    /// `osc(−F_t∘φ_t) = osc(F_t)` because `φ_t` is a bijection.
    fn osc_representative(&self, t: f64) -> Option<FourierScalar> {
        self.base.osc_representative(t).map(|f| f.scale(-1.0))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.base.breakpoints()
    }

    fn reeb_is_uniform(&self) -> bool {
        self.base.reeb_is_uniform()
    }
}

/// `t ↦ φ_t∘ψ_t` (outer `a = Φ`, inner `b = Ψ`), claimed generator
/// `F_t + H_t∘φ_t^{-1}`.
#[derive(Debug, Clone)]
pub struct ComposedPath<A, B> {
    outer: A,
    inner: B,
}

impl<A: Isotopy, B: Isotopy> ComposedPath<A, B> {
    pub fn new(outer: A, inner: B) -> Result<Self> {
        if outer.model() != inner.model() {
            return Err(Error::ModelMismatch);
        }
        Ok(Self { outer, inner })
    }

    pub fn outer(&self) -> &A {
        &self.outer
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

/// Product of two co-Hamiltonian isotopies on the same model.
pub fn compose_isotopies<A: Isotopy, B: Isotopy>(a: A, b: B) -> Result<ComposedPath<A, B>> {
    for k in [a.kind(), b.kind()] {
        if k != Kind::CoHamiltonian {
            return Err(kind_mismatch(Kind::CoHamiltonian, k));
        }
    }
    ComposedPath::new(a, b)
}

impl<A: Isotopy, B: Isotopy> Isotopy for ComposedPath<A, B> {
    fn model(&self) -> ModelSpec {
        self.outer.model()
    }

    fn kind(&self) -> Kind {
        let (a, b) = (self.outer.kind(), self.inner.kind());
        if a == b {
            a
        } else if a == Kind::AlmostCoHamiltonian || b == Kind::AlmostCoHamiltonian {
            Kind::AlmostCoHamiltonian
        } else {
            Kind::Cosymplectic
        }
    }

    fn steps(&self) -> usize {
        self.outer.steps().max(self.inner.steps())
    }

    fn map(&self, p: &Point, t: f64) -> Point {
        self.outer.map(&self.inner.map(p, t), t)
    }

    fn map_many(&self, p: &Point, ts: &[f64]) -> Vec<Point> {
        self.inner
            .map_many(p, ts)
            .iter()
            .zip(ts)
            .map(|(q, t)| self.outer.map(q, *t))
            .collect()
    }

    fn inverse_map(&self, q: &Point, t: f64) -> Point {
        self.inner.inverse_map(&self.outer.inverse_map(q, t), t)
    }

    fn z_map(&self, z: f64, t: f64) -> f64 {
        self.outer.z_map(self.inner.z_map(z, t), t)
    }

    fn z_inverse_map(&self, z: f64, t: f64) -> f64 {
        self.inner.z_inverse_map(self.outer.z_inverse_map(z, t), t)
    }

    fn log_conformal(&self, z: f64, t: f64) -> f64 {
        self.outer.log_conformal(self.inner.z_map(z, t), t) + self.inner.log_conformal(z, t)
    }

    fn reeb_velocity(&self, w: f64, t: f64) -> f64 {
        // X^a(w) + (φ_t)_* X^b: the z-part is scaled by ∂_z Z^a_t
        let u = self.outer.z_inverse_map(w, t);
        self.outer.reeb_velocity(w, t)
            + self.outer.log_conformal(u, t).exp() * self.inner.reeb_velocity(u, t)
    }

    fn generator_value(&self, q: &Point, t: f64) -> f64 {
        self.outer.generator_value(q, t)
            + self.inner.generator_value(&self.outer.inverse_map(q, t), t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.outer.breakpoints();
        b.extend(self.inner.breakpoints());
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    fn reeb_is_uniform(&self) -> bool {
        self.outer.reeb_is_uniform() && self.inner.reeb_is_uniform()
    }
}

/// Cosymplectomorphisms used for conjugation: flat translations and time-1
/// maps of flows preserving `η` (so `ρ^*η = η`).
#[derive(Debug, Clone)]
pub enum Conjugator {
    Translation(Vec<f64>),
    Flow(Box<CoIsotopy>),
}

impl Conjugator {
    pub fn translation(s: &[f64]) -> Self {
        Conjugator::Translation(s.to_vec())
    }

    pub fn flow(iso: CoIsotopy) -> Result<Self> {
        match iso.kind() {
            Kind::CoHamiltonian | Kind::Cosymplectic => Ok(Conjugator::Flow(Box::new(iso))),
            k => Err(kind_mismatch(Kind::Cosymplectic, k)),
        }
    }

    pub fn apply(&self, p: &Point) -> Point {
        match self {
            Conjugator::Translation(s) => {
                let mut q = *p;
                for (i, v) in s.iter().enumerate() {
                    q[i] += v;
                }
                q
            }
            Conjugator::Flow(iso) => iso.map(p, 1.0),
        }
    }

    pub fn apply_inverse(&self, q: &Point) -> Point {
        match self {
            Conjugator::Translation(s) => {
                let mut p = *q;
                for (i, v) in s.iter().enumerate() {
                    p[i] -= v;
                }
                p
            }
            Conjugator::Flow(iso) => iso.inverse_map(q, 1.0),
        }
    }

    pub fn z_apply(&self, z: f64, zi: usize) -> f64 {
        match self {
            Conjugator::Translation(s) => z + s.get(zi).copied().unwrap_or(0.0),
            Conjugator::Flow(iso) => iso.z_map(z, 1.0),
        }
    }

    pub fn z_apply_inverse(&self, z: f64, zi: usize) -> f64 {
        match self {
            Conjugator::Translation(s) => z - s.get(zi).copied().unwrap_or(0.0),
            Conjugator::Flow(iso) => iso.z_inverse_map(z, 1.0),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Conjugator::Translation(s) => s.iter().all(|v| *v == 0.0),
            Conjugator::Flow(iso) => {
                iso.generator().fourier().is_zero() && iso.reeb().is_none() && iso.harmonic().is_none()
            }
        }
    }
}

/// `t ↦ ρ^{-1}∘φ_t∘ρ`, claimed generator `F_t∘ρ`.
#[derive(Debug, Clone)]
pub struct ConjugatedIsotopy<I> {
    base: I,
    rho: Conjugator,
}

impl<I: Isotopy> ConjugatedIsotopy<I> {
    pub fn new(base: I, rho: Conjugator) -> Result<Self> {
        if let Conjugator::Translation(s) = &rho {
            if s.len() != base.model().dim() {
                return Err(Error::InvalidDimension("translation length".into()));
            }
        }
        if let Conjugator::Flow(f) = &rho {
            if f.model() != base.model() {
                return Err(Error::ModelMismatch);
            }
        }
        Ok(Self { base, rho })
    }

    pub fn conjugator(&self) -> &Conjugator {
        &self.rho
    }

    pub fn base(&self) -> &I {
        &self.base
    }
}

pub fn conjugate_isotopy<I: Isotopy>(iso: I, rho: Conjugator) -> Result<ConjugatedIsotopy<I>> {
    ConjugatedIsotopy::new(iso, rho)
}

/// Conjugation by the translation `θ ↦ θ + s`, with the generator re-expanded
/// exactly (`F_t(θ + s)` is again a Fourier series).
pub fn conjugate_by_translation(iso: &CoIsotopy, s: &[f64]) -> Result<CoIsotopy> {
    let model = iso.model();
    if s.len() != model.dim() {
        return Err(Error::InvalidDimension("translation length".into()));
    }
    let g = iso.generator();
    let f = g.fourier().translate(s);
    let generator = super::generator::Generator::new(f, g.normalization())?;
    let zi = model.z_index();
    let reeb = iso
        .reeb()
        .map(|r| ReebComponent::new(r.series().translate(&[s[zi]])))
        .transpose()?;
    let mut out = CoIsotopy::new(
        model,
        iso.kind(),
        generator,
        reeb,
        iso.harmonic().map(|h| h.to_vec()),
        iso.steps(),
    )?;
    for w in iso.warps() {
        out = out.warped(w.clone())?;
    }
    Ok(out)
}

impl<I: Isotopy> Isotopy for ConjugatedIsotopy<I> {
    fn model(&self) -> ModelSpec {
        self.base.model()
    }

    fn kind(&self) -> Kind {
        self.base.kind()
    }

    fn steps(&self) -> usize {
        self.base.steps()
    }

    fn map(&self, p: &Point, t: f64) -> Point {
        self.rho
            .apply_inverse(&self.base.map(&self.rho.apply(p), t))
    }

    fn map_many(&self, p: &Point, ts: &[f64]) -> Vec<Point> {
        self.base
            .map_many(&self.rho.apply(p), ts)
            .iter()
            .map(|q| self.rho.apply_inverse(q))
            .collect()
    }

    fn inverse_map(&self, q: &Point, t: f64) -> Point {
        self.rho
            .apply_inverse(&self.base.inverse_map(&self.rho.apply(q), t))
    }

    fn z_map(&self, z: f64, t: f64) -> f64 {
        let zi = self.model().z_index();
        self.rho
            .z_apply_inverse(self.base.z_map(self.rho.z_apply(z, zi), t), zi)
    }

    fn z_inverse_map(&self, z: f64, t: f64) -> f64 {
        let zi = self.model().z_index();
        self.rho
            .z_apply_inverse(self.base.z_inverse_map(self.rho.z_apply(z, zi), t), zi)
    }

    fn log_conformal(&self, z: f64, t: f64) -> f64 {
        // ρ preserves η, so only the middle factor contributes
        let zi = self.model().z_index();
        self.base.log_conformal(self.rho.z_apply(z, zi), t)
    }

    fn reeb_velocity(&self, w: f64, t: f64) -> f64 {
        let zi = self.model().z_index();
        self.base.reeb_velocity(self.rho.z_apply(w, zi), t)
    }

    fn generator_value(&self, q: &Point, t: f64) -> f64 {
        self.base.generator_value(&self.rho.apply(q), t)
    }

    fn generator_fourier(&self, t: f64) -> Option<FourierScalar> {
        match &self.rho {
            Conjugator::Translation(s) => self.base.generator_fourier(t).map(|f| f.translate(s)),
            Conjugator::Flow(_) => None,
        }
    }

    /// `osc(F_t∘ρ) = osc(F_t)`.
    fn osc_representative(&self, t: f64) -> Option<FourierScalar> {
        self.generator_fourier(t)
            .or_else(|| self.base.osc_representative(t))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.base.breakpoints()
    }

    fn reeb_is_uniform(&self) -> bool {
        self.base.reeb_is_uniform()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Coords;
    use std::f64::consts::PI;

    fn sin_y() -> CoIsotopy {
        let f = FourierScalar::single(3, &[0, 1, 0], 0.0, 1.0).unwrap();
        CoIsotopy::autonomous(ModelSpec::circle(1), &f, 1024).unwrap()
    }

    #[test]
    fn inverse_generator_of_shear() {
        let inv = inverse_isotopy(sin_y()).unwrap();
        let q = Coords::from_slice(&[1.0, 0.4, 0.0]);
        assert!((inv.generator_value(&q, 0.6) + 0.4f64.sin()).abs() < 1e-15);
        let p = inv.map(&q, 0.5);
        assert!((p[0] - (1.0 - 0.5 * 0.4f64.cos())).abs() < 1e-13);
    }

    #[test]
    fn doubled_shear() {
        let c = compose_isotopies(sin_y(), sin_y()).unwrap();
        let p = Coords::from_slice(&[0.2, 0.9, 0.0]);
        let q = c.map(&p, 0.75);
        assert!((q[0] - (0.2 + 1.5 * 0.9f64.cos())).abs() < 1e-13);
        assert!((c.generator_value(&q, 0.75) - 2.0 * 0.9f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn compose_requires_same_model() {
        let other = CoIsotopy::identity(ModelSpec::circle(2), 8);
        assert_eq!(
            ComposedPath::new(sin_y(), other).unwrap_err(),
            Error::ModelMismatch
        );
    }

    #[test]
    fn translation_conjugation_flips_sine() {
        let f = FourierScalar::single(3, &[1, 0, 0], 0.0, 1.0).unwrap();
        let iso = CoIsotopy::autonomous(ModelSpec::circle(1), &f, 256).unwrap();
        let c = conjugate_by_translation(&iso, &[PI, 0.0, 0.0]).unwrap();
        let g = c.generator_fourier(0.0).unwrap();
        let p = [0.3, 0.0, 0.0];
        assert!((g.eval(&p) + 0.3f64.sin()).abs() < 1e-15);
        let path = conjugate_isotopy(&iso, Conjugator::translation(&[PI, 0.0, 0.0])).unwrap();
        let x = Coords::from_slice(&[0.3, 1.2, 0.5]);
        let a = path.map(&x, 0.8);
        let b = c.map(&x, 0.8);
        assert!(ModelSpec::circle(1).distance(&a, &b) < 1e-12);
    }

    #[test]
    fn inverse_requires_co_hamiltonian() {
        let iso = CoIsotopy::almost(
            ModelSpec::circle(1),
            super::super::generator::TimeFourier::zero(3),
            ReebComponent::constant(0.2),
            16,
        )
        .unwrap();
        assert!(matches!(
            inverse_isotopy(iso),
            Err(Error::KindMismatch { .. })
        ));
    }
}
