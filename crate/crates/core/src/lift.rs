//! Lift of cosymplectic isotopies of `M` to the symplectic manifold `M × S¹`
//! with `ω̃ = p*ω + p*η ∧ dθ`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::verify::{sample_points, SPATIAL_STEP};
use crate::fields::{CoIsotopy, Isotopy, Kind};
use crate::manifold::{wrap_signed, ModelSpec, Point};
use crate::report::VerificationReport;

/// Nodes used for the rotation integral when `C` depends on `z`.
const MAX_ROTATION_NODES: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftedPoint {
    pub base: Point,
    pub theta: f64,
}

impl LiftedPoint {
    pub fn new(base: Point, theta: f64) -> Self {
        Self {
            base,
            theta: theta.rem_euclid(TAU) % TAU,
        }
    }

    /// Flat coordinates `(x, y, z, θ)`.
    pub fn coords(&self) -> Vec<f64> {
        let mut v = self.base.to_vec();
        v.push(self.theta);
        v
    }
}

/// `φ̃_t(x, θ) = (φ_t(x), θ − ∫_0^t C(Φ,η)^s∘φ_s(x) ds)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedIsotopy {
    base: CoIsotopy,
}

pub fn lift_isotopy(iso: &CoIsotopy) -> Result<LiftedIsotopy> {
    if !iso.model().is_circle() {
        return Err(Error::UnsupportedModel(
            "lift needs the circle z-topology".into(),
        ));
    }
    Ok(LiftedIsotopy { base: iso.clone() })
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, nodes: usize) -> f64 {
    let m = nodes.max(2) & !1;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

impl LiftedIsotopy {
    pub fn base(&self) -> &CoIsotopy {
        &self.base
    }

    pub fn model(&self) -> ModelSpec {
        self.base.model()
    }

    fn reeb_depends_on_z(&self) -> bool {
        self.base.reeb().is_some_and(|r| r.depends_on_z())
    }

    /// `∫_0^t C(Φ,η)^s(φ_s(x)) ds` with `C^s(y) = c(Z_s(y_z), s)`.
    pub fn rotation_integral(&self, x: &Point, t: f64) -> f64 {
        if self.base.reeb().is_none() || t == 0.0 {
            return 0.0;
        }
        let iso = &self.base;
        if !self.reeb_depends_on_z() {
            // spatially constant: the integrand is c(·, s) alone
            return simpson(|s| iso.reeb_velocity(0.0, s), 0.0, t, iso.steps());
        }
        let z = x[self.model().z_index()];
        let nodes = iso.steps().min(MAX_ROTATION_NODES);
        simpson(
            |s| iso.reeb_velocity(iso.z_map(iso.z_map(z, s), s), s),
            0.0,
            t,
            nodes,
        )
    }

    /// The same integral with the integrand `C^s(x)` (no extra `∘φ_s`).
    pub fn rotation_integral_uncomposed(&self, x: &Point, t: f64) -> f64 {
        if self.base.reeb().is_none() || t == 0.0 {
            return 0.0;
        }
        let iso = &self.base;
        let z = x[self.model().z_index()];
        let nodes = iso.steps().min(MAX_ROTATION_NODES);
        simpson(|s| iso.reeb_velocity(iso.z_map(z, s), s), 0.0, t, nodes)
    }

    /// Unreduced lifted map on flat coordinates `(x, y, z, θ)`.
    pub fn map_coords(&self, v: &[f64], t: f64) -> Vec<f64> {
        let dim = self.model().dim();
        let x = Point::from_slice(&v[..dim]);
        let mut out = self.base.map(&x, t).to_vec();
        out.push(v[dim] - self.rotation_integral(&x, t));
        out
    }

    pub fn map(&self, lp: &LiftedPoint, t: f64) -> LiftedPoint {
        let x = self.base.map(&lp.base, t);
        LiftedPoint::new(
            self.model().reduce(&x),
            lp.theta - self.rotation_integral(&lp.base, t),
        )
    }
}

/// `H̃_t(x, θ) = F_t(x) + η(φ̇_t)(x)·θ`.
pub fn lifted_hamiltonian(iso: &CoIsotopy, t: f64, lp: &LiftedPoint) -> Result<f64> {
    if iso.kind() != Kind::CoHamiltonian {
        return Err(Error::KindMismatch {
            expected: Kind::CoHamiltonian.to_string(),
            found: iso.kind().to_string(),
        });
    }
    let z = lp.base[iso.model().z_index()];
    Ok(iso.generator_value(&lp.base, t) + iso.reeb_velocity(z, t) * lp.theta)
}

/// `max |d(H̃_t∘S_l − H̃_t∘S_k)|(x)` with sections `S_l(x) = (x, l)`.
pub fn section_gap(iso: &CoIsotopy, t: f64, x: &Point, l: f64, k: f64) -> Result<f64> {
    let diff = |q: &Point| -> Result<f64> {
        Ok(lifted_hamiltonian(iso, t, &LiftedPoint { base: *q, theta: l })?
            - lifted_hamiltonian(iso, t, &LiftedPoint { base: *q, theta: k })?)
    };
    let mut worst = 0.0_f64;
    for d in 0..x.dim() {
        let mut a = *x;
        let mut b = *x;
        a[d] += SPATIAL_STEP;
        b[d] -= SPATIAL_STEP;
        worst = worst.max(((diff(&a)? - diff(&b)?) / (2.0 * SPATIAL_STEP)).abs());
    }
    Ok(worst)
}

/// Constant matrix of `ω̃` in coordinates `(x₁..xₙ, y₁..yₙ, z, θ)`.
pub fn lifted_form_matrix(model: &ModelSpec) -> DMatrix<f64> {
    let n = model.n;
    let dim = model.dim() + 1;
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..n {
        m[(i, n + i)] = 1.0;
        m[(n + i, i)] = -1.0;
    }
    m[(2 * n, 2 * n + 1)] = 1.0;
    m[(2 * n + 1, 2 * n)] = -1.0;
    m
}

fn lifted_jacobian(li: &LiftedIsotopy, v: &[f64], t: f64) -> DMatrix<f64> {
    let dim = v.len();
    let mut j = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut a = v.to_vec();
        let mut b = v.to_vec();
        a[c] += SPATIAL_STEP;
        b[c] -= SPATIAL_STEP;
        let (fa, fb) = (li.map_coords(&a, t), li.map_coords(&b, t));
        for r in 0..dim {
            j[(r, c)] = (fa[r] - fb[r]) / (2.0 * SPATIAL_STEP);
        }
    }
    j
}

/// `‖Jᵀ Ω̃ J − Ω̃‖_max` at `(v, t)`.
pub fn symplectic_residual(li: &LiftedIsotopy, v: &[f64], t: f64) -> f64 {
    let omega = lifted_form_matrix(&li.model());
    let j = lifted_jacobian(li, v, t);
    (j.transpose() * &omega * j - omega).amax()
}

/// Symplecticity, base projection and (co-Hamiltonian) θ-identity checks.
pub fn check_symplectic(
    li: &LiftedIsotopy,
    samples: usize,
    t_grid: &[f64],
    seed: u64,
) -> VerificationReport {
    let model = li.model();
    let pts = sample_points(&model, samples, seed);
    let mut r = VerificationReport::new("check_symplectic");
    let mut worst = 0.0_f64;
    let mut worst_proj = 0.0_f64;
    let mut worst_theta = 0.0_f64;
    let mut worst_gap = 0.0_f64;
    for (ti, &t) in t_grid.iter().enumerate() {
        let per: Vec<(f64, f64, f64, f64)> = pts
            .par_iter()
            .enumerate()
            .map(|(k, (p, _))| {
                let theta = TAU * k as f64 / samples.max(1) as f64;
                let mut v = p.to_vec();
                v.push(theta);
                let res = symplectic_residual(li, &v, t);
                let img = li.map_coords(&v, t);
                let proj = li.base().map(p, t).sub(&Point::from_slice(&img[..model.dim()])).max_abs();
                let dtheta = (img[model.dim()] - theta).abs();
                let gap = (li.rotation_integral(p, t) - li.rotation_integral_uncomposed(p, t)).abs();
                (res, proj, dtheta, gap)
            })
            .collect();
        let at_t = per.iter().fold(0.0_f64, |m, x| m.max(x.0));
        r.info(format!("residual_t{ti}"), at_t);
        worst = worst.max(at_t);
        for x in &per {
            worst_proj = worst_proj.max(x.1);
            worst_theta = worst_theta.max(x.2);
            worst_gap = worst_gap.max(x.3);
        }
    }
    r.check_le("max_symplectic_residual", worst, 1e-5, "finite-difference Jacobian")
        .check_le("base_projection", worst_proj, 0.0, "p∘φ̃_t = φ_t∘p")
        .info("samples", samples as f64)
        .info("rotation_form_gap", worst_gap);
    if li.base().kind() == Kind::CoHamiltonian {
        r.check_le("theta_identity", worst_theta, 1e-14, "C ≡ 0 on the circle");
    } else {
        r.info("max_theta_shift", worst_theta);
    }
    r
}

/// `(z, θ)` is fixed by `φ̃_1` for 16 values of `θ` whenever `z ∈ Fix(φ_1)`.
pub fn fixed_point_correspondence(
    li: &LiftedIsotopy,
    z: &Point,
    tol: f64,
) -> Result<VerificationReport> {
    let model = li.model();
    let base = model.distance(&li.base().map(z, 1.0), z);
    if base > 10.0 * tol {
        return Err(Error::NotAFixedPoint { displacement: base });
    }
    let mut worst = base;
    for k in 0..16 {
        let lp = LiftedPoint::new(*z, TAU * k as f64 / 16.0);
        let img = li.map(&lp, 1.0);
        worst = worst.max(wrap_signed(img.theta - lp.theta).abs());
        worst = worst.max(model.distance(&img.base, &model.reduce(z)));
    }
    let mut r = VerificationReport::new("fixed_point_correspondence");
    r.check_le("max_displacement", worst, tol, "lifted fixed point")
        .info("base_displacement", base)
        .info("rotation", li.rotation_integral(z, 1.0));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Generator, ReebComponent, TimeFourier};
    use crate::manifold::FourierScalar;

    fn cosymp(c0: f64) -> CoIsotopy {
        CoIsotopy::new(
            ModelSpec::circle(1),
            Kind::Cosymplectic,
            Generator::raw(TimeFourier::zero(3)),
            Some(ReebComponent::constant(c0)),
            None,
            64,
        )
        .unwrap()
    }

    #[test]
    fn constant_rotation() {
        let li = lift_isotopy(&cosymp(0.4)).unwrap();
        let p = Point::from_slice(&[0.1, 0.2, 0.3]);
        assert!((li.rotation_integral(&p, 0.5) - 0.2).abs() < 1e-14);
        let v = li.map_coords(&[0.1, 0.2, 0.3, 1.0], 1.0);
        assert!((v[3] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn identity_lift() {
        let li = lift_isotopy(&CoIsotopy::identity(ModelSpec::circle(1), 16)).unwrap();
        let lp = LiftedPoint::new(Point::from_slice(&[0.1, 0.2, 0.3]), 1.0);
        assert_eq!(li.map(&lp, 0.7), lp);
        assert!(symplectic_residual(&li, &lp.coords(), 0.5) <= 1e-10);
        assert!(lift_isotopy(&CoIsotopy::identity(ModelSpec::line(1), 16)).is_err());
    }

    #[test]
    fn symplectic_co_ham_and_cosymplectic() {
        let f = FourierScalar::from_terms(
            3,
            [
                crate::manifold::FourierTerm { k: vec![1, 1, 0], a: 0.0, b: 0.5 },
                crate::manifold::FourierTerm { k: vec![1, -1, 0], a: 0.0, b: 0.5 },
            ],
        )
        .unwrap();
        let iso = CoIsotopy::autonomous(ModelSpec::circle(1), &f, 256).unwrap();
        let r = check_symplectic(&lift_isotopy(&iso).unwrap(), 4, &[0.3, 1.0], 5);
        assert!(r.pass, "{r:?}");
        let r = check_symplectic(&lift_isotopy(&cosymp(0.4)).unwrap(), 4, &[0.3, 1.0], 5);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn hamiltonian_and_sections() {
        let f = FourierScalar::single(3, &[0, 1, 0], 0.0, 1.0).unwrap();
        let iso = CoIsotopy::autonomous(ModelSpec::circle(1), &f, 16).unwrap();
        let lp = LiftedPoint::new(Point::from_slice(&[0.1, 0.2, 0.3]), 2.0);
        assert_eq!(lifted_hamiltonian(&iso, 0.5, &lp).unwrap(), 0.2f64.sin());
        assert_eq!(section_gap(&iso, 0.5, &lp.base, 0.0, 3.0).unwrap(), 0.0);
        assert!(lifted_hamiltonian(&cosymp(0.1), 0.5, &lp).is_err());
    }

    #[test]
    fn fixed_point_lifts() {
        let f = FourierScalar::from_terms(
            3,
            [
                crate::manifold::FourierTerm { k: vec![1, 0, 0], a: 0.1, b: 0.0 },
                crate::manifold::FourierTerm { k: vec![0, 1, 0], a: 0.1, b: 0.0 },
            ],
        )
        .unwrap();
        let iso = CoIsotopy::autonomous(ModelSpec::circle(1), &f, 64).unwrap();
        let li = lift_isotopy(&iso).unwrap();
        let r = fixed_point_correspondence(&li, &Point::from_slice(&[0.0, 0.0, 1.0]), 1e-8).unwrap();
        assert!(r.pass);
        assert!(matches!(
            fixed_point_correspondence(&li, &Point::from_slice(&[1.0, 0.5, 1.0]), 1e-8),
            Err(Error::NotAFixedPoint { .. })
        ));
    }
}
