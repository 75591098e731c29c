//! Isotopies of the flat model and their RK4 flows.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::generator::{poly_eval, Generator, ReebComponent, TimeFourier};
use crate::error::{Error, Result};
use crate::manifold::{FourierScalar, ModelSpec, Point, Tangent, MAX_DIM};
use crate::reparam::ReparamCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    CoHamiltonian,
    AlmostCoHamiltonian,
    Cosymplectic,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::CoHamiltonian => "co-Hamiltonian",
            Kind::AlmostCoHamiltonian => "almost co-Hamiltonian",
            Kind::Cosymplectic => "cosymplectic",
        })
    }
}

pub(crate) fn kind_mismatch(expected: Kind, found: Kind) -> Error {
    Error::KindMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

/// A path `t ↦ φ_t` of diffeomorphisms of a flat model, starting at the
/// identity. All maps in this crate preserve the splitting `(x,y) | z`: the
/// `z`-part `Z_t` depends on `z` alone, so the Reeb data are functions of `z`.
pub trait Isotopy: Send + Sync {
    fn model(&self) -> ModelSpec;
    fn kind(&self) -> Kind;
    /// Flow resolution (fixed RK4 steps on `[0,1]`).
    fn steps(&self) -> usize;
    /// `φ_t(p)` in unwrapped coordinates.
    fn map(&self, p: &Point, t: f64) -> Point;
    fn inverse_map(&self, q: &Point, t: f64) -> Point;
    /// `φ_t(p)` at several (nearby) times; implementations may share the
    /// integration prefix, with results identical to repeated `map` calls.
    fn map_many(&self, p: &Point, ts: &[f64]) -> Vec<Point> {
        ts.iter().map(|t| self.map(p, *t)).collect()
    }
    /// `Z_t(z)`.
    fn z_map(&self, z: f64, t: f64) -> f64;
    fn z_inverse_map(&self, z: f64, t: f64) -> f64;
    /// `f_t = ln ∂_z Z_t`, so that `φ_t^*η = e^{f_t} η`.
    fn log_conformal(&self, z: f64, t: f64) -> f64;
    /// `η(φ̇_t)` at a point with coordinate `z` (velocity field, not pulled back).
    fn reeb_velocity(&self, z: f64, t: f64) -> f64;
    /// The (claimed) generating function at `(q, t)`.
    fn generator_value(&self, q: &Point, t: f64) -> f64;
    /// Spectral form of the generator, when available.
    fn generator_fourier(&self, _t: f64) -> Option<FourierScalar> {
        None
    }
    /// A Fourier scalar with the same oscillation as the generator at `t`.
    fn osc_representative(&self, t: f64) -> Option<FourierScalar> {
        self.generator_fourier(t)
    }
    /// Times in `(0,1)` where the generator is only piecewise smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
    /// `η(φ̇_t)` is constant in space for every `t`.
    fn reeb_is_uniform(&self) -> bool {
        false
    }
}

/// `C(Φ,η)^t(p) = η(φ̇_t)(φ_t(p))`.
pub fn c_function(iso: &dyn Isotopy, t: f64, p: &Point) -> f64 {
    let z = p[iso.model().z_index()];
    iso.reeb_velocity(iso.z_map(z, t), t)
}

/// `φ_t(p)` reduced to the fundamental domain.
pub fn flow(iso: &dyn Isotopy, p: &Point, t: f64) -> Point {
    iso.model().reduce(&iso.map(p, t))
}

/// Step schedule on `[0, τ]`: `m` full steps of `1/N`, then a partial step `r`.
fn schedule(tau: f64, n: usize) -> (usize, f64) {
    let x = tau * n as f64;
    let nearest = x.round();
    let m = if (x - nearest).abs() < 1e-9 { nearest } else { x.floor() };
    let m = m.max(0.0) as usize;
    (m, tau - m as f64 / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoIsotopy {
    model: ModelSpec,
    kind: Kind,
    generator: Generator,
    reeb: Option<ReebComponent>,
    /// Constant-in-space harmonic part `Σ p_i dx_i + q_i dy_i` of `ι(X)ω`,
    /// polynomial in `t`; cosymplectic kind only.
    harmonic: Option<Vec<Vec<f64>>>,
    steps: usize,
    /// Applied innermost-last: effective time is `w₀(w₁(…(t)))`.
    warps: Vec<ReparamCurve>,
}

type Xy = [f64; MAX_DIM];

impl CoIsotopy {
    pub fn new(
        model: ModelSpec,
        kind: Kind,
        generator: Generator,
        reeb: Option<ReebComponent>,
        harmonic: Option<Vec<Vec<f64>>>,
        steps: usize,
    ) -> Result<Self> {
        model.validate()?;
        if generator.dim() != model.dim() {
            return Err(Error::InvalidDimension(format!(
                "generator lives in dimension {}, model has {}",
                generator.dim(),
                model.dim()
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidArgument("steps must be positive".into()));
        }
        if generator.fourier().depends_on(model.z_index()) {
            return Err(Error::InvalidGenerator(format!(
                "z-dependence forbidden for {kind} kind"
            )));
        }
        let reeb = reeb.filter(|r| !r.is_zero());
        let z_dependent_reeb = reeb.as_ref().is_some_and(|r| r.depends_on_z());
        match kind {
            Kind::CoHamiltonian => {
                if model.is_circle() && reeb.is_some() {
                    return Err(Error::InvalidGenerator(
                        "co-Hamiltonian kind on a circle admits no Reeb component".into(),
                    ));
                }
                if z_dependent_reeb {
                    return Err(Error::InvalidGenerator(
                        "co-Hamiltonian Reeb component must be constant in space".into(),
                    ));
                }
            }
            Kind::Cosymplectic => {
                if z_dependent_reeb {
                    return Err(Error::InvalidGenerator(
                        "cosymplectic Reeb component must be constant in space".into(),
                    ));
                }
            }
            Kind::AlmostCoHamiltonian => {}
        }
        let harmonic = harmonic.filter(|h| h.iter().any(|p| p.iter().any(|v| *v != 0.0)));
        if let Some(h) = &harmonic {
            if kind != Kind::Cosymplectic {
                return Err(Error::InvalidGenerator(format!(
                    "harmonic part is not allowed for {kind} kind"
                )));
            }
            if h.len() != 2 * model.n {
                return Err(Error::InvalidDimension(format!(
                    "harmonic part needs {} coefficients",
                    2 * model.n
                )));
            }
        }
        Ok(Self {
            model,
            kind,
            generator,
            reeb,
            harmonic,
            steps,
            warps: Vec::new(),
        })
    }

    pub fn co_hamiltonian(model: ModelSpec, f: TimeFourier, steps: usize) -> Result<Self> {
        Self::new(model, Kind::CoHamiltonian, Generator::raw(f), None, None, steps)
    }

    pub fn autonomous(model: ModelSpec, f: &FourierScalar, steps: usize) -> Result<Self> {
        Self::co_hamiltonian(model, TimeFourier::autonomous(f), steps)
    }

    pub fn identity(model: ModelSpec, steps: usize) -> Self {
        Self::co_hamiltonian(model, TimeFourier::zero(model.dim()), steps)
            .expect("zero generator is valid")
    }

    pub fn almost(
        model: ModelSpec,
        f: TimeFourier,
        reeb: ReebComponent,
        steps: usize,
    ) -> Result<Self> {
        Self::new(
            model,
            Kind::AlmostCoHamiltonian,
            Generator::raw(f),
            Some(reeb),
            None,
            steps,
        )
    }

    pub fn with_steps(&self, steps: usize) -> Self {
        Self {
            steps: steps.max(1),
            ..self.clone()
        }
    }

    /// Same flow, kind relabelled (validated).
    pub fn relabel(&self, kind: Kind) -> Result<Self> {
        let mut out = Self::new(
            self.model,
            kind,
            self.generator.clone(),
            self.reeb.clone(),
            self.harmonic.clone(),
            self.steps,
        )?;
        out.warps = self.warps.clone();
        Ok(out)
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn reeb(&self) -> Option<&ReebComponent> {
        self.reeb.as_ref()
    }

    pub fn harmonic(&self) -> Option<&[Vec<f64>]> {
        self.harmonic.as_deref()
    }

    pub fn warps(&self) -> &[ReparamCurve] {
        &self.warps
    }

    pub fn is_autonomous(&self) -> bool {
        self.warps.is_empty()
            && self.generator.fourier().is_autonomous()
            && self.reeb.as_ref().is_none_or(|r| r.series().is_autonomous())
            && self
                .harmonic
                .as_ref()
                .is_none_or(|h| h.iter().all(|p| p.len() <= 1))
    }

    /// `Φ^ζ: t ↦ φ_{ζ(t)}`.
    pub fn warped(&self, zeta: ReparamCurve) -> Result<Self> {
        zeta.check_range()?;
        let mut out = self.clone();
        if !zeta.is_identity() {
            out.warps.push(zeta);
        }
        Ok(out)
    }

    /// Effective time `τ(t)` and `τ̇(t)` through the warp chain.
    pub fn warp_time(&self, t: f64) -> (f64, f64) {
        let mut tau = t;
        let mut rate = 1.0;
        for w in self.warps.iter().rev() {
            rate *= w.deriv(tau);
            tau = w.value(tau);
        }
        (tau, rate)
    }

    /// The isotopy without its warps.
    pub fn base(&self) -> Self {
        Self {
            warps: Vec::new(),
            ..self.clone()
        }
    }

    fn harmonic_at(&self, t: f64, out: &mut [f64]) {
        if let Some(h) = &self.harmonic {
            for (o, p) in out.iter_mut().zip(h) {
                *o = poly_eval(p, t);
            }
        }
    }

    /// Unwarped symplectic-part velocity at base time `t`.
    fn xy_rhs(&self, s: &Xy, t: f64, out: &mut Xy) {
        let n = self.model.n;
        let mut grad = [0.0; MAX_DIM];
        self.generator.fourier().eval_grad(t, s, &mut grad);
        let mut h = [0.0; 2 * crate::manifold::MAX_HALF_DIM];
        self.harmonic_at(t, &mut h);
        for i in 0..n {
            out[i] = grad[n + i] + h[n + i];
            out[n + i] = -grad[i] - h[i];
        }
    }

    fn xy_step(&self, s: &mut Xy, t: f64, h: f64) {
        let d = 2 * self.model.n;
        let mut k1 = [0.0; MAX_DIM];
        let mut k2 = [0.0; MAX_DIM];
        let mut k3 = [0.0; MAX_DIM];
        let mut k4 = [0.0; MAX_DIM];
        let mut tmp = *s;
        self.xy_rhs(s, t, &mut k1);
        for i in 0..d {
            tmp[i] = s[i] + 0.5 * h * k1[i];
        }
        self.xy_rhs(&tmp, t + 0.5 * h, &mut k2);
        for i in 0..d {
            tmp[i] = s[i] + 0.5 * h * k2[i];
        }
        self.xy_rhs(&tmp, t + 0.5 * h, &mut k3);
        for i in 0..d {
            tmp[i] = s[i] + h * k3[i];
        }
        self.xy_rhs(&tmp, t + h, &mut k4);
        for i in 0..d {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    /// `(ż, ḟ) = (c, ∂c/∂z)`.
    fn z_rhs(reeb: &ReebComponent, z: f64, t: f64) -> (f64, f64) {
        reeb.value_and_slope(z, t)
    }

    fn z_step(reeb: &ReebComponent, s: &mut (f64, f64), t: f64, h: f64) {
        let k1 = Self::z_rhs(reeb, s.0, t);
        let k2 = Self::z_rhs(reeb, s.0 + 0.5 * h * k1.0, t + 0.5 * h);
        let k3 = Self::z_rhs(reeb, s.0 + 0.5 * h * k2.0, t + 0.5 * h);
        let k4 = Self::z_rhs(reeb, s.0 + h * k3.0, t + h);
        s.0 += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        s.1 += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }

    fn has_xy_motion(&self) -> bool {
        !self.generator.fourier().is_zero() || self.harmonic.is_some()
    }

    fn xy_flow(&self, s: &mut Xy, tau: f64, inverse: bool) {
        if !self.has_xy_motion() || tau == 0.0 {
            return;
        }
        let n = self.steps;
        let h = 1.0 / n as f64;
        let (m, r) = schedule(tau, n);
        if inverse {
            if r != 0.0 {
                self.xy_step(s, tau, -r);
            }
            for i in (0..m).rev() {
                self.xy_step(s, (i + 1) as f64 * h, -h);
            }
        } else {
            for i in 0..m {
                self.xy_step(s, i as f64 * h, h);
            }
            if r != 0.0 {
                self.xy_step(s, m as f64 * h, r);
            }
        }
    }

    /// `(Z_τ(z), f_τ(z))` at base time `τ`, or the inverse pair
    /// `(Z_τ^{-1}(z), −f_τ(Z_τ^{-1}(z)))`.
    fn z_flow(&self, z: f64, tau: f64, inverse: bool) -> (f64, f64) {
        let Some(reeb) = &self.reeb else {
            return (z, 0.0);
        };
        if tau == 0.0 {
            return (z, 0.0);
        }
        let n = self.steps;
        let h = 1.0 / n as f64;
        let (m, r) = schedule(tau, n);
        let mut s = (z, 0.0);
        if inverse {
            if r != 0.0 {
                Self::z_step(reeb, &mut s, tau, -r);
            }
            for i in (0..m).rev() {
                Self::z_step(reeb, &mut s, (i + 1) as f64 * h, -h);
            }
        } else {
            for i in 0..m {
                Self::z_step(reeb, &mut s, i as f64 * h, h);
            }
            if r != 0.0 {
                Self::z_step(reeb, &mut s, m as f64 * h, r);
            }
        }
        s
    }

    fn base_map(&self, p: &Point, tau: f64, inverse: bool) -> Point {
        let dim = self.model.dim();
        let zi = self.model.z_index();
        let mut s: Xy = [0.0; MAX_DIM];
        s[..dim].copy_from_slice(p.as_slice());
        s[zi] = 0.0;
        self.xy_flow(&mut s, tau, inverse);
        let mut out = *p;
        out.as_mut_slice()[..zi].copy_from_slice(&s[..zi]);
        out[zi] = self.z_flow(p[zi], tau, inverse).0;
        out
    }

    /// `base_map(p, τ, false)` for every `τ`, sharing the common full steps.
    fn base_map_many(&self, p: &Point, taus: &[f64]) -> Vec<Point> {
        let dim = self.model.dim();
        let zi = self.model.z_index();
        let mut s0: Xy = [0.0; MAX_DIM];
        s0[..dim].copy_from_slice(p.as_slice());
        s0[zi] = 0.0;
        let moving = self.has_xy_motion();
        let n = self.steps;
        let h = 1.0 / n as f64;
        let plan: Vec<(usize, f64)> = taus.iter().map(|tau| schedule(*tau, n)).collect();
        let shared = if moving {
            plan.iter().map(|s| s.0).min().unwrap_or(0)
        } else {
            0
        };
        for i in 0..shared {
            self.xy_step(&mut s0, i as f64 * h, h);
        }
        taus.iter()
            .zip(&plan)
            .map(|(&tau, &(m, r))| {
                let mut s = s0;
                if moving && tau != 0.0 {
                    for i in shared..m {
                        self.xy_step(&mut s, i as f64 * h, h);
                    }
                    if r != 0.0 {
                        self.xy_step(&mut s, m as f64 * h, r);
                    }
                }
                let mut out = *p;
                out.as_mut_slice()[..zi].copy_from_slice(&s[..zi]);
                out[zi] = self.z_flow(p[zi], tau, false).0;
                out
            })
            .collect()
    }

    /// Exact velocity field `X_t(q)` (including warp rate).
    pub fn vector_field(&self, q: &Point, t: f64) -> Tangent {
        let (tau, rate) = self.warp_time(t);
        let mut s: Xy = [0.0; MAX_DIM];
        s[..q.dim()].copy_from_slice(q.as_slice());
        let mut v: Xy = [0.0; MAX_DIM];
        self.xy_rhs(&s, tau, &mut v);
        let zi = self.model.z_index();
        v[zi] = self.reeb.as_ref().map_or(0.0, |r| r.value(q[zi], tau));
        let mut out = Tangent::zeros(self.model.dim());
        for i in 0..self.model.dim() {
            out[i] = rate * v[i];
        }
        out
    }

    /// RK4 on the warped field itself (no change of variables); used to
    /// cross-check `φ^ζ_t = φ_{ζ(t)}`.
    pub fn flow_direct(&self, p: &Point, t: f64) -> Point {
        let n = self.steps;
        let (m, r) = schedule(t, n);
        let h = 1.0 / n as f64;
        let mut x = *p;
        let step = |x: &mut Point, t0: f64, h: f64| {
            let k1 = self.vector_field(x, t0);
            let k2 = self.vector_field(&x.add_scaled(&k1, 0.5 * h), t0 + 0.5 * h);
            let k3 = self.vector_field(&x.add_scaled(&k2, 0.5 * h), t0 + 0.5 * h);
            let k4 = self.vector_field(&x.add_scaled(&k3, h), t0 + h);
            for i in 0..x.dim() {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        };
        for i in 0..m {
            step(&mut x, i as f64 * h, h);
        }
        if r != 0.0 {
            step(&mut x, m as f64 * h, r);
        }
        x
    }

    /// `φ_{i/steps}(p)` for `i = 0..=steps`, stepped incrementally (not reduced).
    pub fn trajectory(&self, p: &Point) -> Vec<Point> {
        let n = self.steps;
        let h = 1.0 / n as f64;
        let mut out = Vec::with_capacity(n + 1);
        let mut x = *p;
        out.push(x);
        if !self.warps.is_empty() {
            for i in 0..n {
                let t0 = i as f64 * h;
                let k1 = self.vector_field(&x, t0);
                let k2 = self.vector_field(&x.add_scaled(&k1, 0.5 * h), t0 + 0.5 * h);
                let k3 = self.vector_field(&x.add_scaled(&k2, 0.5 * h), t0 + 0.5 * h);
                let k4 = self.vector_field(&x.add_scaled(&k3, h), t0 + h);
                for d in 0..x.dim() {
                    x[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
                }
                out.push(x);
            }
            return out;
        }
        // same steps as `map`, so trajectory points agree with it bit for bit
        let zi = self.model.z_index();
        let mut s: Xy = [0.0; MAX_DIM];
        s[..x.dim()].copy_from_slice(x.as_slice());
        s[zi] = 0.0;
        let mut zs = (p[zi], 0.0);
        let moves = self.has_xy_motion();
        for i in 0..n {
            let t0 = i as f64 * h;
            if moves {
                self.xy_step(&mut s, t0, h);
            }
            if let Some(r) = &self.reeb {
                Self::z_step(r, &mut zs, t0, h);
            }
            x.as_mut_slice()[..zi].copy_from_slice(&s[..zi]);
            x[zi] = zs.0;
            out.push(x);
        }
        out
    }

    /// `μ_t(z) = ∂c/∂z` of the velocity field.
    pub fn mu(&self, z: f64, t: f64) -> f64 {
        let (tau, rate) = self.warp_time(t);
        self.reeb
            .as_ref()
            .map_or(0.0, |r| rate * r.value_and_slope(z, tau).1)
    }

    /// Coefficient of `z` in the line-topology generator (`c₀(t)`), else 0.
    fn line_slope(&self, tau: f64) -> f64 {
        match (&self.reeb, self.kind, self.model.is_circle()) {
            (Some(r), Kind::CoHamiltonian, false) => r.value(0.0, tau),
            _ => 0.0,
        }
    }

    fn warp_breakpoints(&self) -> Vec<f64> {
        // pull each warp's breakpoints back through the warps applied before it
        let mut out = Vec::new();
        for (j, w) in self.warps.iter().enumerate() {
            let inner = &self.warps[j + 1..];
            for b in w.breakpoints() {
                if let Some(t) = pull_back(inner, b) {
                    out.push(t);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        out.retain(|t| *t > 0.0 && *t < 1.0);
        out
    }
}

/// Solves `w₀(w₁(…(t))) = target` by bisection over monotone warps.
fn pull_back(warps: &[ReparamCurve], target: f64) -> Option<f64> {
    let eval = |t: f64| warps.iter().rev().fold(t, |acc, w| w.value(acc));
    if warps.is_empty() {
        return Some(target);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    if !(eval(lo) <= target && target <= eval(hi)) {
        return None;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

impl Isotopy for CoIsotopy {
    fn model(&self) -> ModelSpec {
        self.model
    }

    fn kind(&self) -> Kind {
        self.kind
    }

    fn steps(&self) -> usize {
        self.steps
    }

    fn map(&self, p: &Point, t: f64) -> Point {
        self.base_map(p, self.warp_time(t).0, false)
    }

    fn inverse_map(&self, q: &Point, t: f64) -> Point {
        self.base_map(q, self.warp_time(t).0, true)
    }

    fn map_many(&self, p: &Point, ts: &[f64]) -> Vec<Point> {
        let taus: Vec<f64> = ts.iter().map(|t| self.warp_time(*t).0).collect();
        self.base_map_many(p, &taus)
    }

    fn z_map(&self, z: f64, t: f64) -> f64 {
        self.z_flow(z, self.warp_time(t).0, false).0
    }

    fn z_inverse_map(&self, z: f64, t: f64) -> f64 {
        self.z_flow(z, self.warp_time(t).0, true).0
    }

    fn log_conformal(&self, z: f64, t: f64) -> f64 {
        self.z_flow(z, self.warp_time(t).0, false).1
    }

    fn reeb_velocity(&self, z: f64, t: f64) -> f64 {
        let (tau, rate) = self.warp_time(t);
        self.reeb.as_ref().map_or(0.0, |r| rate * r.value(z, tau))
    }

    fn generator_value(&self, q: &Point, t: f64) -> f64 {
        let (tau, rate) = self.warp_time(t);
        let zi = self.model.z_index();
        rate * (self.generator.fourier().eval(tau, q.as_slice()) + self.line_slope(tau) * q[zi])
    }

    fn generator_fourier(&self, t: f64) -> Option<FourierScalar> {
        let (tau, rate) = self.warp_time(t);
        Some(self.generator.fourier().at(tau).scale(rate))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.warp_breakpoints()
    }

    fn reeb_is_uniform(&self) -> bool {
        self.reeb.as_ref().is_none_or(|r| !r.depends_on_z())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::generator::TimeTerm;
    use crate::manifold::Coords;

    fn sin_y(model: ModelSpec) -> CoIsotopy {
        let f = FourierScalar::single(model.dim(), &[0, 1, 0], 0.0, 1.0).unwrap();
        CoIsotopy::autonomous(model, &f, 1024).unwrap()
    }

    #[test]
    fn shear_flow_closed_form() {
        let iso = sin_y(ModelSpec::circle(1));
        let p = Coords::from_slice(&[0.3, 1.1, 2.0]);
        for t in [0.0, 0.25, 0.6180339887, 1.0] {
            let q = iso.map(&p, t);
            assert!((q[0] - (0.3 + t * 1.1f64.cos())).abs() < 1e-13);
            assert_eq!(q[1], 1.1);
            assert_eq!(q[2], 2.0);
        }
        let v = iso.vector_field(&p, 0.5);
        assert!((v[0] - 1.1f64.cos()).abs() < 1e-15 && v[1] == 0.0);
    }

    #[test]
    fn map_many_matches_map() {
        let m = ModelSpec::circle(1);
        let f = FourierScalar::single(3, &[1, 0, 0], 0.3, 0.7)
            .unwrap()
            .add(&FourierScalar::single(3, &[1, 1, 0], -0.2, 0.1).unwrap());
        let iso = CoIsotopy::almost(m, TimeFourier::modulated(&f, &[1.0, -0.5]), ReebComponent::constant(0.4), 64)
            .unwrap();
        let p = Coords::from_slice(&[0.3, 1.1, 2.0]);
        let ts = [0.0, 0.31, 0.3125, 0.33, 0.99, 1.0, -0.01];
        for (q, t) in iso.map_many(&p, &ts).iter().zip(ts) {
            assert_eq!(*q, iso.map(&p, t));
        }
    }

    #[test]
    fn sin_x_field() {
        let m = ModelSpec::circle(1);
        let f = FourierScalar::single(3, &[1, 0, 0], 0.0, 1.0).unwrap();
        let iso = CoIsotopy::autonomous(m, &f, 64).unwrap();
        let v = iso.vector_field(&Coords::from_slice(&[0.4, 0.0, 0.0]), 0.0);
        assert_eq!(v[0], 0.0);
        assert!((v[1] + 0.4f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn pure_reeb_translation() {
        let m = ModelSpec::circle(1);
        let iso = CoIsotopy::new(
            m,
            Kind::Cosymplectic,
            Generator::raw(TimeFourier::zero(3)),
            Some(ReebComponent::constant(1.0)),
            None,
            128,
        )
        .unwrap();
        let p = Coords::from_slice(&[0.1, 0.2, 0.3]);
        let q = iso.map(&p, 0.7);
        assert!((q[2] - 1.0).abs() < 1e-14);
        assert_eq!(iso.vector_field(&p, 0.1).as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn round_trip_inverse() {
        let m = ModelSpec::circle(1);
        let f = TimeFourier::from_terms(
            3,
            [
                TimeTerm { k: vec![1, 1, 0], a: vec![0.4, 0.3], b: vec![0.2] },
                TimeTerm { k: vec![0, 2, 0], a: vec![], b: vec![0.5, -0.5] },
                TimeTerm { k: vec![1, 0, 0], a: vec![0.7], b: vec![] },
            ],
        )
        .unwrap();
        let iso = CoIsotopy::co_hamiltonian(m, f, 1024).unwrap();
        let p = Coords::from_slice(&[0.9, 4.0, 1.0]);
        for t in [0.3, 0.77, 1.0] {
            let back = iso.inverse_map(&iso.map(&p, t), t);
            assert!(m.distance(&back, &p) < 1e-8, "t={t}");
        }
    }

    #[test]
    fn co_hamiltonian_circle_rejects_z() {
        let m = ModelSpec::circle(1);
        let f = TimeFourier::autonomous(&FourierScalar::single(3, &[0, 0, 1], 1.0, 0.0).unwrap());
        let e = CoIsotopy::co_hamiltonian(m, f, 8).unwrap_err();
        assert!(e.to_string().contains("z-dependence forbidden"));
        let r = CoIsotopy::new(
            m,
            Kind::CoHamiltonian,
            Generator::raw(TimeFourier::zero(3)),
            Some(ReebComponent::constant(0.3)),
            None,
            8,
        );
        assert!(r.is_err());
    }

    #[test]
    fn line_generator_includes_slope() {
        let m = ModelSpec::line(1);
        let g = TimeFourier::autonomous(&FourierScalar::single(3, &[0, 1, 0], 0.0, 1.0).unwrap());
        let iso = CoIsotopy::new(
            m,
            Kind::CoHamiltonian,
            Generator::raw(g),
            Some(ReebComponent::constant(0.3)),
            None,
            256,
        )
        .unwrap();
        let p = Coords::from_slice(&[0.0, 0.5, 2.0]);
        assert!((iso.generator_value(&p, 0.0) - (0.5f64.sin() + 0.6)).abs() < 1e-15);
        assert!((iso.map(&p, 1.0)[2] - 2.3).abs() < 1e-12);
    }

    #[test]
    fn warped_flow_matches_direct_integration() {
        let iso = sin_y(ModelSpec::circle(1));
        let w = iso.warped(ReparamCurve::polynomial(&[0.0, 0.0, 1.0])).unwrap();
        let p = Coords::from_slice(&[0.3, 1.1, 2.0]);
        let a = w.map(&p, 0.8);
        let b = w.flow_direct(&p, 0.8);
        assert!((a[0] - b[0]).abs() < 1e-12);
        assert!((a[0] - (0.3 + 0.64 * 1.1f64.cos())).abs() < 1e-13);
        // generator 2t·F
        assert!((w.generator_value(&p, 0.5) - 1.1f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn conformal_factor_of_cos_reeb() {
        let m = ModelSpec::circle(1);
        let c = ReebComponent::new(TimeFourier::autonomous(
            &FourierScalar::single(1, &[1], 0.5, 0.0).unwrap(),
        ))
        .unwrap();
        let iso = CoIsotopy::almost(m, TimeFourier::zero(3), c, 1024).unwrap();
        let z = 0.8;
        let t = 0.6;
        let h = 1e-5;
        let dz = (iso.z_map(z + h, t) - iso.z_map(z - h, t)) / (2.0 * h);
        assert!((dz.ln() - iso.log_conformal(z, t)).abs() < 1e-9);
        assert!((iso.z_inverse_map(iso.z_map(z, t), t) - z).abs() < 1e-12);
    }
}
