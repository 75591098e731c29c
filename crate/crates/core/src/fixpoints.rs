//! Fixed points of time-one maps, the Γ lower bound and winding at fixed points.
//!
//! Every flow here splits as `ψ(x,y,z) = (ψ_xy(x,y), Z(z))`, so the fixed set
//! is `Fix(ψ_xy) × Fix(Z)` and both factors are searched separately.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::isotopy::kind_mismatch;
use crate::fields::invariants::winding;
use crate::fields::{CoIsotopy, Isotopy, Kind};
use crate::manifold::{wrap_signed, ModelSpec, OneFormField, Point, ZTopology};
use crate::report::VerificationReport;

/// Largest xy grid scanned, as for the winding grids.
pub const MAX_SCAN_POINTS: usize = 1 << 14;
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixOptions {
    /// Points per coordinate (at least 16).
    pub grid_resolution: usize,
    pub newton_tol: f64,
    /// Seeds lie below `10×` this quantile of the grid displacement.
    pub seed_quantile: f64,
    pub max_iterations: usize,
    pub max_seeds: usize,
}

impl Default for FixOptions {
    fn default() -> Self {
        Self {
            grid_resolution: 16,
            newton_tol: 1e-10,
            seed_quantile: 0.05,
            max_iterations: 40,
            max_seeds: 2048,
        }
    }
}

impl FixOptions {
    pub fn merge_radius(&self) -> f64 {
        4.0 * self.newton_tol.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedComponent {
    pub representative: Point,
    pub cluster_size: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSet {
    pub components: Vec<FixedComponent>,
    pub grid_resolution: usize,
    pub newton_tol: f64,
    /// ψ is the identity on the whole scan grid.
    pub identity: bool,
}

impl FixedPointSet {
    pub fn count(&self) -> usize {
        self.components.len()
    }

    pub fn max_residual(&self) -> f64 {
        self.components.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("component,cluster_size,residual,representative\n");
        for (i, c) in self.components.iter().enumerate() {
            let rep: Vec<String> = c.representative.as_slice().iter().map(|v| format!("{v:.12}")).collect();
            s.push_str(&format!("{i},{},{:e},{}\n", c.cluster_size, c.residual, rep.join(" ")));
        }
        s
    }
}

/// One factor of the fixed set: clusters of converged points plus linkage.
struct Factor {
    /// (point, residual, cluster size)
    reps: Vec<(Vec<f64>, f64, usize)>,
    identity: bool,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// A map `R^d → R^d` whose fixed points are sought (all coordinates periodic
/// except possibly the z-coordinate on the line).
trait Residual: Sync {
    fn dim(&self) -> usize;
    fn periodic(&self) -> bool;
    fn image(&self, p: &[f64]) -> Vec<f64>;

    fn diff(&self, a: f64, b: f64) -> f64 {
        if self.periodic() {
            wrap_signed(a - b)
        } else {
            a - b
        }
    }

    fn residual(&self, p: &[f64]) -> Vec<f64> {
        self.image(p).iter().zip(p).map(|(q, x)| self.diff(*q, *x)).collect()
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(u, v)| self.diff(*u, *v).powi(2)).sum::<f64>().sqrt()
    }
}

struct XyPart<'a>(&'a CoIsotopy);

impl Residual for XyPart<'_> {
    fn dim(&self) -> usize {
        self.0.model().dim() - 1
    }
    fn periodic(&self) -> bool {
        true
    }
    fn image(&self, p: &[f64]) -> Vec<f64> {
        let mut full = p.to_vec();
        full.push(0.0);
        let q = self.0.map(&Point::from_slice(&full), 1.0);
        q.as_slice()[..p.len()].to_vec()
    }
}

struct ZPart<'a>(&'a CoIsotopy);

impl Residual for ZPart<'_> {
    fn dim(&self) -> usize {
        1
    }
    fn periodic(&self) -> bool {
        self.0.model().z_topology == ZTopology::Circle
    }
    fn image(&self, p: &[f64]) -> Vec<f64> {
        vec![self.0.z_map(p[0], 1.0)]
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton with a central-difference Jacobian and SVD pseudo-inverse (fixed sets
/// may be positive dimensional). Accepts only a converged point with a
/// quadratic tail: residual ratio ≤ 0.1 on the final step.
fn newton(f: &dyn Residual, seed: &[f64], tol: f64, max_iter: usize) -> Option<(Vec<f64>, f64)> {
    let d = f.dim();
    let mut p = seed.to_vec();
    let mut r = f.residual(&p);
    let mut res = norm(&r);
    if res <= tol {
        return Some((p, res));
    }
    for _ in 0..max_iter {
        let mut jac = DMatrix::<f64>::zeros(d, d);
        for j in 0..d {
            let mut a = p.clone();
            let mut b = p.clone();
            a[j] += FD_STEP;
            b[j] -= FD_STEP;
            let (ra, rb) = (f.residual(&a), f.residual(&b));
            for i in 0..d {
                jac[(i, j)] = f.diff(ra[i], rb[i]) / (2.0 * FD_STEP);
            }
        }
        let svd = jac.svd(true, true);
        let cutoff = 1e-8 * svd.singular_values.max().max(f64::MIN_POSITIVE);
        let step = svd.solve(&DVector::from_column_slice(&r), cutoff).ok()?;
        let mut next: Vec<f64> = p.iter().zip(step.iter()).map(|(x, s)| x - s).collect();
        let mut next_r = f.residual(&next);
        let mut next_res = norm(&next_r);
        // damped fallback
        let mut lambda = 1.0;
        while next_res > res && lambda > 1.0 / 64.0 {
            lambda *= 0.5;
            next = p.iter().zip(step.iter()).map(|(x, s)| x - lambda * s).collect();
            next_r = f.residual(&next);
            next_res = norm(&next_r);
        }
        if !next_res.is_finite() {
            return None;
        }
        let ratio = next_res / res;
        p = next;
        r = next_r;
        res = next_res;
        if res <= tol {
            return (ratio <= 0.1).then_some((p, res));
        }
        if ratio >= 1.0 {
            return None;
        }
    }
    None
}

fn grid_axis(res: usize) -> Vec<f64> {
    (0..res).map(|k| k as f64 * TAU / res as f64).collect()
}

fn grid(dim: usize, res: usize) -> Vec<Vec<f64>> {
    let axis = grid_axis(res);
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |a| {
                    let mut q = p.clone();
                    q.push(*a);
                    q
                })
            })
            .collect();
    }
    out
}

/// Resolution per axis so that `res^dim ≤ MAX_SCAN_POINTS` (never below 4).
fn scan_resolution(dim: usize, res: usize) -> usize {
    let mut r = res;
    while dim > 0 && r > 4 && r.pow(dim as u32) > MAX_SCAN_POINTS {
        r -= 1;
    }
    r
}

/// Non-strict minimum of the displacement over the axis neighbours.
fn is_local_min(disp: &[f64], i: usize, res: usize, dim: usize) -> bool {
    let mut stride = 1;
    for _ in 0..dim {
        let coord = (i / stride) % res;
        let up = i - coord * stride + ((coord + 1) % res) * stride;
        let down = i - coord * stride + ((coord + res - 1) % res) * stride;
        if disp[up] < disp[i] || disp[down] < disp[i] {
            return false;
        }
        stride *= res;
    }
    true
}

/// Two converged points lie on one component when Newton started at the
/// quarter points of the segment between them stays near the segment.
fn segment_is_fixed(f: &dyn Residual, a: &[f64], b: &[f64], dist: f64, opts: &FixOptions) -> bool {
    [0.25, 0.5, 0.75].iter().all(|s| {
        let q: Vec<f64> = a.iter().zip(b).map(|(u, v)| u + s * f.diff(*v, *u)).collect();
        newton(f, &q, opts.newton_tol, opts.max_iterations)
            .is_some_and(|(m, _)| f.distance(&m, &q) <= 0.2 * dist)
    })
}

fn solve_factor(f: &dyn Residual, res: usize, opts: &FixOptions) -> Factor {
    let pts = grid(f.dim(), res);
    let disp: Vec<f64> = pts.par_iter().map(|p| norm(&f.residual(p))).collect();
    if disp.iter().all(|d| *d <= opts.newton_tol) {
        return Factor {
            reps: vec![(pts[0].clone(), disp[0], pts.len())],
            identity: true,
        };
    }
    let mut sorted = disp.clone();
    sorted.sort_by(f64::total_cmp);
    let q_idx = ((opts.seed_quantile * sorted.len() as f64) as usize).min(sorted.len() - 1);
    let smallest_positive = sorted.iter().copied().find(|d| *d > 0.0).unwrap_or(0.0);
    let threshold = 10.0 * sorted[q_idx].max(smallest_positive);
    let mut seeds: Vec<(f64, &Vec<f64>)> = disp
        .iter()
        .zip(&pts)
        .enumerate()
        .filter(|(i, (d, _))| **d <= threshold && is_local_min(&disp, *i, res, f.dim()))
        .map(|(_, (d, p))| (*d, p))
        .collect();
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    seeds.truncate(opts.max_seeds);
    let mut found: Vec<(Vec<f64>, f64)> = seeds
        .par_iter()
        .filter_map(|(_, s)| newton(f, s, opts.newton_tol, opts.max_iterations))
        .collect();
    // deterministic order for the union-find pass
    found.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(u, v)| u.rem_euclid(TAU).total_cmp(&v.rem_euclid(TAU)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let n = found.len();
    let merge = opts.merge_radius();
    let h = TAU / res as f64;
    let link = 2.0 * h * (f.dim() as f64).sqrt();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = f.distance(&found[i].0, &found[j].0);
            if dist <= merge {
                uf.union(i, j);
            } else if dist <= link
                && uf.find(i) != uf.find(j)
                && segment_is_fixed(f, &found[i].0, &found[j].0, dist, opts)
            {
                uf.union(i, j);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = uf.find(i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    let reps = groups
        .into_iter()
        .map(|(_, g)| {
            let best = *g
                .iter()
                .min_by(|a, b| found[**a].1.total_cmp(&found[**b].1))
                .expect("non-empty group");
            (found[best].0.clone(), found[best].1, g.len())
        })
        .collect();
    Factor {
        reps,
        identity: false,
    }
}

/// Components of `Fix(ψ)`, `ψ` the time-one map. The z-factor is scanned on
/// `[0, 2π)` (a window on the line).
pub fn find_fixed_points(iso: &CoIsotopy, opts: &FixOptions) -> FixedPointSet {
    let model = iso.model();
    let res = opts.grid_resolution.max(16);
    let xy = XyPart(iso);
    let xy_factor = solve_factor(&xy, scan_resolution(xy.dim(), res), opts);
    let z_factor = solve_factor(&ZPart(iso), res, opts);
    let mut components = Vec::new();
    for (pxy, _, sxy) in &xy_factor.reps {
        for (pz, _, sz) in &z_factor.reps {
            let mut full = pxy.clone();
            full.push(pz[0]);
            let p = Point::from_slice(&full);
            let residual = model.distance(&iso.map(&p, 1.0), &p);
            components.push(FixedComponent {
                representative: p,
                cluster_size: sxy * sz,
                residual,
            });
        }
    }
    FixedPointSet {
        components,
        grid_resolution: res,
        newton_tol: opts.newton_tol,
        identity: xy_factor.identity && z_factor.identity,
    }
}

/// Which item of the Γ bracket applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaCase {
    /// `Ñ = N × S¹`: `1 ≤ Γ ≤ 2`.
    CircleFactor,
    /// Interval factor: `Γ = 1`.
    Interval,
    /// `𝕋^{2k}` factor: `1 ≤ Γ ≤ 2k + 1`.
    Torus { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaBound {
    pub lower: usize,
    pub upper: Option<usize>,
    pub case: GammaCase,
}

impl GammaBound {
    pub fn for_case(case: GammaCase) -> Self {
        let upper = match case {
            GammaCase::CircleFactor => 2,
            GammaCase::Interval => 1,
            GammaCase::Torus { k } => 2 * k + 1,
        };
        Self { lower: 1, upper: Some(upper), case }
    }
}

/// Only `Γ ≥ 1` is certified; the applicable upper bound is attached.
pub fn gamma_lower_bound(model: &ModelSpec) -> GammaBound {
    match model.z_topology {
        ZTopology::Circle => GammaBound::for_case(GammaCase::CircleFactor),
        ZTopology::Line => GammaBound::for_case(GammaCase::Interval),
    }
}

fn require_co_ham_circle(iso: &CoIsotopy) -> Result<()> {
    if iso.kind() != Kind::CoHamiltonian {
        return Err(kind_mismatch(Kind::CoHamiltonian, iso.kind()));
    }
    if !iso.model().is_circle() {
        return Err(Error::UnboundedDomain);
    }
    Ok(())
}

/// `#components(Fix ψ) ≥ Γ.lower`.
pub fn check_fix_lower_bound(iso: &CoIsotopy, opts: &FixOptions) -> Result<(FixedPointSet, VerificationReport)> {
    require_co_ham_circle(iso)?;
    let set = find_fixed_points(iso, opts);
    let gamma = gamma_lower_bound(&iso.model());
    let mut r = VerificationReport::new("fix_lower_bound");
    r.check_ge("components", set.count() as f64, gamma.lower as f64, "Γ lower bound")
        .check_le("max_residual", set.max_residual(), opts.newton_tol, "newton_tol")
        .info("gamma_lower", gamma.lower as f64);
    if let Some(u) = gamma.upper {
        r.info("gamma_upper", u as f64);
    }
    if set.identity {
        r.note("identity map: every point is fixed");
    }
    Ok((set, r))
}

/// `|Δ(Φ,α)(z)|` at every representative for `α ∈ {dx_i, dy_i, dz}`.
pub fn winding_at_fixed_points(iso: &CoIsotopy, set: &FixedPointSet, tol: f64) -> Result<VerificationReport> {
    let dim = iso.model().dim();
    let forms: Vec<OneFormField> = (0..dim).map(|d| OneFormField::basis(dim, d)).collect();
    let mut worst = 0.0_f64;
    for c in &set.components {
        for a in &forms {
            worst = worst.max(winding(iso, a, &c.representative)?.abs());
        }
    }
    let mut r = VerificationReport::new("winding_at_fixed_points");
    r.check_ge("components", set.count() as f64, 1.0, "fixed points found")
        .check_le("max_winding", worst, tol, "contractible orbits");
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ReebComponent, TimeFourier};
    use crate::manifold::FourierScalar;

    fn cos_cos() -> CoIsotopy {
        let f = FourierScalar::single(3, &[1, 0, 0], 0.1, 0.0)
            .unwrap()
            .add(&FourierScalar::single(3, &[0, 1, 0], 0.1, 0.0).unwrap());
        CoIsotopy::autonomous(ModelSpec::circle(1), &f, 64).unwrap()
    }

    #[test]
    fn four_critical_circles() {
        let iso = cos_cos();
        let set = find_fixed_points(&iso, &FixOptions::default());
        assert_eq!(set.count(), 4, "{set:?}");
        assert!(set.max_residual() <= 1e-10);
        let (_, r) = check_fix_lower_bound(&iso, &FixOptions::default()).unwrap();
        assert!(r.pass);
        let w = winding_at_fixed_points(&iso, &set, 1e-6).unwrap();
        assert!(w.pass, "{w:?}");
    }

    #[test]
    fn sin_y_two_tori() {
        let f = FourierScalar::single(3, &[0, 1, 0], 0.0, 0.1).unwrap();
        let iso = CoIsotopy::autonomous(ModelSpec::circle(1), &f, 64).unwrap();
        let set = find_fixed_points(&iso, &FixOptions::default());
        assert_eq!(set.count(), 2, "{set:?}");
    }

    #[test]
    fn identity_special_case() {
        let iso = CoIsotopy::identity(ModelSpec::circle(2), 8);
        let set = find_fixed_points(&iso, &FixOptions::default());
        assert!(set.identity);
        assert_eq!(set.count(), 1);
    }

    #[test]
    fn reeb_drift_has_no_fixed_points() {
        let f = FourierScalar::single(3, &[0, 1, 0], 0.0, 0.1).unwrap();
        let iso = CoIsotopy::new(
            ModelSpec::circle(1),
            Kind::Cosymplectic,
            crate::fields::Generator::raw(TimeFourier::autonomous(&f)),
            Some(ReebComponent::spatially_constant(&[0.5])),
            None,
            32,
        )
        .unwrap();
        assert_eq!(find_fixed_points(&iso, &FixOptions::default()).count(), 0);
    }

    #[test]
    fn gamma_cases() {
        assert_eq!(gamma_lower_bound(&ModelSpec::circle(1)).upper, Some(2));
        assert_eq!(gamma_lower_bound(&ModelSpec::line(1)).upper, Some(1));
        assert_eq!(GammaBound::for_case(GammaCase::Torus { k: 3 }).upper, Some(7));
    }
}
