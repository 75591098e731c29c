//! Truncated real Fourier series on the flat torus factors.
//!
//! A term is `a cos(k·θ) + b sin(k·θ)`; frequency vectors are stored in a
//! canonical sign (first nonzero entry positive) and merged on construction.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::model::{Coords, MAX_DIM};
use crate::error::{Error, Result};

/// Highest per-coordinate frequency served from the power table.
const POW_TABLE: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub k: Vec<i32>,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierScalar {
    dim: usize,
    terms: Vec<FourierTerm>,
    max_k: [u32; MAX_DIM],
}

/// Canonical sign of a frequency vector; returns `(k, flip)` where `flip`
/// means the sine amplitude changes sign.
pub(crate) fn canonical_frequency(k: &[i32]) -> (Vec<i32>, bool) {
    match k.iter().find(|v| **v != 0) {
        Some(first) if *first < 0 => (k.iter().map(|v| -v).collect(), true),
        _ => (k.to_vec(), false),
    }
}

impl FourierScalar {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
            max_k: [0; MAX_DIM],
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::from_terms(dim, [FourierTerm { k: vec![0; dim], a: c, b: 0.0 }])
            .expect("constant term is well-formed")
    }

    pub fn single(dim: usize, k: &[i32], a: f64, b: f64) -> Result<Self> {
        Self::from_terms(dim, [FourierTerm { k: k.to_vec(), a, b }])
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = FourierTerm>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidDimension(format!("scalar dimension {dim}")));
        }
        let mut merged: BTreeMap<Vec<i32>, (f64, f64)> = BTreeMap::new();
        for t in terms {
            if t.k.len() != dim {
                return Err(Error::InvalidDimension(format!(
                    "frequency {:?} does not have {dim} entries",
                    t.k
                )));
            }
            if !t.a.is_finite() || !t.b.is_finite() {
                return Err(Error::InvalidArgument("non-finite Fourier amplitude".into()));
            }
            let (k, flip) = canonical_frequency(&t.k);
            let zero_mode = k.iter().all(|v| *v == 0);
            let b = if zero_mode {
                0.0
            } else if flip {
                -t.b
            } else {
                t.b
            };
            let e = merged.entry(k).or_insert((0.0, 0.0));
            e.0 += t.a;
            e.1 += b;
        }
        let terms: Vec<FourierTerm> = merged
            .into_iter()
            .filter(|(_, (a, b))| *a != 0.0 || *b != 0.0)
            .map(|(k, (a, b))| FourierTerm { k, a, b })
            .collect();
        let mut max_k = [0u32; MAX_DIM];
        for t in &terms {
            for (d, kd) in t.k.iter().enumerate() {
                max_k[d] = max_k[d].max(kd.unsigned_abs());
            }
        }
        Ok(Self { dim, terms, max_k })
    }

    pub fn from_records(dim: usize, records: &[FourierTerm]) -> Result<Self> {
        Self::from_terms(dim, records.iter().cloned())
    }

    pub fn to_records(&self) -> Vec<FourierTerm> {
        self.terms.clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[FourierTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Zero-frequency cosine amplitude.
    pub fn mean(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.k.iter().all(|v| *v == 0))
            .map_or(0.0, |t| t.a)
    }

    pub fn without_mean(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.k.iter().any(|v| *v != 0))
            .cloned();
        Self::from_terms(self.dim, terms).expect("subset of valid terms")
    }

    pub fn depends_on(&self, coord: usize) -> bool {
        self.max_k[coord] > 0
    }

    pub fn active_dims(&self) -> Vec<usize> {
        (0..self.dim).filter(|d| self.max_k[*d] > 0).collect()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .fold(0.0_f64, |m, t| m.max(t.a.abs()).max(t.b.abs()))
    }

    /// `Σ ‖k‖ √(a²+b²)`: a Lipschitz constant for the flat metric.
    pub fn lipschitz_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| knorm(&t.k) * t.a.hypot(t.b))
            .sum()
    }

    /// `Σ ‖k‖² √(a²+b²)`: bounds every second directional derivative.
    pub fn hessian_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| knorm(&t.k).powi(2) * t.a.hypot(t.b))
            .sum()
    }

    /// `Σ (|a| + |b|)`: bounds `sup |F|`.
    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.a.abs() + t.b.abs()).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero(self.dim);
        }
        let mut out = self.clone();
        for t in &mut out.terms {
            t.a *= s;
            t.b *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self::from_terms(self.dim, self.terms.iter().chain(other.terms.iter()).cloned())
            .expect("merged terms are valid")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `∂F/∂θ_d`, again a Fourier scalar on the same support.
    pub fn partial(&self, d: usize) -> Self {
        let terms = self.terms.iter().filter(|t| t.k[d] != 0).map(|t| {
            let kd = t.k[d] as f64;
            FourierTerm {
                k: t.k.clone(),
                a: kd * t.b,
                b: -kd * t.a,
            }
        });
        Self::from_terms(self.dim, terms).expect("derivative terms are valid")
    }

    /// `θ ↦ F(θ + s)`.
    pub fn translate(&self, s: &[f64]) -> Self {
        let terms = self.terms.iter().map(|t| {
            let phase: f64 = t.k.iter().zip(s).map(|(k, v)| *k as f64 * v).sum();
            let (sn, cs) = phase.sin_cos();
            FourierTerm {
                k: t.k.clone(),
                a: t.a * cs + t.b * sn,
                b: t.b * cs - t.a * sn,
            }
        });
        Self::from_terms(self.dim, terms).expect("translated terms are valid")
    }

    #[inline]
    fn for_each_phase(&self, p: &[f64], f: impl FnMut(&FourierTerm, f64, f64)) {
        phase_sweep(self.dim, &self.max_k, &self.terms, |t| &t.k, p, f);
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        let mut v = 0.0;
        self.for_each_phase(p, |t, c, s| v += t.a * c + t.b * s);
        v
    }

    pub fn eval_at(&self, p: &Coords) -> f64 {
        self.eval(p.as_slice())
    }

    /// Value and gradient in one pass.
    pub fn eval_grad(&self, p: &[f64], grad: &mut [f64]) -> f64 {
        grad[..self.dim].fill(0.0);
        let mut v = 0.0;
        self.for_each_phase(p, |t, c, s| {
            v += t.a * c + t.b * s;
            let dv = -t.a * s + t.b * c;
            for (d, kd) in t.k.iter().enumerate() {
                if *kd != 0 {
                    grad[d] += *kd as f64 * dv;
                }
            }
        });
        v
    }

    /// Value, gradient and Hessian (row-major `dim × dim`).
    pub fn eval_hess(&self, p: &[f64], grad: &mut [f64], hess: &mut [f64]) -> f64 {
        let dim = self.dim;
        grad[..dim].fill(0.0);
        hess[..dim * dim].fill(0.0);
        let mut v = 0.0;
        self.for_each_phase(p, |t, c, s| {
            let val = t.a * c + t.b * s;
            v += val;
            let dv = -t.a * s + t.b * c;
            for i in 0..dim {
                let ki = t.k[i];
                if ki == 0 {
                    continue;
                }
                grad[i] += ki as f64 * dv;
                for j in 0..dim {
                    let kj = t.k[j];
                    if kj != 0 {
                        hess[i * dim + j] -= (ki * kj) as f64 * val;
                    }
                }
            }
        });
        v
    }

    /// Certified enclosure of `max F − min F`; see [`OscGrid`].
    pub fn osc(&self, resolution: usize) -> Result<OscEnclosure> {
        let grid = OscGrid::new(self.dim, &self.active_dims(), resolution)?;
        Ok(grid.osc(self))
    }
}

/// Calls `f(item, cos(k·p), sin(k·p))` for every item, using complex-power
/// recurrences per coordinate when all frequencies are small.
#[inline]
pub(crate) fn phase_sweep<T>(
    dim: usize,
    max_k: &[u32; MAX_DIM],
    items: &[T],
    k_of: impl Fn(&T) -> &[i32],
    p: &[f64],
    f: impl FnMut(&T, f64, f64),
) {
    // low frequencies are the common case; keep the power table small
    if max_k[..dim].iter().all(|m| *m as usize <= SMALL_POW) {
        sweep_with::<{ SMALL_POW + 1 }, T>(dim, max_k, items, k_of, p, f)
    } else {
        sweep_with::<{ POW_TABLE + 1 }, T>(dim, max_k, items, k_of, p, f)
    }
}

const SMALL_POW: usize = 4;

fn sweep_with<const N: usize, T>(
    dim: usize,
    max_k: &[u32; MAX_DIM],
    items: &[T],
    k_of: impl Fn(&T) -> &[i32],
    p: &[f64],
    mut f: impl FnMut(&T, f64, f64),
) {
    let mut pw = [[(1.0f64, 0.0f64); N]; MAX_DIM];
    let mut direct = false;
    for d in 0..dim {
        let m = max_k[d] as usize;
        if m == 0 {
            continue;
        }
        if m >= N {
            direct = true;
            break;
        }
        let (s1, c1) = p[d].sin_cos();
        let row = &mut pw[d];
        for j in 1..=m {
            let (c, s) = row[j - 1];
            row[j] = (c * c1 - s * s1, c * s1 + s * c1);
        }
    }
    if direct {
        for it in items {
            let phase: f64 = k_of(it).iter().zip(p).map(|(k, v)| *k as f64 * v).sum();
            let (s, c) = phase.sin_cos();
            f(it, c, s);
        }
        return;
    }
    for it in items {
        let (mut cr, mut ci) = (1.0, 0.0);
        for (d, kd) in k_of(it).iter().enumerate() {
            if *kd == 0 {
                continue;
            }
            let (pc, mut ps) = pw[d][kd.unsigned_abs() as usize];
            if *kd < 0 {
                ps = -ps;
            }
            let nr = cr * pc - ci * ps;
            ci = cr * ps + ci * pc;
            cr = nr;
        }
        f(it, cr, ci);
    }
}

pub(crate) fn knorm(k: &[i32]) -> f64 {
    k.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt()
}

/// Interval `[lo, hi]` containing `osc(F)`, plus a refined point value.
///
/// `lo` is the grid max − min. `hi` adds, per extremum, the smaller of the
/// first-order bound `Lip·h√a/2` and the second-order bound `M₂·h²a/8`
/// (gradient vanishes at an interior extremum), where `a` is the number of
/// coordinates the field depends on. `value` is obtained by Newton refinement
/// from the best grid candidates; it is an attained oscillation, hence `≥ lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscEnclosure {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
    pub max: f64,
    pub min: f64,
    pub resolution: usize,
}

impl OscEnclosure {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn zero(resolution: usize) -> Self {
        Self {
            lo: 0.0,
            hi: 0.0,
            value: 0.0,
            max: 0.0,
            min: 0.0,
            resolution,
        }
    }
}

/// Uniform grid over the active coordinates, with a per-term phase cache so
/// that many scalars sharing a frequency set can be scanned cheaply.
pub struct OscGrid {
    dim: usize,
    active: Vec<usize>,
    resolution: usize,
    cache: Option<PhaseCache>,
}

struct PhaseCache {
    index: BTreeMap<Vec<i32>, usize>,
    n_terms: usize,
    /// `(cos, sin)` of every cached frequency at every grid point, point-major.
    phases: Vec<(f64, f64)>,
}

/// Grids over more than two active coordinates are coarsened to stay below
/// this many points (the certified width grows accordingly).
pub const MAX_OSC_POINTS: usize = 1 << 20;

/// Per-coordinate resolution actually used for `active` coordinates.
pub fn capped_resolution(resolution: usize, active: usize) -> usize {
    if active <= 2 {
        return resolution;
    }
    let cap = (MAX_OSC_POINTS as f64).powf(1.0 / active as f64).floor() as usize;
    resolution.min(cap).max(8)
}

/// Phase caches above this many entries are not built.
const CACHE_LIMIT: usize = 1 << 23;

impl OscGrid {
    pub fn new(dim: usize, active: &[usize], resolution: usize) -> Result<Self> {
        if resolution < 8 {
            return Err(Error::InvalidArgument(format!(
                "osc resolution must be at least 8, got {resolution}"
            )));
        }
        Ok(Self {
            dim,
            active: active.to_vec(),
            resolution: capped_resolution(resolution, active.len()),
            cache: None,
        })
    }

    /// Grid whose phase cache covers every frequency in `freqs`.
    pub fn with_frequencies(dim: usize, freqs: &[Vec<i32>], resolution: usize) -> Result<Self> {
        let mut active: Vec<usize> = (0..dim)
            .filter(|d| freqs.iter().any(|k| k[*d] != 0))
            .collect();
        active.sort_unstable();
        let mut grid = Self::new(dim, &active, resolution)?;
        let mut index = BTreeMap::new();
        for k in freqs {
            let (c, _) = canonical_frequency(k);
            if c.iter().any(|v| *v != 0) {
                let next = index.len();
                index.entry(c).or_insert(next);
            }
        }
        let n_points = grid.n_points();
        let n_terms = index.len();
        if n_terms > 0 && n_points.saturating_mul(n_terms) <= CACHE_LIMIT {
            let mut phases = vec![(0.0, 0.0); n_points * n_terms];
            let mut ks: Vec<(&Vec<i32>, usize)> = index.iter().map(|(k, i)| (k, *i)).collect();
            ks.sort_by_key(|(_, i)| *i);
            let mut p = vec![0.0; dim];
            for pi in 0..n_points {
                grid.point(pi, &mut p);
                for (k, ti) in &ks {
                    let phase: f64 = k.iter().zip(&p).map(|(kk, v)| *kk as f64 * v).sum();
                    let (s, c) = phase.sin_cos();
                    phases[pi * n_terms + ti] = (c, s);
                }
            }
            grid.cache = Some(PhaseCache {
                index,
                n_terms,
                phases,
            });
        }
        Ok(grid)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.resolution as f64
    }

    pub fn n_points(&self) -> usize {
        self.resolution.pow(self.active.len() as u32)
    }

    fn point(&self, mut idx: usize, out: &mut [f64]) {
        out.fill(0.0);
        let h = self.spacing();
        for d in &self.active {
            out[*d] = (idx % self.resolution) as f64 * h;
            idx /= self.resolution;
        }
    }

    fn covers(&self, f: &FourierScalar) -> bool {
        f.active_dims().iter().all(|d| self.active.contains(d))
    }

    /// Grid values of `f`, in point-index order.
    pub fn values(&self, f: &FourierScalar) -> Vec<f64> {
        assert!(self.covers(f), "grid does not cover the scalar's active coordinates");
        let n_points = self.n_points();
        let zero_mode = f.mean();
        if let Some(cache) = &self.cache {
            let mut map: Vec<(usize, f64, f64)> = Vec::with_capacity(f.terms.len());
            let mut cached = true;
            for t in &f.terms {
                if t.k.iter().all(|v| *v == 0) {
                    continue;
                }
                match cache.index.get(&t.k) {
                    Some(i) => map.push((*i, t.a, t.b)),
                    None => {
                        cached = false;
                        break;
                    }
                }
            }
            if cached {
                let nt = cache.n_terms;
                return (0..n_points)
                    .map(|pi| {
                        let row = &cache.phases[pi * nt..(pi + 1) * nt];
                        map.iter()
                            .fold(zero_mode, |acc, (i, a, b)| acc + a * row[*i].0 + b * row[*i].1)
                    })
                    .collect();
            }
        }
        let mut p = vec![0.0; self.dim];
        (0..n_points)
            .map(|pi| {
                self.point(pi, &mut p);
                f.eval(&p)
            })
            .collect()
    }

    /// Largest grid value of `|f|`.
    pub fn sup_abs(&self, f: &FourierScalar) -> f64 {
        if f.active_dims().is_empty() {
            return f.mean().abs();
        }
        self.values(f).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn osc(&self, f: &FourierScalar) -> OscEnclosure {
        let active = f.active_dims();
        if active.is_empty() {
            let mut e = OscEnclosure::zero(self.resolution);
            e.max = f.mean();
            e.min = f.mean();
            return e;
        }
        let vals = self.values(f);
        let (gmax, gmin) = vals
            .iter()
            .fold((f64::NEG_INFINITY, f64::INFINITY), |(mx, mn), v| (mx.max(*v), mn.min(*v)));
        let a = active.len() as f64;
        let h = self.spacing();
        let first = f.lipschitz_bound() * h * a.sqrt() / 2.0;
        let second = f.hessian_bound() * h * h * a / 8.0;
        let slack = first.min(second);
        let max_r = self.refine(f, &vals, true).max(gmax);
        let min_r = self.refine(f, &vals, false).min(gmin);
        let lo = gmax - gmin;
        let hi = lo + 2.0 * slack;
        let value = (max_r - min_r).clamp(lo, hi);
        OscEnclosure {
            lo,
            hi,
            value,
            max: max_r,
            min: min_r,
            resolution: self.resolution,
        }
    }

    /// Newton refinement from the best grid-local extrema.
    fn refine(&self, f: &FourierScalar, vals: &[f64], maximize: bool) -> f64 {
        let sign = if maximize { 1.0 } else { -1.0 };
        let res = self.resolution;
        let na = self.active.len();
        let mut candidates: Vec<(f64, usize)> = Vec::new();
        'points: for (pi, v) in vals.iter().enumerate() {
            let sv = sign * v;
            let mut stride = 1;
            for _ in 0..na {
                let coord = (pi / stride) % res;
                let up = pi - coord * stride + ((coord + 1) % res) * stride;
                let down = pi - coord * stride + ((coord + res - 1) % res) * stride;
                if sign * vals[up] > sv || sign * vals[down] > sv {
                    continue 'points;
                }
                stride *= res;
            }
            candidates.push((sv, pi));
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
        candidates.truncate(3);
        let mut best = f64::NEG_INFINITY;
        let mut p = vec![0.0; self.dim];
        for (_, pi) in candidates {
            self.point(pi, &mut p);
            best = best.max(newton_extremum(f, &self.active, &mut p, sign));
        }
        sign * best
    }
}

/// Maximizes `sign·f` over the active coordinates starting at `p`; returns
/// the best value of `sign·f` reached (never below the starting value).
fn newton_extremum(f: &FourierScalar, active: &[usize], p: &mut [f64], sign: f64) -> f64 {
    let dim = f.dim();
    let na = active.len();
    let mut grad = vec![0.0; dim];
    let mut hess = vec![0.0; dim * dim];
    let mut cur = sign * f.eval_hess(p, &mut grad, &mut hess);
    for _ in 0..60 {
        let g = DVector::from_iterator(na, active.iter().map(|d| sign * grad[*d]));
        let h = DMatrix::from_fn(na, na, |i, j| sign * hess[active[i] * dim + active[j]]);
        // ascent direction: Newton if the local model is concave, else gradient
        let step = match (-h).cholesky() {
            Some(ch) => ch.solve(&g),
            None => g.clone() * (1.0 / (1.0 + f.hessian_bound())),
        };
        let mut t = 1.0;
        let mut improved = false;
        let mut trial = p.to_vec();
        for _ in 0..30 {
            for (i, d) in active.iter().enumerate() {
                trial[*d] = p[*d] + t * step[i];
            }
            let v = sign * f.eval(&trial);
            if v >= cur {
                let gain = v - cur;
                p.copy_from_slice(&trial);
                cur = sign * f.eval_hess(p, &mut grad, &mut hess);
                improved = gain > 0.0 || step.norm() * t < 1e-14;
                break;
            }
            t *= 0.5;
        }
        if !improved || step.norm() * t < 1e-13 {
            break;
        }
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn sin_x() -> FourierScalar {
        FourierScalar::single(3, &[1, 0, 0], 0.0, 1.0).unwrap()
    }

    #[test]
    fn canonical_merge() {
        // cos(-x) = cos x, sin(-x) = -sin x
        let f = FourierScalar::from_terms(
            3,
            [
                FourierTerm { k: vec![-1, 0, 0], a: 1.0, b: 2.0 },
                FourierTerm { k: vec![1, 0, 0], a: 0.5, b: 0.5 },
            ],
        )
        .unwrap();
        assert_eq!(f.terms().len(), 1);
        assert_eq!(f.terms()[0].a, 1.5);
        assert_eq!(f.terms()[0].b, -1.5);
    }

    #[test]
    fn eval_matches_direct_trig() {
        let f = FourierScalar::from_terms(
            3,
            [
                FourierTerm { k: vec![2, -3, 0], a: 0.3, b: -0.7 },
                FourierTerm { k: vec![0, 1, 1], a: 1.1, b: 0.2 },
                FourierTerm { k: vec![0, 0, 0], a: 0.25, b: 0.0 },
            ],
        )
        .unwrap();
        let p: [f64; 3] = [0.37, 2.1, -1.3];
        let direct = 0.3 * (2.0 * p[0] - 3.0 * p[1]).cos() - 0.7 * (2.0 * p[0] - 3.0 * p[1]).sin()
            + 1.1 * (p[1] + p[2]).cos()
            + 0.2 * (p[1] + p[2]).sin()
            + 0.25;
        assert!((f.eval(&p) - direct).abs() < 1e-14);
        let mut g = [0.0; 3];
        let v = f.eval_grad(&p, &mut g);
        assert!((v - direct).abs() < 1e-14);
        // central differences
        for d in 0..3 {
            let mut a = p;
            let mut b = p;
            a[d] += 1e-6;
            b[d] -= 1e-6;
            let fd = (f.eval(&a) - f.eval(&b)) / 2e-6;
            assert!((fd - g[d]).abs() < 1e-8, "d={d}: {fd} vs {}", g[d]);
        }
    }

    #[test]
    fn hessian_matches_partials() {
        let f = FourierScalar::from_terms(
            2,
            [
                FourierTerm { k: vec![1, 2], a: 0.4, b: 0.9 },
                FourierTerm { k: vec![3, 0], a: -0.2, b: 0.1 },
            ],
        )
        .unwrap();
        let p = [0.8, -0.4];
        let mut g = [0.0; 2];
        let mut h = [0.0; 4];
        f.eval_hess(&p, &mut g, &mut h);
        for i in 0..2 {
            for j in 0..2 {
                let exact = f.partial(i).partial(j).eval(&p);
                assert!((exact - h[i * 2 + j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn large_frequencies_use_direct_path() {
        let f = FourierScalar::single(1, &[40], 0.5, -0.25).unwrap();
        let x: f64 = 0.123;
        let direct = 0.5 * (40.0 * x).cos() - 0.25 * (40.0 * x).sin();
        assert!((f.eval(&[x]) - direct).abs() < 1e-14);
    }

    #[test]
    fn osc_of_sine() {
        let e = sin_x().osc(256).unwrap();
        assert!(e.contains(2.0));
        assert!((e.value - 2.0).abs() < 1e-12);
        assert!(e.width() <= 1e-3, "width {}", e.width());
    }

    #[test]
    fn osc_of_constant_is_zero() {
        let e = FourierScalar::constant(3, 5.0).osc(64).unwrap();
        assert_eq!((e.lo, e.hi, e.value), (0.0, 0.0, 0.0));
    }

    #[test]
    fn osc_of_sin_plus_cos() {
        let f = FourierScalar::from_terms(
            3,
            [
                FourierTerm { k: vec![1, 0, 0], a: 0.0, b: 1.0 },
                FourierTerm { k: vec![1, 0, 0], a: 1.0, b: 0.0 },
            ],
        )
        .unwrap();
        let e = f.osc(256).unwrap();
        assert!(e.contains(2.0 * SQRT_2));
        assert!((e.value - 2.0 * SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn osc_resolution_floor() {
        assert!(sin_x().osc(4).is_err());
    }

    #[test]
    fn translate_shifts_phase() {
        let f = sin_x().translate(&[PI, 0.0, 0.0]);
        // sin(x + π) = −sin x
        let p = [0.7, 0.1, 0.2];
        assert!((f.eval(&p) + (0.7f64).sin()).abs() < 1e-15);
    }

    #[test]
    fn cached_grid_matches_direct() {
        let f = FourierScalar::from_terms(
            3,
            [
                FourierTerm { k: vec![1, 1, 0], a: 0.3, b: 0.4 },
                FourierTerm { k: vec![0, 2, 0], a: -0.5, b: 0.0 },
            ],
        )
        .unwrap();
        let freqs: Vec<Vec<i32>> = f.terms().iter().map(|t| t.k.clone()).collect();
        let cached = OscGrid::with_frequencies(3, &freqs, 32).unwrap();
        let plain = OscGrid::new(3, &f.active_dims(), 32).unwrap();
        let a = cached.values(&f);
        let b = plain.values(&f);
        assert_eq!(a.len(), 32 * 32);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
        assert_eq!(cached.osc(&f).value, plain.osc(&f).value);
    }
}
