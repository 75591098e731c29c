//! C⁰ distances between maps and paths, energy upper bounds and Cauchy
//! diagnostics for sequences of isotopies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::length::{almost_length_unchecked, distance_ch, Flavor, QuadratureOptions};
use crate::error::{Error, Result};
use crate::fields::{CoIsotopy, Isotopy};
use crate::manifold::{ModelSpec, Point};

/// Uniform `res^dim` grid over the fundamental domain (`z ∈ [0, 2π)` on
/// either topology).
pub fn grid_points(model: &ModelSpec, res: usize) -> Vec<Point> {
    let dim = model.dim();
    let h = std::f64::consts::TAU / res as f64;
    (0..res.pow(dim as u32))
        .map(|mut idx| {
            let mut p = Point::zeros(dim);
            for d in 0..dim {
                p[d] = (idx % res) as f64 * h;
                idx /= res;
            }
            p
        })
        .collect()
}

/// `max_i dist(a_i, b_i)` in the flat metric.
pub fn sup_distance(model: &ModelSpec, a: &[Point], b: &[Point]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| model.distance(p, q))
        .fold(0.0, f64::max)
}

/// `d₀(f, g) = max(d_{C⁰}(f, g), d_{C⁰}(f⁻¹, g⁻¹))` from samples on a
/// common grid; a lower estimate of the true sup.
pub fn c0_distance(
    model: &ModelSpec,
    f: &[Point],
    g: &[Point],
    f_inv: &[Point],
    g_inv: &[Point],
) -> f64 {
    sup_distance(model, f, g).max(sup_distance(model, f_inv, g_inv))
}

/// `d₀(φ_t, ψ_t)` over `points`.
pub fn map_distance(a: &dyn Isotopy, b: &dyn Isotopy, t: f64, points: &[Point]) -> f64 {
    let model = a.model();
    points
        .par_iter()
        .map(|p| {
            let fwd = model.distance(&a.map(p, t), &b.map(p, t));
            let inv = model.distance(&a.inverse_map(p, t), &b.inverse_map(p, t));
            fwd.max(inv)
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C0Options {
    /// Points per coordinate.
    pub resolution: usize,
    /// Uniform time nodes on `[0,1]` (endpoints included).
    pub time_nodes: usize,
}

impl Default for C0Options {
    fn default() -> Self {
        Self {
            resolution: 6,
            time_nodes: 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C0Report {
    /// Grid lower estimate of `d̄`.
    pub value: f64,
    pub resolution: usize,
    pub time_nodes: usize,
    pub per_time: Vec<(f64, f64)>,
}

/// `d̄(Λ, Μ) = max_t d₀(λ_t, μ_t)` on the grid and time nodes of `opts`.
pub fn path_distance(a: &dyn Isotopy, b: &dyn Isotopy, opts: &C0Options) -> Result<C0Report> {
    if a.model() != b.model() {
        return Err(Error::ModelMismatch);
    }
    let pts = grid_points(&a.model(), opts.resolution);
    let m = opts.time_nodes.max(2);
    let per_time: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let t = i as f64 / (m - 1) as f64;
            (t, map_distance(a, b, t, &pts))
        })
        .collect();
    Ok(C0Report {
        value: per_time.iter().map(|x| x.1).fold(0.0, f64::max),
        resolution: opts.resolution,
        time_nodes: m,
        per_time,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBound {
    /// Smallest almost-length among valid candidates (an upper bound only).
    pub value: f64,
    pub best: usize,
    /// Per candidate: time-1 C⁰ distance to the target and its length
    /// (`None` when the candidate misses the target).
    pub candidates: Vec<(f64, Option<f64>)>,
}

/// Minimum `L1inf` almost-length over candidates whose time-1 map matches
/// the target within `c0_tol` on `points`.
pub fn energy_upper_bound(
    target: &dyn Isotopy,
    candidates: &[&dyn Isotopy],
    c0_tol: f64,
    points: &[Point],
    opts: &QuadratureOptions,
) -> Result<EnergyBound> {
    let mut rows = Vec::with_capacity(candidates.len());
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if c.model() != target.model() {
            return Err(Error::ModelMismatch);
        }
        let d = map_distance(target, *c, 1.0, points);
        let len = if d <= c0_tol {
            let l = almost_length_unchecked(*c, Flavor::L1Inf, opts)?.value;
            if best.is_none_or(|(_, b)| l < b) {
                best = Some((i, l));
            }
            Some(l)
        } else {
            None
        };
        rows.push((d, len));
    }
    let (best, value) = best.ok_or(Error::NoValidCandidate)?;
    Ok(EnergyBound {
        value,
        best,
        candidates: rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceDiagnostics {
    pub pairwise_d: Vec<Vec<f64>>,
    pub pairwise_c0: Vec<Vec<f64>>,
    /// `tail_sup[k] = max_{i,j ≥ k} D_ij`.
    pub tail_sup: Vec<f64>,
    /// Tail supremum over the last two members.
    pub cauchy_margin: f64,
}

/// Pairwise `D_CH` and `d̄` matrices of a sequence.
pub fn cauchy_report(
    seq: &[CoIsotopy],
    flavor: Flavor,
    opts: &QuadratureOptions,
    c0: &C0Options,
) -> Result<SequenceDiagnostics> {
    let n = seq.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two isotopies".into()));
    }
    let mut d = vec![vec![0.0; n]; n];
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = distance_ch(&seq[i], &seq[j], flavor, opts)?.value;
            let w = path_distance(&seq[i], &seq[j], c0)?.value;
            d[i][j] = v;
            d[j][i] = v;
            c[i][j] = w;
            c[j][i] = w;
        }
    }
    let mut tail_sup = vec![0.0; n];
    for k in (0..n).rev() {
        let row = (k..n).map(|j| d[k][j]).fold(0.0, f64::max);
        tail_sup[k] = if k + 1 < n { row.max(tail_sup[k + 1]) } else { row };
    }
    Ok(SequenceDiagnostics {
        cauchy_margin: tail_sup[n - 2],
        pairwise_d: d,
        pairwise_c0: c,
        tail_sup,
    })
}

/// `NotCauchy` unless the final tail margin is below `threshold`.
pub fn ensure_cauchy(diag: &SequenceDiagnostics, threshold: f64) -> Result<()> {
    if diag.cauchy_margin <= threshold {
        Ok(())
    } else {
        Err(Error::NotCauchy {
            threshold,
            margin: diag.cauchy_margin,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_helpers::*;

    #[test]
    fn translation_distance() {
        let m = ModelSpec::circle(1);
        let pts = grid_points(&m, 4);
        let shifted: Vec<Point> = pts
            .iter()
            .map(|p| {
                let mut q = *p;
                q[0] += 0.25;
                q
            })
            .collect();
        assert!((sup_distance(&m, &pts, &shifted) - 0.25).abs() < 1e-12);
        assert_eq!(c0_distance(&m, &pts, &pts, &pts, &pts), 0.0);
    }

    #[test]
    fn path_distance_to_self() {
        let a = sin_y_iso(32);
        let r = path_distance(&a, &a, &C0Options { resolution: 3, time_nodes: 3 }).unwrap();
        assert_eq!(r.value, 0.0);
        let z = CoIsotopy::identity(ModelSpec::circle(1), 8);
        let r = path_distance(&a, &z, &C0Options { resolution: 4, time_nodes: 3 }).unwrap();
        // x-displacement cos(y)·t, maximal at y = 0, t = 1
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn energy_picks_cheapest_valid() {
        let z = CoIsotopy::identity(ModelSpec::circle(1), 8);
        let a = sin_y_iso(32);
        let pts = grid_points(&ModelSpec::circle(1), 3);
        let o = QuadratureOptions { panels: 4, ..Default::default() };
        let e = energy_upper_bound(&z, &[&a, &z], 1e-9, &pts, &o).unwrap();
        assert_eq!((e.best, e.value), (1, 0.0));
        assert!(e.candidates[0].1.is_none());
        assert_eq!(
            energy_upper_bound(&z, &[&a], 1e-9, &pts, &o),
            Err(Error::NoValidCandidate)
        );
    }

    #[test]
    fn alternating_sequence_not_cauchy() {
        let a = scaled_sin_y_iso(1.0, 16);
        let b = scaled_sin_y_iso(-1.0, 16);
        let o = QuadratureOptions { panels: 2, ..Default::default() };
        let c0 = C0Options { resolution: 2, time_nodes: 2 };
        let diag = cauchy_report(&[a.clone(), b.clone(), a, b], Flavor::L1Inf, &o, &c0).unwrap();
        assert!((diag.cauchy_margin - 4.0).abs() < 1e-9);
        assert!(ensure_cauchy(&diag, 0.1).is_err());
        let seq: Vec<CoIsotopy> = (0..4).map(|i| scaled_sin_y_iso(1.0 + 0.5f64.powi(i), 16)).collect();
        let diag = cauchy_report(&seq, Flavor::L1Inf, &o, &c0).unwrap();
        assert!((diag.cauchy_margin - 2.0 * 0.5f64.powi(3)).abs() < 1e-9);
        for i in 0..4 {
            assert_eq!(diag.pairwise_d[i][i], 0.0);
        }
    }
}
