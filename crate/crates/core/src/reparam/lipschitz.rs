//! Sampled Lipschitz estimates and the constant `C(F,η)` of the reparameterization bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::verify::sample_points;
use crate::fields::{CoIsotopy, Isotopy, Kind};
use crate::manifold::{FourierScalar, OscGrid};
use crate::norms::ReebTerm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzOptions {
    /// Consecutive time pairs on a uniform grid.
    pub pairs: usize,
    pub inflation: f64,
    /// Grid used for `max_x |F_t − F_s|` and `osc(F_t)`.
    pub sup_resolution: usize,
    /// z-nodes when `C` varies in space.
    pub z_grid: usize,
}

impl Default for LipschitzOptions {
    fn default() -> Self {
        Self {
            pairs: 512,
            inflation: 1.25,
            sup_resolution: 64,
            z_grid: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzData {
    /// `max_x |F_t − F_s| ≤ k0 |t − s|`.
    pub k0: f64,
    /// `|η(φ̇_t) − η(φ̇_s)| ≤ c0 |t − s|`.
    pub c0: f64,
    pub maxosc: f64,
    #[serde(rename = "maxC")]
    pub max_c: f64,
    #[serde(rename = "C_of_F_eta")]
    pub c_of_f_eta: f64,
    pub reeb_term: ReebTerm,
    pub pairs: usize,
    pub inflation: f64,
}

/// `4·max{max{c0, maxC}, 2·max{k0, maxosc}}`.
pub fn assemble_constant(k0: f64, c0: f64, maxosc: f64, max_c: f64) -> f64 {
    4.0 * c0.max(max_c).max(2.0 * k0.max(maxosc))
}

/// The Reeb term matching the length used with `iso`'s kind.
pub fn reeb_term_for(kind: Kind) -> ReebTerm {
    match kind {
        Kind::AlmostCoHamiltonian => ReebTerm::Mean,
        _ => ReebTerm::SupNorm,
    }
}

fn reeb_samples(iso: &CoIsotopy, t: f64, term: ReebTerm, z_grid: usize) -> Vec<f64> {
    if iso.reeb_is_uniform() {
        return vec![iso.reeb_velocity(0.0, t)];
    }
    let vals: Vec<f64> = (0..z_grid)
        .map(|k| {
            let z = k as f64 * std::f64::consts::TAU / z_grid as f64;
            iso.reeb_velocity(iso.z_map(z, t), t)
        })
        .collect();
    match term {
        ReebTerm::Mean => vec![vals.iter().sum::<f64>() / z_grid as f64],
        _ => vals,
    }
}

/// Difference-quotient estimates over `pairs` consecutive time pairs,
/// inflated by `opts.inflation`.
pub fn lipschitz_constants(iso: &CoIsotopy, opts: &LipschitzOptions) -> Result<LipschitzData> {
    let term = reeb_term_for(iso.kind());
    let m = opts.pairs.max(1);
    let h = 1.0 / m as f64;
    let ts: Vec<f64> = (0..=m).map(|i| i as f64 * h).collect();
    let dim = iso.model().dim();
    let fs: Vec<FourierScalar> = ts
        .iter()
        .map(|t| iso.generator_fourier(*t).unwrap_or_else(|| FourierScalar::zero(dim)))
        .collect();
    let mut freqs: Vec<Vec<i32>> = fs
        .iter()
        .flat_map(|f| f.terms().iter().map(|t| t.k.clone()))
        .collect();
    freqs.sort();
    freqs.dedup();
    let grid = OscGrid::with_frequencies(dim, &freqs, opts.sup_resolution)?;
    let k0 = (0..m)
        .into_par_iter()
        .map(|i| grid.sup_abs(&fs[i + 1].sub(&fs[i])) / h)
        .reduce(|| 0.0, f64::max);
    let maxosc = fs
        .par_iter()
        .map(|f| grid.osc(f).hi)
        .reduce(|| 0.0, f64::max);
    let cs: Vec<Vec<f64>> = ts
        .par_iter()
        .map(|t| reeb_samples(iso, *t, term, opts.z_grid))
        .collect();
    let c0 = cs
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (b - a).abs())
                .fold(0.0, f64::max)
                / h
        })
        .fold(0.0, f64::max);
    let max_c = cs.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let (k0, c0) = (opts.inflation * k0, opts.inflation * c0);
    Ok(LipschitzData {
        k0,
        c0,
        maxosc,
        max_c,
        c_of_f_eta: assemble_constant(k0, c0, maxosc, max_c),
        reeb_term: term,
        pairs: m,
        inflation: opts.inflation,
    })
}

/// Empirical `l₀` with `d(φ_t x, φ_s x), d(φ_t⁻¹x, φ_s⁻¹x) ≤ l₀|t − s|`.
pub fn flow_lipschitz(iso: &CoIsotopy, samples: usize, nodes: usize, inflation: f64, seed: u64) -> f64 {
    let model = iso.model();
    let pts = sample_points(&model, samples, seed);
    let m = nodes.max(1);
    let h = 1.0 / m as f64;
    let worst = pts
        .par_iter()
        .map(|(p, _)| {
            let fwd: Vec<_> = (0..=m).map(|i| iso.map(p, i as f64 * h)).collect();
            let inv: Vec<_> = (0..=m).map(|i| iso.inverse_map(p, i as f64 * h)).collect();
            (0..m)
                .map(|i| {
                    model
                        .distance(&fwd[i], &fwd[i + 1])
                        .max(model.distance(&inv[i], &inv[i + 1]))
                        / h
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    inflation * worst
}
