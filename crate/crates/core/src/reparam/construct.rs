//! Boundary flattening with certified distances, and the zero-mean variant.

use serde::{Deserialize, Serialize};

use super::curve::ReparamCurve;
use super::lipschitz::{flow_lipschitz, lipschitz_constants, LipschitzOptions};
use super::ops::{c0_diff, flatten_curve, ham_norm_diff, is_boundary_flat, plateau_delta, reparametrize};
use crate::error::{Error, Result};
use crate::fields::isotopy::kind_mismatch;
use crate::fields::{CoIsotopy, Isotopy, Kind};
use crate::norms::{distance_ah, distance_ch, grid_points, path_distance, C0Options, Flavor, LengthReport, QuadratureOptions};
use crate::report::VerificationReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlattenOptions {
    pub quad: QuadratureOptions,
    pub c0: C0Options,
    pub lipschitz: LipschitzOptions,
    pub flow_samples: usize,
    pub flow_nodes: usize,
    /// Grid points per coordinate for the endpoint comparison.
    pub endpoint_resolution: usize,
    pub endpoint_tol: f64,
    pub max_rounds: usize,
    pub seed: u64,
}

impl Default for FlattenOptions {
    fn default() -> Self {
        Self {
            quad: QuadratureOptions::default(),
            c0: C0Options::default(),
            lipschitz: LipschitzOptions::default(),
            flow_samples: 32,
            flow_nodes: 16,
            endpoint_resolution: 4,
            endpoint_tol: 1e-8,
            max_rounds: 8,
            seed: 0x5eed,
        }
    }
}

/// `D_CH` for co-Hamiltonian pairs, `D_AH` for almost pairs.
pub fn kind_distance(
    a: &dyn Isotopy,
    b: &dyn Isotopy,
    flavor: Flavor,
    quad: &QuadratureOptions,
) -> Result<LengthReport> {
    if a.kind() == Kind::AlmostCoHamiltonian || b.kind() == Kind::AlmostCoHamiltonian {
        distance_ah(a, b, flavor, quad)
    } else {
        distance_ch(a, b, flavor, quad)
    }
}

fn require_flattenable(iso: &CoIsotopy) -> Result<()> {
    match iso.kind() {
        Kind::CoHamiltonian | Kind::AlmostCoHamiltonian => Ok(()),
        k => Err(kind_mismatch(Kind::CoHamiltonian, k)),
    }
}

/// Largest time-0 and time-1 displacement between the two paths.
fn endpoint_gap(a: &CoIsotopy, b: &CoIsotopy, res: usize) -> f64 {
    let model = a.model();
    grid_points(&model, res)
        .iter()
        .map(|p| {
            let one = model.distance(&a.map(p, 1.0), &b.map(p, 1.0));
            let zero = model.distance(&a.map(p, 0.0), &b.map(p, 0.0));
            one.max(zero)
        })
        .fold(0.0, f64::max)
}

fn plateau(delta: f64) -> ReparamCurve {
    ReparamCurve::SmoothPlateau { delta }
}

/// A boundary-flat reparameterization `Ψ = Φ^χ` with the same endpoints,
/// `D(Φ, Ψ) < ε` and `d̄(Ψ, Φ) < ε`, all measured.
pub fn boundary_flatten(
    iso: &CoIsotopy,
    epsilon: f64,
    opts: &FlattenOptions,
) -> Result<(CoIsotopy, VerificationReport)> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    require_flattenable(iso)?;
    let lip = lipschitz_constants(iso, &opts.lipschitz)?;
    let l0 = flow_lipschitz(iso, opts.flow_samples, opts.flow_nodes, opts.lipschitz.inflation, opts.seed);
    let c = lip.c_of_f_eta;
    // ‖χ − id‖_ham ≤ min{ε/C, ε/l₀, ε}
    let target = [epsilon / c, epsilon / l0, epsilon]
        .into_iter()
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    let mut delta = plateau_delta(&flatten_curve(epsilon.min(0.99))?).expect("plateau curve");
    while ham_norm_diff(&plateau(delta), &ReparamCurve::Identity) > target && delta > 1e-9 {
        delta *= 0.5;
    }
    for round in 0..=opts.max_rounds {
        let chi = plateau(delta);
        let out = reparametrize(iso, &chi)?;
        let ham = ham_norm_diff(&chi, &ReparamCurve::Identity);
        let flat = is_boundary_flat(&out, delta);
        let ends = endpoint_gap(iso, &out, opts.endpoint_resolution);
        let d = kind_distance(iso, &out, Flavor::L1Inf, &opts.quad)?.value;
        let dbar = path_distance(&out, iso, &opts.c0)?.value;
        let ok = flat && ends <= opts.endpoint_tol && d < epsilon && dbar < epsilon;
        if ok {
            let mut r = VerificationReport::new("boundary_flatten");
            r.check_flag("boundary_flat", flat)
                .check_le("endpoint_gap", ends, opts.endpoint_tol, "endpoint tolerance")
                .check_lt("distance", d, epsilon, "epsilon")
                .check_lt("c0_path_distance", dbar, epsilon, "epsilon")
                .info("epsilon", epsilon)
                .info("delta", delta)
                .info("ham_norm", ham)
                .info("C_of_F_eta", c)
                .info("l0", l0)
                .info("distance_bound", c * ham)
                .info("c0_bound", l0 * c0_diff(&chi, &ReparamCurve::Identity))
                .info("shrink_rounds", round as f64);
            return Ok((out, r));
        }
        delta *= 0.5;
    }
    Err(Error::ConstructionFailed {
        rounds: opts.max_rounds,
    })
}

/// Largest `|mean F_t|` on 64 time nodes.
pub fn max_mean(iso: &CoIsotopy) -> f64 {
    (0..=64)
        .map(|i| {
            iso.generator_fourier(i as f64 / 64.0)
                .map_or(0.0, |f| f.mean().abs())
        })
        .fold(0.0, f64::max)
}

/// `H = F^χ` with `χ = flatten_curve(ε)` and the six certified items.
pub fn normalized_flatten(
    iso: &CoIsotopy,
    epsilon: f64,
    opts: &FlattenOptions,
) -> Result<(CoIsotopy, VerificationReport)> {
    require_flattenable(iso)?;
    let m = max_mean(iso);
    if m > 1e-12 {
        return Err(Error::NotNormalized(m));
    }
    let chi = flatten_curve(epsilon)?;
    let delta = plateau_delta(&chi).expect("plateau curve");
    let h = reparametrize(iso, &chi)?;
    let lip = lipschitz_constants(iso, &opts.lipschitz)?;
    let c = 4.0 * (lip.k0 + lip.c0);
    let id = CoIsotopy::identity(iso.model(), iso.steps());
    let d_f_id = kind_distance(iso, &id, Flavor::Linf, &opts.quad)?.value;
    let d_f_h = kind_distance(iso, &h, Flavor::Linf, &opts.quad)?.value;
    let d_h_id = kind_distance(&h, &id, Flavor::Linf, &opts.quad)?.value;
    let l0 = flow_lipschitz(iso, opts.flow_samples, opts.flow_nodes, opts.lipschitz.inflation, opts.seed);
    let sup_gap = c0_diff(&chi, &ReparamCurve::Identity);
    let dbar = path_distance(iso, &h, &opts.c0)?.value;
    let mut r = VerificationReport::new("normalized_flatten");
    r.check_flag("item1_boundary_flat", is_boundary_flat(&h, delta))
        .check_le("item2_max_mean", max_mean(&h), 1e-12, "zero mean")
        .check_le(
            "item3_endpoint_gap",
            endpoint_gap(iso, &h, opts.endpoint_resolution),
            opts.endpoint_tol,
            "endpoint tolerance",
        )
        .check_le("item4_distance", d_f_h, 2.0 * d_f_id + c * epsilon, "2·D(F,Id) + Cε")
        .check_le("item5_distance_to_id", d_h_id, 3.0 * d_f_id + c * epsilon, "3·D(F,Id) + Cε")
        .check_le("item6_c0_path_distance", dbar, l0 * sup_gap + 1e-12, "l0·‖χ − id‖_C0")
        .info("epsilon", epsilon)
        .info("delta", delta)
        .info("C", c)
        .info("K0", lip.k0)
        .info("L0", lip.c0)
        .info("l0", l0)
        .info("distance_to_id", d_f_id);
    Ok((h, r))
}
