//! Numerical checks of the reparameterization bounds (Lipschitz in the curve, and Cauchy sequences).

use super::construct::kind_distance;
use super::curve::ReparamCurve;
use super::lipschitz::{lipschitz_constants, LipschitzOptions};
use super::ops::{ham_norm_diff, reparametrize};
use crate::error::{Error, Result};
use crate::fields::{conjugate_by_translation, CoIsotopy, Isotopy};
use crate::manifold::{Point, ModelSpec};
use crate::norms::{Flavor, QuadratureOptions};
use crate::report::VerificationReport;

/// `D^{(1,∞)}(Φ^{ξ₁}, Φ^{ξ₂}) ≤ C(F,η)·‖ξ₁ − ξ₂‖_ham`.
pub fn verify_rl2(
    iso: &CoIsotopy,
    xi1: &ReparamCurve,
    xi2: &ReparamCurve,
    quad: &QuadratureOptions,
    lip: &LipschitzOptions,
) -> Result<VerificationReport> {
    let data = lipschitz_constants(iso, lip)?;
    let a = reparametrize(iso, xi1)?;
    let b = reparametrize(iso, xi2)?;
    let lhs = kind_distance(&a, &b, Flavor::L1Inf, quad)?.value;
    let ham = ham_norm_diff(xi1, xi2);
    let mut r = VerificationReport::new("rl2");
    r.check_le("lhs_le_rhs", lhs, data.c_of_f_eta * ham, "C_of_F_eta·‖ξ₁−ξ₂‖_ham")
        .info("lhs", lhs)
        .info("rhs", data.c_of_f_eta * ham)
        .info("ham_norm", ham)
        .info("C_of_F_eta", data.c_of_f_eta)
        .info("k0", data.k0)
        .info("c0", data.c0)
        .info("maxosc", data.maxosc)
        .info("maxC", data.max_c);
    if !(xi1.is_monotone() && xi2.is_monotone()) {
        r.note("a curve is not monotone; the bound is reported but outside the bound's hypothesis");
    }
    Ok(r)
}

/// Smallest `j` with `D(F_i, F_j) < threshold` for every later `i`.
fn find_j0(seq: &[CoIsotopy], threshold: f64, quad: &QuadratureOptions) -> Result<(usize, f64)> {
    let n = seq.len();
    let mut best = f64::INFINITY;
    for j in 0..n.saturating_sub(1) {
        let mut worst = 0.0_f64;
        for i in (j + 1)..n {
            worst = worst.max(kind_distance(&seq[i], &seq[j], Flavor::L1Inf, quad)?.value);
            if worst >= threshold {
                break;
            }
        }
        if worst < threshold {
            return Ok((j, worst));
        }
        best = best.min(worst);
    }
    Err(Error::NotCauchy {
        threshold,
        margin: best,
    })
}

/// `max_{t,x} |∇F_t|` bound on 64 time nodes.
fn spatial_lipschitz(iso: &CoIsotopy) -> f64 {
    (0..=64)
        .map(|i| {
            iso.generator_fourier(i as f64 / 64.0)
                .map_or(0.0, |f| f.lipschitz_bound())
        })
        .fold(0.0, f64::max)
}

/// Inputs for the second Cauchy-sequence item: two translations `λ`, `μ` of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationPair {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

/// Exhibits `j₀`, `δ = ε/(3C(F_{j₀},η))` and `τ = ε/(6·Lip_x F_{j₀})`, then
/// measures both items on `i = j₀..j₀+8`.
pub fn verify_rl3(
    seq: &[CoIsotopy],
    xi1: &ReparamCurve,
    xi2: &ReparamCurve,
    translations: &TranslationPair,
    epsilon: f64,
    quad: &QuadratureOptions,
    lip: &LipschitzOptions,
) -> Result<VerificationReport> {
    if seq.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    let (j0, tail) = if seq.len() == 1 {
        (0, 0.0)
    } else {
        find_j0(seq, epsilon / 3.0, quad)?
    };
    let c = lipschitz_constants(&seq[j0], lip)?.c_of_f_eta;
    let delta = if c > 0.0 { epsilon / (3.0 * c) } else { f64::MAX };
    let lx = spatial_lipschitz(&seq[j0]);
    let tau = if lx > 0.0 { epsilon / (6.0 * lx) } else { f64::MAX };
    let ham = ham_norm_diff(xi1, xi2);
    let model: ModelSpec = seq[0].model();
    let shift = model.distance(
        &Point::from_slice(&translations.lambda),
        &Point::from_slice(&translations.mu),
    );
    let window = j0..(j0 + 9).min(seq.len());
    let mut r = VerificationReport::new("rl3");
    r.info("j0", j0 as f64)
        .info("tail_distance", tail)
        .info("delta", delta)
        .info("tau", tau)
        .info("ham_norm", ham)
        .info("translation_distance", shift);
    let hyp1 = ham < delta;
    let hyp2 = shift < tau;
    let mut worst1 = 0.0_f64;
    let mut worst2 = 0.0_f64;
    for i in window.clone() {
        if hyp1 {
            let a = reparametrize(&seq[i], xi1)?;
            let b = reparametrize(&seq[i], xi2)?;
            worst1 = worst1.max(kind_distance(&a, &b, Flavor::L1Inf, quad)?.value);
        }
        if hyp2 {
            let a = conjugate_by_translation(&seq[i], &translations.lambda)?;
            let b = conjugate_by_translation(&seq[i], &translations.mu)?;
            worst2 = worst2.max(kind_distance(&a, &b, Flavor::L1Inf, quad)?.value);
        }
    }
    if hyp1 {
        r.check_lt("item1_distance", worst1, epsilon, "epsilon");
    } else {
        r.note("‖ξ₁ − ξ₂‖_ham ≥ δ: item (1) hypothesis not met, conclusion not tested");
    }
    if hyp2 {
        r.check_lt("item2_distance", worst2, epsilon, "epsilon");
    } else {
        r.note("d(λ, μ) ≥ τ: item (2) hypothesis not met, conclusion not tested");
    }
    r.info("window_len", window.len() as f64);
    Ok(r)
}
