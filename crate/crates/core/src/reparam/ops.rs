//! ham-norm, reparameterized isotopies, boundary flatness and the plateau
//! flattening curve.

use crate::error::{Error, Result};
use crate::fields::{CoIsotopy, Isotopy, Kind};

use super::curve::ReparamCurve;

/// Nodes for the `C⁰` part and panels for the `L¹` part of the ham-norm.
pub const HAM_NODES: usize = 4096;
/// Flatness threshold on `osc(F_t)` and `|μ_t|`.
pub const FLAT_TOL: f64 = 1e-12;

fn ham_norm_of(v: impl Fn(f64) -> f64, dv: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
    let sup = (0..=HAM_NODES)
        .map(|i| v(i as f64 / HAM_NODES as f64).abs())
        .chain(breaks.iter().map(|t| v(*t).abs()))
        .fold(0.0, f64::max);
    let (ts, ws) = crate::norms::time_rule(breaks, HAM_NODES);
    let l1: f64 = ts.iter().zip(&ws).map(|(t, w)| w * dv(*t).abs()).sum();
    sup + l1
}

/// `‖ξ‖_{C⁰} + ‖ξ̇‖_{L¹}`.
pub fn ham_norm(xi: &ReparamCurve) -> f64 {
    ham_norm_of(|t| xi.value(t), |t| xi.deriv(t), &xi.breakpoints())
}

/// `‖ξ₁ − ξ₂‖_ham`, evaluated on the difference itself.
pub fn ham_norm_diff(a: &ReparamCurve, b: &ReparamCurve) -> f64 {
    let mut br = a.breakpoints();
    br.extend(b.breakpoints());
    ham_norm_of(
        |t| a.value(t) - b.value(t),
        |t| a.deriv(t) - b.deriv(t),
        &br,
    )
}

/// `‖ξ − ξ'‖_{C⁰}` on the ham-norm nodes.
pub fn c0_diff(a: &ReparamCurve, b: &ReparamCurve) -> f64 {
    (0..=HAM_NODES)
        .map(|i| i as f64 / HAM_NODES as f64)
        .chain(a.breakpoints())
        .chain(b.breakpoints())
        .map(|t| (a.value(t) - b.value(t)).abs())
        .fold(0.0, f64::max)
}

/// `Φ^ζ: t ↦ φ_{ζ(t)}`, generated by `ζ̇(t) F_{ζ(t)}`.
pub fn reparametrize(iso: &CoIsotopy, zeta: &ReparamCurve) -> Result<CoIsotopy> {
    iso.warped(zeta.clone())
}

fn boundary_nodes(delta: f64) -> impl Iterator<Item = f64> {
    const PER_SIDE: usize = 64;
    let h = delta / PER_SIDE as f64;
    (0..PER_SIDE)
        .map(move |i| i as f64 * h)
        .chain((1..=PER_SIDE).map(move |i| 1.0 - delta + i as f64 * h))
}

/// Largest flatness residual over the boundary layers `[0,δ) ∪ (1−δ,1]`.
pub fn boundary_residual(iso: &CoIsotopy, delta: f64) -> f64 {
    boundary_nodes(delta)
        .map(|t| {
            let f = iso
                .generator_fourier(t)
                .map_or(0.0, |f| 2.0 * f.without_mean().sup_bound());
            let h = iso.harmonic().map_or(0.0, |_| {
                crate::fields::verify::FieldData::of(iso, t)
                    .components
                    .iter()
                    .map(|c| c.mean().abs())
                    .fold(0.0, f64::max)
            });
            let mu = if iso.kind() == Kind::AlmostCoHamiltonian {
                (0..32)
                    .map(|k| iso.mu(k as f64 * std::f64::consts::TAU / 32.0, t).abs())
                    .fold(0.0, f64::max)
            } else {
                0.0
            };
            f.max(h).max(mu)
        })
        .fold(0.0, f64::max)
}

/// `osc(F_t)` (and `|μ_t|` for the almost kind) vanish on `[0,δ) ∪ (1−δ,1]`.
pub fn is_boundary_flat(iso: &CoIsotopy, delta: f64) -> bool {
    delta > 0.0 && delta < 1.0 && boundary_residual(iso, delta) <= FLAT_TOL
}

/// Plateau curve with `δ = min(ε/6, 1/13)`.
pub fn flatten_curve(epsilon: f64) -> Result<ReparamCurve> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(ReparamCurve::SmoothPlateau {
        delta: (epsilon / 6.0).min(1.0 / 13.0),
    })
}

pub fn plateau_delta(c: &ReparamCurve) -> Option<f64> {
    match c {
        ReparamCurve::SmoothPlateau { delta } => Some(*delta),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{FourierScalar, ModelSpec};

    #[test]
    fn ham_norm_examples() {
        assert!((ham_norm(&ReparamCurve::Identity) - 2.0).abs() < 1e-12);
        assert_eq!(ham_norm(&ReparamCurve::zero()), 0.0);
        assert!((ham_norm(&ReparamCurve::polynomial(&[0.0, 0.0, 1.0])) - 2.0).abs() < 1e-12);
        let sq = ReparamCurve::polynomial(&[0.0, 0.0, 1.0]);
        // t − t²: sup 1/4, ∫|1 − 2t| = 1/2
        assert!((ham_norm_diff(&ReparamCurve::Identity, &sq) - 0.75).abs() < 1e-9);
        assert_eq!(ham_norm_diff(&sq, &sq), 0.0);
    }

    #[test]
    fn flatten_curve_examples() {
        let c = flatten_curve(0.6).unwrap();
        let d = plateau_delta(&c).unwrap();
        assert!((d - 1.0 / 13.0).abs() < 1e-15);
        assert!(c.max_deriv() <= 1.30);
        let c = flatten_curve(0.06).unwrap();
        assert!((plateau_delta(&c).unwrap() - 0.01).abs() < 1e-15);
        assert!(c0_diff(&c, &ReparamCurve::Identity) <= 0.03);
        assert!(matches!(flatten_curve(1.5), Err(Error::InvalidEpsilon(_))));
        assert!(matches!(flatten_curve(0.0), Err(Error::InvalidEpsilon(_))));
        for eps in [0.9, 0.3, 0.01] {
            let c = flatten_curve(eps).unwrap();
            let d = plateau_delta(&c).unwrap();
            assert!((c.value(0.5) - 0.5).abs() <= 3.0 * d);
            assert!(c0_diff(&c, &ReparamCurve::Identity) < eps);
            assert!(c.max_deriv() <= 2.0 && c.is_monotone());
        }
    }

    #[test]
    fn flatness() {
        let f = FourierScalar::single(3, &[0, 1, 0], 0.0, 1.0).unwrap();
        let iso = CoIsotopy::autonomous(ModelSpec::circle(1), &f, 64).unwrap();
        assert!(!is_boundary_flat(&iso, 0.05));
        let c = flatten_curve(0.3).unwrap();
        let flat = reparametrize(&iso, &c).unwrap();
        assert!(is_boundary_flat(&flat, plateau_delta(&c).unwrap()));
        assert!(is_boundary_flat(&CoIsotopy::identity(ModelSpec::circle(1), 8), 0.4));
    }
}
