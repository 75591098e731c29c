//! Seeded random scenario ingredients.

use rand::Rng;

use crate::fields::{ReebComponent, TimeFourier, TimeTerm};
use crate::manifold::{FourierScalar, FourierTerm, ModelSpec};
use crate::reparam::ReparamCurve;

/// Shape of a random trigonometric generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigShape {
    pub max_terms: usize,
    /// Bound on each term's amplitude, uniformly in `t`.
    pub max_amp: f64,
    pub max_freq: i32,
    /// Degree of the polynomial time dependence of each coefficient.
    pub time_degree: usize,
}

impl Default for TrigShape {
    fn default() -> Self {
        Self {
            max_terms: 6,
            max_amp: 1.0,
            max_freq: 2,
            time_degree: 1,
        }
    }
}

fn frequency(rng: &mut impl Rng, active: usize, dim: usize, offset: usize, max_freq: i32) -> Vec<i32> {
    loop {
        let mut k = vec![0; dim];
        for v in k.iter_mut().skip(offset).take(active) {
            *v = rng.random_range(-max_freq..=max_freq);
        }
        if k.iter().any(|v| *v != 0) {
            return k;
        }
    }
}

/// Coefficients `c_0..c_d` with `Σ|c_j| ≤ amp`, so `|Σ c_j t^j| ≤ amp` on `[0,1]`.
fn bounded_poly(rng: &mut impl Rng, degree: usize, amp: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
    let total: f64 = raw.iter().map(|v| v.abs()).sum::<f64>().max(1e-12);
    let scale = amp * rng.random_range(0.2..1.0) / total;
    raw.iter().map(|v| v * scale).collect()
}

fn split_amp(rng: &mut impl Rng, degree: usize, amp: f64) -> (Vec<f64>, Vec<f64>) {
    let share = rng.random_range(0.0..1.0);
    (
        bounded_poly(rng, degree, amp * share),
        bounded_poly(rng, degree, amp * (1.0 - share)),
    )
}

/// Zero-mean, z-independent generator on `model`.
pub fn random_generator(rng: &mut impl Rng, model: &ModelSpec, shape: &TrigShape) -> TimeFourier {
    let dim = model.dim();
    let count = rng.random_range(1..=shape.max_terms.max(1));
    let terms: Vec<TimeTerm> = (0..count)
        .map(|_| {
            let k = frequency(rng, 2 * model.n, dim, 0, shape.max_freq);
            let (a, b) = split_amp(rng, shape.time_degree, shape.max_amp);
            TimeTerm { k, a, b }
        })
        .collect();
    TimeFourier::from_terms(dim, terms).expect("random terms are well formed")
}

pub fn random_autonomous(rng: &mut impl Rng, model: &ModelSpec, shape: &TrigShape) -> FourierScalar {
    let dim = model.dim();
    let count = rng.random_range(1..=shape.max_terms.max(1));
    let terms: Vec<FourierTerm> = (0..count)
        .map(|_| {
            let share = rng.random_range(0.0..1.0);
            let amp = shape.max_amp * rng.random_range(0.2..1.0);
            FourierTerm {
                k: frequency(rng, 2 * model.n, dim, 0, shape.max_freq),
                a: amp * share * if rng.random_bool(0.5) { 1.0 } else { -1.0 },
                b: amp * (1.0 - share) * if rng.random_bool(0.5) { 1.0 } else { -1.0 },
            }
        })
        .collect();
    FourierScalar::from_terms(dim, terms).expect("random terms are well formed")
}

/// `c(z,t)`: a constant term plus a trigonometric series in `z`.
pub fn random_reeb(rng: &mut impl Rng, shape: &TrigShape) -> ReebComponent {
    let mut terms = vec![TimeTerm {
        k: vec![0],
        a: bounded_poly(rng, shape.time_degree, shape.max_amp),
        b: vec![],
    }];
    let count = rng.random_range(1..=shape.max_terms.max(1));
    for _ in 0..count {
        let (a, b) = split_amp(rng, shape.time_degree, shape.max_amp);
        terms.push(TimeTerm {
            k: vec![rng.random_range(1..=shape.max_freq.max(1))],
            a,
            b,
        });
    }
    ReebComponent::new(TimeFourier::from_terms(1, terms).expect("random terms are well formed"))
        .expect("one-dimensional series")
}

/// `c(t)` constant in space.
pub fn random_uniform_reeb(rng: &mut impl Rng, degree: usize, amp: f64) -> ReebComponent {
    ReebComponent::spatially_constant(&bounded_poly(rng, degree, amp))
}

/// An increasing polynomial fixing `0` and `1`: a convex combination of
/// `t`, `t²`, `t³` and `3t² − 2t³`.
pub fn random_curve(rng: &mut impl Rng) -> ReparamCurve {
    let w: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
    let s: f64 = w.iter().sum::<f64>().max(1e-12);
    let w: Vec<f64> = w.iter().map(|v| v / s).collect();
    ReparamCurve::polynomial(&[0.0, w[0], w[1] + 3.0 * w[3], w[2] - 2.0 * w[3]])
}

pub fn random_translation(rng: &mut impl Rng, model: &ModelSpec) -> Vec<f64> {
    (0..model.dim())
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn curves_are_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let c = random_curve(&mut rng);
            assert!(c.is_monotone() && c.fixes_endpoints() && c.check_range().is_ok());
        }
    }

    #[test]
    fn generators_are_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = ModelSpec::circle(1);
        for _ in 0..20 {
            let f = random_generator(&mut rng, &model, &TrigShape::default());
            assert!(!f.depends_on(model.z_index()));
            for t in [0.0, 0.5, 1.0] {
                let g = f.at(t);
                assert!(g.terms().iter().all(|x| x.a.hypot(x.b) <= 6.0));
                assert_eq!(g.mean(), 0.0);
            }
        }
    }
}
