//! Time-dependent generating functions and Reeb components.
//!
//! Amplitudes are polynomials in `t` (ascending coefficients, degree ≤ 6).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::fourier::{canonical_frequency, phase_sweep};
use crate::manifold::{FourierScalar, FourierTerm, MAX_DIM};

pub const MAX_DEGREE: usize = 6;

pub(crate) fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * t + v)
}

pub(crate) fn poly_deriv(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(j, v)| j as f64 * v)
        .collect()
}

fn poly_add(a: &mut Vec<f64>, b: &[f64], s: f64) {
    if a.len() < b.len() {
        a.resize(b.len(), 0.0);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += s * y;
    }
}

fn poly_trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.last() == Some(&0.0) {
        c.pop();
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeTerm {
    pub k: Vec<i32>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// `Σ_k a_k(t) cos(k·θ) + b_k(t) sin(k·θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFourier {
    dim: usize,
    terms: Vec<TimeTerm>,
    max_k: [u32; MAX_DIM],
}

impl TimeFourier {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
            max_k: [0; MAX_DIM],
        }
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = TimeTerm>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidDimension(format!("generator dimension {dim}")));
        }
        let mut merged: BTreeMap<Vec<i32>, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for t in terms {
            if t.k.len() != dim {
                return Err(Error::InvalidDimension(format!(
                    "frequency {:?} does not have {dim} entries",
                    t.k
                )));
            }
            if t.a.len() > MAX_DEGREE + 1 || t.b.len() > MAX_DEGREE + 1 {
                return Err(Error::InvalidGenerator(format!(
                    "amplitude degree exceeds {MAX_DEGREE}"
                )));
            }
            if t.a.iter().chain(&t.b).any(|v| !v.is_finite()) {
                return Err(Error::InvalidGenerator("non-finite amplitude".into()));
            }
            let (k, flip) = canonical_frequency(&t.k);
            let zero_mode = k.iter().all(|v| *v == 0);
            let e = merged.entry(k).or_default();
            poly_add(&mut e.0, &t.a, 1.0);
            if !zero_mode {
                poly_add(&mut e.1, &t.b, if flip { -1.0 } else { 1.0 });
            }
        }
        let terms: Vec<TimeTerm> = merged
            .into_iter()
            .map(|(k, (a, b))| TimeTerm {
                k,
                a: poly_trim(a),
                b: poly_trim(b),
            })
            .filter(|t| !t.a.is_empty() || !t.b.is_empty())
            .collect();
        let mut max_k = [0u32; MAX_DIM];
        for t in &terms {
            for (d, kd) in t.k.iter().enumerate() {
                max_k[d] = max_k[d].max(kd.unsigned_abs());
            }
        }
        Ok(Self { dim, terms, max_k })
    }

    pub fn autonomous(f: &FourierScalar) -> Self {
        Self::from_terms(
            f.dim(),
            f.terms().iter().map(|t| TimeTerm {
                k: t.k.clone(),
                a: vec![t.a],
                b: vec![t.b],
            }),
        )
        .expect("scalar terms are valid")
    }

    /// `t ↦ p(t)·f` for a polynomial `p`.
    pub fn modulated(f: &FourierScalar, p: &[f64]) -> Self {
        Self::from_terms(
            f.dim(),
            f.terms().iter().map(|t| TimeTerm {
                k: t.k.clone(),
                a: p.iter().map(|c| c * t.a).collect(),
                b: p.iter().map(|c| c * t.b).collect(),
            }),
        )
        .expect("scalar terms are valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[TimeTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_autonomous(&self) -> bool {
        self.terms.iter().all(|t| t.a.len() <= 1 && t.b.len() <= 1)
    }

    pub fn depends_on(&self, d: usize) -> bool {
        self.max_k[d] > 0
    }

    pub fn frequencies(&self) -> Vec<Vec<i32>> {
        self.terms.iter().map(|t| t.k.clone()).collect()
    }

    pub fn at(&self, t: f64) -> FourierScalar {
        FourierScalar::from_terms(
            self.dim,
            self.terms.iter().map(|tt| FourierTerm {
                k: tt.k.clone(),
                a: poly_eval(&tt.a, t),
                b: poly_eval(&tt.b, t),
            }),
        )
        .expect("evaluated terms are valid")
    }

    /// `∂_t F` at time `t`.
    pub fn dt_at(&self, t: f64) -> FourierScalar {
        FourierScalar::from_terms(
            self.dim,
            self.terms.iter().map(|tt| FourierTerm {
                k: tt.k.clone(),
                a: poly_eval(&poly_deriv(&tt.a), t),
                b: poly_eval(&poly_deriv(&tt.b), t),
            }),
        )
        .expect("evaluated terms are valid")
    }

    /// Zero-mode amplitude `a₀(t)`.
    pub fn mean_at(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .find(|tt| tt.k.iter().all(|v| *v == 0))
            .map_or(0.0, |tt| poly_eval(&tt.a, t))
    }

    pub fn eval(&self, t: f64, p: &[f64]) -> f64 {
        let mut v = 0.0;
        phase_sweep(self.dim, &self.max_k, &self.terms, |tt| &tt.k, p, |tt, c, s| {
            v += poly_eval(&tt.a, t) * c + poly_eval(&tt.b, t) * s;
        });
        v
    }

    pub fn eval_grad(&self, t: f64, p: &[f64], grad: &mut [f64]) -> f64 {
        grad[..self.dim].fill(0.0);
        let mut v = 0.0;
        phase_sweep(self.dim, &self.max_k, &self.terms, |tt| &tt.k, p, |tt, c, s| {
            let a = poly_eval(&tt.a, t);
            let b = poly_eval(&tt.b, t);
            v += a * c + b * s;
            let dv = b * c - a * s;
            for (d, kd) in tt.k.iter().enumerate() {
                if *kd != 0 {
                    grad[d] += *kd as f64 * dv;
                }
            }
        });
        v
    }

    /// Value, `∂/∂θ_d` for one coordinate `d` (used by 1-D Reeb components).
    pub fn eval_partial(&self, t: f64, p: &[f64], d: usize) -> (f64, f64) {
        let mut v = 0.0;
        let mut g = 0.0;
        phase_sweep(self.dim, &self.max_k, &self.terms, |tt| &tt.k, p, |tt, c, s| {
            let a = poly_eval(&tt.a, t);
            let b = poly_eval(&tt.b, t);
            v += a * c + b * s;
            g += tt.k[d] as f64 * (b * c - a * s);
        });
        (v, g)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(
            self.dim,
            self.terms.iter().map(|t| TimeTerm {
                k: t.k.clone(),
                a: t.a.iter().map(|v| v * s).collect(),
                b: t.b.iter().map(|v| v * s).collect(),
            }),
        )
        .expect("scaled terms are valid")
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.dim, self.terms.iter().chain(&other.terms).cloned())
            .expect("merged terms are valid")
    }

    /// `θ ↦ F_t(θ + s)`.
    pub fn translate(&self, s: &[f64]) -> Self {
        Self::from_terms(
            self.dim,
            self.terms.iter().map(|tt| {
                let phase: f64 = tt.k.iter().zip(s).map(|(k, v)| *k as f64 * v).sum();
                let (sn, cs) = phase.sin_cos();
                let mut a = Vec::new();
                poly_add(&mut a, &tt.a, cs);
                poly_add(&mut a, &tt.b, sn);
                let mut b = Vec::new();
                poly_add(&mut b, &tt.b, cs);
                poly_add(&mut b, &tt.a, -sn);
                TimeTerm { k: tt.k.clone(), a, b }
            }),
        )
        .expect("translated terms are valid")
    }

    /// Keeps only the terms whose frequency passes `keep`.
    pub fn filter(&self, keep: impl Fn(&[i32]) -> bool) -> Self {
        Self::from_terms(self.dim, self.terms.iter().filter(|t| keep(&t.k)).cloned())
            .expect("subset of valid terms")
    }

    /// `Σ ‖k‖·(‖a‖₁ + ‖b‖₁)` over coefficient magnitudes; bounds the Lipschitz
    /// constant of every `F_t` for `t ∈ [0,1]`.
    pub fn lipschitz_envelope(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let kn = crate::manifold::fourier::knorm(&t.k);
                let amp: f64 = t.a.iter().chain(&t.b).map(|v| v.abs()).sum();
                kn * amp
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    ZeroMean,
    #[default]
    Raw,
}

/// Amplitude in a term record: a constant or ascending polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Constant(f64),
    Poly(Vec<f64>),
}

impl Default for Amplitude {
    fn default() -> Self {
        Amplitude::Constant(0.0)
    }
}

impl Amplitude {
    fn coeffs(&self) -> Vec<f64> {
        match self {
            Amplitude::Constant(c) => vec![*c],
            Amplitude::Poly(p) => p.clone(),
        }
    }

    fn from_coeffs(c: &[f64]) -> Self {
        match c {
            [] => Amplitude::Constant(0.0),
            [v] => Amplitude::Constant(*v),
            _ => Amplitude::Poly(c.to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub k: Vec<i32>,
    #[serde(default)]
    pub a: Amplitude,
    #[serde(default)]
    pub b: Amplitude,
}

impl TimeFourier {
    pub fn from_records(dim: usize, recs: &[TermRecord]) -> Result<Self> {
        Self::from_terms(
            dim,
            recs.iter().map(|r| TimeTerm {
                k: r.k.clone(),
                a: r.a.coeffs(),
                b: r.b.coeffs(),
            }),
        )
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|t| TermRecord {
                k: t.k.clone(),
                a: Amplitude::from_coeffs(&t.a),
                b: Amplitude::from_coeffs(&t.b),
            })
            .collect()
    }
}

/// Generating function `F_t` on the model; never depends on `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    f: TimeFourier,
    normalization: Normalization,
}

impl Generator {
    pub fn new(f: TimeFourier, normalization: Normalization) -> Result<Self> {
        if normalization == Normalization::ZeroMean
            && f.terms().iter().any(|t| t.k.iter().all(|v| *v == 0))
        {
            return Err(Error::InvalidGenerator(
                "zero-mean generator has a nonzero constant mode".into(),
            ));
        }
        Ok(Self { f, normalization })
    }

    pub fn raw(f: TimeFourier) -> Self {
        Self {
            f,
            normalization: Normalization::Raw,
        }
    }

    pub fn fourier(&self) -> &TimeFourier {
        &self.f
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }
}

/// `c(z, t)`, the `∂z` component of the field; a Fourier series in `z` alone.
#[derive(Debug, Clone, PartialEq)]
pub struct ReebComponent {
    c: TimeFourier,
}

impl ReebComponent {
    pub fn new(c: TimeFourier) -> Result<Self> {
        if c.dim() != 1 {
            return Err(Error::InvalidDimension(
                "Reeb component is a series in z only".into(),
            ));
        }
        Ok(Self { c })
    }

    /// `c(z,t) = p(t)`.
    pub fn spatially_constant(p: &[f64]) -> Self {
        Self {
            c: TimeFourier::from_terms(
                1,
                [TimeTerm {
                    k: vec![0],
                    a: p.to_vec(),
                    b: vec![],
                }],
            )
            .expect("constant Reeb term is valid"),
        }
    }

    pub fn constant(c0: f64) -> Self {
        Self::spatially_constant(&[c0])
    }

    pub fn series(&self) -> &TimeFourier {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero()
    }

    pub fn depends_on_z(&self) -> bool {
        self.c.depends_on(0)
    }

    pub fn value(&self, z: f64, t: f64) -> f64 {
        self.c.eval(t, &[z])
    }

    /// `(c, ∂c/∂z)`.
    pub fn value_and_slope(&self, z: f64, t: f64) -> (f64, f64) {
        self.c.eval_partial(t, &[z], 0)
    }

    /// `∂c/∂t`.
    pub fn time_derivative(&self, z: f64, t: f64) -> f64 {
        self.c.dt_at(t).eval(&[z])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { c: self.c.scale(s) }
    }

    /// Coefficient-sum bound on `sup_z |c(z,t)|` over `t ∈ [0,1]`.
    pub fn sup_envelope(&self) -> f64 {
        self.c
            .terms()
            .iter()
            .map(|t| t.a.iter().chain(&t.b).map(|v| v.abs()).sum::<f64>())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_amplitudes() {
        let f = TimeFourier::from_terms(
            3,
            [TimeTerm {
                k: vec![0, 1, 0],
                a: vec![],
                b: vec![0.0, 1.0],
            }],
        )
        .unwrap();
        // F_t = t sin y
        let p = [0.2, 0.7, 0.1];
        assert!((f.eval(0.5, &p) - 0.5 * 0.7f64.sin()).abs() < 1e-15);
        let mut g = [0.0; 3];
        f.eval_grad(0.5, &p, &mut g);
        assert!((g[1] - 0.5 * 0.7f64.cos()).abs() < 1e-15);
        assert_eq!(f.dt_at(0.3), FourierScalar::single(3, &[0, 1, 0], 0.0, 1.0).unwrap());
        assert!(!f.is_autonomous());
    }

    #[test]
    fn negative_frequencies_merge() {
        let f = TimeFourier::from_terms(
            3,
            [
                TimeTerm { k: vec![-1, 0, 0], a: vec![1.0], b: vec![1.0] },
                TimeTerm { k: vec![1, 0, 0], a: vec![0.0], b: vec![1.0] },
            ],
        )
        .unwrap();
        // sin(−x) + sin(x) = 0, cos survives
        assert_eq!(f.terms().len(), 1);
        assert!(f.terms()[0].b.is_empty());
    }

    #[test]
    fn degree_cap() {
        let r = TimeFourier::from_terms(
            1,
            [TimeTerm { k: vec![1], a: vec![0.0; 8], b: vec![] }],
        );
        assert!(matches!(r, Err(Error::InvalidGenerator(_))));
    }

    #[test]
    fn record_amplitudes() {
        let json = r#"[{"k":[0,1,0],"b":1.0},{"k":[1,0,0],"a":[0.0,0.5]}]"#;
        let recs: Vec<TermRecord> = serde_json::from_str(json).unwrap();
        let f = TimeFourier::from_records(3, &recs).unwrap();
        let back = TimeFourier::from_records(3, &f.to_records()).unwrap();
        assert_eq!(f, back);
        assert!((f.eval(1.0, &[0.0, 0.0, 0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_mean_rejects_constant() {
        let f = TimeFourier::autonomous(&FourierScalar::constant(3, 1.0));
        assert!(Generator::new(f, Normalization::ZeroMean).is_err());
    }

    #[test]
    fn reeb_slope() {
        let c = ReebComponent::new(TimeFourier::autonomous(
            &FourierScalar::single(1, &[1], 1.0, 0.0).unwrap(),
        ))
        .unwrap();
        let (v, s) = c.value_and_slope(0.4, 0.0);
        assert!((v - 0.4f64.cos()).abs() < 1e-15);
        assert!((s + 0.4f64.sin()).abs() < 1e-15);
    }
}
