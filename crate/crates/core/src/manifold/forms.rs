//! One-forms with Fourier coefficients, exterior derivative, Hodge split.

use serde::{Deserialize, Serialize};

use super::fourier::{FourierScalar, FourierTerm};
use super::model::{Covector, ModelSpec};
use crate::error::{Error, Result};

/// `Σ α_d dθ_d` in the coordinate order `dx₁..dxₙ, dy₁..dyₙ, dz`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneFormField {
    components: Vec<FourierScalar>,
}

/// Relative round-off allowance for coefficient comparisons.
const COEFF_RTOL: f64 = 1e-13;

impl OneFormField {
    pub fn new(components: Vec<FourierScalar>) -> Result<Self> {
        let dim = components.len();
        if dim == 0 || components.iter().any(|c| c.dim() != dim) {
            return Err(Error::InvalidDimension(
                "one-form needs one coefficient per coordinate".into(),
            ));
        }
        Ok(Self { components })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            components: vec![FourierScalar::zero(dim); dim],
        }
    }

    /// Constant-coefficient form `Σ c_d dθ_d`.
    pub fn constant(coeffs: &[f64]) -> Self {
        let dim = coeffs.len();
        Self {
            components: coeffs
                .iter()
                .map(|c| FourierScalar::constant(dim, *c))
                .collect(),
        }
    }

    /// The coordinate differential `dθ_d`.
    pub fn basis(dim: usize, d: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[d] = 1.0;
        Self::constant(&c)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[FourierScalar] {
        &self.components
    }

    pub fn component(&self, d: usize) -> &FourierScalar {
        &self.components[d]
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn eval(&self, p: &[f64]) -> Covector {
        let mut out = Covector::zeros(self.dim());
        for (d, c) in self.components.iter().enumerate() {
            out[d] = c.eval(p);
        }
        out
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(|c| c.active_dims().is_empty())
    }

    /// Zero-mode coefficients.
    pub fn means(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.mean()).collect()
    }

    /// Largest `|∂_i α_j − ∂_j α_i|` Fourier coefficient.
    pub fn closedness_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let curl = self.components[j]
                    .partial(i)
                    .sub(&self.components[i].partial(j));
                worst = worst.max(curl.max_abs_coefficient());
            }
        }
        worst
    }

    fn coefficient_scale(&self) -> f64 {
        let k = self
            .components
            .iter()
            .flat_map(|c| c.terms().iter())
            .flat_map(|t| t.k.iter())
            .fold(1.0_f64, |m, v| m.max(v.unsigned_abs() as f64));
        let a = self
            .components
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.max_abs_coefficient()));
        k * a
    }

    /// Exact test on coefficients, up to floating round-off.
    pub fn is_closed(&self) -> bool {
        self.closedness_defect() <= COEFF_RTOL * self.coefficient_scale().max(1.0)
    }

    pub fn check_closed(&self) -> Result<()> {
        if self.is_closed() {
            Ok(())
        } else {
            Err(Error::NotClosed {
                mismatch: self.closedness_defect(),
            })
        }
    }
}

/// `dF`.
pub fn d(f: &FourierScalar) -> OneFormField {
    OneFormField {
        components: (0..f.dim()).map(|i| f.partial(i)).collect(),
    }
}

/// `α = harmonic + dU` with `harmonic` constant-coefficient and `U` zero-mean.
pub fn hodge_split(alpha: &OneFormField) -> Result<(OneFormField, FourierScalar)> {
    alpha.check_closed()?;
    let dim = alpha.dim();
    let harmonic = OneFormField::constant(&alpha.means());
    // each nonzero frequency of U is read off the first coordinate it moves
    let mut terms = Vec::new();
    for (d, comp) in alpha.components.iter().enumerate() {
        for t in comp.terms() {
            let lead = t.k.iter().position(|v| *v != 0);
            if lead != Some(d) {
                continue;
            }
            let kd = t.k[d] as f64;
            terms.push(FourierTerm {
                k: t.k.clone(),
                a: -t.b / kd,
                b: t.a / kd,
            });
        }
    }
    let primitive = FourierScalar::from_terms(dim, terms)?;
    Ok((harmonic, primitive))
}

/// `sqrt(Vol · Σ c_d²)` for a constant-coefficient form.
pub fn l2_norm_harmonic(h: &OneFormField, model: &ModelSpec) -> Result<f64> {
    if !h.is_constant() {
        return Err(Error::NonConstantForm);
    }
    let vol = model.volume()?;
    Ok((vol * h.means().iter().map(|c| c * c).sum::<f64>()).sqrt())
}

/// `∫_M F η∧ωⁿ` from the zero mode.
pub fn integrate(f: &FourierScalar, model: &ModelSpec) -> Result<f64> {
    Ok(f.mean() * model.volume()?)
}

/// Serialized form: one coefficient list per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneFormRecord(pub Vec<Vec<FourierTerm>>);

impl OneFormField {
    pub fn from_record(rec: &OneFormRecord, model: &ModelSpec) -> Result<Self> {
        let dim = model.dim();
        if rec.0.len() != dim {
            return Err(Error::InvalidDimension(format!(
                "one-form has {} components, model needs {dim}",
                rec.0.len()
            )));
        }
        Self::new(
            rec.0
                .iter()
                .map(|terms| FourierScalar::from_records(dim, terms))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn to_record(&self) -> OneFormRecord {
        OneFormRecord(self.components.iter().map(|c| c.to_records()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn term(k: &[i32], a: f64, b: f64) -> FourierTerm {
        FourierTerm { k: k.to_vec(), a, b }
    }

    #[test]
    fn integrate_examples() {
        let m = ModelSpec::circle(1);
        let one = FourierScalar::constant(3, 1.0);
        assert!((integrate(&one, &m).unwrap() - TAU.powi(3)).abs() < 1e-10);
        let s = FourierScalar::single(3, &[1, 0, 0], 0.0, 1.0).unwrap();
        assert_eq!(integrate(&s, &m).unwrap(), 0.0);
        let f = FourierScalar::from_terms(3, [term(&[0, 0, 0], 3.0, 0.0), term(&[0, 2, 0], 1.0, 0.0)])
            .unwrap();
        assert!((integrate(&f, &m).unwrap() - 3.0 * TAU.powi(3)).abs() < 1e-10);
        assert_eq!(integrate(&f, &ModelSpec::line(1)), Err(Error::UnboundedDomain));
    }

    #[test]
    fn split_three_dx_plus_dsin() {
        // (3 + cos x) dx
        let a0 = FourierScalar::from_terms(3, [term(&[0, 0, 0], 3.0, 0.0), term(&[1, 0, 0], 1.0, 0.0)])
            .unwrap();
        let alpha = OneFormField::new(vec![a0, FourierScalar::zero(3), FourierScalar::zero(3)]).unwrap();
        let (h, u) = hodge_split(&alpha).unwrap();
        assert_eq!(h.means(), vec![3.0, 0.0, 0.0]);
        assert_eq!(u, FourierScalar::single(3, &[1, 0, 0], 0.0, 1.0).unwrap());
    }

    #[test]
    fn split_dz_and_exact() {
        let (h, u) = hodge_split(&OneFormField::basis(3, 2)).unwrap();
        assert_eq!(h.means(), vec![0.0, 0.0, 1.0]);
        assert!(u.is_zero());
        let f = FourierScalar::single(3, &[1, 1, 0], 1.0, 0.0).unwrap();
        let (h, u) = hodge_split(&d(&f)).unwrap();
        assert!(h.means().iter().all(|c| *c == 0.0));
        assert_eq!(u, f);
    }

    #[test]
    fn not_closed_rejected() {
        // x-dependent dz coefficient: d(cos x dz) ≠ 0
        let bad = OneFormField::new(vec![
            FourierScalar::zero(3),
            FourierScalar::zero(3),
            FourierScalar::single(3, &[1, 0, 0], 1.0, 0.0).unwrap(),
        ])
        .unwrap();
        assert!(matches!(hodge_split(&bad), Err(Error::NotClosed { .. })));
    }

    #[test]
    fn harmonic_norms() {
        let m = ModelSpec::circle(1);
        assert_eq!(l2_norm_harmonic(&OneFormField::zero(3), &m).unwrap(), 0.0);
        let dx = l2_norm_harmonic(&OneFormField::basis(3, 0), &m).unwrap();
        assert!((dx - TAU.powf(1.5)).abs() < 1e-10);
        let h = l2_norm_harmonic(&OneFormField::constant(&[0.0, 3.0, 4.0]), &m).unwrap();
        assert!((h - 5.0 * TAU.powf(1.5)).abs() < 1e-9);
        let f = FourierScalar::single(3, &[1, 0, 0], 1.0, 0.0).unwrap();
        assert_eq!(l2_norm_harmonic(&d(&f), &m), Err(Error::NonConstantForm));
    }
}
