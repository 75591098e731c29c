//! Finite-dimensional cosymplectic linear algebra.
//!
//! A couple `(b, L)` on `R^d` pairs an antisymmetric bilinear form `b` with a
//! nonzero covector `L`. The pairing `Y ↦ ι(Y)b + L(Y)L` is represented by the
//! matrix `A = b + L Lᵀ`; the couple is cosymplectic when `A` is invertible.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ANTISYMMETRY_TOL: f64 = 1e-12;
const DET_REL_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CosymplecticCouple {
    b: DMatrix<f64>,
    l: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingMatrix(pub DMatrix<f64>);

/// Serialized form used by scenario files: `{dim, b: row-major, L}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoupleRecord {
    pub dim: usize,
    pub b: Vec<f64>,
    #[serde(rename = "L")]
    pub l: Vec<f64>,
}

impl CosymplecticCouple {
    pub fn new(b: DMatrix<f64>, l: DVector<f64>) -> Result<Self> {
        let d = l.len();
        if d == 0 || b.nrows() != d || b.ncols() != d {
            return Err(Error::InvalidDimension(format!(
                "b is {}x{}, L has length {}",
                b.nrows(),
                b.ncols(),
                d
            )));
        }
        let scale = b.amax().max(1.0);
        let skew = (&b + b.transpose()).amax();
        if skew > ANTISYMMETRY_TOL * scale {
            return Err(Error::InvalidArgument(format!(
                "b is not antisymmetric (|b + bᵀ|max = {skew:.3e})"
            )));
        }
        if l.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidArgument("L must be a nonzero covector".into()));
        }
        // store an exactly antisymmetric copy: upper triangle wins
        let mut b = b;
        for i in 0..d {
            b[(i, i)] = 0.0;
            for j in (i + 1)..d {
                b[(j, i)] = -b[(i, j)];
            }
        }
        Ok(Self { b, l })
    }

    pub fn from_record(rec: &CoupleRecord) -> Result<Self> {
        if rec.b.len() != rec.dim * rec.dim || rec.l.len() != rec.dim {
            return Err(Error::InvalidDimension(format!(
                "record declares dim {} but carries {} entries of b and {} of L",
                rec.dim,
                rec.b.len(),
                rec.l.len()
            )));
        }
        Self::new(
            DMatrix::from_row_slice(rec.dim, rec.dim, &rec.b),
            DVector::from_column_slice(&rec.l),
        )
    }

    pub fn to_record(&self) -> CoupleRecord {
        let d = self.dim();
        let mut b = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                b.push(self.b[(i, j)]);
            }
        }
        CoupleRecord {
            dim: d,
            b,
            l: self.l.iter().copied().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.l.len()
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn l(&self) -> &DVector<f64> {
        &self.l
    }

    pub fn with_l(&self, l: DVector<f64>) -> Result<Self> {
        Self::new(self.b.clone(), l)
    }
}

/// Normal form on `R^{2n+1}`: `b = diag(J_{2n}, 0)`, `L = e_{2n+1}`.
///
/// Coordinates are ordered `(x_1..x_n, y_1..y_n, z)` so that `b = Σ dx_i ∧ dy_i`.
pub fn canonical_couple(n: usize) -> Result<CosymplecticCouple> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    let d = 2 * n + 1;
    let mut b = DMatrix::zeros(d, d);
    for i in 0..n {
        b[(i, n + i)] = 1.0;
        b[(n + i, i)] = -1.0;
    }
    let mut l = DVector::zeros(d);
    l[d - 1] = 1.0;
    CosymplecticCouple::new(b, l)
}

pub fn build_pairing(c: &CosymplecticCouple) -> PairingMatrix {
    let l = c.l();
    PairingMatrix(c.b() + l * l.transpose())
}

impl PairingMatrix {
    pub fn symmetric_part(&self) -> DMatrix<f64> {
        (&self.0 + self.0.transpose()) * 0.5
    }

    pub fn antisymmetric_part(&self) -> DMatrix<f64> {
        (&self.0 - self.0.transpose()) * 0.5
    }

    pub fn operator_norm(&self) -> f64 {
        self.0
            .clone()
            .singular_values()
            .iter()
            .fold(0.0_f64, |m, s| m.max(*s))
    }
}

/// Scale-aware bijectivity test on the pairing matrix.
pub fn is_cosymplectic(c: &CosymplecticCouple) -> bool {
    let a = build_pairing(c);
    let det = a.0.determinant().abs();
    let norm = a.operator_norm();
    if norm == 0.0 {
        return false;
    }
    det > DET_REL_THRESHOLD * norm.powi(c.dim() as i32)
}

/// Solves `[b; L] ξ = [0; 1]` in the least-squares sense and accepts the
/// solution only when the stacked residual is at round-off level.
pub fn reeb_vector(c: &CosymplecticCouple) -> Result<DVector<f64>> {
    if !is_cosymplectic(c) {
        return Err(Error::NotCosymplectic);
    }
    let d = c.dim();
    let mut stacked = DMatrix::zeros(d + 1, d);
    stacked.view_mut((0, 0), (d, d)).copy_from(c.b());
    for j in 0..d {
        stacked[(d, j)] = c.l()[j];
    }
    let mut rhs = DVector::zeros(d + 1);
    rhs[d] = 1.0;
    let svd = stacked.clone().svd(true, true);
    let xi = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let residual = (&stacked * &xi - &rhs).norm();
    let scale = 1.0 + stacked.norm();
    if residual > 1e-9 * scale {
        return Err(Error::NoReebVector { residual });
    }
    Ok(xi)
}

/// `b'(u, v) = b(Pu, Pv)`, `L' = L ∘ P`.
pub fn pullback_couple(c: &CosymplecticCouple, p: &DMatrix<f64>) -> Result<CosymplecticCouple> {
    let d = c.dim();
    if p.nrows() != d || p.ncols() != d {
        return Err(Error::InvalidDimension(format!(
            "change of basis is {}x{}, couple has dim {d}",
            p.nrows(),
            p.ncols()
        )));
    }
    let det = p.determinant();
    if det.abs() <= 1e-12 {
        return Err(Error::SingularChangeOfBasis { det });
    }
    let b = p.transpose() * c.b() * p;
    let l = p.transpose() * c.l();
    CosymplecticCouple::new(b, l)
}
