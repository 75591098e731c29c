use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported half-dimension of the symplectic factor.
pub const MAX_HALF_DIM: usize = 3;
pub const MAX_DIM: usize = 2 * MAX_HALF_DIM + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZTopology {
    Circle,
    Line,
}

/// `T^{2n} × S¹` (or `T^{2n} × R`) with `η = dz`, `ω = Σ dx_i ∧ dy_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n: usize,
    pub z_topology: ZTopology,
}

impl ModelSpec {
    pub fn new(n: usize, z_topology: ZTopology) -> Result<Self> {
        if n == 0 || n > MAX_HALF_DIM {
            return Err(Error::InvalidDimension(format!(
                "half-dimension must be in 1..={MAX_HALF_DIM}, got {n}"
            )));
        }
        Ok(Self { n, z_topology })
    }

    pub fn circle(n: usize) -> Self {
        Self::new(n, ZTopology::Circle).expect("valid half-dimension")
    }

    pub fn line(n: usize) -> Self {
        Self::new(n, ZTopology::Line).expect("valid half-dimension")
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.n, self.z_topology).map(|_| ())
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn x_index(&self, i: usize) -> usize {
        i
    }

    pub fn y_index(&self, i: usize) -> usize {
        self.n + i
    }

    pub fn z_index(&self) -> usize {
        2 * self.n
    }

    pub fn is_circle(&self) -> bool {
        self.z_topology == ZTopology::Circle
    }

    pub fn is_periodic(&self, coord: usize) -> bool {
        coord < 2 * self.n || self.is_circle()
    }

    /// `∫_M η∧ω^n` in the coordinate normalization `dx_1…dy_n dz`.
    pub fn volume(&self) -> Result<f64> {
        match self.z_topology {
            ZTopology::Circle => Ok(TAU.powi(self.dim() as i32)),
            ZTopology::Line => Err(Error::UnboundedDomain),
        }
    }

    /// Shortest signed difference `b - a` coordinatewise (circular where periodic).
    pub fn difference(&self, a: &Coords, b: &Coords) -> Coords {
        let mut d = Coords::zeros(self.dim());
        for i in 0..self.dim() {
            let raw = b[i] - a[i];
            d[i] = if self.is_periodic(i) { wrap_signed(raw) } else { raw };
        }
        d
    }

    /// Flat distance: per-coordinate circular distance, Euclidean combination.
    pub fn distance(&self, a: &Coords, b: &Coords) -> f64 {
        self.difference(a, b).norm()
    }

    pub fn reduce(&self, p: &Coords) -> Coords {
        let mut q = *p;
        for i in 0..self.dim() {
            if self.is_periodic(i) {
                q[i] = p[i].rem_euclid(TAU);
                if q[i] >= TAU {
                    q[i] = 0.0;
                }
            }
        }
        q
    }
}

/// Maps an angle difference into `[-π, π)`.
pub fn wrap_signed(d: f64) -> f64 {
    let r = (d + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
    if r >= std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

/// Fixed-capacity coordinate vector, used for points, tangent vectors and covectors.
#[derive(Clone, Copy, PartialEq)]
pub struct Coords {
    data: [f64; MAX_DIM],
    dim: usize,
}

pub type Point = Coords;
pub type Tangent = Coords;
pub type Covector = Coords;

impl Coords {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        Self {
            data: [0.0; MAX_DIM],
            dim,
        }
    }

    pub fn from_slice(v: &[f64]) -> Self {
        let mut c = Self::zeros(v.len());
        c.data[..v.len()].copy_from_slice(v);
        c
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut c = Self::zeros(dim);
        c[i] = 1.0;
        c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.dim]
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data[..self.dim]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.as_slice().to_vec()
    }

    pub fn norm(&self) -> f64 {
        self.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn dot(&self, other: &Coords) -> f64 {
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn add_scaled(&self, other: &Coords, s: f64) -> Coords {
        let mut out = *self;
        for i in 0..self.dim {
            out.data[i] += s * other.data[i];
        }
        out
    }

    pub fn sub(&self, other: &Coords) -> Coords {
        self.add_scaled(other, -1.0)
    }

    pub fn scale(&self, s: f64) -> Coords {
        let mut out = *self;
        for v in out.as_mut_slice() {
            *v *= s;
        }
        out
    }
}

impl Index<usize> for Coords {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        debug_assert!(i < self.dim);
        &self.data[i]
    }
}

impl IndexMut<usize> for Coords {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        debug_assert!(i < self.dim);
        &mut self.data[i]
    }
}

impl fmt::Debug for Coords {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Serialize for Coords {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Coords {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        if v.is_empty() || v.len() > MAX_DIM {
            return Err(serde::de::Error::custom(format!(
                "coordinate vector must have 1..={MAX_DIM} entries"
            )));
        }
        Ok(Coords::from_slice(&v))
    }
}

/// `I_{η,ω}(X) = ι(X)ω + η(X)η` on the flat model:
/// `Σ a_i ∂x_i + b_i ∂y_i + c ∂z ↦ Σ a_i dy_i − b_i dx_i + c dz`.
pub fn pairing_i(x: &Tangent, model: &ModelSpec) -> Covector {
    let n = model.n;
    let mut out = Covector::zeros(model.dim());
    for i in 0..n {
        out[i] = -x[n + i];
        out[n + i] = x[i];
    }
    out[2 * n] = x[2 * n];
    out
}

/// Inverse of [`pairing_i`].
pub fn pairing_i_inverse(alpha: &Covector, model: &ModelSpec) -> Tangent {
    let n = model.n;
    let mut out = Tangent::zeros(model.dim());
    for i in 0..n {
        out[i] = alpha[n + i];
        out[n + i] = -alpha[i];
    }
    out[2 * n] = alpha[2 * n];
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_examples() {
        let m = ModelSpec::circle(1);
        let dx = pairing_i(&Coords::unit(3, 0), &m);
        assert_eq!(dx.as_slice(), &[0., 1., 0.]);
        let xi = pairing_i(&Coords::unit(3, 2), &m);
        assert_eq!(xi.as_slice(), &[0., 0., 1.]);
        let v = pairing_i(&Coords::from_slice(&[1., -2., 3.]), &m);
        assert_eq!(v.as_slice(), &[2., 1., 3.]);
    }

    #[test]
    fn pairing_round_trip_n2() {
        let m = ModelSpec::circle(2);
        let a = Coords::from_slice(&[0.3, -1.2, 2.5, 0.7, -0.1]);
        let back = pairing_i(&pairing_i_inverse(&a, &m), &m);
        for i in 0..5 {
            assert!((back[i] - a[i]).abs() <= 1e-14);
        }
    }

    #[test]
    fn volume_and_topology() {
        assert!((ModelSpec::circle(1).volume().unwrap() - TAU.powi(3)).abs() < 1e-12);
        assert_eq!(ModelSpec::line(1).volume(), Err(Error::UnboundedDomain));
        assert!(ModelSpec::new(0, ZTopology::Circle).is_err());
    }

    #[test]
    fn wrapped_distance() {
        let m = ModelSpec::circle(1);
        let a = Coords::from_slice(&[0.1, 0.0, 6.2]);
        let b = Coords::from_slice(&[TAU - 0.1, 0.0, 0.1]);
        let d = m.difference(&a, &b);
        assert!((d[0] + 0.2).abs() < 1e-12);
        assert!((d[2] - (0.1 + TAU - 6.2)).abs() < 1e-12);
        let line = ModelSpec::line(1);
        assert!((line.difference(&a, &b)[2] - (0.1 - 6.2)).abs() < 1e-12);
    }

    #[test]
    fn reduce_into_fundamental_domain() {
        let m = ModelSpec::circle(1);
        let p = m.reduce(&Coords::from_slice(&[-0.5, 7.0, TAU]));
        assert!((p[0] - (TAU - 0.5)).abs() < 1e-12);
        assert!((p[1] - (7.0 - TAU)).abs() < 1e-12);
        assert_eq!(p[2], 0.0);
    }
}
