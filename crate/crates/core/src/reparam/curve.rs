//! Time reparameterization curves `ζ: [0,1] → [0,1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes used by the derivative/range scans.
const SCAN_NODES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveRecord", into = "CurveRecord")]
pub enum ReparamCurve {
    Identity,
    /// `ζ(t) = Σ c_j t^j`.
    Polynomial(Vec<f64>),
    /// Normalized primitive of a C^∞ trapezoid vanishing on `[0,δ] ∪ [1−δ,1]`.
    SmoothPlateau { delta: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveRecord {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl TryFrom<CurveRecord> for ReparamCurve {
    type Error = String;
    fn try_from(r: CurveRecord) -> std::result::Result<Self, String> {
        match r.kind.as_str() {
            "identity" => Ok(Self::Identity),
            "polynomial" => Ok(Self::Polynomial(r.params)),
            "smooth-plateau" => match r.params.as_slice() {
                [d] if *d > 0.0 && *d <= 1.0 / 6.0 => Ok(Self::SmoothPlateau { delta: *d }),
                _ => Err("smooth-plateau needs one parameter delta in (0, 1/6]".into()),
            },
            other => Err(format!("unknown curve kind '{other}'")),
        }
    }
}

impl From<ReparamCurve> for CurveRecord {
    fn from(c: ReparamCurve) -> Self {
        let (kind, params) = match c {
            ReparamCurve::Identity => ("identity", vec![]),
            ReparamCurve::Polynomial(p) => ("polynomial", p),
            ReparamCurve::SmoothPlateau { delta } => ("smooth-plateau", vec![delta]),
        };
        CurveRecord {
            kind: kind.into(),
            params,
        }
    }
}

/// `s(u) = e^{−1/u} / (e^{−1/u} + e^{−1/(1−u)})`, 0 for u ≤ 0, 1 for u ≥ 1.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        1.0 / (1.0 + (1.0 / u - 1.0 / (1.0 - u)).exp())
    }
}

pub fn smooth_step_deriv(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let s = smooth_step(u);
    s * (1.0 - s) * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u)))
}

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// Composite 8-point Gauss–Legendre on `[a, b]`.
pub(crate) fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let mid = a + (i as f64 + 0.5) * h;
        total += GL8.iter().map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>();
    }
    0.5 * h * total
}

/// `∫_0^u s`.
pub fn smooth_step_integral(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    if u > 0.5 {
        // s(v) + s(1−v) = 1
        return u - 0.5 + smooth_step_integral(1.0 - u);
    }
    if u == 0.0 {
        return 0.0;
    }
    gauss_legendre(smooth_step, 0.0, u, 16)
}

fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * t + v)
}

fn poly_deriv_eval(c: &[f64], t: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (j, v)| acc * t + j as f64 * v)
}

impl ReparamCurve {
    pub fn polynomial(coeffs: &[f64]) -> Self {
        Self::Polynomial(coeffs.to_vec())
    }

    pub fn zero() -> Self {
        Self::Polynomial(Vec::new())
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Identity => t,
            Self::Polynomial(c) => poly_eval(c, t),
            Self::SmoothPlateau { delta } => plateau_value(*delta, t),
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::Polynomial(c) => poly_deriv_eval(c, t),
            Self::SmoothPlateau { delta } => plateau_deriv(*delta, t),
        }
    }

    /// Interior points where the curve changes formula.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::SmoothPlateau { delta: d } => vec![*d, 2.0 * d, 1.0 - 2.0 * d, 1.0 - d],
            _ => Vec::new(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Self::Identity)
    }

    fn scan(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=SCAN_NODES).map(|i| i as f64 / SCAN_NODES as f64)
    }

    pub fn is_monotone(&self) -> bool {
        self.scan().all(|t| self.deriv(t) >= -1e-12)
    }

    pub fn max_deriv(&self) -> f64 {
        self.scan()
            .chain(self.breakpoints())
            .map(|t| self.deriv(t))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Fails unless `ζ([0,1]) ⊂ [0,1]` on the scan nodes.
    pub fn check_range(&self) -> Result<()> {
        for t in self.scan() {
            let v = self.value(t);
            if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                return Err(Error::RangeViolation(format!("ζ({t}) = {v}")));
            }
        }
        Ok(())
    }

    pub fn fixes_endpoints(&self) -> bool {
        self.value(0.0).abs() <= 1e-14 && (self.value(1.0) - 1.0).abs() <= 1e-14
    }
}

fn plateau_mass(d: f64) -> f64 {
    1.0 - 3.0 * d
}

fn plateau_value(d: f64, t: f64) -> f64 {
    let raw = if t <= d {
        0.0
    } else if t <= 2.0 * d {
        d * smooth_step_integral((t - d) / d)
    } else if t <= 1.0 - 2.0 * d {
        0.5 * d + (t - 2.0 * d)
    } else if t <= 1.0 - d {
        0.5 * d + (1.0 - 4.0 * d) + d * (0.5 - smooth_step_integral((1.0 - d - t) / d))
    } else {
        plateau_mass(d)
    };
    raw / plateau_mass(d)
}

fn plateau_deriv(d: f64, t: f64) -> f64 {
    let rho = if t <= d || t >= 1.0 - d {
        0.0
    } else if t < 2.0 * d {
        smooth_step((t - d) / d)
    } else if t <= 1.0 - 2.0 * d {
        1.0
    } else {
        smooth_step((1.0 - d - t) / d)
    };
    rho / plateau_mass(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_integral_is_half() {
        assert!((smooth_step_integral(1.0) - 0.5).abs() < 1e-15);
        // matches a fine composite rule at an interior point
        let fine = gauss_legendre(smooth_step, 0.0, 0.3, 256);
        assert!((smooth_step_integral(0.3) - fine).abs() < 1e-15);
    }

    #[test]
    fn plateau_shape() {
        let c = ReparamCurve::SmoothPlateau { delta: 0.05 };
        assert_eq!(c.value(0.0), 0.0);
        assert!((c.value(1.0) - 1.0).abs() < 1e-15);
        assert!((c.value(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(c.value(0.04), 0.0);
        assert!((c.value(0.96) - 1.0).abs() < 1e-15);
        assert!((c.max_deriv() - 1.0 / 0.85).abs() < 1e-12);
        // derivative matches value differences
        for t in [0.07, 0.3, 0.91] {
            let fd = (c.value(t + 1e-6) - c.value(t - 1e-6)) / 2e-6;
            assert!((fd - c.deriv(t)).abs() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn polynomial_curve() {
        let c = ReparamCurve::polynomial(&[0.0, 0.0, 1.0]);
        assert_eq!(c.value(0.5), 0.25);
        assert_eq!(c.deriv(0.5), 1.0);
        assert!(c.is_monotone() && c.fixes_endpoints());
        let bad = ReparamCurve::polynomial(&[0.0, 2.0]);
        assert!(matches!(bad.check_range(), Err(Error::RangeViolation(_))));
    }

    #[test]
    fn record_round_trip() {
        for c in [
            ReparamCurve::Identity,
            ReparamCurve::polynomial(&[0.0, 0.5, 0.5]),
            ReparamCurve::SmoothPlateau { delta: 0.01 },
        ] {
            let s = serde_json::to_string(&c).unwrap();
            let back: ReparamCurve = serde_json::from_str(&s).unwrap();
            assert_eq!(back, c);
        }
        assert!(serde_json::from_str::<ReparamCurve>(r#"{"kind":"spline"}"#).is_err());
    }
}
