//! Oscillation-based lengths and distances along isotopies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::fields::isotopy::kind_mismatch;
use crate::fields::verify::FieldData;
use crate::fields::{CoIsotopy, Isotopy, Kind};
use crate::manifold::{hodge_split, l2_norm_harmonic, FourierScalar, ModelSpec, OscEnclosure, OscGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    /// Time integral.
    #[serde(rename = "L1inf")]
    L1Inf,
    /// Maximum over time.
    #[serde(rename = "Linf")]
    Linf,
}

/// What accompanies `osc(F_t)` at each time node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReebTerm {
    /// `sup_M |C(Φ,η)^t|`.
    SupNorm,
    /// `(1/Vol)|∫_M C(Φ,η)^t η∧ωⁿ|`.
    Mean,
    /// `‖𝓗‖_{L²} + Θ` of the velocity field (`osc` slot holds `ν^B`).
    Aco,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Simpson panels over `[0,1]` (split at breakpoints).
    pub panels: usize,
    pub osc_resolution: usize,
    /// z-nodes used when `C` varies in space.
    pub z_grid: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            panels: 128,
            osc_resolution: 256,
            z_grid: 64,
        }
    }
}

impl From<&Tolerances> for QuadratureOptions {
    fn from(t: &Tolerances) -> Self {
        Self {
            osc_resolution: t.osc_resolution,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthNode {
    pub t: f64,
    pub osc: f64,
    pub osc_lo: f64,
    pub osc_hi: f64,
    pub reeb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthReport {
    pub value: f64,
    /// The same aggregate with every `osc` replaced by its certified lower
    /// and upper grid bounds.
    pub lower: f64,
    pub upper: f64,
    pub flavor: Flavor,
    pub reeb_term: ReebTerm,
    pub quadrature: String,
    pub nodes: Vec<LengthNode>,
}

impl LengthReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,osc,osc_lo,osc_hi,reeb\n");
        for n in &self.nodes {
            s.push_str(&format!("{},{},{},{},{}\n", n.t, n.osc, n.osc_lo, n.osc_hi, n.reeb));
        }
        s
    }
}

/// Composite-Simpson nodes and weights on `[0,1]`, with panel edges at every
/// breakpoint in `(0,1)`.
pub fn time_rule(breakpoints: &[f64], panels: usize) -> (Vec<f64>, Vec<f64>) {
    let mut edges: Vec<f64> = std::iter::once(0.0)
        .chain(breakpoints.iter().copied().filter(|b| *b > 1e-12 && *b < 1.0 - 1e-12))
        .chain(std::iter::once(1.0))
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut nodes = vec![0.0];
    let mut weights = vec![0.0];
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = (((b - a) * panels as f64).ceil() as usize).max(1) * 2;
        let h = (b - a) / m as f64;
        let last = weights.len() - 1;
        weights[last] += h / 3.0;
        for i in 1..=m {
            nodes.push(if i == m { b } else { a + i as f64 * h });
            let c = if i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            weights.push(c * h / 3.0);
        }
    }
    (nodes, weights)
}

fn osc_grid_for(reps: &[Option<FourierScalar>], dim: usize, res: usize) -> Result<OscGrid> {
    let mut freqs: Vec<Vec<i32>> = reps
        .iter()
        .flatten()
        .flat_map(|f| f.terms().iter().map(|t| t.k.clone()))
        .collect();
    freqs.sort();
    freqs.dedup();
    OscGrid::with_frequencies(dim, &freqs, res)
}

/// `sup_x |C^t(x)|`; since `Z_t` is onto, the sup over `x` of `|c(Z_t x)|`
/// is the sup over `w` of `|c(w)|`.
fn reeb_sup(iso: &dyn Isotopy, t: f64, z_grid: usize) -> f64 {
    if iso.reeb_is_uniform() {
        return iso.reeb_velocity(0.0, t).abs();
    }
    (0..z_grid)
        .map(|k| iso.reeb_velocity(k as f64 * std::f64::consts::TAU / z_grid as f64, t).abs())
        .fold(0.0, f64::max)
}

/// `mean_x C^t(x)` (mean over the z-circle).
fn reeb_mean(iso: &dyn Isotopy, t: f64, z_grid: usize) -> Result<f64> {
    if iso.reeb_is_uniform() {
        return Ok(iso.reeb_velocity(0.0, t));
    }
    if !iso.model().is_circle() {
        return Err(Error::UnboundedDomain);
    }
    Ok((0..z_grid)
        .map(|k| {
            let z = k as f64 * std::f64::consts::TAU / z_grid as f64;
            iso.reeb_velocity(iso.z_map(z, t), t)
        })
        .sum::<f64>()
        / z_grid as f64)
}

fn aggregate(
    nodes: Vec<LengthNode>,
    weights: &[f64],
    flavor: Flavor,
    reeb_term: ReebTerm,
) -> LengthReport {
    let agg = |f: &dyn Fn(&LengthNode) -> f64| match flavor {
        Flavor::L1Inf => nodes.iter().zip(weights).map(|(n, w)| w * f(n)).sum::<f64>(),
        Flavor::Linf => nodes.iter().map(f).fold(0.0, f64::max),
    };
    let value = agg(&|n| n.osc + n.reeb);
    let lower = agg(&|n| n.osc_lo + n.reeb);
    let upper = agg(&|n| n.osc_hi + n.reeb);
    let rule = match flavor {
        Flavor::L1Inf => format!("composite Simpson, {} nodes", nodes.len()),
        Flavor::Linf => format!("max over {} nodes", nodes.len()),
    };
    LengthReport {
        value,
        lower,
        upper,
        flavor,
        reeb_term,
        quadrature: rule,
        nodes,
    }
}

/// Shared engine: `osc` of `rep(t)` plus `reeb(t)` at every node.
fn time_aggregate(
    dim: usize,
    breakpoints: &[f64],
    flavor: Flavor,
    reeb_term: ReebTerm,
    opts: &QuadratureOptions,
    rep: &(dyn Fn(f64) -> Option<FourierScalar> + Sync),
    reeb: &(dyn Fn(f64) -> Result<f64> + Sync),
) -> Result<LengthReport> {
    let (ts, ws) = time_rule(breakpoints, opts.panels);
    let reps: Vec<Option<FourierScalar>> = ts.par_iter().map(|t| rep(*t)).collect();
    if reps.iter().any(|r| r.is_none()) {
        return Err(Error::InvalidArgument(
            "path has no Fourier generator representative".into(),
        ));
    }
    let grid = osc_grid_for(&reps, dim, opts.osc_resolution)?;
    let nodes = ts
        .par_iter()
        .zip(reps.par_iter())
        .map(|(t, f)| {
            let f = f.as_ref().expect("checked above");
            let e: OscEnclosure = grid.osc(f);
            Ok(LengthNode {
                t: *t,
                osc: e.value,
                osc_lo: e.lo,
                osc_hi: e.hi,
                reeb: reeb(*t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(nodes, &ws, flavor, reeb_term))
}

fn require(kinds: &[Kind], found: Kind) -> Result<()> {
    if kinds.contains(&found) {
        Ok(())
    } else {
        Err(kind_mismatch(kinds[0], found))
    }
}

/// `osc(F_t) + sup|C^t|` aggregated in time, for any path with a Fourier
/// representative of its generator's oscillation.
pub fn co_hofer_length(iso: &dyn Isotopy, flavor: Flavor, opts: &QuadratureOptions) -> Result<LengthReport> {
    require(&[Kind::CoHamiltonian], iso.kind())?;
    time_aggregate(
        iso.model().dim(),
        &iso.breakpoints(),
        flavor,
        ReebTerm::SupNorm,
        opts,
        &|t| iso.osc_representative(t),
        &|t| Ok(reeb_sup(iso, t, opts.z_grid)),
    )
}

pub fn length_l1inf(iso: &dyn Isotopy, opts: &QuadratureOptions) -> Result<LengthReport> {
    co_hofer_length(iso, Flavor::L1Inf, opts)
}

pub fn length_linf(iso: &dyn Isotopy, opts: &QuadratureOptions) -> Result<LengthReport> {
    co_hofer_length(iso, Flavor::Linf, opts)
}

fn check_pair(a: &dyn Isotopy, b: &dyn Isotopy) -> Result<()> {
    if a.model() != b.model() {
        Err(Error::ModelMismatch)
    } else {
        Ok(())
    }
}

fn difference_rep(a: &dyn Isotopy, b: &dyn Isotopy, t: f64) -> Option<FourierScalar> {
    Some(a.generator_fourier(t)?.sub(&b.generator_fourier(t)?))
}

fn merged_breakpoints(a: &dyn Isotopy, b: &dyn Isotopy) -> Vec<f64> {
    let mut v = a.breakpoints();
    v.extend(b.breakpoints());
    v
}

/// `osc(F_t − H_t) + sup|C(Φ)^t − C(Ψ)^t|`, aggregated in time.
pub fn distance_ch(
    a: &dyn Isotopy,
    b: &dyn Isotopy,
    flavor: Flavor,
    opts: &QuadratureOptions,
) -> Result<LengthReport> {
    check_pair(a, b)?;
    require(&[Kind::CoHamiltonian], a.kind())?;
    require(&[Kind::CoHamiltonian], b.kind())?;
    let z_grid = opts.z_grid;
    time_aggregate(
        a.model().dim(),
        &merged_breakpoints(a, b),
        flavor,
        ReebTerm::SupNorm,
        opts,
        &|t| difference_rep(a, b, t),
        &|t| {
            if a.reeb_is_uniform() && b.reeb_is_uniform() {
                return Ok((a.reeb_velocity(0.0, t) - b.reeb_velocity(0.0, t)).abs());
            }
            Ok((0..z_grid)
                .map(|k| {
                    let z = k as f64 * std::f64::consts::TAU / z_grid as f64;
                    (a.reeb_velocity(a.z_map(z, t), t) - b.reeb_velocity(b.z_map(z, t), t)).abs()
                })
                .fold(0.0, f64::max))
        },
    )
}

/// `osc(F_t) + ϑ_t` without a kind check (used by energy bounds).
pub(crate) fn almost_length_unchecked(
    iso: &dyn Isotopy,
    flavor: Flavor,
    opts: &QuadratureOptions,
) -> Result<LengthReport> {
    time_aggregate(
        iso.model().dim(),
        &iso.breakpoints(),
        flavor,
        ReebTerm::Mean,
        opts,
        &|t| iso.osc_representative(t),
        &|t| Ok(reeb_mean(iso, t, opts.z_grid)?.abs()),
    )
}

/// `osc(F_t) + (1/Vol)|∫ C(Φ,η)^t η∧ωⁿ|`, aggregated in time.
pub fn almost_length(iso: &dyn Isotopy, flavor: Flavor, opts: &QuadratureOptions) -> Result<LengthReport> {
    require(&[Kind::AlmostCoHamiltonian, Kind::CoHamiltonian], iso.kind())?;
    almost_length_unchecked(iso, flavor, opts)
}

/// `osc(F_t − H_t) + (1/Vol)|∫ (C(Φ)^t − C(Ψ)^t) η∧ωⁿ|`.
pub fn distance_ah(
    a: &dyn Isotopy,
    b: &dyn Isotopy,
    flavor: Flavor,
    opts: &QuadratureOptions,
) -> Result<LengthReport> {
    check_pair(a, b)?;
    for k in [a.kind(), b.kind()] {
        require(&[Kind::AlmostCoHamiltonian, Kind::CoHamiltonian], k)?;
    }
    time_aggregate(
        a.model().dim(),
        &merged_breakpoints(a, b),
        flavor,
        ReebTerm::Mean,
        opts,
        &|t| difference_rep(a, b, t),
        &|t| Ok((reeb_mean(a, t, opts.z_grid)? - reeb_mean(b, t, opts.z_grid)?).abs()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcoNorm {
    pub harmonic_l2: f64,
    pub nu_b: f64,
    pub theta: f64,
    pub total: f64,
}

/// `Θ(X) = (1/Vol)|∫ η(X) η∧ωⁿ|`.
pub fn theta_of_field(x: &FieldData, model: &ModelSpec) -> Result<f64> {
    model.volume()?;
    Ok(x.components[model.z_index()].mean().abs())
}

/// `‖𝓗_ω‖_{L²} + ν^B(dU_ω) + Θ(X)` from the Hodge split of `ι(X)ω`.
pub fn aco_norm(x: &FieldData, model: &ModelSpec, osc_resolution: usize) -> Result<AcoNorm> {
    let form = x.contract_omega();
    if !form.is_closed() {
        return Err(Error::NotCosymplectic);
    }
    let (harmonic, u) = hodge_split(&form)?;
    let harmonic_l2 = l2_norm_harmonic(&harmonic, model)?;
    let nu_b = u.osc(osc_resolution)?.value;
    let theta = theta_of_field(x, model)?;
    Ok(AcoNorm {
        harmonic_l2,
        nu_b,
        theta,
        total: harmonic_l2 + nu_b + theta,
    })
}

/// Time aggregate of `aco_norm(φ̇_t)`.
pub fn aco_length(iso: &CoIsotopy, flavor: Flavor, opts: &QuadratureOptions) -> Result<LengthReport> {
    let model = iso.model();
    let (ts, ws) = time_rule(&iso.breakpoints(), opts.panels);
    let nodes = ts
        .par_iter()
        .map(|t| {
            let n = aco_norm(&FieldData::of(iso, *t), &model, opts.osc_resolution)?;
            Ok(LengthNode {
                t: *t,
                osc: n.nu_b,
                osc_lo: n.nu_b,
                osc_hi: n.nu_b,
                reeb: n.harmonic_l2 + n.theta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(nodes, &ws, flavor, ReebTerm::Aco))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Generator, InverseIsotopy, ReebComponent, TimeFourier};
    use crate::manifold::FourierTerm;

    fn sin_y() -> FourierScalar {
        FourierScalar::single(3, &[0, 1, 0], 0.0, 1.0).unwrap()
    }

    fn iso(f: &FourierScalar) -> CoIsotopy {
        CoIsotopy::autonomous(ModelSpec::circle(1), f, 64).unwrap()
    }

    fn opts() -> QuadratureOptions {
        QuadratureOptions { panels: 16, ..Default::default() }
    }

    #[test]
    fn rule_integrates_cubics() {
        let (t, w) = time_rule(&[0.3], 3);
        let s: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(3)).sum();
        assert!((s - 0.25).abs() < 1e-14);
        assert!(t.contains(&0.3));
    }

    #[test]
    fn sin_lengths() {
        let a = iso(&sin_y());
        let l = length_l1inf(&a, &opts()).unwrap();
        assert!((l.value - 2.0).abs() < 1e-10 && l.lower <= 2.0 && 2.0 <= l.upper);
        assert!(l.upper - l.lower <= 1e-3);
        assert!((length_linf(&a, &opts()).unwrap().value - 2.0).abs() < 1e-10);
        let z = CoIsotopy::identity(ModelSpec::circle(1), 8);
        assert_eq!(length_l1inf(&z, &opts()).unwrap().value, 0.0);
    }

    #[test]
    fn ramp_lengths() {
        let f = TimeFourier::modulated(&sin_y(), &[0.0, 1.0]);
        let a = CoIsotopy::co_hamiltonian(ModelSpec::circle(1), f, 64).unwrap();
        assert!((length_l1inf(&a, &opts()).unwrap().value - 1.0).abs() < 1e-10);
        assert!((length_linf(&a, &opts()).unwrap().value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn inverse_symmetric() {
        let a = iso(&sin_y());
        let inv = InverseIsotopy::new(&a);
        let l = length_l1inf(&inv, &opts()).unwrap().value;
        assert!((l - 2.0).abs() < 1e-10);
    }

    #[test]
    fn distances() {
        let a = iso(&sin_y());
        let z = CoIsotopy::identity(ModelSpec::circle(1), 8);
        assert_eq!(distance_ch(&a, &a, Flavor::L1Inf, &opts()).unwrap().value, 0.0);
        assert!((distance_ch(&a, &z, Flavor::L1Inf, &opts()).unwrap().value - 2.0).abs() < 1e-10);
        let h = sin_y().add(&FourierScalar::single(3, &[1, 0, 0], 0.5, 0.0).unwrap());
        let d = distance_ch(&a, &iso(&h), Flavor::L1Inf, &opts()).unwrap().value;
        assert!((d - 1.0).abs() < 1e-10);
    }

    fn almost(f: &FourierScalar, c: f64) -> CoIsotopy {
        CoIsotopy::new(
            ModelSpec::circle(1),
            Kind::AlmostCoHamiltonian,
            Generator::raw(TimeFourier::autonomous(f)),
            Some(ReebComponent::constant(c)),
            None,
            64,
        )
        .unwrap()
    }

    #[test]
    fn almost_lengths() {
        let a = almost(&sin_y(), 0.3);
        let l = almost_length(&a, Flavor::L1Inf, &opts()).unwrap().value;
        assert!((l - 2.3).abs() < 1e-10);
        let b = almost(&sin_y(), 0.1);
        let d = distance_ah(&a, &b, Flavor::L1Inf, &opts()).unwrap().value;
        assert!((d - 0.2).abs() < 1e-10);
        let c = almost(&sin_y().add(&FourierScalar::single(3, &[1, 0, 0], 0.0, 1.0).unwrap()), 0.3);
        assert!((distance_ah(&a, &c, Flavor::Linf, &opts()).unwrap().value - 2.0).abs() < 1e-10);
        assert!(almost_length(&a.relabel(Kind::Cosymplectic).unwrap(), Flavor::L1Inf, &opts()).is_err());
    }

    #[test]
    fn almost_length_with_z_dependent_c_is_symmetric() {
        let c = ReebComponent::new(TimeFourier::autonomous(
            &FourierScalar::from_terms(
                1,
                [FourierTerm { k: vec![0], a: 0.4, b: 0.0 }, FourierTerm { k: vec![1], a: 0.3, b: 0.0 }],
            )
            .unwrap(),
        ))
        .unwrap();
        let a = CoIsotopy::almost(ModelSpec::circle(1), TimeFourier::autonomous(&sin_y()), c, 256).unwrap();
        let o = QuadratureOptions { panels: 8, z_grid: 64, ..Default::default() };
        let l = almost_length(&a, Flavor::L1Inf, &o).unwrap().value;
        let li = almost_length(&InverseIsotopy::new(&a), Flavor::L1Inf, &o).unwrap().value;
        assert!((l - li).abs() < 1e-6, "{l} {li}");
    }

    #[test]
    fn aco_examples() {
        let m = ModelSpec::circle(1);
        let reeb = almost(&FourierScalar::zero(3), 1.0);
        let n = aco_norm(&FieldData::of(&reeb, 0.0), &m, 64).unwrap();
        assert_eq!((n.theta, n.harmonic_l2, n.nu_b), (1.0, 0.0, 0.0));
        let n = aco_norm(&FieldData::of(&iso(&sin_y()), 0.0), &m, 64).unwrap();
        assert!((n.total - 2.0).abs() < 1e-12 && n.theta == 0.0);
        let l = aco_length(&iso(&sin_y()), Flavor::L1Inf, &opts()).unwrap();
        assert!((l.value - 2.0).abs() < 1e-10);
    }
}
