//! Packaged randomized verification suites.
//!
//! Each suite draws its scenarios from a seeded generator and returns one
//! aggregated report: the worst residual per relation, checked against its
//! tolerance, plus counts.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::invariants::{
    flux_identity_residual, mean_winding_integral, orbit_energy_defect, orbit_energy_profile,
};
use crate::fields::verify::{
    conformal_residuals, fact_conjugation_generator, fact_inverse_generator,
    fact_inverse_pullback, fact_product_generator, fact_product_pullback, sample_points,
};
use crate::fields::{
    CoIsotopy, ConjugatedIsotopy, Conjugator, Generator, InverseIsotopy, Isotopy, Kind, TimeFourier,
};
use crate::fixpoints::{check_fix_lower_bound, find_fixed_points, winding_at_fixed_points, FixOptions};
use crate::lift::{check_symplectic, lift_isotopy, section_gap};
use crate::manifold::{d, hodge_split, FourierScalar, ModelSpec, OneFormField, Point};
use crate::norms::{length_l1inf, length_linf, C0Options, QuadratureOptions};
use crate::random::{
    random_autonomous, random_curve, random_generator, random_reeb, random_translation,
    random_uniform_reeb, TrigShape,
};
use crate::reparam::{boundary_flatten, normalized_flatten, verify_rl2, FlattenOptions, LipschitzOptions};
use crate::report::VerificationReport;

/// Names accepted by [`run_suite`].
pub const SUITES: &[&str] = &[
    "algebra",
    "conformal",
    "energy",
    "lengths",
    "rl2",
    "flatten",
    "lift",
    "fixpoints",
    "winding",
    "infrastructure",
];

/// Suite groups exposed on the command line.
pub const SUITE_GROUPS: &[(&str, &[&str])] = &[
    ("algebra", &["algebra", "conformal", "energy"]),
    ("lengths", &["lengths"]),
    ("reparam", &["rl2", "flatten"]),
    ("lift", &["lift"]),
    ("fixpoints", &["fixpoints", "winding"]),
    ("infrastructure", &["infrastructure"]),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteParams {
    pub scenarios: usize,
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
}

impl SuiteParams {
    /// Sizes of the acceptance runs.
    pub fn full(name: &str) -> Self {
        let (scenarios, steps, samples) = match name {
            "algebra" => (100, 1024, 64),
            "conformal" => (50, 1024, 64),
            "energy" => (10, 1024, 8),
            "lengths" => (10, 256, 0),
            "rl2" => (100, 256, 0),
            "flatten" => (10, 256, 0),
            "lift" => (20, 1024, 32),
            "fixpoints" => (25, 256, 0),
            "winding" => (4, 256, 0),
            _ => (5, 0, 32),
        };
        Self {
            scenarios,
            steps,
            samples,
            seed: 0xC0_4A,
        }
    }

    /// Small sizes for smoke runs (flow resolution unchanged: the finite
    /// difference checks are calibrated to it).
    pub fn quick(name: &str) -> Self {
        let full = Self::full(name);
        Self {
            scenarios: full.scenarios.clamp(1, 3),
            samples: full.samples.min(8),
            ..full
        }
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

pub fn run_suite(name: &str, params: &SuiteParams) -> Result<VerificationReport> {
    match name {
        "algebra" => algebra_suite(params),
        "conformal" => conformal_suite(params),
        "energy" => energy_suite(params),
        "lengths" => lengths_suite(params),
        "rl2" => rl2_suite(params),
        "flatten" => flatten_suite(params),
        "lift" => lift_suite(params),
        "fixpoints" => fixpoints_suite(params),
        "winding" => winding_suite(params),
        "infrastructure" => infrastructure_suite(params),
        other => Err(Error::InvalidArgument(format!("unknown suite '{other}'"))),
    }
}

fn circle1() -> ModelSpec {
    ModelSpec::circle(1)
}

/// Group identities for inverse, conjugated and product paths.
pub fn algebra_suite(p: &SuiteParams) -> Result<VerificationReport> {
    let model = circle1();
    let mut rng = p.rng(1);
    let shape = TrigShape::default();
    let mut worst = [0.0_f64; 5];
    for i in 0..p.scenarios {
        let a = CoIsotopy::co_hamiltonian(model, random_generator(&mut rng, &model, &shape), p.steps)?;
        let b = CoIsotopy::co_hamiltonian(model, random_generator(&mut rng, &model, &shape), p.steps)?;
        let rho = Conjugator::translation(&random_translation(&mut rng, &model));
        let samples = sample_points(&model, p.samples, p.seed.wrapping_add(i as u64));
        let res = [
            fact_inverse_generator(&a, &samples),
            fact_conjugation_generator(&a, &rho, &samples),
            fact_product_generator(&a, &b, &samples),
            fact_inverse_pullback(&a, &samples),
            fact_product_pullback(&a, &b, &samples),
        ];
        for (w, r) in worst.iter_mut().zip(res) {
            *w = w.max(r);
        }
    }
    let mut r = VerificationReport::new("algebra");
    for (name, w) in [
        "inverse_generator",
        "conjugation_generator",
        "product_generator",
        "inverse_pullback",
        "product_pullback",
    ]
    .iter()
    .zip(worst)
    {
        r.check_le(*name, w, 1e-5, "identity tolerance");
    }
    r.info("scenarios", p.scenarios as f64);
    Ok(r)
}

/// Conformal factors and Reeb pairings of almost co-Hamiltonian paths.
pub fn conformal_suite(p: &SuiteParams) -> Result<VerificationReport> {
    let model = circle1();
    let mut rng = p.rng(2);
    let gen_shape = TrigShape {
        max_terms: 3,
        ..Default::default()
    };
    let reeb_shape = TrigShape {
        max_terms: 2,
        max_amp: 0.5,
        max_freq: 2,
        time_degree: 1,
    };
    let mut worst = crate::fields::verify::ConformalResiduals::default();
    for i in 0..p.scenarios {
        let mk = |rng: &mut ChaCha8Rng| {
            CoIsotopy::almost(
                model,
                random_generator(rng, &model, &gen_shape),
                random_reeb(rng, &reeb_shape),
                p.steps,
            )
        };
        let a = mk(&mut rng)?;
        let b = mk(&mut rng)?;
        let shift = random_translation(&mut rng, &model);
        let samples = sample_points(&model, p.samples, p.seed.wrapping_add(100 + i as u64));
        let c = conformal_residuals(&a, &b, &shift, &samples);
        worst.inverse_mu = worst.inverse_mu.max(c.inverse_mu);
        worst.product_mu = worst.product_mu.max(c.product_mu);
        worst.conjugation_mu = worst.conjugation_mu.max(c.conjugation_mu);
        worst.conjugation_mu_literal = worst.conjugation_mu_literal.max(c.conjugation_mu_literal);
        worst.product_c = worst.product_c.max(c.product_c);
        worst.inverse_c = worst.inverse_c.max(c.inverse_c);
        worst.inverse_c_literal = worst.inverse_c_literal.max(c.inverse_c_literal);
    }
    let mut r = VerificationReport::new("conformal");
    r.check_le("inverse_mu", worst.inverse_mu, 1e-5, "identity tolerance")
        .check_le("product_mu", worst.product_mu, 1e-5, "identity tolerance")
        .check_le("conjugation_mu", worst.conjugation_mu, 1e-5, "identity tolerance")
        .check_le("product_c", worst.product_c, 1e-5, "identity tolerance")
        .check_le("inverse_c", worst.inverse_c, 1e-5, "identity tolerance")
        .info("conjugation_mu_literal", worst.conjugation_mu_literal)
        .info("inverse_c_literal", worst.inverse_c_literal)
        .info("scenarios", p.scenarios as f64);
    Ok(r)
}

/// Energy along orbits of autonomous generators.
pub fn energy_suite(p: &SuiteParams) -> Result<VerificationReport> {
    let model = circle1();
    let mut rng = p.rng(3);
    let mut drift = 0.0_f64;
    for i in 0..p.scenarios {
        let g = random_autonomous(&mut rng, &model, &TrigShape::default());
        let iso = CoIsotopy::autonomous(model, &g, p.steps)?;
        for (q, _) in sample_points(&model, p.samples, p.seed.wrapping_add(200 + i as u64)) {
            drift = drift.max(orbit_energy_defect(&iso, &q)?);
        }
    }
    // line topology: G = sin(y₁) + 0.3 z, so G(φ_t p) = G(p) + 0.09 t
    let line = ModelSpec::line(1);
    let sin_y = FourierScalar::single(3, &[0, 1, 0], 0.0, 1.0)?;
    let iso = CoIsotopy::new(
        line,
        Kind::CoHamiltonian,
        Generator::raw(TimeFourier::autonomous(&sin_y)),
        Some(crate::fields::ReebComponent::constant(0.3)),
        None,
        p.steps,
    )?;
    let grid: Vec<f64> = (0..=16).map(|k| k as f64 / 16.0).collect();
    let mut slope_err = 0.0_f64;
    for (q, _) in sample_points(&line, p.samples.max(1), p.seed ^ 0x11) {
        let prof = orbit_energy_profile(&iso, &q, &grid)?;
        let g0 = prof[0].1;
        for (t, g) in prof.iter().skip(1) {
            slope_err = slope_err.max(((g - g0) / t - 0.09).abs());
        }
    }
    let mut r = VerificationReport::new("energy");
    r.check_le("max_drift", drift, 1e-8, "conservation")
        .check_le("line_slope_error", slope_err, 1e-8, "slope 0.09")
        .info("scenarios", p.scenarios as f64);
    Ok(r)
}

/// Symmetry, conjugation and reparameterization properties of `l_CH`, and
/// the `sin y₁` anchor.
pub fn lengths_suite(p: &SuiteParams) -> Result<VerificationReport> {
    let model = circle1();
    let mut rng = p.rng(4);
    // t ↦ osc(F_t) has kinks where the extremizer jumps, so Simpson is only
    // second order here; a fine time rule keeps the quadrature error below
    // the invariance tolerance. Node values are Newton-refined, so a coarse
    // osc grid suffices.
    let opts = QuadratureOptions {
        panels: 1024,
        osc_resolution: 64,
        ..Default::default()
    };
    let shape = TrigShape {
        max_terms: 4,
        time_degree: 2,
        ..Default::default()
    };
    let (mut sym, mut conj, mut reparam, mut bound) = (0.0_f64, 0.0_f64, 0.0_f64, f64::NEG_INFINITY);
    for _ in 0..p.scenarios {
        let iso = CoIsotopy::co_hamiltonian(model, random_generator(&mut rng, &model, &shape), p.steps)?;
        let l1 = length_l1inf(&iso, &opts)?.value;
        let linf = length_linf(&iso, &opts)?.value;
        let inv = InverseIsotopy::new(&iso);
        sym = sym
            .max((length_l1inf(&inv, &opts)?.value - l1).abs())
            .max((length_linf(&inv, &opts)?.value - linf).abs());
        let rho = Conjugator::translation(&random_translation(&mut rng, &model));
        let c = ConjugatedIsotopy::new(&iso, rho)?;
        conj = conj
            .max((length_l1inf(&c, &opts)?.value - l1).abs())
            .max((length_linf(&c, &opts)?.value - linf).abs());
        let zeta = random_curve(&mut rng);
        let w = iso.warped(zeta.clone())?;
        reparam = reparam.max((length_l1inf(&w, &opts)?.value - l1).abs());
        bound = bound.max(length_linf(&w, &opts)?.value - zeta.max_deriv() * linf);
    }
    let sin_y = FourierScalar::single(3, &[0, 1, 0], 0.0, 1.0)?;
    let anchor = CoIsotopy::autonomous(model, &sin_y, p.steps.max(1))?;
    let anchor_opts = QuadratureOptions::default();
    let a1 = length_l1inf(&anchor, &anchor_opts)?;
    let ai = length_linf(&anchor, &anchor_opts)?;
    let mut r = VerificationReport::new("lengths");
    r.check_le("symmetry", sym, 1e-6, "l(Φ⁻¹) = l(Φ)")
        .check_le("conjugation", conj, 1e-6, "l(ρ⁻¹Φρ) = l(Φ)")
        .check_le("reparam_l1inf", reparam, 1e-6, "l(Φ^ζ) = l(Φ)")
        .check_le("reparam_linf_bound", bound.max(0.0), 1e-8, "l∞(Φ^ζ) ≤ max ζ̇ · l∞(Φ)")
        .check_flag("anchor_l1inf_encloses_2", a1.lower <= 2.0 && 2.0 <= a1.upper)
        .check_flag("anchor_linf_encloses_2", ai.lower <= 2.0 && 2.0 <= ai.upper)
        .check_le("anchor_width", (a1.upper - a1.lower).max(ai.upper - ai.lower), 1e-3, "enclosure width")
        .info("anchor_l1inf", a1.value)
        .info("anchor_linf", ai.value)
        .info("scenarios", p.scenarios as f64);
    Ok(r)
}

fn fast_quadrature() -> QuadratureOptions {
    QuadratureOptions {
        panels: 64,
        osc_resolution: 128,
        z_grid: 32,
    }
}

/// The reparameterization Lipschitz bound on random `(F, ξ₁, ξ₂)`.
pub fn rl2_suite(p: &SuiteParams) -> Result<VerificationReport> {
    let model = circle1();
    let mut rng = p.rng(5);
    let shape = TrigShape {
        max_terms: 4,
        time_degree: 2,
        ..Default::default()
    };
    let quad = fast_quadrature();
    let lip = LipschitzOptions::default();
    let (mut failures, mut worst_ratio) = (0usize, 0.0_f64);
    for _ in 0..p.scenarios {
        let iso = CoIsotopy::co_hamiltonian(model, random_generator(&mut rng, &model, &shape), p.steps)?;
        let (x1, x2) = (random_curve(&mut rng), random_curve(&mut rng));
        let rep = verify_rl2(&iso, &x1, &x2, &quad, &lip)?;
        if !rep.pass {
            failures += 1;
        }
        let (lhs, rhs) = (rep.value("lhs").unwrap_or(0.0), rep.value("rhs").unwrap_or(0.0));
        if rhs > 0.0 {
            worst_ratio = worst_ratio.max(lhs / rhs);
        }
    }
    let mut r = VerificationReport::new("rl2");
    r.check_le("failures", failures as f64, 0.0, "zero failures")
        .info("worst_lhs_over_rhs", worst_ratio)
        .info("scenarios", p.scenarios as f64);
    Ok(r)
}

/// Boundary flattening and its zero-mean variant for `ε ∈ {0.1, 0.01}`.
pub fn flatten_suite(p: &SuiteParams) -> Result<VerificationReport> {
    let model = circle1();
    let mut rng = p.rng(6);
    let shape = TrigShape {
        max_terms: 3,
        ..Default::default()
    };
    let opts = FlattenOptions {
        quad: fast_quadrature(),
        c0: C0Options {
            resolution: 4,
            time_nodes: 9,
        },
        lipschitz: LipschitzOptions {
            pairs: 256,
            ..Default::default()
        },
        flow_samples: 16,
        ..Default::default()
    };
    let mut r = VerificationReport::new("flatten");
    let (mut l2_fail, mut ch_fail) = (0usize, 0usize);
    let (mut worst_d, mut worst_dbar, mut worst_end) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..p.scenarios {
        let iso = CoIsotopy::co_hamiltonian(model, random_generator(&mut rng, &model, &shape), p.steps)?;
        for eps in [0.1, 0.01] {
            match boundary_flatten(&iso, eps, &opts) {
                Ok((_, rep)) => {
                    worst_d = worst_d.max(rep.value("distance").unwrap_or(0.0) / eps);
                    worst_dbar = worst_dbar.max(rep.value("c0_path_distance").unwrap_or(0.0) / eps);
                    worst_end = worst_end.max(rep.value("endpoint_gap").unwrap_or(0.0));
                    if !rep.pass {
                        l2_fail += 1;
                    }
                }
                Err(e) => {
                    l2_fail += 1;
                    r.note(format!("boundary_flatten(ε = {eps}): {e}"));
                }
            }
            match normalized_flatten(&iso, eps, &opts) {
                Ok((_, rep)) => {
                    if !rep.pass {
                        ch_fail += 1;
                        for c in rep.failures() {
                            r.note(format!("normalized_flatten(ε = {eps}): {} failed", c.name));
                        }
                    }
                }
                Err(e) => {
                    ch_fail += 1;
                    r.note(format!("normalized_flatten(ε = {eps}): {e}"));
                }
            }
        }
    }
    r.check_le("boundary_flatten_failures", l2_fail as f64, 0.0, "zero failures")
        .check_le("normalized_flatten_failures", ch_fail as f64, 0.0, "zero failures")
        .info("worst_distance_over_eps", worst_d)
        .info("worst_c0_over_eps", worst_dbar)
        .info("worst_endpoint_gap", worst_end)
        .info("scenarios", p.scenarios as f64);
    Ok(r)
}

/// Symplecticity of lifts to `M × S¹` for co-Hamiltonian and cosymplectic paths.
pub fn lift_suite(p: &SuiteParams) -> Result<VerificationReport> {
    let model = circle1();
    let mut rng = p.rng(7);
    let shape = TrigShape {
        max_terms: 4,
        ..Default::default()
    };
    let t_grid: Vec<f64> = (1..=8).map(|k| k as f64 / 8.0).collect();
    let (mut sym, mut proj, mut theta, mut gap) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..p.scenarios {
        let f = random_generator(&mut rng, &model, &shape);
        let iso = if i % 2 == 0 {
            CoIsotopy::co_hamiltonian(model, f, p.steps)?
        } else {
            CoIsotopy::new(
                model,
                Kind::Cosymplectic,
                Generator::raw(f),
                Some(random_uniform_reeb(&mut rng, 1, 1.0)),
                None,
                p.steps,
            )?
        };
        let li = lift_isotopy(&iso)?;
        let rep = check_symplectic(&li, p.samples, &t_grid, p.seed.wrapping_add(300 + i as u64));
        sym = sym.max(rep.value("max_symplectic_residual").unwrap_or(f64::INFINITY));
        proj = proj.max(rep.value("base_projection").unwrap_or(f64::INFINITY));
        if iso.kind() == Kind::CoHamiltonian {
            theta = theta.max(rep.value("theta_identity").unwrap_or(f64::INFINITY));
            for (q, t) in sample_points(&model, 8, p.seed ^ i as u64) {
                let l = rng.random_range(0.0..TAU);
                let k = rng.random_range(0.0..TAU);
                gap = gap.max(section_gap(&iso, t, &q, l, k)?);
            }
        }
    }
    let mut r = VerificationReport::new("lift");
    r.check_le("max_symplectic_residual", sym, 1e-5, "finite-difference Jacobian")
        .check_le("base_projection", proj, 0.0, "exact")
        .check_le("theta_identity", theta, 1e-14, "co-Hamiltonian lifts")
        .check_le("section_gap", gap, 0.0, "exact on the circle")
        .info("scenarios", p.scenarios as f64);
    Ok(r)
}

fn cos_cos(steps: usize) -> Result<CoIsotopy> {
    let f = FourierScalar::single(3, &[1, 0, 0], 0.1, 0.0)?
        .add(&FourierScalar::single(3, &[0, 1, 0], 0.1, 0.0)?);
    CoIsotopy::autonomous(circle1(), &f, steps)
}

fn small_shape() -> TrigShape {
    TrigShape {
        max_terms: 4,
        max_amp: 0.2,
        max_freq: 2,
        time_degree: 0,
    }
}

/// Fixed points of time-one maps versus the Γ lower bound.
pub fn fixpoints_suite(p: &SuiteParams) -> Result<VerificationReport> {
    let model = circle1();
    let opts = FixOptions::default();
    let anchor = find_fixed_points(&cos_cos(p.steps)?, &opts);
    let mut rng = p.rng(8);
    let (mut below, mut min_count, mut worst_res) = (0usize, usize::MAX, anchor.max_residual());
    for _ in 0..p.scenarios {
        let g = random_autonomous(&mut rng, &model, &small_shape());
        let iso = CoIsotopy::autonomous(model, &g, p.steps)?;
        let (set, rep) = check_fix_lower_bound(&iso, &opts)?;
        if !rep.pass {
            below += 1;
        }
        min_count = min_count.min(set.count());
        worst_res = worst_res.max(set.max_residual());
    }
    let mut r = VerificationReport::new("fixpoints");
    r.check_flag("anchor_four_components", anchor.count() == 4)
        .check_le("max_residual", worst_res, opts.newton_tol, "newton_tol")
        .check_le("scenarios_below_gamma", below as f64, 0.0, "Γ ≥ 1")
        .info("anchor_components", anchor.count() as f64)
        .info("min_components", if min_count == usize::MAX { 0.0 } else { min_count as f64 })
        .info("scenarios", p.scenarios as f64);
    Ok(r)
}

/// Mean winding, sign bracketing, flux identity and winding at fixed points.
pub fn winding_suite(p: &SuiteParams) -> Result<VerificationReport> {
    let model = circle1();
    let dim = model.dim();
    let mut rng = p.rng(9);
    let sin_y = FourierScalar::single(3, &[0, 1, 0], 0.0, 1.0)?;
    let mut isos = vec![CoIsotopy::autonomous(model, &sin_y, p.steps)?];
    let shape = TrigShape {
        max_terms: 3,
        max_amp: 0.5,
        max_freq: 2,
        time_degree: 1,
    };
    for _ in 1..p.scenarios {
        isos.push(CoIsotopy::co_hamiltonian(model, random_generator(&mut rng, &model, &shape), p.steps)?);
    }
    let res = 64;
    let (mut mean, mut min, mut max, mut flux) = (0.0_f64, f64::NEG_INFINITY, f64::INFINITY, 0.0_f64);
    for iso in &isos {
        for a in 0..dim {
            let alpha = OneFormField::basis(dim, a);
            let rep = mean_winding_integral(iso, &alpha, res, 1e-5)?;
            mean = mean.max(rep.value("abs_mean").unwrap_or(f64::INFINITY));
            min = min.max(rep.value("min").unwrap_or(f64::INFINITY));
            max = max.min(rep.value("max").unwrap_or(f64::NEG_INFINITY));
            if a < dim - 1 {
                flux = flux.max(flux_identity_residual(iso, &alpha, res)?);
            }
        }
    }
    let mut fix_winding = 0.0_f64;
    let mut fixed = 0usize;
    let mut autos = vec![cos_cos(p.steps)?];
    for _ in 1..p.scenarios {
        autos.push(CoIsotopy::autonomous(model, &random_autonomous(&mut rng, &model, &small_shape()), p.steps)?);
    }
    for iso in &autos {
        let set = find_fixed_points(iso, &FixOptions::default());
        fixed += set.count();
        let rep = winding_at_fixed_points(iso, &set, 1e-6)?;
        fix_winding = fix_winding.max(rep.value("max_winding").unwrap_or(f64::INFINITY));
    }
    let mut r = VerificationReport::new("winding");
    r.check_le("abs_mean", mean, 1e-5, "quadrature tolerance")
        .check_le("largest_min", min, 1e-8, "min ≤ 0")
        .check_ge("smallest_max", max, -1e-8, "max ≥ 0")
        .check_le("flux_identity", flux, 1e-5, "quadrature tolerance")
        .check_le("winding_at_fixed_points", fix_winding, 1e-6, "contractible orbits")
        .check_ge("fixed_points_found", fixed as f64, autos.len() as f64, "at least one per map")
        .info("grid", res as f64)
        .info("scenarios", p.scenarios as f64);
    Ok(r)
}

/// Observed RK4 order from maps at `N`, `2N`, `4N` steps.
pub fn rk4_order(iso: &CoIsotopy, base_steps: usize, samples: &[(Point, f64)]) -> f64 {
    let model = iso.model();
    let runs: Vec<CoIsotopy> = [1, 2, 4].iter().map(|m| iso.with_steps(base_steps * m)).collect();
    let (mut e1, mut e2) = (0.0_f64, 0.0_f64);
    for (q, _) in samples {
        let m: Vec<Point> = runs.iter().map(|r| r.map(q, 1.0)).collect();
        e1 = e1.max(model.distance(&m[0], &m[1]));
        e2 = e2.max(model.distance(&m[1], &m[2]));
    }
    (e1 / e2).log2()
}

/// `‖α − (harmonic + dU)‖` over the coefficients of the Hodge split.
pub fn hodge_reconstruction_error(alpha: &OneFormField) -> Result<f64> {
    let (h, u) = hodge_split(alpha)?;
    let back = h.add(&d(&u));
    Ok(alpha
        .components()
        .iter()
        .zip(back.components())
        .map(|(a, b)| a.sub(b).max_abs_coefficient())
        .fold(0.0, f64::max))
}

/// RK4 convergence order and Hodge reconstruction.
pub fn infrastructure_suite(p: &SuiteParams) -> Result<VerificationReport> {
    let model = circle1();
    let mut rng = p.rng(10);
    let shape = TrigShape {
        max_terms: 4,
        max_amp: 1.0,
        max_freq: 2,
        time_degree: 2,
    };
    let mut order = f64::INFINITY;
    let mut hodge = 0.0_f64;
    for i in 0..p.scenarios {
        // a fixed pendulum-type part keeps the flow nonlinear (a single
        // resonant term would be integrated exactly)
        let pendulum = FourierScalar::single(3, &[1, 0, 0], 0.5, 0.0)?
            .add(&FourierScalar::single(3, &[0, 1, 0], 0.0, 0.5)?);
        let f = random_generator(&mut rng, &model, &shape).add(&TimeFourier::autonomous(&pendulum));
        let iso = CoIsotopy::co_hamiltonian(model, f, 16)?;
        let samples = sample_points(&model, p.samples.max(1), p.seed.wrapping_add(400 + i as u64));
        order = order.min(rk4_order(&iso, 16, &samples));
        let u = random_autonomous(&mut rng, &model, &shape);
        let c: Vec<f64> = (0..model.dim()).map(|_| rng.random_range(-PI..PI)).collect();
        let alpha = OneFormField::constant(&c).add(&d(&u));
        hodge = hodge.max(hodge_reconstruction_error(&alpha)?);
    }
    let mut r = VerificationReport::new("infrastructure");
    r.check_ge("min_rk4_order", order, 3.8, "fourth order")
        .check_le("hodge_reconstruction", hodge, 1e-13, "exact split")
        .info("scenarios", p.scenarios as f64);
    Ok(r)
}
