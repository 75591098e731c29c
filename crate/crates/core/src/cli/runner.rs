//! Task execution and run reports.

use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::scenario::*;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::fields::invariants::{flux_identity_residual, mean_winding_integral, orbit_energy_defect, orbit_energy_profile};
use crate::fields::verify::{
    conformal_residuals, fact_conjugation_generator, fact_inverse_generator, fact_inverse_pullback,
    fact_product_generator, fact_product_pullback, sample_points,
};
use crate::fields::{CoIsotopy, Conjugator, Isotopy, Kind};
use crate::fixpoints::{check_fix_lower_bound, winding_at_fixed_points, FixOptions, FixedPointSet};
use crate::lift::{check_symplectic, lift_isotopy};
use crate::linalg::{is_cosymplectic, reeb_vector, CosymplecticCouple};
use crate::manifold::OneFormField;
use crate::norms::{
    aco_length, almost_length, co_hofer_length, length_l1inf, length_linf, path_distance, C0Options,
    Flavor, LengthReport, QuadratureOptions,
};
use crate::random::random_translation;
use crate::reparam::{boundary_flatten, kind_distance, normalized_flatten, reparametrize, verify_rl2, FlattenOptions, LipschitzOptions};
use crate::report::VerificationReport;
use crate::suites::{run_suite, SuiteParams, SUITES, SUITE_GROUPS};

pub const REPORT_VERSION: &str = "cokinetic-report/1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskEntry {
    pub name: String,
    pub command: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<LengthReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_points: Option<FixedPointSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Versions, seed and resolutions of a run; not part of the deterministic payload.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvironmentStamp {
    pub crate_version: String,
    pub scenario_schema: String,
    pub seed: u64,
    pub threads: usize,
    pub defaults: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: String,
    pub pass: bool,
    pub tasks: Vec<TaskEntry>,
    pub environment: EnvironmentStamp,
}

#[derive(Serialize)]
struct Payload<'a> {
    schema: &'a str,
    pass: bool,
    tasks: &'a [TaskEntry],
}

impl RunReport {
    fn new(seed: u64, defaults: Tolerances, tasks: Vec<TaskEntry>) -> Self {
        Self {
            schema: REPORT_VERSION.into(),
            pass: tasks.iter().all(|t| t.pass),
            tasks,
            environment: EnvironmentStamp {
                crate_version: env!("CARGO_PKG_VERSION").into(),
                scenario_schema: SCHEMA_VERSION.into(),
                seed,
                threads: rayon::current_num_threads(),
                defaults,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without its environment stamp: byte-identical across runs
    /// of the same scenario and seed.
    pub fn deterministic_json(&self) -> String {
        serde_json::to_string_pretty(&Payload {
            schema: &self.schema,
            pass: self.pass,
            tasks: &self.tasks,
        })
        .expect("report serializes")
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for t in &self.tasks {
            let status = if t.pass { "PASS" } else { "FAIL" };
            let _ = write!(s, "{status}  {:<24} {}", t.name, t.command);
            if let Some(e) = &t.error {
                let _ = write!(s, "  error: {e}");
            } else if let Some(r) = &t.report {
                for c in r.failures() {
                    let _ = write!(s, "  [{} = {:e}]", c.name, c.value);
                }
            }
            s.push('\n');
        }
        let _ = writeln!(s, "overall: {}", if self.pass { "PASS" } else { "FAIL" });
        s
    }

    /// `tasks.csv` plus one file per task (`NN_name.csv`), and node/component
    /// tables where a task produced them.
    pub fn write_csv(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut index = String::from("index,name,command,pass,error\n");
        for (i, t) in self.tasks.iter().enumerate() {
            let err = t.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
            let _ = writeln!(index, "{i},{},{},{},{err}", t.name, t.command, t.pass);
            let stem = format!("{i:02}_{}", sanitize(&t.name));
            if let Some(r) = &t.report {
                std::fs::write(dir.join(format!("{stem}.csv")), r.to_csv())?;
            }
            if let Some(l) = &t.length {
                std::fs::write(dir.join(format!("{stem}_nodes.csv")), l.to_csv())?;
            }
            if let Some(f) = &t.fixed_points {
                std::fs::write(dir.join(format!("{stem}_components.csv")), f.to_csv())?;
            }
        }
        std::fs::write(dir.join("tasks.csv"), index)
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

impl Scenario {
    /// Whether `only` names a task or a command of this scenario.
    pub fn selects(&self, only: &str) -> bool {
        self.tasks.iter().any(|t| t.name == only || t.command.as_str() == only)
    }
}

#[derive(Default)]
struct Outcome {
    report: Option<VerificationReport>,
    length: Option<LengthReport>,
    fixed_points: Option<FixedPointSet>,
}

impl Outcome {
    fn report(r: VerificationReport) -> Self {
        Self {
            report: Some(r),
            ..Default::default()
        }
    }
}

/// Runs the scenario's tasks in declaration order (those matching `only`,
/// by task name or command, when given). Task failures are recorded in the
/// report and never stop later tasks.
pub fn run(scenario: &Scenario, only: Option<&str>) -> RunReport {
    let tasks = scenario
        .tasks
        .iter()
        .enumerate()
        .filter(|(_, t)| only.is_none_or(|o| t.name == o || t.command.as_str() == o))
        .map(|(i, t)| {
            let seed = scenario.seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let ctx = Ctx { scenario, task: t, seed };
            let out = catch_unwind(AssertUnwindSafe(|| ctx.execute()))
                .unwrap_or_else(|p| Err(Error::InvalidArgument(format!("task panicked: {}", panic_text(&p)))));
            entry(t.name.clone(), t.command.as_str(), out)
        })
        .collect();
    RunReport::new(scenario.seed, scenario.defaults, tasks)
}

/// Runs built-in suites (a suite or group name each) as a report.
pub fn run_suites(names: &[&str], quick: bool, seed: u64) -> RunReport {
    let tasks = names
        .iter()
        .flat_map(|n| expand_suite(n).unwrap_or_else(|| vec![n.to_string()]))
        .map(|name| {
            let mut p = if quick { SuiteParams::quick(&name) } else { SuiteParams::full(&name) };
            p.seed = seed;
            let out = catch_unwind(AssertUnwindSafe(|| run_suite(&name, &p)))
                .unwrap_or_else(|p| Err(Error::InvalidArgument(format!("suite panicked: {}", panic_text(&p)))))
                .map(Outcome::report);
            entry(name, "suite", out)
        })
        .collect();
    RunReport::new(seed, Tolerances::default(), tasks)
}

/// Suite names behind a suite or group name.
pub fn expand_suite(name: &str) -> Option<Vec<String>> {
    if let Some((_, members)) = SUITE_GROUPS.iter().find(|(g, _)| *g == name) {
        return Some(members.iter().map(|s| s.to_string()).collect());
    }
    SUITES.contains(&name).then(|| vec![name.to_string()])
}

fn panic_text(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown".into())
}

fn entry(name: String, command: &str, out: Result<Outcome>) -> TaskEntry {
    match out {
        Ok(o) => TaskEntry {
            name,
            command: command.into(),
            pass: o.report.as_ref().is_none_or(|r| r.pass),
            report: o.report,
            length: o.length,
            fixed_points: o.fixed_points,
            error: None,
        },
        Err(e) => TaskEntry {
            name,
            command: command.into(),
            pass: false,
            report: None,
            length: None,
            fixed_points: None,
            error: Some(e.to_string()),
        },
    }
}

struct Ctx<'a> {
    scenario: &'a Scenario,
    task: &'a Task,
    seed: u64,
}

impl Ctx<'_> {
    fn tol(&self) -> &Tolerances {
        &self.task.tolerances
    }

    /// Declared isotopy, at the task's flow resolution when overridden.
    fn iso(&self, name: &str) -> CoIsotopy {
        let iso = self.scenario.isotopy(name).expect("references are validated");
        match self.task.overrides.steps {
            Some(s) => iso.with_steps(s),
            None => iso.clone(),
        }
    }

    fn curve(&self, name: &str) -> crate::reparam::ReparamCurve {
        self.scenario.curve(name).expect("references are validated").clone()
    }

    fn quad(&self, panels: Option<usize>) -> QuadratureOptions {
        QuadratureOptions {
            panels: panels.unwrap_or(QuadratureOptions::default().panels),
            osc_resolution: self.tol().osc_resolution,
            z_grid: self.tol().quad_grid,
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn execute(&self) -> Result<Outcome> {
        match &self.task.args {
            TaskArgs::Length(a) => self.length(a),
            TaskArgs::Distance(a) => self.distance(a),
            TaskArgs::C0Distance(a) => self.c0(a),
            TaskArgs::Identities(a) => self.identities(a),
            TaskArgs::Conformal(a) => self.conformal(a),
            TaskArgs::Energy(a) => self.energy(a),
            TaskArgs::Lift(a) => self.lift(a),
            TaskArgs::FixedPoints(a) => self.fixed_points(a),
            TaskArgs::Winding(a) => self.winding(a),
            TaskArgs::Flatten(a) => self.flatten(a),
            TaskArgs::Rl2(a) => self.rl2(a),
            TaskArgs::Reparam(a) => self.reparam(a),
            TaskArgs::Suite(a) => self.suite(a),
            TaskArgs::Couple(a) => self.couple(a),
        }
    }

    fn length(&self, a: &LengthArgs) -> Result<Outcome> {
        let iso = self.iso(&a.isotopy);
        let flavor = a.flavor.unwrap_or(Flavor::L1Inf);
        let quad = self.quad(a.panels);
        let l = match iso.kind() {
            Kind::CoHamiltonian => co_hofer_length(&iso, flavor, &quad)?,
            Kind::AlmostCoHamiltonian => almost_length(&iso, flavor, &quad)?,
            Kind::Cosymplectic => aco_length(&iso, flavor, &quad)?,
        };
        let mut r = VerificationReport::new("length");
        r.info("value", l.value).info("lower", l.lower).info("upper", l.upper);
        if let Some(e) = a.expect {
            enclosure_check(&mut r, e, &l, self.tol().tol_quad);
        }
        Ok(Outcome {
            report: Some(r),
            length: Some(l),
            fixed_points: None,
        })
    }

    fn distance(&self, a: &DistanceArgs) -> Result<Outcome> {
        let (x, y) = (self.iso(&a.a), self.iso(&a.b));
        let l = kind_distance(&x, &y, a.flavor.unwrap_or(Flavor::L1Inf), &self.quad(a.panels))?;
        let mut r = VerificationReport::new("distance");
        r.info("value", l.value).info("lower", l.lower).info("upper", l.upper);
        if let Some(e) = a.expect {
            enclosure_check(&mut r, e, &l, self.tol().tol_quad);
        }
        if let Some(m) = a.max {
            r.check_le("upper_vs_max", l.upper, m, "task bound");
        }
        Ok(Outcome {
            report: Some(r),
            length: Some(l),
            fixed_points: None,
        })
    }

    fn c0(&self, a: &C0Args) -> Result<Outcome> {
        let d = C0Options::default();
        let opts = C0Options {
            resolution: a.resolution.unwrap_or(d.resolution),
            time_nodes: a.time_nodes.unwrap_or(d.time_nodes),
        };
        let rep = path_distance(&self.iso(&a.a), &self.iso(&a.b), &opts)?;
        let mut r = VerificationReport::new("c0_distance");
        r.info("value", rep.value)
            .info("resolution", rep.resolution as f64)
            .info("time_nodes", rep.time_nodes as f64)
            .note("grid lower estimate");
        if let Some(m) = a.max {
            r.check_le("value_vs_max", rep.value, m, "task bound");
        }
        Ok(Outcome::report(r))
    }

    fn pair(&self, a: &PairArgs) -> (CoIsotopy, CoIsotopy, Vec<f64>, Vec<(crate::manifold::Point, f64)>) {
        let x = self.iso(&a.isotopy);
        let y = self.iso(a.other.as_deref().unwrap_or(&a.isotopy));
        let model = x.model();
        let shift = a
            .translation
            .clone()
            .unwrap_or_else(|| random_translation(&mut self.rng(), &model));
        let samples = sample_points(&model, a.samples.unwrap_or(16), self.seed);
        (x, y, shift, samples)
    }

    fn identities(&self, a: &PairArgs) -> Result<Outcome> {
        let (x, y, shift, samples) = self.pair(a);
        if shift.len() != x.model().dim() {
            return Err(Error::InvalidDimension("translation must have one entry per coordinate".into()));
        }
        for k in [x.kind(), y.kind()] {
            if k != Kind::CoHamiltonian {
                return Err(Error::KindMismatch {
                    expected: Kind::CoHamiltonian.to_string(),
                    found: k.to_string(),
                });
            }
        }
        let rho = Conjugator::translation(&shift);
        let tol = self.tol().tol_identity;
        let mut r = VerificationReport::new("identities");
        r.check_le("inverse_generator", fact_inverse_generator(&x, &samples), tol, "tol_identity")
            .check_le("conjugation_generator", fact_conjugation_generator(&x, &rho, &samples), tol, "tol_identity")
            .check_le("product_generator", fact_product_generator(&x, &y, &samples), tol, "tol_identity")
            .check_le("inverse_pullback", fact_inverse_pullback(&x, &samples), tol, "tol_identity")
            .check_le("product_pullback", fact_product_pullback(&x, &y, &samples), tol, "tol_identity")
            .info("samples", samples.len() as f64);
        Ok(Outcome::report(r))
    }

    fn conformal(&self, a: &PairArgs) -> Result<Outcome> {
        let (x, y, shift, samples) = self.pair(a);
        if shift.len() != x.model().dim() {
            return Err(Error::InvalidDimension("translation must have one entry per coordinate".into()));
        }
        let c = conformal_residuals(&x, &y, &shift, &samples);
        let tol = self.tol().tol_identity;
        let mut r = VerificationReport::new("conformal");
        r.check_le("inverse_mu", c.inverse_mu, tol, "tol_identity")
            .check_le("product_mu", c.product_mu, tol, "tol_identity")
            .check_le("conjugation_mu", c.conjugation_mu, tol, "tol_identity")
            .check_le("product_c", c.product_c, tol, "tol_identity")
            .check_le("inverse_c", c.inverse_c, tol, "tol_identity")
            .info("conjugation_mu_literal", c.conjugation_mu_literal)
            .info("inverse_c_literal", c.inverse_c_literal)
            .info("samples", samples.len() as f64);
        Ok(Outcome::report(r))
    }

    fn energy(&self, a: &EnergyArgs) -> Result<Outcome> {
        let iso = self.iso(&a.isotopy);
        let pts = sample_points(&iso.model(), a.samples.unwrap_or(8), self.seed);
        let tol = self.tol().tol_flow;
        let mut drift = 0.0_f64;
        for (q, _) in &pts {
            drift = drift.max(orbit_energy_defect(&iso, q)?);
        }
        let mut r = VerificationReport::new("energy");
        r.check_le("max_defect", drift, tol, "tol_flow");
        if let Some(slope) = a.slope {
            let grid: Vec<f64> = (0..=16).map(|k| k as f64 / 16.0).collect();
            let mut err = 0.0_f64;
            for (q, _) in &pts {
                let prof = orbit_energy_profile(&iso, q, &grid)?;
                let g0 = prof[0].1;
                for (t, g) in prof.iter().skip(1) {
                    err = err.max(((g - g0) / t - slope).abs());
                }
            }
            r.check_le("slope_error", err, tol, "tol_flow");
        }
        r.info("samples", pts.len() as f64);
        Ok(Outcome::report(r))
    }

    fn lift(&self, a: &LiftArgs) -> Result<Outcome> {
        let li = lift_isotopy(&self.iso(&a.isotopy))?;
        let m = a.times.unwrap_or(4).max(1);
        let grid: Vec<f64> = (1..=m).map(|k| k as f64 / m as f64).collect();
        Ok(Outcome::report(check_symplectic(&li, a.samples.unwrap_or(8), &grid, self.seed)))
    }

    fn fixed_points(&self, a: &FixArgs) -> Result<Outcome> {
        let iso = self.iso(&a.isotopy);
        let opts = FixOptions {
            grid_resolution: a.grid.unwrap_or(FixOptions::default().grid_resolution),
            ..Default::default()
        };
        let (set, mut r) = check_fix_lower_bound(&iso, &opts)?;
        if let Some(n) = a.expect_components {
            r.check_flag(format!("exactly_{n}_components"), set.count() == n);
        }
        if a.winding {
            r.merge("winding/", winding_at_fixed_points(&iso, &set, self.tol().tol_quad)?);
        }
        Ok(Outcome {
            report: Some(r),
            length: None,
            fixed_points: Some(set),
        })
    }

    fn winding(&self, a: &WindingArgs) -> Result<Outcome> {
        let iso = self.iso(&a.isotopy);
        let model = iso.model();
        let dim = model.dim();
        let res = a.resolution.unwrap_or(self.tol().quad_grid);
        // flux identity needs a form not involving dz
        let forms: Vec<(String, OneFormField, bool)> = match &a.alpha {
            Some(rec) => vec![("alpha".into(), OneFormField::from_record(rec, &model)?, true)],
            None => (0..dim)
                .map(|d| (format!("d{d}"), OneFormField::basis(dim, d), d < dim - 1))
                .collect(),
        };
        let tol = self.tol().tol_identity;
        let mut r = VerificationReport::new("winding");
        for (name, alpha, flux) in &forms {
            r.merge(&format!("{name}/"), mean_winding_integral(&iso, alpha, res, tol)?);
            if *flux {
                r.check_le(
                    format!("{name}/flux_identity"),
                    flux_identity_residual(&iso, alpha, res)?,
                    tol,
                    "tol_identity",
                );
            }
        }
        r.info("resolution", res as f64);
        Ok(Outcome::report(r))
    }

    fn flatten(&self, a: &FlattenArgs) -> Result<Outcome> {
        let iso = self.iso(&a.isotopy);
        let opts = FlattenOptions {
            quad: self.quad(None),
            seed: self.seed,
            ..Default::default()
        };
        let (_, r) = if a.normalized {
            normalized_flatten(&iso, a.epsilon, &opts)?
        } else {
            boundary_flatten(&iso, a.epsilon, &opts)?
        };
        Ok(Outcome::report(r))
    }

    fn rl2(&self, a: &Rl2Args) -> Result<Outcome> {
        let r = verify_rl2(
            &self.iso(&a.isotopy),
            &self.curve(&a.xi1),
            &self.curve(&a.xi2),
            &self.quad(None),
            &LipschitzOptions::default(),
        )?;
        Ok(Outcome::report(r))
    }

    fn reparam(&self, a: &ReparamArgs) -> Result<Outcome> {
        let iso = self.iso(&a.isotopy);
        let zeta = self.curve(&a.curve);
        let warped = reparametrize(&iso, &zeta)?;
        let quad = self.quad(a.panels);
        let (l1, l1w) = (length_l1inf(&iso, &quad)?, length_l1inf(&warped, &quad)?);
        let (li, liw) = (length_linf(&iso, &quad)?, length_linf(&warped, &quad)?);
        let mut r = VerificationReport::new("reparam");
        r.check_le("l1inf_invariance", (l1w.value - l1.value).abs(), self.tol().tol_quad, "tol_quad")
            .check_le(
                "linf_bound_excess",
                (liw.value - zeta.max_deriv() * li.value).max(0.0),
                self.tol().tol_flow,
                "tol_flow",
            )
            .info("l1inf", l1.value)
            .info("linf", li.value)
            .info("max_zeta_dot", zeta.max_deriv());
        Ok(Outcome::report(r))
    }

    fn suite(&self, a: &SuiteArgs) -> Result<Outcome> {
        let names = expand_suite(&a.name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{}'", a.name)))?;
        let mut r = VerificationReport::new(format!("suite {}", a.name));
        for n in names {
            let mut p = if a.quick { SuiteParams::quick(&n) } else { SuiteParams::full(&n) };
            p.seed = self.seed;
            r.merge(&format!("{n}/"), run_suite(&n, &p)?);
        }
        Ok(Outcome::report(r))
    }

    fn couple(&self, a: &CoupleArgs) -> Result<Outcome> {
        let c = CosymplecticCouple::from_record(&a.couple)?;
        let mut r = VerificationReport::new("couple");
        let bij = is_cosymplectic(&c);
        r.info("bijective_pairing", if bij { 1.0 } else { 0.0 });
        match reeb_vector(&c) {
            Ok(xi) => {
                let l_res = (c.l().dot(&xi) - 1.0).abs();
                let b_res = (c.b().transpose() * &xi).amax();
                r.check_flag("reeb_vector_exists", true)
                    .check_le("L_of_reeb_minus_one", l_res, self.tol().tol_flow, "tol_flow")
                    .check_le("b_contracted_with_reeb", b_res, self.tol().tol_flow, "tol_flow");
                for (i, v) in xi.iter().enumerate() {
                    r.info(format!("reeb_{i}"), *v);
                }
            }
            Err(e) => {
                r.info("reeb_vector_exists", 0.0).note(e.to_string());
            }
        }
        Ok(Outcome::report(r))
    }
}

/// `expect ∈ [lower − tol, upper + tol]`.
fn enclosure_check(r: &mut VerificationReport, expect: f64, l: &LengthReport, tol: f64) {
    let gap = (l.lower - expect).max(expect - l.upper).max(0.0);
    r.check_le("distance_to_enclosure", gap, tol, "tol_quad")
        .info("expected", expect)
        .info("enclosure_width", l.upper - l.lower);
}
