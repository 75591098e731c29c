//! Scenario files: schema, loading and cross-reference validation.

use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::config::Tolerances;
use crate::fields::{CoIsotopy, Generator, Kind, Normalization, ReebComponent, TermRecord, TimeFourier};
use crate::linalg::CoupleRecord;
use crate::manifold::{ModelSpec, OneFormRecord};
use crate::norms::Flavor;
use crate::reparam::ReparamCurve;

pub const SCHEMA_VERSION: &str = "cokinetic-scenario/1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    /// `pointer` is a JSON pointer into the scenario document.
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("reference error at {pointer}: unknown {what} '{name}'")]
    Reference {
        pointer: String,
        what: String,
        name: String,
    },
}

fn schema(pointer: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Schema {
        pointer: pointer.into(),
        message: message.to_string(),
    }
}

// ---- the document as written ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: String,
    pub seed: u64,
    pub model: ModelSpec,
    /// Task tolerances default to these.
    #[serde(default)]
    pub defaults: Tolerances,
    #[serde(default)]
    pub isotopies: Vec<IsotopyDecl>,
    #[serde(default)]
    pub curves: Vec<CurveDecl>,
    #[serde(default)]
    pub tasks: Vec<TaskDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotopyDecl {
    pub name: String,
    pub kind: Kind,
    #[serde(default)]
    pub generator: Vec<TermRecord>,
    #[serde(default)]
    pub normalization: Normalization,
    /// Terms in `z` alone (`k` of length one).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reeb: Option<Vec<TermRecord>>,
    /// Harmonic part, cosymplectic kind only: one polynomial in `t` per
    /// `x`/`y` coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonic: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Name of a declared curve; the isotopy is reparameterized by it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDecl {
    pub name: String,
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDecl {
    /// Defaults to the command name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub command: Command,
    #[serde(default)]
    pub arguments: Value,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Length,
    Distance,
    C0Distance,
    Identities,
    Conformal,
    Energy,
    Lift,
    FixedPoints,
    Winding,
    Flatten,
    Rl2,
    Reparam,
    Suite,
    Couple,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Length => "length",
            Command::Distance => "distance",
            Command::C0Distance => "c0-distance",
            Command::Identities => "identities",
            Command::Conformal => "conformal",
            Command::Energy => "energy",
            Command::Lift => "lift",
            Command::FixedPoints => "fixed-points",
            Command::Winding => "winding",
            Command::Flatten => "flatten",
            Command::Rl2 => "rl2",
            Command::Reparam => "reparam",
            Command::Suite => "suite",
            Command::Couple => "couple",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_flow: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_quad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_identity: Option<f64>,
    /// Overrides the flow resolution of every isotopy the task touches.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub osc_resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_grid: Option<usize>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: &Tolerances) -> Tolerances {
        Tolerances {
            tol_flow: self.tol_flow.unwrap_or(base.tol_flow),
            tol_quad: self.tol_quad.unwrap_or(base.tol_quad),
            tol_identity: self.tol_identity.unwrap_or(base.tol_identity),
            steps: self.steps.unwrap_or(base.steps),
            osc_resolution: self.osc_resolution.unwrap_or(base.osc_resolution),
            quad_grid: self.quad_grid.unwrap_or(base.quad_grid),
        }
    }
}

// ---- per-command arguments ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthArgs {
    pub isotopy: String,
    #[serde(default)]
    pub flavor: Option<Flavor>,
    /// Expected value, checked against the certified enclosure.
    #[serde(default)]
    pub expect: Option<f64>,
    #[serde(default)]
    pub panels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceArgs {
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub flavor: Option<Flavor>,
    #[serde(default)]
    pub expect: Option<f64>,
    /// Upper bound the distance must respect.
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub panels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct C0Args {
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub time_nodes: Option<usize>,
    #[serde(default)]
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairArgs {
    pub isotopy: String,
    /// Second path for product identities (defaults to `isotopy`).
    #[serde(default)]
    pub other: Option<String>,
    /// Flat translation for conjugation identities (defaults to a seeded draw).
    #[serde(default)]
    pub translation: Option<Vec<f64>>,
    #[serde(default)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyArgs {
    pub isotopy: String,
    #[serde(default)]
    pub samples: Option<usize>,
    /// Expected constant slope of `t ↦ G(φ_t p)` (line topology).
    #[serde(default)]
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftArgs {
    pub isotopy: String,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub times: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixArgs {
    pub isotopy: String,
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default)]
    pub expect_components: Option<usize>,
    /// Also check that windings vanish at the fixed points.
    #[serde(default)]
    pub winding: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindingArgs {
    pub isotopy: String,
    /// Closed one-form; defaults to every coordinate differential.
    #[serde(default)]
    pub alpha: Option<OneFormRecord>,
    #[serde(default)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlattenArgs {
    pub isotopy: String,
    pub epsilon: f64,
    #[serde(default)]
    pub normalized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rl2Args {
    pub isotopy: String,
    pub xi1: String,
    pub xi2: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReparamArgs {
    pub isotopy: String,
    pub curve: String,
    #[serde(default)]
    pub panels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteArgs {
    /// A suite or a suite group.
    pub name: String,
    #[serde(default)]
    pub quick: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupleArgs {
    pub couple: CoupleRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskArgs {
    Length(LengthArgs),
    Distance(DistanceArgs),
    C0Distance(C0Args),
    Identities(PairArgs),
    Conformal(PairArgs),
    Energy(EnergyArgs),
    Lift(LiftArgs),
    FixedPoints(FixArgs),
    Winding(WindingArgs),
    Flatten(FlattenArgs),
    Rl2(Rl2Args),
    Reparam(ReparamArgs),
    Suite(SuiteArgs),
    Couple(CoupleArgs),
}

impl TaskArgs {
    /// `(argument key, name)` of every isotopy reference.
    fn isotopy_refs(&self) -> Vec<(&'static str, &str)> {
        match self {
            TaskArgs::Length(a) => vec![("isotopy", &a.isotopy)],
            TaskArgs::Distance(a) => vec![("a", &a.a), ("b", &a.b)],
            TaskArgs::C0Distance(a) => vec![("a", &a.a), ("b", &a.b)],
            TaskArgs::Identities(a) | TaskArgs::Conformal(a) => {
                let mut v = vec![("isotopy", a.isotopy.as_str())];
                if let Some(o) = &a.other {
                    v.push(("other", o));
                }
                v
            }
            TaskArgs::Energy(a) => vec![("isotopy", &a.isotopy)],
            TaskArgs::Lift(a) => vec![("isotopy", &a.isotopy)],
            TaskArgs::FixedPoints(a) => vec![("isotopy", &a.isotopy)],
            TaskArgs::Winding(a) => vec![("isotopy", &a.isotopy)],
            TaskArgs::Flatten(a) => vec![("isotopy", &a.isotopy)],
            TaskArgs::Rl2(a) => vec![("isotopy", &a.isotopy)],
            TaskArgs::Reparam(a) => vec![("isotopy", &a.isotopy)],
            TaskArgs::Suite(_) | TaskArgs::Couple(_) => vec![],
        }
    }

    fn curve_refs(&self) -> Vec<(&'static str, &str)> {
        match self {
            TaskArgs::Rl2(a) => vec![("xi1", &a.xi1), ("xi2", &a.xi2)],
            TaskArgs::Reparam(a) => vec![("curve", &a.curve)],
            _ => vec![],
        }
    }
}

// ---- the validated scenario ----

#[derive(Debug, Clone, PartialEq)]
pub struct NamedIsotopy {
    pub name: String,
    pub iso: CoIsotopy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedCurve {
    pub name: String,
    pub curve: ReparamCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub name: String,
    pub command: Command,
    pub args: TaskArgs,
    pub tolerances: Tolerances,
    pub overrides: ToleranceOverrides,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: ModelSpec,
    pub seed: u64,
    pub defaults: Tolerances,
    pub isotopies: Vec<NamedIsotopy>,
    pub curves: Vec<NamedCurve>,
    pub tasks: Vec<Task>,
    source: ScenarioFile,
}

impl Scenario {
    pub fn isotopy(&self, name: &str) -> Option<&CoIsotopy> {
        self.isotopies.iter().find(|x| x.name == name).map(|x| &x.iso)
    }

    pub fn curve(&self, name: &str) -> Option<&ReparamCurve> {
        self.curves.iter().find(|x| x.name == name).map(|x| &x.curve)
    }

    /// The document as loaded.
    pub fn file(&self) -> &ScenarioFile {
        &self.source
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.source).expect("scenario serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let value: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = typed(value, "")?;
        Self::from_file(file)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self, ScenarioError> {
        validate(file)
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Scenario::from_json(&text)
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut s = String::new();
    for seg in path.iter() {
        s.push('/');
        match seg {
            Segment::Seq { index } => s.push_str(&index.to_string()),
            Segment::Map { key } => s.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => s.push_str(variant),
            Segment::Unknown => s.push('?'),
        }
    }
    s
}

/// Deserializes `value`, reporting failures with a pointer below `prefix`.
fn typed<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T, ScenarioError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = pointer_of(e.path());
        let message = e.inner().to_string();
        schema(format!("{prefix}{inner}"), message)
    })
}

fn check_names<'a>(
    names: impl Iterator<Item = &'a str>,
    section: &str,
    seen: &mut BTreeSet<String>,
) -> Result<(), ScenarioError> {
    for (i, n) in names.enumerate() {
        let ptr = format!("/{section}/{i}/name");
        if n.is_empty() {
            return Err(schema(ptr, "names must be non-empty"));
        }
        if !seen.insert(n.to_string()) {
            return Err(schema(ptr, format!("duplicate name '{n}'")));
        }
    }
    Ok(())
}

fn check_tolerances(t: &Tolerances, ptr: &str) -> Result<(), ScenarioError> {
    t.validate().map_err(|m| schema(ptr, m))
}

fn build_isotopy(
    decl: &IsotopyDecl,
    model: ModelSpec,
    defaults: &Tolerances,
    curves: &[NamedCurve],
    ptr: &str,
) -> Result<CoIsotopy, ScenarioError> {
    let f = TimeFourier::from_records(model.dim(), &decl.generator)
        .map_err(|e| schema(format!("{ptr}/generator"), e))?;
    let generator = Generator::new(f, decl.normalization).map_err(|e| schema(format!("{ptr}/generator"), e))?;
    let reeb = match &decl.reeb {
        None => None,
        Some(recs) => {
            let c = TimeFourier::from_records(1, recs)
                .and_then(ReebComponent::new)
                .map_err(|e| schema(format!("{ptr}/reeb"), e))?;
            Some(c)
        }
    };
    let steps = decl.steps.unwrap_or(defaults.steps);
    if steps == 0 {
        return Err(schema(format!("{ptr}/steps"), "steps must be positive"));
    }
    let iso = CoIsotopy::new(model, decl.kind, generator, reeb, decl.harmonic.clone(), steps)
        .map_err(|e| schema(format!("{ptr}/generator"), e))?;
    match &decl.warp {
        None => Ok(iso),
        Some(name) => {
            let curve = curves
                .iter()
                .find(|c| &c.name == name)
                .ok_or_else(|| ScenarioError::Reference {
                    pointer: format!("{ptr}/warp"),
                    what: "curve".into(),
                    name: name.clone(),
                })?;
            iso.warped(curve.curve.clone()).map_err(|e| schema(format!("{ptr}/warp"), e))
        }
    }
}

fn parse_args(command: Command, value: Value, ptr: &str) -> Result<TaskArgs, ScenarioError> {
    let value = if value.is_null() {
        Value::Object(Default::default())
    } else {
        value
    };
    Ok(match command {
        Command::Length => TaskArgs::Length(typed(value, ptr)?),
        Command::Distance => TaskArgs::Distance(typed(value, ptr)?),
        Command::C0Distance => TaskArgs::C0Distance(typed(value, ptr)?),
        Command::Identities => TaskArgs::Identities(typed(value, ptr)?),
        Command::Conformal => TaskArgs::Conformal(typed(value, ptr)?),
        Command::Energy => TaskArgs::Energy(typed(value, ptr)?),
        Command::Lift => TaskArgs::Lift(typed(value, ptr)?),
        Command::FixedPoints => TaskArgs::FixedPoints(typed(value, ptr)?),
        Command::Winding => TaskArgs::Winding(typed(value, ptr)?),
        Command::Flatten => TaskArgs::Flatten(typed(value, ptr)?),
        Command::Rl2 => TaskArgs::Rl2(typed(value, ptr)?),
        Command::Reparam => TaskArgs::Reparam(typed(value, ptr)?),
        Command::Suite => TaskArgs::Suite(typed(value, ptr)?),
        Command::Couple => TaskArgs::Couple(typed(value, ptr)?),
    })
}

fn validate(file: ScenarioFile) -> Result<Scenario, ScenarioError> {
    if file.schema != SCHEMA_VERSION {
        return Err(schema(
            "/schema",
            format!("expected \"{SCHEMA_VERSION}\", found \"{}\"", file.schema),
        ));
    }
    file.model.validate().map_err(|e| schema("/model", e))?;
    check_tolerances(&file.defaults, "/defaults")?;

    let mut seen = BTreeSet::new();
    check_names(file.isotopies.iter().map(|x| x.name.as_str()), "isotopies", &mut seen)?;
    check_names(file.curves.iter().map(|x| x.name.as_str()), "curves", &mut seen)?;

    let mut curves = Vec::new();
    for (i, c) in file.curves.iter().enumerate() {
        let rec = crate::reparam::CurveRecord {
            kind: c.kind.clone(),
            params: c.params.clone(),
        };
        let curve = ReparamCurve::try_from(rec).map_err(|m| schema(format!("/curves/{i}"), m))?;
        curve
            .check_range()
            .map_err(|e| schema(format!("/curves/{i}/params"), e))?;
        curves.push(NamedCurve {
            name: c.name.clone(),
            curve,
        });
    }

    let mut isotopies = Vec::new();
    for (i, d) in file.isotopies.iter().enumerate() {
        let iso = build_isotopy(d, file.model, &file.defaults, &curves, &format!("/isotopies/{i}"))?;
        isotopies.push(NamedIsotopy {
            name: d.name.clone(),
            iso,
        });
    }

    let mut tasks = Vec::new();
    let mut task_names = BTreeSet::new();
    for (i, t) in file.tasks.iter().enumerate() {
        let ptr = format!("/tasks/{i}");
        let name = t.name.clone().unwrap_or_else(|| t.command.as_str().to_string());
        if !task_names.insert(name.clone()) {
            return Err(schema(format!("{ptr}/name"), format!("duplicate task name '{name}'")));
        }
        let args = parse_args(t.command, t.arguments.clone(), &format!("{ptr}/arguments"))?;
        for (key, r) in args.isotopy_refs() {
            if !isotopies.iter().any(|x| x.name == r) {
                return Err(ScenarioError::Reference {
                    pointer: format!("{ptr}/arguments/{key}"),
                    what: "isotopy".into(),
                    name: r.to_string(),
                });
            }
        }
        for (key, r) in args.curve_refs() {
            if !curves.iter().any(|x| x.name == r) {
                return Err(ScenarioError::Reference {
                    pointer: format!("{ptr}/arguments/{key}"),
                    what: "curve".into(),
                    name: r.to_string(),
                });
            }
        }
        let tolerances = t.tolerances.apply(&file.defaults);
        check_tolerances(&tolerances, &format!("{ptr}/tolerances"))?;
        tasks.push(Task {
            name,
            command: t.command,
            args,
            tolerances,
            overrides: t.tolerances,
        });
    }

    Ok(Scenario {
        model: file.model,
        seed: file.seed,
        defaults: file.defaults,
        isotopies,
        curves,
        tasks,
        source: file,
    })
}
