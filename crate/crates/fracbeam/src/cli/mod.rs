//! Command-line front end: configuration parsing, batch execution,
//! parameter sweeps, and CSV emission.
//!
//! Configuration is a TOML document with sections mirroring the problem
//! description: `beam`, `material`, `fractional`, `mesh`, `loads`,
//! `bcs`, `solver`, `output`. The fields `fractional.alpha`,
//! `fractional.l_f`, and `loads.thermal.magnitude` accept either a
//! scalar or a list; a list marks the sweep parameter and at most one
//! list is allowed per document. Every emitted CSV starts with `#`
//! comment lines echoing the fully resolved configuration, applied
//! defaults marked, so a result file identifies its inputs without the
//! original document.

use std::io;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use crate::fem::assemble::{AssemblyOptions, BeamSystem, LoadCase};
use crate::fem::Mesh;
use crate::frac::FractionalParams;
use crate::oracle;
use crate::solver::{newton_raphson, solve_linear, SolutionField, SolverConfig};
use crate::thermo::{
    beam_axial_stress, normalized_stress, BeamSpec, BoundaryCondition, StrainMode, ThermalField,
};
use crate::{Error, Result};

/// Thickness sample count of the stress profile.
const STRESS_SAMPLES: usize = 21;

/// Default output directory when neither the document nor `--out`
/// names one.
const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Parser)]
#[command(
    name = "fracbeam",
    version,
    about = "Fractional-order nonlocal thermoelastic beam solver"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the single case described by a configuration file.
    Run {
        /// Path to the TOML configuration.
        config: PathBuf,
        /// Output directory; overrides `output.directory`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep wall-clock metadata out of the files so identical
        /// configurations produce byte-identical output.
        #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
        reproducible: bool,
    },
    /// Solve every point of the sweep list in a configuration file.
    Sweep {
        /// Path to the TOML configuration; exactly one of
        /// `fractional.alpha`, `fractional.l_f`,
        /// `loads.thermal.magnitude` must be a list.
        config: PathBuf,
        /// Output directory; overrides `output.directory`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep wall-clock metadata out of the files so identical
        /// configurations produce byte-identical output.
        #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
        reproducible: bool,
    },
    /// Run a catalogued verification case against the solver and report
    /// pass or fail.
    Oracle {
        /// Case identifier; one of ss-udtl, cc-udtl, ss-thermal-moment,
        /// cc-uniform-heating.
        case_id: String,
        /// Output directory for the solution profile.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Element count for the verification mesh.
        #[arg(long, default_value_t = 100)]
        ne: usize,
        /// Keep wall-clock metadata out of the files so identical
        /// configurations produce byte-identical output.
        #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
        reproducible: bool,
    },
    /// Parse a configuration, apply defaults, and print the resolved
    /// values without solving.
    Validate {
        /// Path to the TOML configuration.
        config: PathBuf,
    },
}

/// Parses the process arguments, executes the chosen subcommand, and
/// returns the exit code: 0 success, 1 configuration error, 2 solver
/// failure, 3 I/O failure.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => 1,
                Error::NoConvergence(_) | Error::Linalg(_) => 2,
                Error::Io(_) => 3,
            }
        }
    }
}

fn dispatch(command: &Command) -> Result<i32> {
    match command {
        Command::Run {
            config,
            out,
            reproducible,
        } => {
            let plan = resolve(&read_config(config)?, out.as_deref())?;
            if let Some(info) = &plan.sweep {
                return Err(Error::Config(format!(
                    "{} is a sweep list; use the sweep subcommand",
                    info.key
                )));
            }
            execute(&plan, *reproducible)
        }
        Command::Sweep {
            config,
            out,
            reproducible,
        } => {
            let plan = resolve(&read_config(config)?, out.as_deref())?;
            if plan.sweep.is_none() {
                return Err(Error::Config(
                    "no sweep list found; give exactly one of fractional.alpha, \
                     fractional.l_f, loads.thermal.magnitude as a list"
                        .into(),
                ));
            }
            execute(&plan, *reproducible)
        }
        Command::Oracle {
            case_id,
            out,
            ne,
            reproducible,
        } => run_oracle(case_id, out.as_deref(), *ne, *reproducible),
        Command::Validate { config } => {
            let plan = resolve(&read_config(config)?, None)?;
            for line in &plan.echo {
                println!("{line}");
            }
            println!(
                "configuration valid ({} case{})",
                plan.cases.len(),
                plural(plan.cases.len())
            );
            Ok(0)
        }
    }
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_with_path(path, e))
}

fn io_with_path(path: &Path, e: io::Error) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------
// configuration document
// ---------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    beam: BeamDoc,
    material: MaterialDoc,
    fractional: FractionalDoc,
    #[serde(default)]
    mesh: MeshDoc,
    loads: LoadsDoc,
    bcs: BcsDoc,
    #[serde(default)]
    solver: SolverDoc,
    #[serde(default)]
    output: OutputDoc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BeamDoc {
    #[serde(rename = "L")]
    length: f64,
    #[serde(rename = "b")]
    width: f64,
    #[serde(rename = "h")]
    height: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialDoc {
    #[serde(rename = "E")]
    youngs: f64,
    alpha0: f64,
    nu: Option<f64>,
    rho0: Option<f64>,
    #[serde(rename = "Cv0")]
    cv0: Option<f64>,
    #[serde(rename = "T0")]
    t0: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FractionalDoc {
    alpha: ScalarOrList,
    l_f: ScalarOrList,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshDoc {
    #[serde(rename = "Ne")]
    n_elems: Option<usize>,
    #[serde(rename = "N_inf")]
    n_inf: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadsDoc {
    q0: Option<f64>,
    axial: Option<f64>,
    thermal: Option<ThermalDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThermalDoc {
    kind: String,
    magnitude: ScalarOrList,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BcsDoc {
    left: String,
    right: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverDoc {
    mode: Option<String>,
    tol: Option<f64>,
    max_iters: Option<usize>,
    load_steps: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputDoc {
    directory: Option<String>,
    quantities: Option<Vec<String>>,
}

/// A field that is either one value or a sweep list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ScalarOrList {
    Scalar(f64),
    List(Vec<f64>),
}

impl ScalarOrList {
    fn as_list(&self, key: &str) -> Result<Option<&[f64]>> {
        match self {
            Self::Scalar(_) => Ok(None),
            Self::List(values) if values.is_empty() => {
                Err(Error::Config(format!("{key} sweep list must not be empty")))
            }
            Self::List(values) => Ok(Some(values)),
        }
    }

    fn scalar(&self) -> f64 {
        match self {
            Self::Scalar(v) => *v,
            Self::List(values) => values[0],
        }
    }
}

// ---------------------------------------------------------------------
// resolution
// ---------------------------------------------------------------------

/// One fully resolved solve.
#[derive(Debug, Clone)]
pub struct ResolvedCase {
    /// Geometry, material, and supports.
    pub spec: BeamSpec,
    /// Fractional order and horizon length.
    pub params: FractionalParams,
    /// Element mesh.
    pub mesh: Mesh,
    /// Line loads and temperature field.
    pub loads: LoadCase,
    /// Iteration controls; `mode` picks the kinematics.
    pub solver: SolverConfig,
    /// Resolved-configuration lines for the output metadata block.
    pub echo: Vec<String>,
}

/// Sweep parameter of a document that holds a list.
#[derive(Debug, Clone)]
pub struct SweepInfo {
    /// Configuration key holding the list.
    pub key: String,
    /// Short parameter name used in the summary table.
    pub param: String,
    /// Grid values in document order.
    pub values: Vec<f64>,
}

/// A parsed and fully resolved configuration document.
#[derive(Debug, Clone)]
pub struct RunPlan {
    /// One resolved case per solve: a single entry, or one per sweep
    /// point.
    pub cases: Vec<ResolvedCase>,
    /// Present when the document holds a sweep list.
    pub sweep: Option<SweepInfo>,
    /// Output directory.
    pub directory: PathBuf,
    /// Whether stress profiles were requested.
    pub stress: bool,
    /// Document-level resolved-configuration lines (the sweep parameter
    /// shown as its full list).
    pub echo: Vec<String>,
}

/// Parses a configuration document and applies the documented defaults
/// (`material.nu` 0.3, `solver.tol` 1e-8, `mesh.N_inf` 10, and the
/// remaining optional keys).
pub fn parse_config(text: &str) -> Result<RunPlan> {
    resolve(text, None)
}

fn resolve(text: &str, out_override: Option<&Path>) -> Result<RunPlan> {
    let doc: ConfigDoc = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;

    require_positive("beam.L", doc.beam.length)?;
    require_positive("beam.b", doc.beam.width)?;
    require_positive("beam.h", doc.beam.height)?;
    require_positive("material.E", doc.material.youngs)?;

    let (nu, nu_default) = defaulted(doc.material.nu, 0.3);
    if !(-1.0 < nu && nu < 0.5) {
        return Err(Error::Config(format!(
            "material.nu must lie in (-1, 0.5), got {nu}"
        )));
    }
    let (rho0, rho0_default) = defaulted(doc.material.rho0, 2700.0);
    require_positive("material.rho0", rho0)?;
    let (cv0, cv0_default) = defaulted(doc.material.cv0, 900.0);
    require_positive("material.Cv0", cv0)?;
    let (t0, t0_default) = defaulted(doc.material.t0, 300.0);
    require_positive("material.T0", t0)?;

    for alpha in doc.fractional.alpha.values() {
        if !(*alpha > 0.0 && *alpha <= 1.0) {
            return Err(Error::Config(format!(
                "fractional.alpha must lie in (0,1], got {alpha}"
            )));
        }
    }
    for l_f in doc.fractional.l_f.values() {
        require_positive("fractional.l_f", *l_f)?;
    }

    let (q0, q0_default) = defaulted(doc.loads.q0, 0.0);
    let (axial, axial_default) = defaulted(doc.loads.axial, 0.0);
    let thermal_kind = match &doc.loads.thermal {
        None => None,
        Some(t) => Some(parse_thermal_kind(&t.kind)?),
    };

    let bc_left = parse_bc("bcs.left", &doc.bcs.left)?;
    let bc_right = parse_bc("bcs.right", &doc.bcs.right)?;

    let (mode_name, mode_default) = match &doc.solver.mode {
        Some(m) => (m.as_str(), false),
        None => ("linear", true),
    };
    let mode = match mode_name {
        "linear" => StrainMode::Linear,
        "nonlinear" => StrainMode::VonKarman,
        other => {
            return Err(Error::Config(format!(
                "solver.mode: unknown value \"{other}\" (expected linear | nonlinear)"
            )))
        }
    };
    let (tol, tol_default) = defaulted(doc.solver.tol, 1e-8);
    require_positive("solver.tol", tol)?;
    let (max_iters, max_iters_default) = defaulted(doc.solver.max_iters, 50);
    if max_iters < 1 {
        return Err(Error::Config("solver.max_iters must be at least 1".into()));
    }
    let (load_steps, load_steps_default) = defaulted(doc.solver.load_steps, 10);
    if load_steps < 1 {
        return Err(Error::Config("solver.load_steps must be at least 1".into()));
    }
    let solver = SolverConfig {
        tol_rel_residual: tol,
        max_iters,
        load_steps,
        mode,
    };

    if doc.mesh.n_elems.is_some() && doc.mesh.n_inf.is_some() {
        return Err(Error::Config(
            "mesh.Ne and mesh.N_inf are mutually exclusive; give exactly one".into(),
        ));
    }
    if let Some(ne) = doc.mesh.n_elems {
        if ne < 2 {
            return Err(Error::Config(format!(
                "mesh.Ne must be at least 2, got {ne}"
            )));
        }
    }
    if let Some(n_inf) = doc.mesh.n_inf {
        require_positive("mesh.N_inf", n_inf)?;
    }

    let (directory, directory_default) = match out_override {
        Some(dir) => (dir.to_path_buf(), false),
        None => match &doc.output.directory {
            Some(d) => (PathBuf::from(d), false),
            None => (PathBuf::from(DEFAULT_OUT_DIR), true),
        },
    };
    let (quantities, quantities_default) = match &doc.output.quantities {
        Some(qs) => (qs.clone(), false),
        None => (vec!["displacement".to_string()], true),
    };
    for q in &quantities {
        if q != "displacement" && q != "stress" {
            return Err(Error::Config(format!(
                "output.quantities: unknown value \"{q}\" (expected displacement | stress)"
            )));
        }
    }
    let stress = quantities.iter().any(|q| q == "stress");

    // at most one of the three sweepable keys may hold a list
    let alpha_list = doc.fractional.alpha.as_list("fractional.alpha")?;
    let l_f_list = doc.fractional.l_f.as_list("fractional.l_f")?;
    let thermal_list = match &doc.loads.thermal {
        None => None,
        Some(t) => t.magnitude.as_list("loads.thermal.magnitude")?,
    };
    let list_keys: Vec<&str> = [
        alpha_list.map(|_| "fractional.alpha"),
        l_f_list.map(|_| "fractional.l_f"),
        thermal_list.map(|_| "loads.thermal.magnitude"),
    ]
    .into_iter()
    .flatten()
    .collect();
    if list_keys.len() > 1 {
        return Err(Error::Config(format!(
            "only one sweep list is allowed; found lists in {}",
            list_keys.join(" and ")
        )));
    }

    let sweep = match list_keys.first() {
        None => None,
        Some(&key) => {
            let (param, values) = match key {
                "fractional.alpha" => ("alpha", alpha_list.unwrap()),
                "fractional.l_f" => ("l_f", l_f_list.unwrap()),
                _ => (
                    match thermal_kind.unwrap() {
                        ThermalKind::Uniform => "theta0",
                        _ => "theta1",
                    },
                    thermal_list.unwrap(),
                ),
            };
            Some(SweepInfo {
                key: key.to_string(),
                param: param.to_string(),
                values: values.to_vec(),
            })
        }
    };

    let lambda = doc.material.youngs * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = doc.material.youngs / (2.0 * (1.0 + nu));
    let spec = BeamSpec {
        length: doc.beam.length,
        width: doc.beam.width,
        height: doc.beam.height,
        youngs: doc.material.youngs,
        alpha0: doc.material.alpha0,
        lambda,
        mu,
        rho0,
        cv0,
        t0,
        bc_left,
        bc_right,
    };

    // everything below is per grid point, since the mesh may follow l_f
    let base_alpha = doc.fractional.alpha.scalar();
    let base_l_f = doc.fractional.l_f.scalar();
    let base_theta = doc.loads.thermal.as_ref().map(|t| t.magnitude.scalar());

    let grid: Vec<Option<f64>> = match &sweep {
        None => vec![None],
        Some(info) => info.values.iter().copied().map(Some).collect(),
    };

    let defaults = EchoDefaults {
        nu: nu_default,
        rho0: rho0_default,
        cv0: cv0_default,
        t0: t0_default,
        q0: q0_default,
        axial: axial_default,
        mode: mode_default,
        tol: tol_default,
        max_iters: max_iters_default,
        load_steps: load_steps_default,
        directory: directory_default,
        quantities: quantities_default,
        out_override: out_override.is_some(),
    };

    let mut cases = Vec::with_capacity(grid.len());
    for point in &grid {
        let (alpha, l_f, theta) = match (&sweep, point) {
            (Some(info), Some(v)) => match info.key.as_str() {
                "fractional.alpha" => (*v, base_l_f, base_theta),
                "fractional.l_f" => (base_alpha, *v, base_theta),
                _ => (base_alpha, base_l_f, Some(*v)),
            },
            _ => (base_alpha, base_l_f, base_theta),
        };
        let params = FractionalParams::new(alpha, l_f)?;
        let (mesh, mesh_echo) = match (doc.mesh.n_elems, doc.mesh.n_inf) {
            (Some(ne), _) => (Mesh::new(spec.length, ne)?, vec![format!("mesh.Ne = {ne}")]),
            (None, n_inf) => {
                let (n_inf, tag) = defaulted(n_inf, 10.0);
                let mesh = Mesh::with_horizon_density(spec.length, l_f, n_inf)?;
                let lines = vec![
                    format!("mesh.N_inf = {}{}", fmt(n_inf), default_tag(tag)),
                    format!("mesh.Ne = {} (from N_inf)", mesh.n_elems),
                ];
                (mesh, lines)
            }
        };
        let thermal = thermal_kind.map(|kind| kind.field(theta.unwrap()));
        let loads = LoadCase {
            axial,
            transverse: q0,
            thermal,
        };
        let echo = echo_lines(
            &spec,
            alpha,
            l_f,
            &mesh_echo,
            q0,
            axial,
            &doc,
            theta,
            mode_name,
            &solver,
            &directory,
            &quantities,
            &defaults,
            sweep.as_ref().zip(*point),
        );
        cases.push(ResolvedCase {
            spec,
            params,
            mesh,
            loads,
            solver,
            echo,
        });
    }

    // document-level echo: the swept key keeps its list form
    let echo = match &sweep {
        None => cases[0].echo.clone(),
        Some(info) => {
            let list = format!(
                "{} = [{}]",
                info.key,
                info.values
                    .iter()
                    .map(|v| fmt(*v))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            let mut lines: Vec<String> = cases[0]
                .echo
                .iter()
                .filter(|l| !l.starts_with("sweep."))
                .map(|l| {
                    if l.starts_with(&format!("{} = ", info.key)) {
                        list.clone()
                    } else {
                        l.clone()
                    }
                })
                .collect();
            lines.push(format!("sweep.param = {}", info.param));
            lines.push(format!("sweep.points = {}", info.values.len()));
            lines
        }
    };

    Ok(RunPlan {
        cases,
        sweep,
        directory,
        stress,
        echo,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ThermalKind {
    Uniform,
    LinearThickness,
    ParabolicLength,
}

impl ThermalKind {
    fn field(self, magnitude: f64) -> ThermalField {
        match self {
            Self::Uniform => ThermalField::Uniform { theta0: magnitude },
            Self::LinearThickness => ThermalField::LinearThickness { theta1: magnitude },
            Self::ParabolicLength => ThermalField::ParabolicLength { theta1: magnitude },
        }
    }
}

fn parse_thermal_kind(kind: &str) -> Result<ThermalKind> {
    match kind {
        "uniform" => Ok(ThermalKind::Uniform),
        "linear_thickness" => Ok(ThermalKind::LinearThickness),
        "parabolic_length" => Ok(ThermalKind::ParabolicLength),
        other => Err(Error::Config(format!(
            "loads.thermal.kind: unknown value \"{other}\" \
             (expected uniform | linear_thickness | parabolic_length)"
        ))),
    }
}

fn parse_bc(key: &str, value: &str) -> Result<BoundaryCondition> {
    match value {
        "clamped" => Ok(BoundaryCondition::Clamped),
        "pinned" => Ok(BoundaryCondition::Pinned),
        "pinned_movable" => Ok(BoundaryCondition::PinnedMovable),
        "free" => Ok(BoundaryCondition::Free),
        other => Err(Error::Config(format!(
            "{key}: unknown value \"{other}\" \
             (expected clamped | pinned | pinned_movable | free)"
        ))),
    }
}

impl ScalarOrList {
    fn values(&self) -> &[f64] {
        match self {
            Self::Scalar(v) => std::slice::from_ref(v),
            Self::List(values) => values,
        }
    }
}

fn require_positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Config(format!("{key} must be positive, got {v}")))
    }
}

fn defaulted<T>(value: Option<T>, fallback: T) -> (T, bool) {
    match value {
        Some(v) => (v, false),
        None => (fallback, true),
    }
}

struct EchoDefaults {
    nu: bool,
    rho0: bool,
    cv0: bool,
    t0: bool,
    q0: bool,
    axial: bool,
    mode: bool,
    tol: bool,
    max_iters: bool,
    load_steps: bool,
    directory: bool,
    quantities: bool,
    out_override: bool,
}

fn default_tag(applied: bool) -> &'static str {
    if applied {
        " (default)"
    } else {
        ""
    }
}

/// Scientific notation, shortest form that parses back to the
/// identical bits.
fn fmt(v: f64) -> String {
    format!("{v:e}")
}

#[allow(clippy::too_many_arguments)]
fn echo_lines(
    spec: &BeamSpec,
    alpha: f64,
    l_f: f64,
    mesh_echo: &[String],
    q0: f64,
    axial: f64,
    doc: &ConfigDoc,
    theta: Option<f64>,
    mode_name: &str,
    solver: &SolverConfig,
    directory: &Path,
    quantities: &[String],
    defaults: &EchoDefaults,
    sweep_point: Option<(&SweepInfo, f64)>,
) -> Vec<String> {
    let nu = doc.material.nu.unwrap_or(0.3);
    let mut lines = vec![
        format!("beam.L = {}", fmt(spec.length)),
        format!("beam.b = {}", fmt(spec.width)),
        format!("beam.h = {}", fmt(spec.height)),
        format!("material.E = {}", fmt(spec.youngs)),
        format!("material.alpha0 = {}", fmt(spec.alpha0)),
        format!("material.nu = {}{}", fmt(nu), default_tag(defaults.nu)),
        format!(
            "material.rho0 = {}{}",
            fmt(spec.rho0),
            default_tag(defaults.rho0)
        ),
        format!(
            "material.Cv0 = {}{}",
            fmt(spec.cv0),
            default_tag(defaults.cv0)
        ),
        format!("material.T0 = {}{}", fmt(spec.t0), default_tag(defaults.t0)),
        format!("fractional.alpha = {}", fmt(alpha)),
        format!("fractional.l_f = {}", fmt(l_f)),
    ];
    lines.extend(mesh_echo.iter().cloned());
    lines.push(format!(
        "loads.q0 = {}{}",
        fmt(q0),
        default_tag(defaults.q0)
    ));
    lines.push(format!(
        "loads.axial = {}{}",
        fmt(axial),
        default_tag(defaults.axial)
    ));
    match (&doc.loads.thermal, theta) {
        (Some(t), Some(theta)) => {
            lines.push(format!("loads.thermal.kind = {}", t.kind));
            lines.push(format!("loads.thermal.magnitude = {}", fmt(theta)));
        }
        _ => lines.push("loads.thermal.kind = none".to_string()),
    }
    lines.push(format!("bcs.left = {}", bc_name(spec.bc_left)));
    lines.push(format!("bcs.right = {}", bc_name(spec.bc_right)));
    lines.push(format!(
        "solver.mode = {}{}",
        mode_name,
        default_tag(defaults.mode)
    ));
    lines.push(format!(
        "solver.tol = {}{}",
        fmt(solver.tol_rel_residual),
        default_tag(defaults.tol)
    ));
    lines.push(format!(
        "solver.max_iters = {}{}",
        solver.max_iters,
        default_tag(defaults.max_iters)
    ));
    lines.push(format!(
        "solver.load_steps = {}{}",
        solver.load_steps,
        default_tag(defaults.load_steps)
    ));
    lines.push(format!(
        "output.directory = {}{}",
        directory.display(),
        if defaults.out_override {
            " (from --out)"
        } else {
            default_tag(defaults.directory)
        }
    ));
    lines.push(format!(
        "output.quantities = [{}]{}",
        quantities.join(", "),
        default_tag(defaults.quantities)
    ));
    if let Some((info, value)) = sweep_point {
        lines.push(format!("sweep.param = {}", info.param));
        lines.push(format!("sweep.value = {}", fmt(value)));
    }
    lines
}

fn bc_name(bc: BoundaryCondition) -> &'static str {
    match bc {
        BoundaryCondition::Clamped => "clamped",
        BoundaryCondition::Pinned => "pinned",
        BoundaryCondition::PinnedMovable => "pinned_movable",
        BoundaryCondition::Free => "free",
    }
}

// ---------------------------------------------------------------------
// result tables
// ---------------------------------------------------------------------

/// A column-oriented result ready for CSV emission: `#` comment lines,
/// a header row, then data rows in full double precision.
#[derive(Debug, Clone)]
pub struct ResultTable {
    /// Metadata lines, written with a `# ` prefix.
    pub comments: Vec<String>,
    /// Column names.
    pub columns: Vec<&'static str>,
    /// One entry per column per row, already formatted.
    pub rows: Vec<Vec<String>>,
}

impl ResultTable {
    /// The byte-exact file content.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            s.push_str("# ");
            s.push_str(c);
            s.push('\n');
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Writes a table; the error names the path.
pub fn write_csv(table: &ResultTable, path: &Path) -> Result<()> {
    std::fs::write(path, table.to_csv_string()).map_err(|e| io_with_path(path, e))
}

/// Nodal displacement profile: x1_m, u0_m, w0_m, dw0dx1.
pub fn displacement_table(
    case: &ResolvedCase,
    solution: &SolutionField,
    comments: Vec<String>,
) -> ResultTable {
    let u0 = solution.u0();
    let w0 = solution.w0();
    let dw0 = solution.w0_prime();
    let rows = case
        .mesh
        .nodes
        .iter()
        .enumerate()
        .map(|(i, x)| vec![fmt(*x), fmt(u0[i]), fmt(w0[i]), fmt(dw0[i])])
        .collect();
    ResultTable {
        comments,
        columns: vec!["x1_m", "u0_m", "w0_m", "dw0dx1"],
        rows,
    }
}

/// Through-thickness stress profile at midspan: x3_m, sigma11_Pa,
/// sigma11_normalized. The normalized column is sigma11 (h/L)^2 / q0,
/// NaN when q0 = 0.
pub fn stress_table(
    case: &ResolvedCase,
    system: &BeamSystem,
    solution: &SolutionField,
    comments: Vec<String>,
) -> Result<ResultTable> {
    let spec = &case.spec;
    let x1 = 0.5 * spec.length;
    let strain = system.strain_at(x1, &solution.full, case.solver.mode)?;
    let q0 = case.loads.transverse;
    let h = spec.height;
    let mut rows = Vec::with_capacity(STRESS_SAMPLES);
    for k in 0..STRESS_SAMPLES {
        let x3 = -0.5 * h + h * k as f64 / (STRESS_SAMPLES - 1) as f64;
        let theta = case
            .loads
            .thermal
            .map_or(0.0, |field| field.evaluate(x1, x3, spec));
        let sigma = beam_axial_stress(&strain, x3, theta, spec);
        let normalized = normalized_stress(sigma, q0, spec).unwrap_or(f64::NAN);
        rows.push(vec![fmt(x3), fmt(sigma), fmt(normalized)]);
    }
    Ok(ResultTable {
        comments,
        columns: vec!["x3_m", "sigma11_Pa", "sigma11_normalized"],
        rows,
    })
}

// ---------------------------------------------------------------------
// execution
// ---------------------------------------------------------------------

/// Builds the discrete system for a resolved case and solves it with
/// the configured kinematics.
pub fn solve_case(case: &ResolvedCase) -> Result<(BeamSystem, SolutionField)> {
    let system = BeamSystem::new(
        case.spec,
        case.params,
        case.mesh.clone(),
        AssemblyOptions::default(),
    )?;
    let solution = match case.solver.mode {
        StrainMode::Linear => solve_linear(&system, &case.loads)?,
        StrainMode::VonKarman => newton_raphson(&system, &case.loads, &case.solver)?,
    };
    Ok((system, solution))
}

struct PointOutput {
    displacement: ResultTable,
    stress: Option<ResultTable>,
    max_w0: f64,
    max_u0: f64,
    iters: usize,
}

fn solve_point(case: &ResolvedCase, stress: bool, stamp: &Option<String>) -> Result<PointOutput> {
    let (system, solution) = solve_case(case)?;
    let comments = with_stamp(case.echo.clone(), stamp);
    let displacement = displacement_table(case, &solution, comments.clone());
    let stress = if stress {
        Some(stress_table(case, &system, &solution, comments)?)
    } else {
        None
    };
    Ok(PointOutput {
        displacement,
        stress,
        max_w0: solution.max_abs_w0(),
        max_u0: solution.max_abs_u0(),
        iters: solution.newton_iters_total,
    })
}

fn with_stamp(mut comments: Vec<String>, stamp: &Option<String>) -> Vec<String> {
    if let Some(s) = stamp {
        comments.push(s.clone());
    }
    comments
}

fn time_stamp(reproducible: bool) -> Option<String> {
    if reproducible {
        return None;
    }
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Some(format!("generated_unix_time = {secs}"))
}

/// Executes a resolved plan: solves every case, writes the CSV files,
/// and returns the exit code (0, or 2 when any grid point failed).
pub fn execute(plan: &RunPlan, reproducible: bool) -> Result<i32> {
    std::fs::create_dir_all(&plan.directory).map_err(|e| io_with_path(&plan.directory, e))?;
    let stamp = time_stamp(reproducible);
    match &plan.sweep {
        None => {
            let case = &plan.cases[0];
            let point = solve_point(case, plan.stress, &stamp)?;
            let path = plan.directory.join("displacement.csv");
            write_csv(&point.displacement, &path)?;
            println!("wrote {}", path.display());
            if let Some(stress) = &point.stress {
                let path = plan.directory.join("stress.csv");
                write_csv(stress, &path)?;
                println!("wrote {}", path.display());
            }
            println!(
                "max |w0| = {:.6e} m, max |u0| = {:.6e} m, newton iterations = {}",
                point.max_w0, point.max_u0, point.iters
            );
            Ok(0)
        }
        Some(info) => {
            let outcomes: Vec<(usize, Result<PointOutput>)> = plan
                .cases
                .par_iter()
                .enumerate()
                .map(|(i, case)| (i, solve_point(case, plan.stress, &stamp)))
                .collect();

            let mut rows = Vec::new();
            let mut failures = Vec::new();
            for (i, outcome) in outcomes {
                let value = info.values[i];
                match outcome {
                    Ok(point) => {
                        let path = plan.directory.join(format!("displacement_{i:03}.csv"));
                        write_csv(&point.displacement, &path)?;
                        if let Some(stress) = &point.stress {
                            write_csv(stress, &plan.directory.join(format!("stress_{i:03}.csv")))?;
                        }
                        println!(
                            "{} = {:.6e}: max |w0| = {:.6e} m, max |u0| = {:.6e} m, \
                             newton iterations = {}",
                            info.param, value, point.max_w0, point.max_u0, point.iters
                        );
                        rows.push(vec![
                            info.param.clone(),
                            fmt(value),
                            fmt(point.max_w0),
                            fmt(point.max_u0),
                            point.iters.to_string(),
                        ]);
                    }
                    Err(e) => {
                        eprintln!("{} = {:.6e}: failed: {e}", info.param, value);
                        failures.push(format!("failed: {} = {}: {e}", info.param, fmt(value)));
                    }
                }
            }

            let mut comments = with_stamp(plan.echo.clone(), &stamp);
            comments.extend(failures.iter().cloned());
            let table = ResultTable {
                comments,
                columns: vec![
                    "param_name",
                    "param_value",
                    "max_w0_m",
                    "max_u0_m",
                    "newton_iters_total",
                ],
                rows,
            };
            let path = plan.directory.join("sweep.csv");
            write_csv(&table, &path)?;
            println!("wrote {}", path.display());
            Ok(if failures.is_empty() { 0 } else { 2 })
        }
    }
}

fn run_oracle(case_id: &str, out: Option<&Path>, ne: usize, reproducible: bool) -> Result<i32> {
    let case = oracle::find_case(case_id)?;
    let report = oracle::run_case(case_id, ne)?;
    let verdict = if report.passed { "PASS" } else { "FAIL" };
    println!(
        "{}: reference {:.6e}, computed {:.6e}, rel error {:.3e} -> {verdict}",
        report.id, report.reference, report.computed, report.rel_error
    );

    let dir = out.unwrap_or_else(|| Path::new(DEFAULT_OUT_DIR));
    std::fs::create_dir_all(dir).map_err(|e| io_with_path(dir, e))?;
    let mesh = Mesh::new(1.0, ne)?;
    let mut comments = vec![
        format!("oracle.case = {}", report.id),
        format!("oracle.description = {}", case.description),
        format!("oracle.Ne = {ne}"),
        format!("oracle.reference = {}", fmt(report.reference)),
        format!("oracle.computed = {}", fmt(report.computed)),
        format!("oracle.rel_error = {}", fmt(report.rel_error)),
        format!("oracle.verdict = {verdict}"),
    ];
    if let Some(s) = time_stamp(reproducible) {
        comments.push(s);
    }
    let u0 = report.solution.u0();
    let w0 = report.solution.w0();
    let dw0 = report.solution.w0_prime();
    let rows = mesh
        .nodes
        .iter()
        .enumerate()
        .map(|(i, x)| vec![fmt(*x), fmt(u0[i]), fmt(w0[i]), fmt(dw0[i])])
        .collect();
    let table = ResultTable {
        comments,
        columns: vec!["x1_m", "u0_m", "w0_m", "dw0dx1"],
        rows,
    };
    let path = dir.join(format!("oracle_{}.csv", report.id));
    write_csv(&table, &path)?;
    println!("wrote {}", path.display());
    Ok(if report.passed { 0 } else { 2 })
}
