//! Python bindings for the fracbeam solver: build a beam, solve a load
//! case, read back the nodal profile, and query the kernel quadrature.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use fracbeam::fem::assemble::{AssemblyOptions, BeamSystem, LoadCase};
use fracbeam::fem::Mesh;
use fracbeam::frac::{truncated_length_scales, FracOperator, FractionalParams};
use fracbeam::oracle;
use fracbeam::solver::{newton_raphson, solve_linear, SolverConfig};
use fracbeam::thermo::{BeamSpec, BoundaryCondition, StrainMode, ThermalField};

fn to_py_err(e: fracbeam::Error) -> PyErr {
    match e {
        fracbeam::Error::Config(msg) => PyValueError::new_err(msg),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_bc(value: &str) -> PyResult<BoundaryCondition> {
    match value {
        "clamped" => Ok(BoundaryCondition::Clamped),
        "pinned" => Ok(BoundaryCondition::Pinned),
        "pinned_movable" => Ok(BoundaryCondition::PinnedMovable),
        "free" => Ok(BoundaryCondition::Free),
        other => Err(PyValueError::new_err(format!(
            "unknown boundary condition \"{other}\" \
             (expected clamped | pinned | pinned_movable | free)"
        ))),
    }
}

fn parse_thermal(kind: &str, magnitude: f64) -> PyResult<ThermalField> {
    match kind {
        "uniform" => Ok(ThermalField::Uniform { theta0: magnitude }),
        "linear_thickness" => Ok(ThermalField::LinearThickness { theta1: magnitude }),
        "parabolic_length" => Ok(ThermalField::ParabolicLength { theta1: magnitude }),
        other => Err(PyValueError::new_err(format!(
            "unknown thermal kind \"{other}\" \
             (expected uniform | linear_thickness | parabolic_length)"
        ))),
    }
}

/// Nodal solution profile of a solved load case.
#[pyclass]
struct Solution {
    x: Vec<f64>,
    u0: Vec<f64>,
    w0: Vec<f64>,
    slope: Vec<f64>,
    newton_iters: usize,
}

#[pymethods]
impl Solution {
    /// Node coordinates [m].
    #[getter]
    fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    /// Axial displacement per node [m].
    #[getter]
    fn u0(&self) -> Vec<f64> {
        self.u0.clone()
    }

    /// Transverse deflection per node [m].
    #[getter]
    fn w0(&self) -> Vec<f64> {
        self.w0.clone()
    }

    /// Deflection slope per node.
    #[getter]
    fn slope(&self) -> Vec<f64> {
        self.slope.clone()
    }

    /// Newton iterations summed over load steps; zero for linear solves.
    #[getter]
    fn newton_iters(&self) -> usize {
        self.newton_iters
    }

    /// Largest nodal deflection magnitude [m].
    fn max_abs_w0(&self) -> f64 {
        self.w0.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Largest nodal axial displacement magnitude [m].
    fn max_abs_u0(&self) -> f64 {
        self.u0.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(nodes={}, max_abs_w0={:e}, max_abs_u0={:e})",
            self.x.len(),
            self.max_abs_w0(),
            self.max_abs_u0()
        )
    }
}

/// Rectangular-section aluminum beam with chosen end supports.
#[pyclass]
struct Beam {
    spec: BeamSpec,
}

#[pymethods]
impl Beam {
    #[new]
    #[pyo3(signature = (length, width, height, bc_left = "clamped", bc_right = "clamped"))]
    fn new(length: f64, width: f64, height: f64, bc_left: &str, bc_right: &str) -> PyResult<Self> {
        let mut spec = BeamSpec::aluminum(length, width, height);
        spec.bc_left = parse_bc(bc_left)?;
        spec.bc_right = parse_bc(bc_right)?;
        spec.validate().map_err(to_py_err)?;
        Ok(Self { spec })
    }

    /// Solves one load case on a uniform mesh and returns the profile.
    ///
    /// `thermal` is an optional `(kind, magnitude)` pair with kind one of
    /// "uniform", "linear_thickness", "parabolic_length". With
    /// `nonlinear=True` the von Karman equations are solved by
    /// Newton-Raphson under load stepping; otherwise one linear solve.
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (alpha, l_f, n_elems, q0 = 0.0, axial = 0.0, thermal = None, nonlinear = false))]
    fn solve(
        &self,
        alpha: f64,
        l_f: f64,
        n_elems: usize,
        q0: f64,
        axial: f64,
        thermal: Option<(String, f64)>,
        nonlinear: bool,
    ) -> PyResult<Solution> {
        let params = FractionalParams::new(alpha, l_f).map_err(to_py_err)?;
        let mesh = Mesh::new(self.spec.length, n_elems).map_err(to_py_err)?;
        let system = BeamSystem::new(self.spec, params, mesh, AssemblyOptions::default())
            .map_err(to_py_err)?;
        let thermal = thermal
            .map(|(kind, magnitude)| parse_thermal(&kind, magnitude))
            .transpose()?;
        let loads = LoadCase {
            axial,
            transverse: q0,
            thermal,
        };
        let solved = if nonlinear {
            let config = SolverConfig {
                mode: StrainMode::VonKarman,
                ..SolverConfig::default()
            };
            newton_raphson(&system, &loads, &config).map_err(to_py_err)?
        } else {
            solve_linear(&system, &loads).map_err(to_py_err)?
        };
        Ok(Solution {
            x: system.mesh.nodes.clone(),
            u0: solved.u0(),
            w0: solved.w0(),
            slope: solved.w0_prime(),
            newton_iters: solved.newton_iters_total,
        })
    }
}

/// Kernel quadrature stations and weights at position `x` on a beam of
/// the given length; the weights sum to one.
#[pyfunction]
fn kernel_stations(alpha: f64, l_f: f64, length: f64, x: f64) -> PyResult<Vec<(f64, f64)>> {
    let params = FractionalParams::new(alpha, l_f).map_err(to_py_err)?;
    let horizon = truncated_length_scales(x, length, &params).map_err(to_py_err)?;
    Ok(FracOperator::new(alpha).kernel_stations(&horizon, &[]))
}

/// Runs a catalogued verification case and returns
/// `(reference, computed, rel_error, passed)`.
#[pyfunction]
#[pyo3(signature = (case_id, n_elems = 100))]
fn oracle_case(case_id: &str, n_elems: usize) -> PyResult<(f64, f64, f64, bool)> {
    let report = oracle::run_case(case_id, n_elems).map_err(to_py_err)?;
    Ok((
        report.reference,
        report.computed,
        report.rel_error,
        report.passed,
    ))
}

/// Identifiers accepted by `oracle_case`.
#[pyfunction]
fn oracle_ids() -> Vec<String> {
    oracle::catalog().iter().map(|c| c.id.to_string()).collect()
}

#[pymodule]
fn fracbeam_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Beam>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(kernel_stations, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_case, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_ids, m)?)?;
    Ok(())
}
