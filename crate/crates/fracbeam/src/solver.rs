//! Linear solve and Newton-Raphson iteration on the reduced system.
//!
//! The linear path factorizes the banded stiffness once and refines the
//! solution when the componentwise backward error warrants it. The
//! nonlinear path ramps mechanical and thermal loads together in equal
//! increments and runs a full Newton iteration per load step, with the
//! analytic tangent from the assembly layer. Residual norms are recorded
//! per iteration so convergence behavior is inspectable after the fact.

use crate::banded::{BandedCholesky, BandedMatrix};
use crate::fem::assemble::{BeamSystem, LoadCase};
use crate::fem::DOF_PER_NODE;
use crate::thermo::StrainMode;
use crate::{Error, Result};
use nalgebra::DVector;

/// Residual norm below which any state counts as converged, covering
/// zero-load cases where the relative test has no scale.
pub const ABSOLUTE_RESIDUAL_FLOOR: f64 = 1e-14;

/// Backward error threshold above which one refinement pass runs.
const REFINEMENT_THRESHOLD: f64 = 1e-12;

/// Newton/load-stepping controls.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Convergence threshold on residual norm over external force norm.
    pub tol_rel_residual: f64,
    /// Newton iteration cap per load step.
    pub max_iters: usize,
    /// Equal load increments for the nonlinear path.
    pub load_steps: usize,
    /// Membrane strain kinematics.
    pub mode: StrainMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_rel_residual: 1e-8,
            max_iters: 50,
            load_steps: 10,
            mode: StrainMode::Linear,
        }
    }
}

impl SolverConfig {
    /// Rejects tolerances and counts that cannot drive an iteration.
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_rel_residual > 0.0) {
            return Err(Error::Config(format!(
                "tol_rel_residual must be positive, got {}",
                self.tol_rel_residual
            )));
        }
        if self.max_iters < 1 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if self.load_steps < 1 {
            return Err(Error::Config("load_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Converged nodal solution with its iteration record.
#[derive(Debug, Clone)]
pub struct SolutionField {
    /// Interleaved nodal dofs (u0, w0, dw0/dx1 per node), supports exact.
    pub full: DVector<f64>,
    /// Relative residual norms, one inner vector per load step, entry 0
    /// being the pre-iteration residual of that step.
    pub history: Vec<Vec<f64>>,
    /// Linear solves performed across all load steps.
    pub newton_iters_total: usize,
}

impl SolutionField {
    /// Axial displacement per node [m].
    pub fn u0(&self) -> Vec<f64> {
        self.component(0)
    }

    /// Transverse deflection per node [m].
    pub fn w0(&self) -> Vec<f64> {
        self.component(1)
    }

    /// Deflection slope per node.
    pub fn w0_prime(&self) -> Vec<f64> {
        self.component(2)
    }

    /// Largest nodal deflection magnitude [m].
    pub fn max_abs_w0(&self) -> f64 {
        self.component_max(1)
    }

    /// Largest nodal axial displacement magnitude [m].
    pub fn max_abs_u0(&self) -> f64 {
        self.component_max(0)
    }

    fn component(&self, c: usize) -> Vec<f64> {
        self.full
            .iter()
            .skip(c)
            .step_by(DOF_PER_NODE)
            .copied()
            .collect()
    }

    fn component_max(&self, c: usize) -> f64 {
        self.full
            .iter()
            .skip(c)
            .step_by(DOF_PER_NODE)
            .fold(0.0_f64, |m, &v| m.max(v.abs()))
    }
}

/// Solves A x = b through the banded Cholesky factorization, running one
/// iterative refinement pass when the componentwise backward error of
/// the first solve exceeds the threshold.
pub fn solve_spd(a: &BandedMatrix, b: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = a.cholesky()?;
    Ok(refine(a, &chol, b))
}

fn refine(a: &BandedMatrix, chol: &BandedCholesky, b: &DVector<f64>) -> DVector<f64> {
    let mut x = chol.solve(b);
    let r = b - a.matvec(&x);
    let scale = a.abs_matvec(&x);
    let omega = r
        .iter()
        .zip(scale.iter().zip(b.iter()))
        .map(|(&ri, (&si, &bi))| ri.abs() / (si + bi.abs() + f64::MIN_POSITIVE))
        .fold(0.0_f64, f64::max);
    if omega > REFINEMENT_THRESHOLD {
        x += chol.solve(&r);
    }
    x
}

/// Solves the linear thermoelastic problem in one factorization.
///
/// The axial and transverse blocks are uncoupled in linear kinematics,
/// so the single banded solve yields both fields at once.
pub fn solve_linear(system: &BeamSystem, loads: &LoadCase) -> Result<SolutionField> {
    let k = system.linear_stiffness();
    let f = system.external_force(loads);
    let reduced = solve_spd(&k, &f)?;
    let full = system.dofs.expand(&reduced);
    let residual = system.residual(&full, loads, StrainMode::Linear);
    let rel = residual.norm() / f.norm().max(ABSOLUTE_RESIDUAL_FLOOR);
    Ok(SolutionField {
        full,
        history: vec![vec![rel]],
        newton_iters_total: 0,
    })
}

/// Ramps the loads in equal increments and iterates Newton-Raphson to
/// the configured tolerance within each step, seeding every step with
/// the previous solution.
pub fn newton_raphson(
    system: &BeamSystem,
    loads: &LoadCase,
    config: &SolverConfig,
) -> Result<SolutionField> {
    config.validate()?;
    let mut reduced = DVector::zeros(system.n_free());
    let mut history: Vec<Vec<f64>> = Vec::new();
    let mut solves = 0;
    for step in 1..=config.load_steps {
        let step_loads = loads.scaled(step as f64 / config.load_steps as f64);
        let f_norm = system.external_force(&step_loads).norm();
        let target = (config.tol_rel_residual * f_norm).max(ABSOLUTE_RESIDUAL_FLOOR);
        let denom = f_norm.max(ABSOLUTE_RESIDUAL_FLOOR);
        let mut norms = Vec::new();
        let mut growth = 0;
        let mut converged = false;
        for _ in 0..=config.max_iters {
            let full = system.dofs.expand(&reduced);
            let residual = system.residual(&full, &step_loads, config.mode);
            let norm = residual.norm();
            norms.push(norm / denom);
            if norm <= target {
                converged = true;
                break;
            }
            if norms.len() > 1 && norm > denom * norms[norms.len() - 2] {
                growth += 1;
                if growth >= 3 {
                    history.push(norms);
                    return Err(diverged(step, &history));
                }
            } else {
                growth = 0;
            }
            if norms.len() > config.max_iters {
                break;
            }
            let tangent = system.tangent(&full, &step_loads, config.mode);
            let delta = solve_spd(&tangent, &(-&residual))?;
            reduced += &delta;
            solves += 1;
        }
        history.push(norms);
        if !converged {
            return Err(stalled(step, config.max_iters, &history));
        }
    }
    Ok(SolutionField {
        full: system.dofs.expand(&reduced),
        history,
        newton_iters_total: solves,
    })
}

fn diverged(step: usize, history: &[Vec<f64>]) -> Error {
    Error::NoConvergence(format!(
        "residual grew 3 consecutive iterations at load step {step}; history {}",
        format_history(history)
    ))
}

fn stalled(step: usize, max_iters: usize, history: &[Vec<f64>]) -> Error {
    Error::NoConvergence(format!(
        "no convergence within {max_iters} iterations at load step {step}; history {}",
        format_history(history)
    ))
}

fn format_history(history: &[Vec<f64>]) -> String {
    let steps: Vec<String> = history
        .iter()
        .map(|norms| {
            let inner: Vec<String> = norms.iter().map(|n| format!("{n:.3e}")).collect();
            format!("[{}]", inner.join(", "))
        })
        .collect();
    steps.join(" ")
}
