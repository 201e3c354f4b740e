//! Assembly of the discrete beam equations from the cached nonlocal rows.
//!
//! Two layers share one integration loop structure. The block assemblers
//! build the classical partitioned objects (axial/bending stiffness
//! blocks, coupling blocks, force vectors) as dense matrices in block
//! dof layout; they are the reference path for tests and oracles. The
//! fused path in [`BeamSystem`] evaluates the residual directly from the
//! stress resultants at the Gauss points and scatters the tangent into a
//! reduced banded matrix, which is what the solver iterates on.
//!
//! The residual is the gradient of the discrete potential energy; the
//! tangent is its exact derivative, including the geometric (membrane)
//! stiffness in von Karman mode. Thermal loads enter through the stress
//! resultants, so a temperature field contributes both a constant force
//! and, in von Karman mode, a state-coupled membrane term.

use super::shape;
use super::{DofMap, Mesh, RowCache, DOF_PER_NODE};
use crate::banded::BandedMatrix;
use crate::frac::{FracOperator, FractionalParams};
use crate::thermo::{BeamSpec, StrainMode, StrainState, ThermalField};
use crate::Result;
use nalgebra::{DMatrix, DVector};

/// Knobs of the assembly loops.
#[derive(Debug, Clone, Copy)]
pub struct AssemblyOptions {
    /// Gauss points per element for the outer integrals.
    pub outer_points: usize,
    /// Assemble the constant thermal force terms with local interpolation
    /// rows instead of the nonlocal ones. The state-coupled membrane
    /// term keeps the nonlocal row either way, so the tangent stays
    /// symmetric; with this flag set the residual is no longer exactly
    /// the gradient of the discrete energy whenever alpha < 1.
    pub thermal_force_local_rows: bool,
    /// Keep the thermal membrane force inside the geometric stiffness.
    /// Clearing this gives a modified Newton iteration: the residual is
    /// unchanged, convergence drops from quadratic to linear.
    pub thermal_geometric_stiffness: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            outer_points: 4,
            thermal_force_local_rows: false,
            thermal_geometric_stiffness: true,
        }
    }
}

/// External loading: distributed line loads plus a temperature field.
#[derive(Debug, Clone, Default)]
pub struct LoadCase {
    /// Distributed axial load [N/m].
    pub axial: f64,
    /// Distributed transverse load [N/m].
    pub transverse: f64,
    /// Prescribed temperature difference field.
    pub thermal: Option<ThermalField>,
}

impl LoadCase {
    /// No loading at all.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Every load component multiplied by `factor`, for load stepping.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            axial: factor * self.axial,
            transverse: factor * self.transverse,
            thermal: self.thermal.as_ref().map(|t| t.scaled(factor)),
        }
    }

    /// Thermal force and moment resultants at a position, zero without a
    /// temperature field.
    pub fn resultants_at(&self, x: f64, spec: &BeamSpec) -> (f64, f64) {
        match &self.thermal {
            Some(field) => field.resultants(x, spec),
            None => (0.0, 0.0),
        }
    }
}

/// Force vectors in block layout: axial entries per node, transverse
/// entries per (w0, slope) pair.
#[derive(Debug, Clone)]
pub struct ForceVectors {
    /// Work-equivalent axial line load.
    pub f_a: DVector<f64>,
    /// Work-equivalent transverse line load.
    pub f_t: DVector<f64>,
    /// Thermal membrane force.
    pub f_a_theta: DVector<f64>,
    /// Thermal bending force plus the state-coupled membrane term.
    pub f_t_theta: DVector<f64>,
}

/// Interleaves block vectors (axial per node, (w0, slope) per node) into
/// the global dof ordering.
pub fn join_blocks(u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
    let n_nodes = u.len();
    assert_eq!(w.len(), 2 * n_nodes);
    let mut full = DVector::zeros(DOF_PER_NODE * n_nodes);
    for n in 0..n_nodes {
        full[DOF_PER_NODE * n] = u[n];
        full[DOF_PER_NODE * n + 1] = w[2 * n];
        full[DOF_PER_NODE * n + 2] = w[2 * n + 1];
    }
    full
}

/// Splits an interleaved global vector into its block-layout parts.
pub fn split_blocks(full: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let n_nodes = full.len() / DOF_PER_NODE;
    let mut u = DVector::zeros(n_nodes);
    let mut w = DVector::zeros(2 * n_nodes);
    for n in 0..n_nodes {
        u[n] = full[DOF_PER_NODE * n];
        w[2 * n] = full[DOF_PER_NODE * n + 1];
        w[2 * n + 1] = full[DOF_PER_NODE * n + 2];
    }
    (u, w)
}

/// State-independent stiffness blocks over all dofs, block layout:
/// the membrane block (nodes x nodes) and the bending block
/// (2 nodes x 2 nodes).
pub fn assemble_linear(
    cache: &RowCache,
    mesh: &Mesh,
    spec: &BeamSpec,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n_nodes = mesh.n_nodes();
    let a11 = spec.axial_stiffness();
    let d11 = spec.bending_stiffness();
    let mut k11 = DMatrix::zeros(n_nodes, n_nodes);
    let mut k22 = DMatrix::zeros(2 * n_nodes, 2 * n_nodes);
    for (p, row) in cache.points.iter().zip(&cache.rows) {
        for i in 0..row.n_nodes {
            let gi = row.first_node + i;
            for j in 0..row.n_nodes {
                let gj = row.first_node + j;
                k11[(gi, gj)] += p.weight * a11 * row.u[i] * row.u[j];
            }
        }
        for i in 0..2 * row.n_nodes {
            let gi = 2 * row.first_node + i;
            for j in 0..2 * row.n_nodes {
                let gj = 2 * row.first_node + j;
                k22[(gi, gj)] += p.weight * d11 * row.theta[i] * row.theta[j];
            }
        }
    }
    (k11, k22)
}

/// State-dependent coupling and membrane blocks at the given interleaved
/// state, block layout. Returns (coupling, its work conjugate, membrane);
/// the work conjugate equals twice the transposed coupling block.
pub fn assemble_nonlinear(
    cache: &RowCache,
    mesh: &Mesh,
    spec: &BeamSpec,
    full: &DVector<f64>,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n_nodes = mesh.n_nodes();
    let a11 = spec.axial_stiffness();
    let mut k12 = DMatrix::zeros(n_nodes, 2 * n_nodes);
    let mut k21 = DMatrix::zeros(2 * n_nodes, n_nodes);
    let mut k22 = DMatrix::zeros(2 * n_nodes, 2 * n_nodes);
    for (p, row) in cache.points.iter().zip(&cache.rows) {
        let dw = row.dot_w(full);
        let half_c = 0.5 * p.weight * a11 * dw;
        for i in 0..row.n_nodes {
            let gi = row.first_node + i;
            for j in 0..2 * row.n_nodes {
                let gj = 2 * row.first_node + j;
                k12[(gi, gj)] += half_c * row.u[i] * row.w[j];
                k21[(gj, gi)] += 2.0 * half_c * row.w[j] * row.u[i];
            }
        }
        for i in 0..2 * row.n_nodes {
            let gi = 2 * row.first_node + i;
            for j in 0..2 * row.n_nodes {
                let gj = 2 * row.first_node + j;
                k22[(gi, gj)] += half_c * dw * row.w[i] * row.w[j];
            }
        }
    }
    (k12, k21, k22)
}

/// Work-equivalent force vectors in block layout at the given state.
/// The thermal vectors vanish exactly without a temperature field.
pub fn assemble_forces(
    cache: &RowCache,
    mesh: &Mesh,
    spec: &BeamSpec,
    loads: &LoadCase,
    full: &DVector<f64>,
    options: &AssemblyOptions,
) -> ForceVectors {
    let n_nodes = mesh.n_nodes();
    let mut out = ForceVectors {
        f_a: DVector::zeros(n_nodes),
        f_t: DVector::zeros(2 * n_nodes),
        f_a_theta: DVector::zeros(n_nodes),
        f_t_theta: DVector::zeros(2 * n_nodes),
    };
    for (p, row) in cache.points.iter().zip(&cache.rows) {
        let xi = p.x - mesh.nodes[p.elem];
        let lag = shape::lagrange(xi, mesh.le);
        let her = shape::hermite(xi, mesh.le);
        for i in 0..2 {
            out.f_a[p.elem + i] += p.weight * loads.axial * lag[i];
        }
        for i in 0..4 {
            out.f_t[2 * p.elem + i] += p.weight * loads.transverse * her[i];
        }
        let (n_th, m_th) = loads.resultants_at(p.x, spec);
        if n_th != 0.0 || m_th != 0.0 {
            if options.thermal_force_local_rows {
                let du = shape::lagrange_deriv(mesh.le);
                let d2h = shape::hermite_second(xi, mesh.le);
                for i in 0..2 {
                    out.f_a_theta[p.elem + i] += p.weight * n_th * du[i];
                }
                for i in 0..4 {
                    out.f_t_theta[2 * p.elem + i] -= p.weight * m_th * d2h[i];
                }
            } else {
                for i in 0..row.n_nodes {
                    out.f_a_theta[row.first_node + i] += p.weight * n_th * row.u[i];
                }
                for i in 0..2 * row.n_nodes {
                    out.f_t_theta[2 * row.first_node + i] -= p.weight * m_th * row.theta[i];
                }
            }
            let dw = row.dot_w(full);
            if dw != 0.0 {
                for i in 0..2 * row.n_nodes {
                    out.f_t_theta[2 * row.first_node + i] += p.weight * n_th * dw * row.w[i];
                }
            }
        }
    }
    out
}

/// One beam discretization: geometry, material, fractional parameters,
/// supports, and the cached nonlocal rows. All solver-facing assembly
/// goes through this.
#[derive(Debug, Clone)]
pub struct BeamSystem {
    /// Geometry, material, and supports.
    pub spec: BeamSpec,
    /// Fractional order and length scale.
    pub params: FractionalParams,
    /// Element mesh.
    pub mesh: Mesh,
    /// Support constraints.
    pub dofs: DofMap,
    /// Kernel quadrature operator.
    pub op: FracOperator,
    /// Nonlocal rows at the outer Gauss points.
    pub cache: RowCache,
    /// Assembly knobs.
    pub options: AssemblyOptions,
}

impl BeamSystem {
    /// Builds the row cache and dof map for the given discretization.
    pub fn new(
        spec: BeamSpec,
        params: FractionalParams,
        mesh: Mesh,
        options: AssemblyOptions,
    ) -> Result<Self> {
        spec.validate()?;
        let dofs = DofMap::new(&mesh, spec.bc_left, spec.bc_right)?;
        let op = FracOperator::new(params.alpha);
        let cache = RowCache::build(&mesh, &params, &op, options.outer_points)?;
        Ok(Self {
            spec,
            params,
            mesh,
            dofs,
            op,
            cache,
            options,
        })
    }

    /// Number of unconstrained dofs.
    pub fn n_free(&self) -> usize {
        self.dofs.n_free()
    }

    /// Midplane strain state at cached Gauss point `ip`.
    pub fn strain_at_point(&self, ip: usize, full: &DVector<f64>, mode: StrainMode) -> StrainState {
        let row = &self.cache.rows[ip];
        let du = row.dot_u(full);
        let dw = row.dot_w(full);
        let eps0 = match mode {
            StrainMode::Linear => du,
            StrainMode::VonKarman => du + 0.5 * dw * dw,
        };
        StrainState {
            x1: row.x,
            eps0,
            kappa: -row.dot_theta(full),
        }
    }

    /// Midplane strain state at an arbitrary position, from a freshly
    /// built nonlocal row.
    pub fn strain_at(&self, x: f64, full: &DVector<f64>, mode: StrainMode) -> Result<StrainState> {
        let row = super::nonlocal_b_row(&self.mesh, &self.op, &self.params, x)?;
        let du = row.dot_u(full);
        let dw = row.dot_w(full);
        let eps0 = match mode {
            StrainMode::Linear => du,
            StrainMode::VonKarman => du + 0.5 * dw * dw,
        };
        Ok(StrainState {
            x1: x,
            eps0,
            kappa: -row.dot_theta(full),
        })
    }

    /// Work-equivalent line-load vector over all dofs.
    pub fn mechanical_force_full(&self, loads: &LoadCase) -> DVector<f64> {
        let mut f = DVector::zeros(self.dofs.n_dofs());
        for p in &self.cache.points {
            let xi = p.x - self.mesh.nodes[p.elem];
            let lag = shape::lagrange(xi, self.mesh.le);
            let her = shape::hermite(xi, self.mesh.le);
            for i in 0..2 {
                f[DOF_PER_NODE * (p.elem + i)] += p.weight * loads.axial * lag[i];
            }
            for k in 0..2 {
                let base = DOF_PER_NODE * (p.elem + k);
                f[base + 1] += p.weight * loads.transverse * her[2 * k];
                f[base + 2] += p.weight * loads.transverse * her[2 * k + 1];
            }
        }
        f
    }

    /// Reduced external force for the linear problem: line loads plus the
    /// constant thermal force.
    pub fn external_force(&self, loads: &LoadCase) -> DVector<f64> {
        let mut f = self.mechanical_force_full(loads);
        for (p, row) in self.cache.points.iter().zip(&self.cache.rows) {
            let (n_th, m_th) = loads.resultants_at(p.x, &self.spec);
            if n_th == 0.0 && m_th == 0.0 {
                continue;
            }
            if self.options.thermal_force_local_rows {
                let xi = p.x - self.mesh.nodes[p.elem];
                let du = shape::lagrange_deriv(self.mesh.le);
                let d2h = shape::hermite_second(xi, self.mesh.le);
                for i in 0..2 {
                    f[DOF_PER_NODE * (p.elem + i)] += p.weight * n_th * du[i];
                }
                for k in 0..2 {
                    let base = DOF_PER_NODE * (p.elem + k);
                    f[base + 1] -= p.weight * m_th * d2h[2 * k];
                    f[base + 2] -= p.weight * m_th * d2h[2 * k + 1];
                }
            } else {
                for k in 0..row.n_nodes {
                    let base = DOF_PER_NODE * (row.first_node + k);
                    f[base] += p.weight * n_th * row.u[k];
                    f[base + 1] -= p.weight * m_th * row.theta[2 * k];
                    f[base + 2] -= p.weight * m_th * row.theta[2 * k + 1];
                }
            }
        }
        self.dofs.reduce(&f)
    }

    /// Reduced residual (internal minus external forces) at an
    /// interleaved full state, evaluated from the stress resultants at
    /// the Gauss points.
    pub fn residual(
        &self,
        full: &DVector<f64>,
        loads: &LoadCase,
        mode: StrainMode,
    ) -> DVector<f64> {
        let a11 = self.spec.axial_stiffness();
        let d11 = self.spec.bending_stiffness();
        let local_thermal = self.options.thermal_force_local_rows;
        let mut r = -self.mechanical_force_full(loads);
        for (p, row) in self.cache.points.iter().zip(&self.cache.rows) {
            let du = row.dot_u(full);
            let dw = row.dot_w(full);
            let dth = row.dot_theta(full);
            let (n_th, m_th) = loads.resultants_at(p.x, &self.spec);
            let eps0 = match mode {
                StrainMode::Linear => du,
                StrainMode::VonKarman => du + 0.5 * dw * dw,
            };
            let n = a11 * eps0 - n_th;
            // axial and bending work terms on the nonlocal rows; the
            // constant thermal contribution joins here unless it is
            // routed through the local rows below
            let (row_n, row_bend) = if local_thermal {
                (a11 * eps0, d11 * dth)
            } else {
                (n, d11 * dth + m_th)
            };
            let membrane = match mode {
                StrainMode::Linear => 0.0,
                StrainMode::VonKarman => p.weight * n * dw,
            };
            for k in 0..row.n_nodes {
                let base = DOF_PER_NODE * (row.first_node + k);
                r[base] += p.weight * row_n * row.u[k];
                r[base + 1] += membrane * row.w[2 * k] + p.weight * row_bend * row.theta[2 * k];
                r[base + 2] +=
                    membrane * row.w[2 * k + 1] + p.weight * row_bend * row.theta[2 * k + 1];
            }
            if local_thermal && (n_th != 0.0 || m_th != 0.0) {
                let xi = p.x - self.mesh.nodes[p.elem];
                let du_loc = shape::lagrange_deriv(self.mesh.le);
                let d2h = shape::hermite_second(xi, self.mesh.le);
                for k in 0..2 {
                    let base = DOF_PER_NODE * (p.elem + k);
                    r[base] -= p.weight * n_th * du_loc[k];
                    r[base + 1] += p.weight * m_th * d2h[2 * k];
                    r[base + 2] += p.weight * m_th * d2h[2 * k + 1];
                }
            }
        }
        self.dofs.reduce(&r)
    }

    /// Reduced tangent stiffness at an interleaved full state: exact
    /// derivative of the residual, banded and symmetric.
    pub fn tangent(&self, full: &DVector<f64>, loads: &LoadCase, mode: StrainMode) -> BandedMatrix {
        let a11 = self.spec.axial_stiffness();
        let d11 = self.spec.bending_stiffness();
        let mut k = BandedMatrix::zeros(self.dofs.n_free(), self.cache.dof_bandwidth());
        let mut slots: Vec<(usize, f64, f64, f64)> = Vec::new();
        for (p, row) in self.cache.points.iter().zip(&self.cache.rows) {
            let (c_ww, c_uw) = match mode {
                StrainMode::Linear => (0.0, 0.0),
                StrainMode::VonKarman => {
                    let du = row.dot_u(full);
                    let dw = row.dot_w(full);
                    let n_th = if self.options.thermal_geometric_stiffness {
                        loads.resultants_at(p.x, &self.spec).0
                    } else {
                        0.0
                    };
                    let n = a11 * (du + 0.5 * dw * dw) - n_th;
                    (p.weight * (n + a11 * dw * dw), p.weight * a11 * dw)
                }
            };
            let c_uu = p.weight * a11;
            let c_tt = p.weight * d11;
            slots.clear();
            for kn in 0..row.n_nodes {
                let base = DOF_PER_NODE * (row.first_node + kn);
                for (offset, uw, ww, tw) in [
                    (0, row.u[kn], 0.0, 0.0),
                    (1, 0.0, row.w[2 * kn], row.theta[2 * kn]),
                    (2, 0.0, row.w[2 * kn + 1], row.theta[2 * kn + 1]),
                ] {
                    if let Some(f) = self.dofs.free_index(base + offset) {
                        slots.push((f, uw, ww, tw));
                    }
                }
            }
            for a in 0..slots.len() {
                let (fa, ua, wa, ta) = slots[a];
                for &(fb, ub, wb, tb) in &slots[..=a] {
                    let v = c_uu * ua * ub
                        + c_tt * ta * tb
                        + c_ww * wa * wb
                        + c_uw * (ua * wb + wa * ub);
                    if v != 0.0 {
                        k.add(fa, fb, v);
                    }
                }
            }
        }
        k
    }

    /// Reduced stiffness of the linear problem.
    pub fn linear_stiffness(&self) -> BandedMatrix {
        let zero = DVector::zeros(self.dofs.n_dofs());
        self.tangent(&zero, &LoadCase::zero(), StrainMode::Linear)
    }

    /// Discrete potential energy at an interleaved full state. Its
    /// gradient with respect to the free dofs is the default-options
    /// residual.
    pub fn potential_energy(&self, full: &DVector<f64>, loads: &LoadCase, mode: StrainMode) -> f64 {
        let a11 = self.spec.axial_stiffness();
        let d11 = self.spec.bending_stiffness();
        let mut energy = -self.mechanical_force_full(loads).dot(full);
        for (p, row) in self.cache.points.iter().zip(&self.cache.rows) {
            let du = row.dot_u(full);
            let dw = row.dot_w(full);
            let dth = row.dot_theta(full);
            let (n_th, m_th) = loads.resultants_at(p.x, &self.spec);
            let eps0 = match mode {
                StrainMode::Linear => du,
                StrainMode::VonKarman => du + 0.5 * dw * dw,
            };
            energy += p.weight
                * (0.5 * a11 * eps0 * eps0 - n_th * eps0 + 0.5 * d11 * dth * dth + m_th * dth);
        }
        energy
    }
}
