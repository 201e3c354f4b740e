//! Finite element core: mesh, degree-of-freedom bookkeeping, and the
//! nonlocal strain-displacement rows.
//!
//! Each node carries three degrees of freedom (u0, w0, dw0/dx1),
//! interleaved in the global vector as 3*node + component. The nonlocal
//! rows are kernel averages of the local strain rows over the truncated
//! horizon; at alpha = 1 they collapse to the local rows. Rows are
//! evaluated at the outer Gauss points of every element and cached, since
//! they depend only on mesh and fractional parameters, not on the state.

pub mod assemble;
pub mod shape;

use crate::frac::{truncated_length_scales, FracOperator, FractionalParams};
use crate::thermo::BoundaryCondition;
use crate::{Error, Result};
use nalgebra::DVector;
use rayon::prelude::*;

/// Degrees of freedom per node: axial, deflection, slope.
pub const DOF_PER_NODE: usize = 3;

/// Uniform two-node element mesh on [0, L].
#[derive(Debug, Clone)]
pub struct Mesh {
    /// Domain length [m].
    pub length: f64,
    /// Element count.
    pub n_elems: usize,
    /// Element length [m].
    pub le: f64,
    /// Node positions, n_elems + 1 of them, uniformly spaced.
    pub nodes: Vec<f64>,
}

impl Mesh {
    /// Uniform mesh with a fixed element count.
    pub fn new(length: f64, n_elems: usize) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::Config(format!(
                "mesh length must be positive, got {length}"
            )));
        }
        if n_elems < 1 {
            return Err(Error::Config("mesh needs at least one element".into()));
        }
        let le = length / n_elems as f64;
        let nodes = (0..=n_elems).map(|i| i as f64 * le).collect();
        Ok(Self {
            length,
            n_elems,
            le,
            nodes,
        })
    }

    /// Mesh sized so that the horizon spans `n_inf` elements
    /// (le = l_f / n_inf), with at least two elements.
    pub fn with_horizon_density(length: f64, l_f: f64, n_inf: f64) -> Result<Self> {
        if !(n_inf > 0.0) || !(l_f > 0.0) {
            return Err(Error::Config(format!(
                "horizon density requires positive l_f and n_inf, got {l_f}, {n_inf}"
            )));
        }
        let n = (length * n_inf / l_f).round().max(2.0) as usize;
        Self::new(length, n)
    }

    /// Number of nodes.
    pub fn n_nodes(&self) -> usize {
        self.n_elems + 1
    }

    /// Index of the element containing x (clamped to the domain).
    pub fn elem_containing(&self, x: f64) -> usize {
        ((x / self.le) as isize).clamp(0, self.n_elems as isize - 1) as usize
    }
}

/// Maps node components to global and reduced (constraint-free) indices.
#[derive(Debug, Clone)]
pub struct DofMap {
    n_nodes: usize,
    constrained: Vec<bool>,
    free_of_global: Vec<Option<usize>>,
    global_of_free: Vec<usize>,
}

impl DofMap {
    /// Builds the map from the two end supports, rejecting combinations
    /// that leave rigid-body modes unconstrained.
    pub fn new(
        mesh: &Mesh,
        bc_left: BoundaryCondition,
        bc_right: BoundaryCondition,
    ) -> Result<Self> {
        let n_nodes = mesh.n_nodes();
        let mut constrained = vec![false; DOF_PER_NODE * n_nodes];
        for (node, bc) in [(0, bc_left), (n_nodes - 1, bc_right)] {
            let comps: &[usize] = match bc {
                BoundaryCondition::Clamped => &[0, 1, 2],
                BoundaryCondition::Pinned => &[0, 1],
                BoundaryCondition::PinnedMovable => &[1],
                BoundaryCondition::Free => &[],
            };
            for &c in comps {
                constrained[DOF_PER_NODE * node + c] = true;
            }
        }
        let ends = [0, n_nodes - 1];
        let count = |c: usize| {
            ends.iter()
                .filter(|&&n| constrained[DOF_PER_NODE * n + c])
                .count()
        };
        let (nu, nw, nr) = (count(0), count(1), count(2));
        if nu < 1 || nw < 1 || nw + nr < 2 {
            return Err(Error::Config(format!(
                "supports {bc_left:?}/{bc_right:?} leave rigid-body modes unconstrained"
            )));
        }
        let mut free_of_global = vec![None; constrained.len()];
        let mut global_of_free = Vec::new();
        for (g, &fixed) in constrained.iter().enumerate() {
            if !fixed {
                free_of_global[g] = Some(global_of_free.len());
                global_of_free.push(g);
            }
        }
        Ok(Self {
            n_nodes,
            constrained,
            free_of_global,
            global_of_free,
        })
    }

    /// Total degree-of-freedom count, constrained included.
    pub fn n_dofs(&self) -> usize {
        DOF_PER_NODE * self.n_nodes
    }

    /// Number of unconstrained degrees of freedom.
    pub fn n_free(&self) -> usize {
        self.global_of_free.len()
    }

    /// True when the global dof is eliminated by a support.
    pub fn is_constrained(&self, g: usize) -> bool {
        self.constrained[g]
    }

    /// Reduced index of a global dof, if free.
    pub fn free_index(&self, g: usize) -> Option<usize> {
        self.free_of_global[g]
    }

    /// Global index of a reduced dof.
    pub fn global_index(&self, f: usize) -> usize {
        self.global_of_free[f]
    }

    /// Scatters a reduced vector into a full one, zeros at supports.
    pub fn expand(&self, reduced: &DVector<f64>) -> DVector<f64> {
        let mut full = DVector::zeros(self.n_dofs());
        for (f, &g) in self.global_of_free.iter().enumerate() {
            full[g] = reduced[f];
        }
        full
    }

    /// Gathers the free entries of a full vector.
    pub fn reduce(&self, full: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.n_free(), self.global_of_free.iter().map(|&g| full[g]))
    }
}

/// Nonlocal strain rows at one evaluation point: kernel averages of the
/// axial-gradient, deflection-gradient, and curvature rows.
///
/// Support is contiguous over `n_nodes` nodes starting at `first_node`.
/// Axial weights have one entry per node; the deflection and curvature
/// rows have two (w0, slope).
#[derive(Debug, Clone)]
pub struct NonlocalBRow {
    /// Evaluation point [m].
    pub x: f64,
    /// First node of the support span.
    pub first_node: usize,
    /// Node count of the support span.
    pub n_nodes: usize,
    /// Weights applied to axial dofs.
    pub u: Vec<f64>,
    /// Weights applied to (w0, slope) dofs for the deflection gradient.
    pub w: Vec<f64>,
    /// Weights applied to (w0, slope) dofs for the curvature.
    pub theta: Vec<f64>,
}

impl NonlocalBRow {
    /// Kernel average of du0/dx applied to a full state vector.
    pub fn dot_u(&self, full: &DVector<f64>) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.n_nodes {
            acc += self.u[k] * full[DOF_PER_NODE * (self.first_node + k)];
        }
        acc
    }

    /// Kernel average of dw0/dx applied to a full state vector.
    pub fn dot_w(&self, full: &DVector<f64>) -> f64 {
        self.dot_pair(&self.w, full)
    }

    /// Kernel average of d2w0/dx2 applied to a full state vector.
    pub fn dot_theta(&self, full: &DVector<f64>) -> f64 {
        self.dot_pair(&self.theta, full)
    }

    fn dot_pair(&self, weights: &[f64], full: &DVector<f64>) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.n_nodes {
            let base = DOF_PER_NODE * (self.first_node + k);
            acc += weights[2 * k] * full[base + 1] + weights[2 * k + 1] * full[base + 2];
        }
        acc
    }
}

/// Builds the nonlocal rows at one evaluation point by quadrature of the
/// attenuation kernel against the local shape-function derivatives.
pub fn nonlocal_b_row(
    mesh: &Mesh,
    op: &FracOperator,
    params: &FractionalParams,
    x: f64,
) -> Result<NonlocalBRow> {
    let horizon = truncated_length_scales(x, mesh.length, params)?;
    let stations = op.kernel_stations(&horizon, &mesh.nodes[1..mesh.n_elems]);
    let e_lo = stations
        .iter()
        .map(|&(s, _)| mesh.elem_containing(s))
        .min()
        .unwrap();
    let e_hi = stations
        .iter()
        .map(|&(s, _)| mesh.elem_containing(s))
        .max()
        .unwrap();
    let n_nodes = e_hi - e_lo + 2;
    let mut row = NonlocalBRow {
        x,
        first_node: e_lo,
        n_nodes,
        u: vec![0.0; n_nodes],
        w: vec![0.0; 2 * n_nodes],
        theta: vec![0.0; 2 * n_nodes],
    };
    for (s, weight) in stations {
        let e = mesh.elem_containing(s);
        let xi = (s - mesh.nodes[e]).clamp(0.0, mesh.le);
        let k = e - e_lo;
        let du = shape::lagrange_deriv(mesh.le);
        let dh = shape::hermite_deriv(xi, mesh.le);
        let d2h = shape::hermite_second(xi, mesh.le);
        for i in 0..2 {
            row.u[k + i] += weight * du[i];
        }
        for i in 0..4 {
            row.w[2 * k + i] += weight * dh[i];
            row.theta[2 * k + i] += weight * d2h[i];
        }
    }
    Ok(row)
}

/// One outer integration point of the assembly.
#[derive(Debug, Clone, Copy)]
pub struct GaussPoint {
    /// Position [m].
    pub x: f64,
    /// Integration weight [m].
    pub weight: f64,
    /// Element owning the point.
    pub elem: usize,
}

/// Nonlocal rows evaluated at every outer Gauss point, reused across
/// assembly calls since they depend only on (mesh, params).
#[derive(Debug, Clone)]
pub struct RowCache {
    /// Outer integration points, element by element.
    pub points: Vec<GaussPoint>,
    /// Nonlocal rows, one per point.
    pub rows: Vec<NonlocalBRow>,
}

impl RowCache {
    /// Evaluates the rows at `n_outer` Gauss points per element, in
    /// parallel over points with deterministic ordering.
    pub fn build(
        mesh: &Mesh,
        params: &FractionalParams,
        op: &FracOperator,
        n_outer: usize,
    ) -> Result<Self> {
        let rule = crate::frac::quad::gauss_legendre(n_outer);
        let mut points = Vec::with_capacity(mesh.n_elems * n_outer);
        for e in 0..mesh.n_elems {
            let a = mesh.nodes[e];
            let half = 0.5 * mesh.le;
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                points.push(GaussPoint {
                    x: a + half * (1.0 + t),
                    weight: half * w,
                    elem: e,
                });
            }
        }
        let rows = points
            .par_iter()
            .map(|p| nonlocal_b_row(mesh, op, params, p.x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { points, rows })
    }

    /// Largest dof distance coupled by any row: the band width of the
    /// assembled stiffness.
    pub fn dof_bandwidth(&self) -> usize {
        self.rows
            .iter()
            .map(|r| DOF_PER_NODE * (r.n_nodes - 1) + 2)
            .max()
            .unwrap_or(0)
    }
}
