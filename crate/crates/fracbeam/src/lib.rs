//! Fractional-order nonlocal thermoelastic Euler-Bernoulli beam solver.
//!
//! The mechanics are built on a space-fractional Riesz-Caputo derivative with
//! a finite horizon: axial strain and curvature are nonlocal averages of the
//! classical gradients, weighted by a power-law attenuation kernel. On top of
//! that sit a von Karman beam model with thermal membrane/bending resultants,
//! a finite element discretization whose strain-displacement rows are kernel
//! averages of the local ones, a Newton solver with load stepping, and a set
//! of independent verification oracles (closed forms, direct energy
//! minimization, strong-form residual sampling).
//!
//! Modules:
//! - [`frac`]: fractional operators and the singularity-aware quadrature
//! - [`thermo`]: constitutive relations, beam resultants, thermal fields
//! - [`fem`]: mesh, shape functions, nonlocal strain rows, assembly
//! - [`banded`]: symmetric banded storage and Cholesky factorization
//! - [`solver`]: linear solves and Newton-Raphson with load stepping
//! - [`oracle`]: reference solutions and independent checks
//! - [`cli`]: TOML configuration, CSV output, subcommand drivers

// Negated comparisons reject NaN along with the out-of-range values;
// indexed scatter loops write through offsets into several arrays at once.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod banded;
pub mod cli;
pub mod fem;
pub mod frac;
pub mod oracle;
pub mod solver;
pub mod thermo;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Configuration rejected before any computation ran.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Iterative solver failed to converge.
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    /// Linear algebra failure (factorization breakdown, singular system).
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    /// I/O failure while reading config or writing results.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
