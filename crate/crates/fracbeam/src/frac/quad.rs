//! Gaussian quadrature rules built by the Golub-Welsch eigenvalue method.
//!
//! Two families are needed:
//! - Gauss-Legendre on [-1, 1] for smooth integrands
//! - Gauss-Jacobi on (0, 1] with the weight u^(-alpha) absorbed into the
//!   rule, for integrands that are singular at one endpoint

use nalgebra::DMatrix;

/// Nodes and weights of a fixed quadrature rule.
///
/// The interval and any absorbed weight function are fixed by the
/// constructor that produced the rule.
#[derive(Debug, Clone)]
pub struct QuadRule {
    /// Abscissae, sorted ascending.
    pub nodes: Vec<f64>,
    /// Weights, positive.
    pub weights: Vec<f64>,
}

impl QuadRule {
    /// Number of points.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the rule has no points.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Solves the symmetric tridiagonal eigenproblem of the three-term
/// recurrence and converts eigenpairs to nodes and weights.
///
/// `mu0` is the zeroth moment of the weight function; each quadrature
/// weight is mu0 times the squared first component of the corresponding
/// normalized eigenvector.
fn golub_welsch(diag: &[f64], offdiag: &[f64], mu0: f64) -> QuadRule {
    let n = diag.len();
    let mut jacobi = DMatrix::zeros(n, n);
    for (i, &d) in diag.iter().enumerate() {
        jacobi[(i, i)] = d;
    }
    for (i, &e) in offdiag.iter().enumerate() {
        jacobi[(i, i + 1)] = e;
        jacobi[(i + 1, i)] = e;
    }
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let q0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], mu0 * q0 * q0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    QuadRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// n-point Gauss-Legendre rule on [-1, 1].
///
/// Exact for polynomials up to degree 2n - 1.
pub fn gauss_legendre(n: usize) -> QuadRule {
    assert!(n >= 1, "quadrature order must be at least 1");
    let diag = vec![0.0; n];
    let offdiag: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    golub_welsch(&diag, &offdiag, 2.0)
}

/// n-point rule for integrals of the form
/// `int_0^1 u^(-alpha) g(u) du ~= sum_i w_i g(u_i)`,
/// with the singular factor absorbed into the weights.
///
/// Exact for polynomial g up to degree 2n - 1. Requires alpha < 1.
///
/// Built from the Gauss-Jacobi rule with weight (1 + t)^(-alpha) on
/// [-1, 1] (Jacobi exponents a = 0, b = -alpha), then mapped affinely
/// onto the unit interval.
pub fn gauss_jacobi_unit(n: usize, alpha: f64) -> QuadRule {
    assert!(n >= 1, "quadrature order must be at least 1");
    assert!(alpha < 1.0, "singular rule requires alpha < 1");
    let b = -alpha;
    let mut diag = vec![0.0; n];
    let mut offdiag = vec![0.0; n.saturating_sub(1)];
    diag[0] = b / (b + 2.0);
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + b;
        diag[k] = b * b / (s * (s + 2.0));
        let num = 4.0 * kf * kf * (kf + b) * (kf + b);
        offdiag[k - 1] = (num / (s * s * (s + 1.0) * (s - 1.0))).sqrt();
    }
    let mu0 = (1.0 + b).exp2() / (1.0 + b);
    let rule = golub_welsch(&diag, &offdiag, mu0);
    let scale = (-1.0 - b).exp2();
    QuadRule {
        nodes: rule.nodes.iter().map(|t| 0.5 * (1.0 + t)).collect(),
        weights: rule.weights.iter().map(|w| scale * w).collect(),
    }
}
