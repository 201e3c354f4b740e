//! Fractional differential and integral operators over a finite horizon.
//!
//! The central object is a two-sided power-law kernel: the fractional
//! derivative of order alpha in (0, 1) is the horizon integral of the
//! classical first derivative against an attenuation weight
//! `A(x, s) = 1/2 (1 - alpha) l^(alpha-1) |x - s|^(-alpha)`,
//! where l is the length scale of the side containing s. The kernel
//! integrates to one over the horizon, annihilates constants, reproduces
//! linears exactly, and collapses to the local derivative at alpha = 1.
//!
//! Provides:
//! - [`FractionalParams`] and [`Horizon`] with boundary truncation
//! - [`attenuation_weight`], the pointwise kernel
//! - [`FracOperator`]: quadrature-backed Riesz-Caputo derivative,
//!   Riesz Riemann-Liouville derivative, and Riesz fractional integral
//!
//! Quadrature strategy: each one-sided integral is split at the supplied
//! breakpoints (element boundaries); the subinterval abutting the
//! singular point uses a Gauss-Jacobi rule that absorbs the |x - s|^(-alpha)
//! factor, remaining subintervals are geometrically graded away from the
//! singularity and use Gauss-Legendre on the full integrand.

pub mod quad;

use crate::{Error, Result};
use quad::{gauss_jacobi_unit, gauss_legendre, QuadRule};

/// Fractional order and nominal horizon length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalParams {
    /// Differintegration order, in (0, 1]; 1 is the exact local limit.
    pub alpha: f64,
    /// Nominal horizon length [m], truncated near domain ends.
    pub l_f: f64,
}

impl FractionalParams {
    /// Validates the order and horizon length.
    pub fn new(alpha: f64, l_f: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Config(format!(
                "fractional order alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if !(l_f > 0.0) {
            return Err(Error::Config(format!(
                "horizon length l_f must be positive, got {l_f}"
            )));
        }
        Ok(Self { alpha, l_f })
    }
}

/// One-sided horizon lengths at an evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    /// Evaluation point [m].
    pub x: f64,
    /// Length available on the left, `min(l_f, x)` [m].
    pub l_a: f64,
    /// Length available on the right, `min(l_f, L - x)` [m].
    pub l_b: f64,
}

/// Truncates the nominal horizon against the domain ends.
pub fn truncated_length_scales(x: f64, length: f64, params: &FractionalParams) -> Result<Horizon> {
    if !(0.0..=length).contains(&x) {
        return Err(Error::Config(format!(
            "evaluation point {x} outside the domain [0, {length}]"
        )));
    }
    Ok(Horizon {
        x,
        l_a: params.l_f.min(x),
        l_b: params.l_f.min(length - x),
    })
}

/// Pointwise attenuation kernel `A(x, s)` [1/m].
///
/// `1/2 (1 - alpha) l_a^(alpha-1) (x-s)^(-alpha)` for s left of x, and the
/// mirrored expression with l_b for s right of x. Singular at s = x; the
/// quadrature in [`FracOperator`] absorbs that singularity, so callers
/// never evaluate there.
pub fn attenuation_weight(s: f64, horizon: &Horizon, alpha: f64) -> f64 {
    let x = horizon.x;
    assert!(s != x, "attenuation kernel is singular at s = x");
    let half = 0.5 * (1.0 - alpha);
    if s < x {
        half * horizon.l_a.powf(alpha - 1.0) * (x - s).powf(-alpha)
    } else {
        half * horizon.l_b.powf(alpha - 1.0) * (s - x).powf(-alpha)
    }
}

/// A side length below this fraction of the total horizon is treated as
/// fully truncated and replaced by its analytic local limit.
const DEGENERATE_REL: f64 = 1e-12;

/// Default point count of the singular (Gauss-Jacobi) subinterval rule.
const SINGULAR_ORDER: usize = 6;

/// Default point count of the regular (Gauss-Legendre) subinterval rule.
const REGULAR_ORDER: usize = 12;

/// Quadrature-backed fractional operators for one fixed order alpha.
///
/// Construction builds the singular rule for that alpha once; evaluation
/// is then allocation-light and reusable across many points.
#[derive(Debug, Clone)]
pub struct FracOperator {
    alpha: f64,
    /// Unit-interval rule absorbing u^(-alpha); empty when alpha = 1.
    singular: QuadRule,
    /// Gauss-Legendre rule on [-1, 1] for graded regular subintervals.
    regular: QuadRule,
}

impl FracOperator {
    /// Operator with default quadrature orders.
    pub fn new(alpha: f64) -> Self {
        Self::with_orders(alpha, SINGULAR_ORDER, REGULAR_ORDER)
    }

    /// Operator with explicit quadrature orders.
    pub fn with_orders(alpha: f64, n_singular: usize, n_regular: usize) -> Self {
        let singular = if alpha < 1.0 {
            gauss_jacobi_unit(n_singular, alpha)
        } else {
            QuadRule {
                nodes: Vec::new(),
                weights: Vec::new(),
            }
        };
        Self {
            alpha,
            singular,
            regular: gauss_legendre(n_regular),
        }
    }

    /// The fractional order this operator was built for.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Quadrature stations (s_j, w_j) such that
    /// `sum_j w_j g(s_j) ~= int A(x, s) g(s) ds` over the horizon.
    ///
    /// `breaks` are abscissae where g loses smoothness (element
    /// boundaries); they are used as mandatory split points. A fully
    /// truncated side contributes the single station (x, 1/2), its
    /// analytic limit. At alpha = 1 the result is the single station
    /// (x, 1). The station weights always sum to one.
    pub fn kernel_stations(&self, horizon: &Horizon, breaks: &[f64]) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        self.kernel_stations_into(horizon, breaks, &mut out);
        out
    }

    /// As [`Self::kernel_stations`], appending into a caller-owned buffer.
    pub fn kernel_stations_into(
        &self,
        horizon: &Horizon,
        breaks: &[f64],
        out: &mut Vec<(f64, f64)>,
    ) {
        out.clear();
        if self.alpha == 1.0 {
            out.push((horizon.x, 1.0));
            return;
        }
        let degenerate = DEGENERATE_REL * (horizon.l_a + horizon.l_b);
        for (ext, sign) in [(horizon.l_a, -1.0), (horizon.l_b, 1.0)] {
            if ext <= degenerate {
                out.push((horizon.x, 0.5));
            } else {
                let scale = 0.5 * (1.0 - self.alpha) * ext.powf(self.alpha - 1.0);
                self.side_stations(horizon.x, ext, sign, breaks, scale, out);
            }
        }
    }

    /// Stations approximating `scale * int_0^ext tau^(-alpha) g(x + sign*tau) dtau`.
    fn side_stations(
        &self,
        x: f64,
        ext: f64,
        sign: f64,
        breaks: &[f64],
        scale: f64,
        out: &mut Vec<(f64, f64)>,
    ) {
        let tol = 1e-14 * ext;
        let mut cuts: Vec<f64> = breaks
            .iter()
            .map(|&b| sign * (b - x))
            .filter(|&t| t > tol && t < ext - tol)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.push(ext);

        // Singular subinterval [0, c0]: Gauss-Jacobi with the weight absorbed.
        let c0 = cuts[0];
        let jac_scale = scale * c0.powf(1.0 - self.alpha);
        for (u, w) in self.singular.nodes.iter().zip(&self.singular.weights) {
            out.push((x + sign * c0 * u, jac_scale * w));
        }

        // Regular subintervals, geometrically graded toward the singularity
        // so that each piece is no longer than its distance from it.
        let mut lo = c0;
        for &q in &cuts[1..] {
            while q - lo > lo {
                self.regular_piece(x, sign, scale, lo, 2.0 * lo, out);
                lo *= 2.0;
            }
            self.regular_piece(x, sign, scale, lo, q, out);
            lo = q;
        }
    }

    /// Gauss-Legendre stations on one regular piece [a, b] of the
    /// distance axis, with the kernel factor evaluated pointwise.
    fn regular_piece(
        &self,
        x: f64,
        sign: f64,
        scale: f64,
        a: f64,
        b: f64,
        out: &mut Vec<(f64, f64)>,
    ) {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (t, w) in self.regular.nodes.iter().zip(&self.regular.weights) {
            let tau = mid + half * t;
            out.push((x + sign * tau, scale * half * w * tau.powf(-self.alpha)));
        }
    }

    /// Riesz-Caputo derivative of order alpha at the horizon's point:
    /// the kernel average of the classical derivative f'.
    ///
    /// `breaks` mark points where f' loses smoothness; pass an empty
    /// slice for globally smooth f.
    pub fn rc_derivative(
        &self,
        f_prime: impl Fn(f64) -> f64,
        horizon: &Horizon,
        breaks: &[f64],
    ) -> f64 {
        if self.alpha == 1.0 {
            return f_prime(horizon.x);
        }
        self.kernel_stations(horizon, breaks)
            .iter()
            .map(|&(s, w)| w * f_prime(s))
            .sum()
    }

    /// One-sided integral `int_0^ext tau^(-alpha) g(x + sign*tau) dtau`
    /// for smooth g, without breakpoints.
    fn side_integral(&self, x: f64, ext: f64, sign: f64, g: &impl Fn(f64) -> f64) -> f64 {
        let mut stations = Vec::with_capacity(self.singular.len());
        self.side_stations(x, ext, sign, &[], 1.0, &mut stations);
        stations.iter().map(|&(s, w)| w * g(s)).sum()
    }

    /// Riesz Riemann-Liouville derivative of order alpha.
    ///
    /// Defined on the adjoint interval (x - l_b, x + l_a): the pairing
    /// with the Riesz-Caputo derivative under integration by parts swaps
    /// the truncated length scales. Unlike the Riesz-Caputo form it does
    /// not annihilate constants; the one-sided differentiations leave
    /// boundary terms `1/2 (1-alpha) (g(x-l_b)/l_b - g(x+l_a)/l_a)`.
    pub fn riesz_rl_derivative(
        &self,
        g: impl Fn(f64) -> f64,
        g_prime: impl Fn(f64) -> f64,
        horizon: &Horizon,
    ) -> f64 {
        if self.alpha == 1.0 {
            return g_prime(horizon.x);
        }
        let x = horizon.x;
        let half = 0.5 * (1.0 - self.alpha);
        let degenerate = DEGENERATE_REL * (horizon.l_a + horizon.l_b);
        let mut acc = 0.0;
        for (ext, sign) in [(horizon.l_b, -1.0), (horizon.l_a, 1.0)] {
            if ext <= degenerate {
                acc += 0.5 * g_prime(x);
            } else {
                acc +=
                    half * ext.powf(self.alpha - 1.0) * self.side_integral(x, ext, sign, &g_prime);
                acc -= half * sign * g(x + sign * ext) / ext;
            }
        }
        acc
    }

    /// Riesz fractional integral of order 1 - alpha on the adjoint
    /// interval (x - l_b, x + l_a). Reproduces constants exactly and is
    /// the identity at alpha = 1.
    pub fn riesz_integral(&self, g: impl Fn(f64) -> f64, horizon: &Horizon) -> f64 {
        let wl = horizon.l_b.powf(self.alpha - 1.0);
        let wr = horizon.l_a.powf(self.alpha - 1.0);
        self.riesz_integral_about(&g, horizon, horizon.x, wl, wr)
    }

    /// Riesz integral with frozen terminals and side prefactors, evaluated
    /// with the singular point displaced to `x_eval`. Displacing the point
    /// while holding everything else fixed is exactly the differentiation
    /// that relates this integral to [`Self::riesz_rl_derivative`].
    pub fn riesz_integral_about(
        &self,
        g: &impl Fn(f64) -> f64,
        horizon: &Horizon,
        x_eval: f64,
        w_left: f64,
        w_right: f64,
    ) -> f64 {
        if self.alpha == 1.0 {
            return g(x_eval);
        }
        let a = horizon.x - horizon.l_b;
        let b = horizon.x + horizon.l_a;
        let degenerate = DEGENERATE_REL * (horizon.l_a + horizon.l_b);
        let half = 0.5 * (1.0 - self.alpha);
        let mut acc = 0.0;
        for (ext, sign, w) in [(x_eval - a, -1.0, w_left), (b - x_eval, 1.0, w_right)] {
            if ext <= degenerate {
                acc += 0.5 * g(x_eval);
            } else {
                acc += half * w * self.side_integral(x_eval, ext, sign, g);
            }
        }
        acc
    }
}
