//! Beam description, thermal fields, and thermoelastic constitutive laws.
//!
//! Two levels of constitutive modelling live here:
//! - pointwise 3D isotropic thermoelasticity (stress, entropy density,
//!   Helmholtz free energy density) used for verification of the material
//!   model itself
//! - the beam reduction: fractional axial/bending strains, the 1D axial
//!   stress law, and force/moment resultants including their thermal parts
//!
//! Thermal resultants for the three built-in field shapes are integrated
//! through the thickness analytically.

use crate::frac::{FracOperator, Horizon};
use crate::{Error, Result};
use nalgebra::Matrix3;

/// Kinematic constraint at a beam end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// u0 = w0 = dw0/dx1 = 0.
    Clamped,
    /// u0 = w0 = 0, rotation free (axially immovable pin).
    Pinned,
    /// w0 = 0 only; the end may slide axially.
    PinnedMovable,
    /// Unconstrained.
    Free,
}

/// Geometry, material, and end supports of a rectangular-section beam.
#[derive(Debug, Clone, Copy)]
pub struct BeamSpec {
    /// Length [m].
    pub length: f64,
    /// Section width [m].
    pub width: f64,
    /// Section height [m].
    pub height: f64,
    /// Young's modulus [Pa].
    pub youngs: f64,
    /// Linear thermal expansion coefficient [1/K].
    pub alpha0: f64,
    /// First Lame parameter [Pa]; used only by the 3D pointwise laws.
    pub lambda: f64,
    /// Shear modulus [Pa]; used only by the 3D pointwise laws.
    pub mu: f64,
    /// Reference mass density [kg/m^3].
    pub rho0: f64,
    /// Specific heat at constant strain [J/(kg K)].
    pub cv0: f64,
    /// Reference temperature [K].
    pub t0: f64,
    /// Support at x1 = 0.
    pub bc_left: BoundaryCondition,
    /// Support at x1 = L.
    pub bc_right: BoundaryCondition,
}

impl BeamSpec {
    /// Aluminum beam at room temperature with both ends clamped.
    ///
    /// E = 70 GPa, alpha0 = 23e-6 1/K, nu = 0.3, rho0 = 2700 kg/m^3,
    /// Cv0 = 900 J/(kg K), T0 = 300 K.
    pub fn aluminum(length: f64, width: f64, height: f64) -> Self {
        let youngs = 70e9;
        let nu = 0.3;
        Self {
            length,
            width,
            height,
            youngs,
            alpha0: 23e-6,
            lambda: youngs * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
            mu: youngs / (2.0 * (1.0 + nu)),
            rho0: 2700.0,
            cv0: 900.0,
            t0: 300.0,
            bc_left: BoundaryCondition::Clamped,
            bc_right: BoundaryCondition::Clamped,
        }
    }

    /// Rejects non-physical geometry or material values.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("width", self.width),
            ("height", self.height),
            ("youngs", self.youngs),
            ("t0", self.t0),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!(
                    "beam {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Axial stiffness A11 = E b h [N].
    pub fn axial_stiffness(&self) -> f64 {
        self.youngs * self.width * self.height
    }

    /// Bending stiffness D11 = E b h^3 / 12 [N m^2].
    pub fn bending_stiffness(&self) -> f64 {
        self.youngs * self.width * self.height.powi(3) / 12.0
    }

    /// True when the slenderness L/h supports the thin-beam kinematics.
    pub fn is_slender(&self) -> bool {
        self.length / self.height >= 20.0
    }
}

/// Prescribed temperature difference field over the beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThermalField {
    /// theta = theta0 everywhere.
    Uniform {
        /// Temperature rise [K].
        theta0: f64,
    },
    /// theta = theta1 (1 + 2 x3 / h): zero at the bottom face, 2 theta1
    /// at the top face, theta1 at the midplane.
    LinearThickness {
        /// Midplane temperature rise [K].
        theta1: f64,
    },
    /// theta = theta1 (1 - x1/L)(x1/L): parabolic along the length,
    /// uniform through the thickness, zero at both ends.
    ParabolicLength {
        /// Peak scale [K]; the midspan value is theta1 / 4.
        theta1: f64,
    },
}

impl ThermalField {
    /// Same field shape with the amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Self::Uniform { theta0 } => Self::Uniform {
                theta0: factor * theta0,
            },
            Self::LinearThickness { theta1 } => Self::LinearThickness {
                theta1: factor * theta1,
            },
            Self::ParabolicLength { theta1 } => Self::ParabolicLength {
                theta1: factor * theta1,
            },
        }
    }

    /// Temperature difference at a point of the beam [K].
    pub fn evaluate(&self, x1: f64, x3: f64, spec: &BeamSpec) -> f64 {
        match *self {
            Self::Uniform { theta0 } => theta0,
            Self::LinearThickness { theta1 } => theta1 * (1.0 + 2.0 * x3 / spec.height),
            Self::ParabolicLength { theta1 } => {
                let xi = x1 / spec.length;
                theta1 * (1.0 - xi) * xi
            }
        }
    }

    /// Thermal force and moment resultants (N_theta [N], M_theta [N m]):
    /// E b alpha0 times the through-thickness integrals of {1, x3} theta,
    /// evaluated analytically.
    pub fn resultants(&self, x1: f64, spec: &BeamSpec) -> (f64, f64) {
        let eba = spec.youngs * spec.width * spec.alpha0;
        let h = spec.height;
        match *self {
            Self::Uniform { theta0 } => (eba * h * theta0, 0.0),
            // int theta1 (1 + 2 x3/h) dx3 = theta1 h;
            // int theta1 (1 + 2 x3/h) x3 dx3 = theta1 h^2 / 6
            Self::LinearThickness { theta1 } => (eba * h * theta1, eba * h * h * theta1 / 6.0),
            Self::ParabolicLength { theta1 } => {
                let xi = x1 / spec.length;
                (eba * h * theta1 * (1.0 - xi) * xi, 0.0)
            }
        }
    }
}

/// Fractional midplane strain state at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainState {
    /// Position along the beam [m].
    pub x1: f64,
    /// Midplane axial strain.
    pub eps0: f64,
    /// Bending strain [1/m].
    pub kappa: f64,
}

/// Whether the membrane strain keeps the von Karman rotation term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrainMode {
    /// eps0 = D^alpha u0.
    Linear,
    /// eps0 = D^alpha u0 + 1/2 (D^alpha w0)^2.
    VonKarman,
}

/// Force and moment resultants at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resultants {
    /// Axial force [N].
    pub n: f64,
    /// Bending moment [N m].
    pub m: f64,
    /// Thermal force [N].
    pub n_theta: f64,
    /// Thermal moment [N m].
    pub m_theta: f64,
}

/// Fractional axial and bending strains of the midplane displacement
/// fields, given their classical derivatives as closures.
///
/// eps0 = D^alpha u0 + 1/2 (D^alpha w0)^2 (the rotation term dropped in
/// [`StrainMode::Linear`]); kappa = -D^alpha(dw0/dx1).
pub fn fractional_strains(
    op: &FracOperator,
    horizon: &Horizon,
    mode: StrainMode,
    u0_prime: impl Fn(f64) -> f64,
    w0_prime: impl Fn(f64) -> f64,
    w0_second: impl Fn(f64) -> f64,
) -> StrainState {
    let du = op.rc_derivative(u0_prime, horizon, &[]);
    let dw = op.rc_derivative(w0_prime, horizon, &[]);
    let eps0 = match mode {
        StrainMode::Linear => du,
        StrainMode::VonKarman => du + 0.5 * dw * dw,
    };
    StrainState {
        x1: horizon.x,
        eps0,
        kappa: -op.rc_derivative(w0_second, horizon, &[]),
    }
}

/// Axial force and bending moment from strains and thermal resultants:
/// N = A11 eps0 - N_theta, M = D11 kappa - M_theta.
pub fn resultants(strain: &StrainState, n_theta: f64, m_theta: f64, spec: &BeamSpec) -> Resultants {
    Resultants {
        n: spec.axial_stiffness() * strain.eps0 - n_theta,
        m: spec.bending_stiffness() * strain.kappa - m_theta,
        n_theta,
        m_theta,
    }
}

/// 3D isotropic thermoelastic stress:
/// sigma_ij = lambda delta_ij eps_kk + 2 mu eps_ij - (3 lambda + 2 mu) alpha0 delta_ij theta.
pub fn isotropic_stress_3d(strain: &Matrix3<f64>, theta: f64, spec: &BeamSpec) -> Matrix3<f64> {
    let trace = strain.trace();
    let pressure = spec.lambda * trace - (3.0 * spec.lambda + 2.0 * spec.mu) * spec.alpha0 * theta;
    Matrix3::identity() * pressure + strain * (2.0 * spec.mu)
}

/// Entropy per unit mass [J/(kg K)]:
/// eta = (3 lambda + 2 mu) alpha0 eps_kk / rho0 + Cv0 theta / T0.
pub fn entropy_density(strain: &Matrix3<f64>, theta: f64, spec: &BeamSpec) -> f64 {
    (3.0 * spec.lambda + 2.0 * spec.mu) * spec.alpha0 * strain.trace() / spec.rho0
        + spec.cv0 * theta / spec.t0
}

/// Helmholtz free energy per unit volume [J/m^3]:
/// W = 1/2 lambda eps_kk^2 + mu eps:eps
///   - (3 lambda + 2 mu) alpha0 eps_kk theta - rho0 Cv0 theta^2 / (2 T0).
pub fn helmholtz_density(strain: &Matrix3<f64>, theta: f64, spec: &BeamSpec) -> f64 {
    let trace = strain.trace();
    let contraction: f64 = strain.iter().map(|e| e * e).sum();
    0.5 * spec.lambda * trace * trace + spec.mu * contraction
        - (3.0 * spec.lambda + 2.0 * spec.mu) * spec.alpha0 * trace * theta
        - spec.rho0 * spec.cv0 * theta * theta / (2.0 * spec.t0)
}

/// Beam axial stress [Pa]: sigma11 = E (eps0 + x3 kappa - alpha0 theta).
pub fn beam_axial_stress(strain: &StrainState, x3: f64, theta: f64, spec: &BeamSpec) -> f64 {
    spec.youngs * (strain.eps0 + x3 * strain.kappa - spec.alpha0 * theta)
}

/// Dimensionless stress (h/L)^2 sigma11 / q0.
pub fn normalized_stress(sigma11: f64, q0: f64, spec: &BeamSpec) -> Result<f64> {
    if q0 == 0.0 {
        return Err(Error::Config(
            "stress normalization undefined for q0 = 0".into(),
        ));
    }
    let ratio = spec.height / spec.length;
    Ok(sigma11 * ratio * ratio / q0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::quad::gauss_legendre;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn spec() -> BeamSpec {
        BeamSpec::aluminum(1.0, 1.0, 0.01)
    }

    fn frac_setup() -> (FracOperator, Horizon) {
        (
            FracOperator::new(0.6),
            Horizon {
                x: 0.5,
                l_a: 0.15,
                l_b: 0.2,
            },
        )
    }

    /// Deterministic pseudo-random stream for the identity sweeps.
    struct Lcg(u64);

    impl Lcg {
        fn next_unit(&mut self) -> f64 {
            self.0 = self
                .0
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (self.0 >> 11) as f64 / (1u64 << 53) as f64
        }

        fn next_sym(&mut self, scale: f64) -> f64 {
            scale * (2.0 * self.next_unit() - 1.0)
        }
    }

    fn random_symmetric(rng: &mut Lcg, scale: f64) -> Matrix3<f64> {
        let mut m = Matrix3::zeros();
        for i in 0..3 {
            for j in i..3 {
                let v = rng.next_sym(scale);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn stiffness_coefficients_follow_section_geometry() {
        let s = spec();
        assert_relative_eq!(s.axial_stiffness(), 70e9 * 0.01, max_relative = 1e-15);
        assert_relative_eq!(
            s.bending_stiffness(),
            70e9 * 0.01f64.powi(3) / 12.0,
            max_relative = 1e-15
        );
        assert!(s.is_slender());
        assert!(!BeamSpec::aluminum(0.1, 1.0, 0.01).is_slender());
    }

    #[test]
    fn spec_validation_rejects_nonpositive_dimensions() {
        let mut s = spec();
        s.height = 0.0;
        assert!(s.validate().is_err());
        assert!(spec().validate().is_ok());
    }

    #[test]
    fn rigid_translation_produces_no_strain() {
        let (op, h) = frac_setup();
        let st = fractional_strains(&op, &h, StrainMode::VonKarman, |_| 0.0, |_| 0.0, |_| 0.0);
        assert_eq!(st.eps0, 0.0);
        assert_eq!(st.kappa, 0.0);
    }

    #[test]
    fn linear_axial_field_gives_uniform_strain() {
        let (op, h) = frac_setup();
        let a = 3e-4;
        let st = fractional_strains(&op, &h, StrainMode::VonKarman, |_| a, |_| 0.0, |_| 0.0);
        assert_relative_eq!(st.eps0, a, max_relative = 1e-12);
        assert_eq!(st.kappa, 0.0);
    }

    #[test]
    fn tilted_deflection_gives_von_karman_membrane_strain() {
        let (op, h) = frac_setup();
        let a = 2e-3;
        let st = fractional_strains(&op, &h, StrainMode::VonKarman, |_| 0.0, |_| a, |_| 0.0);
        assert_relative_eq!(st.eps0, 0.5 * a * a, max_relative = 1e-12);
        assert_abs_diff_eq!(st.kappa, 0.0, epsilon = 1e-18);
        let lin = fractional_strains(&op, &h, StrainMode::Linear, |_| 0.0, |_| a, |_| 0.0);
        assert_eq!(lin.eps0, 0.0);
    }

    #[test]
    fn stress_free_reference_state() {
        let s = spec();
        let sigma = isotropic_stress_3d(&Matrix3::zeros(), 0.0, &s);
        assert_eq!(sigma, Matrix3::zeros());
    }

    #[test]
    fn free_thermal_expansion_is_stress_free() {
        let s = spec();
        let theta = 35.0;
        let strain = Matrix3::identity() * (s.alpha0 * theta);
        let sigma = isotropic_stress_3d(&strain, theta, &s);
        for e in sigma.iter() {
            assert_abs_diff_eq!(*e, 0.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn uniaxial_strain_stress_components() {
        let s = spec();
        let e = 1e-4;
        let mut strain = Matrix3::zeros();
        strain[(0, 0)] = e;
        let sigma = isotropic_stress_3d(&strain, 0.0, &s);
        assert_relative_eq!(
            sigma[(0, 0)],
            (s.lambda + 2.0 * s.mu) * e,
            max_relative = 1e-14
        );
        assert_relative_eq!(sigma[(1, 1)], s.lambda * e, max_relative = 1e-14);
        assert_relative_eq!(sigma[(2, 2)], s.lambda * e, max_relative = 1e-14);
        assert_eq!(sigma[(0, 1)], 0.0);
    }

    #[test]
    fn entropy_density_examples() {
        let s = spec();
        assert_eq!(entropy_density(&Matrix3::zeros(), 0.0, &s), 0.0);
        let theta = 12.0;
        assert_relative_eq!(
            entropy_density(&Matrix3::zeros(), theta, &s),
            s.cv0 * theta / s.t0,
            max_relative = 1e-15
        );
        let v = 3e-4;
        let strain = Matrix3::identity() * (v / 3.0);
        assert_relative_eq!(
            entropy_density(&strain, 0.0, &s),
            (3.0 * s.lambda + 2.0 * s.mu) * s.alpha0 * v / s.rho0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn helmholtz_density_pure_shear() {
        let s = spec();
        assert_eq!(helmholtz_density(&Matrix3::zeros(), 0.0, &s), 0.0);
        let g = 2.5e-4;
        let mut strain = Matrix3::zeros();
        strain[(0, 1)] = g;
        strain[(1, 0)] = g;
        assert_relative_eq!(
            helmholtz_density(&strain, 0.0, &s),
            2.0 * s.mu * g * g,
            max_relative = 1e-14
        );
    }

    #[test]
    fn helmholtz_equals_stress_work_minus_entropy_term() {
        // W = 1/2 sigma:eps - 1/2 rho0 eta theta on arbitrary states.
        let s = spec();
        let mut rng = Lcg(0x9e3779b97f4a7c15);
        for _ in 0..100 {
            let strain = random_symmetric(&mut rng, 1e-3);
            let theta = rng.next_sym(50.0);
            let sigma = isotropic_stress_3d(&strain, theta, &s);
            let eta = entropy_density(&strain, theta, &s);
            let work: f64 = sigma.iter().zip(strain.iter()).map(|(a, b)| a * b).sum();
            let want = 0.5 * work - 0.5 * s.rho0 * eta * theta;
            let got = helmholtz_density(&strain, theta, &s);
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn beam_axial_stress_examples() {
        let s = spec();
        let thermal = StrainState {
            x1: 0.0,
            eps0: s.alpha0 * 25.0,
            kappa: 0.0,
        };
        assert_abs_diff_eq!(
            beam_axial_stress(&thermal, 0.0, 25.0, &s),
            0.0,
            epsilon = 1e-9
        );
        let axial = StrainState {
            x1: 0.0,
            eps0: 1e-4,
            kappa: 0.0,
        };
        assert_relative_eq!(
            beam_axial_stress(&axial, 0.0, 0.0, &s),
            7.0e6,
            max_relative = 1e-14
        );
        let bent = StrainState {
            x1: 0.0,
            eps0: 0.0,
            kappa: 1e-3,
        };
        let top = beam_axial_stress(&bent, s.height / 2.0, 0.0, &s);
        let bottom = beam_axial_stress(&bent, -s.height / 2.0, 0.0, &s);
        assert_relative_eq!(top, -bottom, max_relative = 1e-14);
        assert!(top > 0.0);
    }

    #[test]
    fn thermal_resultants_uniform_field() {
        let s = spec();
        let theta0 = 40.0;
        let (n, m) = ThermalField::Uniform { theta0 }.resultants(0.3, &s);
        assert_relative_eq!(
            n,
            s.youngs * s.width * s.height * s.alpha0 * theta0,
            max_relative = 1e-15
        );
        assert_eq!(m, 0.0);
    }

    #[test]
    fn thermal_resultants_linear_thickness_field() {
        let s = spec();
        let theta1 = 10.0;
        let (n, m) = ThermalField::LinearThickness { theta1 }.resultants(0.0, &s);
        let eba = s.youngs * s.width * s.alpha0;
        assert_relative_eq!(n, eba * s.height * theta1, max_relative = 1e-15);
        assert_relative_eq!(
            m,
            eba * s.height * s.height * theta1 / 6.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn thermal_resultants_parabolic_field_vanishes_at_ends() {
        let s = spec();
        let field = ThermalField::ParabolicLength { theta1: 100.0 };
        assert_eq!(field.resultants(0.0, &s), (0.0, 0.0));
        assert_eq!(field.resultants(s.length, &s), (0.0, 0.0));
        let (n_mid, m_mid) = field.resultants(s.length / 2.0, &s);
        assert_relative_eq!(
            n_mid,
            s.youngs * s.width * s.height * s.alpha0 * 25.0,
            max_relative = 1e-15
        );
        assert_eq!(m_mid, 0.0);
    }

    #[test]
    fn resultants_match_through_thickness_integration() {
        // N = int sigma11 b dx3, M = int sigma11 x3 b dx3, via 8-point
        // Gauss-Legendre through the thickness for each field shape.
        let s = spec();
        let rule = gauss_legendre(8);
        let strain = StrainState {
            x1: 0.35,
            eps0: 2.4e-4,
            kappa: 0.8,
        };
        for field in [
            ThermalField::Uniform { theta0: 30.0 },
            ThermalField::LinearThickness { theta1: 10.0 },
            ThermalField::ParabolicLength { theta1: 100.0 },
        ] {
            let (n_theta, m_theta) = field.resultants(strain.x1, &s);
            let res = resultants(&strain, n_theta, m_theta, &s);
            let half = s.height / 2.0;
            let mut n_int = 0.0;
            let mut m_int = 0.0;
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let x3 = half * t;
                let theta = field.evaluate(strain.x1, x3, &s);
                let sigma = beam_axial_stress(&strain, x3, theta, &s);
                n_int += w * half * sigma * s.width;
                m_int += w * half * sigma * x3 * s.width;
            }
            assert_relative_eq!(res.n, n_int, max_relative = 1e-10);
            assert_relative_eq!(res.m, m_int, max_relative = 1e-10);
        }
    }

    #[test]
    fn normalized_stress_examples() {
        let s = spec();
        assert_eq!(normalized_stress(0.0, 1e4, &s).unwrap(), 0.0);
        assert_relative_eq!(
            normalized_stress(1e8, 1e4, &s).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            normalized_stress(1e8, 2e4, &s).unwrap(),
            0.5,
            max_relative = 1e-14
        );
        assert!(normalized_stress(1e8, 0.0, &s).is_err());
    }
}
