//! Acceptance gate: one test per shipping criterion, run against the
//! public API only. Each test prints the measured numbers it judges, so
//! a failure report carries the evidence.

use std::time::Instant;

use fracbeam::fem::assemble::{assemble_linear, AssemblyOptions, BeamSystem, LoadCase};
use fracbeam::fem::Mesh;
use fracbeam::frac::{truncated_length_scales, FracOperator, FractionalParams, Horizon};
use fracbeam::oracle::minimize_energy_direct;
use fracbeam::solver::{newton_raphson, solve_linear, SolverConfig};
use fracbeam::thermo::{
    entropy_density, helmholtz_density, isotropic_stress_3d, BeamSpec, BoundaryCondition,
    StrainMode, ThermalField,
};
use nalgebra::{DMatrix, DVector, Matrix3};

/// Canonical slender aluminum beam: L = 1 m, b = 1 m, h = 0.01 m.
fn unit_beam(left: BoundaryCondition, right: BoundaryCondition) -> BeamSpec {
    let mut spec = BeamSpec::aluminum(1.0, 1.0, 0.01);
    spec.bc_left = left;
    spec.bc_right = right;
    spec
}

fn system(spec: &BeamSpec, alpha: f64, l_f: f64, n_elems: usize) -> BeamSystem {
    let params = FractionalParams::new(alpha, l_f).unwrap();
    let mesh = Mesh::new(spec.length, n_elems).unwrap();
    BeamSystem::new(*spec, params, mesh, AssemblyOptions::default()).unwrap()
}

fn udtl(q0: f64) -> LoadCase {
    LoadCase {
        axial: 0.0,
        transverse: q0,
        thermal: None,
    }
}

fn thermal_only(field: ThermalField) -> LoadCase {
    LoadCase {
        axial: 0.0,
        transverse: 0.0,
        thermal: Some(field),
    }
}

fn max_w0_linear(spec: &BeamSpec, alpha: f64, l_f: f64, n_elems: usize, loads: &LoadCase) -> f64 {
    let sys = system(spec, alpha, l_f, n_elems);
    solve_linear(&sys, loads).unwrap().max_abs_w0()
}

fn pseudo_random(seed: u64, len: usize, scale: f64) -> DVector<f64> {
    let mut state = seed;
    DVector::from_fn(len, |_, _| {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        scale * (((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5)
    })
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

/// Simply supported beam under a uniform transverse load in the local
/// limit: peak deflection matches the closed form 5 q0 L^4 / (384 EI)
/// within 0.5%, and the whole solve stays under five seconds.
#[test]
fn criterion_01_local_bending_matches_closed_form_within_budget() {
    let start = Instant::now();
    let spec = unit_beam(BoundaryCondition::Pinned, BoundaryCondition::Pinned);
    let got = max_w0_linear(&spec, 1.0, 0.2, 100, &udtl(1.0e4));
    let elapsed = start.elapsed();
    let want = 2.2321e-2;
    println!(
        "criterion 01: max |w0| = {got:.6e} m, reference {want:.6e} m, \
         rel error {:.3e}, elapsed {elapsed:?}",
        rel_err(got, want)
    );
    assert!(rel_err(got, want) < 5e-3);
    assert!(elapsed.as_secs_f64() < 5.0);
}

/// Simply supported beam heated linearly through the thickness bends
/// into a circular arc: peak deflection alpha0 theta1 L^2 / (4 h)
/// within 0.5%.
#[test]
fn criterion_02_thermal_moment_matches_closed_form() {
    let spec = unit_beam(BoundaryCondition::Pinned, BoundaryCondition::Pinned);
    let loads = thermal_only(ThermalField::LinearThickness { theta1: 10.0 });
    let got = max_w0_linear(&spec, 1.0, 0.2, 100, &loads);
    let want = 5.75e-3;
    println!(
        "criterion 02: max |w0| = {got:.6e} m, reference {want:.6e} m, rel error {:.3e}",
        rel_err(got, want)
    );
    assert!(rel_err(got, want) < 5e-3);
}

/// As the order approaches one with a small horizon (l_f = L/100), the
/// nonlocal deflection converges to the local one: the relative gap
/// shrinks monotonically over alpha = 0.9, 0.99, 0.999 and ends below 1%.
#[test]
fn criterion_03_local_limit_is_approached_monotonically() {
    let spec = unit_beam(BoundaryCondition::Pinned, BoundaryCondition::Pinned);
    let l_f = 0.01;
    // The gaps scale with 1 - alpha down to ~5e-7 relative; the bending
    // block's condition number grows like n_elems^4, and past ~250
    // elements the linear-solve roundoff drowns that signal. 200 keeps
    // the noise floor several times below the smallest gap while the
    // gaps themselves are mesh-converged to ~2%.
    let n_elems = 200;
    let loads = udtl(1.0e4);
    let local = max_w0_linear(&spec, 1.0, l_f, n_elems, &loads);
    let gaps: Vec<f64> = [0.9, 0.99, 0.999]
        .iter()
        .map(|&alpha| {
            let w = max_w0_linear(&spec, alpha, l_f, n_elems, &loads);
            (w - local).abs() / local
        })
        .collect();
    println!(
        "criterion 03: n_elems = {n_elems}, relative gaps to the local solution \
         at alpha = 0.9, 0.99, 0.999: {:.3e}, {:.3e}, {:.3e}",
        gaps[0], gaps[1], gaps[2]
    );
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
    assert!(gaps[2] < 1e-2);
}

/// Lowering the order or widening the horizon softens the beam: the
/// peak deflection strictly increases along alpha = 1.0, 0.9, 0.8 at
/// fixed l_f = L/5, and along l_f = L/20, L/10, L/5 at fixed
/// alpha = 0.8, for both support pairs.
#[test]
fn criterion_04_deflection_grows_with_nonlocality() {
    let loads = udtl(1.0e4);
    for (name, left, right) in [
        (
            "pinned-pinned",
            BoundaryCondition::Pinned,
            BoundaryCondition::Pinned,
        ),
        (
            "clamped-clamped",
            BoundaryCondition::Clamped,
            BoundaryCondition::Clamped,
        ),
    ] {
        let spec = unit_beam(left, right);
        let by_alpha: Vec<f64> = [1.0, 0.9, 0.8]
            .iter()
            .map(|&alpha| max_w0_linear(&spec, alpha, 0.2, 100, &loads))
            .collect();
        let by_horizon: Vec<f64> = [0.05, 0.1, 0.2]
            .iter()
            .map(|&l_f| max_w0_linear(&spec, 0.8, l_f, 100, &loads))
            .collect();
        println!(
            "criterion 04 ({name}): max |w0| over alpha = 1.0, 0.9, 0.8: \
             {:.6e}, {:.6e}, {:.6e}; over l_f = 0.05, 0.1, 0.2: {:.6e}, {:.6e}, {:.6e}",
            by_alpha[0], by_alpha[1], by_alpha[2], by_horizon[0], by_horizon[1], by_horizon[2]
        );
        assert!(by_alpha[0] < by_alpha[1] && by_alpha[1] < by_alpha[2]);
        assert!(by_horizon[0] < by_horizon[1] && by_horizon[1] < by_horizon[2]);
    }
}

/// A cantilever heated parabolically along its length stretches axially;
/// the peak axial displacement matches alpha0 theta1 L / 6 in the local
/// limit and strictly grows as the order drops.
#[test]
fn criterion_05_cantilever_axial_thermal_response_softens() {
    let spec = unit_beam(BoundaryCondition::Clamped, BoundaryCondition::Free);
    let loads = thermal_only(ThermalField::ParabolicLength { theta1: 100.0 });
    let maxima: Vec<f64> = [1.0, 0.9, 0.8]
        .iter()
        .map(|&alpha| {
            let sys = system(&spec, alpha, 0.2, 100);
            solve_linear(&sys, &loads).unwrap().max_abs_u0()
        })
        .collect();
    let want = spec.alpha0 * 100.0 * spec.length / 6.0;
    println!(
        "criterion 05: max |u0| over alpha = 1.0, 0.9, 0.8: {:.6e}, {:.6e}, {:.6e}; \
         local closed form {want:.6e}, rel error {:.3e}",
        maxima[0],
        maxima[1],
        maxima[2],
        rel_err(maxima[0], want)
    );
    assert!(rel_err(maxima[0], want) < 5e-3);
    assert!(maxima[0] < maxima[1] && maxima[1] < maxima[2]);
}

/// Kernel property suite: constants are annihilated exactly, linears are
/// reproduced to 1e-10, symmetric quadratics to 1e-8, the kernel weights
/// sum to one within 1e-12, and the strong-form derivative agrees with a
/// central difference of the frozen-terminal integral to 1e-6 — all in
/// under a second.
#[test]
fn criterion_06_kernel_property_suite() {
    let start = Instant::now();
    let orders = [0.3, 0.55, 0.8, 0.95];
    let horizons = [0.05, 0.2];
    let positions = [0.02, 0.1, 0.3, 0.5, 0.7, 0.9, 0.98];

    let mut max_linear = 0.0_f64;
    let mut max_norm = 0.0_f64;
    let mut max_quad = 0.0_f64;
    for &alpha in &orders {
        let op = FracOperator::new(alpha);
        for &l_f in &horizons {
            let params = FractionalParams::new(alpha, l_f).unwrap();
            for &x in &positions {
                let h = truncated_length_scales(x, 1.0, &params).unwrap();
                // Constants: the derivative of a flat field is exactly zero.
                assert_eq!(op.rc_derivative(|_| 0.0, &h, &[]), 0.0);
                // Linears: a constant gradient passes through unchanged.
                let slope = 2.75;
                max_linear = max_linear.max(rel_err(op.rc_derivative(|_| slope, &h, &[]), slope));
                // Kernel weights integrate the attenuation to one.
                let total: f64 = op.kernel_stations(&h, &[]).iter().map(|s| s.1).sum();
                max_norm = max_norm.max((total - 1.0).abs());
                // Symmetric quadratics: on an untruncated horizon the odd
                // part of the gradient cancels and s^2 maps to 2x.
                if h.l_a == l_f && h.l_b == l_f {
                    max_quad =
                        max_quad.max(rel_err(op.rc_derivative(|s| 2.0 * s, &h, &[]), 2.0 * x));
                }
            }
        }
    }

    // Differentiating the frozen-terminal integral of order 1 - alpha
    // recovers the strong-form derivative of order alpha.
    let mut max_ident = 0.0_f64;
    let g = |s: f64| (3.0 * s).sin() + s * s;
    let gp = |s: f64| 3.0 * (3.0 * s).cos() + 2.0 * s;
    for &alpha in &[0.4, 0.55, 0.7, 0.9] {
        let op = FracOperator::new(alpha);
        for h in [
            Horizon {
                x: 0.5,
                l_a: 0.15,
                l_b: 0.2,
            },
            Horizon {
                x: 0.3,
                l_a: 0.2,
                l_b: 0.1,
            },
        ] {
            let want = op.riesz_rl_derivative(g, gp, &h);
            let step = 1e-4;
            let wl = h.l_b.powf(alpha - 1.0);
            let wr = h.l_a.powf(alpha - 1.0);
            let plus = op.riesz_integral_about(&g, &h, h.x + step, wl, wr);
            let minus = op.riesz_integral_about(&g, &h, h.x - step, wl, wr);
            max_ident = max_ident.max(rel_err((plus - minus) / (2.0 * step), want));
        }
    }

    let elapsed = start.elapsed();
    println!(
        "criterion 06: linears {max_linear:.3e}, normalization {max_norm:.3e}, \
         symmetric quadratics {max_quad:.3e}, derivative/integral identity {max_ident:.3e}, \
         elapsed {elapsed:?}"
    );
    assert!(max_linear < 1e-10);
    assert!(max_norm < 1e-12);
    assert!(max_quad < 1e-8);
    assert!(max_ident < 1e-6);
    assert!(elapsed.as_secs_f64() < 1.0);
}

/// The analytic tangent matches a central-difference Jacobian of the
/// residual at five random states of the reference heated nonlinear
/// case: the worst relative column error stays below 1e-6.
#[test]
fn criterion_07_tangent_matches_difference_jacobian() {
    let spec = unit_beam(BoundaryCondition::Clamped, BoundaryCondition::Clamped);
    let sys = system(&spec, 0.8, 0.2, 40);
    let loads = LoadCase {
        axial: 0.0,
        transverse: 5.0e4,
        thermal: Some(ThermalField::Uniform { theta0: 10.0 }),
    };
    let n = sys.n_free();
    let mut worst = 0.0_f64;
    for seed in 1..=5u64 {
        let reduced = pseudo_random(seed, n, 1e-3);
        let full = sys.dofs.expand(&reduced);
        let k = sys.tangent(&full, &loads, StrainMode::VonKarman);
        for j in 0..n {
            let h = 1e-7 * (1.0 + reduced[j].abs());
            let mut plus = reduced.clone();
            let mut minus = reduced.clone();
            plus[j] += h;
            minus[j] -= h;
            let rp = sys.residual(&sys.dofs.expand(&plus), &loads, StrainMode::VonKarman);
            let rm = sys.residual(&sys.dofs.expand(&minus), &loads, StrainMode::VonKarman);
            let fd = (rp - rm) / (2.0 * h);
            let col_norm = (0..n).map(|i| k.get(i, j).abs()).fold(0.0_f64, f64::max);
            let col_err = (0..n)
                .map(|i| (k.get(i, j) - fd[i]).abs())
                .fold(0.0_f64, f64::max);
            worst = worst.max(col_err / col_norm);
        }
    }
    println!("criterion 07: worst relative column error over 5 states = {worst:.3e}");
    assert!(worst < 1e-6);
}

/// Direct energy minimization on a tiny mesh reproduces the main solver:
/// energies agree to 1e-6 relative for a linear bending case and a
/// nonlinear small-load case.
#[test]
fn criterion_08_direct_minimization_agrees_with_solver() {
    let ss = unit_beam(BoundaryCondition::Pinned, BoundaryCondition::Pinned);
    let sys = system(&ss, 0.7, 0.2, 8);
    let loads = udtl(1.0e4);
    let direct = minimize_energy_direct(&sys, &loads, StrainMode::Linear).unwrap();
    let reference = solve_linear(&sys, &loads).unwrap();
    let e_ref = sys.potential_energy(&reference.full, &loads, StrainMode::Linear);
    let linear_gap = rel_err(direct.energy, e_ref);
    assert!(direct.converged);

    let cc = unit_beam(BoundaryCondition::Clamped, BoundaryCondition::Clamped);
    let sys = system(&cc, 0.7, 0.2, 8);
    let loads = udtl(2.0e3);
    let config = SolverConfig {
        mode: StrainMode::VonKarman,
        ..SolverConfig::default()
    };
    let direct = minimize_energy_direct(&sys, &loads, StrainMode::VonKarman).unwrap();
    let reference = newton_raphson(&sys, &loads, &config).unwrap();
    let e_ref = sys.potential_energy(&reference.full, &loads, StrainMode::VonKarman);
    let nonlinear_gap = rel_err(direct.energy, e_ref);
    assert!(direct.converged);

    println!(
        "criterion 08: relative energy gap, linear pinned case {linear_gap:.3e}, \
         nonlinear clamped case {nonlinear_gap:.3e}"
    );
    assert!(linear_gap < 1e-6);
    assert!(nonlinear_gap < 1e-6);
}

/// Deletes constrained rows and columns from a dense block, mapping
/// block indices to interleaved global dofs via `offset` within the
/// node and `per_node` entries per node.
fn reduce_block(
    block: &DMatrix<f64>,
    sys: &BeamSystem,
    per_node: usize,
    offset: usize,
) -> DMatrix<f64> {
    let keep: Vec<usize> = (0..block.nrows())
        .filter(|&i| {
            let g = 3 * (i / per_node) + offset + i % per_node;
            !sys.dofs.is_constrained(g)
        })
        .collect();
    DMatrix::from_fn(keep.len(), keep.len(), |i, j| block[(keep[i], keep[j])])
}

fn relative_asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

/// The reduced linear operator is symmetric (relative asymmetry below
/// 1e-10 on densely assembled blocks) and positive definite (Cholesky
/// succeeds) across orders, horizons, and support pairs.
#[test]
fn criterion_09_reduced_operator_is_symmetric_positive_definite() {
    let mut worst_asym = 0.0_f64;
    let mut checked = 0;
    for (left, right) in [
        (BoundaryCondition::Pinned, BoundaryCondition::Pinned),
        (BoundaryCondition::Clamped, BoundaryCondition::Clamped),
        (BoundaryCondition::Clamped, BoundaryCondition::Free),
    ] {
        let spec = unit_beam(left, right);
        for &alpha in &[0.6, 0.7, 0.8, 0.9, 1.0] {
            for &l_f in &[0.05, 0.2, 0.5] {
                let sys = system(&spec, alpha, l_f, 30);
                let (k11, k22) = assemble_linear(&sys.cache, &sys.mesh, &sys.spec);
                let membrane = reduce_block(&k11, &sys, 1, 0);
                let bending = reduce_block(&k22, &sys, 2, 1);
                worst_asym = worst_asym
                    .max(relative_asymmetry(&membrane))
                    .max(relative_asymmetry(&bending));
                sys.linear_stiffness().cholesky().unwrap_or_else(|e| {
                    panic!("not positive definite at alpha {alpha}, l_f {l_f}: {e}")
                });
                checked += 1;
            }
        }
    }
    println!("criterion 09: {checked} combinations, worst relative asymmetry {worst_asym:.3e}");
    assert!(checked == 45);
    assert!(worst_asym < 1e-10);
}

/// The free energy density splits into its stress and entropy halves:
/// W = sigma : eps / 2 - rho0 eta theta / 2 holds to 1e-12 relative on
/// 100 random strain/temperature states.
#[test]
fn criterion_10_free_energy_splits_into_stress_and_entropy_work() {
    let spec = unit_beam(BoundaryCondition::Pinned, BoundaryCondition::Pinned);
    let mut worst = 0.0_f64;
    for seed in 0..100u64 {
        let raw = pseudo_random(1000 + seed, 10, 2e-3);
        let a = Matrix3::from_fn(|i, j| raw[3 * i + j]);
        let strain = 0.5 * (a + a.transpose());
        let theta = 5.0e4 * raw[9];
        let w = helmholtz_density(&strain, theta, &spec);
        let sigma = isotropic_stress_3d(&strain, theta, &spec);
        let eta = entropy_density(&strain, theta, &spec);
        let stress_work = 0.5 * (sigma.component_mul(&strain)).sum();
        let entropy_work = 0.5 * spec.rho0 * eta * theta;
        let split = stress_work - entropy_work;
        let scale = w.abs().max(stress_work.abs()).max(entropy_work.abs());
        worst = worst.max((w - split).abs() / scale);
    }
    println!("criterion 10: worst relative split error over 100 states = {worst:.3e}");
    assert!(worst < 1e-12);
}

/// The Newton iteration on the reference heated nonlinear case contracts
/// quadratically — two consecutive iterations obey
/// r_next <= 10 r^2 from a contractive start — and at 1/100 of the
/// loads the nonlinear answer matches the linear one within 1%.
#[test]
fn criterion_11_newton_contracts_quadratically_and_linearizes() {
    let spec = unit_beam(BoundaryCondition::Clamped, BoundaryCondition::Clamped);
    let sys = system(&spec, 0.8, 0.2, 40);
    // Heating is held below the thermal buckling threshold: the
    // compressive membrane force it induces amplifies bending to FIRST
    // order in the load scale, an effect linear kinematics drops by
    // definition, so the small-load comparison below is only meaningful
    // while that amplification stays small.
    let loads = LoadCase {
        axial: 0.0,
        transverse: 5.0e4,
        thermal: Some(ThermalField::Uniform { theta0: 10.0 }),
    };
    // 1e-10 sits above the relative residual floor (~1.5e-12 here) set
    // by assembly roundoff; the floor is unreachable as a tolerance.
    let config = SolverConfig {
        tol_rel_residual: 1e-10,
        load_steps: 5,
        mode: StrainMode::VonKarman,
        ..SolverConfig::default()
    };
    let solution = newton_raphson(&sys, &loads, &config).unwrap();
    let mut witness = None;
    for norms in &solution.history {
        for k in 0..norms.len().saturating_sub(2) {
            let contractive = norms[k] < 1.0;
            let first = norms[k + 1] <= 10.0 * norms[k] * norms[k];
            let second = norms[k + 2] <= 10.0 * norms[k + 1] * norms[k + 1];
            if contractive && first && second {
                witness = Some((norms[k], norms[k + 1], norms[k + 2]));
            }
        }
    }
    let (r0, r1, r2) = witness.expect("no quadratically contracting triple in any load step");

    let small = loads.scaled(0.01);
    let nonlinear = newton_raphson(
        &sys,
        &small,
        &SolverConfig {
            mode: StrainMode::VonKarman,
            ..SolverConfig::default()
        },
    )
    .unwrap()
    .max_abs_w0();
    let linear = solve_linear(&sys, &small).unwrap().max_abs_w0();
    let gap = rel_err(nonlinear, linear);
    println!(
        "criterion 11: contracting residual triple {r0:.3e} -> {r1:.3e} -> {r2:.3e}; \
         small-load nonlinear vs linear gap {gap:.3e}"
    );
    assert!(gap < 1e-2);
}
