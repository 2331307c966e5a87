//! End-to-end runs of the built-in scenarios.

use cantilever_core::grid::QuadratureConfig;
use cantilever_core::presets::{run_power_family, run_ramp_saturation, PowerFamilyParams};

#[test]
fn ramp_saturation_full_run() {
    let out = run_ramp_saturation(256, &QuadratureConfig::default(), 1e-9, 300).unwrap();
    assert!(out.h2a.passed() && out.h2b.passed());
    // worked margins: about +0.0141 and +0.2
    assert!((out.h2a.margin - (4600.0 / 4536.0 - 1.0)).abs() < 1e-6);
    assert!((out.h2b.margin - 0.2).abs() < 1e-3);
    assert!(out.monotone.residual_sup < 1e-8);
    assert!(out.newton.residual_sup < 1e-11);
    assert!(out.solver_agreement_sup < 1e-7);
}

#[test]
fn ramp_minimizer_agrees_with_newton_solution() {
    use cantilever_core::solver;
    use cantilever_core::variational::{self, ShellSpec, ShellVariant};

    let spec =
        cantilever_core::nonlinearity::parse_spec(cantilever_core::presets::ramp_saturation_dsl())
            .unwrap();
    // the 4600-slope branch leaves an O(h^2) gap between the curvature
    // collocation and the node collocation; a fine grid keeps the
    // cross-check residual inside 10x the descent tolerance
    let grid = cantilever_core::grid::Grid::uniform(1024).unwrap();
    let q = QuadratureConfig {
        panels: 1024,
        ..QuadratureConfig::default()
    };
    let shell = ShellSpec {
        variant: ShellVariant::Energetic,
        r0: 1.0,
        r1: 37.0,
    };
    let starts = variational::default_starts(&grid, 5, 0).unwrap();
    let rep = variational::minimize_in_shell(&spec, &shell, &starts, 1e-6).unwrap();
    assert!(rep.converged, "pg {}", rep.projected_gradient_norm);
    assert!(rep.projected_gradient_norm < 1e-5);
    // interior minimizer: it solves the problem, so it matches the Newton
    // solution of the integral equation
    assert!(!rep.boundary_inner_active && !rep.boundary_outer_active);
    let start = solver::default_supersolution(&spec, &grid, &q).unwrap();
    let newton = solver::newton_solve(&spec, &start, 1e-11, 40, &q).unwrap();
    let u_min = variational::u_from_curvature(&rep.point);
    let dist = u_min.sup_distance(&newton.solution);
    assert!(dist < 1e-4, "sup distance {dist}");
    // critical points are solutions: small fixed-point residual
    let (res_sup, _) = solver::residual(&spec, &u_min, &q).unwrap();
    assert!(res_sup < 10.0 * 1e-6, "residual {res_sup}");
}

#[test]
fn power_family_two_candidates() {
    let params = PowerFamilyParams::default();
    let out = run_power_family(&params).unwrap();
    let b = out.chosen_b.expect("scan should find a workable scale");
    assert!(b > 2.0);
    assert!(out.energy_u0 < 0.5);
    assert!(out.energy_u1.unwrap() < 0.5);
    // ring level at r = 2 clears 1/2
    assert!(out.sphere_bound.unwrap() >= 0.5 - 1e-3);

    let min = out.minimizer.as_ref().unwrap();
    let pass = out.pass.as_ref().unwrap();
    assert!(
        min.projected_gradient_norm < 1e-5,
        "minimizer pg {}",
        min.projected_gradient_norm
    );
    assert!(
        pass.projected_gradient_norm < 1e-5,
        "pass pg {}",
        pass.projected_gradient_norm
    );
    assert!(min.energy < pass.energy);
    assert!(out.two_candidates);

    // both candidates are (numerically) solutions of the boundary value
    // problem: cross-check through the independent node-collocation
    // residual, which tolerates the O(h^2) gap between the two
    // discretizations
    use cantilever_core::nonlinearity::parse_spec;
    use cantilever_core::variational::{cone_membership, u_from_curvature, ConeVariant};
    let spec = parse_spec(&out.nonlinearity).unwrap();
    let q = QuadratureConfig::default();
    for (name, rep, tol) in [("minimizer", min, 1e-6), ("pass", pass, 2e-2)] {
        let u = u_from_curvature(&rep.point);
        let (res, _) = cantilever_core::solver::residual(&spec, &u, &q).unwrap();
        assert!(res < tol, "{name} residual {res}");
        let cone = cone_membership(&rep.point, ConeVariant::MSup);
        assert!(cone.convexity_ok, "{name} convexity");
        assert!(cone.harnack_ok, "{name} pointwise bound");
    }
}
