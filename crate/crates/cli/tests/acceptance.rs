//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test -p cantilever-cli --test acceptance -- --nocapture`
//! to see the lines; every tolerance is pinned here.

use std::process::Command;
use std::time::Instant;

use cantilever_core::eigen;
use cantilever_core::grid::{Grid, GridFunction, QuadratureConfig};
use cantilever_core::kernel::{self, Minorant};
use cantilever_core::nonlinearity::parse_spec;
use cantilever_core::presets::{run_power_family, PowerFamilyParams};
use cantilever_core::rng::SplitMix64;
use cantilever_core::solver::{self, Direction, SolveStatus};
use cantilever_core::variational::{self, CurvatureRepr, ShellSpec, ShellVariant};

const RAMP: &str = "[0,0.03): 4600*u ; [0.03,inf): 138";
const POWER: &str = "[0,1): 0.5*u^0.5 ; [1,5): 0.5*u^2 ; [5,inf): 0.5*((u-5)^0.5 + 25)";

fn verdict(name: &str, ok: bool, detail: &str) {
    println!(
        "criterion {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {name} failed: {detail}");
}

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn criterion_01_quadrature_golden_value() {
    let t0 = Instant::now();
    let v = kernel::integrate(
        |t| kernel::minorant(Minorant::M0, t).unwrap().powi(2),
        0.0,
        1.0,
        &cfg(),
    )
    .unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let err = (v - 1.0 / 4536.0).abs();
    verdict(
        "1 (quadrature golden value)",
        err < 1e-12 && elapsed < 0.1,
        &format!("error {err:.2e}, runtime {elapsed:.4}s"),
    );
}

#[test]
fn criterion_02_shell_certificates() {
    let spec = parse_spec(RAMP).unwrap();
    let mut margins: Vec<(f64, f64)> = Vec::new();
    let mut all_pass = true;
    let mut lhs_a0 = 0.0;
    let mut lhs_b0 = 0.0;
    for panels in [128usize, 256, 512] {
        let q = QuadratureConfig { panels, ..cfg() };
        let (a, b) = cantilever_core::certify::check_h2(&spec, 1.0, 37.0, &q).unwrap();
        all_pass &= a.passed() && b.passed();
        if panels == 256 {
            lhs_a0 = a.lhs;
            lhs_b0 = b.lhs;
        }
        margins.push((a.margin, b.margin));
    }
    let stable = margins
        .windows(2)
        .all(|w| (w[0].0 - w[1].0).abs() < 1e-6 && (w[0].1 - w[1].1).abs() < 1e-6);
    let lhs_ok = (lhs_a0 - 4600.0 / 4536.0).abs() < 1e-9 && (lhs_b0 - 36.8).abs() < 1e-3;
    let margin_ok =
        (margins[1].0 - 0.014109347442680739).abs() < 1e-9 && (margins[1].1 - 0.2).abs() < 1e-3;
    verdict(
        "2 (shell certificates)",
        all_pass && stable && lhs_ok && margin_ok,
        &format!(
            "lhs ({lhs_a0:.9}, {lhs_b0:.6}), margins ({:.6}, {:.6})",
            margins[1].0, margins[1].1
        ),
    );
}

#[test]
fn criterion_03_eigen_root_and_residual() {
    let beta = eigen::solve_beta(1e-13).unwrap();
    let four_digit = std::f64::consts::FRAC_PI_2 + 0.3042;
    let grid = Grid::uniform(256).unwrap();
    let pair = eigen::eigen_report(&grid).unwrap();
    let ok = (beta - 1.8751041).abs() < 1e-6
        && (beta - four_digit).abs() < 2e-4
        && pair.eigen_residual < 1e-8 * pair.phi.sup_norm();
    verdict(
        "3 (eigen root)",
        ok,
        &format!(
            "beta {beta:.8}, |beta - reference| {:.2e}, residual {:.2e}",
            (beta - four_digit).abs(),
            pair.eigen_residual
        ),
    );
}

#[test]
fn criterion_04_green_function_properties() {
    let mut sym = 0.0f64;
    let mut slack_lower = f64::INFINITY;
    let mut slack_upper = f64::INFINITY;
    for i in 0..=100 {
        for j in 0..=100 {
            let (t, s) = (i as f64 / 100.0, j as f64 / 100.0);
            let g = kernel::green(t, s).unwrap();
            let gt = kernel::green(s, t).unwrap();
            sym = sym.max((g - gt).abs());
            slack_lower = slack_lower.min(g - (3.0 - t) * t * t * s * s / 6.0);
            slack_upper = slack_upper.min(s * s / 2.0 - g);
        }
    }
    let grid = Grid::uniform(256).unwrap();
    let j1 = kernel::apply_j(|_| 1.0, &grid, &cfg()).unwrap();
    let j1_err = (j1.values()[256] - 0.125).abs();
    let ok = sym < 1e-15 && slack_lower >= -1e-15 && slack_upper >= -1e-15 && j1_err < 1e-10;
    verdict(
        "4 (kernel properties)",
        ok,
        &format!("symmetry {sym:.2e}, slacks ({slack_lower:.2e}, {slack_upper:.2e}), J1 error {j1_err:.2e}"),
    );
}

fn random_pl(grid: &Grid, rng: &mut SplitMix64, nondecreasing: bool) -> GridFunction {
    let n = grid.nodes().len();
    let mut vals = Vec::with_capacity(n);
    let mut acc = 0.0;
    for _ in 0..n {
        if nondecreasing {
            acc += rng.uniform(0.0, 0.1);
            vals.push(acc);
        } else {
            vals.push(rng.uniform(0.0, 1.0));
        }
    }
    GridFunction::new(grid.clone(), vals).unwrap()
}

#[test]
fn criterion_05_harnack_suites() {
    let t0 = Instant::now();
    let grid = Grid::uniform(256).unwrap();
    let q = cfg();
    let mut rng = SplitMix64::new(5);
    let mut worst_m0 = f64::INFINITY;
    let mut worst_m = f64::INFINITY;
    let mut worst_r13 = f64::INFINITY;
    let mut worst_r14 = f64::INFINITY;

    // nondecreasing right-hand sides: the energetic-norm bound applies
    for _ in 0..200 {
        let v = random_pl(&grid, &mut rng, true);
        let u = kernel::apply_j_grid(&v, &q).unwrap();
        let norm = kernel::energetic_norm_of_pl_rhs(&v);
        for (i, &t) in grid.nodes().iter().enumerate() {
            let ui = u.values()[i];
            worst_m0 = worst_m0.min(ui - kernel::minorant(Minorant::M0, t).unwrap() * norm);
            worst_r14 = worst_r14.min(kernel::minorant(Minorant::M1, t).unwrap() * norm - ui);
        }
        worst_r13 = worst_r13.min(2.0 / 3.0 * norm - u.sup_norm());
    }
    // general nonnegative right-hand sides: the sup-norm bound applies
    for _ in 0..200 {
        let v = random_pl(&grid, &mut rng, false);
        let u = kernel::apply_j_grid(&v, &q).unwrap();
        let sup = u.sup_norm();
        let norm = kernel::energetic_norm_of_pl_rhs(&v);
        for (i, &t) in grid.nodes().iter().enumerate() {
            let ui = u.values()[i];
            worst_m = worst_m.min(ui - kernel::minorant(Minorant::M, t).unwrap() * sup);
            worst_r14 = worst_r14.min(kernel::minorant(Minorant::M1, t).unwrap() * norm - ui);
        }
        worst_r13 = worst_r13.min(2.0 / 3.0 * norm - sup);
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let ok = worst_m0 >= -1e-9 && worst_m >= -1e-9 && worst_r13 >= -1e-9 && worst_r14 >= -1e-9;
    verdict(
        "5 (pointwise bound suites)",
        ok && elapsed < 5.0,
        &format!(
            "worst slacks: M0 {worst_m0:.2e}, M {worst_m:.2e}, sup-bound {worst_r13:.2e}, M1 {worst_r14:.2e}; runtime {elapsed:.2}s"
        ),
    );
}

#[test]
fn criterion_06_gradient_consistency() {
    // fine grid: the node sampling of the gradient representative carries
    // an O(h^2) bias that the finite difference does not
    let grid = Grid::uniform(2048).unwrap();
    let specs = [parse_spec(POWER).unwrap(), parse_spec(RAMP).unwrap()];
    let mut rng = SplitMix64::new(6);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let spec = &specs[k % 2];
        let modes: Vec<f64> = (0..8).map(|_| rng.uniform(-0.5, 0.5)).collect();
        let dmodes: Vec<f64> = (0..8).map(|_| rng.uniform(-0.5, 0.5)).collect();
        let smooth = |coef: &[f64], floor: f64| {
            let coef = coef.to_vec();
            move |t: f64| {
                let mut v = floor;
                for (j, c) in coef.iter().enumerate() {
                    v += c * ((j + 1) as f64 * std::f64::consts::PI * t).cos() / (j + 1) as f64;
                }
                v.max(0.0)
            }
        };
        let w = CurvatureRepr::from_fn(grid.clone(), smooth(&modes, 0.9)).unwrap();
        let dw = CurvatureRepr::from_fn(grid.clone(), smooth(&dmodes, 0.7)).unwrap();
        let g = variational::energy_gradient(spec, &w).unwrap();
        let pair = g.inner(&dw);
        let h = 1e-5;
        let wp = CurvatureRepr::new(
            grid.clone(),
            w.samples()
                .iter()
                .zip(dw.samples())
                .map(|(a, b)| a + h * b)
                .collect(),
        )
        .unwrap();
        let wm = CurvatureRepr::new(
            grid.clone(),
            w.samples()
                .iter()
                .zip(dw.samples())
                .map(|(a, b)| a - h * b)
                .collect(),
        )
        .unwrap();
        let fd = (variational::energy(spec, &wp).unwrap()
            - variational::energy(spec, &wm).unwrap())
            / (2.0 * h);
        let rel = (pair - fd).abs() / pair.abs().max(fd.abs());
        worst = worst.max(rel);
    }
    verdict(
        "6 (gradient consistency)",
        worst < 1e-6,
        &format!("worst relative error {worst:.2e} over 50 pairs"),
    );
}

#[test]
fn criterion_07_solver_cross_validation() {
    let t0 = Instant::now();
    let spec = parse_spec(RAMP).unwrap();
    let grid = Grid::uniform(256).unwrap();
    let q = cfg();
    let start = solver::default_supersolution(&spec, &grid, &q).unwrap();
    let down = solver::monotone_iterate(&spec, &start, Direction::Down, 1e-10, 300, &q).unwrap();
    let newton = solver::newton_solve(&spec, &start, 1e-11, 40, &q).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let agree = down.solution.sup_distance(&newton.solution);
    let ok = down.status == SolveStatus::Converged
        && newton.status == SolveStatus::Converged
        && agree < 1e-7
        && down.residual_sup < 1e-8
        && newton.residual_sup < 1e-8
        && down.convex_ok
        && down.cone_m0_ok
        && down.cone_m_ok
        && elapsed < 10.0;
    verdict(
        "7 (solver cross-validation)",
        ok,
        &format!(
            "agreement {agree:.2e}, residuals ({:.2e}, {:.2e}), cone flags ({}, {}, {}), runtime {elapsed:.2}s",
            down.residual_sup,
            newton.residual_sup,
            down.convex_ok,
            down.cone_m0_ok,
            down.cone_m_ok
        ),
    );
}

#[test]
fn criterion_08_power_family_two_candidates() {
    let params = PowerFamilyParams::default();
    let out = run_power_family(&params).unwrap();
    let b = out.chosen_b;
    let min = out.minimizer.as_ref();
    let pass = out.pass.as_ref();
    let ok = b.is_some()
        && out.energy_u0 < 0.5
        && out.energy_u1.map(|e| e < 0.5).unwrap_or(false)
        && out.sphere_bound.map(|s| s >= 0.5 - 1e-3).unwrap_or(false)
        && min
            .map(|m| m.projected_gradient_norm < 1e-5)
            .unwrap_or(false)
        && pass
            .map(|p| p.projected_gradient_norm < 1e-5)
            .unwrap_or(false)
        && out.two_candidates;
    let detail = match (min, pass) {
        (Some(m), Some(p)) => format!(
            "b {:?}, E(u0) {:.4}, E(u1) {:.4}, sphere {:.4}, m-estimate {:.4e} (pg {:.1e}), c-estimate {:.4e} (pg {:.1e})",
            b,
            out.energy_u0,
            out.energy_u1.unwrap(),
            out.sphere_bound.unwrap(),
            m.energy,
            m.projected_gradient_norm,
            p.energy,
            p.projected_gradient_norm
        ),
        _ => "searches did not run".to_string(),
    };
    verdict("8 (two critical-point candidates)", ok, &detail);
}

#[test]
fn criterion_09_zero_nonlinearity_analytics() {
    let spec = parse_spec("[0,inf): 0").unwrap();
    let grid = Grid::uniform(256).unwrap();
    let shell = ShellSpec {
        variant: ShellVariant::Energetic,
        r0: 1.0,
        r1: 2.0,
    };
    let starts = variational::default_starts(&grid, 4, 0).unwrap();
    let min = variational::minimize_in_shell(&spec, &shell, &starts, 1e-6).unwrap();
    let sphere = variational::sphere_inf(&spec, &grid, 2.0, 4, 1e-7, 0).unwrap();
    let e_err = (min.energy - 0.5).abs();
    let s_err = (sphere.value - 2.0).abs();
    let ok = e_err < 1e-8 && min.boundary_inner_active && s_err < 1e-8 && sphere.heuristic;
    verdict(
        "9 (zero-nonlinearity analytics)",
        ok,
        &format!(
            "minimizer energy error {e_err:.2e} (inner boundary {}), sphere error {s_err:.2e}",
            min.boundary_inner_active
        ),
    );
}

#[test]
fn criterion_10_byte_identical_reruns() {
    let bin = env!("CARGO_BIN_EXE_cantilever");
    let base = std::env::temp_dir().join(format!("cantilever-determinism-{}", std::process::id()));
    let mut identical = true;
    let mut detail = String::new();
    for (name, args) in [
        ("certify", vec!["certify", "--example", "paper-3-3"]),
        ("eigen", vec!["eigen"]),
        ("solve", vec!["solve", "--example", "paper-3-3"]),
        ("scan", vec!["scan", "--example", "paper-3-3"]),
        ("reproduce", vec!["reproduce", "example-3-3"]),
        (
            "mountain-pass",
            vec!["mountain-pass", "--example", "paper-3-9"],
        ),
    ] {
        let mut artifacts: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
        for run in 0..2 {
            let dir = base.join(format!("{name}-{run}"));
            let _ = std::fs::remove_dir_all(&dir);
            let status = Command::new(bin)
                .args(&args)
                .arg("--out")
                .arg(&dir)
                .output()
                .expect("spawn binary");
            assert!(
                status.status.code() == Some(0),
                "{name} exited with {:?}",
                status.status.code()
            );
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
                .unwrap()
                .map(|e| {
                    let p = e.unwrap().path();
                    (
                        p.file_name().unwrap().to_string_lossy().into_owned(),
                        std::fs::read(&p).unwrap(),
                    )
                })
                .collect();
            files.sort();
            artifacts.push(files);
        }
        let same = artifacts[0] == artifacts[1];
        identical &= same;
        detail.push_str(&format!(
            "{name}: {}; ",
            if same { "identical" } else { "DIFFERS" }
        ));
    }
    let _ = std::fs::remove_dir_all(&base);
    verdict("10 (byte-identical reruns)", identical, detail.trim_end());
}
