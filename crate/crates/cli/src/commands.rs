//! Subcommand implementations. Each returns `Ok(true)` on full success,
//! `Ok(false)` for a mathematical failure (exit 1), and `Err` for hard
//! errors, which the caller maps to exit codes.

use serde::Serialize;

use cantilever_core::certify::{self, Certificate, FixedPointRegime, TheoremSummary};
use cantilever_core::eigen;
use cantilever_core::error::{Error, Result};
use cantilever_core::grid::{Grid, GridFunction};
use cantilever_core::kernel;
use cantilever_core::nonlinearity::{parse_spec, NonlinearitySpec};
use cantilever_core::presets::{self, PowerFamilyParams};
use cantilever_core::solver::{self, Direction, SolveStatus};
use cantilever_core::variational::{self, CurvatureRepr};

use crate::config::RunConfig;
use crate::output::Emitter;

fn load_spec(cfg: &RunConfig) -> Result<NonlinearitySpec> {
    parse_spec(cfg.dsl()?)
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CertifyOutput {
    nonlinearity: String,
    shell: crate::config::ShellSection,
    certificates: Vec<Certificate>,
    fixed_point_regime: Option<FixedPointRegime>,
    summaries: Vec<TheoremSummary>,
    notes: Vec<String>,
}

pub fn cmd_certify(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let spec = load_spec(cfg)?;
    let quad = cfg.quad();
    let grid = Grid::uniform(cfg.panels)?;
    let (r0, r1) = (cfg.shell.r0, cfg.shell.r1);
    let mut notes = Vec::new();
    let mut certificates = Vec::new();
    let mut summaries = Vec::new();
    let mut regime = None;

    let wants = |name: &str| cfg.certify.checks.iter().any(|c| c == name);

    let h1 = certify::check_h1(&spec, 64, Some(spec.probe_max().max(10.0 * r1)));
    let h1_ok = h1.passed();
    certificates.push(h1.clone());
    if !h1_ok {
        notes.push(
            "monotonicity evidence failed: the shell radius conditions presuppose it and were skipped"
                .into(),
        );
    }

    if h1_ok && wants("h2") {
        let (h2a, h2b) = certify::check_h2(&spec, r0, r1, &quad)?;
        summaries.push(certify::summarize("3.2", &[&h1, &h2a, &h2b]));
        certificates.push(h2a);
        certificates.push(h2b);
    }

    if h1_ok && wants("f2") {
        if spec.autonomous() {
            let (f2l, f2u) = certify::check_f2(&spec, cfg.certify.a, r0, r1)?;
            summaries.push(certify::summarize("3.3", &[&h1, &f2l, &f2u]));
            certificates.push(f2l);
            certificates.push(f2u);
        } else {
            notes.push("pointwise radius conditions skipped: nonlinearity depends on t".into());
        }
    }

    if wants("r0") {
        let alpha = cfg.certify.alpha.unwrap_or(r0);
        let beta = cfg.certify.beta.unwrap_or(r1);
        if alpha != beta {
            let (ra, rb, reg) = certify::check_r0(&spec, alpha, beta, &quad)?;
            summaries.push(certify::summarize("3.5", &[&ra, &rb]));
            certificates.push(ra);
            certificates.push(rb);
            regime = Some(reg);
        }
    }

    if wants("H1") {
        match certify::check_big_h1(&spec, r0, r1, &grid, &quad) {
            Ok((ha, hb)) => {
                summaries.push(certify::summarize("3.7", &[&ha, &hb]));
                notes.push(
                    "the pass-level gap condition is not numerically checkable; run \
                     mountain-pass for a c estimate"
                        .into(),
                );
                certificates.push(ha);
                certificates.push(hb);
            }
            Err(e @ (Error::Config(_) | Error::EmptyEnvelope { .. })) => {
                notes.push(format!("two-norm shell conditions skipped: {e}"));
            }
            Err(e) => return Err(e),
        }
    }

    let out = CertifyOutput {
        nonlinearity: spec.source().to_string(),
        shell: cfg.shell.clone(),
        certificates,
        fixed_point_regime: regime,
        summaries,
        notes,
    };
    em.json("certify", &out)?;

    let ok = h1_ok
        && out
            .certificates
            .iter()
            .filter(|c| !c.heuristic)
            .all(|c| c.passed());
    for c in &out.certificates {
        let label = serde_json::to_value(c.hypothesis)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        println!(
            "{label:12} lhs {:>14.6e}  rhs {:>14.6e}  margin {:>+11.3e}  {}{}",
            c.lhs,
            c.rhs,
            c.margin,
            if c.passed() { "PASS" } else { "FAIL" },
            if c.heuristic { " (heuristic)" } else { "" },
        );
    }
    Ok(ok)
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SolveError {
    error: String,
}

pub fn cmd_solve(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let spec = load_spec(cfg)?;
    let quad = cfg.quad();
    let grid = Grid::uniform(cfg.panels)?;
    let tol = cfg.solver.tol;
    let maxit = cfg.solver.max_iterations;

    let run = || -> Result<cantilever_core::solver::SolveReport> {
        match cfg.solver.method.as_str() {
            "picard" => {
                let zero = GridFunction::zero(grid.clone());
                solver::picard(&spec, &zero, tol, maxit, &quad)
            }
            "monotone-down" => {
                let start = solver::default_supersolution(&spec, &grid, &quad)?;
                solver::monotone_iterate(&spec, &start, Direction::Down, tol, maxit, &quad)
            }
            "monotone-up" => {
                let zero = GridFunction::zero(grid.clone());
                solver::monotone_iterate(&spec, &zero, Direction::Up, tol, maxit, &quad)
            }
            "newton" => {
                let start = solver::default_supersolution(&spec, &grid, &quad)?;
                solver::newton_solve(&spec, &start, tol, maxit, &quad)
            }
            other => Err(Error::Config(format!(
                "unknown solver method '{other}' (picard, monotone-up, monotone-down, newton)"
            ))),
        }
    };

    let report = match run() {
        Ok(r) => r,
        Err(e @ (Error::Config(_) | Error::Parse { .. })) => return Err(e),
        Err(e) => {
            em.json(
                "solve",
                &SolveError {
                    error: e.to_string(),
                },
            )?;
            println!("solver failed: {e}");
            return Ok(false);
        }
    };

    em.json("solve", &report)?;
    // profile: t, u, u'', f(t, u)
    let sys = solver::FixedPointSystem::new(&spec, &grid, &quad);
    let breaks = sys.crossings(&report.solution);
    let rhs = |s: f64| {
        cantilever_core::nonlinearity::eval_f(&spec, s, report.solution.interpolate(s))
            .unwrap_or(f64::NAN)
    };
    let w = kernel::curvature_profile(rhs, &grid, &quad, &breaks)?;
    let rows: Vec<Vec<f64>> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            vec![
                t,
                report.solution.values()[i],
                w.values()[i],
                cantilever_core::nonlinearity::eval_f(&spec, t, report.solution.values()[i])
                    .unwrap_or(f64::NAN),
            ]
        })
        .collect();
    em.csv("solve", &["t", "u", "u2", "f"], &rows)?;

    println!(
        "{:?} {:?}: {} iterations, residual_sup {:.3e}, norms (|u| {:.6}, L2 {:.6}, sup {:.6})",
        report.method,
        report.status,
        report.iterations,
        report.residual_sup,
        report.norm_energetic,
        report.norm_l2,
        report.norm_sup
    );
    if report.status == SolveStatus::StalledAtZero {
        println!("iterates stalled at the zero fixed point: not a positive solution");
    }
    Ok(report.status == SolveStatus::Converged)
}

// ---------------------------------------------------------------------------
// eigen
// ---------------------------------------------------------------------------

pub fn cmd_eigen(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let grid = Grid::uniform(cfg.panels)?;
    let pair = eigen::eigen_report(&grid)?;
    em.json("eigen", &pair)?;
    let rows: Vec<Vec<f64>> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            vec![
                t,
                pair.phi.values()[i],
                pair.derivatives[0].values()[i],
                pair.derivatives[1].values()[i],
            ]
        })
        .collect();
    em.csv("eigen", &["t", "phi1", "dphi1", "d2phi1"], &rows)?;
    println!(
        "beta {:.10} (four-digit reference {:.7}), lambda1 {:.10}, residual {:.3e}",
        pair.beta, pair.beta_reference_four_digits, pair.lambda1, pair.eigen_residual
    );
    Ok(true)
}

// ---------------------------------------------------------------------------
// minimize / mountain-pass
// ---------------------------------------------------------------------------

fn point_profile_rows(point: &CurvatureRepr) -> Vec<Vec<f64>> {
    let u = variational::u_from_curvature(point);
    point
        .grid()
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &t)| vec![t, u.values()[i], point.samples()[i]])
        .collect()
}

pub fn cmd_minimize(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let spec = load_spec(cfg)?;
    let grid = Grid::uniform(cfg.panels)?;
    let shell = cfg.shell_spec();
    let starts = variational::default_starts(&grid, cfg.minimize.starts, cfg.seed)?;
    let report = variational::minimize_in_shell(&spec, &shell, &starts, cfg.minimize.tol)?;
    em.json("minimize", &report)?;
    em.csv(
        "minimize",
        &["t", "u", "w"],
        &point_profile_rows(&report.point),
    )?;
    println!(
        "minimizer: energy {:.8e}, projected gradient {:.3e}, |u| {:.6}, converged {}",
        report.energy, report.projected_gradient_norm, report.norms.energetic, report.converged
    );
    Ok(report.converged)
}

/// Endpoints for the pass search: the normalized eigen-shape and its
/// sup-calibrated scaling.
fn eigen_endpoints(grid: &Grid, scale: f64) -> Result<(CurvatureRepr, CurvatureRepr)> {
    let eig = eigen::eigen_report(grid)?;
    let w0 = CurvatureRepr::new(
        grid.clone(),
        eig.derivatives[1]
            .values()
            .iter()
            .map(|v| v / eig.norm_energetic)
            .collect(),
    )?;
    let w0 = w0.scaled(1.0 / w0.energetic_norm());
    let sup0 = variational::norms(&w0).sup_of_u;
    let w1 = w0.scaled(scale / sup0);
    Ok((w0, w1))
}

pub fn cmd_mountain_pass(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let spec = load_spec(cfg)?;
    let grid = Grid::uniform(cfg.panels)?;
    let shell = cfg.shell_spec();
    let (w0, w1) = eigen_endpoints(&grid, cfg.mountain_pass.endpoint_scale)?;
    let report = variational::mountain_pass(
        &spec,
        &shell,
        &w0,
        &w1,
        cfg.mountain_pass.path_points,
        cfg.mountain_pass.tol,
    )?;
    em.json("mountain-pass", &report)?;
    if let Some(energies) = &report.path_energies {
        let rows: Vec<Vec<f64>> = energies
            .iter()
            .enumerate()
            .map(|(k, &e)| vec![k as f64, e])
            .collect();
        em.csv("mountain-pass-path", &["index", "energy"], &rows)?;
    }
    em.csv(
        "mountain-pass",
        &["t", "u", "w"],
        &point_profile_rows(&report.point),
    )?;
    println!(
        "pass candidate: energy {:.8e}, projected gradient {:.3e}, |u| {:.6}, converged {}",
        report.energy, report.projected_gradient_norm, report.norms.energetic, report.converged
    );
    Ok(report.converged)
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ScanOutput {
    nonlinearity: String,
    asymptotic: Option<certify::AsymptoticScan>,
    multiplicity: Option<certify::MultiplicityScan>,
    notes: Vec<String>,
}

pub fn cmd_scan(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let spec = load_spec(cfg)?;
    let quad = cfg.quad();
    let mut notes = Vec::new();

    let asymptotic = if spec.autonomous() {
        let n = cfg.scan.tau_points.max(2);
        let ratio = (cfg.scan.tau_max / cfg.scan.tau_min).powf(1.0 / (n - 1) as f64);
        let taus: Vec<f64> = (0..n)
            .map(|k| cfg.scan.tau_min * ratio.powi(k as i32))
            .collect();
        Some(certify::asymptotic_scan(&spec, cfg.scan.a, &taus)?)
    } else {
        notes.push("asymptotic scan skipped: nonlinearity depends on t".into());
        None
    };

    let multiplicity = if cfg.scan.pairs.is_empty() {
        None
    } else {
        Some(certify::multiplicity_scan(&spec, &cfg.scan.pairs, &quad)?)
    };

    if let Some(m) = &multiplicity {
        println!(
            "multiplicity: {} passing disjoint shells, {} solutions predicted ({} with pass geometry)",
            m.disjoint_chain.len(),
            m.solutions_predicted,
            m.solutions_predicted_with_geometry
        );
    }
    if let Some(a) = &asymptotic {
        let n_above = a.rows.iter().filter(|r| r.above_lower_threshold).count();
        let n_below = a.rows.iter().filter(|r| r.below_upper_threshold).count();
        println!(
            "asymptotic: {} of {} stations above the lower threshold, {} below 45/8",
            n_above,
            a.rows.len(),
            n_below
        );
    }
    let out = ScanOutput {
        nonlinearity: spec.source().to_string(),
        asymptotic,
        multiplicity,
        notes,
    };
    em.json("scan", &out)?;
    Ok(true)
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

pub fn cmd_reproduce(cfg: &RunConfig, which: &str, em: &mut Emitter) -> Result<bool> {
    match which {
        "example-3-3" => {
            let outcome = presets::run_ramp_saturation(
                cfg.panels,
                &cfg.quad(),
                cfg.solver.tol,
                cfg.solver.max_iterations,
            )?;
            em.json("reproduce-3-3", &outcome)?;
            let grid = outcome.monotone.solution.grid().clone();
            let rows: Vec<Vec<f64>> = grid
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, &t)| vec![t, outcome.monotone.solution.values()[i]])
                .collect();
            em.csv("reproduce-3-3", &["t", "u"], &rows)?;
            println!(
                "h2a margin {:+.6e}, h2b margin {:+.6e}; solver agreement {:.3e}",
                outcome.h2a.margin, outcome.h2b.margin, outcome.solver_agreement_sup
            );
            Ok(outcome.summary.certified
                && outcome.monotone.status == SolveStatus::Converged
                && outcome.newton.status == SolveStatus::Converged)
        }
        "example-3-9" => {
            let params = PowerFamilyParams {
                p: cfg.reproduce.p,
                a: cfg.reproduce.a,
                panels: cfg.panels,
                seed: cfg.seed,
                b_max: cfg.reproduce.b_max,
                path_points: cfg.mountain_pass.path_points,
                tol_minimize: cfg.minimize.tol,
                tol_pass: cfg.mountain_pass.tol,
                sphere_starts: cfg.minimize.starts,
            };
            let outcome = presets::run_power_family(&params)?;
            em.json("reproduce-3-9", &outcome)?;
            let rows: Vec<Vec<f64>> = outcome
                .scan
                .iter()
                .map(|r| vec![r.b, r.norm_u1, r.energy_u1])
                .collect();
            em.csv("reproduce-3-9-scan", &["b", "norm_u1", "energy_u1"], &rows)?;
            match outcome.chosen_b {
                None => {
                    println!(
                        "scan exhausted at b_max = {} without E(u1) < 1/2; table written",
                        params.b_max
                    );
                    Ok(false)
                }
                Some(b) => {
                    let min = outcome.minimizer.as_ref().unwrap();
                    let pass = outcome.pass.as_ref().unwrap();
                    if let Some(pe) = &pass.path_energies {
                        let rows: Vec<Vec<f64>> = pe
                            .iter()
                            .enumerate()
                            .map(|(k, &e)| vec![k as f64, e])
                            .collect();
                        em.csv("reproduce-3-9-path", &["index", "energy"], &rows)?;
                    }
                    println!(
                        "b {}: E(u0) {:.6}, E(u1) {:.6}, sphere bound {:.6}",
                        b,
                        outcome.energy_u0,
                        outcome.energy_u1.unwrap(),
                        outcome.sphere_bound.unwrap()
                    );
                    println!(
                        "minimizer energy {:.6e} (pg {:.2e}), pass energy {:.6e} (pg {:.2e})",
                        min.energy,
                        min.projected_gradient_norm,
                        pass.energy,
                        pass.projected_gradient_norm
                    );
                    Ok(outcome.two_candidates)
                }
            }
        }
        other => Err(Error::Config(format!(
            "unknown reproduction '{other}' (available: example-3-3, example-3-9)"
        ))),
    }
}
