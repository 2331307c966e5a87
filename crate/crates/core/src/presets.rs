//! Built-in end-to-end scenarios: a ramp-saturation nonlinearity checked
//! against the energetic-shell radii (1, 37) and solved two ways, and a
//! power-growth family whose two critical points are located by shell
//! minimization plus a mountain-pass search after a scan for a workable
//! upper state.

use serde::Serialize;

use crate::certify::{self, Certificate, TheoremSummary};
use crate::error::{Error, Result};
use crate::grid::{Grid, QuadratureConfig};
use crate::kernel::{self, Minorant};
use crate::nonlinearity::{parse_spec, NonlinearitySpec};
use crate::solver::{self, Direction, SolveReport};
use crate::variational::{self, CriticalPointReport, CurvatureRepr, ShellSpec, ShellVariant};

/// Piecewise-linear ramp saturating at 138 above the knee 0.03.
pub fn ramp_saturation_dsl() -> &'static str {
    "[0,0.03): 4600*u ; [0.03,inf): 138"
}

/// Power-growth family: `p u^p` below 1, `p u^2` up to `b`, then shifted
/// root growth.
pub fn power_family_dsl(p: f64, b: f64) -> String {
    let b2 = b * b;
    format!("[0,1): {p}*u^{p} ; [1,{b}): {p}*u^2 ; [{b},inf): {p}*((u-{b})^{p} + {b2})")
}

// ---------------------------------------------------------------------------
// Ramp-saturation scenario
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct RampSaturationOutcome {
    pub nonlinearity: String,
    pub r0: f64,
    pub r1: f64,
    pub h1: Certificate,
    pub h2a: Certificate,
    pub h2b: Certificate,
    pub summary: TheoremSummary,
    pub monotone: SolveReport,
    pub newton: SolveReport,
    /// Max-node distance between the two solver answers.
    pub solver_agreement_sup: f64,
}

/// Certify the (1, 37) energetic shell for the ramp nonlinearity and solve
/// the problem by monotone iteration cross-checked with Newton.
pub fn run_ramp_saturation(
    panels: usize,
    cfg: &QuadratureConfig,
    solve_tol: f64,
    maxit: usize,
) -> Result<RampSaturationOutcome> {
    let spec = parse_spec(ramp_saturation_dsl())?;
    let grid = Grid::uniform(panels)?;
    let (r0, r1) = (1.0, 37.0);

    let h1 = certify::check_h1(&spec, 64, Some(spec.probe_max().max(10.0 * r1)));
    let (h2a, h2b) = certify::check_h2(&spec, r0, r1, cfg)?;
    let summary = certify::summarize("3.2", &[&h1, &h2a, &h2b]);

    let start = solver::default_supersolution(&spec, &grid, cfg)?;
    let monotone = solver::monotone_iterate(&spec, &start, Direction::Down, solve_tol, maxit, cfg)?;
    let newton = solver::newton_solve(
        &spec,
        &monotone.solution,
        (solve_tol * 1e-3).max(1e-12),
        30,
        cfg,
    )?;
    let solver_agreement_sup = monotone.solution.sup_distance(&newton.solution);

    Ok(RampSaturationOutcome {
        nonlinearity: spec.source().to_string(),
        r0,
        r1,
        h1,
        h2a,
        h2b,
        summary,
        monotone,
        newton,
        solver_agreement_sup,
    })
}

// ---------------------------------------------------------------------------
// Power-family scenario
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerFamilyParams {
    /// Exponent in (0, 1/2].
    pub p: f64,
    /// Station used by the pointwise radius conditions.
    pub a: f64,
    pub panels: usize,
    pub seed: u64,
    /// Scan cap for the upper-state scale.
    pub b_max: f64,
    pub path_points: usize,
    pub tol_minimize: f64,
    pub tol_pass: f64,
    pub sphere_starts: usize,
}

impl Default for PowerFamilyParams {
    fn default() -> Self {
        Self {
            p: 0.5,
            a: 0.75,
            panels: 256,
            seed: 0,
            b_max: 1e4,
            path_points: 17,
            tol_minimize: 1e-6,
            tol_pass: 1e-6,
            sphere_starts: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanRow {
    pub b: f64,
    pub norm_u1: f64,
    pub energy_u1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerFamilyOutcome {
    pub params: PowerFamilyParams,
    pub nonlinearity: String,
    /// Sup norm of the normalized eigen-shape `u0`.
    pub sup_u0: f64,
    pub energy_u0: f64,
    pub scan: Vec<ScanRow>,
    /// First scale with `E(u1) < 1/2`; absent when the scan cap is reached.
    pub chosen_b: Option<f64>,
    pub energy_u1: Option<f64>,
    pub shell: Option<ShellSpec>,
    pub f2_lower: Option<Certificate>,
    pub f2_upper: Option<Certificate>,
    pub h3: Option<Certificate>,
    pub sphere_bound: Option<f64>,
    pub minimizer: Option<CriticalPointReport>,
    pub pass: Option<CriticalPointReport>,
    pub summary: Option<TheoremSummary>,
    /// Whether two numerically distinct critical points were produced.
    pub two_candidates: bool,
}

/// Scan the upper-state scale until the pass geometry opens up, certify the
/// pointwise radius conditions, and run both critical-point searches.
pub fn run_power_family(params: &PowerFamilyParams) -> Result<PowerFamilyOutcome> {
    if !(params.p > 0.0) {
        return Err(Error::Precondition(
            "the exponent p must be positive: p = 0 makes f vanish identically and the \
             energy landscape degenerate (the sphere level equals the endpoint level)"
                .into(),
        ));
    }
    if params.p > 0.5 {
        return Err(Error::Config("the family is defined for p <= 1/2".into()));
    }
    let grid = Grid::uniform(params.panels)?;
    let eig = crate::eigen::eigen_report(&grid)?;

    // normalized eigen-shape in curvature form, rescaled so the sampled
    // energetic norm is exactly 1
    let w0_raw = CurvatureRepr::new(
        grid.clone(),
        eig.derivatives[1]
            .values()
            .iter()
            .map(|v| v / eig.norm_energetic)
            .collect(),
    )?;
    let w0 = w0_raw.scaled(1.0 / w0_raw.energetic_norm());
    let n0 = variational::norms(&w0);
    let sup_u0 = n0.sup_of_u;

    // scan b until the upper endpoint drops below the ring level 1/2
    let mut scan = Vec::new();
    let mut chosen: Option<(f64, NonlinearitySpec, CurvatureRepr, f64)> = None;
    let mut b = (2.0 * sup_u0 * 1.05).max(2.5);
    while b <= params.b_max {
        let spec_b = parse_spec(&power_family_dsl(params.p, b))?;
        let w1 = w0.scaled(b / sup_u0);
        let e1 = variational::energy(&spec_b, &w1)?;
        scan.push(ScanRow {
            b,
            norm_u1: b / sup_u0,
            energy_u1: e1,
        });
        if e1 < 0.5 && b / sup_u0 > 2.0 {
            chosen = Some((b, spec_b, w1, e1));
            break;
        }
        b *= 1.3;
    }

    let Some((b, spec, w1, e1)) = chosen else {
        // scan exhausted: report the table so the caller can show it
        let spec_probe = parse_spec(&power_family_dsl(params.p, 4.0))?;
        let e0 = variational::energy(&spec_probe, &w0)?;
        return Ok(PowerFamilyOutcome {
            params: *params,
            nonlinearity: power_family_dsl(params.p, 4.0),
            sup_u0,
            energy_u0: e0,
            scan,
            chosen_b: None,
            energy_u1: None,
            shell: None,
            f2_lower: None,
            f2_upper: None,
            h3: None,
            sphere_bound: None,
            minimizer: None,
            pass: None,
            summary: None,
            two_candidates: false,
        });
    };

    let e0 = variational::energy(&spec, &w0)?;

    // radii for the pointwise conditions: R0 from the steep-growth end,
    // R1 past both the upper state and the saturation cap
    let m0a = kernel::minorant_raw(Minorant::M0, params.a);
    let lower_threshold = 1.0 / ((1.0 - params.a) * m0a * m0a);
    // f(tau)/tau = p tau^(p-1) >= L  <=>  tau <= (p/L)^(1/(1-p))
    let tau_star = (params.p / lower_threshold).powf(1.0 / (1.0 - params.p)) * 0.99;
    let r0 = tau_star / m0a;
    let norm_u1 = b / sup_u0;
    let mut r1 = (norm_u1 * 1.01).max(1.5 * b);
    for _ in 0..200 {
        let margin = 15.0 / 4.0 - spec.eval_raw(0.0, 2.0 * r1 / 3.0) / r1;
        if margin > 1e-9 {
            break;
        }
        r1 *= 1.25;
    }
    let shell = ShellSpec {
        variant: ShellVariant::Energetic,
        r0,
        r1,
    };
    let (f2_lower, f2_upper) = certify::check_f2(&spec, params.a, r0, r1)?;

    // pass geometry across the ring |u| = 2
    let h3 = certify::check_h3(
        &spec,
        &shell,
        &w0,
        &w1,
        2.0,
        params.sphere_starts,
        params.tol_pass,
        params.seed,
    )?;
    let sphere_bound = h3.rhs;

    // critical point searches: small-radius starts aim at the minimizer
    let mut starts = vec![w0.scaled(0.02), w0.scaled(0.1), w0.scaled(0.5), w0.clone()];
    starts.extend(variational::default_starts(&grid, 3, params.seed)?);
    let minimizer = variational::minimize_in_shell(&spec, &shell, &starts, params.tol_minimize)?;
    let pass =
        variational::mountain_pass(&spec, &shell, &w0, &w1, params.path_points, params.tol_pass)?;

    let h1 = certify::check_h1(&spec, 64, Some(spec.probe_max().max(10.0 * r1)));
    let summary = certify::summarize("3.3", &[&h1, &f2_lower, &f2_upper, &h3]);
    let two_candidates = minimizer.converged
        && pass.converged
        && minimizer.energy < pass.energy
        && (pass.energy - minimizer.energy) > 1e-6;

    Ok(PowerFamilyOutcome {
        params: *params,
        nonlinearity: spec.source().to_string(),
        sup_u0,
        energy_u0: e0,
        scan,
        chosen_b: Some(b),
        energy_u1: Some(e1),
        shell: Some(shell),
        f2_lower: Some(f2_lower),
        f2_upper: Some(f2_upper),
        h3: Some(h3),
        sphere_bound: Some(sphere_bound),
        minimizer: Some(minimizer),
        pass: Some(pass),
        summary: Some(summary),
        two_candidates,
    })
}
