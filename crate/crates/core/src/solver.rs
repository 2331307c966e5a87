//! Solvers for the integral form `u = J f(.,u)` of the boundary value
//! problem: plain fixed-point (Picard) iteration, monotone iteration from a
//! sub- or supersolution, and damped Newton collocation at the grid nodes.
//!
//! All three methods iterate the same discrete operator: the current iterate
//! is read as its piecewise-linear interpolant, `f` is composed with it, and
//! the integral operator is applied with quadrature split at the kernel kink
//! and at every abscissa where the interpolant crosses a breakpoint of `f`.
//! Fixed points therefore agree across methods to quadrature accuracy.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, QuadratureConfig};
use crate::kernel::{self, Minorant};
use crate::nonlinearity::NonlinearitySpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Picard,
    MonotoneUp,
    MonotoneDown,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    /// Iterates pinned at the zero function, which is always a fixed point
    /// when `f(t, 0) = 0` and is not a positive solution.
    StalledAtZero,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Up,
    Down,
}

/// Outcome of one solver run.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub method: SolveMethod,
    pub status: SolveStatus,
    pub solution: GridFunction,
    pub iterations: usize,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub norm_energetic: f64,
    pub norm_l2: f64,
    pub norm_sup: f64,
    pub cone_m0_ok: bool,
    pub cone_m_ok: bool,
    pub convex_ok: bool,
    /// Set when the local Lipschitz estimate of `f` times the operator norm
    /// bound 1/8 exceeds 1, i.e. plain iteration has no contraction
    /// guarantee.
    pub contraction_warning: bool,
    /// Per-iteration sup-norm residuals.
    pub trace: Vec<f64>,
}

/// The discretized fixed-point operator `u -> J f(., u)`.
pub struct FixedPointSystem<'a> {
    spec: &'a NonlinearitySpec,
    grid: &'a Grid,
    cfg: &'a QuadratureConfig,
}

impl<'a> FixedPointSystem<'a> {
    pub fn new(spec: &'a NonlinearitySpec, grid: &'a Grid, cfg: &'a QuadratureConfig) -> Self {
        Self { spec, grid, cfg }
    }

    /// Abscissae where the piecewise-linear iterate crosses a breakpoint of
    /// the nonlinearity; the composed integrand kinks exactly there.
    pub fn crossings(&self, u: &GridFunction) -> Vec<f64> {
        let mut out = Vec::new();
        let nodes = self.grid.nodes();
        let vals = u.values();
        for brk in self.spec.breakpoints() {
            for k in 0..self.grid.panels() {
                let (a, b) = (vals[k] - brk, vals[k + 1] - brk);
                if a == 0.0 || b == 0.0 {
                    continue; // node already a segment boundary
                }
                if a * b < 0.0 {
                    let lam = a / (a - b);
                    out.push(nodes[k] + lam * self.grid.spacing());
                }
            }
        }
        out
    }

    /// One application of the operator.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        let breaks = self.crossings(u);
        kernel::apply_j_with_breaks(
            |s| self.spec.eval_raw(s, u.interpolate(s)),
            self.grid,
            self.cfg,
            &breaks,
        )
    }

    /// Residual `u - J f(., u)` with its sup and L2 norms.
    pub fn residual(&self, u: &GridFunction) -> Result<(GridFunction, f64, f64)> {
        let ju = self.apply(u)?;
        let diff: Vec<f64> = u
            .values()
            .iter()
            .zip(ju.values())
            .map(|(a, b)| a - b)
            .collect();
        let r = GridFunction::new(self.grid.clone(), diff)?;
        let sup = r.sup_norm();
        let l2 = r.l2_norm();
        Ok((r, sup, l2))
    }

    /// Largest one-sided slope of `f` along the iterate, for the contraction
    /// warning.
    fn lipschitz_estimate(&self, u: &GridFunction) -> f64 {
        self.grid
            .nodes()
            .iter()
            .zip(u.values())
            .map(|(&t, &ui)| self.spec.dfdu_raw(t, ui).abs())
            .fold(0.0f64, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Dense LU with partial pivoting (the collocation Jacobian is small)
// ---------------------------------------------------------------------------

pub(crate) struct DenseLu {
    n: usize,
    a: Vec<f64>,
    piv: Vec<usize>,
    #[allow(dead_code)]
    pub condition_estimate: f64,
}

impl DenseLu {
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        let mut piv = vec![0usize; n];
        let mut max_pivot = 0.0f64;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].abs();
            for r in (k + 1)..n {
                let v = a[r * n + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            piv[k] = p;
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
            }
            let pivot = a[k * n + k];
            max_pivot = max_pivot.max(pivot.abs());
            min_pivot = min_pivot.min(pivot.abs());
            if pivot.abs() < 1e-300 {
                return Err(Error::SingularJacobian {
                    condition: f64::INFINITY,
                });
            }
            for r in (k + 1)..n {
                let m = a[r * n + k] / pivot;
                a[r * n + k] = m;
                for c in (k + 1)..n {
                    a[r * n + c] -= m * a[k * n + c];
                }
            }
        }
        let condition_estimate = max_pivot / min_pivot;
        if condition_estimate > 1e15 {
            return Err(Error::SingularJacobian {
                condition: condition_estimate,
            });
        }
        Ok(Self {
            n,
            a,
            piv,
            condition_estimate,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            for r in (k + 1)..n {
                x[r] -= self.a[r * n + k] * x[k];
            }
        }
        for k in (0..n).rev() {
            for c in (k + 1)..n {
                x[k] -= self.a[k * n + c] * x[c];
            }
            x[k] /= self.a[k * n + k];
        }
        x
    }
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

fn validate_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    Ok(())
}

/// Plain fixed-point iteration `u <- J f(., u)`.
pub fn picard(
    spec: &NonlinearitySpec,
    u0: &GridFunction,
    tol: f64,
    maxit: usize,
    cfg: &QuadratureConfig,
) -> Result<SolveReport> {
    validate_tol(tol)?;
    let sys = FixedPointSystem::new(spec, u0.grid(), cfg);
    let mut u = u0.clone();
    let mut trace = Vec::new();
    let mut lipschitz = sys.lipschitz_estimate(&u);
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0usize;
    loop {
        let next = sys.apply(&u)?;
        let res = u.sup_distance(&next);
        trace.push(res);
        if res < tol {
            status = SolveStatus::Converged;
            break;
        }
        u = next;
        iterations += 1;
        lipschitz = lipschitz.max(sys.lipschitz_estimate(&u));
        if diverging(&trace) {
            return Err(Error::Divergence { trace });
        }
        if iterations >= maxit {
            break;
        }
    }
    build_report(
        SolveMethod::Picard,
        status,
        spec,
        u,
        iterations,
        trace,
        lipschitz / 8.0 > 1.0,
        cfg,
    )
}

/// Residual grows for three consecutive iterations by more than a factor
/// of two.
fn diverging(trace: &[f64]) -> bool {
    if trace.len() < 4 {
        return false;
    }
    let t = &trace[trace.len() - 4..];
    t.windows(2).all(|w| w[1] > 2.0 * w[0])
}

/// Monotone iteration from a sub- (`Up`) or supersolution (`Down`). The
/// iterate sequence is node-wise ordered; a violation signals an invalid
/// start.
pub fn monotone_iterate(
    spec: &NonlinearitySpec,
    start: &GridFunction,
    direction: Direction,
    tol: f64,
    maxit: usize,
    cfg: &QuadratureConfig,
) -> Result<SolveReport> {
    validate_tol(tol)?;
    if !crate::nonlinearity::check_monotone(spec, 33).passed {
        return Err(Error::Precondition(
            "monotone iteration requires a nondecreasing nonlinearity".into(),
        ));
    }
    let sys = FixedPointSystem::new(spec, start.grid(), cfg);
    let method = match direction {
        Direction::Up => SolveMethod::MonotoneUp,
        Direction::Down => SolveMethod::MonotoneDown,
    };
    let role = match direction {
        Direction::Up => "subsolution",
        Direction::Down => "supersolution",
    };

    // start admissibility: J f(., start) on the correct side of start
    let first = sys.apply(start)?;
    check_ordered(start, &first, direction, 1e-12, role)?;

    let lipschitz = sys.lipschitz_estimate(start);
    let mut u = start.clone();
    let mut next = first;
    let mut trace = Vec::new();
    let mut tiny_run = 0usize;
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0usize;
    loop {
        let res = u.sup_distance(&next);
        trace.push(res);
        if u.sup_norm() < 1e-14 && next.sup_norm() < 1e-14 {
            tiny_run += 1;
            // pinned at the zero fixed point: not a positive solution
            if res < tol || tiny_run >= 3 {
                status = SolveStatus::StalledAtZero;
                break;
            }
        }
        if res < tol {
            status = SolveStatus::Converged;
            break;
        }
        u = next;
        iterations += 1;
        if iterations >= maxit {
            break;
        }
        next = sys.apply(&u)?;
        check_ordered(&u, &next, direction, 1e-10, role)?;
    }
    build_report(
        method,
        status,
        spec,
        u,
        iterations,
        trace,
        lipschitz / 8.0 > 1.0,
        cfg,
    )
}

fn check_ordered(
    u: &GridFunction,
    next: &GridFunction,
    direction: Direction,
    slack: f64,
    role: &'static str,
) -> Result<()> {
    for (i, (a, b)) in u.values().iter().zip(next.values()).enumerate() {
        let violation = match direction {
            Direction::Down => b - a, // next must not exceed current
            Direction::Up => a - b,
        };
        if violation > slack {
            return Err(Error::Ordering {
                node: i,
                amount: violation,
                role,
            });
        }
    }
    Ok(())
}

/// Damped Newton on the node collocation of `u - J f(., u) = 0`. The
/// Jacobian is assembled by quadrature of `G(t_i, s) f_u(s, u(s))` against
/// the piecewise-linear hat functions.
pub fn newton_solve(
    spec: &NonlinearitySpec,
    u0: &GridFunction,
    tol: f64,
    maxit: usize,
    cfg: &QuadratureConfig,
) -> Result<SolveReport> {
    validate_tol(tol)?;
    let grid = u0.grid();
    let n = grid.nodes().len();
    let sys = FixedPointSystem::new(spec, grid, cfg);
    let mut u = u0.clone();
    let (_, mut res_sup, _) = sys.residual(&u)?;
    let mut trace = vec![res_sup];
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = maxit;
    let lipschitz = sys.lipschitz_estimate(&u);

    for it in 0..maxit {
        if res_sup < tol {
            status = SolveStatus::Converged;
            iterations = it;
            break;
        }
        let jac = assemble_jacobian(spec, grid, cfg, &u);
        let lu = DenseLu::factor(jac, n)?;
        let (r, _, _) = sys.residual(&u)?;
        let step = lu.solve(r.values());

        // step halving on the sup-norm of the residual
        let mut alpha = 1.0f64;
        let mut accepted = None;
        while alpha > 1e-6 {
            let cand: Vec<f64> = u
                .values()
                .iter()
                .zip(&step)
                .map(|(x, d)| x - alpha * d)
                .collect();
            let cand = GridFunction::new(grid.clone(), cand)?;
            let (_, cand_res, _) = sys.residual(&cand)?;
            if cand_res <= (1.0 - 1e-4 * alpha) * res_sup {
                accepted = Some((cand, cand_res));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((cand, cand_res)) => {
                u = cand;
                res_sup = cand_res;
                trace.push(res_sup);
            }
            None => {
                return Err(Error::LineSearchFailure {
                    iteration: it,
                    residual: res_sup,
                    last_iterate: u.values().to_vec(),
                });
            }
        }
    }
    if res_sup < tol {
        status = SolveStatus::Converged;
    }
    build_report(
        SolveMethod::Newton,
        status,
        spec,
        u,
        iterations,
        trace,
        lipschitz / 8.0 > 1.0,
        cfg,
    )
}

/// `I - K` with `K_ij = integral of G(t_i, s) f_u(s, u(s)) hat_j(s) ds`,
/// row-major.
fn assemble_jacobian(
    spec: &NonlinearitySpec,
    grid: &Grid,
    cfg: &QuadratureConfig,
    u: &GridFunction,
) -> Vec<f64> {
    let n = grid.nodes().len();
    let sys = FixedPointSystem::new(spec, grid, cfg);
    let breaks = sys.crossings(u);
    let bounds = kernel::merged_boundaries(grid, &breaks);
    let sub = (cfg.panels / grid.panels()).max(1);
    let ps = kernel::PointSet::build(&bounds, sub, cfg.points_per_panel);

    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = 1.0;
    }
    let nodes = grid.nodes();
    let h = grid.spacing();
    for (q, &s) in ps.points.iter().enumerate() {
        let c = ps.weights[q] * spec.dfdu_raw(s, u.interpolate(s));
        if c == 0.0 {
            continue;
        }
        let k = grid.panel_of(s);
        let lam = (s - nodes[k]) / h;
        for i in 0..n {
            let g = kernel::green_raw(nodes[i], s);
            a[i * n + k] -= c * g * (1.0 - lam);
            a[i * n + k + 1] -= c * g * lam;
        }
    }
    a
}

/// Sup and L2 norms of `u - J f(., u)` over the nodes.
pub fn residual(
    spec: &NonlinearitySpec,
    u: &GridFunction,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let sys = FixedPointSystem::new(spec, u.grid(), cfg);
    let (_, sup, l2) = sys.residual(u)?;
    Ok((sup, l2))
}

/// `(sup of f over the probed range) * J(1)`: a supersolution whenever `f`
/// stays below that constant.
pub fn default_supersolution(
    spec: &NonlinearitySpec,
    grid: &Grid,
    cfg: &QuadratureConfig,
) -> Result<GridFunction> {
    let mut sup_f = 0.0f64;
    for i in 0..=64 {
        let t = i as f64 / 64.0;
        for j in 0..=256 {
            let u = spec.probe_max() * j as f64 / 256.0;
            sup_f = sup_f.max(spec.eval_raw(t, u));
        }
    }
    let j1 = kernel::apply_j(|_| 1.0, grid, cfg)?;
    GridFunction::new(
        grid.clone(),
        j1.values().iter().map(|v| sup_f * v).collect(),
    )
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    method: SolveMethod,
    status: SolveStatus,
    spec: &NonlinearitySpec,
    solution: GridFunction,
    iterations: usize,
    trace: Vec<f64>,
    contraction_warning: bool,
    cfg: &QuadratureConfig,
) -> Result<SolveReport> {
    let grid = solution.grid().clone();
    let sys = FixedPointSystem::new(spec, &grid, cfg);
    let (_, residual_sup, residual_l2) = sys.residual(&solution)?;
    let breaks = sys.crossings(&solution);
    let rhs = |s: f64| spec.eval_raw(s, solution.interpolate(s));

    // curvature of the associated J-image; for a converged solution this is
    // u'' itself
    let w = kernel::curvature_profile(rhs, &grid, cfg, &breaks)?;
    let norm_energetic = kernel::energetic_norm_of_rhs(rhs, cfg, &breaks)?;
    let norm_l2 = solution.l2_norm();
    let norm_sup = solution.sup_norm();

    let convex_ok = w.values().iter().all(|&x| x >= -1e-9);
    let cone_m0_ok = grid.nodes().iter().enumerate().all(|(i, &t)| {
        solution.values()[i] >= kernel::minorant_raw(Minorant::M0, t) * norm_energetic - 1e-6
    });
    let cone_m_ok = grid.nodes().iter().enumerate().all(|(i, &t)| {
        solution.values()[i] >= kernel::minorant_raw(Minorant::M, t) * norm_sup - 1e-6
    });

    Ok(SolveReport {
        method,
        status,
        solution,
        iterations,
        residual_sup,
        residual_l2,
        norm_energetic,
        norm_l2,
        norm_sup,
        cone_m0_ok,
        cone_m_ok,
        convex_ok,
        contraction_warning,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::parse_spec;

    const RAMP: &str = "[0,0.03): 4600*u ; [0.03,inf): 138";

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn quartic(t: f64) -> f64 {
        (t * t * t * t - 4.0 * t * t * t + 6.0 * t * t) / 24.0
    }

    #[test]
    fn picard_constant_one_converges_in_one_step() {
        let spec = parse_spec("[0,inf): 1").unwrap();
        let grid = Grid::uniform(128).unwrap();
        let u0 = GridFunction::zero(grid.clone());
        let rep = picard(&spec, &u0, 1e-12, 10, &cfg()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        assert_eq!(rep.iterations, 1);
        assert!((rep.solution.values()[128] - 0.125).abs() < 1e-12);
        assert!(!rep.contraction_warning);
    }

    #[test]
    fn picard_zero_spec_fixes_zero() {
        let spec = parse_spec("[0,inf): 0").unwrap();
        let grid = Grid::uniform(64).unwrap();
        let u0 = GridFunction::from_fn(grid, |t| t).unwrap();
        let rep = picard(&spec, &u0, 1e-12, 10, &cfg()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!(rep.solution.sup_norm() == 0.0);
    }

    #[test]
    fn monotone_down_from_supersolution() {
        let spec = parse_spec(RAMP).unwrap();
        let grid = Grid::uniform(128).unwrap();
        let start = default_supersolution(&spec, &grid, &cfg()).unwrap();
        // 138 * (J1)(1) = 17.25 at the tip
        assert!((start.values()[128] - 17.25).abs() < 1e-9);
        let rep = monotone_iterate(&spec, &start, Direction::Down, 1e-10, 200, &cfg()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!(rep.residual_sup < 1e-8);
        assert!(rep.norm_sup <= 138.0 / 8.0 + 1e-9);
        assert!(rep.norm_sup > 1.0);
        assert!(rep.convex_ok && rep.cone_m0_ok && rep.cone_m_ok);
        // supersolution iteration decreases monotonically
        for w in rep.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        // the steep ramp breaks the global contraction bound
        assert!(rep.contraction_warning);
    }

    #[test]
    fn monotone_up_from_zero_stalls_when_f_vanishes_at_zero() {
        let spec = parse_spec(RAMP).unwrap();
        let grid = Grid::uniform(64).unwrap();
        let zero = GridFunction::zero(grid);
        let rep = monotone_iterate(&spec, &zero, Direction::Up, 1e-10, 50, &cfg()).unwrap();
        assert_eq!(rep.status, SolveStatus::StalledAtZero);
    }

    #[test]
    fn monotone_up_constant_spec_converges_in_one_step() {
        let spec = parse_spec("[0,inf): 1").unwrap();
        let grid = Grid::uniform(64).unwrap();
        let zero = GridFunction::zero(grid);
        let rep = monotone_iterate(&spec, &zero, Direction::Up, 1e-12, 10, &cfg()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!((rep.solution.sup_norm() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn monotone_rejects_invalid_supersolution() {
        let spec = parse_spec("[0,inf): 1").unwrap();
        let grid = Grid::uniform(64).unwrap();
        let zero = GridFunction::zero(grid);
        // zero is a subsolution here, not a supersolution
        let err = monotone_iterate(&spec, &zero, Direction::Down, 1e-10, 10, &cfg());
        assert!(matches!(err, Err(Error::Ordering { .. })));
    }

    #[test]
    fn newton_solves_affine_problem_in_one_iteration() {
        let spec = parse_spec("[0,inf): 1").unwrap();
        let grid = Grid::uniform(128).unwrap();
        let u0 = GridFunction::zero(grid.clone());
        let rep = newton_solve(&spec, &u0, 1e-12, 10, &cfg()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!(rep.iterations <= 1);
        for (i, &t) in grid.nodes().iter().enumerate() {
            assert!((rep.solution.values()[i] - quartic(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn newton_zero_spec() {
        let spec = parse_spec("[0,inf): 0").unwrap();
        let grid = Grid::uniform(64).unwrap();
        let u0 = GridFunction::from_fn(grid, |t| 0.3 * t * t).unwrap();
        let rep = newton_solve(&spec, &u0, 1e-13, 10, &cfg()).unwrap();
        assert!(rep.solution.sup_norm() < 1e-12);
    }

    #[test]
    fn newton_confirms_monotone_solution() {
        let spec = parse_spec(RAMP).unwrap();
        let grid = Grid::uniform(128).unwrap();
        let start = default_supersolution(&spec, &grid, &cfg()).unwrap();
        let down = monotone_iterate(&spec, &start, Direction::Down, 1e-9, 200, &cfg()).unwrap();
        let newton = newton_solve(&spec, &down.solution, 1e-11, 20, &cfg()).unwrap();
        assert_eq!(newton.status, SolveStatus::Converged);
        assert!(newton.residual_sup < 1e-11);
        assert!(down.solution.sup_distance(&newton.solution) < 1e-7);
    }

    #[test]
    fn residual_of_exact_solution_is_tiny() {
        let spec = parse_spec("[0,inf): 1").unwrap();
        let grid = Grid::uniform(128).unwrap();
        let exact = GridFunction::from_fn(grid.clone(), quartic).unwrap();
        let (sup, l2) = residual(&spec, &exact, &cfg()).unwrap();
        assert!(sup < 1e-12 && l2 < 1e-12);

        let zero_spec = parse_spec("[0,inf): 0").unwrap();
        let zero = GridFunction::zero(grid.clone());
        assert_eq!(residual(&zero_spec, &zero, &cfg()).unwrap(), (0.0, 0.0));

        // J1 is not a fixed point of the ramp problem
        let ramp = parse_spec(RAMP).unwrap();
        let j1 = kernel::apply_j(|_| 1.0, &grid, &cfg()).unwrap();
        let (sup_r, _) = residual(&ramp, &j1, &cfg()).unwrap();
        assert!(sup_r > 1e-3);
    }

    #[test]
    fn picard_and_newton_agree_on_the_ramp() {
        let spec = parse_spec(RAMP).unwrap();
        let grid = Grid::uniform(128).unwrap();
        let start = default_supersolution(&spec, &grid, &cfg()).unwrap();
        let fixed = picard(&spec, &start, 1e-10, 100, &cfg()).unwrap();
        let newton = newton_solve(&spec, &start, 1e-11, 30, &cfg()).unwrap();
        assert_eq!(fixed.status, SolveStatus::Converged);
        assert!(fixed.solution.sup_distance(&newton.solution) < 1e-7);
    }

    #[test]
    fn picard_divergence_is_detected_with_trace() {
        // slope 40 against the operator bound 1/8: iterates grow by more
        // than a factor of two each step
        let spec = parse_spec("[0,inf): 40*u").unwrap();
        let grid = Grid::uniform(64).unwrap();
        let u0 = kernel::apply_j(|_| 1.0, &grid, &cfg()).unwrap();
        match picard(&spec, &u0, 1e-12, 50, &cfg()) {
            Err(Error::Divergence { trace }) => {
                assert!(trace.len() >= 4);
                let t = &trace[trace.len() - 4..];
                assert!(t.windows(2).all(|w| w[1] > 2.0 * w[0]));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn lu_factor_solves_small_system() {
        let a = vec![4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        let lu = DenseLu::factor(a, 3).unwrap();
        let x = lu.solve(&[1.0, 2.0, 3.0]);
        let r0 = 4.0 * x[0] + x[1] - 1.0;
        let r1 = x[0] + 3.0 * x[1] + x[2] - 2.0;
        let r2 = x[1] + 2.0 * x[2] - 3.0;
        assert!(r0.abs() < 1e-14 && r1.abs() < 1e-14 && r2.abs() < 1e-14);
    }

    #[test]
    fn lu_rejects_singular_matrix() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert!(matches!(
            DenseLu::factor(a, 2),
            Err(Error::SingularJacobian { .. })
        ));
    }

    #[test]
    fn converged_solutions_obey_harnack_bounds() {
        // u'''' = f >= 0 gives u >= M * sup(u); nondecreasing autonomous f
        // gives the M0 bound against the energetic norm
        let spec = parse_spec(RAMP).unwrap();
        let grid = Grid::uniform(128).unwrap();
        let start = default_supersolution(&spec, &grid, &cfg()).unwrap();
        let rep = monotone_iterate(&spec, &start, Direction::Down, 1e-10, 200, &cfg()).unwrap();
        for (i, &t) in grid.nodes().iter().enumerate() {
            let u = rep.solution.values()[i];
            assert!(u >= kernel::minorant_raw(Minorant::M, t) * rep.norm_sup - 1e-6);
            assert!(u >= kernel::minorant_raw(Minorant::M0, t) * rep.norm_energetic - 1e-6);
        }
    }
}
