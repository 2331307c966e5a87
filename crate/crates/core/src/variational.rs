//! Energy functional, cone-and-shell constrained minimization, and a
//! discrete mountain-pass search, all in the curvature representation
//! `w = u''`.
//!
//! Working with `w` instead of `u` makes the convexity constraint a plain
//! box constraint (`w >= 0`), turns the energetic norm into the ordinary L2
//! norm of `w`, and makes the reconstruction
//! `u(t) = integral of (t-s) w(s) ds` exactly linear. Radial scaling of `w`
//! scales the energetic, L2, and sup norms of `u` by the same factor, which
//! is what the shell retraction relies on.

use serde::Serialize;

use crate::eigen;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::kernel::{self, Minorant};
use crate::nonlinearity::{self, NonlinearitySpec};
use crate::rng::SplitMix64;
use crate::solver::DenseLu;

/// A candidate state represented by samples of its second derivative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureRepr {
    grid: Grid,
    w: Vec<f64>,
}

impl CurvatureRepr {
    pub fn new(grid: Grid, w: Vec<f64>) -> Result<Self> {
        if w.len() != grid.nodes().len() {
            return Err(Error::Config(format!(
                "expected {} curvature samples, got {}",
                grid.nodes().len(),
                w.len()
            )));
        }
        if let Some(bad) = w.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite curvature sample {bad}")));
        }
        Ok(Self { grid, w })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let w = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid, w)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.w
    }

    pub fn scaled(&self, gamma: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            w: self.w.iter().map(|x| gamma * x).collect(),
        }
    }

    /// Exact L2 inner product of the piecewise-linear interpolants.
    pub fn inner(&self, other: &Self) -> f64 {
        pl_inner(&self.grid, &self.w, other.samples())
    }

    /// L2 norm of the interpolant, i.e. the energetic norm of `u`.
    pub fn energetic_norm(&self) -> f64 {
        pl_inner(&self.grid, &self.w, &self.w).max(0.0).sqrt()
    }
}

/// Exact L2 pairing of two piecewise-linear node-sample vectors.
fn pl_inner(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    let h = grid.spacing();
    let mut acc = 0.0;
    for k in 0..grid.panels() {
        let (a0, a1) = (a[k], a[k + 1]);
        let (b0, b1) = (b[k], b[k + 1]);
        acc += h / 6.0 * (2.0 * a0 * b0 + a0 * b1 + a1 * b0 + 2.0 * a1 * b1);
    }
    acc
}

fn l2_of(grid: &Grid, a: &[f64]) -> f64 {
    pl_inner(grid, a, a).max(0.0).sqrt()
}

// ---------------------------------------------------------------------------
// Reconstruction u from w
// ---------------------------------------------------------------------------

/// Cumulative moments of the interpolant of `w`, allowing O(1) evaluation of
/// `u(t) = integral of (t-s) w(s) ds = t * c0(t) - c1(t)`.
struct Reconstruction<'a> {
    grid: &'a Grid,
    w: &'a [f64],
    /// integral of w over [0, t_k]
    c0: Vec<f64>,
    /// integral of s*w over [0, t_k]
    c1: Vec<f64>,
}

impl<'a> Reconstruction<'a> {
    fn new(grid: &'a Grid, w: &'a [f64]) -> Self {
        let n = grid.panels();
        let h = grid.spacing();
        let mut c0 = vec![0.0; n + 1];
        let mut c1 = vec![0.0; n + 1];
        for k in 0..n {
            let (a, b) = (grid.node(k), grid.node(k + 1));
            let (wa, wb) = (w[k], w[k + 1]);
            let slope = (wb - wa) / h;
            c0[k + 1] = c0[k] + h * (wa + wb) / 2.0;
            c1[k + 1] = c1[k]
                + wa * (b * b - a * a) / 2.0
                + slope * ((b * b * b - a * a * a) / 3.0 - a * (b * b - a * a) / 2.0);
        }
        Self { grid, w, c0, c1 }
    }

    fn u_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let t = t.min(1.0);
        let k = self.grid.panel_of(t);
        let a = self.grid.node(k);
        let h = self.grid.spacing();
        let wa = self.w[k];
        let slope = (self.w[k + 1] - wa) / h;
        let part0 = (t - a) * (wa + wa + slope * (t - a)) / 2.0;
        let part1 = wa * (t * t - a * a) / 2.0
            + slope * ((t * t * t - a * a * a) / 3.0 - a * (t * t - a * a) / 2.0);
        t * (self.c0[k] + part0) - (self.c1[k] + part1)
    }

    fn u_nodes(&self) -> Vec<f64> {
        self.grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(k, &t)| t * self.c0[k] - self.c1[k])
            .collect()
    }
}

/// Reconstruct `u` at the grid nodes from its curvature
/// (`u(0) = u'(0) = 0` by construction).
pub fn u_from_curvature(w: &CurvatureRepr) -> GridFunction {
    let recon = Reconstruction::new(&w.grid, &w.w);
    GridFunction::new(w.grid.clone(), recon.u_nodes()).expect("finite samples")
}

/// Norm triple of a curvature candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    /// Energetic norm of u = L2 norm of w.
    pub energetic: f64,
    /// L2 norm of the reconstructed u.
    pub l2_of_u: f64,
    /// Sup norm of the reconstructed u (sampled).
    pub sup_of_u: f64,
}

/// Energetic, L2, and sup norms of the state described by `w`.
pub fn norms(w: &CurvatureRepr) -> Norms {
    norms_of(&w.grid, &w.w)
}

fn norms_of(grid: &Grid, w: &[f64]) -> Norms {
    let recon = Reconstruction::new(grid, w);
    let energetic = l2_of(grid, w);
    // u is piecewise cubic; 4-point Gauss per panel integrates u^2 exactly
    let (xs, ws) = kernel::gauss_legendre(4);
    let h = grid.spacing();
    let mut sq = 0.0;
    let mut sup = 0.0f64;
    for k in 0..grid.panels() {
        let mid = grid.node(k) + 0.5 * h;
        for (x, wt) in xs.iter().zip(&ws) {
            let u = recon.u_at(mid + 0.5 * h * x);
            sq += 0.5 * h * wt * u * u;
            sup = sup.max(u.abs());
        }
    }
    for &t in grid.nodes() {
        sup = sup.max(recon.u_at(t).abs());
    }
    Norms {
        energetic,
        l2_of_u: sq.max(0.0).sqrt(),
        sup_of_u: sup,
    }
}

// ---------------------------------------------------------------------------
// Energy and its gradient
// ---------------------------------------------------------------------------

/// Quadrature layout shared by the energy and gradient evaluators: grid
/// panels split where the reconstructed `u` crosses a breakpoint of `f`.
struct Landscape<'a> {
    spec: &'a NonlinearitySpec,
    grid: &'a Grid,
    points_per_panel: usize,
}

impl<'a> Landscape<'a> {
    fn new(spec: &'a NonlinearitySpec, grid: &'a Grid) -> Self {
        Self {
            spec,
            grid,
            points_per_panel: 8,
        }
    }

    /// Crossing abscissae of `u` against the breakpoints of `f`, located by
    /// bisection on each panel with a sign change.
    fn crossings(&self, recon: &Reconstruction) -> Vec<f64> {
        let mut out = Vec::new();
        let nodes = self.grid.nodes();
        for brk in self.spec.breakpoints() {
            for k in 0..self.grid.panels() {
                let fa = recon.u_at(nodes[k]) - brk;
                let fb = recon.u_at(nodes[k + 1]) - brk;
                if fa == 0.0 || fb == 0.0 || fa * fb > 0.0 {
                    continue;
                }
                let (mut a, mut b) = (nodes[k], nodes[k + 1]);
                let mut va = fa;
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    let vm = recon.u_at(mid) - brk;
                    if va * vm <= 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                        va = vm;
                    }
                }
                out.push(0.5 * (a + b));
            }
        }
        out
    }

    fn point_set(&self, recon: &Reconstruction) -> kernel::PointSet {
        let breaks = self.crossings(recon);
        let bounds = kernel::merged_boundaries(self.grid, &breaks);
        kernel::PointSet::build(&bounds, 1, self.points_per_panel)
    }

    /// `E(w) = 1/2 |w|^2 - integral of F(t, u(t))`.
    fn energy(&self, w: &[f64]) -> f64 {
        let recon = Reconstruction::new(self.grid, w);
        let ps = self.point_set(&recon);
        let mut f_term = 0.0;
        for (q, &t) in ps.points.iter().enumerate() {
            let u = recon.u_at(t);
            f_term += ps.weights[q]
                * nonlinearity::eval_f_antiderivative(self.spec, t, u).unwrap_or(f64::NAN);
        }
        0.5 * pl_inner(self.grid, w, w) - f_term
    }

    /// Pointwise gradient representative
    /// `g(t) = w(t) - integral over [t,1] of (s-t) f(s, u(s)) ds`
    /// sampled at the nodes; all nodes are segment boundaries of the layout,
    /// so the suffix quadrature is exact per segment.
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let recon = Reconstruction::new(self.grid, w);
        let ps = self.point_set(&recon);
        let fv: Vec<f64> = ps
            .points
            .iter()
            .map(|&t| self.spec.eval_raw(t, recon.u_at(t)))
            .collect();
        let r = kernel::curvature_on_points(&ps, &fv, self.grid.nodes());
        w.iter().zip(&r).map(|(wi, ri)| wi - ri).collect()
    }
}

/// Energy `E(u) = 1/2 |u|^2 - integral of F(t, u(t)) dt` of the state
/// described by `w`.
pub fn energy(spec: &NonlinearitySpec, w: &CurvatureRepr) -> Result<f64> {
    let v = Landscape::new(spec, &w.grid).energy(&w.w);
    if !v.is_finite() {
        return Err(Error::Precondition(
            "energy evaluated to a non-finite value".into(),
        ));
    }
    Ok(v)
}

/// Node-wise gradient representative of the energy in curvature space. A
/// zero gradient means `w` is the curvature of a solution of the boundary
/// value problem.
pub fn energy_gradient(spec: &NonlinearitySpec, w: &CurvatureRepr) -> Result<CurvatureRepr> {
    let g = Landscape::new(spec, &w.grid).gradient(&w.w);
    CurvatureRepr::new(w.grid.clone(), g)
}

// ---------------------------------------------------------------------------
// Cones and shells
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeVariant {
    /// convex and `u(t) >= M0(t) |u|` (energetic norm)
    M0Energetic,
    /// `u(t) >= M(t) sup(u)`
    MSup,
    /// `u(t) >= M(t) ||u||_L2`
    ML2,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeReport {
    pub variant: ConeVariant,
    pub convexity_ok: bool,
    pub min_curvature: f64,
    pub harnack_ok: bool,
    /// Node index with the least slack `u - M * norm`.
    pub worst_node: usize,
    pub worst_slack: f64,
}

/// Check convexity and the selected Harnack bound node-wise.
pub fn cone_membership(w: &CurvatureRepr, variant: ConeVariant) -> ConeReport {
    let min_curvature = w.w.iter().cloned().fold(f64::INFINITY, f64::min);
    let nm = norms(w);
    let u = u_from_curvature(w);
    let (kind, level) = match variant {
        ConeVariant::M0Energetic => (Minorant::M0, nm.energetic),
        ConeVariant::MSup => (Minorant::M, nm.sup_of_u),
        ConeVariant::ML2 => (Minorant::M, nm.l2_of_u),
    };
    let mut worst_node = 0;
    let mut worst_slack = f64::INFINITY;
    for (i, &t) in w.grid.nodes().iter().enumerate() {
        let slack = u.values()[i] - kernel::minorant_raw(kind, t) * level;
        if slack < worst_slack {
            worst_slack = slack;
            worst_node = i;
        }
    }
    ConeReport {
        variant,
        convexity_ok: min_curvature >= -1e-9,
        min_curvature,
        harnack_ok: worst_slack >= -1e-9,
        worst_node,
        worst_slack,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellVariant {
    /// `R0 <= |u| <= R1` (energetic norm on both sides)
    Energetic,
    /// `||u||_L2 >= R0` and `|u| <= R1`
    TwoNorm,
}

/// Which norm pair defines the conical shell, with radii `R0 < R1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct ShellSpec {
    pub variant: ShellVariant,
    pub r0: f64,
    pub r1: f64,
}

impl ShellSpec {
    /// Admissibility of the radii. The two-norm variant needs the L2 norm of
    /// the energetically normalized eigenfunction (`r0 < ||phi|| r1`).
    pub fn validate(&self, phi_l2_norm: Option<f64>) -> Result<()> {
        if !(self.r0 > 0.0) {
            return Err(Error::Config("shell needs r0 > 0".into()));
        }
        match self.variant {
            ShellVariant::Energetic => {
                if !(self.r0 < self.r1) {
                    return Err(Error::Config("energetic shell needs r0 < r1".into()));
                }
            }
            ShellVariant::TwoNorm => {
                let p = phi_l2_norm.ok_or_else(|| {
                    Error::Config("two-norm shell validation needs the eigenfunction norm".into())
                })?;
                if !(self.r0 < p * self.r1) {
                    return Err(Error::Config(format!("two-norm shell needs r0 < {p} * r1")));
                }
            }
        }
        Ok(())
    }

    fn contains(&self, n: &Norms, slack: f64) -> bool {
        match self.variant {
            ShellVariant::Energetic => {
                n.energetic >= self.r0 - slack && n.energetic <= self.r1 + slack
            }
            ShellVariant::TwoNorm => n.l2_of_u >= self.r0 - slack && n.energetic <= self.r1 + slack,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalPointKind {
    Minimizer,
    MountainPass,
}

/// Converged (or best-effort) critical point candidate.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalPointReport {
    pub kind: CriticalPointKind,
    pub point: CurvatureRepr,
    pub energy: f64,
    pub projected_gradient_norm: f64,
    /// Estimate of the extremal level (`m` for minimizers, `c` for passes).
    pub estimate_m_or_c: f64,
    pub norms: Norms,
    pub boundary_inner_active: bool,
    pub boundary_outer_active: bool,
    pub converged: bool,
    pub iterations: usize,
    /// Final polyline (mountain pass only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<CurvatureRepr>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path_energies: Option<Vec<f64>>,
    /// Membership of the two endpoints in one connected component of the
    /// shell is assumed, not verified.
    pub connectedness_verified: bool,
}

// ---------------------------------------------------------------------------
// Projected descent
// ---------------------------------------------------------------------------

enum Constraint<'a> {
    Shell(&'a ShellSpec),
    Sphere(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RunEnd {
    Converged,
    Stagnated,
    IterationCap,
}

struct Descent<'a> {
    land: Landscape<'a>,
    constraint: Constraint<'a>,
}

impl<'a> Descent<'a> {
    fn grid(&self) -> &Grid {
        self.land.grid
    }

    fn clip(w: &mut [f64]) {
        for x in w.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
    }

    /// Radial retraction into the constraint set after clipping to the
    /// nonnegative box. Scaling `w` by `gamma` scales every norm of `u` by
    /// `gamma`, so one scalar fixes a violated norm bound.
    fn retract(&self, w: &mut [f64]) -> Result<bool> {
        Self::clip(w);
        let n = norms_of(self.grid(), w);
        if n.energetic <= 0.0 {
            return Err(Error::InfeasibleShell);
        }
        match &self.constraint {
            Constraint::Sphere(r) => {
                let gamma = r / n.energetic;
                for x in w.iter_mut() {
                    *x *= gamma;
                }
                Ok(true)
            }
            Constraint::Shell(shell) => match shell.variant {
                ShellVariant::Energetic => {
                    let gamma = if n.energetic < shell.r0 {
                        shell.r0 / n.energetic
                    } else if n.energetic > shell.r1 {
                        shell.r1 / n.energetic
                    } else {
                        1.0
                    };
                    if gamma != 1.0 {
                        for x in w.iter_mut() {
                            *x *= gamma;
                        }
                    }
                    Ok(true)
                }
                ShellVariant::TwoNorm => {
                    // scale down if the energetic cap is violated, then lift
                    // the L2 floor if that fits under the cap
                    let mut feasible = true;
                    let mut gamma = 1.0;
                    if n.energetic > shell.r1 {
                        gamma = shell.r1 / n.energetic;
                    }
                    let l2_after = n.l2_of_u * gamma;
                    if l2_after < shell.r0 {
                        let lift = shell.r0 / l2_after;
                        if n.energetic * gamma * lift <= shell.r1 * (1.0 + 1e-12) {
                            gamma *= lift;
                        } else {
                            feasible = false;
                        }
                    }
                    if gamma != 1.0 {
                        for x in w.iter_mut() {
                            *x *= gamma;
                        }
                    }
                    Ok(feasible)
                }
            },
        }
    }

    /// Remove the gradient components the projection would block:
    /// box-active nodes, and the radial direction when a norm constraint is
    /// active against the step.
    fn project_gradient(&self, w: &[f64], g: &[f64]) -> Vec<f64> {
        let mut pg: Vec<f64> = g
            .iter()
            .zip(w)
            .map(|(&gi, &wi)| if wi <= 0.0 && gi > 0.0 { 0.0 } else { gi })
            .collect();
        let wnorm2 = pl_inner(self.grid(), w, w);
        if wnorm2 <= 0.0 {
            return pg;
        }
        let radial = pl_inner(self.grid(), &pg, w);
        let remove_radial = match &self.constraint {
            Constraint::Sphere(_) => true,
            Constraint::Shell(shell) => {
                let n = norms_of(self.grid(), w);
                let tol = 1e-9;
                let inner_active = match shell.variant {
                    ShellVariant::Energetic => n.energetic <= shell.r0 * (1.0 + tol),
                    ShellVariant::TwoNorm => n.l2_of_u <= shell.r0 * (1.0 + tol),
                };
                let outer_active = n.energetic >= shell.r1 * (1.0 - tol);
                (inner_active && radial > 0.0) || (outer_active && radial < 0.0)
            }
        };
        if remove_radial {
            let coef = radial / wnorm2;
            for (p, &wi) in pg.iter_mut().zip(w) {
                *p -= coef * wi;
            }
        }
        pg
    }

    /// One projected line-searched step. Armijo decrease on the energy is
    /// tried first; if backtracking exhausts, a step contracting the
    /// projected gradient norm is accepted instead (fixed-point regime close
    /// to a critical point, where the sampled direction stops being a
    /// reliable energy descent direction).
    fn step(
        &self,
        w: &[f64],
        e0: f64,
        pg: &[f64],
        pg_norm: f64,
    ) -> Result<Option<(Vec<f64>, f64)>> {
        let mut eta = 1.0f64;
        while eta > 1e-9 {
            let mut cand: Vec<f64> = w.iter().zip(pg).map(|(x, d)| x - eta * d).collect();
            if self.retract(&mut cand).is_ok() {
                let e1 = self.land.energy(&cand);
                if e1 <= e0 - 1e-4 * eta * pg_norm * pg_norm {
                    return Ok(Some((cand, e1)));
                }
            }
            eta *= 0.5;
        }
        let mut eta = 1.0f64;
        while eta > 1e-9 {
            let mut cand: Vec<f64> = w.iter().zip(pg).map(|(x, d)| x - eta * d).collect();
            if self.retract(&mut cand).is_ok() {
                let g1 = self.land.gradient(&cand);
                let pg1 = self.project_gradient(&cand, &g1);
                if l2_of(self.grid(), &pg1) <= (1.0 - 1e-4 * eta) * pg_norm {
                    let e1 = self.land.energy(&cand);
                    return Ok(Some((cand, e1)));
                }
            }
            eta *= 0.5;
        }
        Ok(None)
    }

    /// Descent until the projected gradient norm drops below `tol`.
    fn run(&self, start: &[f64], tol: f64, maxit: usize) -> Result<(Vec<f64>, usize, RunEnd)> {
        let mut w = start.to_vec();
        self.retract(&mut w)?;
        let mut iterations = 0usize;
        loop {
            let g = self.land.gradient(&w);
            let pg = self.project_gradient(&w, &g);
            let pg_norm = l2_of(self.grid(), &pg);
            if pg_norm < tol {
                return Ok((w, iterations, RunEnd::Converged));
            }
            if iterations >= maxit {
                return Ok((w, iterations, RunEnd::IterationCap));
            }
            let e0 = self.land.energy(&w);
            match self.step(&w, e0, &pg, pg_norm)? {
                Some((next, _)) => {
                    w = next;
                    iterations += 1;
                }
                None => return Ok((w, iterations, RunEnd::Stagnated)),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Newton refinement of critical points
// ---------------------------------------------------------------------------

/// Mass `h_j` and centroid `c_j` of the hat function at node `j`; for
/// `t` beyond the support, `B_j(t) = integral of (t-s) hat_j = h_j (t-c_j)`.
fn hat_mass_centroid(grid: &Grid, j: usize) -> (f64, f64) {
    let h = grid.spacing();
    let n = grid.panels();
    if j == 0 {
        (h / 2.0, h / 3.0)
    } else if j == n {
        (h / 2.0, 1.0 - h / 3.0)
    } else {
        (h, grid.node(j))
    }
}

/// `B_j(t)` for `t` inside the support: exact 3-point Gauss on each
/// piecewise-quadratic sub-piece below `t`.
fn hat_b_inside(grid: &Grid, j: usize, t: f64) -> f64 {
    let h = grid.spacing();
    let n = grid.panels();
    let (xs, ws) = kernel::gauss_legendre(3);
    let mut acc = 0.0;
    let mut add_piece = |a: f64, b: f64, rising: bool| {
        let hi = b.min(t);
        if hi <= a {
            return;
        }
        let mid = 0.5 * (a + hi);
        let half = 0.5 * (hi - a);
        for (x, wt) in xs.iter().zip(&ws) {
            let s = mid + half * x;
            let hat = if rising { (s - a) / h } else { (b - s) / h };
            acc += half * wt * (t - s) * hat;
        }
    };
    if j > 0 {
        add_piece(grid.node(j - 1), grid.node(j), true);
    }
    if j < n {
        add_piece(grid.node(j), grid.node(j + 1), false);
    }
    acc
}

/// Jacobian `I - C` of the critical-point system `g(w) = 0`, with
/// `C_ij = integral over [t_i, 1] of (t - t_i) f_u(t, u(t)) B_j(t) dt`.
/// The part of `B_j` beyond the hat support is linear in `t` and summed via
/// suffix moments; the in-support remainder is added pointwise.
fn assemble_curvature_jacobian(land: &Landscape, w: &[f64]) -> Vec<f64> {
    let grid = land.grid;
    let nodes = grid.nodes();
    let nn = nodes.len();
    let recon = Reconstruction::new(grid, w);
    let ps = land.point_set(&recon);
    let fu: Vec<f64> = ps
        .points
        .iter()
        .map(|&t| land.spec.dfdu_raw(t, recon.u_at(t)))
        .collect();

    // suffix moments over quadrature points above each node boundary
    let mut p0 = vec![0.0; nn];
    let mut p1 = vec![0.0; nn];
    let mut p2 = vec![0.0; nn];
    {
        let mut q = ps.points.len();
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for m in (0..nn).rev() {
            while q > 0 && ps.points[q - 1] > nodes[m] {
                q -= 1;
                let c = ps.weights[q] * fu[q];
                let t = ps.points[q];
                s0 += c;
                s1 += c * t;
                s2 += c * t * t;
            }
            p0[m] = s0;
            p1[m] = s1;
            p2[m] = s2;
        }
    }

    let mut a = vec![0.0; nn * nn];
    for j in 0..nn {
        let (hj, cj) = hat_mass_centroid(grid, j);
        // tail: B_j(t) = hj (t - cj) for t >= node(j+1)
        if j + 1 < nn {
            for i in 0..nn {
                let ti = nodes[i];
                let m = (j + 1).max(i);
                a[i * nn + j] -= hj * (p2[m] - (ti + cj) * p1[m] + ti * cj * p0[m]);
            }
        }
        // in-support contribution
        let lo = if j == 0 { 0.0 } else { nodes[j - 1] };
        let hi = if j + 1 < nn { nodes[j + 1] } else { 1.0 };
        let start = ps.points.partition_point(|&t| t <= lo);
        for (q, &t) in ps.points.iter().enumerate().skip(start) {
            if t >= hi {
                break;
            }
            let c = ps.weights[q] * fu[q];
            if c == 0.0 {
                continue;
            }
            let bq = hat_b_inside(grid, j, t);
            for (i, &ti) in nodes.iter().enumerate() {
                if ti >= t {
                    break;
                }
                a[i * nn + j] -= c * (t - ti) * bq;
            }
        }
    }
    for i in 0..nn {
        a[i * nn + i] += 1.0;
    }
    a
}

/// Try to advance `w` along a candidate direction by backtracking on the
/// gradient norm. Returns the accepted state, gradient, and norm.
#[allow(clippy::type_complexity)]
fn try_direction(
    land: &Landscape,
    w: &[f64],
    gn: f64,
    step: &[f64],
) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let mut alpha = 1.0f64;
    while alpha > 1e-4 {
        let cand: Vec<f64> = w.iter().zip(step).map(|(x, d)| x - alpha * d).collect();
        let gc = land.gradient(&cand);
        let gcn = l2_of(land.grid, &gc);
        if gcn < (1.0 - 1e-4 * alpha) * gn {
            return Some((cand, gc, gcn));
        }
        alpha *= 0.5;
    }
    None
}

/// Damped Newton iteration on the critical-point system `g(w) = 0` in
/// curvature space, used to polish descent output. The raw Newton step is
/// length-capped; when its line search fails (near-singular Jacobian), a
/// Levenberg-Marquardt step on the normal equations takes over. Returns the
/// refined point and the L2 norm of its gradient.
fn newton_refine(
    land: &Landscape,
    start: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, f64)> {
    let grid = land.grid;
    let nn = grid.nodes().len();
    let mut w = start.to_vec();
    let mut g = land.gradient(&w);
    let mut gn = l2_of(grid, &g);
    for _ in 0..maxit {
        if gn < tol {
            break;
        }
        let a = assemble_curvature_jacobian(land, &w);
        let mut advanced = None;
        if let Ok(lu) = DenseLu::factor(a.clone(), nn) {
            let mut step = lu.solve(&g);
            // cap the step: near-singular Jacobians produce jumps far
            // outside the validity of the local model
            let cap = 5.0 * l2_of(grid, &w).max(1.0);
            let sn = l2_of(grid, &step);
            if sn > cap {
                let scale = cap / sn;
                for d in step.iter_mut() {
                    *d *= scale;
                }
            }
            advanced = try_direction(land, &w, gn, &step);
        }
        if advanced.is_none() {
            // normal-equations fallback: (J^T J + lambda diag) d = J^T g
            let mut jtj = vec![0.0; nn * nn];
            let mut jtg = vec![0.0; nn];
            for i in 0..nn {
                for j in 0..nn {
                    let mut acc = 0.0;
                    for k in 0..nn {
                        acc += a[k * nn + i] * a[k * nn + j];
                    }
                    jtj[i * nn + j] = acc;
                }
                jtg[i] = (0..nn).map(|k| a[k * nn + i] * g[k]).sum();
            }
            let diag_scale: f64 = (0..nn).map(|i| jtj[i * nn + i]).sum::<f64>() / nn as f64;
            let mut lambda = 1e-6 * diag_scale.max(1e-12);
            for _ in 0..8 {
                let mut m = jtj.clone();
                for i in 0..nn {
                    m[i * nn + i] += lambda;
                }
                if let Ok(lu) = DenseLu::factor(m, nn) {
                    let step = lu.solve(&jtg);
                    if let Some(acc) = try_direction(land, &w, gn, &step) {
                        advanced = Some(acc);
                        break;
                    }
                }
                lambda *= 10.0;
            }
        }
        match advanced {
            Some((cand, gc, gcn)) => {
                w = cand;
                g = gc;
                gn = gcn;
            }
            None => break,
        }
    }
    Ok((w, gn))
}

// ---------------------------------------------------------------------------
// Public searches
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn build_report(
    spec: &NonlinearitySpec,
    grid: &Grid,
    kind: CriticalPointKind,
    w: Vec<f64>,
    shell: &ShellSpec,
    tol: f64,
    iterations: usize,
    path: Option<Vec<CurvatureRepr>>,
    path_energies: Option<Vec<f64>>,
) -> Result<CriticalPointReport> {
    let point = CurvatureRepr::new(grid.clone(), w)?;
    let land = Landscape::new(spec, point.grid());
    let energy = land.energy(point.samples());
    let descent = Descent {
        land: Landscape::new(spec, point.grid()),
        constraint: Constraint::Shell(shell),
    };
    let g = descent.land.gradient(point.samples());
    let pg = descent.project_gradient(point.samples(), &g);
    let projected_gradient_norm = l2_of(point.grid(), &pg);
    let nm = norms(&point);
    let tolb = 1e-9;
    let (inner_active, outer_active) = match shell.variant {
        ShellVariant::Energetic => (
            (nm.energetic - shell.r0).abs() <= tolb * shell.r0.max(1.0),
            (nm.energetic - shell.r1).abs() <= tolb * shell.r1.max(1.0),
        ),
        ShellVariant::TwoNorm => (
            (nm.l2_of_u - shell.r0).abs() <= tolb * shell.r0.max(1.0),
            (nm.energetic - shell.r1).abs() <= tolb * shell.r1.max(1.0),
        ),
    };
    Ok(CriticalPointReport {
        kind,
        energy,
        projected_gradient_norm,
        estimate_m_or_c: energy,
        norms: nm,
        boundary_inner_active: inner_active,
        boundary_outer_active: outer_active,
        converged: projected_gradient_norm < tol,
        iterations,
        point,
        path,
        path_energies,
        connectedness_verified: false,
    })
}

fn shell_interior(shell: &ShellSpec, n: &Norms) -> bool {
    let margin = 1e-6;
    match shell.variant {
        ShellVariant::Energetic => {
            n.energetic > shell.r0 * (1.0 + margin) && n.energetic < shell.r1 * (1.0 - margin)
        }
        ShellVariant::TwoNorm => {
            n.l2_of_u > shell.r0 * (1.0 + margin) && n.energetic < shell.r1 * (1.0 - margin)
        }
    }
}

fn validate_shell(shell: &ShellSpec, grid: &Grid) -> Result<()> {
    match shell.variant {
        ShellVariant::Energetic => shell.validate(None),
        ShellVariant::TwoNorm => {
            let e = eigen::eigen_report(grid)?;
            shell.validate(Some(e.norm_l2_normalized))
        }
    }
}

fn pick_better(a: CriticalPointReport, b: CriticalPointReport) -> CriticalPointReport {
    match (a.converged, b.converged) {
        (true, false) => a,
        (false, true) => b,
        (true, true) => {
            if b.energy < a.energy {
                b
            } else {
                a
            }
        }
        (false, false) => {
            if b.projected_gradient_norm < a.projected_gradient_norm {
                b
            } else {
                a
            }
        }
    }
}

const DESCENT_CAP: usize = 10_000;
const DESCENT_PHASE: usize = 600;

/// Multi-start projected-gradient minimization of the energy over the
/// conical shell: gradient steps with nonnegativity clipping and radial
/// retraction, refined by Newton when the best point is interior. Returns
/// the lowest-energy converged report, or the closest-to-converged best
/// effort flagged as such.
pub fn minimize_in_shell(
    spec: &NonlinearitySpec,
    shell: &ShellSpec,
    starts: &[CurvatureRepr],
    tol: f64,
) -> Result<CriticalPointReport> {
    if starts.is_empty() {
        return Err(Error::Precondition("at least one start is required".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let grid = starts[0].grid().clone();
    validate_shell(shell, &grid)?;
    let land = Landscape::new(spec, &grid);
    let mut best: Option<CriticalPointReport> = None;
    let mut any_feasible = false;
    for start in starts {
        let descent = Descent {
            land: Landscape::new(spec, &grid),
            constraint: Constraint::Shell(shell),
        };
        let mut w = start.samples().to_vec();
        if descent.retract(&mut w).is_err() {
            continue;
        }
        any_feasible = true;
        let mut total_iterations = 0usize;
        loop {
            let (w2, it, end) = descent.run(&w, tol, DESCENT_PHASE)?;
            w = w2;
            total_iterations += it;

            // interior candidates: polish toward the exact critical point
            let nm = norms_of(&grid, &w);
            if shell_interior(shell, &nm) {
                if let Ok((wn, gn)) = newton_refine(&land, &w, (tol * 1e-3).max(1e-14), 25) {
                    if gn < tol && wn.iter().all(|x| *x >= -1e-9) {
                        let mut wn = wn;
                        Descent::clip(&mut wn);
                        let nm2 = norms_of(&grid, &wn);
                        if shell_interior(shell, &nm2) {
                            w = wn;
                            break;
                        }
                    }
                }
            }
            match end {
                RunEnd::Converged | RunEnd::Stagnated => break,
                RunEnd::IterationCap => {
                    if total_iterations >= DESCENT_CAP {
                        break;
                    }
                }
            }
        }
        let report = build_report(
            spec,
            &grid,
            CriticalPointKind::Minimizer,
            w,
            shell,
            tol,
            total_iterations,
            None,
            None,
        )?;
        best = Some(match best.take() {
            None => report,
            Some(cur) => pick_better(cur, report),
        });
    }
    if !any_feasible {
        return Err(Error::InfeasibleShell);
    }
    Ok(best.expect("at least one feasible start"))
}

/// Discrete mountain-pass search: relax a polyline between two shell states,
/// lowering the path maximum (highest-energy point first, reparametrized to
/// equal arclength after every sweep); the ridge crossing — the continuous
/// maximum over the final polyline, with the best node maximum seen as a
/// fallback — is polished by Newton toward the nearby critical point and
/// returned as the estimate of the pass level `c`.
pub fn mountain_pass(
    spec: &NonlinearitySpec,
    shell: &ShellSpec,
    w0: &CurvatureRepr,
    w1: &CurvatureRepr,
    path_points: usize,
    tol: f64,
) -> Result<CriticalPointReport> {
    let grid = w0.grid().clone();
    validate_shell(shell, &grid)?;
    let land = Landscape::new(spec, &grid);

    if w0 == w1 {
        let path = vec![w0.clone()];
        let energies = vec![land.energy(w0.samples())];
        return build_report(
            spec,
            &grid,
            CriticalPointKind::MountainPass,
            w0.samples().to_vec(),
            shell,
            tol,
            0,
            Some(path),
            Some(energies),
        );
    }
    if path_points < 8 {
        return Err(Error::Precondition("path needs at least 8 points".into()));
    }
    for (name, w) in [("w0", w0), ("w1", w1)] {
        let nm = norms(w);
        if !shell.contains(&nm, 1e-7 * (1.0 + shell.r1)) {
            return Err(Error::Precondition(format!(
                "endpoint {name} lies outside the shell"
            )));
        }
    }

    let descent = Descent {
        land: Landscape::new(spec, &grid),
        constraint: Constraint::Shell(shell),
    };

    // initial polyline: linear interpolation in w, retracted into the shell
    let m = path_points;
    let mut path: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            let lam = k as f64 / (m - 1) as f64;
            w0.samples()
                .iter()
                .zip(w1.samples())
                .map(|(a, b)| a * (1.0 - lam) + b * lam)
                .collect::<Vec<f64>>()
        })
        .collect();
    for p in path.iter_mut().take(m - 1).skip(1) {
        descent.retract(p)?;
    }

    let mut energies: Vec<f64> = path.iter().map(|p| land.energy(p)).collect();
    let mut best_max = f64::INFINITY;
    let mut best_point: Option<Vec<f64>> = None;
    let mut patience = 0usize;
    let mut sweeps = 0usize;
    const MAX_SWEEPS: usize = 300;
    const PATIENCE: usize = 30;

    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut order: Vec<usize> = (1..m - 1).collect();
        order.sort_by(|&a, &b| energies[b].partial_cmp(&energies[a]).unwrap());
        for &k in &order {
            let g = descent.land.gradient(&path[k]);
            let pg = descent.project_gradient(&path[k], &g);
            let pg_norm = l2_of(&grid, &pg);
            if pg_norm == 0.0 {
                continue;
            }
            if let Some((next, e1)) = descent.step(&path[k], energies[k], &pg, pg_norm)? {
                path[k] = next;
                energies[k] = e1;
            }
        }
        // string-method reparametrization: keeps the polyline from draining
        // wholesale into the basins
        redistribute(&grid, &mut path);
        for (k, p) in path.iter().enumerate() {
            energies[k] = land.energy(p);
        }
        let k_max = (0..m)
            .max_by(|&a, &b| energies[a].partial_cmp(&energies[b]).unwrap())
            .unwrap();
        let path_max = energies[k_max];
        if path_max < best_max - 1e-12 * best_max.abs().max(1.0) {
            best_max = path_max;
            best_point = Some(path[k_max].clone());
            patience = 0;
        } else {
            patience += 1;
            if patience >= PATIENCE {
                break;
            }
        }
    }

    // The ridge crossing usually falls inside a chord of the polyline, not
    // on a node; locate the continuous maximum over the chords before
    // polishing. The lowest node maximum seen during relaxation and the
    // final node maximum serve as fallback candidates.
    let k_max = (0..m)
        .max_by(|&a, &b| energies[a].partial_cmp(&energies[b]).unwrap())
        .unwrap();
    let mut chord_max: (f64, Vec<f64>) = (energies[k_max], path[k_max].clone());
    for k in 0..m - 1 {
        for j in 1..24 {
            let lam = j as f64 / 24.0;
            let w: Vec<f64> = path[k]
                .iter()
                .zip(&path[k + 1])
                .map(|(a, b)| a * (1.0 - lam) + b * lam)
                .collect();
            let e = land.energy(&w);
            if e > chord_max.0 {
                chord_max = (e, w);
            }
        }
    }

    let mut w_best = best_point.clone().unwrap_or_else(|| path[k_max].clone());
    let endpoint_level = energies[0].max(energies[m - 1]);
    let mut candidates: Vec<Vec<f64>> = vec![chord_max.1];
    if let Some(bp) = best_point {
        candidates.push(bp);
    }
    candidates.push(path[k_max].clone());
    for cand in candidates {
        if let Ok((wn, gn)) = newton_refine(&land, &cand, (tol * 1e-3).max(1e-14), 60) {
            if gn < tol && wn.iter().all(|x| *x >= -1e-9) {
                let mut wn = wn;
                Descent::clip(&mut wn);
                let nm = norms_of(&grid, &wn);
                let e_n = land.energy(&wn);
                if shell.contains(&nm, 1e-6 * (1.0 + shell.r1)) && e_n > endpoint_level {
                    w_best = wn;
                    break;
                }
            }
        }
    }

    let path_repr: Vec<CurvatureRepr> = path
        .into_iter()
        .map(|p| CurvatureRepr::new(grid.clone(), p))
        .collect::<Result<_>>()?;
    build_report(
        spec,
        &grid,
        CriticalPointKind::MountainPass,
        w_best,
        shell,
        tol,
        sweeps,
        Some(path_repr),
        Some(energies),
    )
}

/// Equal-arclength reparametrization of the polyline (L2 metric on w).
fn redistribute(grid: &Grid, path: &mut [Vec<f64>]) {
    let m = path.len();
    if m < 3 {
        return;
    }
    let mut cum = vec![0.0; m];
    for k in 1..m {
        let d: Vec<f64> = path[k]
            .iter()
            .zip(&path[k - 1])
            .map(|(a, b)| a - b)
            .collect();
        cum[k] = cum[k - 1] + l2_of(grid, &d);
    }
    let total = cum[m - 1];
    if total <= 0.0 {
        return;
    }
    let old = path.to_vec();
    for (k, slot) in path.iter_mut().enumerate().take(m - 1).skip(1) {
        let target = total * k as f64 / (m - 1) as f64;
        let mut seg = 1;
        while seg < m - 1 && cum[seg] < target {
            seg += 1;
        }
        let denom = (cum[seg] - cum[seg - 1]).max(1e-300);
        let lam = (target - cum[seg - 1]) / denom;
        *slot = old[seg - 1]
            .iter()
            .zip(&old[seg])
            .map(|(a, b)| a * (1.0 - lam) + b * lam)
            .collect();
    }
}

/// Heuristic multi-start estimate of `inf { E(u) : u in K, |u| = r }`,
/// enforced by rescaling each iterate to the sphere. The value is an upper
/// bound on the true infimum; the flag marks it as evidence, not proof.
#[derive(Debug, Clone, Serialize)]
pub struct SphereInfReport {
    pub value: f64,
    pub radius: f64,
    pub starts: usize,
    pub heuristic: bool,
    pub best: CurvatureRepr,
}

pub fn sphere_inf(
    spec: &NonlinearitySpec,
    grid: &Grid,
    r: f64,
    starts: usize,
    tol: f64,
    seed: u64,
) -> Result<SphereInfReport> {
    if !(r > 0.0) {
        return Err(Error::Precondition("sphere radius must be positive".into()));
    }
    let family = default_starts(grid, starts.max(1), seed)?;
    let mut best_val = f64::INFINITY;
    let mut best_w: Option<Vec<f64>> = None;
    for start in &family {
        let descent = Descent {
            land: Landscape::new(spec, grid),
            constraint: Constraint::Sphere(r),
        };
        let (w, _, _) = descent.run(start.samples(), tol, 4_000)?;
        let e = descent.land.energy(&w);
        if e < best_val {
            best_val = e;
            best_w = Some(w);
        }
    }
    Ok(SphereInfReport {
        value: best_val,
        radius: r,
        starts: family.len(),
        heuristic: true,
        best: CurvatureRepr::new(grid.clone(), best_w.expect("at least one start"))?,
    })
}

/// Damped-Newton refinement of a critical-point candidate in curvature
/// space, independent of any shell. Returns the refined point and the L2
/// norm of its gradient; convergence is local and indifferent to the index
/// of the critical point, so saddles are admissible targets.
pub fn refine_critical_point(
    spec: &NonlinearitySpec,
    w: &CurvatureRepr,
    tol: f64,
    maxit: usize,
) -> Result<(CurvatureRepr, f64)> {
    let land = Landscape::new(spec, w.grid());
    let (wn, gn) = newton_refine(&land, w.samples(), tol, maxit)?;
    Ok((CurvatureRepr::new(w.grid().clone(), wn)?, gn))
}

/// Deterministic start family: eigen-shape, constants, ramps, powers, and
/// seeded random smooth profiles. All entries are nonnegative; callers scale
/// or retract as needed.
pub fn default_starts(grid: &Grid, count: usize, seed: u64) -> Result<Vec<CurvatureRepr>> {
    let beta = eigen::solve_beta(1e-13)?;
    let mut out: Vec<CurvatureRepr> = Vec::with_capacity(count);
    let shapes: Vec<Box<dyn Fn(f64) -> f64>> = vec![
        Box::new(move |t| eigen::phi1(beta, t, 2).unwrap()),
        Box::new(|_| 1.0),
        Box::new(|t| 1.0 - t),
        Box::new(|t| (1.0 - t) * (1.0 - t)),
        Box::new(|t| 1.0 - t * t),
        Box::new(|t| 0.2 + (1.0 - t) * (1.0 - t) * (1.0 - t)),
    ];
    for shape in shapes.iter().take(count) {
        out.push(CurvatureRepr::from_fn(grid.clone(), shape)?);
    }
    let mut rng = SplitMix64::new(seed);
    while out.len() < count {
        // smooth random nonnegative profile from a few low-frequency modes
        let a0 = rng.uniform(0.2, 1.0);
        let a1 = rng.uniform(-0.5, 0.5);
        let a2 = rng.uniform(-0.3, 0.3);
        let a3 = rng.uniform(-0.2, 0.2);
        let w = CurvatureRepr::from_fn(grid.clone(), |t| {
            let v = a0
                + a1 * (std::f64::consts::PI * t).cos()
                + a2 * (2.0 * std::f64::consts::PI * t).cos()
                + a3 * (3.0 * std::f64::consts::PI * t).cos();
            v.max(0.0)
        })?;
        out.push(w);
    }
    Ok(out)
}
