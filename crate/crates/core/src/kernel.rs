//! Green's function of the clamped-free fourth-order operator, its pointwise
//! bounds, and composite Gauss-Legendre quadrature for the integral operator
//! `(Jv)(t) = integral of G(t,s) v(s) ds`.
//!
//! The kernel `G(t,·)` has a kink at `s = t`, and solver right-hand sides
//! carry kinks wherever a piecewise nonlinearity changes branch. Every
//! routine here therefore integrates over an explicit segment decomposition
//! whose boundaries include the grid nodes and any caller-supplied break
//! abscissae, which keeps the per-segment integrands smooth.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, QuadratureConfig};

/// The three explicit weight functions appearing in the pointwise bounds:
/// lower bounds `M0`, `M` and the upper bound `M1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Minorant {
    /// `sqrt(2) (1-t) t^3 / 6`
    M0,
    /// `(2/3) t^{3/2}`
    M1,
    /// `(3-t) t^2 / 3`
    M,
}

impl Minorant {
    /// Maximum of the weight over [0, 1].
    pub fn max_value(self) -> f64 {
        match self {
            // maximizer t = 3/4
            Minorant::M0 => 9.0 * std::f64::consts::SQRT_2 / 512.0,
            Minorant::M1 => 2.0 / 3.0,
            Minorant::M => 2.0 / 3.0,
        }
    }
}

fn check_unit(name: &'static str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) || !x.is_finite() {
        return Err(Error::OutOfDomain {
            name,
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// Green's function of `u'''' = v` with `u(0)=u'(0)=u''(1)=u'''(1)=0`.
pub fn green(t: f64, s: f64) -> Result<f64> {
    check_unit("t", t)?;
    check_unit("s", s)?;
    Ok(green_raw(t, s))
}

#[inline]
pub(crate) fn green_raw(t: f64, s: f64) -> f64 {
    if s <= t {
        s * s * (3.0 * t - s) / 6.0
    } else {
        t * t * (3.0 * s - t) / 6.0
    }
}

/// Second t-derivative of the kernel: `0` for `s <= t`, `s - t` for `s > t`.
/// Both one-sided limits at `s = t` vanish, so the `s <= t` branch is used
/// there.
pub fn green_tt(t: f64, s: f64) -> Result<f64> {
    check_unit("t", t)?;
    check_unit("s", s)?;
    Ok(if s <= t { 0.0 } else { s - t })
}

/// Evaluate one of the named weight functions.
pub fn minorant(kind: Minorant, t: f64) -> Result<f64> {
    check_unit("t", t)?;
    Ok(minorant_raw(kind, t))
}

#[inline]
pub(crate) fn minorant_raw(kind: Minorant, t: f64) -> f64 {
    match kind {
        Minorant::M0 => std::f64::consts::SQRT_2 * (1.0 - t) * t * t * t / 6.0,
        Minorant::M1 => 2.0 / 3.0 * t.sqrt() * t,
        Minorant::M => (3.0 - t) * t * t / 3.0,
    }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules
// ---------------------------------------------------------------------------

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
/// Newton iteration on the Legendre recurrence; symmetric pairs mirrored.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!((2..=32).contains(&n), "rule order out of range");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // p0, p1 recurrence up to degree n
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A flat list of quadrature points over a union of segments.
#[derive(Debug, Clone)]
pub(crate) struct PointSet {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PointSet {
    /// Lay `subpanels` GL panels over every elementary segment.
    pub fn build(boundaries: &[f64], subpanels: usize, pts: usize) -> Self {
        let (xs, ws) = gauss_legendre(pts);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for seg in boundaries.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let hp = (b - a) / subpanels as f64;
            for k in 0..subpanels {
                let lo = a + k as f64 * hp;
                let mid = lo + 0.5 * hp;
                let half = 0.5 * hp;
                for (x, w) in xs.iter().zip(&ws) {
                    points.push(mid + half * x);
                    weights.push(half * w);
                }
            }
        }
        Self { points, weights }
    }
}

/// Merge grid nodes with extra break abscissae into a sorted boundary list.
/// Breaks closer than 1e-14 to an existing boundary are dropped.
pub(crate) fn merged_boundaries(grid: &Grid, extra: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = grid.nodes().to_vec();
    for &b in extra {
        if b > 0.0 && b < 1.0 {
            all.push(b);
        }
    }
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    all
}

fn segment_boundaries(a: f64, b: f64, extra: &[f64]) -> Vec<f64> {
    let mut all = vec![a, b];
    for &x in extra {
        if x > a && x < b {
            all.push(x);
        }
    }
    all.sort_by(|x, y| x.partial_cmp(y).unwrap());
    all.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    all
}

const MAX_DOUBLINGS: usize = 6;

fn composite_over(
    boundaries: &[f64],
    subpanels: usize,
    pts: usize,
    g: &impl Fn(f64) -> f64,
) -> f64 {
    let ps = PointSet::build(boundaries, subpanels, pts);
    ps.points
        .iter()
        .zip(&ps.weights)
        .map(|(&s, &w)| w * g(s))
        .sum()
}

/// Quadrature value together with the gap observed at the final doubling,
/// usable as an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub refinement_gap: f64,
}

/// Composite Gauss-Legendre estimate of the integral of `g` over [a, b].
/// Panels are doubled until consecutive estimates differ by less than the
/// refinement tolerance; hitting the doubling cap first is an error that
/// carries the last estimate and gap.
pub fn integrate(g: impl Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    integrate_with_breaks(g, a, b, &[], cfg).map(|q| q.value)
}

/// Same as [`integrate`] but splits the interval at the given break
/// abscissae first, and reports the final refinement gap.
pub fn integrate_with_breaks(
    g: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Quadrature> {
    cfg.validate()?;
    if !(a <= b) {
        return Err(Error::OutOfDomain {
            name: "b",
            value: b,
            lo: a,
            hi: f64::INFINITY,
        });
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            refinement_gap: 0.0,
        });
    }
    let bounds = segment_boundaries(a, b, breaks);
    // Spread the configured panel count over the segments, at least one per
    // segment.
    let per_segment = (cfg.panels / (bounds.len() - 1)).max(1);
    let mut sub = per_segment;
    let mut last = composite_over(&bounds, sub, cfg.points_per_panel, &g);
    let mut gap = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        sub *= 2;
        let next = composite_over(&bounds, sub, cfg.points_per_panel, &g);
        gap = (next - last).abs();
        last = next;
        // the tolerance is absolute for unit-scale integrals and switches to
        // relative beyond, where summation roundoff sets the floor
        if gap <= cfg.refinement_tolerance * last.abs().max(1.0) {
            return Ok(Quadrature {
                value: last,
                refinement_gap: gap,
            });
        }
    }
    Err(Error::ToleranceNotMet {
        last,
        gap,
        tolerance: cfg.refinement_tolerance,
    })
}

// ---------------------------------------------------------------------------
// The integral operator J and curvature recovery
// ---------------------------------------------------------------------------

/// Split `G(t, s) = s^2(3t-s)/6` (s <= t) and `t^2(3s-t)/6` (s > t) into the
/// four moment sums needed to evaluate `(Jv)(t)` at every grid node from one
/// shared point set:
///
/// ```text
/// (Jv)(t) = t * sum_{s<t} w s^2 v / 2  -  sum_{s<t} w s^3 v / 6
///         + t^2/2 * sum_{s>t} w s v    -  t^3/6 * sum_{s>t} w v
/// ```
///
/// All nodes are segment boundaries, so no quadrature point ever straddles
/// the kernel kink.
fn apply_j_on_points(ps: &PointSet, v: &[f64], nodes: &[f64]) -> Vec<f64> {
    let q = ps.points.len();
    // prefix sums over points below t, suffix sums over points above t
    let mut pa = vec![0.0; q + 1];
    let mut pb = vec![0.0; q + 1];
    for k in 0..q {
        let ws = ps.weights[k] * v[k];
        let s = ps.points[k];
        pa[k + 1] = pa[k] + ws * s * s / 2.0;
        pb[k + 1] = pb[k] + ws * s * s * s / 6.0;
    }
    let mut sc = vec![0.0; q + 1];
    let mut sd = vec![0.0; q + 1];
    for k in (0..q).rev() {
        let ws = ps.weights[k] * v[k];
        let s = ps.points[k];
        sc[k] = sc[k + 1] + ws * s;
        sd[k] = sd[k + 1] + ws;
    }
    let mut out = Vec::with_capacity(nodes.len());
    let mut k = 0usize;
    for &t in nodes {
        while k < q && ps.points[k] < t {
            k += 1;
        }
        let below = t * pa[k] - pb[k];
        let above = t * t / 2.0 * sc[k] - t * t * t / 6.0 * sd[k];
        out.push(below + above);
    }
    out
}

/// `w(t) = integral over s in [t,1] of (s-t) v(s) ds` at every node, from the
/// same shared point set. This is the exact second derivative of `Jv`.
pub(crate) fn curvature_on_points(ps: &PointSet, v: &[f64], nodes: &[f64]) -> Vec<f64> {
    let q = ps.points.len();
    let mut sc = vec![0.0; q + 1];
    let mut sd = vec![0.0; q + 1];
    for k in (0..q).rev() {
        let ws = ps.weights[k] * v[k];
        sc[k] = sc[k + 1] + ws * ps.points[k];
        sd[k] = sd[k + 1] + ws;
    }
    let mut out = Vec::with_capacity(nodes.len());
    let mut k = 0usize;
    for &t in nodes {
        while k < q && ps.points[k] < t {
            k += 1;
        }
        out.push(sc[k] - t * sd[k]);
    }
    out
}

fn refine_on_grid(
    grid: &Grid,
    cfg: &QuadratureConfig,
    extra_breaks: &[f64],
    eval: impl Fn(&PointSet) -> Vec<f64>,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let bounds = merged_boundaries(grid, extra_breaks);
    let mut sub = (cfg.panels / grid.panels()).max(1);
    let ps = PointSet::build(&bounds, sub, cfg.points_per_panel);
    let mut last = eval(&ps);
    let mut gap = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        sub *= 2;
        let ps = PointSet::build(&bounds, sub, cfg.points_per_panel);
        let next = eval(&ps);
        gap = last
            .iter()
            .zip(&next)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = next.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        last = next;
        if gap <= cfg.refinement_tolerance * scale {
            return Ok(last);
        }
    }
    Err(Error::ToleranceNotMet {
        last: f64::NAN,
        gap,
        tolerance: cfg.refinement_tolerance,
    })
}

/// Apply the integral operator to a callable right-hand side, sampling the
/// result at the grid nodes. `u(0) = 0` exactly.
pub fn apply_j(
    v: impl Fn(f64) -> f64,
    grid: &Grid,
    cfg: &QuadratureConfig,
) -> Result<GridFunction> {
    apply_j_with_breaks(v, grid, cfg, &[])
}

/// Apply the integral operator, additionally splitting the quadrature at the
/// given break abscissae (kinks of `v`).
pub fn apply_j_with_breaks(
    v: impl Fn(f64) -> f64,
    grid: &Grid,
    cfg: &QuadratureConfig,
    extra_breaks: &[f64],
) -> Result<GridFunction> {
    let mut values = refine_on_grid(grid, cfg, extra_breaks, |ps| {
        let vs: Vec<f64> = ps.points.iter().map(|&s| v(s)).collect();
        apply_j_on_points(ps, &vs, grid.nodes())
    })?;
    values[0] = 0.0;
    GridFunction::new(grid.clone(), values)
}

/// Apply the integral operator to a sampled right-hand side (piecewise-linear
/// interpretation). The sample kinks sit at grid nodes, which are already
/// segment boundaries.
pub fn apply_j_grid(v: &GridFunction, cfg: &QuadratureConfig) -> Result<GridFunction> {
    apply_j_with_breaks(|s| v.interpolate(s), v.grid(), cfg, &[])
}

/// `u''(t) = integral over s in [t,1] of (s-t) v(s) ds` for a single `t`.
pub fn curvature_from_rhs(v: impl Fn(f64) -> f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    curvature_from_rhs_with_breaks(v, t, cfg, &[])
}

pub fn curvature_from_rhs_with_breaks(
    v: impl Fn(f64) -> f64,
    t: f64,
    cfg: &QuadratureConfig,
    breaks: &[f64],
) -> Result<f64> {
    check_unit("t", t)?;
    if t == 1.0 {
        return Ok(0.0);
    }
    Ok(integrate_with_breaks(|s| (s - t) * v(s), t, 1.0, breaks, cfg)?.value)
}

/// Curvature profile `u''` sampled at every grid node.
pub fn curvature_profile(
    v: impl Fn(f64) -> f64,
    grid: &Grid,
    cfg: &QuadratureConfig,
    extra_breaks: &[f64],
) -> Result<GridFunction> {
    let values = refine_on_grid(grid, cfg, extra_breaks, |ps| {
        let vs: Vec<f64> = ps.points.iter().map(|&s| v(s)).collect();
        curvature_on_points(ps, &vs, grid.nodes())
    })?;
    GridFunction::new(grid.clone(), values)
}

/// Energetic norm of `Jv` for a sampled (piecewise-linear) right-hand side,
/// computed exactly: the curvature `w(t) = integral over [t,1] of (s-t)v(s)`
/// has a closed form per panel (cubic in `t`), and its square is integrated
/// by a rule exact for degree six.
pub fn energetic_norm_of_pl_rhs(v: &GridFunction) -> f64 {
    let grid = v.grid();
    let n = grid.panels();
    let h = grid.spacing();
    let vals = v.values();
    // suffix moments at node boundaries: integrals of v and s*v over [t_k, 1]
    let mut s0 = vec![0.0; n + 1];
    let mut s1 = vec![0.0; n + 1];
    for k in (0..n).rev() {
        let (a, b) = (grid.node(k), grid.node(k + 1));
        let (va, vb) = (vals[k], vals[k + 1]);
        let slope = (vb - va) / h;
        s0[k] = s0[k + 1] + h * (va + vb) / 2.0;
        s1[k] = s1[k + 1]
            + va * (b * b - a * a) / 2.0
            + slope * ((b * b * b - a * a * a) / 3.0 - a * (b * b - a * a) / 2.0);
    }
    let w_at = |t: f64| -> f64 {
        if t >= 1.0 {
            return 0.0;
        }
        let k = grid.panel_of(t);
        let (a, b) = (grid.node(k), grid.node(k + 1));
        let (va, vb) = (vals[k], vals[k + 1]);
        let slope = (vb - va) / h;
        let vt = va + slope * (t - a);
        let part0 = (b - t) * (vt + vb) / 2.0;
        let part1 = va * (b * b - t * t) / 2.0
            + slope * ((b * b * b - t * t * t) / 3.0 - a * (b * b - t * t) / 2.0);
        (s1[k + 1] - t * s0[k + 1]) + (part1 - t * part0)
    };
    let (xs, ws) = gauss_legendre(4);
    let mut acc = 0.0;
    for k in 0..n {
        let mid = grid.node(k) + 0.5 * h;
        for (x, wt) in xs.iter().zip(&ws) {
            let w = w_at(mid + 0.5 * h * x);
            acc += 0.5 * h * wt * w * w;
        }
    }
    acc.max(0.0).sqrt()
}

/// L2 norm of `Jv` evaluated pointwise. The right-hand side is tabulated on
/// a fixed inner point set split at the supplied breaks; the kernel kink at
/// `s = t` is only a third-derivative jump, so the inner rule keeps full
/// accuracy without t-dependent splitting.
pub fn l2_norm_of_image(
    v: impl Fn(f64) -> f64,
    cfg: &QuadratureConfig,
    breaks: &[f64],
) -> Result<f64> {
    cfg.validate()?;
    let bounds = segment_boundaries(0.0, 1.0, breaks);
    let sub = (cfg.panels / (bounds.len() - 1)).max(32);
    let inner = PointSet::build(&bounds, sub, cfg.points_per_panel);
    let vals: Vec<f64> = inner.points.iter().map(|&s| v(s)).collect();
    if vals.iter().any(|x| !x.is_finite()) {
        return Err(Error::Precondition(
            "right-hand side evaluated to a non-finite value".into(),
        ));
    }
    let ju = |t: f64| -> f64 {
        inner
            .points
            .iter()
            .zip(&inner.weights)
            .zip(&vals)
            .map(|((&s, &w), &g)| w * green_raw(t, s) * g)
            .sum()
    };
    let q = integrate_with_breaks(
        |t| {
            let x = ju(t);
            x * x
        },
        0.0,
        1.0,
        breaks,
        cfg,
    )?;
    Ok(q.value.max(0.0).sqrt())
}

/// Energetic norm of `u = Jv`, computed from the exact curvature relation
/// rather than by differencing samples: `|u|^2 = integral of w(t)^2` with
/// `w(t) = integral over [t,1] of (s-t)v(s) ds`.
pub fn energetic_norm_of_rhs(
    v: impl Fn(f64) -> f64,
    cfg: &QuadratureConfig,
    breaks: &[f64],
) -> Result<f64> {
    // The inner integrand is smooth between breaks; a fixed rule keeps the
    // nested integrand deterministic so the outer refinement can settle.
    let pts = cfg.points_per_panel;
    let w = |t: f64| -> f64 {
        if t >= 1.0 {
            return 0.0;
        }
        let bounds = segment_boundaries(t, 1.0, breaks);
        composite_over(&bounds, 48, pts, &|s| (s - t) * v(s))
    };
    let sq = integrate_with_breaks(|t| w(t) * w(t), 0.0, 1.0, breaks, cfg)?.value;
    Ok(sq.max(0.0).sqrt())
}
