//! Piecewise nonlinearities `f(t, u)` described by a small expression DSL.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! spec   := piece { ";" piece }
//! piece  := "[" number "," ( number | "inf" ) ")" ":" expr
//! expr   := term { ("+"|"-") term }
//! term   := factor { "*" factor }
//! factor := number | "u" | "t" | "(" expr ")" | factor "^" number
//! ```
//!
//! Piece ranges are u-intervals, left-closed right-open, ascending, covering
//! [0, inf). A parsed spec is validated for coverage, continuity across
//! breakpoints, and (sampled) nonnegativity. Below `u = 0` the nonlinearity
//! is extended by the constant `f(t, 0)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::QuadratureConfig;
use crate::kernel;

/// Expression tree over variables `t`, `u` with `+`, `-`, `*` and powers
/// with constant (possibly rational) exponents.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    U,
    T,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
}

/// `base^p` with the convention `0^p = 0` for `p > 0` and `0^0 = 1`.
fn pow_eval(base: f64, p: f64) -> f64 {
    if p == 0.0 {
        return 1.0;
    }
    if base == 0.0 {
        return if p > 0.0 { 0.0 } else { f64::INFINITY };
    }
    if p.fract() == 0.0 && p.abs() <= 64.0 {
        base.powi(p as i32)
    } else {
        base.powf(p)
    }
}

impl Expr {
    pub fn eval(&self, t: f64, u: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::U => u,
            Expr::T => t,
            Expr::Add(a, b) => a.eval(t, u) + b.eval(t, u),
            Expr::Sub(a, b) => a.eval(t, u) - b.eval(t, u),
            Expr::Mul(a, b) => a.eval(t, u) * b.eval(t, u),
            Expr::Pow(a, p) => pow_eval(a.eval(t, u), *p),
        }
    }

    fn depends_on_u(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::T => false,
            Expr::U => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.depends_on_u() || b.depends_on_u()
            }
            Expr::Pow(a, _) => a.depends_on_u(),
        }
    }

    fn depends_on_t(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::U => false,
            Expr::T => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.depends_on_t() || b.depends_on_t()
            }
            Expr::Pow(a, _) => a.depends_on_t(),
        }
    }

    /// Structural derivative with respect to `u`.
    fn d_du(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::T => Expr::Const(0.0),
            Expr::U => Expr::Const(1.0),
            Expr::Add(a, b) => Expr::Add(Box::new(a.d_du()), Box::new(b.d_du())),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.d_du()), Box::new(b.d_du())),
            Expr::Mul(a, b) => Expr::Add(
                Box::new(Expr::Mul(Box::new(a.d_du()), b.clone())),
                Box::new(Expr::Mul(a.clone(), Box::new(b.d_du()))),
            ),
            Expr::Pow(a, p) => Expr::Mul(
                Box::new(Expr::Mul(
                    Box::new(Expr::Const(*p)),
                    Box::new(Expr::Pow(a.clone(), p - 1.0)),
                )),
                Box::new(a.d_du()),
            ),
        }
    }

    /// Exact u-antiderivative where the structure allows one: sums,
    /// u-free scalings, powers of u, and powers of bases with constant
    /// u-slope. Returns `None` otherwise (quadrature fallback).
    fn antiderivative_u(&self) -> Option<Expr> {
        if !self.depends_on_u() {
            return Some(Expr::Mul(Box::new(self.clone()), Box::new(Expr::U)));
        }
        match self {
            Expr::Const(_) | Expr::T => unreachable!("u-free handled above"),
            Expr::U => Some(Expr::Mul(
                Box::new(Expr::Const(0.5)),
                Box::new(Expr::Pow(Box::new(Expr::U), 2.0)),
            )),
            Expr::Add(a, b) => Some(Expr::Add(
                Box::new(a.antiderivative_u()?),
                Box::new(b.antiderivative_u()?),
            )),
            Expr::Sub(a, b) => Some(Expr::Sub(
                Box::new(a.antiderivative_u()?),
                Box::new(b.antiderivative_u()?),
            )),
            Expr::Mul(a, b) => {
                if !a.depends_on_u() {
                    Some(Expr::Mul(a.clone(), Box::new(b.antiderivative_u()?)))
                } else if !b.depends_on_u() {
                    Some(Expr::Mul(Box::new(a.antiderivative_u()?), b.clone()))
                } else {
                    None
                }
            }
            Expr::Pow(base, p) => {
                if *p == -1.0 {
                    return None;
                }
                // constant u-slope k: antiderivative base^(p+1) / ((p+1) k)
                let slope = base.d_du().constant_value()?;
                if slope == 0.0 {
                    return Some(Expr::Mul(Box::new(self.clone()), Box::new(Expr::U)));
                }
                Some(Expr::Mul(
                    Box::new(Expr::Const(1.0 / ((p + 1.0) * slope))),
                    Box::new(Expr::Pow(base.clone(), p + 1.0)),
                ))
            }
        }
    }

    /// Value of an expression that depends on neither variable.
    fn constant_value(&self) -> Option<f64> {
        if self.depends_on_u() || self.depends_on_t() {
            None
        } else {
            Some(self.eval(0.0, 0.0))
        }
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized canonical form: reparsing reproduces the tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::U => write!(f, "u"),
            Expr::T => write!(f, "t"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Pow(a, p) => write!(f, "({a})^{p}"),
        }
    }
}

/// One piece of the nonlinearity, valid on `lo <= u < hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub expr: Expr,
    anti: Option<Expr>,
    deriv: Expr,
}

/// Validated piecewise description of `f(t, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    pieces: Vec<Piece>,
    autonomous: bool,
    probe_max: f64,
    source: String,
}

impl serde::Serialize for NonlinearitySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl fmt::Display for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text: text.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len()
            && (self.text[self.pos].is_ascii_digit() || self.text[self.pos] == b'.')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        // optional exponent part
        if self.pos < self.text.len() && (self.text[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.text.len()
                && (self.text[self.pos] == b'+' || self.text[self.pos] == b'-')
            {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = mark; // not an exponent after all
            }
        }
        let s = std::str::from_utf8(&self.text[start..self.pos]).unwrap();
        s.parse::<f64>().map_err(|_| {
            self.pos = start;
            self.err(format!("malformed number '{s}'"))
        })
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(kw.as_bytes()) {
            let end = self.pos + kw.len();
            let followed_by_letter = self
                .text
                .get(end)
                .is_some_and(|c| c.is_ascii_alphanumeric());
            if !followed_by_letter {
                self.pos = end;
                return true;
            }
        }
        false
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat(b'-') {
                acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr> {
        let mut base = match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                e
            }
            Some(b'u') if self.keyword("u") => Expr::U,
            Some(b't') if self.keyword("t") => Expr::T,
            Some(c) if c.is_ascii_digit() || c == b'.' => Expr::Const(self.number()?),
            _ => return Err(self.err("expected a number, 'u', 't', or '('")),
        };
        while self.eat(b'^') {
            let neg = self.eat(b'-');
            let p = self.number()?;
            base = Expr::Pow(Box::new(base), if neg { -p } else { p });
        }
        Ok(base)
    }

    fn piece(&mut self) -> Result<(f64, f64, Expr)> {
        self.expect(b'[')?;
        let lo = self.number()?;
        self.expect(b',')?;
        let hi = if self.keyword("inf") {
            f64::INFINITY
        } else {
            self.number()?
        };
        self.expect(b')')?;
        self.expect(b':')?;
        let e = self.expr()?;
        Ok((lo, hi, e))
    }
}

/// Parse and validate a nonlinearity description.
pub fn parse_spec(text: &str) -> Result<NonlinearitySpec> {
    let mut p = Parser::new(text);
    let mut raw = Vec::new();
    loop {
        raw.push(p.piece()?);
        if !p.eat(b';') {
            break;
        }
    }
    p.skip_ws();
    if p.pos != p.text.len() {
        return Err(p.err("trailing input after last piece"));
    }
    build_spec(raw)
}

fn build_spec(raw: Vec<(f64, f64, Expr)>) -> Result<NonlinearitySpec> {
    // coverage of [0, inf): ascending, gapless, last piece unbounded
    if raw[0].0 != 0.0 {
        return Err(Error::Coverage(format!(
            "first piece starts at {}, not 0",
            raw[0].0
        )));
    }
    for pair in raw.windows(2) {
        let (_, hi, _) = &pair[0];
        let (lo, _, _) = &pair[1];
        if *hi != *lo {
            return Err(Error::Coverage(format!(
                "piece boundary mismatch: {hi} vs {lo}"
            )));
        }
    }
    for (lo, hi, _) in &raw {
        if !(hi > lo) {
            return Err(Error::Coverage(format!("empty range [{lo}, {hi})")));
        }
    }
    if raw.last().unwrap().1.is_finite() {
        return Err(Error::Coverage("final piece must extend to inf".into()));
    }

    // continuity across breakpoints at a few t stations
    for pair in raw.windows(2) {
        let (_, hi, left) = &pair[0];
        let (_, _, right) = &pair[1];
        for &t in &[0.0, 0.5, 1.0] {
            let jump = left.eval(t, *hi) - right.eval(t, *hi);
            if !jump.is_finite() || jump.abs() > 1e-9 {
                return Err(Error::Discontinuity {
                    breakpoint: *hi,
                    jump,
                    t,
                });
            }
        }
    }

    let largest_break = raw
        .iter()
        .filter(|(_, hi, _)| hi.is_finite())
        .fold(0.0f64, |m, (_, hi, _)| m.max(*hi));
    let probe_max = (2.0 * largest_break).max(10.0);
    let autonomous = !raw.iter().any(|(_, _, e)| e.depends_on_t());
    let source = raw
        .iter()
        .map(|(lo, hi, e)| {
            if hi.is_finite() {
                format!("[{lo},{hi}): {e}")
            } else {
                format!("[{lo},inf): {e}")
            }
        })
        .collect::<Vec<_>>()
        .join(" ; ");

    let pieces = raw
        .into_iter()
        .map(|(lo, hi, expr)| Piece {
            lo,
            hi,
            anti: expr.antiderivative_u(),
            deriv: expr.d_du(),
            expr,
        })
        .collect();

    let spec = NonlinearitySpec {
        pieces,
        autonomous,
        probe_max,
        source,
    };

    // sampled nonnegativity on [0,1] x [0, probe_max]
    for i in 0..=20 {
        let t = i as f64 / 20.0;
        let mut us: Vec<f64> = (0..=160).map(|j| probe_max * j as f64 / 160.0).collect();
        us.extend(spec.breakpoints());
        for u in us {
            let v = spec.eval_raw(t, u);
            if !v.is_finite() || v < -1e-12 {
                return Err(Error::Negativity { t, u, value: v });
            }
        }
    }
    Ok(spec)
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

impl NonlinearitySpec {
    pub fn autonomous(&self) -> bool {
        self.autonomous
    }

    pub fn probe_max(&self) -> f64 {
        self.probe_max
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Interior breakpoints (finite piece boundaries above 0).
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces
            .iter()
            .map(|p| p.hi)
            .filter(|h| h.is_finite())
            .collect()
    }

    fn piece_for(&self, u: f64) -> &Piece {
        for p in &self.pieces {
            if u < p.hi {
                return p;
            }
        }
        self.pieces.last().unwrap()
    }

    pub(crate) fn eval_raw(&self, t: f64, u: f64) -> f64 {
        let uu = u.max(0.0);
        self.piece_for(uu).expr.eval(t, uu)
    }

    /// One-sided (right) derivative of `f(t, ·)`; clamped to avoid the
    /// integrable blow-up of fractional powers at piece edges.
    pub(crate) fn dfdu_raw(&self, t: f64, u: f64) -> f64 {
        if u < 0.0 {
            return 0.0;
        }
        let d = self.piece_for(u).deriv.eval(t, u);
        if d.is_finite() {
            d.clamp(-1e12, 1e12)
        } else {
            1e12
        }
    }
}

/// Evaluate `f(t, u)`. Values below `u = 0` use the constant continuation
/// `f(t, 0)`.
pub fn eval_f(spec: &NonlinearitySpec, t: f64, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfDomain {
            name: "t",
            value: t,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(spec.eval_raw(t, u))
}

/// Antiderivative `F(t, u) = integral of f(t, s) ds from 0 to u`, exact for
/// pieces with a structural antiderivative and by quadrature otherwise.
/// For `u < 0` the constant continuation yields `f(t,0) * u`.
pub fn eval_f_antiderivative(spec: &NonlinearitySpec, t: f64, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfDomain {
            name: "t",
            value: t,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if u <= 0.0 {
        return Ok(spec.eval_raw(t, 0.0) * u);
    }
    let mut acc = 0.0;
    for p in &spec.pieces {
        if u <= p.lo {
            break;
        }
        let upper = u.min(p.hi);
        match &p.anti {
            Some(a) => acc += a.eval(t, upper) - a.eval(t, p.lo),
            None => {
                let cfg = QuadratureConfig {
                    panels: 64,
                    points_per_panel: 8,
                    refinement_tolerance: 1e-12,
                };
                acc += kernel::integrate(|s| p.expr.eval(t, s), p.lo, upper, &cfg)?;
            }
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Monotonicity scan
// ---------------------------------------------------------------------------

/// Witness of a monotonicity violation on the sample lattice.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MonotoneWitness {
    pub axis: MonotoneAxis,
    pub t: f64,
    pub u_from: f64,
    pub u_to: f64,
    pub f_from: f64,
    pub f_to: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum MonotoneAxis {
    T,
    U,
}

/// Result of the sampled check that `f` is nondecreasing in each variable.
/// This is evidence, not a proof; `worst_drop` is the largest decrease seen.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MonotoneReport {
    pub passed: bool,
    pub worst_drop: f64,
    pub witness: Option<MonotoneWitness>,
    pub samples: usize,
    pub probe_max: f64,
}

pub fn check_monotone(spec: &NonlinearitySpec, samples: usize) -> MonotoneReport {
    check_monotone_with_probe(spec, samples, spec.probe_max)
}

pub fn check_monotone_with_probe(
    spec: &NonlinearitySpec,
    samples: usize,
    probe_max: f64,
) -> MonotoneReport {
    let samples = samples.max(2);
    let ts: Vec<f64> = (0..samples)
        .map(|i| i as f64 / (samples - 1) as f64)
        .collect();
    let mut us: Vec<f64> = (0..samples)
        .map(|j| probe_max * j as f64 / (samples - 1) as f64)
        .collect();
    us.extend(spec.breakpoints().iter().filter(|b| **b <= probe_max));
    us.sort_by(|a, b| a.partial_cmp(b).unwrap());
    us.dedup();

    let mut worst_drop = 0.0f64;
    let mut witness = None;
    // along u for each t
    for &t in &ts {
        for pair in us.windows(2) {
            let (f0, f1) = (spec.eval_raw(t, pair[0]), spec.eval_raw(t, pair[1]));
            let drop = f0 - f1;
            if drop > worst_drop {
                worst_drop = drop;
                witness = Some(MonotoneWitness {
                    axis: MonotoneAxis::U,
                    t,
                    u_from: pair[0],
                    u_to: pair[1],
                    f_from: f0,
                    f_to: f1,
                });
            }
        }
    }
    // along t for each u
    for &u in &us {
        for pair in ts.windows(2) {
            let (f0, f1) = (spec.eval_raw(pair[0], u), spec.eval_raw(pair[1], u));
            let drop = f0 - f1;
            if drop > worst_drop {
                worst_drop = drop;
                witness = Some(MonotoneWitness {
                    axis: MonotoneAxis::T,
                    t: pair[0],
                    u_from: u,
                    u_to: u,
                    f_from: f0,
                    f_to: f1,
                });
            }
        }
    }
    MonotoneReport {
        passed: worst_drop <= 1e-12,
        worst_drop,
        witness,
        samples,
        probe_max,
    }
}

// ---------------------------------------------------------------------------
// Envelopes
// ---------------------------------------------------------------------------

/// Pointwise extrema of `f(t, ·)` over the t-dependent interval
/// `[minorant(kind, t) * radius, upper_u]`.
///
/// When the sampled monotonicity check passed, the extrema reduce to
/// endpoint evaluations. Otherwise a golden-section search over each
/// breakpoint sub-interval is used.
#[derive(Debug, Clone)]
pub struct Envelope {
    spec: NonlinearitySpec,
    radius: f64,
    kind: kernel::Minorant,
    upper_u: f64,
    monotone: bool,
}

pub fn envelope(
    spec: &NonlinearitySpec,
    radius: f64,
    kind: kernel::Minorant,
    upper_u: f64,
) -> Result<Envelope> {
    if !(radius > 0.0) {
        return Err(Error::Precondition(
            "envelope radius must be positive".into(),
        ));
    }
    let worst_lo = kind.max_value() * radius;
    if upper_u < worst_lo - 1e-12 {
        return Err(Error::EmptyEnvelope {
            t: match kind {
                kernel::Minorant::M0 => 0.75,
                _ => 1.0,
            },
            lo: worst_lo,
            hi: upper_u,
        });
    }
    let monotone = check_monotone_with_probe(spec, 64, spec.probe_max.max(upper_u * 1.5)).passed;
    Ok(Envelope {
        spec: spec.clone(),
        radius,
        kind,
        upper_u,
        monotone,
    })
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut best = f(a).min(f(b));
    for _ in 0..60 {
        let x1 = b - GOLDEN * (b - a);
        let x2 = a + GOLDEN * (b - a);
        let (f1, f2) = (f(x1), f(x2));
        best = best.min(f1).min(f2);
        if f1 < f2 {
            b = x2;
        } else {
            a = x1;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    best
}

impl Envelope {
    fn interval(&self, t: f64) -> Result<(f64, f64)> {
        let lo = kernel::minorant(self.kind, t)? * self.radius;
        if self.upper_u < lo - 1e-12 {
            return Err(Error::EmptyEnvelope {
                t,
                lo,
                hi: self.upper_u,
            });
        }
        Ok((lo.min(self.upper_u), self.upper_u))
    }

    fn search(&self, t: f64, lo: f64, hi: f64, maximize: bool) -> f64 {
        let sign = if maximize { -1.0 } else { 1.0 };
        let g = |u: f64| sign * self.spec.eval_raw(t, u);
        let mut cuts = vec![lo, hi];
        for b in self.spec.breakpoints() {
            if b > lo && b < hi {
                cuts.push(b);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut best = f64::INFINITY;
        for pair in cuts.windows(2) {
            best = best.min(golden_min(g, pair[0], pair[1]));
        }
        sign * best
    }

    /// `min { f(t, u) : minorant(t) * radius <= u <= upper_u }`.
    pub fn lower(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.interval(t)?;
        if self.monotone {
            Ok(self.spec.eval_raw(t, lo))
        } else {
            Ok(self.search(t, lo, hi, false))
        }
    }

    /// `max { f(t, u) : minorant(t) * radius <= u <= upper_u }`.
    pub fn upper(&self, t: f64) -> Result<f64> {
        let (_, hi) = self.interval(t)?;
        if self.monotone {
            Ok(self.spec.eval_raw(t, hi))
        } else {
            let (lo, hi) = self.interval(t)?;
            Ok(self.search(t, lo, hi, true))
        }
    }
}
