//! Shooting for confined eigenvalues.
//!
//! On the line, the solution with data `(u, u')(0) = (1, β)` (even `m`) or
//! `(β, 1)` (odd `m`) is integrated from the well bottom to both walls, and
//! `(λ, β)` is adjusted until it vanishes at both. Radially, a regular
//! Frobenius solution is started near the origin and `λ` is adjusted until it
//! vanishes at `L`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::{integrate_linear, OdeError, OdeOptions, OdeState, OdeStats};
use crate::potential::{curvature_at_minimum, ConfinementDomain, PotentialError, PotentialSpec};
use crate::scaled::{ldexp, ScaledValue};

pub const DEFAULT_INTEGRATE_TOL: f64 = 1e-12;
pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 50;
pub const MAX_CONDITION: f64 = 1e12;
const MAX_SERIES_TERMS: usize = 40;
const SERIES_EPS: f64 = 1e-17;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShootError {
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("invalid mode: {0}")]
    InvalidMode(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("no convergence after {iterations} iterations (last |Δλ| = {last_step:e})")]
    NotConverged { iterations: usize, last_step: f64 },
    #[error("Jacobian is singular (condition {condition:e}); check the domain and the requested mode")]
    Singular { condition: f64 },
    #[error("converged to a state with {found} sign changes, expected {expected}")]
    ModeMismatch { expected: u32, found: usize },
    #[error("Frobenius series not converged within {terms} terms at x = {x_start}; use a smaller start point")]
    SeriesNotConverged { x_start: f64, terms: usize },
    #[error("start point x = {x_start} is outside the harmonic core (limit {limit})")]
    StartTooFar { x_start: f64, limit: f64 },
    #[error("could not bracket eigenvalue {m}: {reason}")]
    Bracket { m: u32, reason: String },
}

/// Mode index, semiclassical parameter and (radially) the angular parameter `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub m: u32,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl ModeSpec {
    pub fn line(m: u32, h: f64) -> Result<Self, ShootError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(ShootError::InvalidMode(format!("h must be positive, got {h}")));
        }
        Ok(Self { m, h, nu: None })
    }

    pub fn radial(m: u32, h: f64, nu: f64) -> Result<Self, ShootError> {
        let mut s = Self::line(m, h)?;
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(ShootError::InvalidMode(format!("nu must be positive, got {nu}")));
        }
        s.nu = Some(nu);
        Ok(s)
    }

    fn require_nu(&self) -> Result<f64, ShootError> {
        self.nu.ok_or_else(|| ShootError::InvalidMode("radial problems need nu".into()))
    }
}

/// A point on a solution: `(x, u(x), u'(x))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootState {
    pub x: f64,
    pub u: ScaledValue,
    pub du: ScaledValue,
}

impl ShootState {
    fn to_ode(self) -> OdeState {
        let e = self.u.exponent2().max(self.du.exponent2());
        let y0 = ldexp(self.u.mantissa(), self.u.exponent2() - e);
        let y1 = ldexp(self.du.mantissa(), self.du.exponent2() - e);
        let mut s = OdeState::new(self.x, [y0, y1, 0.0, 0.0, 0.0, 0.0]);
        s.exp2 += e;
        s
    }

    fn from_ode(s: &OdeState) -> Self {
        Self { x: s.x, u: s.u(), du: s.du() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JacobianMode {
    /// Jacobian re-evaluated at every iterate (Newton).
    #[default]
    Refreshed,
    /// Jacobian fixed at the initial guess.
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub integrate_tol: f64,
    pub newton_tol: f64,
    pub jacobian: JacobianMode,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            integrate_tol: DEFAULT_INTEGRATE_TOL,
            newton_tol: DEFAULT_NEWTON_TOL,
            jacobian: JacobianMode::Refreshed,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// `G` and its Jacobian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMap {
    /// `[G₊, G₋]` on the line, `[G]` radially.
    pub values: Vec<ScaledValue>,
    /// One row per value; columns `∂λ, ∂β` (line) or `∂λ` (radial).
    pub jacobian: Vec<Vec<ScaledValue>>,
    pub determinant: ScaledValue,
    /// Ratio of singular values after row and column equilibration.
    pub condition: f64,
}

/// The equations `u'' = q u` handled by the engine.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Equation<'a> {
    /// `−h²u'' + V u = λu`
    Line(&'a PotentialSpec),
    /// `−h²u'' + h²(ν²−¼)x⁻²u + W u = λu`
    Radial { w: &'a PotentialSpec, nu: f64 },
    /// `−h²u'' + h²ℓ(ℓ+1)y⁻²u − (Z/y)u = Eu`
    Coulomb { z: f64, ell: u32 },
}

impl Equation<'_> {
    fn q(&self, x: f64, lambda: f64, h: f64) -> Result<f64, PotentialError> {
        let h2 = h * h;
        Ok(match *self {
            Equation::Line(p) => (p.evaluate(x)? - lambda) / h2,
            Equation::Radial { w, nu } => (nu * nu - 0.25) / (x * x) + (w.evaluate(x)? - lambda) / h2,
            Equation::Coulomb { z, ell } => {
                let l = ell as f64;
                l * (l + 1.0) / (x * x) + (-z / x - lambda) / h2
            }
        })
    }
}

/// Result of one integration with the sign of `u` at each accepted state.
#[derive(Debug, Clone)]
pub(crate) struct Shot {
    pub end: OdeState,
    pub stats: OdeStats,
    pub signs: Vec<i8>,
}

fn count_changes<'a>(signs: impl IntoIterator<Item = &'a i8>) -> usize {
    let mut last = 0i8;
    let mut n = 0;
    for &s in signs {
        if s != 0 {
            if last != 0 && s != last {
                n += 1;
            }
            last = s;
        }
    }
    n
}

impl Shot {
    fn all_changes(&self) -> usize {
        count_changes(&self.signs)
    }
}

fn scales(lambda: f64, h: f64) -> (f64, f64) {
    let lam = lambda.abs().max(1e-3 * h);
    (h / lam.sqrt(), lam)
}

pub(crate) fn shoot(
    eq: Equation<'_>,
    lambda: f64,
    h: f64,
    start: OdeState,
    to_x: f64,
    tol: f64,
) -> Result<Shot, ShootError> {
    let (ell, lam) = scales(lambda, h);
    let opts = OdeOptions::new(tol, ell, lam)?;
    let mut signs = Vec::with_capacity(256);
    let (end, stats) = integrate_linear(
        |x| eq.q(x, lambda, h),
        -1.0 / (h * h),
        start,
        to_x,
        &opts,
        |s| {
            signs.push(if s.y[0] > 0.0 {
                1
            } else if s.y[0] < 0.0 {
                -1
            } else {
                0
            })
        },
    )?;
    Ok(Shot { end, stats, signs })
}

/// Integrates `−h²u'' + Vu = λu` from `from` to `to_x`.
pub fn integrate(
    p: &PotentialSpec,
    lambda: f64,
    from: ShootState,
    to_x: f64,
    h: f64,
    tol: f64,
) -> Result<ShootState, ShootError> {
    let shot = shoot(Equation::Line(p), lambda, h, from.to_ode(), to_x, tol)?;
    Ok(ShootState::from_ode(&shot.end))
}

fn line_bounds(domain: &ConfinementDomain) -> Result<(f64, f64), ShootError> {
    match *domain {
        ConfinementDomain::Interval { lower, upper } => Ok((lower, upper)),
        ConfinementDomain::Radial { .. } => Err(ShootError::InvalidDomain("expected an interval (r-, r+)".into())),
    }
}

fn line_start(m: u32, beta: f64) -> OdeState {
    if m.is_multiple_of(2) {
        OdeState::new(0.0, [1.0, beta, 0.0, 0.0, 0.0, 1.0])
    } else {
        OdeState::new(0.0, [beta, 1.0, 0.0, 0.0, 1.0, 0.0])
    }
}

fn line_shots(
    p: &PotentialSpec,
    bounds: (f64, f64),
    mode: &ModeSpec,
    lambda: f64,
    beta: f64,
    tol: f64,
) -> Result<(Shot, Shot), ShootError> {
    let eq = Equation::Line(p);
    let start = line_start(mode.m, beta);
    let plus = shoot(eq, lambda, mode.h, start, bounds.1, tol)?;
    let minus = shoot(eq, lambda, mode.h, start, bounds.0, tol)?;
    Ok((plus, minus))
}

/// Equilibrated 2×2 data: returns `(matrix, column scales, condition)`.
fn equilibrate(rows: [[f64; 2]; 2]) -> ([[f64; 2]; 2], [f64; 2], f64) {
    let mut a = rows;
    let mut col = [0.0; 2];
    for j in 0..2 {
        col[j] = a[0][j].abs().max(a[1][j].abs());
        if col[j] > 0.0 {
            a[0][j] /= col[j];
            a[1][j] /= col[j];
        }
    }
    // singular values of a 2×2 matrix
    let (p, q, r, s) = (a[0][0], a[0][1], a[1][0], a[1][1]);
    let e = (p + s) / 2.0;
    let f = (p - s) / 2.0;
    let g = (r + q) / 2.0;
    let hh = (r - q) / 2.0;
    let qq = (e * e + hh * hh).sqrt();
    let rr = (f * f + g * g).sqrt();
    let smax = qq + rr;
    let smin = (qq - rr).abs();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    (a, col, cond)
}

/// Row of `[G, ∂λG, ∂βG]` scaled by the largest Jacobian entry.
fn row_of(s: &OdeState) -> ([ScaledValue; 3], ScaledValue) {
    let g = s.component(0);
    let dl = s.component(2);
    let db = s.component(4);
    let scale = if dl.cmp_abs(&db).is_ge() { dl.abs() } else { db.abs() };
    ([g, dl, db], scale)
}

/// `(G₊, G₋)` and the Jacobian in `(λ, β)`.
pub fn boundary_map_line(
    p: &PotentialSpec,
    domain: &ConfinementDomain,
    mode: &ModeSpec,
    lambda: f64,
    beta: f64,
    tol: f64,
) -> Result<BoundaryMap, ShootError> {
    let bounds = line_bounds(domain)?;
    let (plus, minus) = line_shots(p, bounds, mode, lambda, beta, tol)?;
    let (rp, sp) = row_of(&plus.end);
    let (rm, sm) = row_of(&minus.end);
    let det = rp[1] * rm[2] - rp[2] * rm[1];
    let cond = if sp.is_zero() || sm.is_zero() {
        f64::INFINITY
    } else {
        equilibrate([[rp[1].ratio(&sp), rp[2].ratio(&sp)], [rm[1].ratio(&sm), rm[2].ratio(&sm)]]).2
    };
    Ok(BoundaryMap {
        values: vec![rp[0], rm[0]],
        jacobian: vec![vec![rp[1], rp[2]], vec![rm[1], rm[2]]],
        determinant: det,
        condition: cond,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSolution {
    pub lambda: f64,
    pub beta: f64,
    pub iterations: usize,
    pub sign_changes: usize,
    /// True when the Newton iteration had to be restarted from a Sturm bracket.
    pub bracketed: bool,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub lambda: f64,
    pub iterations: usize,
    pub sign_changes: usize,
    pub bracketed: bool,
    pub x_start: f64,
    pub steps: usize,
}

struct LineOutcome {
    lambda: f64,
    beta: f64,
    iterations: usize,
    steps: usize,
}

/// Jacobian, residual and shot amplitudes kept from a converged-in-shape iterate.
type FrozenJacobian = ([[f64; 2]; 2], [f64; 2], [ScaledValue; 2]);

fn newton_line_raw(
    p: &PotentialSpec,
    bounds: (f64, f64),
    mode: &ModeSpec,
    lambda0: f64,
    beta0: f64,
    opts: &SolveOptions,
) -> Result<LineOutcome, ShootError> {
    let h = mode.h;
    let (mut lam, mut beta) = (lambda0, beta0);
    let mut frozen: Option<FrozenJacobian> = None;
    let mut steps = 0;
    let mut last_step = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let (plus, minus) = line_shots(p, bounds, mode, lam, beta, opts.integrate_tol)?;
        steps += plus.stats.accepted + minus.stats.accepted;
        let (rp, sp) = row_of(&plus.end);
        let (rm, sm) = row_of(&minus.end);
        if frozen.is_none() || opts.jacobian == JacobianMode::Refreshed {
            if sp.is_zero() || sm.is_zero() {
                return Err(ShootError::Singular { condition: f64::INFINITY });
            }
            let (a, col, cond) =
                equilibrate([[rp[1].ratio(&sp), rp[2].ratio(&sp)], [rm[1].ratio(&sm), rm[2].ratio(&sm)]]);
            if !(cond <= MAX_CONDITION) {
                return Err(ShootError::Singular { condition: cond });
            }
            frozen = Some((a, col, [sp, sm]));
        }
        let (a, col, [sp0, sm0]) = frozen.expect("jacobian set above");
        let g = [rp[0].ratio(&sp0), rm[0].ratio(&sm0)];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let z0 = (-g[0] * a[1][1] + g[1] * a[0][1]) / det;
        let z1 = (-a[0][0] * g[1] + a[1][0] * g[0]) / det;
        let (dl, db) = (z0 / col[0], z1 / col[1]);
        if !(dl.is_finite() && db.is_finite()) {
            return Err(ShootError::Singular { condition: f64::INFINITY });
        }
        lam += dl;
        beta += db;
        last_step = dl.abs();
        if dl.abs() <= opts.newton_tol * h && db.abs() <= opts.newton_tol * (1.0 + beta.abs()) {
            return Ok(LineOutcome { lambda: lam, beta, iterations: it, steps });
        }
    }
    Err(ShootError::NotConverged { iterations: opts.max_iterations, last_step })
}

/// Finds `[lo, hi]` with `count(lo) ≤ m < count(hi)` and shrinks it by
/// bisection to relative width `rel`.
fn sturm_bracket(
    mut count: impl FnMut(f64) -> Result<usize, ShootError>,
    m: u32,
    lower: f64,
    guess: f64,
    scale: f64,
    rel: f64,
) -> Result<(f64, f64), ShootError> {
    let m = m as usize;
    let mut lo = lower;
    if count(lo)? > m {
        return Err(ShootError::Bracket { m: m as u32, reason: format!("count at lower bound {lo} exceeds m") });
    }
    let mut width = scale.max((guess - lo).abs());
    let mut hi = guess.max(lo + width);
    let mut expansions = 0;
    while count(hi)? <= m {
        lo = hi;
        width *= 2.0;
        hi += width;
        expansions += 1;
        if expansions > 60 {
            return Err(ShootError::Bracket { m: m as u32, reason: "upper bound not found".into() });
        }
    }
    while hi - lo > rel * scale {
        let mid = 0.5 * (lo + hi);
        if count(mid)? <= m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

fn line_lambda_scale(p: &PotentialSpec, mode: &ModeSpec) -> Result<f64, ShootError> {
    Ok(curvature_at_minimum(p)? * mode.h)
}

/// Newton iteration on `G(λ, β) = 0`, with a Sturm-bracket restart when the
/// iteration fails or lands on the wrong mode.
pub fn newton_solve_line(
    p: &PotentialSpec,
    domain: &ConfinementDomain,
    mode: &ModeSpec,
    lambda0: f64,
    beta0: f64,
    opts: &SolveOptions,
) -> Result<LineSolution, ShootError> {
    let bounds = line_bounds(domain)?;
    let scale = line_lambda_scale(p, mode)?;
    let eq = Equation::Line(p);
    let count = |lam: f64| -> Result<usize, ShootError> {
        let start = OdeState::new(bounds.0, [0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        Ok(shoot(eq, lam, mode.h, start, bounds.1, opts.integrate_tol)?.all_changes())
    };
    let delta = INDEX_PROBE * scale;
    if let Ok(o) = newton_line_raw(p, bounds, mode, lambda0, beta0, opts) {
        if sturm_index(count, o.lambda, delta)? == Some(mode.m as usize) {
            return Ok(LineSolution {
                lambda: o.lambda,
                beta: o.beta,
                iterations: o.iterations,
                sign_changes: mode.m as usize,
                bracketed: false,
                steps: o.steps,
            });
        }
    }
    let (lo, hi) = sturm_bracket(count, mode.m, 0.0, lambda0, scale, 1e-7)?;
    let o = newton_line_raw(p, bounds, mode, 0.5 * (lo + hi), 0.0, opts)?;
    check_index(sturm_index(count, o.lambda, delta)?, mode.m)?;
    Ok(LineSolution {
        lambda: o.lambda,
        beta: o.beta,
        iterations: o.iterations,
        sign_changes: mode.m as usize,
        bracketed: true,
        steps: o.steps,
    })
}

/// Number of eigenvalues strictly below `lambda`: the zeros in `(r₋, r₊]`
/// (or `(0, L]`) of the solution that satisfies the boundary condition at
/// the left end.
pub fn sturm_count(
    p: &PotentialSpec,
    domain: &ConfinementDomain,
    mode: &ModeSpec,
    lambda: f64,
    tol: f64,
) -> Result<usize, ShootError> {
    match (*domain, mode.nu) {
        (ConfinementDomain::Interval { lower, upper }, None) => {
            let start = OdeState::new(lower, [0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
            Ok(shoot(Equation::Line(p), lambda, mode.h, start, upper, tol)?.all_changes())
        }
        (ConfinementDomain::Radial { length }, Some(nu)) => {
            let x_start = default_x_start(p, mode.h, length)?;
            let start = FrobeniusSeries::new(p, nu, mode.h)?.state(lambda, x_start)?;
            Ok(shoot(Equation::Radial { w: p, nu }, lambda, mode.h, start, length, tol)?.all_changes())
        }
        _ => Err(ShootError::InvalidDomain("domain and mode disagree on line vs radial".into())),
    }
}

/// Relative offset, in units of the level spacing, of the Sturm-count probes.
const INDEX_PROBE: f64 = 1e-6;

/// Number of eigenvalues below `lam`, provided exactly one lies within
/// `delta` of it; `None` otherwise.
fn sturm_index(
    mut count: impl FnMut(f64) -> Result<usize, ShootError>,
    lam: f64,
    delta: f64,
) -> Result<Option<usize>, ShootError> {
    let below = count(lam - delta)?;
    let above = count(lam + delta)?;
    Ok((above == below + 1).then_some(below))
}

fn check_index(index: Option<usize>, m: u32) -> Result<(), ShootError> {
    match index {
        Some(i) if i == m as usize => Ok(()),
        Some(i) => Err(ShootError::ModeMismatch { expected: m, found: i }),
        None => Err(ShootError::Bracket { m, reason: "no isolated eigenvalue at the converged point".into() }),
    }
}

/// Even Taylor coefficients `w_j` of `W(x) = Σ w_j x^{2j}` and the data
/// needed to sum the regular series `x^{1/2+ν} Σ c_k x^{2k}`.
#[derive(Debug, Clone)]
pub(crate) struct FrobeniusSeries {
    w: Vec<f64>,
    nu: f64,
    h: f64,
}

impl FrobeniusSeries {
    pub(crate) fn new(w: &PotentialSpec, nu: f64, h: f64) -> Result<Self, ShootError> {
        let t = w.taylor(2 * MAX_SERIES_TERMS)?;
        let even = t.iter().step_by(2).copied().collect();
        Ok(Self { w: even, nu, h })
    }

    /// `(u, u', ∂λu, ∂λu')` at `x`, all divided by `x^{ν−1/2}`.
    fn eval(&self, lambda: f64, x: f64) -> Result<[f64; 4], ShootError> {
        let (nu, h2) = (self.nu, self.h * self.h);
        let mut c = vec![1.0];
        let mut dc = vec![0.0];
        let x2 = x * x;
        let (mut s, mut ds, mut sl, mut dsl) = (x, 0.5 + nu, 0.0, 0.0);
        let mut pow = 1.0;
        for k in 1..=MAX_SERIES_TERMS {
            let denom = h2 * (2 * k) as f64 * (2.0 * k as f64 + 2.0 * nu);
            let mut acc = -lambda * c[k - 1];
            let mut dacc = -c[k - 1] - lambda * dc[k - 1];
            for j in 0..k.min(self.w.len()) {
                acc += self.w[j] * c[k - 1 - j];
                dacc += self.w[j] * dc[k - 1 - j];
            }
            c.push(acc / denom);
            dc.push(dacc / denom);
            pow *= x2;
            let sk = 0.5 + nu + 2.0 * k as f64;
            let (t, dt) = (c[k] * pow * x, c[k] * pow * sk);
            let (tl, dtl) = (dc[k] * pow * x, dc[k] * pow * sk);
            s += t;
            ds += dt;
            sl += tl;
            dsl += dtl;
            let small = |term: f64, total: f64, reference: f64| term.abs() <= SERIES_EPS * total.abs().max(reference);
            if small(t, s, 0.0) && small(dt, ds, 0.0) && small(tl, sl, x * pow.sqrt()) && small(dtl, dsl, pow.sqrt()) {
                return Ok([s, ds, sl, dsl]);
            }
        }
        Err(ShootError::SeriesNotConverged { x_start: x, terms: MAX_SERIES_TERMS })
    }

    pub(crate) fn state(&self, lambda: f64, x: f64) -> Result<OdeState, ShootError> {
        let [u, du, ul, dul] = self.eval(lambda, x)?;
        // common factor x^{ν−1/2} carried in the binary exponent
        let ln_f = (self.nu - 0.5) * x.ln();
        let exp2 = (ln_f / std::f64::consts::LN_2).floor();
        let m = (ln_f - exp2 * std::f64::consts::LN_2).exp();
        let mut s = OdeState::new(x, [u * m, du * m, ul * m, dul * m, 0.0, 0.0]);
        s.exp2 += exp2 as i64;
        Ok(s)
    }
}

/// Default radial start point `min(0.05√h/ω, L/100)`.
pub fn default_x_start(w: &PotentialSpec, h: f64, length: f64) -> Result<f64, ShootError> {
    let omega = curvature_at_minimum(w)?;
    Ok((0.05 * h.sqrt() / omega).min(length / 100.0))
}

/// `(u, u')` of the regular radial solution at `x_start`, normalized so that
/// `u/x^{1/2+ν} → 1` at the origin.
pub fn frobenius_start(
    w: &PotentialSpec,
    mode: &ModeSpec,
    lambda: f64,
    x_start: f64,
) -> Result<ShootState, ShootError> {
    let nu = mode.require_nu()?;
    let limit = 0.1 * mode.h.sqrt() / curvature_at_minimum(w)?;
    if !(x_start > 0.0 && x_start <= limit) {
        return Err(ShootError::StartTooFar { x_start, limit });
    }
    let series = FrobeniusSeries::new(w, nu, mode.h)?;
    Ok(ShootState::from_ode(&series.state(lambda, x_start)?))
}

/// `(u, u', ∂E u, ∂E u')/y^ℓ` for `u = y^{ℓ+1} Σ c_k y^k`.
fn coulomb_series(z: f64, ell: u32, h: f64, e: f64, y: f64) -> Result<[f64; 4], ShootError> {
    let l = ell as f64;
    let h2 = h * h;
    let mut c = vec![1.0];
    let mut dc = vec![0.0];
    let (mut s, mut ds, mut sl, mut dsl) = (y, l + 1.0, 0.0, 0.0);
    let mut pow = 1.0;
    for k in 1..=2 * MAX_SERIES_TERMS {
        let denom = h2 * k as f64 * (k as f64 + 2.0 * l + 1.0);
        let (cm2, dcm2) = if k >= 2 { (c[k - 2], dc[k - 2]) } else { (0.0, 0.0) };
        let ck = (-z * c[k - 1] - e * cm2) / denom;
        let dck = (-z * dc[k - 1] - cm2 - e * dcm2) / denom;
        c.push(ck);
        dc.push(dck);
        pow *= y;
        let sk = l + 1.0 + k as f64;
        let (t, dt) = (ck * pow * y, ck * pow * sk);
        let (tl, dtl) = (dck * pow * y, dck * pow * sk);
        s += t;
        ds += dt;
        sl += tl;
        dsl += dtl;
        let small = |term: f64, total: f64| term.abs() <= SERIES_EPS * total.abs().max(f64::MIN_POSITIVE);
        if k >= 2 && small(t, s) && small(dt, ds) && small(tl, sl) && small(dtl, dsl) {
            return Ok([s, ds, sl, dsl]);
        }
    }
    Err(ShootError::SeriesNotConverged { x_start: y, terms: 2 * MAX_SERIES_TERMS })
}

pub(crate) fn coulomb_state(z: f64, ell: u32, h: f64, e: f64, y: f64) -> Result<OdeState, ShootError> {
    let [u, du, ul, dul] = coulomb_series(z, ell, h, e, y)?;
    let ln_f = ell as f64 * y.ln();
    let exp2 = (ln_f / std::f64::consts::LN_2).floor();
    let m = (ln_f - exp2 * std::f64::consts::LN_2).exp();
    let mut s = OdeState::new(y, [u * m, du * m, ul * m, dul * m, 0.0, 0.0]);
    s.exp2 += exp2 as i64;
    Ok(s)
}

struct ScalarOutcome {
    lambda: f64,
    iterations: usize,
    steps: usize,
}

/// Scalar Newton on `u_λ(end) = 0` for a start state depending on `λ`.
fn newton_scalar(
    eq: Equation<'_>,
    start: &dyn Fn(f64) -> Result<OdeState, ShootError>,
    end: f64,
    h: f64,
    lambda0: f64,
    opts: &SolveOptions,
) -> Result<ScalarOutcome, ShootError> {
    let mut lam = lambda0;
    let mut frozen: Option<ScaledValue> = None;
    let mut steps = 0;
    let mut last_step = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let shot = shoot(eq, lam, h, start(lam)?, end, opts.integrate_tol)?;
        steps += shot.stats.accepted;
        let g = shot.end.component(0);
        if frozen.is_none() || opts.jacobian == JacobianMode::Refreshed {
            let dg = shot.end.component(2);
            if dg.is_zero() {
                return Err(ShootError::Singular { condition: f64::INFINITY });
            }
            frozen = Some(dg);
        }
        let dl = -g.ratio(&frozen.expect("set above"));
        if !dl.is_finite() {
            return Err(ShootError::Singular { condition: f64::INFINITY });
        }
        lam += dl;
        last_step = dl.abs();
        if dl.abs() <= opts.newton_tol * h {
            return Ok(ScalarOutcome { lambda: lam, iterations: it, steps });
        }
    }
    Err(ShootError::NotConverged { iterations: opts.max_iterations, last_step })
}

/// Shared driver for the radial and Coulomb problems: Newton first, then a
/// Sturm bracket if that fails or lands on the wrong mode.
#[allow(clippy::too_many_arguments)]
pub(crate) fn solve_scalar(
    eq: Equation<'_>,
    start: &dyn Fn(f64) -> Result<OdeState, ShootError>,
    end: f64,
    m: u32,
    h: f64,
    lambda0: f64,
    lower: f64,
    scale: f64,
    opts: &SolveOptions,
) -> Result<(f64, usize, usize, bool, usize), ShootError> {
    let count = |lam: f64| -> Result<usize, ShootError> {
        Ok(shoot(eq, lam, h, start(lam)?, end, opts.integrate_tol)?.all_changes())
    };
    let delta = INDEX_PROBE * scale;
    if let Ok(o) = newton_scalar(eq, start, end, h, lambda0, opts) {
        if sturm_index(count, o.lambda, delta)? == Some(m as usize) {
            return Ok((o.lambda, o.iterations, m as usize, false, o.steps));
        }
    }
    let (lo, hi) = sturm_bracket(count, m, lower, lambda0, scale, 1e-7)?;
    let o = newton_scalar(eq, start, end, h, 0.5 * (lo + hi), opts)?;
    check_index(sturm_index(count, o.lambda, delta)?, m)?;
    Ok((o.lambda, o.iterations, m as usize, true, o.steps))
}

/// Scalar Newton on `G(λ) = u_λ(L)` from a Frobenius start.
pub fn newton_solve_radial(
    w: &PotentialSpec,
    length: f64,
    mode: &ModeSpec,
    lambda0: f64,
    opts: &SolveOptions,
) -> Result<RadialSolution, ShootError> {
    let nu = mode.require_nu()?;
    if !(length > 0.0) {
        return Err(ShootError::InvalidDomain(format!("need L > 0, got {length}")));
    }
    let x_start = default_x_start(w, mode.h, length)?;
    let series = FrobeniusSeries::new(w, nu, mode.h)?;
    let start = |lam: f64| series.state(lam, x_start);
    let scale = 2.0 * curvature_at_minimum(w)? * mode.h;
    let (lambda, iterations, sign_changes, bracketed, steps) =
        solve_scalar(Equation::Radial { w, nu }, &start, length, mode.m, mode.h, lambda0, 0.0, scale, opts)?;
    Ok(RadialSolution { lambda, iterations, sign_changes, bracketed, x_start, steps })
}

/// `G(λ)` and `∂λG` for the radial problem.
pub fn boundary_map_radial(
    w: &PotentialSpec,
    length: f64,
    mode: &ModeSpec,
    lambda: f64,
    tol: f64,
) -> Result<BoundaryMap, ShootError> {
    let nu = mode.require_nu()?;
    let x_start = default_x_start(w, mode.h, length)?;
    let series = FrobeniusSeries::new(w, nu, mode.h)?;
    let shot = shoot(Equation::Radial { w, nu }, lambda, mode.h, series.state(lambda, x_start)?, length, tol)?;
    let dg = shot.end.component(2);
    Ok(BoundaryMap { values: vec![shot.end.component(0)], jacobian: vec![vec![dg]], determinant: dg, condition: 1.0 })
}
