//! Adaptive 8th-order Runge–Kutta integration of `u'' = q(x) u` together with
//! its two variational companions
//!
//! ```text
//! u_λ'' = q u_λ + (∂q/∂λ) u,      u_β'' = q u_β,
//! ```
//!
//! stored as `[u, u', u_λ, u_λ', u_β, u_β']` times a shared power of two.
//! Whenever the largest component leaves `[2⁻⁵⁷, 2⁵⁷]` the mantissas are
//! rescaled by an exact power of two and the exponent is accumulated, so
//! solutions growing like `e^{φ/h}` never overflow.

use thiserror::Error;

use crate::dop853::{A, B, C, E3, E5, STAGES};
use crate::potential::PotentialError;
use crate::scaled::{frexp, ScaledValue};

pub const DIM: usize = 6;

const RENORM_HI: f64 = 144115188075855872.0; // 2^57
const RENORM_LO: f64 = 1.0 / RENORM_HI;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 1.0 / 3.0;
const FAC_MAX: f64 = 6.0;
const PI_BETA: f64 = 0.04;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at x = {x} (step {step:e})")]
    StepUnderflow { x: f64, step: f64 },
    #[error("solution became non-finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("coefficient evaluation failed at x = {x}: {source}")]
    Coefficient { x: f64, source: PotentialError },
    #[error("step limit {limit} reached at x = {x}")]
    TooManySteps { x: f64, limit: usize },
    #[error("integration tolerance {0} outside [1e-14, 1e-6]")]
    InvalidTolerance(f64),
}

/// Solution and variational pairs at `x`, all scaled by `2^exp2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeState {
    pub x: f64,
    pub y: [f64; DIM],
    pub exp2: i64,
}

impl OdeState {
    pub fn new(x: f64, y: [f64; DIM]) -> Self {
        let mut s = Self { x, y, exp2: 0 };
        s.renormalize(true);
        s
    }

    pub fn component(&self, i: usize) -> ScaledValue {
        ScaledValue::from_mantissa_exp2(self.y[i], self.exp2)
    }

    pub fn u(&self) -> ScaledValue {
        self.component(0)
    }

    pub fn du(&self) -> ScaledValue {
        self.component(1)
    }

    fn renormalize(&mut self, force: bool) {
        let m = self.y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if m == 0.0 || (!force && (RENORM_LO..=RENORM_HI).contains(&m)) {
            return;
        }
        let (_, e) = frexp(m);
        // multiplication by a power of two is exact
        let factor = crate::scaled::ldexp(1.0, -e);
        for v in self.y.iter_mut() {
            *v *= factor;
        }
        self.exp2 += e;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    /// Relative local error tolerance.
    pub tol: f64,
    /// Characteristic length `ℓ` used to weigh `u` against `u'`.
    pub length_scale: f64,
    /// Characteristic eigenvalue size; `u_λ` errors below `|u|/λ_ref` are not resolved.
    pub lambda_scale: f64,
    pub max_steps: usize,
    /// Upper bound on a single step.
    pub max_step: f64,
}

impl OdeOptions {
    pub fn new(tol: f64, length_scale: f64, lambda_scale: f64) -> Result<Self, OdeError> {
        if !(1e-14..=1e-6).contains(&tol) {
            return Err(OdeError::InvalidTolerance(tol));
        }
        Ok(Self { tol, length_scale, lambda_scale, max_steps: 200_000, max_step: f64::INFINITY })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl std::ops::AddAssign for OdeStats {
    fn add_assign(&mut self, o: Self) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evaluations += o.evaluations;
    }
}

/// Integrates from `start` to `to_x`. `q` is the coefficient of the
/// homogeneous equation, `dq_dlambda` its (constant) derivative in the
/// spectral parameter. `observe` sees every accepted state, including the
/// first and last.
pub fn integrate_linear<Q, O>(
    q: Q,
    dq_dlambda: f64,
    start: OdeState,
    to_x: f64,
    opts: &OdeOptions,
    mut observe: O,
) -> Result<(OdeState, OdeStats), OdeError>
where
    Q: Fn(f64) -> Result<f64, PotentialError>,
    O: FnMut(&OdeState),
{
    let mut stats = OdeStats::default();
    let mut state = start;
    state.renormalize(false);
    observe(&state);
    let span = to_x - state.x;
    if span == 0.0 {
        return Ok((state, stats));
    }
    let dir = span.signum();
    let ell = opts.length_scale;

    let eval_q = |x: f64| q(x).map_err(|source| OdeError::Coefficient { x, source });
    let rhs = |x: f64, y: &[f64; DIM], stats: &mut OdeStats| -> Result<[f64; DIM], OdeError> {
        stats.evaluations += 1;
        let qv = eval_q(x)?;
        Ok([y[1], qv * y[0], y[3], qv * y[2] + dq_dlambda * y[0], y[5], qv * y[4]])
    };

    let mut step = dir * (0.1 * ell).min(span.abs()).min(opts.max_step);
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut k = [[0.0; DIM]; STAGES];

    loop {
        let remaining = to_x - state.x;
        if remaining * dir <= 0.0 {
            break;
        }
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(OdeError::TooManySteps { x: state.x, limit: opts.max_steps });
        }
        // never take a step longer than the local oscillation length
        let q_here = eval_q(state.x)?;
        let local_cap = if q_here < 0.0 { 1.0 / (-q_here).sqrt() } else { f64::INFINITY };
        let cap = opts.max_step.min(local_cap);
        if step.abs() > cap {
            step = dir * cap;
        }
        let last = step.abs() >= remaining.abs() * (1.0 - 1e-12);
        if last {
            step = remaining;
        }
        if step.abs() <= 1e-15 * state.x.abs().max(ell) {
            return Err(OdeError::StepUnderflow { x: state.x, step });
        }

        for i in 0..STAGES {
            let mut yi = state.y;
            for (j, kj) in k.iter().enumerate().take(i) {
                let a = A[i][j];
                if a != 0.0 {
                    for d in 0..DIM {
                        yi[d] += step * a * kj[d];
                    }
                }
            }
            k[i] = rhs(state.x + C[i] * step, &yi, &mut stats)?;
        }
        let mut ynew = state.y;
        let mut e5 = [0.0; DIM];
        let mut e3 = [0.0; DIM];
        for (i, ki) in k.iter().enumerate() {
            for d in 0..DIM {
                ynew[d] += step * B[i] * ki[d];
                e5[d] += E5[i] * ki[d];
                e3[d] += E3[i] * ki[d];
            }
        }
        if ynew.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::NonFinite { x: state.x + step });
        }

        let pair_mag = |p: usize| {
            let (a, b) = (2 * p, 2 * p + 1);
            state.y[a].abs().max(ynew[a].abs()).max(ell * state.y[b].abs().max(ynew[b].abs()))
        };
        let (m0, m1, m2) = (pair_mag(0), pair_mag(1), pair_mag(2));
        let floors = [m0, m1.max(m0 / opts.lambda_scale), m2];
        let (mut s5, mut s3) = (0.0, 0.0);
        for (p, floor) in floors.iter().enumerate() {
            let sc = opts.tol * floor.max(f64::MIN_POSITIVE);
            for (d, scd) in [(2 * p, sc), (2 * p + 1, sc / ell)] {
                s5 += (e5[d] / scd).powi(2);
                s3 += (e3[d] / scd).powi(2);
            }
        }
        let deno = s5 + 0.01 * s3;
        let err = if deno > 0.0 { step.abs() * s5 / (DIM as f64 * deno).sqrt() } else { 0.0 };

        let fac11 = err.powf(0.125 - PI_BETA * 0.2);
        let mut fac = fac11 / facold.powf(PI_BETA);
        fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);

        if err <= 1.0 {
            facold = err.max(1e-4);
            stats.accepted += 1;
            state.x = if last { to_x } else { state.x + step };
            state.y = ynew;
            state.renormalize(false);
            observe(&state);
            let mut next = step / fac;
            if last_rejected && next.abs() > step.abs() {
                next = step;
            }
            last_rejected = false;
            step = next;
            if last {
                break;
            }
        } else {
            stats.rejected += 1;
            last_rejected = true;
            step /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }
    Ok((state, stats))
}
