//! Adaptive Gauss–Legendre quadrature on 15-point panels with interval bisection.

use std::sync::OnceLock;

use thiserror::Error;

pub const PANEL_POINTS: usize = 15;
const MAX_DEPTH: u32 = 48;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("quadrature did not converge on [{a}, {b}] (estimated error {error:e})")]
    NoConvergence { a: f64, b: f64, error: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

struct Rule {
    nodes: [f64; PANEL_POINTS],
    weights: [f64; PANEL_POINTS],
}

/// Nodes and weights of the Gauss–Legendre rule on [-1, 1], by Newton
/// iteration on the Legendre polynomial.
fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = PANEL_POINTS;
        let mut nodes = [0.0; PANEL_POINTS];
        let mut weights = [0.0; PANEL_POINTS];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Rule { nodes, weights }
    })
}

/// `(P_n(x), P_n'(x))` via the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<f64, QuadratureError> {
    let r = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in r.nodes.iter().zip(r.weights.iter()) {
        let t = mid + half * x;
        let v = f(t);
        if !v.is_finite() {
            return Err(QuadratureError::NonFinite { x: t });
        }
        sum += w * v;
    }
    Ok(sum * half)
}

/// Integrates `f` over `[a, b]` (either orientation) to absolute error
/// `tol · (1 + |I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature, QuadratureError> {
    if a == b {
        return Ok(Quadrature { value: 0.0, error_estimate: 0.0, panels: 0 });
    }
    let whole = panel(&mut f, a, b)?;
    let mut stack = vec![(a, b, whole, 0u32)];
    let mut total = 0.0;
    let mut err_total = 0.0;
    let mut panels = 1;
    let span = (b - a).abs();
    // The first pass establishes the scale of |I| for the mixed tolerance.
    let mut scale = whole.abs();
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(&mut f, lo, mid)?;
        let right = panel(&mut f, mid, hi)?;
        panels += 2;
        let fine = left + right;
        let err = (fine - coarse).abs();
        let local_tol = tol * (1.0 + scale) * ((hi - lo).abs() / span);
        if err <= local_tol || err <= 4.0 * f64::EPSILON * fine.abs() {
            total += fine;
            err_total += err;
            scale = scale.max(total.abs());
        } else if depth >= MAX_DEPTH {
            return Err(QuadratureError::NoConvergence { a: lo, b: hi, error: err });
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(Quadrature { value: total, error_estimate: err_total, panels })
}
