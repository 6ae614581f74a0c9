//! Agmon distance `φ(x) = sgn(x) ∫₀ˣ √V` and the leading WKB amplitude `a₀`
//! for the line and radial problems.
//!
//! The transport integrand for `a₀` has a simple pole at the well bottom
//! (`m/t` on the line, `2m/t` radially). It is split off analytically and the
//! continuous remainder is integrated by adaptive quadrature.

use std::cell::Cell;

use thiserror::Error;

use crate::potential::{curvature_at_minimum, ConfinementDomain, PotentialError, PotentialSpec};
use crate::quadrature::{integrate, QuadratureError};

/// Default quadrature tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Factor by which the confinement domain is widened to obtain the working
/// domain on which the amplitude is evaluated.
pub const WORKING_DOMAIN_FACTOR: f64 = 1.25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgmonError {
    #[error("potential is negative at x = {x} (V = {value})")]
    NegativePotential { x: f64, value: f64 },
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error("x = {x} lies outside the working domain ({lower}, {upper})")]
    OutsideWorkingDomain { x: f64, lower: f64, upper: f64 },
    #[error("quadrature tolerance {0} outside [1e-14, 1e-6]")]
    InvalidTolerance(f64),
    #[error("the amplitude is undefined at the well bottom x = 0")]
    AtOrigin,
}

fn check_tol(tol: f64) -> Result<(), AgmonError> {
    if (1e-14..=1e-6).contains(&tol) {
        Ok(())
    } else {
        Err(AgmonError::InvalidTolerance(tol))
    }
}

/// `√(V(t)/t²)`, extended by `ω` at `t = 0`.
fn sqrt_q(p: &PotentialSpec, omega: f64, t: f64) -> Result<f64, AgmonError> {
    if t == 0.0 {
        return Ok(omega);
    }
    let v = p.evaluate(t)?;
    if v < 0.0 {
        return Err(AgmonError::NegativePotential { x: t, value: v });
    }
    Ok((v / (t * t)).sqrt())
}

/// Runs a quadrature whose integrand can fail, surfacing the first failure.
fn integrate_fallible(
    mut f: impl FnMut(f64) -> Result<f64, AgmonError>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, AgmonError> {
    let failure: Cell<Option<AgmonError>> = Cell::new(None);
    let result = integrate(
        |t| match f(t) {
            Ok(v) => v,
            Err(e) => {
                let prev = failure.take();
                failure.set(prev.or(Some(e)));
                f64::NAN
            }
        },
        a,
        b,
        tol,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(result?.value)
}

/// `φ(x)`; even under `x → −x` only when `V` is.
pub fn agmon_distance(p: &PotentialSpec, x: f64, tol: f64) -> Result<f64, AgmonError> {
    check_tol(tol)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let omega = curvature_at_minimum(p)?;
    let integral = integrate_fallible(|t| Ok(t.abs() * sqrt_q(p, omega, t)?), 0.0, x, tol)?;
    Ok(integral * x.signum())
}

/// `φ'(x) = sgn(x)√V(x)`.
pub fn agmon_derivative(p: &PotentialSpec, x: f64) -> Result<f64, AgmonError> {
    let omega = curvature_at_minimum(p)?;
    Ok(x * sqrt_q(p, omega, x)?)
}

/// `(√q, φ'')` at `t ≠ 0`, where `φ' = t√q`.
fn local_geometry(p: &PotentialSpec, omega: f64, t: f64) -> Result<(f64, f64), AgmonError> {
    let sq = sqrt_q(p, omega, t)?;
    let dv = p.derivative1(t)?;
    Ok((sq, dv / (2.0 * t * sq)))
}

/// Cubic through `f(s), f(2s), f(3s), f(4s)` evaluated at `t`.
fn extrapolate(values: &[f64; 4], s: f64, t: f64) -> f64 {
    let u = t / s;
    let nodes = [1.0, 2.0, 3.0, 4.0];
    let mut acc = 0.0;
    for (i, &ni) in nodes.iter().enumerate() {
        let mut w = 1.0;
        for (j, &nj) in nodes.iter().enumerate() {
            if i != j {
                w *= (u - nj) / (ni - nj);
            }
        }
        acc += w * values[i];
    }
    acc
}

/// `exp(∫₀ˣ r)` for a remainder `r` that is continuous at 0 but evaluated
/// with cancellation there; below `|t| < 1e-3|x|` it is replaced by a cubic
/// extrapolation from four points further out.
fn regularized_exp_integral(r: impl Fn(f64) -> Result<f64, AgmonError>, x: f64, tol: f64) -> Result<f64, AgmonError> {
    let s = 1e-3 * x;
    let anchors = [r(s)?, r(2.0 * s)?, r(3.0 * s)?, r(4.0 * s)?];
    let integrand = |t: f64| {
        if t.abs() < s.abs() {
            Ok(extrapolate(&anchors, s, t))
        } else {
            r(t)
        }
    };
    let integral = integrate_fallible(integrand, 0.0, x, tol)?;
    Ok(integral.exp())
}

/// Remainder of the line transport integrand after removing `m/t`.
fn remainder_line(p: &PotentialSpec, omega: f64, m: u32, t: f64) -> Result<f64, AgmonError> {
    let (sq, phi2) = local_geometry(p, omega, t)?;
    let m = m as f64;
    Ok((omega * (2.0 * m + 1.0) - phi2 - 2.0 * m * sq) / (2.0 * t * sq))
}

/// Remainder of the radial transport integrand after removing `2m/t`.
fn remainder_radial(p: &PotentialSpec, omega: f64, m: u32, nu: f64, t: f64) -> Result<f64, AgmonError> {
    let (sq, phi2) = local_geometry(p, omega, t)?;
    let m = m as f64;
    let num = 2.0 * omega * (2.0 * m + 1.0 + nu) - phi2 - (2.0 * nu + 1.0) * sq - 4.0 * m * sq;
    Ok(num / (2.0 * t * sq))
}

/// Leading line amplitude `|a₀(x)| = |x|^m · exp(∫₀ˣ r)`.
pub fn prefactor_a0_line(p: &PotentialSpec, m: u32, x: f64) -> Result<f64, AgmonError> {
    prefactor_a0_line_tol(p, m, x, DEFAULT_TOL)
}

pub fn prefactor_a0_line_tol(p: &PotentialSpec, m: u32, x: f64, tol: f64) -> Result<f64, AgmonError> {
    check_tol(tol)?;
    if x == 0.0 {
        return Err(AgmonError::AtOrigin);
    }
    let omega = curvature_at_minimum(p)?;
    let e = regularized_exp_integral(|t| remainder_line(p, omega, m, t), x, tol)?;
    Ok(x.abs().powi(m as i32) * e)
}

/// Leading radial amplitude `a₀(x) = x^{2m} · exp(∫₀ˣ r)`.
pub fn prefactor_a0_radial(w: &PotentialSpec, m: u32, nu: f64, x: f64) -> Result<f64, AgmonError> {
    prefactor_a0_radial_tol(w, m, nu, x, DEFAULT_TOL)
}

pub fn prefactor_a0_radial_tol(w: &PotentialSpec, m: u32, nu: f64, x: f64, tol: f64) -> Result<f64, AgmonError> {
    check_tol(tol)?;
    if !(x > 0.0) {
        return Err(AgmonError::AtOrigin);
    }
    let omega = curvature_at_minimum(w)?;
    let e = regularized_exp_integral(|t| remainder_radial(w, omega, m, nu, t), x, tol)?;
    Ok(x.powi(2 * m as i32) * e)
}

/// `φ`, `φ'` and `a₀` restricted to the working domain (the confinement
/// domain widened by 25%).
#[derive(Debug, Clone)]
pub struct AgmonProfile {
    potential: PotentialSpec,
    lower: f64,
    upper: f64,
    tol: f64,
}

impl AgmonProfile {
    pub fn new(potential: &PotentialSpec, domain: &ConfinementDomain, tol: f64) -> Result<Self, AgmonError> {
        check_tol(tol)?;
        curvature_at_minimum(potential)?;
        let (a, b) = domain.bounds();
        Ok(Self {
            potential: potential.clone(),
            lower: a * WORKING_DOMAIN_FACTOR,
            upper: b * WORKING_DOMAIN_FACTOR,
            tol,
        })
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn quadrature_tolerance(&self) -> f64 {
        self.tol
    }

    pub fn working_domain(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    fn check(&self, x: f64) -> Result<(), AgmonError> {
        if x < self.lower || x > self.upper {
            return Err(AgmonError::OutsideWorkingDomain { x, lower: self.lower, upper: self.upper });
        }
        Ok(())
    }

    pub fn phi(&self, x: f64) -> Result<f64, AgmonError> {
        self.check(x)?;
        agmon_distance(&self.potential, x, self.tol)
    }

    pub fn phi_prime(&self, x: f64) -> Result<f64, AgmonError> {
        self.check(x)?;
        agmon_derivative(&self.potential, x)
    }

    pub fn a0_line(&self, m: u32, x: f64) -> Result<f64, AgmonError> {
        self.check(x)?;
        prefactor_a0_line_tol(&self.potential, m, x, self.tol)
    }

    pub fn a0_radial(&self, m: u32, nu: f64, x: f64) -> Result<f64, AgmonError> {
        self.check(x)?;
        prefactor_a0_radial_tol(&self.potential, m, nu, x, self.tol)
    }
}
