//! Leading-order predictions for the confinement shift `λ^Ω − λ⁰` and the
//! closed forms for the confined oscillators and confined hydrogen.
//!
//! Every exponentially small quantity is carried both as a plain `f64`
//! (which may underflow to zero) and as its natural logarithm.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agmon::{AgmonError, AgmonProfile, DEFAULT_TOL};
use crate::potential::{curvature_at_minimum, ConfinementDomain, PotentialError, PotentialSpec};
use crate::shooting::ModeSpec;
use crate::special::{ln_factorial, ln_gamma};
use crate::spectra::HydrogenSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error(transparent)]
    Agmon(#[from] AgmonError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("invalid request: {0}")]
    Invalid(String),
}

/// Contribution of one wall to the line shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointShift {
    pub x: f64,
    pub phi: f64,
    pub s0: f64,
    pub value: f64,
    pub log_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftPrediction {
    pub leading_value: f64,
    /// `ln(leading_value)`, finite even when the value underflows.
    pub log_value: f64,
    /// Decay exponent of the dominant term, e.g. `2φ(r)/h`.
    pub exponent: f64,
    /// Power of `h` multiplying the exponential.
    pub prefactor_power: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_endpoint: Option<[EndpointShift; 2]>,
}

/// A closed-form eigenvalue split into its reference level and its shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub reference: f64,
    pub shift: f64,
    pub log_shift: f64,
    pub value: f64,
    /// Set when the parameters are outside the regime where the leading term is meaningful.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ClosedForm {
    fn new(reference: f64, log_shift: f64, warning: Option<String>) -> Self {
        let shift = log_shift.exp();
        Self { reference, shift, log_shift, value: reference + shift, warning }
    }
}

fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

fn require_line(mode: &ModeSpec) -> Result<(), AsymptoticsError> {
    match mode.nu {
        None => Ok(()),
        Some(_) => Err(AsymptoticsError::Invalid("line prediction requested for a radial mode".into())),
    }
}

fn require_nu(mode: &ModeSpec) -> Result<f64, AsymptoticsError> {
    mode.nu.ok_or_else(|| AsymptoticsError::Invalid("radial prediction needs nu".into()))
}

/// `h^{½−m} Σ± e^{−2φ(r±)/h} s₀±` with
/// `s₀± = 2^{m+1}/(m!√π) ω^{m+½} √V(r±) a₀(r±)²`.
pub fn shift_leading_line(
    p: &PotentialSpec,
    domain: &ConfinementDomain,
    mode: &ModeSpec,
) -> Result<ShiftPrediction, AsymptoticsError> {
    require_line(mode)?;
    let (lower, upper) = match *domain {
        ConfinementDomain::Interval { lower, upper } => (lower, upper),
        ConfinementDomain::Radial { .. } => {
            return Err(AsymptoticsError::Invalid("line prediction needs an interval".into()))
        }
    };
    let profile = AgmonProfile::new(p, domain, DEFAULT_TOL)?;
    let omega = curvature_at_minimum(p)?;
    let (m, h) = (mode.m, mode.h);
    let power = 0.5 - m as f64;
    let ln_const = (m as f64 + 1.0) * 2f64.ln() - ln_factorial(m) - 0.5 * std::f64::consts::PI.ln()
        + (m as f64 + 0.5) * omega.ln();
    let endpoint = |x: f64| -> Result<EndpointShift, AsymptoticsError> {
        let phi = profile.phi(x)?;
        let v = p.evaluate(x)?;
        let a0 = profile.a0_line(m, x)?;
        let ln_s0 = ln_const + 0.5 * v.ln() + 2.0 * a0.ln();
        let log_value = power * h.ln() - 2.0 * phi / h + ln_s0;
        Ok(EndpointShift { x, phi, s0: ln_s0.exp(), value: log_value.exp(), log_value })
    };
    let minus = endpoint(lower)?;
    let plus = endpoint(upper)?;
    let log_value = ln_add_exp(minus.log_value, plus.log_value);
    Ok(ShiftPrediction {
        leading_value: log_value.exp(),
        log_value,
        exponent: 2.0 * minus.phi.min(plus.phi) / h,
        prefactor_power: power,
        per_endpoint: Some([minus, plus]),
    })
}

/// `h^{−ν−2m} e^{−2φ(L)/h} s₀(ν)` with
/// `s₀(ν) = 4√W(L)/(Γ(1+m+ν) m!) ω^{2m+1+ν} L^{1+2ν} a₀(L)²`.
pub fn shift_leading_radial(
    w: &PotentialSpec,
    length: f64,
    mode: &ModeSpec,
) -> Result<ShiftPrediction, AsymptoticsError> {
    let nu = require_nu(mode)?;
    let domain = ConfinementDomain::radial(length)?;
    let profile = AgmonProfile::new(w, &domain, DEFAULT_TOL)?;
    let omega = curvature_at_minimum(w)?;
    let (m, h) = (mode.m, mode.h);
    let mf = m as f64;
    let phi = profile.phi(length)?;
    let a0 = profile.a0_radial(m, nu, length)?;
    let ln_s0 = 4f64.ln() + 0.5 * w.evaluate(length)?.ln() - ln_gamma(1.0 + mf + nu) - ln_factorial(m)
        + (2.0 * mf + 1.0 + nu) * omega.ln()
        + (1.0 + 2.0 * nu) * length.ln()
        + 2.0 * a0.ln();
    let power = -nu - 2.0 * mf;
    let log_value = power * h.ln() - 2.0 * phi / h + ln_s0;
    Ok(ShiftPrediction {
        leading_value: log_value.exp(),
        log_value,
        exponent: 2.0 * phi / h,
        prefactor_power: power,
        per_endpoint: None,
    })
}

/// `V = x²` on `(−R, R)`:
/// `(2m+1)h + h^{½−m} 2^{2+m}/(m!√π) R^{2m+1} e^{−R²/h}`.
pub fn ho_confined_closed_form(mode: &ModeSpec, r: f64) -> Result<ClosedForm, AsymptoticsError> {
    require_line(mode)?;
    if !(r > 0.0) {
        return Err(AsymptoticsError::Invalid(format!("need R > 0, got {r}")));
    }
    let (m, h) = (mode.m, mode.h);
    let mf = m as f64;
    let log_shift = (0.5 - mf) * h.ln() + (2.0 + mf) * 2f64.ln() - ln_factorial(m) - 0.5 * std::f64::consts::PI.ln()
        + (2.0 * mf + 1.0) * r.ln()
        - r * r / h;
    let warning = (h / (r * r) >= 1.0).then(|| format!("h/R^2 = {} is not small", h / (r * r)));
    Ok(ClosedForm::new((2.0 * mf + 1.0) * h, log_shift, warning))
}

/// `W = x²` on `(0, L)`:
/// `2(2m+1+ν)h + 4h^{−2m−ν} L^{2(2m+1+ν)}/(m! Γ(1+m+ν)) e^{−L²/h}`.
pub fn iso_ho_confined_closed_form(mode: &ModeSpec, length: f64) -> Result<ClosedForm, AsymptoticsError> {
    let nu = require_nu(mode)?;
    if !(length > 0.0) {
        return Err(AsymptoticsError::Invalid(format!("need L > 0, got {length}")));
    }
    let (m, h) = (mode.m, mode.h);
    let mf = m as f64;
    let log_shift = 4f64.ln() - (2.0 * mf + nu) * h.ln() + 2.0 * (2.0 * mf + 1.0 + nu) * length.ln()
        - ln_factorial(m)
        - ln_gamma(1.0 + mf + nu)
        - length * length / h;
    let warning = (h / (length * length) >= 1.0).then(|| format!("h/L^2 = {} is not small", h / (length * length)));
    Ok(ClosedForm::new(2.0 * (2.0 * mf + 1.0 + nu) * h, log_shift, warning))
}

fn validated(spec: &HydrogenSpec) -> Result<(), AsymptoticsError> {
    spec.validate().map_err(|e| AsymptoticsError::Invalid(e.to_string()))
}

/// Leading hydrogen shift as a prediction record.
pub fn hydrogen_shift_leading(spec: &HydrogenSpec) -> Result<ShiftPrediction, AsymptoticsError> {
    let c = hydrogen_confined_closed_form(spec)?;
    let n = spec.n as f64;
    Ok(ShiftPrediction {
        leading_value: c.shift,
        log_value: c.log_shift,
        exponent: spec.z * spec.r / (n * spec.h * spec.h),
        prefactor_power: -4.0 * n - 2.0,
        per_endpoint: None,
    })
}

/// `E_n(R) ≈ −Z²/(4n²h²) + 2^{2n+1} h^{−4n−2} R^{2n}/(n^{2n+3}(n−ℓ−1)!(n+ℓ)!) (2/Z)^{−2n−2} e^{−ZR/(nh²)}`.
pub fn hydrogen_confined_closed_form(spec: &HydrogenSpec) -> Result<ClosedForm, AsymptoticsError> {
    validated(spec)?;
    let HydrogenSpec { n, ell, z, h, r } = *spec;
    let nf = n as f64;
    let log_shift = (2.0 * nf + 1.0) * 2f64.ln() - (4.0 * nf + 2.0) * h.ln() + 2.0 * nf * r.ln()
        - (2.0 * nf + 3.0) * nf.ln()
        - ln_factorial(n - ell - 1)
        - ln_factorial(n + ell)
        + (2.0 * nf + 2.0) * (z / 2.0).ln()
        - z * r / (nf * h * h);
    let ratio = h * h / r;
    let warning = (ratio >= 1.0).then(|| format!("h^2/R = {ratio} is not small"));
    Ok(ClosedForm::new(spec.unconfined_energy(), log_shift, warning))
}

/// The intermediate `k(R) = nh + 2^{2n} h^{−4n+1} R^{2n}/(n^{2n}(n−ℓ−1)!(n+ℓ)!) e^{−2R/(nh²)}`
/// at charge 2 (so that `E = −1/k²`), for the box `ZR/2`. Returns `(nh, correction)`.
pub fn hydrogen_k_bootstrap(spec: &HydrogenSpec) -> Result<(f64, f64), AsymptoticsError> {
    validated(spec)?;
    let HydrogenSpec { n, ell, z, h, r } = *spec;
    let nf = n as f64;
    let r2 = z * r / 2.0;
    let log_delta = 2.0 * nf * 2f64.ln() + (1.0 - 4.0 * nf) * h.ln() + 2.0 * nf * r2.ln()
        - 2.0 * nf * nf.ln()
        - ln_factorial(n - ell - 1)
        - ln_factorial(n + ell)
        - 2.0 * r2 / (nf * h * h);
    Ok((nf * h, log_delta.exp()))
}
