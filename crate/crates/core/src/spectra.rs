//! Eigenvalue services built on the shooting engine: unconfined reference
//! eigenvalues, confined eigenvalues, confined hydrogen and a finite
//! difference cross-check.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agmon::{agmon_distance, AgmonError};
use crate::potential::{curvature_at_minimum, ConfinementDomain, PotentialError, PotentialSpec};
use crate::shooting::{
    coulomb_state, newton_solve_line, newton_solve_radial, solve_scalar, Equation, ModeSpec, ShootError, SolveOptions,
};
use crate::tridiag::kth_eigenvalue;

/// Exponent `2φ(X)/h` reached by the boxes standing in for the whole line.
pub const UNCONFINED_EXPONENT: f64 = 120.0;
/// Largest box half-width tried when emulating an unconfined problem.
pub const MAX_BOX_EXTENT: f64 = 1e3;
pub const MIN_GRID: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error(transparent)]
    Shoot(#[from] ShootError),
    #[error(transparent)]
    Agmon(#[from] AgmonError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("box half-width would exceed {bound}; the potential grows too slowly for h = {h}")]
    BoxTooLarge { bound: f64, h: f64 },
    #[error("eigenvalue changed by {change:e} when the box grew by 25%")]
    BoxUnstable { change: f64 },
    #[error("grid of {grid_n} cells is too coarse: {reason}")]
    GridTooCoarse { grid_n: usize, reason: String },
    #[error("invalid hydrogen problem: {0}")]
    InvalidHydrogen(String),
    #[error("{0}")]
    InvalidRequest(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Shooting,
    FiniteDifference,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    /// Convergence bound on the value (Newton threshold or Richardson estimate).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_extent: Option<(f64, f64)>,
    #[serde(default)]
    pub bracketed: bool,
    #[serde(default)]
    pub reduced_accuracy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub index_m: u32,
    pub value: f64,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

/// Confined hydrogen: `−h²u'' + h²ℓ(ℓ+1)y⁻²u − (Z/y)u = E u` on `(0, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydrogenSpec {
    pub n: u32,
    pub ell: u32,
    #[serde(rename = "Z")]
    pub z: f64,
    pub h: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

impl HydrogenSpec {
    pub fn new(n: u32, ell: u32, z: f64, h: f64, r: f64) -> Result<Self, SpectraError> {
        let s = Self { n, ell, z, h, r };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SpectraError> {
        if self.n < self.ell + 1 {
            return Err(SpectraError::InvalidHydrogen(format!(
                "need n >= l + 1, got n = {}, l = {}",
                self.n, self.ell
            )));
        }
        for (name, v) in [("Z", self.z), ("h", self.h), ("R", self.r)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SpectraError::InvalidHydrogen(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Number of radial nodes, `n − ℓ − 1`.
    pub fn radial_index(&self) -> u32 {
        self.n - self.ell - 1
    }

    /// `E_n = −Z²/(4n²h²)`.
    pub fn unconfined_energy(&self) -> f64 {
        -self.z * self.z / (4.0 * (self.n as f64).powi(2) * self.h * self.h)
    }
}

/// `ω(2m+1)h` on the line, `2ω(2m+1+ν)h` radially.
pub fn harmonic_approximation(p: &PotentialSpec, mode: &ModeSpec) -> Result<f64, SpectraError> {
    let omega = curvature_at_minimum(p)?;
    let m = mode.m as f64;
    Ok(match mode.nu {
        None => omega * (2.0 * m + 1.0) * mode.h,
        Some(nu) => 2.0 * omega * (2.0 * m + 1.0 + nu) * mode.h,
    })
}

fn shooting_pair(m: u32, value: f64, iterations: usize, steps: usize, bracketed: bool, residual: f64) -> Eigenpair {
    Eigenpair {
        index_m: m,
        value,
        method: Method::Shooting,
        diagnostics: Diagnostics {
            iterations: Some(iterations),
            residual: Some(residual),
            integrator_steps: Some(steps),
            bracketed,
            ..Diagnostics::default()
        },
    }
}

pub fn confined_eigenvalue(
    p: &PotentialSpec,
    domain: &ConfinementDomain,
    mode: &ModeSpec,
) -> Result<Eigenpair, SpectraError> {
    confined_eigenvalue_with(p, domain, mode, &SolveOptions::default())
}

pub fn confined_eigenvalue_with(
    p: &PotentialSpec,
    domain: &ConfinementDomain,
    mode: &ModeSpec,
    opts: &SolveOptions,
) -> Result<Eigenpair, SpectraError> {
    let guess = harmonic_approximation(p, mode)?;
    let residual = opts.newton_tol * mode.h;
    match (*domain, mode.nu) {
        (ConfinementDomain::Interval { .. }, None) => {
            let s = newton_solve_line(p, domain, mode, guess, 0.0, opts)?;
            Ok(shooting_pair(mode.m, s.lambda, s.iterations, s.steps, s.bracketed, residual))
        }
        (ConfinementDomain::Radial { length }, Some(_)) => {
            let s = newton_solve_radial(p, length, mode, guess, opts)?;
            Ok(shooting_pair(mode.m, s.lambda, s.iterations, s.steps, s.bracketed, residual))
        }
        (ConfinementDomain::Interval { .. }, Some(_)) => {
            Err(SpectraError::InvalidRequest("nu given for an interval domain".into()))
        }
        (ConfinementDomain::Radial { .. }, None) => Err(SpectraError::InvalidRequest("radial box needs nu".into())),
    }
}

/// Smallest `|X|` on the side `sign` with `φ(X) ≥ target`.
fn reach(p: &PotentialSpec, sign: f64, target: f64, h: f64, bound: f64) -> Result<f64, SpectraError> {
    let omega = curvature_at_minimum(p)?;
    let tol = 1e-10;
    let mut hi = h.sqrt() / omega;
    while agmon_distance(p, sign * hi, tol)? < target {
        hi *= 2.0;
        if hi > bound {
            return Err(SpectraError::BoxTooLarge { bound, h });
        }
    }
    let mut lo = hi / 2.0;
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if agmon_distance(p, sign * mid, tol)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Box on which the confinement shift is below `e^{−120}`, with half-widths
/// at most `bound`.
pub fn unconfined_box(p: &PotentialSpec, mode: &ModeSpec, bound: f64) -> Result<ConfinementDomain, SpectraError> {
    let target = 0.5 * UNCONFINED_EXPONENT * mode.h;
    let h = mode.h;
    Ok(match mode.nu {
        None => ConfinementDomain::interval(-reach(p, -1.0, target, h, bound)?, reach(p, 1.0, target, h, bound)?)?,
        Some(_) => ConfinementDomain::radial(reach(p, 1.0, target, h, bound)?)?,
    })
}

/// `λ⁰_m`: closed form for the exact oscillator, otherwise shooting on a box
/// large enough that confinement is invisible in double precision,
/// confirmed on a box 25% larger.
pub fn unconfined_eigenvalue(p: &PotentialSpec, mode: &ModeSpec) -> Result<Eigenpair, SpectraError> {
    unconfined_eigenvalue_with(p, mode, &SolveOptions::default())
}

pub fn unconfined_eigenvalue_with(
    p: &PotentialSpec,
    mode: &ModeSpec,
    opts: &SolveOptions,
) -> Result<Eigenpair, SpectraError> {
    unconfined_eigenvalue_bounded(p, mode, opts, MAX_BOX_EXTENT)
}

/// As [`unconfined_eigenvalue_with`], failing once the box half-width would exceed `bound`.
pub fn unconfined_eigenvalue_bounded(
    p: &PotentialSpec,
    mode: &ModeSpec,
    opts: &SolveOptions,
    bound: f64,
) -> Result<Eigenpair, SpectraError> {
    if p.is_pure_harmonic() {
        return Ok(Eigenpair {
            index_m: mode.m,
            value: harmonic_approximation(p, mode)?,
            method: Method::ClosedForm,
            diagnostics: Diagnostics::default(),
        });
    }
    let domain = unconfined_box(p, mode, bound)?;
    let small = confined_eigenvalue_with(p, &domain, mode, opts)?;
    let wider = domain.scaled(1.25);
    let mut big = confined_eigenvalue_with(p, &wider, mode, opts)?;
    let change = (big.value - small.value).abs();
    if change > 10.0 * opts.newton_tol * mode.h + 1e-14 * big.value.abs() {
        return Err(SpectraError::BoxUnstable { change });
    }
    big.diagnostics.box_extent = Some(wider.bounds());
    Ok(big)
}

fn fd_matrix(
    p: &PotentialSpec,
    domain: &ConfinementDomain,
    mode: &ModeSpec,
    n: usize,
) -> Result<(Vec<f64>, Vec<f64>), SpectraError> {
    let h2 = mode.h * mode.h;
    let (a, b) = domain.bounds();
    let dx = (b - a) / n as f64;
    let kin = h2 / (dx * dx);
    let centrifugal = mode.nu.map(|nu| h2 * (nu * nu - 0.25));
    let mut diag = Vec::with_capacity(n - 1);
    for i in 1..n {
        let x = a + i as f64 * dx;
        let mut d = 2.0 * kin + p.evaluate(x)?;
        if let Some(c) = centrifugal {
            d += c / (x * x);
        }
        diag.push(d);
    }
    Ok((diag, vec![-kin; n - 2]))
}

/// Lowest `count` eigenvalues of the three-point discretization on `grid_n`
/// and `2·grid_n` cells, Richardson-extrapolated.
pub fn fd_oracle(
    p: &PotentialSpec,
    domain: &ConfinementDomain,
    mode: &ModeSpec,
    grid_n: usize,
    count: usize,
) -> Result<Vec<Eigenpair>, SpectraError> {
    if grid_n < MIN_GRID {
        return Err(SpectraError::GridTooCoarse { grid_n, reason: format!("need at least {MIN_GRID} cells") });
    }
    if count == 0 || count >= grid_n / 4 {
        return Err(SpectraError::InvalidRequest(format!("count must be in 1..{}", grid_n / 4)));
    }
    match (domain, mode.nu) {
        (ConfinementDomain::Interval { .. }, None) | (ConfinementDomain::Radial { .. }, Some(_)) => {}
        _ => return Err(SpectraError::InvalidRequest("domain and mode disagree on line vs radial".into())),
    }
    let (d1, o1) = fd_matrix(p, domain, mode, grid_n)?;
    let (d2, o2) = fd_matrix(p, domain, mode, 2 * grid_n)?;
    let reduced = mode.nu.is_some_and(|nu| nu < 0.5);
    let mut out: Vec<Eigenpair> = Vec::with_capacity(count);
    for k in 0..count {
        let coarse = kth_eigenvalue(&d1, &o1, k);
        let fine = kth_eigenvalue(&d2, &o2, k);
        let value = (4.0 * fine - coarse) / 3.0;
        if let Some(prev) = out.last() {
            let gap = value - prev.value;
            if !(gap > 0.0) || (fine - coarse).abs() > 0.1 * gap {
                return Err(SpectraError::GridTooCoarse {
                    grid_n,
                    reason: format!("eigenvalue ordering unstable at index {k}"),
                });
            }
        }
        out.push(Eigenpair {
            index_m: k as u32,
            value,
            method: Method::FiniteDifference,
            diagnostics: Diagnostics {
                residual: Some((fine - coarse).abs() / 3.0),
                grid_n: Some(grid_n),
                reduced_accuracy: reduced,
                ..Diagnostics::default()
            },
        });
    }
    Ok(out)
}

/// `E_n(R)` by shooting on the Coulomb equation from its regular series at
/// the origin.
pub fn hydrogen_confined(spec: &HydrogenSpec) -> Result<Eigenpair, SpectraError> {
    hydrogen_confined_with(spec, &SolveOptions::default())
}

pub fn hydrogen_confined_with(spec: &HydrogenSpec, opts: &SolveOptions) -> Result<Eigenpair, SpectraError> {
    spec.validate()?;
    let HydrogenSpec { n, ell, z, h, r } = *spec;
    let m = spec.radial_index();
    let bohr = h * h / z;
    let y_start = (1e-2 * bohr).min(r / 100.0);
    let start = |e: f64| coulomb_state(z, ell, h, e, y_start);
    let e_n = spec.unconfined_energy();
    // every confined level of angular momentum ℓ lies above the unconfined ground level
    let ground = -z * z / (4.0 * ((ell + 1) as f64).powi(2) * h * h);
    let lower = ground * (1.0 + 1e-6);
    let (value, iterations, _, bracketed, steps) =
        solve_scalar(Equation::Coulomb { z, ell }, &start, r, m, h, e_n, lower, e_n.abs(), opts)?;
    let _ = n;
    Ok(shooting_pair(m, value, iterations, steps, bracketed, opts.newton_tol * h))
}

/// `E_n(R)` through the quadratic substitution `y = k x²/2` that turns the
/// Coulomb problem into a confined oscillator with `W = x²`, `ν = 2ℓ+1`,
/// eigenvalue `4k` and box `L = √(2R/k)`; `k` is found by fixed-point
/// iteration and `E = −1/k²` at `Z = 2`. Other charges are reduced to `Z = 2`
/// by `E(R; Z) = (Z/2)² E(ZR/2; 2)`.
pub fn hydrogen_confined_via_oscillator(spec: &HydrogenSpec) -> Result<f64, SpectraError> {
    spec.validate()?;
    let w = PotentialSpec::harmonic(crate::potential::PotentialKind::Radial);
    let r2 = spec.z * spec.r / 2.0;
    let mode = ModeSpec::radial(spec.radial_index(), spec.h, 2.0 * spec.ell as f64 + 1.0)?;
    let mut k = spec.n as f64 * spec.h;
    for _ in 0..100 {
        let length = (2.0 * r2 / k).sqrt();
        let lam = confined_eigenvalue(&w, &ConfinementDomain::radial(length)?, &mode)?.value;
        let next = lam / 4.0;
        let done = (next - k).abs() <= 1e-15 * k;
        k = next;
        if done {
            break;
        }
    }
    Ok((spec.z / 2.0).powi(2) * (-1.0 / (k * k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialKind;

    fn harmonic() -> PotentialSpec {
        PotentialSpec::harmonic(PotentialKind::Line)
    }

    #[test]
    fn closed_form_reference_values() {
        let e = unconfined_eigenvalue(&harmonic(), &ModeSpec::line(0, 0.1).unwrap()).unwrap();
        assert_eq!(e.value, 0.1);
        assert_eq!(e.method, Method::ClosedForm);
        let w = PotentialSpec::harmonic(PotentialKind::Radial);
        let e = unconfined_eigenvalue(&w, &ModeSpec::radial(0, 0.1, 0.5).unwrap()).unwrap();
        assert!((e.value - 0.3).abs() < 1e-16);
    }

    #[test]
    fn shooting_on_a_wide_box_matches_harmonic() {
        let p = PotentialSpec::from_expr(PotentialKind::Line, "x^2").unwrap();
        for m in 0..3 {
            let e = unconfined_eigenvalue(&p, &ModeSpec::line(m, 0.1).unwrap()).unwrap();
            assert_eq!(e.method, Method::Shooting);
            let exact = (2 * m + 1) as f64 * 0.1;
            assert!((e.value / exact - 1.0).abs() < 1e-11, "m={m}: {}", e.value);
        }
    }

    #[test]
    fn fd_matches_shooting_and_harmonic() {
        let d = ConfinementDomain::symmetric(1.0).unwrap();
        let mode = ModeSpec::line(0, 0.1).unwrap();
        let fd = fd_oracle(&harmonic(), &d, &mode, 2000, 3).unwrap();
        assert!(fd[0].value < fd[1].value && fd[1].value < fd[2].value);
        let shot = confined_eigenvalue(&harmonic(), &d, &mode).unwrap();
        assert!((fd[0].value / shot.value - 1.0).abs() < 1e-8, "{} {}", fd[0].value, shot.value);
        let big = ConfinementDomain::symmetric(6.0).unwrap();
        let fd = fd_oracle(&harmonic(), &big, &mode, 4000, 1).unwrap();
        assert!((fd[0].value / 0.1 - 1.0).abs() < 1e-8, "{}", fd[0].value);
    }

    #[test]
    fn shallow_tail_exceeds_box_bound() {
        let p = PotentialSpec::from_expr(PotentialKind::Line, "x^2/(1+x^2)").unwrap();
        let mode = ModeSpec::line(0, 0.1).unwrap();
        let r = unconfined_eigenvalue_bounded(&p, &mode, &SolveOptions::default(), 2.0);
        assert!(matches!(r, Err(SpectraError::BoxTooLarge { .. })), "{r:?}");
    }

    #[test]
    fn fd_rejects_coarse_grids() {
        let d = ConfinementDomain::symmetric(1.0).unwrap();
        let mode = ModeSpec::line(0, 0.1).unwrap();
        assert!(matches!(fd_oracle(&harmonic(), &d, &mode, 100, 1), Err(SpectraError::GridTooCoarse { .. })));
    }

    #[test]
    fn hydrogen_levels() {
        let s = HydrogenSpec::new(1, 0, 2.0, 1.0, 30.0).unwrap();
        let e = hydrogen_confined(&s).unwrap();
        assert!((e.value + 1.0).abs() < 1e-10, "{}", e.value);
        for (n, ell) in [(1, 0), (2, 0), (2, 1)] {
            let s = HydrogenSpec::new(n, ell, 2.0, 1.0, 10.0).unwrap();
            let e = hydrogen_confined(&s).unwrap();
            assert!(e.value > s.unconfined_energy());
        }
        assert!(HydrogenSpec::new(1, 1, 2.0, 1.0, 10.0).is_err());
    }

    #[test]
    fn hydrogen_charge_scaling() {
        let s = HydrogenSpec::new(2, 1, 3.0, 1.0, 9.0).unwrap();
        let direct = hydrogen_confined(&s).unwrap().value;
        let scaled = HydrogenSpec::new(2, 1, 2.0, 1.0, 13.5).unwrap();
        let via = 2.25 * hydrogen_confined(&scaled).unwrap().value;
        assert!((direct / via - 1.0).abs() < 1e-9, "{direct} {via}");
    }
}
