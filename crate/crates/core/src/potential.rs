//! Potentials with a single nondegenerate minimum at the origin, their
//! confinement domains, validation of the standing assumptions, and the
//! rescaling to unit curvature (`V''(0) = 2`).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, EvalError, Expr, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("degenerate minimum: V''(0) = {second_derivative}")]
    DegenerateMinimum { second_derivative: f64 },
    #[error("potential evaluation failed: {0}")]
    Evaluation(#[from] EvalError),
    #[error("potential is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown potential `{0}`; expected harmonic, quartic(c), hydrogen-effective(Z, l) or an expression in x")]
    UnknownBuiltin(String),
    #[error("Taylor coefficients are not available for {0}")]
    NoTaylorSeries(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    Line,
    Radial,
}

#[derive(Clone)]
enum Shape {
    /// `x^2`
    Harmonic,
    /// `x^2 + c x^4`
    Quartic {
        c: f64,
    },
    Expr {
        v: Arc<Expr>,
        d1: Arc<Expr>,
        d2: Arc<Expr>,
    },
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

/// A potential `V(x) = shape(x_scale · x)`.
#[derive(Clone)]
pub struct PotentialSpec {
    kind: PotentialKind,
    shape: Shape,
    x_scale: f64,
    omega: f64,
    label: String,
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("kind", &self.kind)
            .field("label", &self.label)
            .field("x_scale", &self.x_scale)
            .field("omega", &self.omega)
            .finish()
    }
}

impl PotentialSpec {
    fn build(kind: PotentialKind, shape: Shape, label: String) -> Self {
        let mut p = Self { kind, shape, x_scale: 1.0, omega: f64::NAN, label };
        p.omega = p.compute_omega().unwrap_or(f64::NAN);
        p
    }

    pub fn harmonic(kind: PotentialKind) -> Self {
        Self::build(kind, Shape::Harmonic, "harmonic".into())
    }

    pub fn quartic(kind: PotentialKind, c: f64) -> Self {
        Self::build(kind, Shape::Quartic { c }, format!("quartic({c})"))
    }

    pub fn from_expr(kind: PotentialKind, text: &str) -> Result<Self, PotentialError> {
        let v = dsl::parse(text)?;
        let d1 = dsl::differentiate(&v);
        let d2 = dsl::differentiate(&d1);
        Ok(Self::build(
            kind,
            Shape::Expr { v: Arc::new(v), d1: Arc::new(d1), d2: Arc::new(d2) },
            text.trim().to_string(),
        ))
    }

    /// A potential known only through its values; derivatives fall back to
    /// finite differences.
    pub fn from_fn(
        kind: PotentialKind,
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::build(kind, Shape::Custom { f: Arc::new(f) }, label.into())
    }

    /// Resolves a built-in name (`harmonic`, `quartic(c)`,
    /// `hydrogen-effective(Z, l)`) or parses an expression. The second value
    /// is the `ν` implied by the name, if any.
    pub fn from_name_or_expr(kind: PotentialKind, text: &str) -> Result<(Self, Option<f64>), PotentialError> {
        let t = text.trim();
        let args = |name: &str| -> Option<Vec<f64>> {
            let rest = t.strip_prefix(name)?.trim();
            let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
            inner.split(',').map(|a| a.trim().parse::<f64>().ok()).collect()
        };
        if t == "harmonic" {
            return Ok((Self::harmonic(kind), None));
        }
        if t.starts_with("quartic") {
            return match args("quartic").as_deref() {
                Some([c]) => Ok((Self::quartic(kind, *c), None)),
                _ => Err(PotentialError::UnknownBuiltin(t.into())),
            };
        }
        if t.starts_with("hydrogen-effective") {
            // The Coulomb problem at angular momentum l maps onto the radial
            // oscillator W = x^2 with nu = 2l + 1 (Z only rescales energies).
            return match args("hydrogen-effective").as_deref() {
                Some([z, l]) if *z > 0.0 && *l >= 0.0 && l.fract() == 0.0 => {
                    let mut p = Self::harmonic(PotentialKind::Radial);
                    p.label = format!("hydrogen-effective({z}, {l})");
                    Ok((p, Some(2.0 * l + 1.0)))
                }
                _ => Err(PotentialError::UnknownBuiltin(t.into())),
            };
        }
        Ok((Self::from_expr(kind, t)?, None))
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True for the exact oscillator `ω² x²`, whose spectrum is known in closed form.
    pub fn is_pure_harmonic(&self) -> bool {
        matches!(self.shape, Shape::Harmonic) || matches!(self.shape, Shape::Quartic { c } if c == 0.0)
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        !matches!(self.shape, Shape::Custom { .. })
    }

    /// Cached `ω = √(V''(0)/2)`; NaN when the minimum is degenerate.
    pub fn curvature_omega(&self) -> f64 {
        self.omega
    }

    fn shape_value(&self, y: f64) -> Result<f64, PotentialError> {
        let v = match &self.shape {
            Shape::Harmonic => y * y,
            Shape::Quartic { c } => {
                let y2 = y * y;
                y2 + c * y2 * y2
            }
            Shape::Expr { v, .. } => dsl::evaluate(v, y)?,
            Shape::Custom { f } => f(y),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(PotentialError::NonFinite { x: y / self.x_scale })
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<f64, PotentialError> {
        self.shape_value(self.x_scale * x)
    }

    pub fn derivative1(&self, x: f64) -> Result<f64, PotentialError> {
        let y = self.x_scale * x;
        let d = match &self.shape {
            Shape::Harmonic => 2.0 * y,
            Shape::Quartic { c } => 2.0 * y + 4.0 * c * y * y * y,
            Shape::Expr { d1, .. } => dsl::evaluate(d1, y)?,
            Shape::Custom { .. } => {
                let s = 1e-5 * (1.0 + y.abs());
                let d1 = (self.shape_value(y + s)? - self.shape_value(y - s)?) / (2.0 * s);
                let d2 = (self.shape_value(y + 2.0 * s)? - self.shape_value(y - 2.0 * s)?) / (4.0 * s);
                (4.0 * d1 - d2) / 3.0
            }
        };
        Ok(self.x_scale * d)
    }

    /// Second derivative, `None` when only values are known.
    pub fn derivative2(&self, x: f64) -> Result<Option<f64>, PotentialError> {
        let y = self.x_scale * x;
        let d = match &self.shape {
            Shape::Harmonic => 2.0,
            Shape::Quartic { c } => 2.0 + 12.0 * c * y * y,
            Shape::Expr { d2, .. } => dsl::evaluate(d2, y)?,
            Shape::Custom { .. } => return Ok(None),
        };
        Ok(Some(self.x_scale * self.x_scale * d))
    }

    /// Taylor coefficients of `V` about 0 up to `x^order`.
    pub fn taylor(&self, order: usize) -> Result<Vec<f64>, PotentialError> {
        let mut c = vec![0.0; order + 1];
        match &self.shape {
            Shape::Harmonic => {
                if order >= 2 {
                    c[2] = 1.0;
                }
            }
            Shape::Quartic { c: q } => {
                if order >= 2 {
                    c[2] = 1.0;
                }
                if order >= 4 {
                    c[4] = *q;
                }
            }
            Shape::Expr { v, .. } => c = dsl::taylor_coefficients(v, 0.0, order)?,
            Shape::Custom { .. } => return Err(PotentialError::NoTaylorSeries(self.label.clone())),
        }
        let mut s = 1.0;
        for ck in c.iter_mut() {
            *ck *= s;
            s *= self.x_scale;
        }
        Ok(c)
    }

    fn second_derivative_at_zero(&self) -> Result<f64, PotentialError> {
        if let Some(d2) = self.derivative2(0.0)? {
            return Ok(d2);
        }
        // Central differences at step 1e-3 with two Richardson levels.
        let v0 = self.evaluate(0.0)?;
        let central = |s: f64| -> Result<f64, PotentialError> {
            Ok((self.evaluate(s)? - 2.0 * v0 + self.evaluate(-s)?) / (s * s))
        };
        let s = 1e-3;
        let (d1, d2, d3) = (central(s)?, central(s / 2.0)?, central(s / 4.0)?);
        let r1 = (4.0 * d2 - d1) / 3.0;
        let r2 = (4.0 * d3 - d2) / 3.0;
        Ok((16.0 * r2 - r1) / 15.0)
    }

    fn compute_omega(&self) -> Result<f64, PotentialError> {
        let d2 = self.second_derivative_at_zero()?;
        if !(d2 > 0.0) {
            return Err(PotentialError::DegenerateMinimum { second_derivative: d2 });
        }
        Ok((d2 / 2.0).sqrt())
    }
}

/// `(r₋, r₊)` with `r₋ < 0 < r₊`, or the radial box `(0, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ConfinementDomain {
    Interval { lower: f64, upper: f64 },
    Radial { length: f64 },
}

impl ConfinementDomain {
    pub fn interval(lower: f64, upper: f64) -> Result<Self, PotentialError> {
        if !(lower.is_finite() && upper.is_finite() && lower < 0.0 && upper > 0.0) {
            return Err(PotentialError::InvalidDomain(format!("need r- < 0 < r+, got ({lower}, {upper})")));
        }
        Ok(Self::Interval { lower, upper })
    }

    pub fn symmetric(radius: f64) -> Result<Self, PotentialError> {
        Self::interval(-radius, radius)
    }

    pub fn radial(length: f64) -> Result<Self, PotentialError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(PotentialError::InvalidDomain(format!("need L > 0, got {length}")));
        }
        Ok(Self::Radial { length })
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            Self::Interval { .. } => PotentialKind::Line,
            Self::Radial { .. } => PotentialKind::Radial,
        }
    }

    /// `(lower, upper)`; radial boxes report `(0, L)`.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Self::Interval { lower, upper } => (lower, upper),
            Self::Radial { length } => (0.0, length),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Self::Interval { lower, upper } => Self::Interval { lower: lower * factor, upper: upper * factor },
            Self::Radial { length } => Self::Radial { length: length * factor },
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let (a, b) = self.bounds();
        a < x && x < b
    }
}

impl fmt::Display for ConfinementDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Interval { lower, upper } => write!(f, "({lower}, {upper})"),
            Self::Radial { length } => write!(f, "(0, {length})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Condition id: 1–3 for the line, 6–9 for the radial kind; see [`describe_assumption`].
    pub assumption: u8,
    pub x: f64,
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self { passed: violations.is_empty(), violations }
    }
}

const ORIGIN_TOL: f64 = 1e-10;
const EVEN_PAIRS: usize = 16;
const EVEN_TOL: f64 = 1e-9;
const MARGIN: f64 = 0.5;

/// Plain description of a [`Violation::assumption`] id.
pub fn describe_assumption(id: u8) -> &'static str {
    match id {
        1 | 6 => "finite values",
        2 | 7 => "nondegenerate minimum at 0, positive elsewhere on the domain",
        3 | 8 => "positive beyond the domain",
        9 => "even about 0",
        _ => "unknown condition",
    }
}

/// Checks the standing assumptions on a sample grid covering the domain and
/// a 50% margin beyond it. Tail positivity at infinity cannot be sampled;
/// positivity on the margin stands in for it.
pub fn validate_potential(p: &PotentialSpec, domain: &ConfinementDomain, samples: usize) -> ValidationReport {
    let samples = samples.max(16);
    let radial = matches!(domain, ConfinementDomain::Radial { .. });
    let (smooth, minimum, tail) = if radial { (6, 7, 8) } else { (1, 2, 3) };
    let mut out = Vec::new();
    let mut record = |assumption: u8, x: f64, observed: f64| out.push(Violation { assumption, x, observed });

    match p.evaluate(0.0) {
        Ok(v0) if v0.abs() > ORIGIN_TOL => record(minimum, 0.0, v0),
        Ok(_) => {}
        Err(_) => record(smooth, 0.0, f64::NAN),
    }
    match p.derivative1(0.0) {
        Ok(d) if d.abs() > ORIGIN_TOL => record(minimum, 0.0, d),
        Ok(_) => {}
        Err(_) => record(smooth, 0.0, f64::NAN),
    }
    match p.second_derivative_at_zero() {
        Ok(d2) if !(d2 > 0.0) => record(minimum, 0.0, d2),
        Ok(_) => {}
        Err(_) => record(smooth, 0.0, f64::NAN),
    }

    let (a, b) = domain.bounds();
    let (lo, hi) = if radial { (0.0, b * (1.0 + MARGIN)) } else { (a * (1.0 + MARGIN), b * (1.0 + MARGIN)) };
    for i in 0..samples {
        let x = if radial {
            hi * (i + 1) as f64 / samples as f64
        } else {
            lo + (hi - lo) * i as f64 / (samples - 1) as f64
        };
        if x.abs() < 1e-12 * (hi - lo) {
            continue;
        }
        match p.evaluate(x) {
            Ok(v) if v > 0.0 => {}
            Ok(v) => {
                let inside = x > a && x < b;
                record(if inside { minimum } else { tail }, x, v);
            }
            Err(_) => record(smooth, x, f64::NAN),
        }
    }

    if radial {
        for k in 1..=EVEN_PAIRS {
            let x = b * k as f64 / EVEN_PAIRS as f64;
            match (p.evaluate(x), p.evaluate(-x)) {
                (Ok(v), Ok(w)) => {
                    if (v - w).abs() > EVEN_TOL * (1.0 + v.abs()) {
                        record(9, x, v - w);
                    }
                }
                _ => record(9, x, f64::NAN),
            }
        }
    }
    ValidationReport::from_violations(out)
}

/// `ω = √(V''(0)/2)`, from the analytic second derivative when available and
/// from Richardson-extrapolated central differences otherwise.
pub fn curvature_at_minimum(p: &PotentialSpec) -> Result<f64, PotentialError> {
    if p.omega.is_finite() {
        return Ok(p.omega);
    }
    p.compute_omega()
}

/// Rescales `x → x/ω` so that `Ṽ''(0) = 2`, mapping the domain by `ω` and
/// `h → ω h`; the eigenvalues of the rescaled problem equal the originals.
pub fn normalize_to_unit_curvature(
    p: &PotentialSpec,
    domain: &ConfinementDomain,
    h: f64,
) -> Result<(PotentialSpec, ConfinementDomain, f64), PotentialError> {
    let omega = curvature_at_minimum(p)?;
    if omega == 1.0 {
        return Ok((p.clone(), *domain, h));
    }
    let mut q = p.clone();
    q.x_scale = p.x_scale / omega;
    q.omega = 1.0;
    Ok((q, domain.scaled(omega), h * omega))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(text: &str) -> PotentialSpec {
        PotentialSpec::from_expr(PotentialKind::Line, text).unwrap()
    }

    #[test]
    fn harmonic_passes_validation() {
        let d = ConfinementDomain::symmetric(1.0).unwrap();
        let r = validate_potential(&PotentialSpec::harmonic(PotentialKind::Line), &d, 64);
        assert!(r.passed, "{r:?}");
        assert!(validate_potential(&line("x^2"), &d, 64).passed);
    }

    #[test]
    fn shifted_minimum_is_reported() {
        let d = ConfinementDomain::symmetric(1.0).unwrap();
        let r = validate_potential(&line("x^2-1"), &d, 64);
        assert!(!r.passed);
        assert_eq!(r.violations[0], Violation { assumption: 2, x: 0.0, observed: -1.0 });
    }

    #[test]
    fn cubic_is_negative_on_the_left() {
        let d = ConfinementDomain::symmetric(1.0).unwrap();
        let r = validate_potential(&line("x^3"), &d, 64);
        assert!(!r.passed);
        assert!(r.violations.iter().any(|v| v.assumption == 2 && v.x < 0.0 && v.observed < 0.0));
    }

    #[test]
    fn tail_and_evenness_checks() {
        // dips below zero just outside the box
        let d = ConfinementDomain::symmetric(1.0).unwrap();
        let r = validate_potential(&line("x^2 - 0.8*x^4"), &d, 64);
        assert!(r.violations.iter().all(|v| v.assumption == 3), "{r:?}");
        assert!(!r.passed);

        let box1 = ConfinementDomain::radial(1.0).unwrap();
        let odd = PotentialSpec::from_expr(PotentialKind::Radial, "x^2 + x^3").unwrap();
        let r = validate_potential(&odd, &box1, 32);
        assert!(r.violations.iter().any(|v| v.assumption == 9));
        let even = PotentialSpec::from_expr(PotentialKind::Radial, "x^2 + x^4").unwrap();
        assert!(validate_potential(&even, &box1, 32).passed);
    }

    #[test]
    fn non_finite_values_are_violations() {
        let d = ConfinementDomain::symmetric(1.0).unwrap();
        let r = validate_potential(&line("x^2 + 0*log(x + 0.5)"), &d, 64);
        assert!(r.violations.iter().any(|v| v.assumption == 1 && v.observed.is_nan()));
    }

    #[test]
    fn validation_is_deterministic() {
        let d = ConfinementDomain::symmetric(1.0).unwrap();
        let p = line("x^2 - 0.8*x^4");
        assert_eq!(validate_potential(&p, &d, 100), validate_potential(&p, &d, 100));
    }

    #[test]
    fn curvature_examples() {
        assert_eq!(curvature_at_minimum(&line("x^2")).unwrap(), 1.0);
        assert_eq!(curvature_at_minimum(&line("x^2+x^4")).unwrap(), 1.0);
        let w = curvature_at_minimum(&line("cosh(x)-1")).unwrap();
        assert!((w - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let fd = PotentialSpec::from_fn(PotentialKind::Line, "cosh-1", |x: f64| x.cosh() - 1.0);
        assert!(!fd.has_analytic_derivatives());
        let w = curvature_at_minimum(&fd).unwrap();
        assert!((w / std::f64::consts::FRAC_1_SQRT_2 - 1.0).abs() < 1e-8, "{w}");
        let fd = PotentialSpec::from_fn(PotentialKind::Line, "quartic", |x: f64| 3.0 * x * x + x.powi(4));
        assert!((curvature_at_minimum(&fd).unwrap() / 3f64.sqrt() - 1.0).abs() < 1e-8);
        assert!(matches!(curvature_at_minimum(&line("x^4")), Err(PotentialError::DegenerateMinimum { .. })));
    }

    #[test]
    fn normalization_examples() {
        let d = ConfinementDomain::symmetric(1.0).unwrap();
        let p = line("x^2");
        let (q, dq, hq) = normalize_to_unit_curvature(&p, &d, 0.1).unwrap();
        assert_eq!((dq, hq), (d, 0.1));
        assert_eq!(q.evaluate(0.3).unwrap(), p.evaluate(0.3).unwrap());

        let p = line("2*x^2");
        let (q, dq, hq) = normalize_to_unit_curvature(&p, &d, 0.1).unwrap();
        assert!((q.derivative2(0.0).unwrap().unwrap() - 2.0).abs() < 1e-15);
        let (a, b) = dq.bounds();
        assert!((a + 2f64.sqrt()).abs() < 1e-15 && (b - 2f64.sqrt()).abs() < 1e-15);
        assert!((hq - 2f64.sqrt() * 0.1).abs() < 1e-16);
        assert!((q.evaluate(0.7).unwrap() - 0.49).abs() < 1e-15);
    }

    #[test]
    fn normalization_is_idempotent() {
        let d = ConfinementDomain::interval(-0.8, 1.3).unwrap();
        for text in ["2*x^2", "cosh(x)-1", "3*x^2 + x^4", "x^2"] {
            let once = normalize_to_unit_curvature(&line(text), &d, 0.07).unwrap();
            let twice = normalize_to_unit_curvature(&once.0, &once.1, once.2).unwrap();
            assert_eq!(once.1, twice.1);
            assert_eq!(once.2, twice.2);
            assert_eq!(once.0.evaluate(0.37).unwrap(), twice.0.evaluate(0.37).unwrap());
        }
    }

    #[test]
    fn builtin_names() {
        let (p, nu) = PotentialSpec::from_name_or_expr(PotentialKind::Line, "quartic(0.5)").unwrap();
        assert_eq!(p.evaluate(1.0).unwrap(), 1.5);
        assert_eq!(nu, None);
        let (p, nu) = PotentialSpec::from_name_or_expr(PotentialKind::Radial, "hydrogen-effective(2, 1)").unwrap();
        assert!(p.is_pure_harmonic());
        assert_eq!(nu, Some(3.0));
        assert!(PotentialSpec::from_name_or_expr(PotentialKind::Line, "quartic(a)").is_err());
        assert!(matches!(
            PotentialSpec::from_name_or_expr(PotentialKind::Line, "wobble"),
            Err(PotentialError::Parse(_))
        ));
    }

    #[test]
    fn taylor_respects_rescaling() {
        let d = ConfinementDomain::symmetric(1.0).unwrap();
        let (q, _, _) = normalize_to_unit_curvature(&line("2*x^2 + x^4"), &d, 0.1).unwrap();
        let t = q.taylor(4).unwrap();
        assert!((t[2] - 1.0).abs() < 1e-15);
        assert!((t[4] - 0.25).abs() < 1e-15);
    }
}
