//! Shift reports: numeric confinement shifts set against the leading-order
//! predictions, h-sweeps with an empirical order fit, hydrogen series over
//! the box radius, oracle tables, CSV and JSON output.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::{hydrogen_confined_closed_form, shift_leading_line, shift_leading_radial, ShiftPrediction};
use crate::exec::Execution;
use crate::potential::{ConfinementDomain, PotentialSpec, ValidationReport};
use crate::shooting::{ModeSpec, SolveOptions};
use crate::spectra::{
    confined_eigenvalue_with, fd_oracle, hydrogen_confined_with, unconfined_eigenvalue_bounded, HydrogenSpec, Method,
    MAX_BOX_EXTENT,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Shifts smaller than this fraction of the eigenvalue are reported as
/// unresolved and get no ratio.
pub const SHIFT_RESOLUTION: f64 = 1e-11;

/// Frozen column order of sweep CSV files.
pub const SHIFT_CSV_HEADER: [&str; 9] = [
    "h",
    "lambda0",
    "lambda_confined",
    "numeric_shift",
    "predicted_shift",
    "ratio",
    "log_numeric",
    "log_predicted",
    "status",
];

/// Column order of hydrogen CSV files (one row per box radius).
pub const HYDROGEN_CSV_HEADER: [&str; 9] =
    ["R", "E_n", "E_confined", "numeric_shift", "predicted_shift", "ratio", "log_numeric", "log_predicted", "status"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Case {
    Confinement {
        potential: String,
        domain: ConfinementDomain,
        m: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nu: Option<f64>,
        h: f64,
    },
    Hydrogen {
        n: u32,
        ell: u32,
        #[serde(rename = "Z")]
        z: f64,
        h: f64,
        #[serde(rename = "R")]
        r: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportDiagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator_steps: Option<usize>,
    #[serde(default)]
    pub bracketed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0_method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_relative_difference: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub case: Case,
    pub lambda0: Option<f64>,
    pub lambda_confined: Option<f64>,
    pub numeric_shift: Option<f64>,
    pub log_numeric: Option<f64>,
    pub predicted_shift: Option<f64>,
    pub log_predicted: Option<f64>,
    pub ratio: Option<f64>,
    pub diagnostics: ReportDiagnostics,
    /// `"ok"`, `"unresolved"`, or `"<stage>-failed"`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl ShiftReport {
    fn empty(case: Case) -> Self {
        Self {
            case,
            lambda0: None,
            lambda_confined: None,
            numeric_shift: None,
            log_numeric: None,
            predicted_shift: None,
            log_predicted: None,
            ratio: None,
            diagnostics: ReportDiagnostics::default(),
            status: "ok".into(),
            message: None,
        }
    }

    fn fail(mut self, stage: &str, err: impl std::fmt::Display) -> Self {
        self.status = format!("{stage}-failed");
        self.message = Some(err.to_string());
        self
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// `h` for confinement cases, `R` for hydrogen cases.
    pub fn abscissa(&self) -> f64 {
        match self.case {
            Case::Confinement { h, .. } => h,
            Case::Hydrogen { r, .. } => r,
        }
    }

    fn finish(&mut self, log_predicted: f64) {
        self.log_predicted = Some(log_predicted);
        self.predicted_shift = Some(log_predicted.exp());
        if let (Some(lc), Some(l0)) = (self.lambda_confined, self.lambda0) {
            let shift = lc - l0;
            self.numeric_shift = Some(shift);
            if shift.abs() < SHIFT_RESOLUTION * lc.abs().max(l0.abs()) {
                self.status = "unresolved".into();
                self.message = Some("shift is below the resolution of the eigenvalue computation".into());
                return;
            }
            self.log_numeric = (shift > 0.0).then(|| shift.ln());
            self.ratio = match (self.log_numeric, self.predicted_shift) {
                (_, Some(p)) if p > 0.0 && p.is_finite() => Some(shift / p),
                (Some(ln), _) => Some((ln - log_predicted).exp()),
                _ => None,
            };
        }
    }
}

/// A confinement problem without its semiclassical parameter.
#[derive(Clone)]
pub struct ShiftProblem {
    pub potential: PotentialSpec,
    pub domain: ConfinementDomain,
    pub m: u32,
    pub nu: Option<f64>,
}

impl ShiftProblem {
    pub fn mode(&self, h: f64) -> Result<ModeSpec, crate::shooting::ShootError> {
        match self.nu {
            None => ModeSpec::line(self.m, h),
            Some(nu) => ModeSpec::radial(self.m, h, nu),
        }
    }

    fn case(&self, h: f64) -> Case {
        Case::Confinement {
            potential: self.potential.label().to_string(),
            domain: self.domain,
            m: self.m,
            nu: self.nu,
            h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub solve: SolveOptions,
    /// Cells of the finite-difference cross-check; `None` skips it.
    pub oracle_grid: Option<usize>,
    pub max_box: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { solve: SolveOptions::default(), oracle_grid: None, max_box: MAX_BOX_EXTENT }
    }
}

pub fn predicted_shift(
    problem: &ShiftProblem,
    mode: &ModeSpec,
) -> Result<ShiftPrediction, crate::asymptotics::AsymptoticsError> {
    match problem.domain {
        ConfinementDomain::Interval { .. } => shift_leading_line(&problem.potential, &problem.domain, mode),
        ConfinementDomain::Radial { length } => shift_leading_radial(&problem.potential, length, mode),
    }
}

/// Numeric shift `λ^Ω − λ⁰` and its leading-order prediction at one `h`.
pub fn shift_report(problem: &ShiftProblem, h: f64, opts: &ReportOptions) -> ShiftReport {
    let mut r = ShiftReport::empty(problem.case(h));
    let mode = match problem.mode(h) {
        Ok(m) => m,
        Err(e) => return r.fail("input", e),
    };
    match unconfined_eigenvalue_bounded(&problem.potential, &mode, &opts.solve, opts.max_box) {
        Ok(e) => {
            r.lambda0 = Some(e.value);
            r.diagnostics.lambda0_method = Some(e.method);
        }
        Err(e) => return r.fail("lambda0", e),
    }
    match confined_eigenvalue_with(&problem.potential, &problem.domain, &mode, &opts.solve) {
        Ok(e) => {
            r.lambda_confined = Some(e.value);
            r.diagnostics.iterations = e.diagnostics.iterations;
            r.diagnostics.integrator_steps = e.diagnostics.integrator_steps;
            r.diagnostics.bracketed = e.diagnostics.bracketed;
        }
        Err(e) => return r.fail("confined", e),
    }
    if let Some(grid) = opts.oracle_grid {
        match fd_oracle(&problem.potential, &problem.domain, &mode, grid, problem.m as usize + 1) {
            Ok(v) => {
                let fd = v[problem.m as usize].value;
                r.diagnostics.oracle = Some(fd);
                r.diagnostics.oracle_relative_difference = r.lambda_confined.map(|s| ((s - fd) / fd).abs());
                if v[problem.m as usize].diagnostics.reduced_accuracy {
                    r.diagnostics.warnings.push("finite-difference oracle has reduced accuracy for nu < 0.5".into());
                }
            }
            Err(e) => r.diagnostics.warnings.push(format!("oracle failed: {e}")),
        }
    }
    match predicted_shift(problem, &mode) {
        Ok(p) => r.finish(p.log_value),
        Err(e) => return r.fail("prediction", e),
    }
    r
}

/// Numeric `E_n(R) − E_n` against the closed-form hydrogen shift.
pub fn hydrogen_report(spec: &HydrogenSpec, opts: &ReportOptions) -> ShiftReport {
    let mut r = ShiftReport::empty(Case::Hydrogen { n: spec.n, ell: spec.ell, z: spec.z, h: spec.h, r: spec.r });
    let cf = match hydrogen_confined_closed_form(spec) {
        Ok(c) => c,
        Err(e) => return r.fail("input", e),
    };
    r.lambda0 = Some(cf.reference);
    r.diagnostics.lambda0_method = Some(Method::ClosedForm);
    r.diagnostics.warnings.extend(cf.warning.clone());
    match hydrogen_confined_with(spec, &opts.solve) {
        Ok(e) => {
            r.lambda_confined = Some(e.value);
            r.diagnostics.iterations = e.diagnostics.iterations;
            r.diagnostics.integrator_steps = e.diagnostics.integrator_steps;
            r.diagnostics.bracketed = e.diagnostics.bracketed;
        }
        Err(e) => return r.fail("confined", e),
    }
    r.finish(cf.log_shift);
    r
}

/// Least-squares slope of `ln|ratio − 1|` against `ln(abscissa)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub order: f64,
    pub intercept: f64,
    pub points: usize,
}

pub fn fit_order(xs: &[f64], ys: &[f64]) -> Option<OrderFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let order = sxy / sxx;
    Some(OrderFit { order, intercept: my - order * mx, points: pts.len() })
}

/// Order fit of `|ratio − 1|` over the successful rows.
pub fn ratio_order(rows: &[ShiftReport]) -> Option<OrderFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        rows.iter().filter_map(|r| r.ratio.map(|q| (r.abscissa(), (q - 1.0).abs()))).unzip();
    fit_order(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub reports: Vec<ShiftReport>,
    pub order: Option<OrderFit>,
}

/// `count` points from `start` to `stop` in geometric progression.
pub fn geometric_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>, ReportError> {
    if count == 0 {
        return Err(ReportError::Grid("grid is empty".into()));
    }
    if !(start > 0.0 && stop > 0.0 && start.is_finite() && stop.is_finite()) {
        return Err(ReportError::Grid(format!("endpoints must be positive, got {start}, {stop}")));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let q = (stop / start).ln() / (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count).map(|i| start * (q * i as f64).exp()).collect();
    grid[count - 1] = stop;
    Ok(grid)
}

pub fn sweep(problem: &ShiftProblem, hs: &[f64], opts: &ReportOptions, exec: Execution) -> Sweep {
    let reports = exec.map(hs, |&h| shift_report(problem, h, opts));
    let order = ratio_order(&reports);
    Sweep { reports, order }
}

pub fn hydrogen_sweep(base: &HydrogenSpec, radii: &[f64], opts: &ReportOptions, exec: Execution) -> Sweep {
    let reports = exec.map(radii, |&r| hydrogen_report(&HydrogenSpec { r, ..*base }, opts));
    let order = ratio_order(&reports);
    Sweep { reports, order }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub index_m: u32,
    pub shooting: Option<f64>,
    pub finite_difference: f64,
    pub fd_error_estimate: Option<f64>,
    pub relative_difference: Option<f64>,
    #[serde(default)]
    pub reduced_accuracy: bool,
    pub status: String,
}

/// Shooting against the extrapolated finite-difference eigenvalues for
/// `m = 0..count`.
pub fn oracle_table(
    p: &PotentialSpec,
    domain: &ConfinementDomain,
    base: &ModeSpec,
    grid_n: usize,
    count: usize,
    opts: &SolveOptions,
    exec: Execution,
) -> Result<Vec<OracleRow>, crate::spectra::SpectraError> {
    let fd = fd_oracle(p, domain, base, grid_n, count)?;
    Ok(exec.map(&fd, |e| {
        let mode = ModeSpec { m: e.index_m, ..*base };
        let shot = confined_eigenvalue_with(p, domain, &mode, opts);
        let (shooting, status) = match shot {
            Ok(s) => (Some(s.value), "ok".to_string()),
            Err(err) => (None, format!("shooting-failed: {err}")),
        };
        OracleRow {
            index_m: e.index_m,
            shooting,
            finite_difference: e.value,
            fd_error_estimate: e.diagnostics.residual,
            relative_difference: shooting.map(|s| ((s - e.value) / e.value).abs()),
            reduced_accuracy: e.diagnostics.reduced_accuracy,
            status,
        }
    }))
}

/// One JSON document per CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDocument {
    pub command: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<ShiftReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<OrderFit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oracle: Vec<OracleRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
}

impl RunDocument {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), reports: Vec::new(), order: None, oracle: Vec::new(), validation: None }
    }
}

/// 17 significant digits, empty when absent.
fn fmt_num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.16e}"),
        Some(x) => x.to_string(),
        None => String::new(),
    }
}

fn write_rows<W: Write>(rows: &[ShiftReport], header: [&str; 9], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        let status = match &r.message {
            Some(m) => format!("{}: {m}", r.status),
            None => r.status.clone(),
        };
        w.write_record([
            fmt_num(Some(r.abscissa())),
            fmt_num(r.lambda0),
            fmt_num(r.lambda_confined),
            fmt_num(r.numeric_shift),
            fmt_num(r.predicted_shift),
            fmt_num(r.ratio),
            fmt_num(r.log_numeric),
            fmt_num(r.log_predicted),
            status,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes rows under [`SHIFT_CSV_HEADER`].
pub fn write_shift_csv<W: Write>(rows: &[ShiftReport], out: W) -> Result<(), ReportError> {
    write_rows(rows, SHIFT_CSV_HEADER, out)
}

/// Writes rows under [`HYDROGEN_CSV_HEADER`].
pub fn write_hydrogen_csv<W: Write>(rows: &[ShiftReport], out: W) -> Result<(), ReportError> {
    write_rows(rows, HYDROGEN_CSV_HEADER, out)
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.10e}"))
}

/// Aligned plain-text table of the rows.
pub fn render_table(rows: &[ShiftReport]) -> String {
    let hydrogen = rows.first().is_some_and(|r| matches!(r.case, Case::Hydrogen { .. }));
    let head = if hydrogen { HYDROGEN_CSV_HEADER } else { SHIFT_CSV_HEADER };
    let cols = [0, 1, 2, 3, 4, 5, 8];
    let mut lines: Vec<Vec<String>> = vec![cols.iter().map(|&i| head[i].to_string()).collect()];
    for r in rows {
        lines.push(vec![
            format!("{:.6e}", r.abscissa()),
            cell(r.lambda0),
            cell(r.lambda_confined),
            cell(r.numeric_shift),
            cell(r.predicted_shift),
            r.ratio.map_or_else(|| "-".to_string(), |q| format!("{q:.8}")),
            r.status.clone(),
        ]);
    }
    let widths: Vec<usize> = (0..cols.len()).map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for l in &lines {
        let row: Vec<String> = l.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
        out.push_str(row.join("  ").trim_end());
        out.push('\n');
    }
    out
}
