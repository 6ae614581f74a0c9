mod args;
mod error;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use confine_core::exec::Execution;
use confine_core::potential::{
    describe_assumption, validate_potential, ConfinementDomain, PotentialKind, PotentialSpec, ValidationReport,
};
use confine_core::report::{
    geometric_grid, hydrogen_sweep, oracle_table, render_table, shift_report, sweep, write_hydrogen_csv,
    write_shift_csv, OracleRow, ReportError, ReportOptions, RunDocument, ShiftProblem, ShiftReport,
};
use confine_core::shooting::{ModeSpec, SolveOptions};
use confine_core::spectra::{HydrogenSpec, MIN_GRID};

use args::{parse_list, pick, require, Cli, Command, FileConfig, OutputArgs, ProblemArgs, ToleranceArgs};
use error::CliError;

const DEFAULT_SAMPLES: usize = 64;
const DEFAULT_GRID: usize = 2000;
const DEFAULT_COUNT: usize = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let exec = match pick(cli.jobs, cfg.jobs) {
        Some(1) => Execution::Sequential,
        Some(jobs) => Execution::Parallel { jobs },
        None => Execution::default(),
    };
    match cli.command {
        Command::Validate { problem, samples, output } => cmd_validate(&cfg, &problem, samples, &output),
        Command::Shift { problem, m, h, oracle, grid_n, tolerances, output } => {
            let m = require(m, cfg.m, "m")?;
            let h = require(h, cfg.h, "h")?;
            let oracle = oracle || cfg.oracle.unwrap_or(false);
            let grid = if oracle { Some(grid_size(grid_n, &cfg)?) } else { None };
            cmd_shift(&cfg, &problem, m, h, grid, &tolerances, &output)
        }
        Command::Sweep { problem, m, h_grid, tolerances, output } => {
            let m = require(m, cfg.m, "m")?;
            let grid_text = require(h_grid, cfg.h_grid.clone(), "h-grid")?;
            cmd_sweep(&cfg, &problem, m, &grid_text, &tolerances, &output, exec)
        }
        Command::Hydrogen { n, ell, z, h, r_grid, tolerances, output } => {
            let spec = HydrogenSpec {
                n: require(n, cfg.n, "n")?,
                ell: require(ell, cfg.ell, "ell")?,
                z: require(z, cfg.z, "Z")?,
                h: require(h, cfg.h, "h")?,
                r: 1.0,
            };
            let radii = parse_list(&require(r_grid, cfg.r_grid.clone(), "R-grid")?, "R-grid")?;
            cmd_hydrogen(&cfg, spec, &radii, &tolerances, &output, exec)
        }
        Command::Oracle { problem, h, grid_n, count, tolerances, output } => {
            let h = require(h, cfg.h, "h")?;
            let grid = grid_size(grid_n, &cfg)?;
            let count = pick(count, cfg.count).unwrap_or(DEFAULT_COUNT);
            cmd_oracle(&cfg, &problem, h, grid, count, &tolerances, &output, exec)
        }
    }
}

fn grid_size(flag: Option<usize>, cfg: &FileConfig) -> Result<usize, CliError> {
    let n = pick(flag, cfg.grid_n).unwrap_or(DEFAULT_GRID);
    if n < MIN_GRID {
        return Err(CliError::Usage(format!("--grid-n must be at least {MIN_GRID}, got {n}")));
    }
    Ok(n)
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

/// Potential, domain and `ν` from the problem flags and the config file.
fn resolve_problem(
    args: &ProblemArgs,
    cfg: &FileConfig,
) -> Result<(PotentialSpec, ConfinementDomain, Option<f64>), CliError> {
    let domain_text = pick(args.domain.clone(), cfg.domain.clone());
    let box_length = pick(args.box_length, cfg.box_length);
    let domain = match (domain_text, box_length) {
        (Some(_), Some(_)) => return Err(usage("give either --domain or --box, not both")),
        (None, None) => return Err(usage("missing required --domain a,b or --box L")),
        (Some(text), None) => match parse_list(&text, "domain")?.as_slice() {
            [a, b] => ConfinementDomain::interval(*a, *b).map_err(usage)?,
            _ => return Err(usage(format!("--domain expects a,b, got {text:?}"))),
        },
        (None, Some(l)) => ConfinementDomain::radial(l).map_err(usage)?,
    };
    let kind = domain.kind();
    let expr = pick(args.potential_expr.clone(), cfg.potential_expr.clone());
    let named = pick(args.potential.clone(), cfg.potential.clone());
    let (potential, implied_nu) = match (named, expr) {
        (Some(_), Some(_)) => return Err(usage("give either --potential or --potential-expr, not both")),
        (None, None) => return Err(usage("missing required --potential or --potential-expr")),
        (Some(text), None) => PotentialSpec::from_name_or_expr(kind, &text).map_err(usage)?,
        (None, Some(text)) => (PotentialSpec::from_expr(kind, &text).map_err(usage)?, None),
    };
    let nu = pick(args.nu, cfg.nu).or(implied_nu);
    match (kind, nu) {
        (PotentialKind::Line, Some(_)) => Err(usage("--nu applies only to a radial --box problem")),
        (PotentialKind::Radial, None) => Err(usage("missing required --nu for a radial --box problem")),
        _ => Ok((potential, domain, nu)),
    }
}

fn solve_options(t: &ToleranceArgs, cfg: &FileConfig) -> SolveOptions {
    let mut o = SolveOptions::default();
    if let Some(v) = pick(t.integrate_tol, cfg.integrate_tol) {
        o.integrate_tol = v;
    }
    if let Some(v) = pick(t.newton_tol, cfg.newton_tol) {
        o.newton_tol = v;
    }
    o
}

fn open_output(path: &Path) -> Result<Box<dyn Write>, CliError> {
    if path == Path::new("-") {
        Ok(Box::new(std::io::stdout()))
    } else {
        Ok(Box::new(std::fs::File::create(path)?))
    }
}

fn emit_json(doc: &RunDocument, output: &OutputArgs, cfg: &FileConfig) -> Result<(), CliError> {
    if let Some(path) = pick(output.json.clone(), cfg.json.clone()) {
        let mut w = open_output(&path)?;
        serde_json::to_writer_pretty(&mut w, doc).map_err(|e| CliError::Io(e.into()))?;
        writeln!(w)?;
    }
    Ok(())
}

type CsvWriter = fn(&[ShiftReport], Box<dyn Write>) -> Result<(), ReportError>;

fn emit_csv(rows: &[ShiftReport], output: &OutputArgs, cfg: &FileConfig, write: CsvWriter) -> Result<(), CliError> {
    if let Some(path) = pick(output.csv.clone(), cfg.csv.clone()) {
        write(rows, open_output(&path)?).map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    }
    Ok(())
}

fn print_warnings(rows: &[ShiftReport]) {
    for r in rows {
        for w in &r.diagnostics.warnings {
            eprintln!("warning: {w}");
        }
        if let Some(m) = &r.message {
            eprintln!("{}: {m}", r.status);
        }
    }
}

/// Exit status for a set of rows: input failures are usage errors, any other
/// failure of every row is a numerical error.
fn rows_status(rows: &[ShiftReport]) -> Result<(), CliError> {
    if let Some(r) = rows.iter().find(|r| r.status == "input-failed") {
        return Err(usage(r.message.clone().unwrap_or_default()));
    }
    let failed = |r: &ShiftReport| r.status.ends_with("-failed");
    if !rows.is_empty() && rows.iter().all(failed) {
        let msg = rows[0].message.clone().unwrap_or_else(|| rows[0].status.clone());
        return Err(numerical(msg));
    }
    Ok(())
}

/// One line per failed condition: its sample count and first offending point.
fn violation_summary(report: &ValidationReport) -> Vec<String> {
    let mut ids: Vec<u8> = report.violations.iter().map(|v| v.assumption).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter()
        .map(|id| {
            let hits: Vec<_> = report.violations.iter().filter(|v| v.assumption == id).collect();
            format!(
                "condition {id} ({}) fails at {} sample(s), first at x = {} (observed {})",
                describe_assumption(id),
                hits.len(),
                hits[0].x,
                hits[0].observed
            )
        })
        .collect()
}

fn cmd_validate(
    cfg: &FileConfig,
    problem: &ProblemArgs,
    samples: Option<usize>,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let (p, domain, _) = resolve_problem(problem, cfg)?;
    let samples = pick(samples, cfg.samples).unwrap_or(DEFAULT_SAMPLES);
    let report = validate_potential(&p, &domain, samples);
    println!("potential {} on {domain}: {}", p.label(), if report.passed { "valid" } else { "INVALID" });
    for line in violation_summary(&report) {
        println!("  {line}");
    }
    let mut doc = RunDocument::new("validate");
    let passed = report.passed;
    doc.validation = Some(report);
    emit_json(&doc, output, cfg)?;
    if passed {
        Ok(())
    } else {
        Err(usage("potential fails validation"))
    }
}

fn check_valid(p: &PotentialSpec, domain: &ConfinementDomain) -> Result<(), CliError> {
    let report = validate_potential(p, domain, DEFAULT_SAMPLES);
    if report.passed {
        return Ok(());
    }
    Err(usage(format!("potential fails validation: {}", violation_summary(&report).join("; "))))
}

fn cmd_shift(
    cfg: &FileConfig,
    problem: &ProblemArgs,
    m: u32,
    h: f64,
    oracle_grid: Option<usize>,
    tolerances: &ToleranceArgs,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let (potential, domain, nu) = resolve_problem(problem, cfg)?;
    check_valid(&potential, &domain)?;
    let problem = ShiftProblem { potential, domain, m, nu };
    let opts = ReportOptions { solve: solve_options(tolerances, cfg), oracle_grid, ..ReportOptions::default() };
    let report = shift_report(&problem, h, &opts);
    print!("{}", render_table(std::slice::from_ref(&report)));
    if let (Some(fd), Some(d)) = (report.diagnostics.oracle, report.diagnostics.oracle_relative_difference) {
        println!("finite-difference eigenvalue {fd:.15e} (relative difference {d:.2e})");
    }
    print_warnings(std::slice::from_ref(&report));
    let rows = [report];
    let mut doc = RunDocument::new("shift");
    doc.reports = rows.to_vec();
    emit_json(&doc, output, cfg)?;
    emit_csv(&rows, output, cfg, write_shift_csv)?;
    rows_status(&rows)
}

fn cmd_sweep(
    cfg: &FileConfig,
    problem: &ProblemArgs,
    m: u32,
    grid_text: &str,
    tolerances: &ToleranceArgs,
    output: &OutputArgs,
    exec: Execution,
) -> Result<(), CliError> {
    let hs = match parse_list(grid_text, "h-grid")?.as_slice() {
        [start, stop, count] if count.fract() == 0.0 && *count >= 0.0 => {
            geometric_grid(*start, *stop, *count as usize).map_err(usage)?
        }
        _ => return Err(usage(format!("--h-grid expects start,stop,count, got {grid_text:?}"))),
    };
    let (potential, domain, nu) = resolve_problem(problem, cfg)?;
    check_valid(&potential, &domain)?;
    let problem = ShiftProblem { potential, domain, m, nu };
    let opts = ReportOptions { solve: solve_options(tolerances, cfg), ..ReportOptions::default() };
    let result = sweep(&problem, &hs, &opts, exec);
    print!("{}", render_table(&result.reports));
    match result.order {
        Some(f) => println!("empirical order of |ratio-1| in h: {:.4} ({} points)", f.order, f.points),
        None => println!("empirical order: not enough resolved rows"),
    }
    print_warnings(&result.reports);
    let mut doc = RunDocument::new("sweep");
    doc.reports = result.reports.clone();
    doc.order = result.order;
    emit_json(&doc, output, cfg)?;
    emit_csv(&result.reports, output, cfg, write_shift_csv)?;
    rows_status(&result.reports)
}

fn cmd_hydrogen(
    cfg: &FileConfig,
    base: HydrogenSpec,
    radii: &[f64],
    tolerances: &ToleranceArgs,
    output: &OutputArgs,
    exec: Execution,
) -> Result<(), CliError> {
    for &r in radii {
        HydrogenSpec { r, ..base }.validate().map_err(usage)?;
    }
    let opts = ReportOptions { solve: solve_options(tolerances, cfg), ..ReportOptions::default() };
    let result = hydrogen_sweep(&base, radii, &opts, exec);
    print!("{}", render_table(&result.reports));
    if let Some(f) = result.order {
        println!("empirical order of |ratio-1| in R: {:.4} ({} points)", f.order, f.points);
    }
    print_warnings(&result.reports);
    let mut doc = RunDocument::new("hydrogen");
    doc.reports = result.reports.clone();
    doc.order = result.order;
    emit_json(&doc, output, cfg)?;
    emit_csv(&result.reports, output, cfg, write_hydrogen_csv)?;
    rows_status(&result.reports)
}

fn render_oracle(rows: &[OracleRow]) -> String {
    let mut out = format!("{:>3}  {:>24}  {:>24}  {:>10}  status\n", "m", "shooting", "finite_difference", "rel_diff");
    for r in rows {
        let shot = r.shooting.map_or("-".to_string(), |v| format!("{v:.16e}"));
        let diff = r.relative_difference.map_or("-".to_string(), |v| format!("{v:.2e}"));
        out.push_str(&format!(
            "{:>3}  {:>24}  {:>24.16e}  {:>10}  {}{}\n",
            r.index_m,
            shot,
            r.finite_difference,
            diff,
            r.status,
            if r.reduced_accuracy { " (reduced accuracy)" } else { "" }
        ));
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn cmd_oracle(
    cfg: &FileConfig,
    problem: &ProblemArgs,
    h: f64,
    grid_n: usize,
    count: usize,
    tolerances: &ToleranceArgs,
    output: &OutputArgs,
    exec: Execution,
) -> Result<(), CliError> {
    let (potential, domain, nu) = resolve_problem(problem, cfg)?;
    check_valid(&potential, &domain)?;
    let base = match nu {
        None => ModeSpec::line(0, h),
        Some(nu) => ModeSpec::radial(0, h, nu),
    }
    .map_err(usage)?;
    let rows = oracle_table(&potential, &domain, &base, grid_n, count, &solve_options(tolerances, cfg), exec).map_err(
        |e| match e {
            confine_core::spectra::SpectraError::InvalidRequest(_) => usage(e),
            other => numerical(other),
        },
    )?;
    print!("{}", render_oracle(&rows));
    let mut doc = RunDocument::new("oracle");
    doc.oracle = rows.clone();
    emit_json(&doc, output, cfg)?;
    if rows.iter().any(|r| r.shooting.is_none()) {
        return Err(numerical("shooting failed for at least one mode"));
    }
    Ok(())
}
