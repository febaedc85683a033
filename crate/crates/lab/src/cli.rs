//! `dgsm-lab` subcommands.
//!
//! Settings resolve as command-line flags, then the configuration file, then
//! built-in defaults. Every run ends with exactly one line on standard error
//! that starts with `status:`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dgsm_core::analysis::analyze;
use dgsm_core::distributions::DEFAULT_CHEEGER_TOL;
use dgsm_core::report::{
    compare, reference_setup, reproduction_options, screen, ReferenceTable, DEFAULT_SCREENING_THRESHOLD,
};
use dgsm_core::{ConstantPolicy, Marginal, SensitivityReport};

use crate::config::{Format, MarginalSpec, RunConfig};
use crate::error::{ExitCode, LabError, Result};
use crate::output;
use crate::parallel::{default_workers, Parallel};

/// Seed used by `bench` when none is given.
pub const DEFAULT_BENCH_SEED: u64 = 2013;

#[derive(Debug, Parser)]
#[command(name = "dgsm-lab", version, about = "Sobol' indices, DGSM and Poincaré bounds")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Run configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Threads for model evaluation [default: number of processors].
    #[arg(
        long,
        global = true,
        value_name = "N",
        env = "DGSM_LAB_WORKERS",
        value_parser = clap::value_parser!(u16).range(1..)
    )]
    pub workers: Option<u16>,
    /// Directory for report files; reports go to standard output without it.
    #[arg(long, global = true, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Report formats, comma separated.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline described by a configuration file.
    Analyze {
        /// Configuration file; same as --config.
        #[arg(value_name = "CONFIG")]
        path: Option<PathBuf>,
    },
    /// Print Cheeger and Poincaré constants of one marginal law.
    ///
    /// The law is a family name followed by key=value parameters, e.g.
    /// `exponential lambda=4` or `truncated_normal mu=30 sigma=8 lo=15`.
    Cheeger {
        #[arg(required = true, num_args = 1.., value_name = "SPEC")]
        spec: Vec<String>,
        /// Only the numeric supremum.
        #[arg(long, group = "mode")]
        numeric: bool,
        /// Only the closed form.
        #[arg(long, group = "mode")]
        analytic: bool,
        /// The constant used in the bound, the closed form and the numeric supremum.
        #[arg(long, group = "mode")]
        both: bool,
        /// Relative tolerance of the numeric search.
        #[arg(long, default_value_t = DEFAULT_CHEEGER_TOL)]
        tol: f64,
    },
    /// Rerun a published experiment and compare with its reference table.
    Bench {
        /// One of: morris, flood-overflow, flood-cost.
        table: String,
        /// Fraction of the published sample sizes.
        #[arg(long, default_value_t = 1.0)]
        budget: f64,
    },
}

/// Parse `args`, run, and return the exit code. Reports go to `out`,
/// diagnostics and the status line to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    let _ = writeln!(err, "status: ok");
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    let _ = writeln!(err, "status: error kind=usage exit={}", ExitCode::Usage as i32);
                    ExitCode::Usage as i32
                }
            };
        }
    };
    let outcome = match &cli.command {
        Command::Analyze { path } => cmd_analyze(&cli.global, path.as_ref(), out, err),
        Command::Cheeger { spec, numeric, analytic, both, tol } => {
            let mode = match (numeric, analytic, both) {
                (true, _, _) => CheegerMode::Numeric,
                (_, true, _) => CheegerMode::Analytic,
                (_, _, true) => CheegerMode::Both,
                _ => CheegerMode::Bound,
            };
            cmd_cheeger(spec, mode, *tol, out)
        }
        Command::Bench { table, budget } => cmd_bench(&cli.global, table, *budget, out, err),
    };
    let _ = out.flush();
    match outcome {
        Ok(Outcome::Ok) => {
            let _ = writeln!(err, "status: ok");
            0
        }
        Ok(Outcome::ChecksFailed(n)) => {
            let _ = writeln!(err, "status: fail failed_checks={n} exit={}", ExitCode::Failure as i32);
            ExitCode::Failure as i32
        }
        Err(e) => {
            let code = e.exit_code() as i32;
            let _ = writeln!(err, "error: {}", one_line(&e.to_string()));
            let _ = writeln!(err, "status: error kind={} exit={code}", e.kind());
            code
        }
    }
}

enum Outcome {
    Ok,
    ChecksFailed(usize),
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn workers(global: &GlobalArgs) -> usize {
    global.workers.map_or_else(default_workers, usize::from)
}

fn timestamp() -> Option<String> {
    time::OffsetDateTime::now_utc().format(&time::format_description::well_known::Rfc3339).ok()
}

/// Flag over configuration over the CSV default.
fn formats(global: &GlobalArgs, configured: &[Format]) -> Vec<Format> {
    if !global.format.is_empty() {
        global.format.clone()
    } else if !configured.is_empty() {
        configured.to_vec()
    } else {
        vec![Format::Csv]
    }
}

fn emit(
    report: &SensitivityReport,
    dir: Option<&PathBuf>,
    formats: &[Format],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    match dir {
        Some(dir) => {
            for path in output::write_files(report, dir, formats)? {
                let _ = writeln!(err, "wrote {}", path.display());
            }
        }
        None => {
            for &f in formats {
                out.write_all(output::render(report, f)?.as_bytes())
                    .map_err(|source| LabError::Write { path: "<stdout>".into(), source })?;
            }
        }
    }
    Ok(())
}

fn note_uninformative(report: &SensitivityReport, err: &mut dyn Write) -> Result<()> {
    let s = screen(report, DEFAULT_SCREENING_THRESHOLD)?;
    for &j in &s.uninformative {
        let rec = &report.inputs[j];
        let _ = writeln!(err, "note: {} has upsilon = {:.4} > 1, an uninformative bound", rec.name, rec.upsilon);
    }
    Ok(())
}

fn cmd_analyze(
    global: &GlobalArgs,
    positional: Option<&PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<Outcome> {
    let path = match (positional, &global.config) {
        (Some(p), _) | (None, Some(p)) => p,
        (None, None) => return Err(LabError::Usage("analyze needs a configuration file".into())),
    };
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let space = cfg.input_space()?;
    let model = Parallel::new(cfg.build_model()?, workers(global))?;
    let mut report = analyze(&model, &space, &cfg.analysis_options())?;
    report.meta.timestamp = timestamp();
    note_uninformative(&report, err)?;
    let dir = global.output.as_ref().or(cfg.outputs.dir.as_ref());
    emit(&report, dir, &formats(global, &cfg.outputs.formats), out, err)?;
    Ok(Outcome::Ok)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CheegerMode {
    /// The constant the bound uses under each policy.
    Bound,
    Numeric,
    Analytic,
    Both,
}

/// `family key=value ...`, or a single JSON object.
pub fn parse_marginal(spec: &[String]) -> Result<Marginal> {
    let joined = spec.join(" ");
    let value: serde_json::Value = if joined.trim_start().starts_with('{') {
        serde_json::from_str(&joined).map_err(|e| LabError::Usage(format!("invalid law {joined:?}: {e}")))?
    } else {
        let mut obj = serde_json::Map::new();
        obj.insert("family".into(), spec[0].to_lowercase().replace('-', "_").into());
        for kv in &spec[1..] {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| LabError::Usage(format!("expected key=value, got {kv:?}")))?;
            let v: f64 = match v {
                "inf" | "+inf" => f64::INFINITY,
                "-inf" => f64::NEG_INFINITY,
                _ => v.parse().map_err(|_| LabError::Usage(format!("{k}: {v:?} is not a number")))?,
            };
            // infinite bounds are the same as omitted ones
            if v.is_finite() {
                obj.insert(k.into(), v.into());
            }
        }
        serde_json::Value::Object(obj)
    };
    let m: MarginalSpec =
        serde_json::from_value(value).map_err(|e| LabError::Usage(format!("invalid law {joined:?}: {e}")))?;
    m.to_marginal()
}

fn method_label(m: dgsm_core::distributions::CheegerMethod) -> &'static str {
    use dgsm_core::distributions::CheegerMethod::*;
    match m {
        SharpKnown => "sharp_known",
        AnalyticCheeger => "analytic_cheeger",
        NumericCheeger => "numeric_cheeger",
    }
}

fn cmd_cheeger(spec: &[String], mode: CheegerMode, tol: f64, out: &mut dyn Write) -> Result<Outcome> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(LabError::Usage(format!("--tol must lie in (0, 1), got {tol}")));
    }
    let m = parse_marginal(spec)?;
    let mut lines = vec![format!("law: {m:?}")];
    let (median, (lo, hi)) = (m.median(), m.support());
    lines.push(format!("median: {median:.10}  support: [{lo}, {hi}]"));
    if matches!(mode, CheegerMode::Bound | CheegerMode::Both) {
        for (label, policy) in [("prefer-sharp", ConstantPolicy::PreferSharp), ("cheeger-only", ConstantPolicy::CheegerOnly)] {
            let p = m.poincare_constant(policy)?;
            lines.push(format!("{label}: C1 = {:.10}  C = {:.10}  ({})", p.c1, p.c, method_label(p.method)));
        }
    }
    if matches!(mode, CheegerMode::Analytic | CheegerMode::Both) {
        match m.cheeger_analytic() {
            Some(c1) => lines.push(format!("analytic: C1 = {c1:.10}  C = {:.10}", 4.0 * c1 * c1)),
            None if mode == CheegerMode::Analytic => {
                return Err(LabError::Usage(format!("no closed-form Cheeger constant for {}", m.family())))
            }
            None => lines.push("analytic: none".into()),
        }
    }
    if matches!(mode, CheegerMode::Numeric | CheegerMode::Both) {
        let s = m.cheeger_supremum(tol)?;
        lines.push(format!(
            "numeric: C1 = {:.10}  C = {:.10}  at x = {:.10} (grid step {:.3e})",
            s.value,
            4.0 * s.value * s.value,
            s.location,
            s.grid_step
        ));
    }
    for l in lines {
        writeln!(out, "{l}").map_err(|source| LabError::Write { path: "<stdout>".into(), source })?;
    }
    Ok(Outcome::Ok)
}

fn cmd_bench(
    global: &GlobalArgs,
    table: &str,
    budget: f64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<Outcome> {
    let table = ReferenceTable::from_id(table).ok_or_else(|| {
        LabError::Usage(format!("unknown table {table:?}; expected morris, flood-overflow or flood-cost"))
    })?;
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(LabError::Usage(format!("--budget must be positive, got {budget}")));
    }
    let (model, space) = reference_setup(table);
    let model = Parallel::new(model, workers(global))?;
    let opts = reproduction_options(table, budget, global.seed.unwrap_or(DEFAULT_BENCH_SEED));
    let mut report = analyze(&model, &space, &opts)?;
    report.meta.timestamp = timestamp();
    if let Some(dir) = &global.output {
        emit(&report, Some(dir), &formats(global, &[]), out, err)?;
    }
    let reproduction = compare(table, budget, report)?;
    write!(out, "{reproduction}").map_err(|source| LabError::Write { path: "<stdout>".into(), source })?;
    let failed = reproduction.failures().count();
    Ok(if failed == 0 { Outcome::Ok } else { Outcome::ChecksFailed(failed) })
}
