//! Command-line front end: IMDE evaluation, training runs, evaluation of
//! checkpoints, and reproduction of the error tables.
//!
//! Exit codes: 0 on success, 2 on usage or configuration errors, 3 on
//! numerical failures.

pub mod config;
pub mod experiment;
pub mod reproduce;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use config::KvConfig;
pub use experiment::{
    evaluate, preset, run_experiment, write_artifacts, BatchSize, DataSource, Evaluation, ExperimentConfig,
    ExperimentOutcome, Preset, Scale,
};
pub use reproduce::{base_config, fill_orders, grid, reproduce, run_cells, Cell, TableId, TableRun};
pub use svg::{LinePlot, Series};

use crate::bench;
use crate::discovery::{save_reports, write_reports};
use crate::error::{Error, Result};
use crate::imde::engine::lmm_order;
use crate::imde::{hamiltonicity_defect, scale_of, ImdeField, ImdeMethod};
use crate::integrators::{LmmScheme, Method};
use crate::nn::Checkpoint;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Exit code for an error: usage and configuration problems give 2,
/// failures of a computation give 3.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Parse(_)
        | Error::Io(_)
        | Error::BadParams(_)
        | Error::UnknownProblem(_)
        | Error::UnknownMethodId(_)
        | Error::DimensionMismatch { .. }
        | Error::OddDimension(_)
        | Error::UnboundParameter(_)
        | Error::InvalidTableau(_)
        | Error::InvalidScheme(_)
        | Error::NotWeaklyStable
        | Error::NotConsistent(_)
        | Error::UnsupportedMethod(_)
        | Error::UnsupportedPrimitive(_) => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

#[derive(Parser, Debug)]
#[command(name = "imdelab", version, about = "Inverse modified differential equations and learned dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print IMDE coefficients f_0..f_K at a point as JSON.
    Imde(ImdeArgs),
    /// Train a network from a config file and write its artifacts.
    Train(RunArgs),
    /// Evaluate a saved checkpoint under a config file.
    Evaluate(EvaluateArgs),
    /// Rerun the grid behind one of the error tables.
    Reproduce(ReproduceArgs),
    /// Benchmark problems.
    Problems {
        #[command(subcommand)]
        action: ProblemsAction,
    },
}

#[derive(Subcommand, Debug)]
enum ProblemsAction {
    /// Names, default parameters, and sources.
    List,
}

#[derive(Args, Debug)]
struct ImdeArgs {
    #[arg(long)]
    problem: String,
    /// Problem parameter override, `name=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Runge-Kutta tableau, `symplectic-euler`, or a multistep scheme.
    #[arg(long)]
    method: String,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Comma-separated point; defaults to the problem's initial point.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Option<Vec<f64>>,
    /// Step size; defaults to the problem's data step.
    #[arg(long)]
    h: Option<f64>,
    /// Composition count of a one-step method.
    #[arg(long, default_value_t = 1)]
    s: usize,
}

#[derive(Args, Debug)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    /// desk or full.
    #[arg(long)]
    scale: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, kv: &mut KvConfig) -> Result<()> {
        if let Some(seed) = self.seed {
            kv.set("run.seed", seed)?;
        }
        if let Some(scale) = &self.scale {
            kv.set("run.scale", scale.parse::<Scale>()?)?;
        }
        if let Some(out) = &self.out {
            kv.set("run.out", out.display())?;
        }
        Ok(())
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    /// table2-euler, table2-midpoint, or table3.
    table: String,
    /// Optional config whose keys apply to every cell.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit code. Results go to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Imde(a) => cmd_imde(&a, stdout),
        Command::Train(a) => cmd_train(&a, stdout, stderr),
        Command::Evaluate(a) => cmd_evaluate(&a, stdout),
        Command::Reproduce(a) => cmd_reproduce(&a, stdout, stderr),
        Command::Problems { action: ProblemsAction::List } => cmd_problems(stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// A one-step method (composed `compositions` times) or a multistep scheme
/// by name, with its order.
pub fn resolve_method(name: &str, compositions: usize) -> Result<(ImdeMethod, usize)> {
    match Method::named(name) {
        Ok(m) => {
            let p = m.order();
            Ok((ImdeMethod::composed(m, compositions), p))
        }
        Err(_) => {
            let scheme = LmmScheme::named(name)?;
            if compositions != 1 {
                return Err(Error::Config("multistep schemes take no composition count".into()));
            }
            let p = lmm_order(&scheme);
            Ok((ImdeMethod::Multistep(scheme), p))
        }
    }
}

fn cmd_imde(a: &ImdeArgs, out: &mut dyn Write) -> Result<i32> {
    let problem = bench::problem(&a.problem, &a.params)?;
    let point = a.point.clone().unwrap_or_else(|| problem.x0.clone());
    if point.len() != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), got: point.len() });
    }
    let h = a.h.unwrap_or(problem.data_step);
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Config(format!("step must be positive, got {h}")));
    }
    let (method, order) = resolve_method(&a.method, a.s)?;
    let imde = ImdeField::new(&problem.field, method, a.k)?;
    let fs = imde.coefficients(&point, a.k)?;
    let scale = scale_of(&fs[0]).max(1.0);
    let rows: Vec<_> = fs
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let vanishes = k >= 1 && k < order && scale_of(v) <= 1e-12 * scale;
            let mut row = json!({ "k": k, "value": v });
            if vanishes {
                row["note"] = json!(format!("vanishes (order-{order} method)"));
            }
            row
        })
        .collect();
    let truncated = imde.truncated_eval(&point, h)?;
    let mut doc = json!({
        "problem": problem.name,
        "method": a.method,
        "compositions": a.s,
        "point": point,
        "h": h,
        "K": a.k,
        "coefficients": rows,
        "truncated": truncated,
    });
    if problem.dim() % 2 == 0 {
        let defect = hamiltonicity_defect(&imde.truncated_field_tower(h), std::slice::from_ref(&point))?;
        doc["hamiltonicity_defect"] = json!(defect);
    }
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    Ok(EXIT_OK)
}

fn load_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut kv = KvConfig::load(path)?;
    overrides.apply(&mut kv)?;
    ExperimentConfig::from_kv(&kv)
}

fn cmd_train(a: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(&a.config, &a.overrides)?;
    match run_experiment(&cfg) {
        Ok(outcome) => {
            let files = write_artifacts(&cfg, &outcome)?;
            write_reports(&mut *out, std::slice::from_ref(&outcome.report))?;
            writeln!(err, "checkpoint: {}", files.checkpoint.display())?;
            writeln!(err, "loss curve: {}", files.curve.display())?;
            writeln!(err, "report: {}", files.report.display())?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            // the failed run still leaves its config and a flagged report row
            std::fs::create_dir_all(&cfg.out)?;
            let files = experiment::Artifacts::for_run(&cfg.out, &cfg.run_id);
            std::fs::write(&files.config, cfg.to_kv().to_text())?;
            let row = cfg.blank_report(format!("failed: {e}"));
            save_reports(&files.report, std::slice::from_ref(&row))?;
            write_reports(&mut *out, std::slice::from_ref(&row))?;
            Err(e)
        }
    }
}

fn cmd_evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(&a.config, &a.overrides)?;
    let net = Checkpoint::load(&a.checkpoint)?.to_net()?;
    let data = cfg.train_data()?;
    let ev = evaluate(&cfg, &net, &data)?;
    let row = cfg.report(&ev);
    std::fs::create_dir_all(&cfg.out)?;
    save_reports(&cfg.out.join(format!("{}.eval.csv", cfg.run_id)), std::slice::from_ref(&row))?;
    write_reports(&mut *out, std::slice::from_ref(&row))?;
    Ok(EXIT_OK)
}

fn cmd_reproduce(a: &ReproduceArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let table: TableId = a.table.parse()?;
    let mut base = match &a.config {
        Some(p) => KvConfig::load(p)?,
        None => KvConfig::new(),
    };
    a.overrides.apply(&mut base)?;
    let dir = PathBuf::from(base.get("run.out").unwrap_or("out"));
    let (run, csv) = reproduce(table, &base, &dir)?;
    write_reports(&mut *out, &run.rows)?;
    writeln!(err, "table: {}", csv.display())?;
    let failed = run.rows.iter().filter(|r| r.status != "ok").count();
    if failed > 0 {
        writeln!(err, "{failed} cell(s) failed")?;
        return Ok(EXIT_NUMERIC);
    }
    Ok(EXIT_OK)
}

fn cmd_problems(out: &mut dyn Write) -> Result<i32> {
    for name in bench::PROBLEM_NAMES {
        let p = bench::named(name)?;
        let params: Vec<String> = p.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let domains: Vec<String> = p
            .domains
            .iter()
            .map(|d| {
                let b: Vec<String> = d.bounds.iter().map(|(lo, hi)| format!("[{lo}, {hi}]")).collect();
                format!("{} {}", d.name, b.join("x"))
            })
            .collect();
        writeln!(out, "{name}")?;
        writeln!(out, "  {}", p.description)?;
        writeln!(out, "  params: {}", if params.is_empty() { "none".into() } else { params.join(", ") })?;
        writeln!(out, "  x0: {:?}  data step: {}  horizon: {}", p.x0, p.data_step, p.horizon)?;
        writeln!(out, "  domains: {}", domains.join("; "))?;
        writeln!(out, "  source: {}", p.citation)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("imdelab").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn imde_pendulum_euler_row() {
        let (code, out, _) =
            call(&["imde", "--problem", "pendulum", "--method", "euler", "--k", "1", "--point", "0,1"]);
        assert_eq!(code, 0);
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        let f1 = doc["coefficients"][1]["value"].as_array().unwrap();
        assert!(f1[0].as_f64().unwrap().abs() < 1e-12);
        assert!((f1[1].as_f64().unwrap() + 4.2073549).abs() < 1e-7);
        assert!(doc["hamiltonicity_defect"].as_f64().is_some());
    }

    #[test]
    fn imde_k0_and_midpoint_note() {
        let (_, out, _) = call(&["imde", "--problem", "pendulum", "--method", "euler", "--k", "0"]);
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["coefficients"].as_array().unwrap().len(), 1);
        let (_, out, _) = call(&["imde", "--problem", "pendulum", "--method", "midpoint", "--k", "1"]);
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["coefficients"][1]["note"], "vanishes (order-2 method)");
        let (code, out, _) = call(&["imde", "--problem", "lorenz", "--method", "ab2", "--k", "2"]);
        assert_eq!(code, 0);
        assert!(out.contains("vanishes (order-2 method)") && !out.contains("hamiltonicity"));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(call(&["imde", "--problem", "nowhere", "--method", "euler"]).0, 2);
        assert_eq!(call(&["imde", "--problem", "pendulum", "--method", "rk9"]).0, 2);
        assert_eq!(call(&["imde", "--problem", "pendulum", "--method", "euler", "--point", "1"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["train", "--config", "/nonexistent/cfg"]).0, 2);
        assert_eq!(call(&["reproduce", "table9"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn problems_list_names_everything() {
        let (code, out, _) = call(&["problems", "list"]);
        assert_eq!(code, 0);
        for name in bench::PROBLEM_NAMES {
            assert!(out.lines().any(|l| l == name), "{name}");
        }
        assert!(out.contains("source: Brunton"));
    }

    #[test]
    fn numeric_failures_exit_3() {
        assert_eq!(exit_code(&Error::NonFinite { step: 3, loss: f64::NAN }), 3);
        assert_eq!(exit_code(&Error::StepUnderflow { step: 1e-13 }), 3);
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
    }
}
