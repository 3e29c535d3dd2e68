//! `qvar`: evaluate uncertainty relations on state and tuple specs, reproduce
//! the three-observable counterexample, scan and optimise parameter families.
//!
//! Exit codes: 0 success, 1 input error, 2 a correct relation is violated,
//! 3 the built-in reproduction failed.

mod format;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use format::{g12, to_json};
use qvar_core::inequalities::{applicable_suite, catalog, eval_false5, InequalityReport};
use qvar_core::scenario::{Family, Scenario, StateSpec, TupleKind, TupleSpec};
use qvar_core::search::{minimize, sweep, SearchProblem};
use qvar_core::MomentSet;
use serde::de::DeserializeOwned;
use serde_json::json;

const EXIT_INPUT: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const EXIT_SELF_TEST: u8 = 3;

#[derive(Parser)]
#[command(name = "qvar", version, about = "Variance uncertainty relations for several observables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every applicable relation on a state and tuple.
    Verify(VerifyArgs),
    /// Reproduce the CCS counterexample to the covariance-free determinant bound.
    Counterexample(CounterexampleArgs),
    /// Full-factorial sweep of a search problem.
    Scan(ScanArgs),
    /// Minimise a margin or ratio over a state family.
    Optimize(OptimizeArgs),
    /// List the inequality ids.
    Catalog(CatalogArgs),
    /// Print the moment set of a state and tuple.
    Moments(MomentsArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct StateArgs {
    /// State spec JSON.
    #[arg(long)]
    state: Option<PathBuf>,
    /// Tuple spec JSON.
    #[arg(long)]
    tuple: Option<PathBuf>,
    /// Moment set JSON, instead of a state and tuple.
    #[arg(long, conflicts_with_all = ["state", "tuple"])]
    moments: Option<PathBuf>,
    #[arg(long)]
    hbar: Option<f64>,
    /// Evaluate in a truncated Fock basis, e.g. `dim=60`.
    #[arg(long, value_parser = parse_fock)]
    fock_oracle: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: StateArgs,
    /// Absolute tolerance on margins.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CounterexampleArgs {
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long, value_parser = parse_fock)]
    fock_oracle: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ProblemArgs {
    /// Search problem JSON.
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    hbar: Option<f64>,
    #[arg(long, value_parser = parse_fock)]
    fock_oracle: Option<usize>,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Points per parameter, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CatalogArgs {
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    input: StateArgs,
    #[command(flatten)]
    output: Output,
}

fn parse_fock(s: &str) -> std::result::Result<usize, String> {
    let v = s.strip_prefix("dim=").ok_or_else(|| format!("expected dim=<int>, got `{s}`"))?;
    let d: usize = v.parse().map_err(|e| format!("bad dimension `{v}`: {e}"))?;
    if d < 2 {
        return Err("dimension must be at least 2".into());
    }
    Ok(d)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{}", path.display()))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn echo_config(config: &serde_json::Value) {
    eprintln!("config: {}", serde_json::to_string(config).unwrap_or_default());
}

fn apply_overrides(state: &mut StateSpec, hbar: Option<f64>, fock: Option<usize>) {
    if let Some(h) = hbar {
        state.hbar = Some(h);
    }
    if fock.is_some() {
        state.dim = fock;
    }
}

/// Moments plus the resolved configuration that produced them.
fn load_moments(a: &StateArgs) -> Result<(MomentSet, serde_json::Value)> {
    if let Some(path) = &a.moments {
        if a.hbar.is_some() || a.fock_oracle.is_some() {
            bail!("--hbar and --fock-oracle do not apply to --moments input");
        }
        let ms: MomentSet = read_json(path)?;
        let config = json!({ "moments": path });
        return Ok((ms, config));
    }
    let state_path = a.state.as_ref().ok_or_else(|| anyhow!("--state is required"))?;
    let tuple_path = a.tuple.as_ref().ok_or_else(|| anyhow!("--tuple is required"))?;
    let mut state: StateSpec = read_json(state_path)?;
    let tuple: TupleSpec = read_json(tuple_path)?;
    apply_overrides(&mut state, a.hbar, a.fock_oracle);
    let scenario = Scenario::new(state, tuple);
    let ms = scenario.moments()?;
    Ok((ms, serde_json::to_value(&scenario)?))
}

fn reports_csv(reports: &[InequalityReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "indices", "lhs", "rhs", "margin", "satisfied", "known_incorrect"])?;
    for r in reports {
        let idx = r
            .indices
            .as_ref()
            .map(|v| v.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        w.write_record([
            r.id.clone(),
            idx,
            g12(r.lhs),
            g12(r.rhs),
            g12(r.margin),
            r.satisfied.to_string(),
            r.known_incorrect.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn cmd_verify(a: &VerifyArgs) -> Result<u8> {
    let (ms, mut config) = load_moments(&a.input)?;
    let tol = a.tol.unwrap_or(qvar_core::Tolerances::INEQ);
    if !(tol > 0.0 && tol.is_finite()) {
        bail!("--tol must be positive");
    }
    config["tol"] = json!(tol);
    echo_config(&config);
    let reports: Vec<InequalityReport> = applicable_suite(&ms)?.into_iter().map(|r| r.rejudge(tol)).collect();
    let text = match a.output.format {
        Format::Json => to_json(&reports)?,
        Format::Csv => reports_csv(&reports)?,
    };
    emit(&a.output.out, &text)?;
    let violated: Vec<&str> = reports
        .iter()
        .filter(|r| !r.known_incorrect && !r.satisfied)
        .map(|r| r.id.as_str())
        .collect();
    if violated.is_empty() {
        eprintln!("{} relations evaluated; every correct relation holds", reports.len());
        Ok(0)
    } else {
        eprintln!("VIOLATED: {}", violated.join(", "));
        Ok(EXIT_VIOLATION)
    }
}

fn cmd_counterexample(a: &CounterexampleArgs) -> Result<u8> {
    let mut state = StateSpec::new(Family::Ccs, json!({}));
    apply_overrides(&mut state, Some(a.hbar), a.fock_oracle);
    let scenario = Scenario::new(state, TupleSpec::new(TupleKind::Xpxi));
    echo_config(&serde_json::to_value(&scenario)?);
    let r = eval_false5(&scenario.moments()?)?;
    let ratio = r.rhs / r.lhs;
    let ok = if a.fock_oracle.is_some() {
        let want_l = (a.hbar / 3f64.sqrt()).powi(3);
        ((ratio - 2.25).abs() <= 1e-6 * 2.25) && (r.lhs - want_l).abs() <= 1e-6 * want_l
    } else {
        (ratio - 2.25).abs() <= 1e-9 * 2.25
    };
    let text = match a.output.format {
        Format::Json => to_json(&json!({"L": r.lhs, "R": r.rhs, "R_over_L": ratio, "reproduced": ok}))?,
        Format::Csv => format!("L,R,R_over_L,reproduced\n{},{},{},{ok}\n", g12(r.lhs), g12(r.rhs), g12(ratio)),
    };
    emit(&a.output.out, &text)?;
    eprintln!(
        "correlated coherent state sigma = hbar/sqrt(3), r = -1/2, triple (x, p, x + p):\n  \
         L = X11 X22 X33 = {}\n  R = X11 Y23^2 + X22 Y13^2 + X33 Y12^2 = {}\n  R/L = {}",
        g12(r.lhs),
        g12(r.rhs),
        g12(ratio)
    );
    if ok {
        eprintln!("reproduced: the bound without covariances fails by the factor 9/4");
        Ok(0)
    } else {
        eprintln!("REPRODUCTION FAILED: expected R/L = 9/4");
        Ok(EXIT_SELF_TEST)
    }
}

fn load_problem(a: &ProblemArgs) -> Result<SearchProblem> {
    let mut p: SearchProblem = read_json(&a.problem)?;
    if let Some(s) = a.seed {
        p.seed = s;
    }
    apply_overrides(&mut p.family, a.hbar, a.fock_oracle);
    p.validate()?;
    Ok(p)
}

fn cmd_scan(a: &ScanArgs) -> Result<u8> {
    let p = load_problem(&a.problem)?;
    let config = json!({"problem": &p, "grid": &a.grid});
    echo_config(&config);
    let table = sweep(&p, &a.grid)?;
    let text = match a.format {
        Format::Json => to_json(&json!({"config": config, "table": table}))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = table.param_names.clone();
            header.extend(["lhs", "rhs", "margin", "satisfied"].map(String::from));
            w.write_record(&header)?;
            for row in &table.rows {
                let mut rec: Vec<String> = row.params.iter().map(|v| g12(*v)).collect();
                rec.extend([g12(row.lhs), g12(row.rhs), g12(row.margin), row.satisfied.to_string()]);
                w.write_record(&rec)?;
            }
            String::from_utf8(w.into_inner()?)?
        }
    };
    emit(&a.out, &text)?;
    Ok(0)
}

fn cmd_optimize(a: &OptimizeArgs) -> Result<u8> {
    let p = load_problem(&a.problem)?;
    echo_config(&serde_json::to_value(&p)?);
    let result = minimize(&p)?;
    let text = match a.output.format {
        Format::Json => to_json(&json!({"config": &p, "result": result}))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = result.param_names.clone();
            header.extend(["best_objective", "evaluations", "converged"].map(String::from));
            w.write_record(&header)?;
            let mut rec: Vec<String> = result.best_params.iter().map(|v| g12(*v)).collect();
            rec.extend([g12(result.best_objective), result.evaluations.to_string(), result.converged.to_string()]);
            w.write_record(&rec)?;
            String::from_utf8(w.into_inner()?)?
        }
    };
    emit(&a.output.out, &text)?;
    eprintln!(
        "best objective {} after {} evaluations (converged: {})",
        g12(result.best_objective),
        result.evaluations,
        result.converged
    );
    Ok(0)
}

fn cmd_catalog(a: &CatalogArgs) -> Result<u8> {
    let text = match a.output.format {
        Format::Json => to_json(&catalog())?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["id", "observables", "correct", "params", "statement"])?;
            for e in catalog() {
                let arity = match e.arity {
                    qvar_core::inequalities::Arity::Pair => "pairs".to_string(),
                    qvar_core::inequalities::Arity::Any => "any".to_string(),
                    qvar_core::inequalities::Arity::Exactly(n) => n.to_string(),
                };
                w.write_record([e.id, &arity, &e.correct.to_string(), e.params, e.statement])?;
            }
            String::from_utf8(w.into_inner()?)?
        }
    };
    emit(&a.output.out, &text)?;
    Ok(0)
}

fn cmd_moments(a: &MomentsArgs) -> Result<u8> {
    let (ms, config) = load_moments(&a.input)?;
    echo_config(&config);
    let text = match a.output.format {
        Format::Json => to_json(&ms)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["j", "k", "label_j", "label_k", "X", "Y"])?;
            for j in 0..ms.n() {
                for k in 0..ms.n() {
                    w.write_record([
                        (j + 1).to_string(),
                        (k + 1).to_string(),
                        ms.labels[j].clone(),
                        ms.labels[k].clone(),
                        g12(ms.cov(j, k)),
                        g12(ms.comm(j, k)),
                    ])?;
                }
            }
            String::from_utf8(w.into_inner()?)?
        }
    };
    emit(&a.output.out, &text)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Counterexample(a) => cmd_counterexample(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Catalog(a) => cmd_catalog(a),
        Command::Moments(a) => cmd_moments(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
