//! Command-line parsing and dispatch.

use crate::config::{parse_seeds, Config, ConfigError};
use crate::report::{ClaimRecord, Report};
use crate::suites::{self, SuiteError};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sievecert::decomposition::CaseReport;
use sievecert::{combinatorics, decomposition, exponents};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sievecert", version, about = "Verify Buchstab integrals, exponent inequalities and sieve combinatorics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Quadrature tolerance.
    #[arg(long, global = true)]
    pub quad_tol: Option<f64>,
    /// Region widening epsilon_1.
    #[arg(long, global = true)]
    pub eps1: Option<f64>,
    /// Comma-separated falsification seeds.
    #[arg(long, global = true)]
    pub seeds: Option<String>,
    /// Upper bound on concurrent work items.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Report path.
    #[arg(long, global = true, default_value = "report.json")]
    pub report: PathBuf,
    /// File of key = value settings, overridden by flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving omega.csv and thetas.csv.
    #[arg(long, global = true)]
    pub emit_csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Checks on the tabulated Buchstab function.
    VerifyOmega,
    /// Evaluates the discarded terms of the decomposition cases.
    VerifyDecomposition {
        #[arg(long)]
        case: Option<String>,
    },
    /// Certifies exponent inequalities by branch and bound.
    VerifyExponents {
        #[arg(long)]
        claim: Option<String>,
    },
    /// Falsification runs over the combinatorial cases.
    VerifyCombinatorics {
        #[arg(long)]
        case: Option<String>,
    },
    /// Every suite.
    VerifyAll,
    /// Prints the claim catalogue as JSON; optionally writes the omega table.
    DumpCatalog {
        #[arg(long)]
        omega: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifyOmega => "verify-omega",
            Command::VerifyDecomposition { .. } => "verify-decomposition",
            Command::VerifyExponents { .. } => "verify-exponents",
            Command::VerifyCombinatorics { .. } => "verify-combinatorics",
            Command::VerifyAll => "verify-all",
            Command::DumpCatalog { .. } => "dump-catalog",
        }
    }
}

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error("{0}")]
    Output(String),
}

impl AppError {
    fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Suite(SuiteError::UnknownId { .. }) => EXIT_USAGE,
            _ => EXIT_FAIL,
        }
    }
}

fn output<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> AppError + '_ {
    move |e| AppError::Output(format!("{}: {e}", path.display()))
}

/// Defaults, then the config file, then flags.
pub fn resolve_config(common: &Common) -> Result<Config, ConfigError> {
    let mut cfg = Config::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    if let Some(x) = common.quad_tol {
        cfg.quad_tol = x;
    }
    if let Some(x) = common.eps1 {
        cfg.epsilon1 = x;
    }
    if let Some(s) = &common.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(j) = common.jobs {
        cfg.jobs = j;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct ThetaEntry<'a> {
    id: &'a str,
    claimed_bound: f64,
    anchor: &'a str,
}

#[derive(Serialize)]
struct CaseEntry<'a> {
    key: &'a str,
    a_case: &'a str,
    beta: f64,
    claimed_total: f64,
    thetas: Vec<ThetaEntry<'a>>,
}

#[derive(Serialize)]
struct ExponentEntry<'a> {
    id: &'a str,
    family: &'a str,
    relation: &'a str,
    region: Vec<(String, f64, f64)>,
    anchor: &'a str,
}

#[derive(Serialize)]
struct CombinatoricsEntry<'a> {
    id: &'a str,
    family: combinatorics::Family,
    r: usize,
    a_interval: (f64, f64),
    beta: Option<combinatorics::BetaRule>,
    anchor: &'a str,
}

#[derive(Serialize)]
struct Catalogue<'a> {
    decomposition: Vec<CaseEntry<'a>>,
    exponents: Vec<ExponentEntry<'a>>,
    combinatorics: Vec<CombinatoricsEntry<'a>>,
}

fn catalogue_json() -> String {
    let cases = decomposition::case_catalog();
    let claims = exponents::catalog_claims();
    let comb = combinatorics::case_catalog();
    let cat = Catalogue {
        decomposition: cases
            .iter()
            .map(|c| CaseEntry {
                key: c.key,
                a_case: c.a_case,
                beta: c.beta,
                claimed_total: c.claimed_total,
                thetas: c
                    .thetas
                    .iter()
                    .map(|t| ThetaEntry {
                        id: &t.id,
                        claimed_bound: t.claimed_bound,
                        anchor: &t.anchor,
                    })
                    .collect(),
            })
            .collect(),
        exponents: claims
            .iter()
            .map(|c| ExponentEntry {
                id: &c.id,
                family: c.family,
                relation: c.relation.symbol(),
                region: c.region.iter().map(|&(v, lo, hi)| (v.name(), lo, hi)).collect(),
                anchor: &c.anchor,
            })
            .collect(),
        combinatorics: comb
            .iter()
            .map(|c| CombinatoricsEntry {
                id: &c.id,
                family: c.family,
                r: c.r,
                a_interval: c.a_interval,
                beta: c.beta,
                anchor: &c.anchor,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&cat).expect("catalogue serializes") + "\n"
}

fn write_csv(dir: &Path, table: Option<&sievecert::buchstab::PiecewiseOmega>, cases: &[CaseReport]) -> Result<(), AppError> {
    fs::create_dir_all(dir).map_err(output(dir))?;
    if let Some(t) = table {
        let path = dir.join("omega.csv");
        let mut w = csv::Writer::from_path(&path).map_err(output(&path))?;
        w.write_record(["u", "omega"]).map_err(output(&path))?;
        for (u, v) in t.samples() {
            w.serialize((u, v)).map_err(output(&path))?;
        }
        w.flush().map_err(output(&path))?;
    }
    if !cases.is_empty() {
        let path = dir.join("thetas.csv");
        let mut w = csv::Writer::from_path(&path).map_err(output(&path))?;
        w.write_record(["case", "theta", "value", "err", "claimed_bound", "pass"])
            .map_err(output(&path))?;
        for c in cases {
            for t in &c.thetas {
                w.serialize((&c.key, &t.id, t.value, t.err, t.claimed_bound, t.pass))
                    .map_err(output(&path))?;
            }
        }
        w.flush().map_err(output(&path))?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32, AppError> {
    let cfg = resolve_config(&cli.common)?;
    if let Command::DumpCatalog { omega } = &cli.command {
        print!("{}", catalogue_json());
        if let Some(path) = omega {
            let table = suites::omega_table(&cfg)?;
            let file = fs::File::create(path).map_err(output(path))?;
            table
                .dump(std::io::BufWriter::new(file))
                .map_err(output(path))?;
        }
        return Ok(EXIT_PASS);
    }
    // Unknown ids are usage errors, so selections are resolved before any work starts.
    match &cli.command {
        Command::VerifyDecomposition { case } => {
            suites::decomposition_cases(case.as_deref())?;
        }
        Command::VerifyExponents { claim } => {
            suites::exponent_selection(claim.as_deref())?;
        }
        Command::VerifyCombinatorics { case } => {
            suites::combinatorics_selection(case.as_deref())?;
        }
        _ => {}
    }
    let needs_table = matches!(
        cli.command,
        Command::VerifyOmega | Command::VerifyDecomposition { .. } | Command::VerifyAll
    );
    let table = if needs_table {
        Some(suites::omega_table(&cfg)?)
    } else {
        None
    };
    let mut claims: Vec<ClaimRecord> = Vec::new();
    let mut case_reports = Vec::new();
    let all = matches!(cli.command, Command::VerifyAll);
    if let (true, Some(t)) = (all || matches!(cli.command, Command::VerifyOmega), &table) {
        claims.extend(suites::omega_claims(t)?);
    }
    if let Some(t) = &table {
        let filter = match &cli.command {
            Command::VerifyDecomposition { case } => Some(case.as_deref()),
            Command::VerifyAll => Some(None),
            _ => None,
        };
        if let Some(filter) = filter {
            let (records, reports) = suites::decomposition_claims(&cfg, t, filter)?;
            claims.extend(records);
            case_reports = reports;
        }
    }
    match &cli.command {
        Command::VerifyExponents { claim } => claims.extend(suites::exponent_claims(&cfg, claim.as_deref())?),
        Command::VerifyAll => claims.extend(suites::exponent_claims(&cfg, None)?),
        _ => {}
    }
    match &cli.command {
        Command::VerifyCombinatorics { case } => {
            claims.extend(suites::combinatorics_claims(&cfg, case.as_deref())?)
        }
        Command::VerifyAll => claims.extend(suites::combinatorics_claims(&cfg, None)?),
        _ => {}
    }
    let report = Report::new(cli.command.name(), &cfg, claims);
    for c in &report.claims {
        println!("{:<22} {}", c.status, c.id);
    }
    let counts: Vec<String> = report.summary.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("summary {}", counts.join(" "));
    let path = &cli.common.report;
    fs::write(path, report.to_json()).map_err(output(path))?;
    if let Some(dir) = &cli.common.emit_csv {
        write_csv(dir, table.as_ref(), &case_reports)?;
    }
    Ok(report.exit_code())
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == EXIT_USAGE {
                eprintln!("run with --help for usage");
            }
            e.exit_code()
        }
    }
}
