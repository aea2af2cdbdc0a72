//! `glevy`: batch front end for the G-Lévy engine.
//!
//! Every run reads one TOML document, performs one command and emits one
//! JSON record (stdout, and `<out>/<command>.json` when `--out` is given)
//! plus command-specific CSV files. Exit status: 0 success, 2 bad
//! arguments or configuration (nothing written), 3 a modelling assumption
//! failed, 4 numerical failure.

mod commands;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use glevy_core::config::{Method, RunConfig};
use glevy_core::Error;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Parser)]
#[command(name = "glevy", version, about = "Sublinear expectations for G-Levy processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the JSON record and CSV artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Evaluation backend for `expect`.
    #[arg(long, global = true, value_enum)]
    method: Option<MethodArg>,
    /// Do not print the record to stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Pide,
    Mc,
    Both,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Check the integrability assumptions on the uncertainty set.
    Validate,
    /// Upper expectation of a payoff of the terminal value.
    Expect,
    /// Expectation under the G-Poisson distribution.
    Gpoisson,
    /// Monte Carlo capacity of a path event.
    Capacity,
    /// Erlang lower bound on the capacity of a jump event.
    ErlangBound,
    /// Subtract the worst-case jump mean from a path.
    Compensate,
    /// G-martingale and symmetry check of a derived process.
    MartingaleCheck,
    /// Split a path into continuous and jump parts.
    Decompose,
    /// Transport maps from a power-law base measure onto the set.
    Transport,
    /// Function-space diagnostics for a test function.
    Fnspace,
    /// Skorohod-close paths with far-apart Poisson integrals.
    Counterexample,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Expect => "expect",
            Command::Gpoisson => "gpoisson",
            Command::Capacity => "capacity",
            Command::ErlangBound => "erlang-bound",
            Command::Compensate => "compensate",
            Command::MartingaleCheck => "martingale-check",
            Command::Decompose => "decompose",
            Command::Transport => "transport",
            Command::Fnspace => "fnspace",
            Command::Counterexample => "counterexample",
        }
    }
}

/// What a command produced.
pub struct Outcome {
    pub result: serde_json::Value,
    /// `(file name, contents)`
    pub csvs: Vec<(String, String)>,
    /// A check ran and its assumption failed.
    pub violated: bool,
}

pub struct Context {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub seed: Option<u64>,
    pub method: Option<Method>,
    pub with_artifacts: bool,
}

impl Context {
    pub fn seed(&self) -> Result<u64, Error> {
        self.seed
            .ok_or_else(|| Error::Parse("this command is stochastic and needs a seed".into()))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

#[derive(Serialize)]
struct Record<'a> {
    command: &'a str,
    version: &'a str,
    config_sha256: &'a str,
    seed: Option<u64>,
    status: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<serde_json::Value>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Precondition(_) => 3,
        Error::Cfl { .. } | Error::Numerical(_) | Error::Evaluation(_) => 4,
        _ => 2,
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let Some(config_path) = cli.config.as_deref() else {
        eprintln!("error: --config is required");
        return ExitCode::from(2);
    };
    let text = match fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let config = match RunConfig::from_toml_str(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let digest = hex(&Sha256::digest(text.as_bytes()));
    let method = cli.method.map(|m| match m {
        MethodArg::Pide => Method::Pide,
        MethodArg::Mc => Method::Mc,
        MethodArg::Both => Method::Both,
    });
    let ctx = Context {
        seed: cli.seed.or(config.seed),
        config,
        base_dir: config_path.parent().map(Path::to_path_buf).unwrap_or_default(),
        method,
        with_artifacts: cli.out.is_some(),
    };

    let outcome = commands::run(name, &ctx);
    let (code, status, error, result, csvs) = match outcome {
        Ok(o) if o.violated => (3, "assumption_violated", None, Some(o.result), o.csvs),
        Ok(o) => (0, "ok", None, Some(o.result), o.csvs),
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e}");
            if code == 2 {
                return ExitCode::from(2);
            }
            let status = if code == 3 { "assumption_violated" } else { "numerical_failure" };
            (code, status, Some(e.to_string()), None, Vec::new())
        }
    };
    let record = Record {
        command: name,
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: &digest,
        seed: ctx.seed,
        status,
        error,
        result,
    };
    let json = serde_json::to_string_pretty(&record).expect("records serialize") + "\n";
    if !cli.quiet {
        print!("{json}");
    }
    if let Some(dir) = &cli.out {
        let written = fs::create_dir_all(dir)
            .and_then(|_| fs::write(dir.join(format!("{name}.json")), &json))
            .and_then(|_| csvs.iter().try_for_each(|(f, c)| fs::write(dir.join(f), c)));
        if let Err(e) = written {
            eprintln!("error: writing artifacts to {}: {e}", dir.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}
