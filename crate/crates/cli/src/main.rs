//! `cubic`: command-line front end for cubic couplings on finite spaces.

mod commands;
mod input;

use clap::{Args, Parser, Subcommand, ValueEnum};
use input::InputError;
use serde_json::{json, Map, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "CUBIC_THREADS";

#[derive(Parser)]
#[command(name = "cubic", version, about = "Cubic couplings, uniformity seminorms and exchangeable cube laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    timing: bool,
    /// Lift the conservative size caps.
    #[arg(long = "unsafe", global = true)]
    unsafe_caps: bool,
    /// Scalar backend for function-valued computations.
    #[arg(long, global = true, value_enum, default_value_t = ScalarArg::Exact)]
    scalar: ScalarArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScalarArg {
    Exact,
    Float,
}

#[derive(Args, Debug)]
pub struct Source {
    /// Standard cube coupling of a group: `5`, `2,2` or a group spec file.
    #[arg(long, conflicts_with = "system")]
    pub group: Option<String>,
    /// Host-Kra coupling of a system spec file.
    #[arg(long)]
    pub system: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    V1,
    V2,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FactorKind {
    Fourier,
    HostKra,
}

#[derive(Subcommand)]
pub enum Command {
    /// Powered and rooted U^d seminorm of a function on a group.
    Gowers {
        #[arg(long)]
        group: String,
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        degree: usize,
    },
    /// U^d convolution of corner functions, given in vertex mask order.
    Convolve {
        #[arg(long)]
        group: String,
        #[arg(long)]
        functions: PathBuf,
        #[arg(long)]
        degree: usize,
    },
    /// Cubic pattern density, or a convergence check over a sequence file.
    Density {
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        function: Option<PathBuf>,
        /// Cube dimension of the pattern.
        #[arg(long)]
        k: Option<usize>,
        /// Comma-separated plain vertices; defaults to the even/odd pattern.
        #[arg(long)]
        plain: Option<String>,
        /// Comma-separated conjugated vertices.
        #[arg(long)]
        conjugated: Option<String>,
        #[arg(long, conflicts_with_all = ["group", "function"])]
        sequence: Option<PathBuf>,
        #[arg(long, default_value = "1/1000")]
        eps: String,
    },
    /// Checks both axiom systems of a cubic coupling.
    VerifyAxioms {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 3)]
        nmax: usize,
        #[arg(long, value_enum, default_value_t = Variant::Both)]
        variant: Variant,
    },
    /// Checks derived structural properties of a cubic coupling.
    VerifyDerived {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 3)]
        nmax: usize,
    },
    /// Builds Host-Kra couplings of a filtered system.
    HostKra {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value_t = 3)]
        nmax: usize,
        #[arg(long, requires = "degree")]
        function: Option<PathBuf>,
        #[arg(long, requires = "function")]
        degree: Option<usize>,
    },
    /// Fourier or Host-Kra factor as a partition of the atoms.
    Factor {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = FactorKind::Fourier)]
        kind: FactorKind,
    },
    /// Idempotence of a two-index coupling or of a relative square.
    Idempotence {
        #[arg(long, conflicts_with = "partition")]
        coupling: Option<PathBuf>,
        #[arg(long)]
        partition: Option<PathBuf>,
    },
    /// Samples the exchangeable law of a kernel on a finite window.
    SampleZeta {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        window: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV file receiving `sample_id,vertex,symbol` rows.
        #[arg(long)]
        batch: PathBuf,
    },
    /// Consistency and face-independence tests on a batch, or exactly on a kernel.
    TestExchangeable {
        #[arg(long, conflicts_with = "kernel")]
        batch: Option<PathBuf>,
        #[arg(long)]
        kernel: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        window: usize,
        #[arg(long)]
        alphabet: Option<usize>,
        /// Dimension of the compared embeddings.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gowers { .. } => "gowers",
            Command::Convolve { .. } => "convolve",
            Command::Density { .. } => "density",
            Command::VerifyAxioms { .. } => "verify-axioms",
            Command::VerifyDerived { .. } => "verify-derived",
            Command::HostKra { .. } => "host-kra",
            Command::Factor { .. } => "factor",
            Command::Idempotence { .. } => "idempotence",
            Command::SampleZeta { .. } => "sample-zeta",
            Command::TestExchangeable { .. } => "test-exchangeable",
        }
    }
}

/// Global options shared by every subcommand.
pub struct Settings {
    pub unsafe_caps: bool,
    pub scalar: ScalarArg,
}

fn configure_threads() -> Result<(), InputError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| InputError(format!("{}: `{}` is not a thread count", THREADS_ENV, v)))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| InputError(format!("{}: {}", THREADS_ENV, e)))?;
    }
    Ok(())
}

fn emit(cli: &Cli, text: &str) -> Result<(), InputError> {
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| InputError(format!("{}: {}", path.display(), e))),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let settings = Settings { unsafe_caps: cli.unsafe_caps, scalar: cli.scalar };
    let start = Instant::now();
    let outcome = configure_threads().and_then(|_| commands::run(&cli.command, &settings));
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::from(2);
        }
    };
    let mut doc = Map::new();
    doc.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    doc.insert("command".into(), json!(cli.command.name()));
    doc.insert("params".into(), Value::Object(outcome.params.into_iter().collect()));
    doc.insert("results".into(), serde_json::to_value(&outcome.report.checks).expect("report serializes"));
    if cli.timing {
        doc.insert("timing".into(), json!({ "seconds": cubic_core::scalar::float_value(start.elapsed().as_secs_f64()) }));
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("report serializes");
    text.push('\n');
    if let Err(e) = emit(&cli, &text) {
        eprintln!("error: {}", e);
        return ExitCode::from(2);
    }
    if outcome.report.passed() {
        ExitCode::SUCCESS
    } else {
        if let Some(c) = outcome.report.first_failure() {
            eprintln!("verification failed: {} ({})", c.check_id, c.witness.as_deref().unwrap_or("no witness"));
        }
        ExitCode::from(1)
    }
}
