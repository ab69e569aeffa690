mod commands;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "hamlie", version, about = "Hamiltonian Lie algebras in three variables over GF(2^k)")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Field exponent k for GF(2^k)
    #[arg(long = "field-exp", global = true, default_value_t = 1)]
    pub field_exp: u32,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Md,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Closed,
    Nondeg,
    Nonalt,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Forms,
    Bilinear,
    Algebras,
    Invariants,
    All,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build the structure constants of P, Ptilde or P1
    Build {
        #[arg(long)]
        heights: String,
        /// Builtin tag (omega1..omega4) or a Form2 JSON file
        #[arg(long)]
        form: String,
        #[arg(long, default_value = "P")]
        variant: String,
    },
    /// Structural analysis of an algebra file
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "simple,derived,center,rank-invariant,normalizer,grading")]
        checks: Vec<String>,
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        /// Overrides --format
        #[arg(long, value_enum)]
        report: Option<Format>,
    },
    /// Canonical form of a flagged symmetric bilinear form
    ClassifyBilinear {
        #[arg(long)]
        heights: String,
        /// Upper triangle b11,b12,b13,b22,b23,b33 as field element bits
        #[arg(long)]
        matrix: String,
    },
    /// Check predicates of a 2-form
    Form {
        /// Builtin tag or a Form2 JSON file
        #[arg(long = "in")]
        input: String,
        /// Needed for builtin tags
        #[arg(long)]
        heights: Option<String>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "closed,nondeg,nonalt")]
        check: Vec<Check>,
    },
    /// Apply an admissible automorphism to a form or polynomial
    ApplyAuto {
        #[arg(long)]
        auto: PathBuf,
        /// Builtin tag or a Form2 JSON file
        #[arg(long)]
        form: Option<String>,
        /// Poly JSON file
        #[arg(long)]
        poly: Option<PathBuf>,
    },
    /// Run the scenario registry
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long = "max-dim", default_value_t = 63)]
        max_dim: usize,
        /// Treat budget overruns as failures
        #[arg(long = "strict-time")]
        strict_time: bool,
        /// Scenario manifest; defaults to the bundled one
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Include wall-clock timings in the report
        #[arg(long)]
        timings: bool,
    },
}

/// Failure class, mapped onto the exit code.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Verification(String),
}

impl From<hamlie_core::Error> for Failure {
    fn from(e: hamlie_core::Error) -> Self {
        match e {
            hamlie_core::Error::Internal(_) => Failure::Verification(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;

fn run(cli: Cli) -> CliResult<bool> {
    let g = &cli.global;
    match cli.cmd {
        Cmd::Build { heights, form, variant } => commands::build(g, &heights, &form, &variant),
        Cmd::Analyze { input, checks, mode, report } => commands::analyze(g, &input, &checks, &mode, report.unwrap_or(g.format)),
        Cmd::ClassifyBilinear { heights, matrix } => commands::classify_bilinear(g, &heights, &matrix),
        Cmd::Form { input, heights, check } => commands::form(g, &input, heights.as_deref(), &check),
        Cmd::ApplyAuto { auto, form, poly } => commands::apply_auto(g, &auto, form.as_deref(), poly.as_deref()),
        Cmd::Verify { suite, max_dim, strict_time, manifest, timings } => {
            verify::run(g, suite, max_dim, strict_time, manifest.as_deref(), timings)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Verification(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
