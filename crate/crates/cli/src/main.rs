mod commands;
mod document;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Verify conserved operators and the unitary symmetries they generate.
#[derive(Parser)]
#[command(name = "qnoether", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a builtin scenario or scenario file.
    Check(CheckArgs),
    /// Conservation residual i hbar dA/dt + [A, H] for ad-hoc expressions.
    Residual(ResidualArgs),
    /// Conjugation series of Y under exp(-i s A / hbar), or an ansatz verdict.
    Conjugate(ConjugateArgs),
    /// List builtin scenarios.
    List,
    /// Print the scenario or report schema.
    Schema {
        #[arg(value_enum, default_value_t = SchemaKind::Scenario)]
        which: SchemaKind,
    },
}

#[derive(Args)]
struct CheckArgs {
    /// Builtin name or path to a scenario file.
    scenario: String,
    /// Write the JSON report here.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Write one CSV row per sample here.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Parameter overrides, `k=v,...`.
    #[arg(long, value_name = "LIST")]
    params: Option<String>,
    /// Tolerance override for a check label or kind, repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tolerances: Vec<String>,
    /// Sample grids, e.g. `t=0:0.1:1;s=-1,0,1`.
    #[arg(long, value_name = "SPEC")]
    grid: Option<String>,
    /// Append seeded random (s, t) samples to the numeric grids.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ResidualMode {
    Symbolic,
    Numeric,
}

#[derive(Args)]
struct ResidualArgs {
    #[arg(long = "A", value_name = "EXPR")]
    a: String,
    #[arg(long = "H", value_name = "EXPR")]
    h: String,
    /// Parameter values, `k=v,...`; required in numeric mode.
    #[arg(long, value_name = "LIST")]
    params: Option<String>,
    #[arg(long, value_enum, default_value_t = ResidualMode::Symbolic)]
    mode: ResidualMode,
    /// Oscillator dimension for numeric mode.
    #[arg(long, default_value_t = 128)]
    dimension: usize,
    /// Trusted-subspace dimension for numeric mode.
    #[arg(long, default_value_t = 32)]
    trusted: usize,
    /// Time samples, e.g. `t=0:0.1:1`.
    #[arg(long, value_name = "SPEC")]
    grid: Option<String>,
}

#[derive(Args)]
struct ConjugateArgs {
    #[arg(long = "A", value_name = "EXPR")]
    a: String,
    #[arg(long = "Y", value_name = "EXPR")]
    y: Option<String>,
    /// Print the series coefficients C_0 ... C_n.
    #[arg(long, conflicts_with = "ansatz", required_unless_present = "ansatz")]
    order: Option<usize>,
    /// TOML file with `rates` and `terms` (and optionally `target`).
    #[arg(long, value_name = "FILE")]
    ansatz: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemaKind {
    Scenario,
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Check(args) => commands::check(&args),
        Command::Residual(args) => commands::residual(&args),
        Command::Conjugate(args) => commands::conjugate(&args),
        Command::List => commands::list(),
        Command::Schema { which } => commands::schema(which),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
