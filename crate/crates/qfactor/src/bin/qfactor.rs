//! Command-line front end for the factorization pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 contradiction/unsatisfiable,
//! 3 verification failure, 4 i/o error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use qfactor::grover::OracleMode;
use qfactor::pipeline::{
    cmd_export_qasm, cmd_factor, cmd_reduce, cmd_tomography, OutputFormat, PipelineError,
    RunConfig,
};
use qfactor::reduction::HamiltonianMode;

#[derive(Parser)]
#[command(
    name = "qfactor",
    version,
    about = "Factorizes odd composites with equal bit-length prime factors \
             via pseudo-Boolean reduction and phase-matched Grover amplification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and minimize the multiplication-table equation system.
    Reduce(CommonArgs),
    /// Run the full pipeline and decode factors from the kernel states.
    Factor(CommonArgs),
    /// Reconstruct the experimental density matrix and report fidelity.
    Tomography(CommonArgs),
    /// Write the full circuit as OpenQASM 2.0.
    ExportQasm {
        #[command(flatten)]
        common: CommonArgs,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Literal,
    Projector,
}

#[derive(Clone, Copy, ValueEnum)]
enum HamiltonianArg {
    Paper,
    Sos,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
    Csv,
}

#[derive(Args)]
struct CommonArgs {
    /// The odd composite to factorize.
    composite: String,
    /// Number of equal bit-length factors.
    #[arg(long, required_unless_present = "alpha_range")]
    alpha: Option<u32>,
    /// Inclusive sweep range "a..b": use the first alpha that reduces
    /// consistently.
    #[arg(long, value_name = "A..B", conflicts_with = "alpha")]
    alpha_range: Option<String>,
    /// Factor bit length; inferred (smallest feasible) when omitted.
    #[arg(long)]
    bit_len: Option<u32>,
    /// Polynomial combination used to build the Hamiltonian.
    #[arg(long, value_enum, default_value = "paper")]
    hamiltonian: HamiltonianArg,
    /// Oracle realization: phase-matched projector or literal exponential.
    #[arg(long = "mode", value_enum, default_value = "projector")]
    oracle_mode: ModeArg,
    /// Grover iteration override (default: smallest exact j).
    #[arg(long)]
    iterations: Option<u32>,
    /// Shots per measurement (0 = exact-probability mode).
    #[arg(long, default_value_t = 8192)]
    shots: u64,
    /// Seed for all sampling.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Project the reconstructed density matrix onto the nearest PSD
    /// unit-trace matrix before computing fidelity.
    #[arg(long)]
    psd: bool,
}

fn parse_range(s: &str) -> Result<(u32, u32), PipelineError> {
    let err = || PipelineError::Usage(format!("bad --alpha-range value: {s}"));
    let (a, b) = s.split_once("..").ok_or_else(err)?;
    Ok((
        a.trim().parse().map_err(|_| err())?,
        b.trim().parse().map_err(|_| err())?,
    ))
}

impl CommonArgs {
    fn config(&self) -> Result<RunConfig, PipelineError> {
        let composite = BigUint::from_str(&self.composite)
            .map_err(|_| PipelineError::Usage(format!("bad composite: {}", self.composite)))?;
        let alpha_range = self.alpha_range.as_deref().map(parse_range).transpose()?;
        let alpha = match (self.alpha, alpha_range) {
            (Some(a), _) => a,
            (None, Some((lo, _))) => lo,
            (None, None) => return Err(PipelineError::Usage("missing --alpha".to_string())),
        };
        let mut config = RunConfig::new(composite, alpha);
        config.alpha_range = alpha_range;
        config.bit_len = self.bit_len;
        config.hamiltonian_mode = match self.hamiltonian {
            HamiltonianArg::Paper => HamiltonianMode::Paper,
            HamiltonianArg::Sos => HamiltonianMode::Sos,
        };
        config.oracle_mode = match self.oracle_mode {
            ModeArg::Literal => OracleMode::Literal,
            ModeArg::Projector => OracleMode::Projector,
        };
        config.iterations = self.iterations;
        config.shots = self.shots;
        config.seed = self.seed;
        config.format = match self.format {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Csv => OutputFormat::Csv,
        };
        config.psd_projection = self.psd;
        Ok(config)
    }
}

fn run() -> Result<(), PipelineError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Reduce(args) => {
            print!("{}", ensure_newline(cmd_reduce(&args.config()?)?));
        }
        Command::Factor(args) => {
            print!("{}", ensure_newline(cmd_factor(&args.config()?)?));
        }
        Command::Tomography(args) => {
            print!("{}", ensure_newline(cmd_tomography(&args.config()?)?));
        }
        Command::ExportQasm { common, output } => {
            let text = cmd_export_qasm(&common.config()?)?;
            match output {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn ensure_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
