use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use freealg::pipeline::{self, error_exit_code, ProblemSpec, Report};

/// Exact moments, Stieltjes series and algebraicity certificates for matrix
/// polynomials in free random variables.
#[derive(Parser)]
#[command(name = "freealg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Override the series order of the problem file.
    #[arg(long, global = true)]
    order: Option<usize>,
    #[arg(long, global = true)]
    degx: Option<u32>,
    #[arg(long, global = true)]
    degy: Option<u32>,
    /// Extra vanishing coefficients required to certify an annihilator.
    #[arg(long, global = true)]
    guard: Option<usize>,
    /// Largest Fock space dimension the oracle may use.
    #[arg(long, global = true)]
    depth_cap: Option<usize>,
    /// Also compute moments in the Fock model and report the agreement.
    #[arg(long, global = true)]
    oracle: bool,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Moments of the expression.
    Moments { problem: PathBuf },
    /// Stieltjes series, solution matrix and side conditions.
    Stieltjes { problem: PathBuf },
    /// Search for and certify an annihilating polynomial.
    Annihilator { problem: PathBuf },
    /// Newton polygon of a polynomial given as a term list or a report.
    Newton { polynomial: PathBuf },
    /// Side conditions, Fock agreement and a freeness check.
    Verify { problem: PathBuf },
    /// Moments from the Fock model only.
    Oracle { problem: PathBuf },
}

fn load_spec(path: &Path, flags: &Flags) -> anyhow::Result<ProblemSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut spec: ProblemSpec = serde_json::from_str(&text)
        .map_err(|e| freealg::Error::Input(format!("{}: {e}", path.display())))?;
    if let Some(v) = flags.order {
        spec.order = v;
    }
    if let Some(v) = flags.degx {
        spec.degx = v;
    }
    if let Some(v) = flags.degy {
        spec.degy = v;
    }
    if flags.guard.is_some() {
        spec.guard = flags.guard;
    }
    if flags.depth_cap.is_some() {
        spec.depth_cap = flags.depth_cap;
    }
    spec.validate()?;
    Ok(spec)
}

fn execute(cli: &Cli) -> anyhow::Result<Report> {
    let f = &cli.flags;
    let report = match &cli.command {
        Command::Moments { problem } => pipeline::run_moments(&load_spec(problem, f)?, f.oracle)?,
        Command::Stieltjes { problem } => pipeline::run_stieltjes(&load_spec(problem, f)?)?,
        Command::Annihilator { problem } => pipeline::run_annihilator(&load_spec(problem, f)?, f.oracle)?,
        Command::Verify { problem } => pipeline::run_verify(&load_spec(problem, f)?)?,
        Command::Oracle { problem } => pipeline::run_oracle(&load_spec(problem, f)?)?,
        Command::Newton { polynomial } => {
            let text =
                fs::read_to_string(polynomial).with_context(|| format!("reading {}", polynomial.display()))?;
            pipeline::run_newton(&pipeline::parse_polynomial_file(&text)?)?
        }
    };
    Ok(report)
}

fn emit(report: &Report, output: Option<&Path>) -> anyhow::Result<()> {
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    match output {
        Some(path) => fs::write(path, json).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{json}"),
    }
    Ok(())
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<freealg::Error>() {
        return error_exit_code(e) as u8;
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 3;
    }
    4
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli).and_then(|report| {
        emit(&report, cli.flags.output.as_deref())?;
        Ok(report.status.exit_code() as u8)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
