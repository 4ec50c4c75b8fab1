use clap::{Parser, Subcommand};
use mqed_cli::{
    run_compute, run_dualize, run_sweep, run_verify_duality, CliError, SweepRequest, JOBS_ENV,
};
use std::path::PathBuf;
use std::process::ExitCode;

/// Dispersion forces, decay rates and electric–magnetic duality checks for
/// planar magnetoelectric scenarios.
#[derive(Debug, Parser)]
#[command(name = "mqed", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the scenario's observable and write a result record.
    Compute {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the dual scenario (ε ↔ μ, α ↔ β, d ↔ m).
    Dualize {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that the observable is unchanged under duality.
    VerifyDuality {
        #[arg(long)]
        scenario: PathBuf,
        /// Candidate dual scenario; generated from --scenario when omitted.
        #[arg(long)]
        dual: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        rtol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate over a grid of one numeric parameter and write CSV.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Dotted path of the field to vary, e.g. `bodies.0.gap`.
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        points: usize,
        /// Logarithmic instead of linear spacing.
        #[arg(long)]
        log: bool,
        #[arg(long, env = JOBS_ENV)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compute { scenario, out } => {
            let result = run_compute(&scenario, out.as_deref())?;
            for n in &result.notices {
                eprintln!("notice: {n}");
            }
        }
        Command::Dualize { scenario, out } => {
            run_dualize(&scenario, out.as_deref())?;
        }
        Command::VerifyDuality {
            scenario,
            dual,
            rtol,
            out,
        } => {
            let outcome = run_verify_duality(&scenario, dual.as_deref(), rtol);
            let report = match &outcome {
                Ok(r) => r,
                Err(CliError::Verification(r)) => r.as_ref(),
                Err(_) => return outcome.map(|_| ()),
            };
            if let Some(path) = &out {
                mqed_cli::emit(Some(path), &report.to_toml_string())?;
            }
            println!("{report}");
            outcome?;
        }
        Command::Sweep {
            scenario,
            param,
            from,
            to,
            points,
            log,
            jobs,
            out,
        } => {
            let request = SweepRequest {
                param,
                from,
                to,
                points,
                log,
                jobs,
            };
            run_sweep(&scenario, &request, out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
