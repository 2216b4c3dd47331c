use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use logmod_cli::commands::{self, CliError, Report, Workspace};
use logmod_cli::io::{self, SideName};

#[derive(Parser)]
#[command(name = "logmod", version, about = "Logmodular pattern algebras, factorizations and domination certificates")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance for positivity and slack checks.
    #[arg(long, global = true)]
    tol_psd: Option<f64>,
    /// Relative stopping tolerance of the LMI solver.
    #[arg(long, global = true)]
    tol_gap: Option<f64>,
    /// Tolerance for factorization and reconstruction residuals.
    #[arg(long, global = true)]
    tol_recon: Option<f64>,
    /// Write the result file here instead of inlining it in the report.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a pattern algebra is logmodular.
    Decide { pattern: PathBuf },
    /// Factor a positive matrix as A*A with A supported on a pattern.
    Factor { matrix: PathBuf, pattern: PathBuf },
    /// Fejér–Riesz factor of a nonnegative trigonometric polynomial.
    Fejer { coeffs: PathBuf },
    /// Outer function with prescribed boundary modulus.
    Outer {
        samples: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
    /// 2-summing norm and Pietsch measure of a map on functions.
    A2 { instance: PathBuf },
    /// Dominating state for a map on a matrix subspace.
    Dominate {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "row")]
        side: SideArg,
    },
    /// Positive extension of a representation of a pattern algebra.
    Extend {
        representation: PathBuf,
        /// Random objectives used to test uniqueness.
        #[arg(long, default_value_t = 5)]
        objectives: usize,
    },
    /// Run the numerical acceptance checks.
    Selftest {
        /// Run only these criteria.
        #[arg(long = "criterion")]
        criteria: Vec<usize>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SideArg {
    Row,
    Column,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("LOGMOD_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("LOGMOD_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure threads: {e}")))
}

fn run(cli: Cli) -> Result<Report, CliError> {
    configure_threads()?;
    let ws = Workspace {
        seed: cli.common.seed,
        tol_psd: cli.common.tol_psd,
        tol_gap: cli.common.tol_gap,
        tol_recon: cli.common.tol_recon,
        out: cli.common.out,
    };
    ws.validate()?;
    match cli.command {
        Command::Decide { pattern } => commands::decide(&ws, &pattern),
        Command::Factor { matrix, pattern } => commands::factor(&ws, &matrix, &pattern),
        Command::Fejer { coeffs } => commands::fejer(&ws, &coeffs),
        Command::Outer { samples, eps } => commands::outer(&ws, &samples, eps),
        Command::A2 { instance } => commands::a2(&ws, &instance),
        Command::Dominate { instance, side } => {
            let side = match side {
                SideArg::Row => SideName::Row,
                SideArg::Column => SideName::Column,
            };
            commands::dominate(&ws, &instance, side)
        }
        Command::Extend { representation, objectives } => commands::extend(&ws, &representation, objectives),
        Command::Selftest { criteria } => commands::selftest(&ws, &criteria),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(report) => {
            if let Some(body) = report.body {
                match io::emit(&body) {
                    Ok(text) => {
                        let _ = std::io::stdout().write_all(text.as_bytes());
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(65);
                    }
                }
            }
            ExitCode::from(report.outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
