use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use procure_cli::{cmd_exclusion, cmd_plotdata, cmd_solve, cmd_verify, CliError, Overrides};

/// Optimal nonlinear pricing for energy procurement.
#[derive(Parser)]
#[command(name = "procure", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write schedule, outcome, settlement and manifest files.
    Solve(RunArgs),
    /// Run the verification suite; exits with status 1 when a check fails.
    Verify(RunArgs),
    /// Write price and payment series plus per-type markers for plotting.
    Plotdata(RunArgs),
    /// Search admissible type subsets and solve for the best one.
    ExclusionSearch(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// Output directory; defaults to `options.out` or `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of quantity cells.
    #[arg(long)]
    grid_cells: Option<usize>,
    /// Risk-sharing level in [0, 1] for the settlement report.
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated admissible type ids.
    #[arg(long, value_delimiter = ',')]
    admissible: Option<Vec<String>>,
    /// Reserved: the pipeline is deterministic, the value is only recorded.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn split(self) -> (PathBuf, Overrides) {
        (
            self.scenario,
            Overrides {
                grid_cells: self.grid_cells,
                alpha: self.alpha,
                admissible: self.admissible,
                out: self.out,
                seed: self.seed,
            },
        )
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Solve(a) => {
            let (path, o) = a.split();
            for p in cmd_solve(&path, o)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Plotdata(a) => {
            let (path, o) = a.split();
            for p in cmd_plotdata(&path, o)? {
                println!("wrote {}", p.display());
            }
        }
        Command::ExclusionSearch(a) => {
            let (path, o) = a.split();
            let (chosen, written) = cmd_exclusion(&path, o)?;
            println!("admissible: {}", chosen.join(","));
            for p in written {
                println!("wrote {}", p.display());
            }
        }
        Command::Verify(a) => {
            let (path, o) = a.split();
            let report = cmd_verify(&path, o)?;
            print!("{}", report.records());
            println!();
            print!("{}", report.summary_table());
            if !report.passed() {
                let names: Vec<&str> = report.failures().iter().map(|e| e.name.as_str()).collect();
                eprintln!("verification failed: {}", names.join(", "));
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
