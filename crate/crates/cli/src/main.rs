use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use slicenet::commands::{self, SolveArgs};
use slicenet::pipeline::SolverKind;
use slicenet::{Category, CliError, TopologyKind, TopologyParams};
use slicenet_core::admm::Variant;
use slicenet_core::coexist::BackoffPolicy;
use slicenet_core::game::DivisionRule;
use slicenet_core::MnoId;

#[derive(Parser)]
#[command(name = "slicenet", version, about = "Inter-operator slicing over licensed and unlicensed bands")]
struct Cli {
    /// Random seed.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output file (output directory for `experiment`); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "warn")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backoff {
    Uniform,
    Beb,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate channel contention of a scenario.
    Sim {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        duration: f64,
        #[arg(long, value_enum, default_value = "uniform")]
        backoff: Backoff,
    },
    /// Build the access-probability table for all graphs up to a size.
    Table {
        #[arg(long, default_value_t = 5)]
        max_size: usize,
        #[arg(long, default_value_t = 10.0)]
        duration: f64,
    },
    /// Estimate per-link access probabilities.
    Mboe {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        table: PathBuf,
        /// MNOs withdrawn from the unlicensed band.
        #[arg(long, value_delimiter = ',')]
        remove: Vec<MnoId>,
    },
    /// Solve the slicing problem.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value = "s3")]
        variant: Variant,
        #[arg(long, default_value = "admm")]
        solver: SolverKind,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Write the `iteration,objective` series here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Divide the optimal slicing and check core membership.
    Game {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value = "egal")]
        division: DivisionRule,
    },
    /// Run an experiment plan.
    Experiment {
        #[arg(long)]
        plan: PathBuf,
    },
    /// Generate a synthetic scenario.
    Gen {
        #[arg(long, default_value = "grid")]
        kind: TopologyKind,
        #[arg(long, default_value_t = 2)]
        mnos: u32,
        #[arg(long, default_value_t = 2)]
        sites: u32,
        #[arg(long, default_value_t = 2)]
        ues: u32,
        #[arg(long, default_value_t = 100.0)]
        cell_size: f64,
        #[arg(long, default_value_t = 1)]
        wifi: u32,
    },
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::new(Category::Io, e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Sim {
            scenario,
            duration,
            backoff,
        } => {
            let policy = match backoff {
                Backoff::Uniform => BackoffPolicy::Uniform,
                Backoff::Beb => BackoffPolicy::BinaryExponential,
            };
            emit(&commands::sim(&scenario, duration, cli.seed, policy)?, out)
        }
        Command::Table { max_size, duration } => {
            let path = out.ok_or_else(|| CliError::new(Category::Usage, "`table` needs --out <file>"))?;
            eprint!("{}", commands::table(max_size, duration, cli.seed, path)?);
            Ok(())
        }
        Command::Mboe {
            scenario,
            table,
            remove,
        } => {
            let removed: BTreeSet<MnoId> = remove.into_iter().collect();
            emit(&commands::mboe(&scenario, &table, &removed)?, out)
        }
        Command::Solve {
            scenario,
            table,
            variant,
            solver,
            gamma,
            tol,
            trace,
        } => {
            let args = SolveArgs {
                scenario: &scenario,
                table: &table,
                variant,
                solver,
                gamma,
                tol,
                trace: trace.as_deref(),
            };
            emit(&commands::solve_cmd(&args)?, out)
        }
        Command::Game {
            scenario,
            table,
            division,
        } => emit(&commands::game(&scenario, &table, division)?, out),
        Command::Experiment { plan } => {
            eprint!("{}", commands::experiment(&plan, out)?);
            Ok(())
        }
        Command::Gen {
            kind,
            mnos,
            sites,
            ues,
            cell_size,
            wifi,
        } => {
            let params = TopologyParams {
                mnos,
                sites_per_mno: sites,
                ues_per_cell: ues,
                cell_size_m: cell_size,
                wifi_aps: wifi,
                ..TopologyParams::default()
            };
            emit(&commands::gen(kind, &params, cli.seed)?, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let err = CliError::new(Category::Usage, e.to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(Category::Usage.exit_code() as u8);
        }
    };
    env_logger::Builder::new().filter_level(cli.log_level).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.category.exit_code() as u8)
        }
    }
}
