use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use unihalt_cli::{run_experiment, tables_of, validate_suite, CliError, Experiment, ExperimentConfig, Fault, Level};

#[derive(Parser)]
#[command(name = "unihalt", version, about = "Halting-protocol experiments and invariant checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. `--set p=11`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Check module invariants.
    Validate {
        /// Include the slow wavepacket checks.
        #[arg(long)]
        full: bool,
        #[arg(long, value_enum)]
        inject_fault: Vec<FaultArg>,
    },
    /// Print the CSV headers an experiment writes.
    Schema { experiment: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    CorruptGate,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = ExperimentConfig::load(&config, &overrides)?;
            let summary = run_experiment(&cfg)?;
            for note in &summary.notes {
                println!("{note}");
            }
            for (table, file) in summary.tables.iter().zip(&summary.files) {
                println!("wrote {} ({} rows)", file.display(), table.rows.len());
            }
            Ok(())
        }
        Command::Validate { full, inject_fault } => {
            let level = if full { Level::Full } else { Level::Fast };
            let faults: Vec<Fault> = inject_fault
                .into_iter()
                .map(|f| match f {
                    FaultArg::CorruptGate => Fault::CorruptGate,
                })
                .collect();
            let report = validate_suite(level, &faults);
            for check in &report.checks {
                println!("{check}");
            }
            let failed = report.failed().count();
            println!("{} of {} checks passed", report.checks.len() - failed, report.checks.len());
            if failed > 0 {
                return Err(CliError::Validation { failed, total: report.checks.len() });
            }
            Ok(())
        }
        Command::Schema { experiment } => {
            let e: Experiment = experiment.parse()?;
            for (stem, header) in tables_of(e) {
                println!("{stem}.csv: {}", header.join(","));
            }
            Ok(())
        }
    }
}
