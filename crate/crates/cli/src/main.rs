use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use revival_core::scenario::{output_paths, read_config, run_scenario, timescales_command, ScenarioConfig};
use revival_core::Error;

/// Wave-packet revivals in the infinite well and the quantum bouncer.
#[derive(Parser)]
#[command(name = "revivals", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep and write the CSV series and JSON report.
    Run {
        #[command(flatten)]
        common: Common,
        /// CSV time series (overrides outputs.series).
        #[arg(long)]
        out_series: Option<PathBuf>,
        /// JSON report (overrides outputs.report).
        #[arg(long)]
        out_report: Option<PathBuf>,
    },
    /// Print classical period, revival time and central level.
    Timescales {
        #[command(flatten)]
        common: Common,
    },
    /// Check the config and print it with defaults filled in.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for the sweep; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig, Error> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build_global()
            .map_err(|e| Error::Config(format!("--threads {}: {e}", self.threads)))?;
        read_config(&self.config)
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            common,
            out_series,
            out_report,
        } => {
            let config = common.load()?;
            let (series, report_path) = output_paths(&config, out_series, out_report)?;
            let report = run_scenario(&config, &series, &report_path)?;
            eprintln!(
                "wrote {} rows to {} and report to {} (n_bar {}, levels {}..={}, {} warnings)",
                report.sweep.samples,
                series.display(),
                report_path.display(),
                report.n_bar,
                report.levels.first,
                report.levels.last,
                report.warnings.count
            );
        }
        Command::Timescales { common } => {
            let config = common.load()?;
            let (ts, captured) = timescales_command(&config)?;
            let fmt = revival_core::scenario::format_real;
            println!("captured_norm {}", fmt(captured));
            for (name, t) in [("spectrum", ts.spectrum), ("closed_form", ts.closed_form)] {
                println!(
                    "{name}: n_bar {} T_cl {} T_rev {}",
                    t.n_bar,
                    fmt(t.t_classical),
                    fmt(t.t_revival)
                );
            }
        }
        Command::Validate { common } => {
            let config = common.load()?;
            print!("{}", config.to_toml()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
