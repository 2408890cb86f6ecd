use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lvpatch::Execution;
use lvpatch_cli::commands::{self, Experiment, RunConfig};
use lvpatch_cli::plot::{emit_plot, PlotKind};
use lvpatch_cli::{CliError, Scenario};

const AFTER_HELP: &str = "\
Defaults (overridable per scenario file):
  integration    rk4, h_init = 1e-3, h_min = 1e-10, record_stride = 10
  simulate       t0 = 0, t_end = 300
  region         seed = 42, ensemble_size = 16, ic_box = (0.1, 5.0),
                 burn_in = 100, horizon = 300, margin = 0.05
  decay          t0 = 100, t1 = 200, tol = 1e-8
  attract        t0 = 0, t_end = 300, eps = 1e-3
  almost-period  window = (100, 150), T in [150, 200] step 0.01, eps = 0.2

Output directory: --out, then $LVPATCH_OUT_DIR, then output_dir in the
scenario, then ./out.

Exit codes: 0 success (including conditions that fail to hold), 1 I/O,
2 usage, 3 config, 4 parameter validation, 5 integration, 6 degenerate
region, 7 plotting.";

#[derive(Debug, Parser)]
#[command(name = "lvpatch", version, about = "Two-patch competitive Lotka-Volterra laboratory", after_help = AFTER_HELP)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "LVPATCH_OUT_DIR")]
    out: Option<PathBuf>,

    /// Seed for the region-estimation ensemble.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    /// Skip SVG output.
    #[arg(long, global = true)]
    no_plots: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate each initial state and write trajectory CSVs and plots.
    Simulate { scenario: PathBuf },
    /// Check dispersal bounds, estimate the region and test contraction.
    Check { scenario: PathBuf },
    /// Compare trajectories from different initial states.
    Attract { scenario: PathBuf },
    /// Scan shifts for numerical almost periods.
    AlmostPeriod { scenario: PathBuf },
    /// Run the built-in worked example.
    Example51 {
        #[arg(value_enum, default_value_t = Which::All)]
        which: Which,
    },
    /// Write the built-in example as a scenario file.
    Init { path: PathBuf },
    /// Re-render a plot from exported CSVs.
    Plot {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "lvpatch")]
        title: String,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Which {
    Simulate,
    Check,
    Attract,
    AlmostPeriod,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Timeseries,
    Overlay,
    Defect,
}

fn config(cli: &Cli, scenario: &Scenario) -> RunConfig {
    let out = cli
        .out
        .clone()
        .or_else(|| scenario.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    RunConfig {
        out_dir: out,
        seed: cli.seed,
        execution: if cli.sequential { Execution::Sequential } else { Execution::default() },
        plots: !cli.no_plots,
    }
}

fn dispatch(cli: &Cli) -> Result<String, CliError> {
    let file_run = |path: &PathBuf, exp: Experiment| {
        let scenario = Scenario::load(path)?;
        commands::run(exp, &scenario, &config(cli, &scenario))
    };
    match &cli.command {
        Command::Simulate { scenario } => file_run(scenario, Experiment::Simulate),
        Command::Check { scenario } => file_run(scenario, Experiment::Check),
        Command::Attract { scenario } => file_run(scenario, Experiment::Attract),
        Command::AlmostPeriod { scenario } => file_run(scenario, Experiment::AlmostPeriod),
        Command::Example51 { which } => {
            let exp = match which {
                Which::Simulate => Experiment::Simulate,
                Which::Check => Experiment::Check,
                Which::Attract => Experiment::Attract,
                Which::AlmostPeriod => Experiment::AlmostPeriod,
                Which::All => Experiment::All,
            };
            let scenario = Scenario::example51();
            commands::run(exp, &scenario, &config(cli, &scenario))
        }
        Command::Init { path } => {
            std::fs::write(path, Scenario::example51().to_toml())?;
            Ok(format!("wrote {}\n", path.display()))
        }
        Command::Plot { kind, output, title, inputs } => {
            let kind = match kind {
                Kind::Timeseries => PlotKind::TimeSeries,
                Kind::Overlay => PlotKind::Overlay,
                Kind::Defect => PlotKind::Defect,
            };
            emit_plot(inputs, kind, title, output)?;
            Ok(format!("wrote {}\n", output.display()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
