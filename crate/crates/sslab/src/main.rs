use std::path::PathBuf;

use clap::Parser;
use sslab::{run_cli, Experiment, RunArgs};

#[derive(Debug, Parser)]
#[command(
    name = "sslab",
    version,
    about = "Soliton and breather gas experiments for the focusing mKdV equation"
)]
struct Cli {
    #[arg(value_enum)]
    experiment: Experiment,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Write an SVG plot here, overriding output.svg_path.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Worker threads; falls back to SSLAB_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    verbose: bool,
}

fn main() {
    let cli = Cli::parse();
    let args = RunArgs {
        experiment: cli.experiment,
        config: cli.config,
        plot: cli.plot,
        threads: cli.threads,
        verbose: cli.verbose,
    };
    std::process::exit(run_cli(&args));
}
