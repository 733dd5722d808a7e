use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "jdai", version = env!("JDAI_BUILD_VERSION"), about = "Identification-code experiments and closed-loop activation runs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form and iterative capacity of channels.
    Capacity(Common),
    /// First- and second-kind error report for a tag code.
    IdcodeEval(Common),
    /// Identity count and error rates against payload size, with an SVG chart.
    Scaling(Common),
    /// One closed-loop run: metrics per epoch and a summary.
    Simulate(Common),
    /// Grid of closed-loop runs over config parameters.
    Sweep(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON config, or an output document produced by the same command.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Capacity(c)
            | Command::IdcodeEval(c)
            | Command::Scaling(c)
            | Command::Simulate(c)
            | Command::Sweep(c) => c,
        }
    }
}
