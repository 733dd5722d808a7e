//! Experiment front end for the `jdai` library.
//!
//! Output layout under `--out`:
//!
//! | command       | files                                        |
//! |---------------|----------------------------------------------|
//! | `capacity`    | `capacity.csv` or `capacity.json`            |
//! | `idcode-eval` | `idcode.csv` or `idcode.json`                |
//! | `scaling`     | `scaling.csv` or `scaling.json`, `scaling.svg` |
//! | `simulate`    | `metrics.csv` or `metrics.json`, `summary.json` |
//! | `sweep`       | `sweep.csv` or `sweep.json`, `sweep.manifest.jsonl` |
//!
//! Every JSON output carries `version`, `generated_at`, `command` and `config`, and can be
//! passed back as `--config` to the command that wrote it.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use std::path::PathBuf;

pub use args::{Cli, Command, Common, Format};
pub use error::{CliError, CliResult};

/// Runs one subcommand inside a thread pool of `--workers` threads. Returns the files written.
pub fn run(command: &Command) -> CliResult<Vec<PathBuf>> {
    let common = command.common();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Runtime(e.to_string()))?;
    pool.install(|| match command {
        Command::Capacity(c) => commands::capacity::run(c),
        Command::IdcodeEval(c) => commands::idcode::run(c),
        Command::Scaling(c) => commands::scaling::run(c),
        Command::Simulate(c) => commands::simulate::run(c),
        Command::Sweep(c) => commands::sweep::run(c),
    })
}
