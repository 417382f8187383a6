//! Front end for `jigsaw-core`: solve one puzzle, build a shuffled dataset,
//! or benchmark the solver over a dataset.

pub mod args;
pub mod bench;
pub mod dataset;
pub mod solve;

use std::path::Path;

use anyhow::Context;

pub use args::{Cli, Command};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_INVALID_INPUT: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

/// Maps the first recognizable cause in an error chain to an exit status.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<jigsaw_core::Error>() {
            return match e {
                jigsaw_core::Error::Io { .. } => EXIT_IO,
                jigsaw_core::Error::Image { source, .. } => match source {
                    image::ImageError::IoError(_) => EXIT_IO,
                    _ => EXIT_INVALID_INPUT,
                },
                jigsaw_core::Error::InvalidInput(_)
                | jigsaw_core::Error::InvalidArrangement(_)
                | jigsaw_core::Error::Json { .. }
                | jigsaw_core::Error::CacheFormat(_) => EXIT_INVALID_INPUT,
                jigsaw_core::Error::ExhaustedBank | jigsaw_core::Error::ContractViolation(_) => EXIT_INTERNAL,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() || cause.downcast_ref::<csv::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_INTERNAL
}

/// The error and its causes, skipping causes already quoted by the message
/// before them.
pub fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !out.ends_with(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.command.jobs() {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Solve(a) => solve::run(&a).map(|_| ()),
        Command::Bench(a) => bench::run(&a).map(|_| ()),
        Command::MakeDataset(a) => dataset::run(&a).map(|_| ()),
    }
}

pub(crate) fn create_dir(path: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

pub(crate) fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn write_generations_csv(path: &Path, history: &[jigsaw_core::GenerationStats]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for s in history {
        w.serialize(s)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
