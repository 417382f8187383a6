use std::path::PathBuf;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand};
use jigsaw_core::GaConfig;

#[derive(Debug, Parser)]
#[command(name = "jigsaw", version, about = "Genetic-algorithm jigsaw puzzle solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one puzzle, from an image or from a dataset manifest.
    Solve(SolveArgs),
    /// Run the solver repeatedly over every manifest in a dataset.
    Bench(BenchArgs),
    /// Slice and shuffle a directory of images into puzzle manifests.
    MakeDataset(MakeDatasetArgs),
}

impl Command {
    pub fn jobs(&self) -> Option<usize> {
        match self {
            Command::Solve(a) => a.jobs,
            Command::Bench(a) => a.jobs,
            Command::MakeDataset(_) => None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Side length of a square piece in pixels.
    #[arg(long, default_value_t = 28, value_parser = clap::value_parser!(u32).range(1..))]
    pub piece_size: u32,
    #[arg(long, default_value_t = 1000)]
    pub population: usize,
    #[arg(long, default_value_t = 100)]
    pub generations: usize,
    /// Number of best chromosomes copied unchanged into the next generation.
    #[arg(long, default_value_t = 4)]
    pub elitism: usize,
    #[arg(long, default_value_t = 0.05)]
    pub mutation_rate: f64,
    /// Master seed; benchmark run `i` uses `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    pub fn ga_config(&self, seed: u64) -> GaConfig {
        GaConfig {
            population_size: self.population,
            generations: self.generations,
            elite_count: self.elitism,
            mutation_rate: self.mutation_rate,
            master_seed: seed,
        }
    }
}

/// A generation to render, or the last one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Snapshot {
    Generation(usize),
    Final,
}

fn parse_snapshot(s: &str) -> Result<Snapshot, String> {
    match s.trim() {
        "final" => Ok(Snapshot::Final),
        t => t
            .parse()
            .map(Snapshot::Generation)
            .map_err(|_| format!("`{t}` is neither a generation number nor `final`")),
    }
}

#[derive(Debug, Clone, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["image", "manifest"])))]
pub struct SolveArgs {
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Manifest written by `make-dataset`; its piece size takes precedence.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Generations whose best arrangement is rendered.
    #[arg(long, value_delimiter = ',', default_value = "1,2,final", value_parser = parse_snapshot)]
    pub snapshots: Vec<Snapshot>,
    /// Worker threads; all cores by default.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..).map(|v| v as usize))]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Directory of manifests written by `make-dataset`.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..).map(|v| v as usize))]
    pub runs: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = "bench-out")]
    pub out_dir: PathBuf,
    /// Worker threads shared by concurrent images; all cores by default.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..).map(|v| v as usize))]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct MakeDatasetArgs {
    /// Directory of PNG or JPEG images.
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long, default_value_t = 28, value_parser = clap::value_parser!(u32).range(1..))]
    pub piece_size: u32,
    #[arg(long)]
    pub out: PathBuf,
    /// Base seed; image `i` (in file-name order) is shuffled with a seed
    /// derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
