//! Benchmark records shared by the solver front ends.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Score;
use crate::ga::GaConfig;
use crate::puzzle::PuzzleDims;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub direct: f64,
    pub neighbor: f64,
    pub best_fitness: f64,
    pub ground_truth_fitness: f64,
    pub better_than_perfect: bool,
    pub wall_clock_seconds: f64,
}

impl RunRecord {
    pub fn new(seed: u64, score: &Score, wall_clock_seconds: f64) -> Self {
        Self {
            seed,
            direct: score.direct,
            neighbor: score.neighbor,
            best_fitness: score.fitness_solution,
            ground_truth_fitness: score.fitness_ground_truth,
            better_than_perfect: score.better_than_perfect,
            wall_clock_seconds,
        }
    }
}

/// Best, worst, mean and population standard deviation of one accuracy
/// measure across runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub best: f64,
    pub worst: f64,
    pub mean: f64,
    pub stddev: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("no runs to aggregate".into()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Ok(Self {
            best: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            worst: values.iter().copied().fold(f64::INFINITY, f64::min),
            mean,
            stddev: var.sqrt(),
        })
    }

    fn approx_eq(&self, other: &Aggregate) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
        close(self.best, other.best)
            && close(self.worst, other.worst)
            && close(self.mean, other.mean)
            && close(self.stddev, other.stddev)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportDims {
    pub rows: usize,
    pub cols: usize,
    pub piece_size: usize,
    pub pieces: usize,
}

impl From<PuzzleDims> for ReportDims {
    fn from(d: PuzzleDims) -> Self {
        Self {
            rows: d.rows,
            cols: d.cols,
            piece_size: d.piece_size,
            pieces: d.piece_count(),
        }
    }
}

/// Solver configuration as echoed into reports. `seed` is the first run's
/// master seed; run `i` uses `seed + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub population: usize,
    pub generations: usize,
    pub elitism: usize,
    pub mutation_rate: f64,
    pub seed: u64,
}

impl From<&GaConfig> for ConfigEcho {
    fn from(c: &GaConfig) -> Self {
        Self {
            population: c.population_size,
            generations: c.generations,
            elitism: c.elite_count,
            mutation_rate: c.mutation_rate,
            seed: c.master_seed,
        }
    }
}

/// All runs on one image plus their aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub image: String,
    pub dims: ReportDims,
    pub config: ConfigEcho,
    pub runs: Vec<RunRecord>,
    pub neighbor: Aggregate,
    pub direct: Aggregate,
}

impl RunReport {
    pub fn new(image: impl Into<String>, dims: PuzzleDims, config: ConfigEcho, runs: Vec<RunRecord>) -> Result<Self> {
        let neighbor = Aggregate::of(&runs.iter().map(|r| r.neighbor).collect::<Vec<_>>())?;
        let direct = Aggregate::of(&runs.iter().map(|r| r.direct).collect::<Vec<_>>())?;
        Ok(Self {
            image: image.into(),
            dims: dims.into(),
            config,
            runs,
            neighbor,
            direct,
        })
    }

    pub fn mean_runtime_seconds(&self) -> f64 {
        self.runs.iter().map(|r| r.wall_clock_seconds).sum::<f64>() / self.runs.len() as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Parses a report and checks that its aggregates match its runs.
    pub fn from_json(text: &str) -> Result<Self> {
        let report: RunReport = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("malformed run report: {e}")))?;
        let neighbor = Aggregate::of(&report.runs.iter().map(|r| r.neighbor).collect::<Vec<_>>())?;
        let direct = Aggregate::of(&report.runs.iter().map(|r| r.direct).collect::<Vec<_>>())?;
        if !neighbor.approx_eq(&report.neighbor) || !direct.approx_eq(&report.direct) {
            return Err(Error::InvalidInput(format!(
                "report for {} has aggregates inconsistent with its runs",
                report.image
            )));
        }
        Ok(report)
    }
}

/// One row of a set-level table: per-image aggregates averaged over images.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetSummary {
    pub images: usize,
    pub avg_best: f64,
    pub avg_worst: f64,
    pub avg_mean: f64,
    pub avg_stddev: f64,
    pub avg_runtime_seconds: f64,
}

impl SetSummary {
    pub fn of(reports: &[RunReport], pick: impl Fn(&RunReport) -> Aggregate) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::InvalidInput("no reports to summarize".into()));
        }
        let n = reports.len() as f64;
        let avg = |f: &dyn Fn(&Aggregate) -> f64| reports.iter().map(|r| f(&pick(r))).sum::<f64>() / n;
        Ok(Self {
            images: reports.len(),
            avg_best: avg(&|a| a.best),
            avg_worst: avg(&|a| a.worst),
            avg_mean: avg(&|a| a.mean),
            avg_stddev: avg(&|a| a.stddev),
            avg_runtime_seconds: reports.iter().map(RunReport::mean_runtime_seconds).sum::<f64>() / n,
        })
    }
}
