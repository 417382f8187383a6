use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use jigsaw_core::report::ConfigEcho;
use jigsaw_core::{render, save_png, score, CompatCache, Error, GenerationStats, RunRecord, RunReport, SetSummary};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::BenchArgs;
use crate::solve::{load_manifest, run_ga};

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub set: String,
    pub metric: String,
    pub images: usize,
    pub avg_best: f64,
    pub avg_worst: f64,
    pub avg_mean: f64,
    pub avg_stddev: f64,
    pub avg_runtime_s: f64,
}

impl SummaryRow {
    fn new(set: &str, metric: &str, s: SetSummary) -> Self {
        Self {
            set: set.to_string(),
            metric: metric.to_string(),
            images: s.images,
            avg_best: s.avg_best,
            avg_worst: s.avg_worst,
            avg_mean: s.avg_mean,
            avg_stddev: s.avg_stddev,
            avg_runtime_s: s.avg_runtime_seconds,
        }
    }
}

/// Manifests (`*.json`) directly inside `dir`, sorted by name.
pub fn list_manifests(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry.with_context(|| format!("listing {}", dir.display()))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(Error::InvalidInput(format!("no manifests in {}", dir.display())).into());
    }
    Ok(out)
}

/// Fails unless best fitness never rises from one generation to the next.
pub fn check_monotone(history: &[GenerationStats]) -> jigsaw_core::Result<()> {
    for w in history.windows(2) {
        if w[1].best_fitness > w[0].best_fitness {
            return Err(Error::ContractViolation(format!(
                "best fitness rose from {} to {} at generation {}",
                w[0].best_fitness, w[1].best_fitness, w[1].generation
            )));
        }
    }
    Ok(())
}

fn bench_image(manifest: &Path, args: &BenchArgs) -> anyhow::Result<RunReport> {
    let puzzle = load_manifest(manifest)?;
    let stem = manifest.file_stem().and_then(|s| s.to_str()).unwrap_or("image").to_string();
    let dir = args.out_dir.join(&stem);
    crate::create_dir(&dir)?;
    let instance = &puzzle.instance;
    let cache = CompatCache::build(instance.dims, &instance.pieces)?;

    let mut runs = Vec::with_capacity(args.runs);
    let mut best_run: Option<(f64, jigsaw_core::Arrangement)> = None;
    for i in 0..args.runs {
        let seed = args.solver.seed.wrapping_add(i as u64);
        let config = args.solver.ga_config(seed);
        let label = format!("{stem} run {}/{}", i + 1, args.runs);
        let started = Instant::now();
        let (outcome, _) = run_ga(&label, &cache, &config, &[])?;
        let elapsed = started.elapsed().as_secs_f64();
        check_monotone(&outcome.history).with_context(|| format!("{label}"))?;
        let result = score(&outcome.best, instance, &cache)?;
        crate::write_generations_csv(&dir.join(format!("run{i:02}_generations.csv")), &outcome.history)?;
        eprintln!("{label}: neighbor {:.4} direct {:.4} in {elapsed:.1}s", result.neighbor, result.direct);
        if best_run.as_ref().is_none_or(|(n, _)| result.neighbor > *n) {
            best_run = Some((result.neighbor, outcome.best.clone()));
        }
        runs.push(RunRecord::new(seed, &result, elapsed));
    }
    if let Some((_, arr)) = &best_run {
        save_png(&render(instance, arr)?, &dir.join("best.png"))?;
    }

    let report = RunReport::new(puzzle.label, instance.dims, ConfigEcho::from(&args.solver.ga_config(args.solver.seed)), runs)?;
    crate::write_text(&dir.join("report.json"), &(report.to_json() + "\n"))?;
    Ok(report)
}

/// Benchmarks every manifest in the dataset, up to `--jobs` images at a time.
/// Images that fail are reported and skipped; the first failure is returned
/// after the summary of the others has been written.
pub fn run(args: &BenchArgs) -> anyhow::Result<Vec<RunReport>> {
    args.solver.ga_config(args.solver.seed).validate()?;
    let manifests = list_manifests(&args.dataset)?;
    crate::create_dir(&args.out_dir)?;
    let results: Vec<anyhow::Result<RunReport>> = manifests
        .par_iter()
        .with_max_len(1)
        .map(|m| bench_image(m, args).with_context(|| format!("benchmarking {}", m.display())))
        .collect();

    let mut reports = Vec::new();
    let mut first_error = None;
    for r in results {
        match r {
            Ok(report) => reports.push(report),
            Err(e) => {
                eprintln!("error: {}", crate::describe(&e));
                first_error.get_or_insert(e);
            }
        }
    }
    if !reports.is_empty() {
        let set = args
            .dataset
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or("dataset")
            .to_string();
        write_summary(&args.out_dir.join("summary.csv"), &set, &reports)?;
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(reports),
    }
}

pub fn summary_rows(set: &str, reports: &[RunReport]) -> anyhow::Result<Vec<SummaryRow>> {
    Ok(vec![
        SummaryRow::new(set, "neighbor", SetSummary::of(reports, |r| r.neighbor)?),
        SummaryRow::new(set, "direct", SetSummary::of(reports, |r| r.direct)?),
    ])
}

fn write_summary(path: &Path, set: &str, reports: &[RunReport]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for row in summary_rows(set, reports)? {
        w.serialize(row)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
