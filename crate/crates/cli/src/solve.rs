use std::path::{Path, PathBuf};

use anyhow::Context;
use jigsaw_core::ga::{self, GaOutcome};
use jigsaw_core::report::{ConfigEcho, ReportDims};
use jigsaw_core::{
    load_rgb, render, save_png, score, shuffle, slice_image, Arrangement, CompatCache, Error, GaConfig,
    GenerationStats, PuzzleInstance, PuzzleManifest, Score,
};
use serde::{Deserialize, Serialize};

use crate::args::{SolveArgs, Snapshot};

/// Contents of `score.json`. Holds no timings, so repeated runs with the same
/// seed produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub input: String,
    pub dims: ReportDims,
    pub shuffle_seed: u64,
    pub config: ConfigEcho,
    pub score: Score,
}

pub struct LoadedPuzzle {
    pub label: String,
    pub instance: PuzzleInstance,
    pub shuffled: Arrangement,
}

/// Loads a manifest and the puzzle it describes.
pub fn load_manifest(path: &Path) -> anyhow::Result<LoadedPuzzle> {
    let manifest = PuzzleManifest::load(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let (instance, shuffled) = manifest
        .instantiate(dir)
        .with_context(|| format!("instantiating {}", path.display()))?;
    Ok(LoadedPuzzle {
        label: path.display().to_string(),
        instance,
        shuffled,
    })
}

fn load_input(args: &SolveArgs) -> anyhow::Result<LoadedPuzzle> {
    match (&args.image, &args.manifest) {
        (Some(image), None) => {
            let mut instance = slice_image(&load_rgb(image)?, args.solver.piece_size as usize)?;
            instance.shuffle_seed = args.solver.seed;
            let shuffled = shuffle(&instance, args.solver.seed);
            Ok(LoadedPuzzle {
                label: image.display().to_string(),
                instance,
                shuffled,
            })
        }
        (None, Some(manifest)) => load_manifest(manifest),
        _ => Err(Error::InvalidInput("give exactly one of --image and --manifest".into()).into()),
    }
}

fn snapshot_generations(snapshots: &[Snapshot], generations: usize) -> anyhow::Result<Vec<usize>> {
    let mut out: Vec<usize> = snapshots
        .iter()
        .map(|s| match *s {
            Snapshot::Final => Ok(generations),
            Snapshot::Generation(g) if g <= generations => Ok(g),
            Snapshot::Generation(g) => Err(Error::InvalidInput(format!(
                "snapshot generation {g} is beyond the last generation {generations}"
            ))),
        })
        .collect::<Result<_, _>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Runs the GA, logging one progress line per generation to stderr and
/// keeping the best arrangement of each generation listed in `keep`.
pub fn run_ga(
    label: &str,
    cache: &CompatCache,
    config: &GaConfig,
    keep: &[usize],
) -> anyhow::Result<(GaOutcome, Vec<(usize, Arrangement)>)> {
    let mut kept = Vec::new();
    let mut observer = |s: &GenerationStats, best: &Arrangement| {
        eprintln!(
            "{label}: generation {}/{} best {:.4} mean {:.4} ({:.1}s)",
            s.generation,
            config.generations,
            s.best_fitness,
            s.mean_fitness,
            s.elapsed_ms as f64 / 1000.0
        );
        if keep.contains(&s.generation) {
            kept.push((s.generation, best.clone()));
        }
    };
    let outcome = ga::run(cache, config, &mut observer)?;
    Ok((outcome, kept))
}

/// Solves one puzzle and writes its outputs; returns the paths written.
pub fn run(args: &SolveArgs) -> anyhow::Result<Vec<PathBuf>> {
    let config = args.solver.ga_config(args.solver.seed);
    config.validate()?;
    let keep = snapshot_generations(&args.snapshots, config.generations)?;
    let puzzle = load_input(args)?;
    let instance = &puzzle.instance;
    eprintln!("{}: {} pieces ({}x{})", puzzle.label, instance.piece_count(), instance.dims.rows, instance.dims.cols);

    let cache = CompatCache::build(instance.dims, &instance.pieces)?;
    let (outcome, kept) = run_ga(&puzzle.label, &cache, &config, &keep)?;
    let result = score(&outcome.best, instance, &cache)?;

    let out = &args.out_dir;
    crate::create_dir(out)?;
    let mut written = Vec::new();
    let mut png = |name: String, arr: &Arrangement| -> anyhow::Result<()> {
        let path = out.join(name);
        save_png(&render(instance, arr)?, &path)?;
        written.push(path);
        Ok(())
    };
    png("puzzle.png".into(), &puzzle.shuffled)?;
    png("solution.png".into(), &outcome.best)?;
    for (g, arr) in &kept {
        png(format!("generation_{g:03}.png"), arr)?;
    }

    let report = SolveReport {
        input: puzzle.label.clone(),
        dims: instance.dims.into(),
        shuffle_seed: instance.shuffle_seed,
        config: ConfigEcho::from(&config),
        score: result,
    };
    let path = out.join("score.json");
    crate::write_text(&path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    written.push(path);
    let path = out.join("generations.csv");
    crate::write_generations_csv(&path, &outcome.history)?;
    written.push(path);

    eprintln!(
        "{}: neighbor {:.4} direct {:.4} fitness {:.4} (ground truth {:.4})",
        puzzle.label, result.neighbor, result.direct, result.fitness_solution, result.fitness_ground_truth
    );
    Ok(written)
}
