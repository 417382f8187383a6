use std::path::{Path, PathBuf};

use anyhow::Context;
use jigsaw_core::rng::derive_seed;
use jigsaw_core::{load_rgb, slice_image, PuzzleManifest};
use serde::Serialize;

use crate::args::MakeDatasetArgs;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub image: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub manifests: Vec<PathBuf>,
    pub skipped: Vec<Skipped>,
}

const SUMMARY_FILE: &str = "dataset-summary.txt";

/// PNG and JPEG files directly inside `dir`, sorted by name.
pub fn list_images(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry.with_context(|| format!("listing {}", dir.display()))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if path.is_file() && matches!(ext.as_deref(), Some("png" | "jpg" | "jpeg")) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Writes `<stem>.json` for every usable image in `--src`, plus a plain-text
/// summary listing skipped images. Image `i` is shuffled with
/// `derive_seed(seed, i)`, counting skipped images too.
pub fn run(args: &MakeDatasetArgs) -> anyhow::Result<DatasetSummary> {
    let k = args.piece_size as usize;
    let images = list_images(&args.src)?;
    crate::create_dir(&args.out)?;
    let mut summary = DatasetSummary {
        manifests: Vec::new(),
        skipped: Vec::new(),
    };
    for (i, path) in images.iter().enumerate() {
        let image = match load_rgb(path) {
            Ok(img) => img,
            Err(e) => {
                eprintln!("warning: skipping {}: {e}", path.display());
                summary.skipped.push(Skipped {
                    image: path.clone(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let instance = match slice_image(&image, k) {
            Ok(inst) => inst,
            Err(e) => {
                eprintln!("warning: skipping {}: {e}", path.display());
                summary.skipped.push(Skipped {
                    image: path.clone(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let source = std::fs::canonicalize(path).with_context(|| format!("resolving {}", path.display()))?;
        let manifest = PuzzleManifest::new(source, &instance, derive_seed(args.seed, i as u64));
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("image");
        let out = args.out.join(format!("{stem}.json"));
        manifest.save(&out)?;
        eprintln!("{}: {}x{} pieces -> {}", path.display(), manifest.rows, manifest.cols, out.display());
        summary.manifests.push(out);
    }

    let mut text = format!("manifests: {}\nskipped: {}\n", summary.manifests.len(), summary.skipped.len());
    for s in &summary.skipped {
        text.push_str(&format!("  {}: {}\n", s.image.display(), s.reason));
    }
    crate::write_text(&args.out.join(SUMMARY_FILE), &text)?;
    eprint!("{text}");
    Ok(summary)
}
