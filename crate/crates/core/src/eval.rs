//! Accuracy of an arrangement against the ground truth.

use serde::{Deserialize, Serialize};

use crate::compat::CompatCache;
use crate::error::{Error, Result};
use crate::ga::fitness;
use crate::puzzle::{Arrangement, PuzzleInstance};

fn check_dims(a: &Arrangement, b: &Arrangement) -> Result<()> {
    if a.dims().same_grid(&b.dims()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "arrangements differ in shape: {}x{} vs {}x{}",
            a.dims().rows,
            a.dims().cols,
            b.dims().rows,
            b.dims().cols
        )))
    }
}

/// Fraction of cells holding the same piece as in the ground truth.
pub fn direct_accuracy(arrangement: &Arrangement, ground_truth: &Arrangement) -> Result<f64> {
    check_dims(arrangement, ground_truth)?;
    let hits = arrangement
        .grid()
        .iter()
        .zip(ground_truth.grid())
        .filter(|(a, b)| a == b)
        .count();
    Ok(hits as f64 / arrangement.grid().len() as f64)
}

/// Fraction of the ground truth's right/down adjacencies that the
/// arrangement reproduces. A 1x1 puzzle has no adjacencies and scores 1.
pub fn neighbor_accuracy(arrangement: &Arrangement, ground_truth: &Arrangement) -> Result<f64> {
    check_dims(arrangement, ground_truth)?;
    let dims = ground_truth.dims();
    let total = dims.adjacency_count();
    if total == 0 {
        return Ok(1.0);
    }
    let pos = arrangement.positions();
    let (rows, cols) = (dims.rows, dims.cols);
    let mut hits = 0;
    for r in 0..rows {
        for c in 0..cols {
            let a = ground_truth.get(r, c);
            let (ar, ac) = pos[a];
            if c + 1 < cols && ac + 1 < cols && arrangement.get(ar, ac + 1) == ground_truth.get(r, c + 1) {
                hits += 1;
            }
            if r + 1 < rows && ar + 1 < rows && arrangement.get(ar + 1, ac) == ground_truth.get(r + 1, c) {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub direct: f64,
    pub neighbor: f64,
    pub fitness_solution: f64,
    pub fitness_ground_truth: f64,
    /// The solution's fitness is strictly lower than the ground truth's.
    pub better_than_perfect: bool,
}

pub fn score(arrangement: &Arrangement, instance: &PuzzleInstance, cache: &CompatCache) -> Result<Score> {
    let fitness_solution = fitness(arrangement, cache)?;
    let fitness_ground_truth = fitness(&instance.ground_truth, cache)?;
    Ok(Score {
        direct: direct_accuracy(arrangement, &instance.ground_truth)?,
        neighbor: neighbor_accuracy(arrangement, &instance.ground_truth)?,
        fitness_solution,
        fitness_ground_truth,
        better_than_perfect: fitness_solution < fitness_ground_truth,
    })
}
