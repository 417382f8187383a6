//! Genetic-algorithm solver for square-tile jigsaw puzzles whose piece
//! orientation and grid dimensions are known.
//!
//! The pipeline is: [`slice_image`] an image into a [`PuzzleInstance`], build
//! a [`CompatCache`] of edge dissimilarities, evolve arrangements with
//! [`ga::run`] (whose offspring come from the kernel-growing
//! [`crossover()`]), and [`score`] the result against the ground truth.

pub mod color;
pub mod compat;
pub mod crossover;
mod error;
pub mod eval;
pub mod ga;
pub mod puzzle;
pub mod report;
pub mod rng;

pub use compat::{dissimilarity, CompatCache};
pub use crossover::{crossover, Boundary, CrossoverConfig, KernelAssembly};
pub use error::{Error, Result};
pub use eval::{direct_accuracy, neighbor_accuracy, score, Score};
pub use ga::{fitness, GaConfig, GaOutcome, GenerationStats};
pub use puzzle::{
    load_rgb, render, save_png, shuffle, slice_image, Arrangement, Piece, PuzzleDims, PuzzleInstance,
    PuzzleManifest, SpatialRelation,
};
pub use report::{Aggregate, ConfigEcho, RunRecord, RunReport, SetSummary};
