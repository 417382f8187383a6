//! Generational genetic algorithm: fitness, roulette-wheel selection,
//! elitism and the main loop.

use std::time::Instant;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compat::CompatCache;
use crate::crossover::{crossover, CrossoverConfig};
use crate::error::{Error, Result};
use crate::puzzle::{random_arrangement, Arrangement, SpatialRelation};
use crate::rng::{self, SolverRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub elite_count: usize,
    pub mutation_rate: f64,
    pub master_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 1000,
            generations: 100,
            elite_count: 4,
            mutation_rate: 0.05,
            master_seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(Error::InvalidInput("population size must be positive".into()));
        }
        if self.generations == 0 {
            return Err(Error::InvalidInput("generation count must be positive".into()));
        }
        if self.elite_count > self.population_size {
            return Err(Error::InvalidInput(format!(
                "elite count {} exceeds population size {}",
                self.elite_count, self.population_size
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::InvalidInput(format!(
                "mutation rate {} outside [0, 1]",
                self.mutation_rate
            )));
        }
        Ok(())
    }
}

/// Sum of right and down dissimilarities over every adjacent pair. Lower is
/// better.
pub fn fitness(arrangement: &Arrangement, cache: &CompatCache) -> Result<f64> {
    let dims = cache.dims();
    if !arrangement.dims().same_grid(&dims) {
        return Err(Error::InvalidInput(format!(
            "arrangement is {}x{}, puzzle is {}x{}",
            arrangement.dims().rows,
            arrangement.dims().cols,
            dims.rows,
            dims.cols
        )));
    }
    Arrangement::new(dims, arrangement.grid().to_vec())?;
    Ok(fitness_unchecked(arrangement, cache))
}

fn fitness_unchecked(arrangement: &Arrangement, cache: &CompatCache) -> f64 {
    let cols = cache.dims().cols;
    let grid = arrangement.grid();
    let mut total = 0.0;
    for row in grid.chunks(cols) {
        for pair in row.windows(2) {
            total += cache.d(pair[0], pair[1], SpatialRelation::Right);
        }
    }
    for (upper, lower) in grid.iter().zip(&grid[cols.min(grid.len())..]) {
        total += cache.d(*upper, *lower, SpatialRelation::Down);
    }
    total
}

const WEIGHT_FLOOR: f64 = 0.01;

/// Roulette weights for costs: `(max - f) + 0.01 * (max - min + 1)`, so the
/// cheapest member is heaviest and every member keeps a nonzero share.
pub fn selection_weights(fitness: &[f64]) -> Vec<f64> {
    let max = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = fitness.iter().copied().fold(f64::INFINITY, f64::min);
    let floor = WEIGHT_FLOOR * (max - min + 1.0);
    fitness.iter().map(|f| (max - f) + floor).collect()
}

/// Roulette wheel over fixed weights.
#[derive(Debug, Clone)]
pub struct Roulette {
    cumulative: Vec<f64>,
}

impl Roulette {
    pub fn new(weights: &[f64]) -> Self {
        assert!(!weights.is_empty(), "roulette needs at least one slot");
        let cumulative = weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        Self { cumulative }
    }

    pub fn spin<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty");
        let x = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }
}

/// Index `i` with probability `weights[i] / sum(weights)`.
pub fn roulette_select<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    Roulette::new(weights).spin(rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub worst_fitness: f64,
    pub mean_fitness: f64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone)]
pub struct EvaluatedPopulation {
    pub members: Vec<(Arrangement, f64)>,
    pub generation_index: usize,
}

impl EvaluatedPopulation {
    fn evaluate(members: Vec<Arrangement>, cache: &CompatCache, generation_index: usize) -> Self {
        let members = members
            .into_par_iter()
            .map(|a| {
                let f = fitness_unchecked(&a, cache);
                (a, f)
            })
            .collect();
        Self {
            members,
            generation_index,
        }
    }

    /// Index of the lowest fitness, earliest on ties.
    pub fn best_index(&self) -> usize {
        self.ranked()[0]
    }

    /// Member indices from best to worst, ties by index.
    pub fn ranked(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.members.len()).collect();
        order.sort_by(|&a, &b| self.members[a].1.total_cmp(&self.members[b].1).then(a.cmp(&b)));
        order
    }

    fn stats(&self, started: Instant) -> GenerationStats {
        let fit = self.members.iter().map(|m| m.1);
        GenerationStats {
            generation: self.generation_index,
            best_fitness: fit.clone().fold(f64::INFINITY, f64::min),
            worst_fitness: fit.clone().fold(f64::NEG_INFINITY, f64::max),
            mean_fitness: fit.sum::<f64>() / self.members.len() as f64,
            elapsed_ms: started.elapsed().as_millis() as u64,
        }
    }
}

/// Called once per generation (including the initial random population) on
/// the thread that drives [`run`].
pub trait GenerationObserver {
    fn on_generation(&mut self, stats: &GenerationStats, best: &Arrangement);
}

impl GenerationObserver for () {
    fn on_generation(&mut self, _stats: &GenerationStats, _best: &Arrangement) {}
}

impl<F: FnMut(&GenerationStats, &Arrangement)> GenerationObserver for F {
    fn on_generation(&mut self, stats: &GenerationStats, best: &Arrangement) {
        self(stats, best)
    }
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: Arrangement,
    pub best_fitness: f64,
    /// One entry per generation; entry 0 is the initial random population.
    pub history: Vec<GenerationStats>,
}

fn offspring_stream(config: &GaConfig, generation: usize, slot: usize) -> SolverRng {
    let id = 1 + (generation as u64 - 1) * config.population_size as u64 + slot as u64;
    rng::stream(config.master_seed, id)
}

/// Runs the GA. Generation 0 is `population_size` random arrangements; each
/// of the following `generations` keeps the `elite_count` best and fills the
/// rest with crossover children of roulette-selected parents.
///
/// Results depend only on `cache` and `config`, not on how many threads
/// rayon uses.
pub fn run<O: GenerationObserver + ?Sized>(
    cache: &CompatCache,
    config: &GaConfig,
    observer: &mut O,
) -> Result<GaOutcome> {
    config.validate()?;
    let started = Instant::now();
    let dims = cache.dims();

    let mut init_rng = rng::stream(config.master_seed, 0);
    let initial = (0..config.population_size)
        .map(|_| random_arrangement(dims, &mut init_rng))
        .collect();
    let mut population = EvaluatedPopulation::evaluate(initial, cache, 0);

    let mut history = Vec::with_capacity(config.generations + 1);
    let report = |population: &EvaluatedPopulation, history: &mut Vec<GenerationStats>, observer: &mut O| {
        let stats = population.stats(started);
        observer.on_generation(&stats, &population.members[population.best_index()].0);
        history.push(stats);
    };
    report(&population, &mut history, observer);

    let mut best = population.members[population.best_index()].clone();

    for generation in 1..=config.generations {
        let ranked = population.ranked();
        let elites: Vec<(Arrangement, f64)> = ranked[..config.elite_count]
            .iter()
            .map(|&i| population.members[i].clone())
            .collect();

        let fitness_values: Vec<f64> = population.members.iter().map(|m| m.1).collect();
        let wheel = Roulette::new(&selection_weights(&fitness_values));
        let parents = &population.members;
        let children = (0..config.population_size - config.elite_count)
            .into_par_iter()
            .map(|slot| {
                let mut rng = offspring_stream(config, generation, slot);
                let first = wheel.spin(&mut rng);
                let second = wheel.spin(&mut rng);
                let cfg = CrossoverConfig {
                    mutation_rate: config.mutation_rate,
                    rng_seed: rng.next_u64(),
                };
                crossover(&parents[first].0, &parents[second].0, cache, &cfg)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut next = EvaluatedPopulation::evaluate(children, cache, generation);
        let mut members = elites;
        members.append(&mut next.members);
        population = EvaluatedPopulation {
            members,
            generation_index: generation,
        };
        report(&population, &mut history, observer);

        let candidate = &population.members[population.best_index()];
        if candidate.1 < best.1 {
            best = candidate.clone();
        }
    }

    Ok(GaOutcome {
        best: best.0,
        best_fitness: best.1,
        history,
    })
}
