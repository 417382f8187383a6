//! Kernel-growing crossover.
//!
//! A child is grown from a single random piece. At every step the operator
//! looks at the open boundaries of the kernel and, in order of preference:
//!
//! 1. places a piece that both parents put in that direction of the boundary
//!    piece;
//! 2. places a piece that one parent puts there and that is also a best buddy
//!    of the boundary piece;
//! 3. picks a random boundary and places the most compatible unused piece.
//!
//! In steps 1 and 3 the chosen piece is, with probability `mutation_rate`,
//! swapped for a random unused piece. Because the kernel only fixes absolute
//! positions once it is complete, segments inherited from the parents may
//! end up anywhere in the child.

mod index_set;
mod kernel;

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compat::CompatCache;
use crate::error::{Error, Result};
use crate::puzzle::{Arrangement, SpatialRelation};
use crate::rng::SolverRng;
use index_set::IndexSet;
pub use kernel::{Boundary, BoundingBox, KernelAssembly};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverConfig {
    pub mutation_rate: f64,
    pub rng_seed: u64,
}

impl CrossoverConfig {
    pub fn new(mutation_rate: f64, rng_seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mutation_rate) {
            return Err(Error::InvalidInput(format!(
                "mutation rate {mutation_rate} outside [0, 1]"
            )));
        }
        Ok(Self {
            mutation_rate,
            rng_seed,
        })
    }
}

/// Which rule chose a placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "seed")]
    Seed,
    #[serde(rename = "1")]
    Agreement,
    #[serde(rename = "2")]
    BestBuddy,
    #[serde(rename = "3")]
    Greedy,
    #[serde(rename = "mutation")]
    Mutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementEvent {
    pub step: usize,
    pub phase: Phase,
    pub boundary: Option<Boundary>,
    pub piece: usize,
}

/// Hooks into a crossover run, called on the crossover's own thread.
pub trait PlacementObserver {
    /// Before a piece is chosen; the kernel holds at least the seed piece.
    fn before_placement(&mut self, _kernel: &KernelAssembly) {}
    /// After each placement, including the seed piece.
    fn placed(&mut self, _event: &PlacementEvent, _kernel: &KernelAssembly) {}
}

impl PlacementObserver for () {}

/// Writes one JSON object per placement.
pub struct JsonTrace<W: Write> {
    out: W,
    error: Option<std::io::Error>,
}

impl<W: Write> JsonTrace<W> {
    pub fn new(out: W) -> Self {
        Self { out, error: None }
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> PlacementObserver for JsonTrace<W> {
    fn placed(&mut self, event: &PlacementEvent, _kernel: &KernelAssembly) {
        if self.error.is_none() {
            let line = serde_json::to_string(event).expect("event serializes");
            if let Err(e) = writeln!(self.out, "{line}") {
                self.error = Some(e);
            }
        }
    }
}

const NONE: u32 = u32::MAX;

/// Unused pieces, with O(1) removal and uniform sampling.
struct Bank {
    items: Vec<u32>,
    slot: Vec<u32>,
}

impl Bank {
    fn full(n: usize) -> Self {
        Self {
            items: (0..n as u32).collect(),
            slot: (0..n as u32).collect(),
        }
    }

    fn remove(&mut self, piece: usize) {
        let at = self.slot[piece] as usize;
        let last = *self.items.last().expect("bank is non-empty");
        self.items.swap_remove(at);
        if last as usize != piece {
            self.slot[last as usize] = at as u32;
        }
        self.slot[piece] = NONE;
    }

    fn sample(&self, rng: &mut SolverRng) -> usize {
        self.items[rng.random_range(0..self.items.len())] as usize
    }
}

fn neighbor_table(parent: &Arrangement) -> Vec<u32> {
    parent
        .neighbor_table()
        .into_iter()
        .map(|n| n.map_or(NONE, |p| p as u32))
        .collect()
}

struct Grower<'a> {
    cache: &'a CompatCache,
    kernel: KernelAssembly,
    parents: [Vec<u32>; 2],
    bank: Bank,
    /// Boundaries where both parents agree on an unused piece.
    agreed: IndexSet,
    /// `boundary_key * 2 + parent` where that parent's neighbor is an unused
    /// best buddy of the boundary piece.
    buddies: IndexSet,
    /// Per boundary, how far down its candidate list all pieces are used.
    cursor: Vec<u32>,
}

impl Grower<'_> {
    fn proposal(&self, key: usize, parent: usize) -> Option<usize> {
        match self.parents[parent][key] {
            NONE => None,
            p => Some(p as usize),
        }
    }

    fn open(&mut self, b: Boundary) {
        let key = b.key();
        let first = self.proposal(key, 0);
        let second = self.proposal(key, 1);
        if let Some(q) = first {
            if first == second && !self.kernel.is_used(q) {
                self.agreed.insert(key);
            }
        }
        for (parent, q) in [(0, first), (1, second)] {
            let Some(q) = q else { continue };
            if parent == 1 && first == Some(q) {
                continue;
            }
            if !self.kernel.is_used(q) && self.cache.are_best_buddies(b.piece, q, b.relation) {
                self.buddies.insert(key * 2 + parent);
            }
        }
    }

    fn close(&mut self, b: Boundary) {
        let key = b.key();
        self.agreed.remove(key);
        self.buddies.remove(key * 2);
        self.buddies.remove(key * 2 + 1);
    }

    /// Drops every proposal of `piece`, which has just been used.
    fn retire(&mut self, piece: usize) {
        for rel in SpatialRelation::ALL {
            for parent in 0..2 {
                // `p` has `piece` in direction `rel` in this parent.
                let p = self.parents[parent][piece * 4 + rel.complement().index()];
                if p != NONE {
                    let key = Boundary::new(p as usize, rel).key();
                    self.agreed.remove(key);
                    self.buddies.remove(key * 2 + parent);
                }
            }
        }
    }

    fn most_compatible(&mut self, b: Boundary) -> usize {
        let key = b.key();
        let list = self.cache.candidates(b.piece, b.relation);
        let mut at = self.cursor[key] as usize;
        while self.kernel.is_used(list[at] as usize) {
            at += 1;
        }
        self.cursor[key] = at as u32;
        list[at] as usize
    }

    fn commit(&mut self, boundary: Option<Boundary>, piece: usize) -> Result<()> {
        match boundary {
            None => self.kernel.seed(piece)?,
            Some(b) => self.kernel.place(b, piece)?,
        }
        self.bank.remove(piece);
        for i in 0..self.kernel.last_removed().len() {
            let b = self.kernel.last_removed()[i];
            self.close(b);
        }
        self.retire(piece);
        for i in 0..self.kernel.last_added().len() {
            let b = self.kernel.last_added()[i];
            self.open(b);
        }
        Ok(())
    }
}

/// Builds one child from two parents.
pub fn crossover(
    parent1: &Arrangement,
    parent2: &Arrangement,
    cache: &CompatCache,
    config: &CrossoverConfig,
) -> Result<Arrangement> {
    crossover_observed(parent1, parent2, cache, config, &mut ())
}

/// [`crossover`] with a placement observer.
pub fn crossover_observed<O: PlacementObserver + ?Sized>(
    parent1: &Arrangement,
    parent2: &Arrangement,
    cache: &CompatCache,
    config: &CrossoverConfig,
    observer: &mut O,
) -> Result<Arrangement> {
    let dims = cache.dims();
    for parent in [parent1, parent2] {
        if !parent.dims().same_grid(&dims) {
            return Err(Error::InvalidInput(format!(
                "parent is {}x{}, puzzle is {}x{}",
                parent.dims().rows,
                parent.dims().cols,
                dims.rows,
                dims.cols
            )));
        }
    }
    let n = dims.piece_count();
    let mut rng = crate::rng::stream(config.rng_seed, 0);
    let mut grower = Grower {
        cache,
        kernel: KernelAssembly::new(dims),
        parents: [neighbor_table(parent1), neighbor_table(parent2)],
        bank: Bank::full(n),
        agreed: IndexSet::new(n * 4),
        buddies: IndexSet::new(n * 8),
        cursor: vec![0; n * 4],
    };

    let seed_piece = rng.random_range(0..n);
    grower.commit(None, seed_piece)?;
    observer.placed(
        &PlacementEvent {
            step: 0,
            phase: Phase::Seed,
            boundary: None,
            piece: seed_piece,
        },
        &grower.kernel,
    );

    let mutate = |rng: &mut SolverRng| rng.random::<f64>() < config.mutation_rate;
    for step in 1..n {
        observer.before_placement(&grower.kernel);
        let (boundary, piece, phase) = if !grower.agreed.is_empty() {
            let key = grower.agreed.nth(rng.random_range(0..grower.agreed.len()));
            let b = Boundary::from_key(key);
            let agreed = grower.proposal(key, 0).expect("agreed boundary has a proposal");
            if mutate(&mut rng) {
                (b, grower.bank.sample(&mut rng), Phase::Mutation)
            } else {
                (b, agreed, Phase::Agreement)
            }
        } else if !grower.buddies.is_empty() {
            let entry = grower.buddies.nth(rng.random_range(0..grower.buddies.len()));
            let key = entry / 2;
            let piece = grower.proposal(key, entry % 2).expect("buddy entry has a proposal");
            (Boundary::from_key(key), piece, Phase::BestBuddy)
        } else {
            let rank = rng.random_range(0..grower.kernel.boundary_count());
            let b = grower.kernel.nth_boundary(rank);
            if mutate(&mut rng) {
                (b, grower.bank.sample(&mut rng), Phase::Mutation)
            } else {
                (b, grower.most_compatible(b), Phase::Greedy)
            }
        };
        grower.commit(Some(boundary), piece)?;
        observer.placed(
            &PlacementEvent {
                step,
                phase,
                boundary: Some(boundary),
                piece,
            },
            &grower.kernel,
        );
    }

    grower.kernel.to_arrangement()
}
