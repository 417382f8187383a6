//! Brute-force oracles and instance generators shared by integration tests.
//! Every oracle reads pixels directly and never touches the cache.
#![allow(dead_code)]

use std::collections::HashSet;

use jigsaw_core::{Arrangement, Piece, PuzzleDims, PuzzleInstance, SpatialRelation};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const RELATIONS: [SpatialRelation; 4] = [
    SpatialRelation::Left,
    SpatialRelation::Right,
    SpatialRelation::Up,
    SpatialRelation::Down,
];

/// Pieces with independent uniform pixel values.
pub fn random_instance(rows: usize, cols: usize, k: usize, seed: u64) -> PuzzleInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pieces = (0..rows * cols)
        .map(|id| Piece::new(id, k, (0..k * k * 3).map(|_| rng.random::<f64>()).collect()).unwrap())
        .collect();
    PuzzleInstance::from_pieces(PuzzleDims::new(rows, cols, k).unwrap(), pieces).unwrap()
}

/// Pieces whose pixels take only the values 0 and 1, so that many
/// dissimilarities tie.
pub fn coarse_instance(rows: usize, cols: usize, k: usize, seed: u64) -> PuzzleInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pieces = (0..rows * cols)
        .map(|id| {
            let v = (0..k * k * 3).map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 }).collect();
            Piece::new(id, k, v).unwrap()
        })
        .collect();
    PuzzleInstance::from_pieces(PuzzleDims::new(rows, cols, k).unwrap(), pieces).unwrap()
}

/// Pieces cut from one smooth random image, so the ground truth is a
/// strong but not always unique optimum.
pub fn smooth_instance(rows: usize, cols: usize, k: usize, seed: u64) -> PuzzleInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (h, w) = (rows * k, cols * k);
    let waves: Vec<[f64; 4]> = (0..9)
        .map(|_| [rng.random::<f64>() * 4.0, rng.random::<f64>() * 4.0, rng.random::<f64>() * 6.3, rng.random::<f64>()])
        .collect();
    let value = |y: usize, x: usize, ch: usize| {
        let (fy, fx) = (y as f64 / h as f64, x as f64 / w as f64);
        let s: f64 = waves[ch * 3..ch * 3 + 3]
            .iter()
            .map(|[a, b, p, amp]| amp * (a * fy * 6.3 + b * fx * 6.3 + p).sin())
            .sum();
        (0.5 + s / 6.0).clamp(0.0, 1.0)
    };
    let pieces = (0..rows * cols)
        .map(|id| {
            let (r, c) = (id / cols, id % cols);
            let mut v = Vec::with_capacity(k * k * 3);
            for y in 0..k {
                for x in 0..k {
                    for ch in 0..3 {
                        v.push(value(r * k + y, c * k + x, ch));
                    }
                }
            }
            Piece::new(id, k, v).unwrap()
        })
        .collect();
    PuzzleInstance::from_pieces(PuzzleDims::new(rows, cols, k).unwrap(), pieces).unwrap()
}

pub fn random_arrangement(dims: PuzzleDims, rng: &mut impl Rng) -> Arrangement {
    let mut grid: Vec<usize> = (0..dims.piece_count()).collect();
    grid.shuffle(rng);
    Arrangement::new(dims, grid).unwrap()
}

/// Dissimilarity of putting `b` in direction `rel` of `a`, from pixels.
pub fn oracle_d(a: &Piece, b: &Piece, rel: SpatialRelation) -> f64 {
    let k = a.size();
    let mut sum = 0.0;
    for t in 0..k {
        let (pa, pb) = match rel {
            SpatialRelation::Right => (a.pixel(t, k - 1), b.pixel(t, 0)),
            SpatialRelation::Left => (a.pixel(t, 0), b.pixel(t, k - 1)),
            SpatialRelation::Down => (a.pixel(k - 1, t), b.pixel(0, t)),
            SpatialRelation::Up => (a.pixel(0, t), b.pixel(k - 1, t)),
        };
        for ch in 0..3 {
            let d = pa[ch] - pb[ch];
            sum += d * d;
        }
    }
    sum.sqrt()
}

pub fn oracle_fitness(arr: &Arrangement, pieces: &[Piece]) -> f64 {
    let d = arr.dims();
    let mut total = 0.0;
    for r in 0..d.rows {
        for c in 0..d.cols {
            let a = &pieces[arr.get(r, c)];
            if c + 1 < d.cols {
                total += oracle_d(a, &pieces[arr.get(r, c + 1)], SpatialRelation::Right);
            }
            if r + 1 < d.rows {
                total += oracle_d(a, &pieces[arr.get(r + 1, c)], SpatialRelation::Down);
            }
        }
    }
    total
}

pub fn oracle_direct(arr: &Arrangement, gt: &Arrangement) -> f64 {
    let n = arr.grid().len();
    (0..n).filter(|&i| arr.grid()[i] == gt.grid()[i]).count() as f64 / n as f64
}

/// Every ordered (piece, piece, relation) adjacency of an arrangement,
/// listed once per right/down pair.
pub fn adjacency_set(arr: &Arrangement) -> HashSet<(usize, usize, SpatialRelation)> {
    let d = arr.dims();
    let mut set = HashSet::new();
    for r in 0..d.rows {
        for c in 0..d.cols {
            if c + 1 < d.cols {
                set.insert((arr.get(r, c), arr.get(r, c + 1), SpatialRelation::Right));
            }
            if r + 1 < d.rows {
                set.insert((arr.get(r, c), arr.get(r + 1, c), SpatialRelation::Down));
            }
        }
    }
    set
}

pub fn oracle_neighbor(arr: &Arrangement, gt: &Arrangement) -> f64 {
    let truth = adjacency_set(gt);
    if truth.is_empty() {
        return 1.0;
    }
    let got = adjacency_set(arr);
    truth.intersection(&got).count() as f64 / truth.len() as f64
}

/// True when `j` attains the minimum dissimilarity in direction `rel` of `i`
/// and `i` attains it in the opposite direction of `j`.
pub fn oracle_best_buddies(pieces: &[Piece], i: usize, j: usize, rel: SpatialRelation) -> bool {
    if i == j {
        return false;
    }
    let is_min = |a: usize, b: usize, rel: SpatialRelation| {
        let target = oracle_d(&pieces[a], &pieces[b], rel);
        (0..pieces.len()).filter(|&k| k != a).all(|k| oracle_d(&pieces[a], &pieces[k], rel) >= target)
    };
    is_min(i, j, rel) && is_min(j, i, rel.complement())
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Re-derives, before every placement, which placements each rule allows,
/// then checks the operator's choice against that and the kernel
/// invariants after it.
pub struct Audit<'a> {
    pub cache: &'a jigsaw_core::CompatCache,
    pub buddies: &'a BuddyTable,
    pub parents: [Vec<Option<usize>>; 2],
    pub agree: HashSet<(jigsaw_core::Boundary, usize)>,
    pub buddy: HashSet<(jigsaw_core::Boundary, usize)>,
    pub legal: Vec<jigsaw_core::Boundary>,
    pub counts: std::collections::HashMap<jigsaw_core::crossover::Phase, usize>,
    pub failure: Option<String>,
}

impl<'a> Audit<'a> {
    pub fn new(cache: &'a jigsaw_core::CompatCache, buddies: &'a BuddyTable, p1: &Arrangement, p2: &Arrangement) -> Self {
        Self {
            cache,
            buddies,
            parents: [p1.neighbor_table(), p2.neighbor_table()],
            agree: HashSet::new(),
            buddy: HashSet::new(),
            legal: Vec::new(),
            counts: Default::default(),
            failure: None,
        }
    }

    fn fail(&mut self, msg: String) {
        if self.failure.is_none() {
            self.failure = Some(msg);
        }
    }
}

impl jigsaw_core::crossover::PlacementObserver for Audit<'_> {
    fn before_placement(&mut self, kernel: &jigsaw_core::KernelAssembly) {
        self.agree.clear();
        self.buddy.clear();
        self.legal = kernel.legal_boundaries();
        for &b in &self.legal {
            let key = b.piece * 4 + b.relation.index();
            let (p, q) = (self.parents[0][key], self.parents[1][key]);
            if let (Some(p), Some(q)) = (p, q) {
                if p == q && !kernel.is_used(p) {
                    self.agree.insert((b, p));
                }
            }
            for x in [p, q].into_iter().flatten() {
                if !kernel.is_used(x) && self.buddies.get(b.piece, x, b.relation) {
                    self.buddy.insert((b, x));
                }
            }
        }
    }

    fn placed(&mut self, event: &jigsaw_core::crossover::PlacementEvent, kernel: &jigsaw_core::KernelAssembly) {
        use jigsaw_core::crossover::Phase;
        *self.counts.entry(event.phase).or_default() += 1;
        if let Err(e) = kernel.check_invariants() {
            self.fail(format!("step {}: {e}", event.step));
        }
        if kernel.len() != event.step + 1 {
            self.fail(format!("step {}: kernel holds {} pieces", event.step, kernel.len()));
        }
        let Some(b) = event.boundary else {
            if event.phase != Phase::Seed {
                self.fail(format!("step {}: placement without a boundary", event.step));
            }
            return;
        };
        if !self.legal.contains(&b) {
            self.fail(format!("step {}: {b:?} was not a legal boundary", event.step));
        }
        let ok = match event.phase {
            Phase::Seed => false,
            Phase::Agreement => self.agree.contains(&(b, event.piece)),
            Phase::BestBuddy => self.agree.is_empty() && self.buddy.contains(&(b, event.piece)),
            Phase::Greedy => {
                let n = self.cache.piece_count();
                let best = (0..n)
                    .filter(|&j| j != b.piece && (j == event.piece || kernel.location(j).is_none()))
                    .min_by(|&x, &y| {
                        self.cache.d(b.piece, x, b.relation).total_cmp(&self.cache.d(b.piece, y, b.relation)).then(x.cmp(&y))
                    });
                self.agree.is_empty() && self.buddy.is_empty() && best == Some(event.piece)
            }
            Phase::Mutation => {
                self.agree.iter().any(|&(a, _)| a == b) || (self.agree.is_empty() && self.buddy.is_empty())
            }
        };
        if !ok {
            self.fail(format!("step {}: {:?} placement of {} at {b:?} breaks rule precedence", event.step, event.phase, event.piece));
        }
    }
}

/// Best-buddy test computed from the cache's raw dissimilarities.
pub fn oracle_cache_buddies(cache: &jigsaw_core::CompatCache, i: usize, j: usize, rel: SpatialRelation) -> bool {
    let n = cache.piece_count();
    let is_min = |a: usize, b: usize, rel: SpatialRelation| {
        let t = cache.d(a, b, rel);
        (0..n).filter(|&k| k != a).all(|k| cache.d(a, k, rel) >= t)
    };
    i != j && is_min(i, j, rel) && is_min(j, i, rel.complement())
}

/// [`oracle_cache_buddies`] for every ordered pair and relation.
pub struct BuddyTable {
    n: usize,
    table: Vec<bool>,
}

impl BuddyTable {
    pub fn new(cache: &jigsaw_core::CompatCache) -> Self {
        let n = cache.piece_count();
        let mut table = vec![false; n * n * 4];
        for i in 0..n {
            for j in 0..n {
                for rel in RELATIONS {
                    table[(i * n + j) * 4 + rel.index()] = oracle_cache_buddies(cache, i, j, rel);
                }
            }
        }
        Self { n, table }
    }

    pub fn get(&self, i: usize, j: usize, rel: SpatialRelation) -> bool {
        self.table[(i * self.n + j) * 4 + rel.index()]
    }
}
