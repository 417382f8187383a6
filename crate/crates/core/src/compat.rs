//! Edge dissimilarity between pieces and the precomputed lookup tables built
//! from it.
//!
//! `D(i, j, R)` is the Euclidean distance between the abutting edges of piece
//! `i` and piece `j` when `j` sits in direction `R` of `i`. Only the right and
//! down tables are stored; left and up are read by transposition. Lower is
//! more compatible.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::puzzle::{Piece, PuzzleDims, SpatialRelation};

/// Squared-difference sum over two edges laid out identically, then rooted.
fn edge_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Dissimilarity of placing `b` in direction `rel` of `a`.
pub fn dissimilarity(a: &Piece, b: &Piece, rel: SpatialRelation) -> Result<f64> {
    if a.size() != b.size() {
        return Err(Error::InvalidInput(format!(
            "piece sizes differ: {} vs {}",
            a.size(),
            b.size()
        )));
    }
    // Always measure (first piece's far edge, second piece's near edge) for
    // the pair ordered left-to-right or top-to-bottom.
    let d = match rel {
        SpatialRelation::Right => edge_distance(&a.edge(SpatialRelation::Right), &b.edge(SpatialRelation::Left)),
        SpatialRelation::Left => edge_distance(&b.edge(SpatialRelation::Right), &a.edge(SpatialRelation::Left)),
        SpatialRelation::Down => edge_distance(&a.edge(SpatialRelation::Down), &b.edge(SpatialRelation::Up)),
        SpatialRelation::Up => edge_distance(&b.edge(SpatialRelation::Down), &a.edge(SpatialRelation::Up)),
    };
    Ok(d)
}

/// All pairwise dissimilarities of a puzzle plus the rankings derived from
/// them. Immutable once built.
#[derive(Debug, Clone)]
pub struct CompatCache {
    dims: PuzzleDims,
    n: usize,
    right: Vec<f64>,
    down: Vec<f64>,
    /// Per relation, `n` blocks of `n - 1` candidate ids sorted by
    /// `(D, id)`; the block for piece `i` excludes `i`.
    sorted: [Vec<u32>; 4],
    /// Per relation, the minimum of `D(i, ., R)` over pieces other than `i`.
    min_d: [Vec<f64>; 4],
    /// Per relation, the lowest-id best buddy of each piece, or `u32::MAX`.
    buddy: [Vec<u32>; 4],
}

const NO_PIECE: u32 = u32::MAX;

impl CompatCache {
    /// Computes every right and down dissimilarity and the derived indices.
    pub fn build(dims: PuzzleDims, pieces: &[Piece]) -> Result<Self> {
        let n = dims.piece_count();
        if pieces.len() != n {
            return Err(Error::InvalidInput(format!(
                "expected {n} pieces for {dims}, got {}",
                pieces.len()
            )));
        }
        if let Some(p) = pieces.iter().find(|p| p.size() != dims.piece_size) {
            return Err(Error::InvalidInput(format!(
                "piece {} has size {}, expected {}",
                p.id(),
                p.size(),
                dims.piece_size
            )));
        }
        if n >= NO_PIECE as usize {
            return Err(Error::InvalidInput(format!("{n} pieces is too many")));
        }

        let edges: Vec<[Vec<f64>; 4]> = pieces
            .iter()
            .map(|p| SpatialRelation::ALL.map(|side| p.edge(side)))
            .collect();
        let table = |near: SpatialRelation, far: SpatialRelation| {
            let mut out = vec![0.0; n * n];
            out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
                let a = &edges[i][far.index()];
                for (j, slot) in row.iter_mut().enumerate() {
                    *slot = edge_distance(a, &edges[j][near.index()]);
                }
            });
            out
        };
        let right = table(SpatialRelation::Left, SpatialRelation::Right);
        let down = table(SpatialRelation::Up, SpatialRelation::Down);
        Self::from_tables(dims, right, down)
    }

    /// Rebuilds the rankings from raw right/down tables (row `i`, column `j`
    /// holds `D(i, j, R)`).
    pub fn from_tables(dims: PuzzleDims, right: Vec<f64>, down: Vec<f64>) -> Result<Self> {
        let n = dims.piece_count();
        if right.len() != n * n || down.len() != n * n {
            return Err(Error::InvalidInput("dissimilarity tables have the wrong size".into()));
        }
        if let Some(v) = right.iter().chain(&down).find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!("dissimilarity {v} is not finite and non-negative")));
        }
        let mut cache = Self {
            dims,
            n,
            right,
            down,
            sorted: Default::default(),
            min_d: Default::default(),
            buddy: Default::default(),
        };

        for rel in SpatialRelation::ALL {
            let mut sorted = vec![0u32; n * n.saturating_sub(1)];
            if n > 1 {
                sorted.par_chunks_mut(n - 1).enumerate().for_each(|(i, block)| {
                    let ids = (0..n as u32).filter(|&j| j as usize != i);
                    for (slot, j) in block.iter_mut().zip(ids) {
                        *slot = j;
                    }
                    block.sort_unstable_by(|&a, &b| {
                        cache
                            .d(i, a as usize, rel)
                            .total_cmp(&cache.d(i, b as usize, rel))
                            .then(a.cmp(&b))
                    });
                });
            }
            let min_d = (0..n)
                .map(|i| match sorted.get(i * (n - 1)) {
                    Some(&j) if n > 1 => cache.d(i, j as usize, rel),
                    _ => f64::INFINITY,
                })
                .collect();
            cache.sorted[rel.index()] = sorted;
            cache.min_d[rel.index()] = min_d;
        }

        let buddy = SpatialRelation::ALL.map(|rel| {
            (0..n)
                .map(|i| match cache.candidates(i, rel).first() {
                    Some(&j) if cache.are_best_buddies(i, j as usize, rel) => j,
                    _ => NO_PIECE,
                })
                .collect()
        });
        cache.buddy = buddy;
        Ok(cache)
    }

    pub fn dims(&self) -> PuzzleDims {
        self.dims
    }

    pub fn piece_count(&self) -> usize {
        self.n
    }

    /// Number of stored dissimilarities (`2 * P^2`).
    pub fn entry_count(&self) -> usize {
        self.right.len() + self.down.len()
    }

    /// `D(i, j, rel)`.
    #[inline]
    pub fn d(&self, i: usize, j: usize, rel: SpatialRelation) -> f64 {
        let n = self.n;
        match rel {
            SpatialRelation::Right => self.right[i * n + j],
            SpatialRelation::Down => self.down[i * n + j],
            SpatialRelation::Left => self.right[j * n + i],
            SpatialRelation::Up => self.down[j * n + i],
        }
    }

    /// Every piece other than `i`, most compatible first (ties by id).
    #[inline]
    pub fn candidates(&self, i: usize, rel: SpatialRelation) -> &[u32] {
        let len = self.n - 1;
        &self.sorted[rel.index()][i * len..(i + 1) * len]
    }

    /// Smallest `D(i, j, rel)` over `j != i` (infinite for a one-piece puzzle).
    pub fn min_dissimilarity(&self, i: usize, rel: SpatialRelation) -> f64 {
        self.min_d[rel.index()][i]
    }

    /// True when `j` is a most compatible piece in direction `rel` of `i`
    /// and `i` is a most compatible piece in the opposite direction of `j`.
    /// Ties count: any piece reaching the minimum qualifies.
    #[inline]
    pub fn are_best_buddies(&self, i: usize, j: usize, rel: SpatialRelation) -> bool {
        i != j
            && self.d(i, j, rel) <= self.min_d[rel.index()][i]
            && self.d(j, i, rel.complement()) <= self.min_d[rel.complement().index()][j]
    }

    /// The lowest-id best buddy of `i` in direction `rel`, if any.
    pub fn best_buddy(&self, i: usize, rel: SpatialRelation) -> Option<usize> {
        match self.buddy[rel.index()][i] {
            NO_PIECE => None,
            j => Some(j as usize),
        }
    }

    /// The unused piece `j != i` minimizing `D(i, j, rel)`, lowest id on ties.
    pub fn most_compatible_available(&self, i: usize, rel: SpatialRelation, used: &[bool]) -> Result<usize> {
        self.candidates(i, rel)
            .iter()
            .map(|&j| j as usize)
            .find(|&j| !used[j])
            .ok_or(Error::ExhaustedBank)
    }

    const MAGIC: &'static [u8; 8] = b"JIGSAWDC";
    const VERSION: u32 = 1;

    /// Writes the raw right/down tables behind a versioned header. The
    /// rankings are recomputed on load.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let mut write = || -> std::io::Result<()> {
            w.write_all(Self::MAGIC)?;
            w.write_all(&Self::VERSION.to_le_bytes())?;
            for v in [self.dims.rows, self.dims.cols, self.dims.piece_size] {
                w.write_all(&(v as u64).to_le_bytes())?;
            }
            for v in self.right.iter().chain(&self.down) {
                w.write_all(&v.to_le_bytes())?;
            }
            w.flush()
        };
        write().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = std::io::BufReader::new(file);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
        if &magic != Self::MAGIC {
            return Err(Error::CacheFormat("bad magic".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word).map_err(|e| Error::io(path, e))?;
        let version = u32::from_le_bytes(word);
        if version != Self::VERSION {
            return Err(Error::CacheFormat(format!("unsupported version {version}")));
        }
        let read_u64 = |r: &mut std::io::BufReader<std::fs::File>| -> Result<u64> {
            let mut buf = [0u8; 8];
            r.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
            Ok(u64::from_le_bytes(buf))
        };
        let rows = read_u64(&mut r)? as usize;
        let cols = read_u64(&mut r)? as usize;
        let piece_size = read_u64(&mut r)? as usize;
        let dims = PuzzleDims::new(rows, cols, piece_size)?;
        let n = dims.piece_count();
        let mut values = Vec::with_capacity(2 * n * n);
        for _ in 0..2 * n * n {
            values.push(f64::from_bits(read_u64(&mut r)?));
        }
        if r.read(&mut [0u8; 1]).map_err(|e| Error::io(path, e))? != 0 {
            return Err(Error::CacheFormat("trailing bytes".into()));
        }
        let down = values.split_off(n * n);
        Self::from_tables(dims, values, down)
    }
}
