//! The partial, position-independent placement grown by crossover.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::index_set::IndexSet;
use crate::error::{Error, Result};
use crate::puzzle::{Arrangement, PuzzleDims, SpatialRelation};

const EMPTY: u32 = u32::MAX;

/// A side of a placed piece where a new piece may be attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Boundary {
    pub piece: usize,
    pub relation: SpatialRelation,
}

impl Boundary {
    pub fn new(piece: usize, relation: SpatialRelation) -> Self {
        Self { piece, relation }
    }

    /// Dense key; ascending keys are ascending `(piece, relation)`.
    pub(crate) fn key(self) -> usize {
        self.piece * 4 + self.relation.index()
    }

    pub(crate) fn from_key(key: usize) -> Self {
        Self {
            piece: key / 4,
            relation: SpatialRelation::from_index(key % 4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub min_row: isize,
    pub max_row: isize,
    pub min_col: isize,
    pub max_col: isize,
}

impl BoundingBox {
    pub fn height(&self) -> usize {
        (self.max_row - self.min_row + 1) as usize
    }

    pub fn width(&self) -> usize {
        (self.max_col - self.min_col + 1) as usize
    }
}

/// A contiguous group of placed pieces in relative coordinates. The first
/// piece sits at `(0, 0)`; coordinates may go negative as the kernel grows
/// up or left. The bounding box never exceeds the puzzle frame.
#[derive(Debug, Clone)]
pub struct KernelAssembly {
    dims: PuzzleDims,
    /// `(2N - 1) x (2M - 1)` board centered on the first piece.
    board: Vec<u32>,
    board_cols: usize,
    location: Vec<Option<(isize, isize)>>,
    placed: usize,
    bbox: Option<BoundingBox>,
    boundaries: IndexSet,
    added: Vec<Boundary>,
    removed: Vec<Boundary>,
}

impl KernelAssembly {
    pub fn new(dims: PuzzleDims) -> Self {
        let board_rows = 2 * dims.rows - 1;
        let board_cols = 2 * dims.cols - 1;
        let p = dims.piece_count();
        Self {
            dims,
            board: vec![EMPTY; board_rows * board_cols],
            board_cols,
            location: vec![None; p],
            placed: 0,
            bbox: None,
            boundaries: IndexSet::new(p * 4),
            added: Vec::with_capacity(4),
            removed: Vec::new(),
        }
    }

    pub fn dims(&self) -> PuzzleDims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.placed
    }

    pub fn is_empty(&self) -> bool {
        self.placed == 0
    }

    pub fn is_complete(&self) -> bool {
        self.placed == self.dims.piece_count()
    }

    pub fn is_used(&self, piece: usize) -> bool {
        self.location[piece].is_some()
    }

    pub fn location(&self, piece: usize) -> Option<(isize, isize)> {
        self.location[piece]
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        self.bbox
    }

    pub fn piece_at(&self, row: isize, col: isize) -> Option<usize> {
        self.board_index(row, col)
            .map(|i| self.board[i])
            .filter(|&p| p != EMPTY)
            .map(|p| p as usize)
    }

    fn board_index(&self, row: isize, col: isize) -> Option<usize> {
        let r = row + self.dims.rows as isize - 1;
        let c = col + self.dims.cols as isize - 1;
        if r < 0 || c < 0 || r as usize >= 2 * self.dims.rows - 1 || c as usize >= self.board_cols {
            None
        } else {
            Some(r as usize * self.board_cols + c as usize)
        }
    }

    /// Legal boundaries in ascending `(piece, relation)` order.
    pub fn legal_boundaries(&self) -> Vec<Boundary> {
        self.boundaries.iter().map(Boundary::from_key).collect()
    }

    pub fn boundary_count(&self) -> usize {
        self.boundaries.len()
    }

    /// The `rank`-th legal boundary in canonical order.
    pub fn nth_boundary(&self, rank: usize) -> Boundary {
        Boundary::from_key(self.boundaries.nth(rank))
    }

    pub fn is_legal(&self, boundary: Boundary) -> bool {
        self.boundaries.contains(boundary.key())
    }

    /// Boundaries that became legal during the last placement.
    pub fn last_added(&self) -> &[Boundary] {
        &self.added
    }

    /// Boundaries that stopped being legal during the last placement.
    pub fn last_removed(&self) -> &[Boundary] {
        &self.removed
    }

    /// Places the first piece at the origin.
    pub fn seed(&mut self, piece: usize) -> Result<()> {
        if !self.is_empty() {
            return Err(Error::ContractViolation("kernel already seeded".into()));
        }
        self.check_piece(piece)?;
        self.added.clear();
        self.removed.clear();
        self.occupy(piece, 0, 0);
        Ok(())
    }

    /// Attaches `piece` at the cell adjacent to `boundary`.
    pub fn place(&mut self, boundary: Boundary, piece: usize) -> Result<()> {
        if boundary.piece >= self.location.len() || !self.is_legal(boundary) {
            return Err(Error::ContractViolation(format!(
                "boundary ({}, {}) is not available",
                boundary.piece, boundary.relation
            )));
        }
        self.check_piece(piece)?;
        let (r, c) = self.location[boundary.piece].expect("boundary piece is placed");
        let (dr, dc) = boundary.relation.offset();
        self.added.clear();
        self.removed.clear();
        self.occupy(piece, r + dr, c + dc);
        Ok(())
    }

    fn check_piece(&self, piece: usize) -> Result<()> {
        if piece >= self.location.len() {
            return Err(Error::ContractViolation(format!("piece {piece} out of range")));
        }
        if self.is_used(piece) {
            return Err(Error::ContractViolation(format!("piece {piece} is already placed")));
        }
        Ok(())
    }

    fn remove_boundary(&mut self, b: Boundary) {
        if self.boundaries.remove(b.key()) {
            self.removed.push(b);
        }
    }

    fn occupy(&mut self, piece: usize, row: isize, col: isize) {
        let idx = self.board_index(row, col).expect("frame keeps cells on the board");
        debug_assert_eq!(self.board[idx], EMPTY);
        self.board[idx] = piece as u32;
        self.location[piece] = Some((row, col));
        self.placed += 1;

        let (old_w, old_h) = self.bbox.map_or((0, 0), |b| (b.width(), b.height()));
        let bbox = match self.bbox {
            None => BoundingBox {
                min_row: row,
                max_row: row,
                min_col: col,
                max_col: col,
            },
            Some(b) => BoundingBox {
                min_row: b.min_row.min(row),
                max_row: b.max_row.max(row),
                min_col: b.min_col.min(col),
                max_col: b.max_col.max(col),
            },
        };
        self.bbox = Some(bbox);

        // Sides facing the new cell are closed.
        for rel in SpatialRelation::ALL {
            let (dr, dc) = rel.offset();
            if let Some(q) = self.piece_at(row + dr, col + dc) {
                self.remove_boundary(Boundary::new(q, rel.complement()));
            }
        }

        // Once the kernel spans the full width (height), nothing may attach
        // beyond its outer columns (rows).
        if old_w < self.dims.cols && bbox.width() == self.dims.cols {
            for r in bbox.min_row..=bbox.max_row {
                if let Some(q) = self.piece_at(r, bbox.min_col) {
                    self.remove_boundary(Boundary::new(q, SpatialRelation::Left));
                }
                if let Some(q) = self.piece_at(r, bbox.max_col) {
                    self.remove_boundary(Boundary::new(q, SpatialRelation::Right));
                }
            }
        }
        if old_h < self.dims.rows && bbox.height() == self.dims.rows {
            for c in bbox.min_col..=bbox.max_col {
                if let Some(q) = self.piece_at(bbox.min_row, c) {
                    self.remove_boundary(Boundary::new(q, SpatialRelation::Up));
                }
                if let Some(q) = self.piece_at(bbox.max_row, c) {
                    self.remove_boundary(Boundary::new(q, SpatialRelation::Down));
                }
            }
        }

        for rel in SpatialRelation::ALL {
            let (dr, dc) = rel.offset();
            if self.cell_is_open(row + dr, col + dc) {
                let b = Boundary::new(piece, rel);
                self.boundaries.insert(b.key());
                self.added.push(b);
            }
        }
    }

    /// Empty, and occupying it keeps the kernel inside the frame.
    fn cell_is_open(&self, row: isize, col: isize) -> bool {
        let Some(b) = self.bbox else { return false };
        let width = (b.max_col.max(col) - b.min_col.min(col) + 1) as usize;
        let height = (b.max_row.max(row) - b.min_row.min(row) + 1) as usize;
        width <= self.dims.cols && height <= self.dims.rows && self.piece_at(row, col).is_none()
    }

    /// Full recomputation of every structural invariant; for tests and
    /// instrumented runs.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let placed: Vec<(usize, (isize, isize))> = self
            .location
            .iter()
            .enumerate()
            .filter_map(|(p, loc)| loc.map(|l| (p, l)))
            .collect();
        if placed.len() != self.placed {
            return Err(format!("{} located pieces but count is {}", placed.len(), self.placed));
        }
        for &(p, (r, c)) in &placed {
            if self.piece_at(r, c) != Some(p) {
                return Err(format!("piece {p} not found at its location ({r}, {c})"));
            }
        }
        let on_board = self.board.iter().filter(|&&v| v != EMPTY).count();
        if on_board != self.placed {
            return Err(format!("{on_board} board cells occupied but {} pieces placed", self.placed));
        }
        let Some(bbox) = self.bbox else {
            return if self.boundaries.is_empty() {
                Ok(())
            } else {
                Err("empty kernel has boundaries".into())
            };
        };
        if bbox.width() > self.dims.cols || bbox.height() > self.dims.rows {
            return Err(format!("bounding box {}x{} exceeds the frame", bbox.height(), bbox.width()));
        }
        let tight = placed.iter().fold(None::<BoundingBox>, |acc, &(_, (r, c))| {
            Some(match acc {
                None => BoundingBox {
                    min_row: r,
                    max_row: r,
                    min_col: c,
                    max_col: c,
                },
                Some(b) => BoundingBox {
                    min_row: b.min_row.min(r),
                    max_row: b.max_row.max(r),
                    min_col: b.min_col.min(c),
                    max_col: b.max_col.max(c),
                },
            })
        });
        if tight != Some(bbox) {
            return Err(format!("stale bounding box {bbox:?}, actual {tight:?}"));
        }

        // Contiguity: flood fill from any placed piece.
        let start = placed[0].1;
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some((r, c)) = queue.pop_front() {
            for rel in SpatialRelation::ALL {
                let (dr, dc) = rel.offset();
                let next = (r + dr, c + dc);
                if self.piece_at(next.0, next.1).is_some() && seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        if seen.len() != self.placed {
            return Err(format!("kernel is not contiguous: {} of {} reachable", seen.len(), self.placed));
        }

        let expected: Vec<Boundary> = placed
            .iter()
            .flat_map(|&(p, (r, c))| {
                SpatialRelation::ALL.into_iter().filter_map(move |rel| {
                    let (dr, dc) = rel.offset();
                    let (tr, tc) = (r + dr, c + dc);
                    let width = (bbox.max_col.max(tc) - bbox.min_col.min(tc) + 1) as usize;
                    let height = (bbox.max_row.max(tr) - bbox.min_row.min(tr) + 1) as usize;
                    (width <= self.dims.cols && height <= self.dims.rows && self.piece_at(tr, tc).is_none())
                        .then_some(Boundary::new(p, rel))
                })
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let actual = self.legal_boundaries();
        if expected != actual {
            return Err(format!("boundary set {actual:?} differs from {expected:?}"));
        }
        Ok(())
    }

    /// The finished child: the kernel translated so its corner is `(0, 0)`.
    pub fn to_arrangement(&self) -> Result<Arrangement> {
        if !self.is_complete() {
            return Err(Error::ContractViolation(format!(
                "kernel holds {} of {} pieces",
                self.placed,
                self.dims.piece_count()
            )));
        }
        let bbox = self.bbox.expect("complete kernel is non-empty");
        let grid = (bbox.min_row..=bbox.max_row)
            .flat_map(|r| (bbox.min_col..=bbox.max_col).map(move |c| (r, c)))
            .map(|(r, c)| self.piece_at(r, c).expect("complete kernel fills its frame"))
            .collect();
        Ok(Arrangement::from_grid_unchecked(self.dims, grid))
    }
}
