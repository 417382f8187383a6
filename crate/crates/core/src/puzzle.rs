//! Pieces, puzzle dimensions, spatial relations and arrangements.
//!
//! A puzzle is cut from a source image into `rows x cols` square tiles of
//! `piece_size` pixels. Pieces are numbered row-major by their position in
//! the source image, so the ground-truth arrangement is always the identity.

use std::fmt;
use std::path::{Path, PathBuf};

use image::{GenericImageView, RgbImage};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::color::srgb_to_normalized_lab;
use crate::error::{Error, Result};
use crate::rng;

/// Grid shape and tile size of a puzzle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PuzzleDims {
    pub rows: usize,
    pub cols: usize,
    pub piece_size: usize,
}

impl PuzzleDims {
    pub fn new(rows: usize, cols: usize, piece_size: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || piece_size == 0 {
            return Err(Error::InvalidInput(format!(
                "puzzle dimensions must be positive, got {rows}x{cols} with piece size {piece_size}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            piece_size,
        })
    }

    pub fn piece_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Number of horizontally or vertically adjacent cell pairs.
    pub fn adjacency_count(&self) -> usize {
        self.rows * (self.cols - 1) + (self.rows - 1) * self.cols
    }

    pub fn same_grid(&self, other: &PuzzleDims) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

impl fmt::Display for PuzzleDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} pieces of {}px", self.rows, self.cols, self.piece_size)
    }
}

/// Where piece `j` sits relative to piece `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpatialRelation {
    Left,
    Right,
    Up,
    Down,
}

impl SpatialRelation {
    pub const ALL: [SpatialRelation; 4] = [
        SpatialRelation::Left,
        SpatialRelation::Right,
        SpatialRelation::Up,
        SpatialRelation::Down,
    ];

    pub fn complement(self) -> Self {
        match self {
            SpatialRelation::Left => SpatialRelation::Right,
            SpatialRelation::Right => SpatialRelation::Left,
            SpatialRelation::Up => SpatialRelation::Down,
            SpatialRelation::Down => SpatialRelation::Up,
        }
    }

    /// Position in [`SpatialRelation::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Self {
        Self::ALL[index]
    }

    /// `(row, col)` step from a cell to its neighbor in this direction.
    pub fn offset(self) -> (isize, isize) {
        match self {
            SpatialRelation::Left => (0, -1),
            SpatialRelation::Right => (0, 1),
            SpatialRelation::Up => (-1, 0),
            SpatialRelation::Down => (1, 0),
        }
    }
}

impl fmt::Display for SpatialRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SpatialRelation::Left => "left",
            SpatialRelation::Right => "right",
            SpatialRelation::Up => "up",
            SpatialRelation::Down => "down",
        };
        f.write_str(name)
    }
}

/// One square tile in normalized L\*a\*b\*, stored row-major as
/// `[y][x][channel]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    id: usize,
    size: usize,
    lab: Vec<f64>,
}

impl Piece {
    pub fn new(id: usize, size: usize, lab: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidInput("piece size must be positive".into()));
        }
        if lab.len() != size * size * 3 {
            return Err(Error::InvalidInput(format!(
                "piece {id}: expected {} values, got {}",
                size * size * 3,
                lab.len()
            )));
        }
        if let Some(v) = lab.iter().find(|v| !v.is_finite() || !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidInput(format!(
                "piece {id}: channel value {v} outside [0, 1]"
            )));
        }
        Ok(Self { id, size, lab })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn pixel(&self, y: usize, x: usize) -> [f64; 3] {
        let at = (y * self.size + x) * 3;
        [self.lab[at], self.lab[at + 1], self.lab[at + 2]]
    }

    pub fn values(&self) -> &[f64] {
        &self.lab
    }

    /// The pixels along one side, in order along the edge, channels
    /// interleaved. Left/right edges run top to bottom, up/down edges run
    /// left to right.
    pub fn edge(&self, side: SpatialRelation) -> Vec<f64> {
        let k = self.size;
        let mut out = Vec::with_capacity(k * 3);
        for t in 0..k {
            let (y, x) = match side {
                SpatialRelation::Left => (t, 0),
                SpatialRelation::Right => (t, k - 1),
                SpatialRelation::Up => (0, t),
                SpatialRelation::Down => (k - 1, t),
            };
            out.extend_from_slice(&self.pixel(y, x));
        }
        out
    }
}

/// A complete placement: an `rows x cols` grid holding every piece id once.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arrangement {
    dims: PuzzleDims,
    grid: Vec<usize>,
}

impl Arrangement {
    /// Builds an arrangement from a row-major grid, rejecting anything that is
    /// not a permutation of `0..rows*cols`.
    pub fn new(dims: PuzzleDims, grid: Vec<usize>) -> Result<Self> {
        validate_permutation(&dims, &grid)?;
        Ok(Self { dims, grid })
    }

    pub fn identity(dims: PuzzleDims) -> Self {
        Self {
            dims,
            grid: (0..dims.piece_count()).collect(),
        }
    }

    pub(crate) fn from_grid_unchecked(dims: PuzzleDims, grid: Vec<usize>) -> Self {
        debug_assert!(validate_permutation(&dims, &grid).is_ok());
        Self { dims, grid }
    }

    pub fn dims(&self) -> PuzzleDims {
        self.dims
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn get(&self, row: usize, col: usize) -> usize {
        self.grid[row * self.dims.cols + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        self.grid.chunks(self.dims.cols)
    }

    /// `positions()[piece] = (row, col)`.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        let mut out = vec![(0, 0); self.grid.len()];
        for (cell, &piece) in self.grid.iter().enumerate() {
            out[piece] = (cell / self.dims.cols, cell % self.dims.cols);
        }
        out
    }

    /// Neighbor table: entry `piece * 4 + relation.index()` is the piece found
    /// in that direction, or `None` at the frame edge.
    pub fn neighbor_table(&self) -> Vec<Option<usize>> {
        let PuzzleDims { rows, cols, .. } = self.dims;
        let mut table = vec![None; self.grid.len() * 4];
        for r in 0..rows {
            for c in 0..cols {
                let piece = self.grid[r * cols + c];
                for rel in SpatialRelation::ALL {
                    let (dr, dc) = rel.offset();
                    let (nr, nc) = (r as isize + dr, c as isize + dc);
                    if nr >= 0 && nc >= 0 && (nr as usize) < rows && (nc as usize) < cols {
                        table[piece * 4 + rel.index()] = Some(self.grid[nr as usize * cols + nc as usize]);
                    }
                }
            }
        }
        table
    }
}

fn validate_permutation(dims: &PuzzleDims, grid: &[usize]) -> Result<()> {
    let p = dims.piece_count();
    if grid.len() != p {
        return Err(Error::InvalidArrangement(format!(
            "grid has {} cells, expected {p}",
            grid.len()
        )));
    }
    let mut seen = vec![false; p];
    for &piece in grid {
        if piece >= p {
            return Err(Error::InvalidArrangement(format!(
                "piece id {piece} out of range 0..{p}"
            )));
        }
        if std::mem::replace(&mut seen[piece], true) {
            return Err(Error::InvalidArrangement(format!("piece {piece} appears twice")));
        }
    }
    Ok(())
}

/// A sliced puzzle: its pieces, ground truth and (when cut from an image) the
/// cropped source raster used for rendering.
#[derive(Debug, Clone)]
pub struct PuzzleInstance {
    pub dims: PuzzleDims,
    pub pieces: Vec<Piece>,
    pub ground_truth: Arrangement,
    pub shuffle_seed: u64,
    source: Option<RgbImage>,
}

impl PuzzleInstance {
    /// An instance built directly from L\*a\*b\* pieces, with no source raster.
    pub fn from_pieces(dims: PuzzleDims, pieces: Vec<Piece>) -> Result<Self> {
        if pieces.len() != dims.piece_count() {
            return Err(Error::InvalidInput(format!(
                "expected {} pieces, got {}",
                dims.piece_count(),
                pieces.len()
            )));
        }
        for (i, piece) in pieces.iter().enumerate() {
            if piece.id() != i || piece.size() != dims.piece_size {
                return Err(Error::InvalidInput(format!(
                    "piece at index {i} has id {} and size {}",
                    piece.id(),
                    piece.size()
                )));
            }
        }
        Ok(Self {
            dims,
            pieces,
            ground_truth: Arrangement::identity(dims),
            shuffle_seed: 0,
            source: None,
        })
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// The center-cropped source image, if the instance was sliced from one.
    pub fn source(&self) -> Option<&RgbImage> {
        self.source.as_ref()
    }
}

/// Cuts `image` into `piece_size` tiles after center-cropping it to a whole
/// number of tiles in each direction.
pub fn slice_image(image: &RgbImage, piece_size: usize) -> Result<PuzzleInstance> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    if piece_size == 0 || h < piece_size || w < piece_size {
        return Err(Error::InvalidInput(format!(
            "image of {w}x{h} pixels is smaller than one {piece_size}px tile"
        )));
    }
    let dims = PuzzleDims::new(h / piece_size, w / piece_size, piece_size)?;
    let (crop_w, crop_h) = (dims.cols * piece_size, dims.rows * piece_size);
    let x0 = (w - crop_w) / 2;
    let y0 = (h - crop_h) / 2;
    let cropped = image
        .view(x0 as u32, y0 as u32, crop_w as u32, crop_h as u32)
        .to_image();

    let k = piece_size;
    let pieces = (0..dims.piece_count())
        .map(|id| {
            let (pr, pc) = (id / dims.cols, id % dims.cols);
            let mut lab = Vec::with_capacity(k * k * 3);
            for y in 0..k {
                for x in 0..k {
                    let px = cropped.get_pixel((pc * k + x) as u32, (pr * k + y) as u32);
                    lab.extend_from_slice(&srgb_to_normalized_lab(px.0));
                }
            }
            Piece::new(id, k, lab)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PuzzleInstance {
        dims,
        pieces,
        ground_truth: Arrangement::identity(dims),
        shuffle_seed: 0,
        source: Some(cropped),
    })
}

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(img.to_rgb8())
}

/// A uniformly random arrangement, reproducible from `seed`.
pub fn shuffle(instance: &PuzzleInstance, seed: u64) -> Arrangement {
    random_arrangement(instance.dims, &mut rng::stream(seed, 0))
}

pub(crate) fn random_arrangement<R: rand::Rng + ?Sized>(dims: PuzzleDims, rng: &mut R) -> Arrangement {
    let mut grid: Vec<usize> = (0..dims.piece_count()).collect();
    grid.shuffle(rng);
    Arrangement { dims, grid }
}

/// Draws each piece's original RGB tile at its arranged cell.
pub fn render(instance: &PuzzleInstance, arrangement: &Arrangement) -> Result<RgbImage> {
    let dims = instance.dims;
    validate_permutation(&dims, arrangement.grid())?;
    if !arrangement.dims().same_grid(&dims) {
        return Err(Error::InvalidArrangement(format!(
            "arrangement is {}x{}, puzzle is {}x{}",
            arrangement.dims().rows,
            arrangement.dims().cols,
            dims.rows,
            dims.cols
        )));
    }
    let source = instance
        .source
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("instance has no source image to render from".into()))?;

    let k = dims.piece_size as u32;
    let mut out = RgbImage::new(dims.cols as u32 * k, dims.rows as u32 * k);
    for (cell, &piece) in arrangement.grid().iter().enumerate() {
        let (dst_r, dst_c) = ((cell / dims.cols) as u32, (cell % dims.cols) as u32);
        let (src_r, src_c) = ((piece / dims.cols) as u32, (piece % dims.cols) as u32);
        for y in 0..k {
            for x in 0..k {
                let px = *source.get_pixel(src_c * k + x, src_r * k + y);
                out.put_pixel(dst_c * k + x, dst_r * k + y, px);
            }
        }
    }
    Ok(out)
}

pub fn save_png(image: &RgbImage, path: &Path) -> Result<()> {
    image
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// On-disk description of a shuffled puzzle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuzzleManifest {
    pub image_path: PathBuf,
    #[serde(rename = "K")]
    pub piece_size: usize,
    #[serde(rename = "N")]
    pub rows: usize,
    #[serde(rename = "M")]
    pub cols: usize,
    pub shuffle_seed: u64,
    pub piece_order: Vec<usize>,
}

impl PuzzleManifest {
    /// Manifest for `instance` (sliced from `image_path`) shuffled with `seed`.
    pub fn new(image_path: impl Into<PathBuf>, instance: &PuzzleInstance, seed: u64) -> Self {
        let order = shuffle(instance, seed);
        Self {
            image_path: image_path.into(),
            piece_size: instance.dims.piece_size,
            rows: instance.dims.rows,
            cols: instance.dims.cols,
            shuffle_seed: seed,
            piece_order: order.grid,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn dims(&self) -> Result<PuzzleDims> {
        PuzzleDims::new(self.rows, self.cols, self.piece_size)
    }

    /// Image path, resolved against the manifest's directory when relative.
    pub fn resolve_image_path(&self, manifest_dir: &Path) -> PathBuf {
        if self.image_path.is_absolute() {
            self.image_path.clone()
        } else {
            manifest_dir.join(&self.image_path)
        }
    }

    /// Re-slices the source image and returns the instance together with the
    /// shuffled arrangement recorded in the manifest.
    pub fn instantiate(&self, manifest_dir: &Path) -> Result<(PuzzleInstance, Arrangement)> {
        let dims = self.dims()?;
        let image = load_rgb(&self.resolve_image_path(manifest_dir))?;
        let mut instance = slice_image(&image, self.piece_size)?;
        if !instance.dims.same_grid(&dims) {
            return Err(Error::InvalidInput(format!(
                "manifest declares {}x{} pieces but the image yields {}x{}",
                dims.rows, dims.cols, instance.dims.rows, instance.dims.cols
            )));
        }
        instance.shuffle_seed = self.shuffle_seed;
        let order = Arrangement::new(dims, self.piece_order.clone())?;
        Ok((instance, order))
    }
}
