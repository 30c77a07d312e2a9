//! Cubical complexes of 2D/3D grayscale images and the single-pass surface
//! algorithm driven by precomputed neighborhood change tables.
//!
//! Cells are addressed in doubled coordinates: an image with extents
//! `n_i` has cells at integer positions `0..=2 n_i` along each axis, a
//! coordinate being odd when the cell spans that axis. Top cells (pixels or
//! voxels) have all coordinates odd; the cell dimension is the number of odd
//! coordinates.
//!
//! Neighborhoods of a top cell are the `3^d - 1` surrounding top cells in
//! row-major order (slice-row-major in 3D) with the center omitted. The
//! first neighbor is the most significant bit of the neighborhood index, so
//! the 2D block
//!
//! ```text
//! 1 0 1
//! 0 . 0
//! 1 0 1
//! ```
//!
//! reads `10100101` and has index 165.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use ndarray::Array2;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::complex::{Bifiltration, EulerCurve, EulerSurface, ThresholdGrid};
use crate::parallel::scan_partitioned;

pub const DEFAULT_LEVELS: u32 = 256;

#[derive(Debug, Error)]
pub enum CubicalError {
    #[error("images must be 2D or 3D with positive extents, got {0:?}")]
    InvalidDims(Vec<usize>),
    #[error("intensity array has {got} entries but dims {dims:?} need {expected}")]
    DataLength {
        dims: Vec<usize>,
        expected: usize,
        got: usize,
    },
    #[error("intensity {value} is outside 0..{levels}")]
    IntensityOutOfRange { value: u32, levels: u32 },
    #[error("levels must be in 1..=65536, got {0}")]
    InvalidLevels(u32),
    #[error("image dims differ: {0:?} vs {1:?}")]
    DimsMismatch(Vec<usize>, Vec<usize>),
    #[error("images use different intensity depths: {0} vs {1}")]
    LevelsMismatch(u32, u32),
    #[error("change tables exist for dimension 2 and 3 only, got {0}")]
    UnsupportedDimension(usize),
    #[error("cell {0:?} lies outside the complex")]
    CellOutOfBounds(Vec<usize>),
    #[error("neighborhood mask has {got} bits, expected {expected}")]
    MaskLength { expected: usize, got: usize },
    #[error("operation needs a 2D image")]
    Not2d,
    #[error("unknown derived image kind {0:?}")]
    UnknownDerivedKind(String),
    #[error("change table cache: {0}")]
    Cache(#[from] io::Error),
}

/// Dense integer raster with intensities in `0..levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    dims: Vec<usize>,
    levels: u32,
    data: Vec<u32>,
}

impl GrayImage {
    pub fn new(dims: Vec<usize>, levels: u32, data: Vec<u32>) -> Result<Self, CubicalError> {
        if !(2..=3).contains(&dims.len()) || dims.contains(&0) {
            return Err(CubicalError::InvalidDims(dims));
        }
        if levels == 0 || levels > 65536 {
            return Err(CubicalError::InvalidLevels(levels));
        }
        let expected: usize = dims.iter().product();
        if data.len() != expected {
            return Err(CubicalError::DataLength {
                dims,
                expected,
                got: data.len(),
            });
        }
        if let Some(&value) = data.iter().find(|&&v| v >= levels) {
            return Err(CubicalError::IntensityOutOfRange { value, levels });
        }
        Ok(Self { dims, levels, data })
    }

    pub fn from_rows(rows: &[Vec<u32>], levels: u32) -> Result<Self, CubicalError> {
        let n2 = rows.first().map_or(0, Vec::len);
        let data: Vec<u32> = rows.iter().flatten().copied().collect();
        Self::new(vec![rows.len(), n2], levels, data)
    }

    pub fn constant(dims: Vec<usize>, levels: u32, value: u32) -> Result<Self, CubicalError> {
        let n = dims.iter().product();
        Self::new(dims, levels, vec![value; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, index: &[usize]) -> u32 {
        self.data[self.linear(index)]
    }

    fn linear(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }
}

/// Pixel-intensity value of any cell: the top cell's own intensity, or the
/// minimum over the top cells containing it.
pub fn cell_value(image: &GrayImage, cell: &[usize]) -> Result<u32, CubicalError> {
    if cell.len() != image.ndim()
        || cell.iter().zip(image.dims()).any(|(&c, &n)| c > 2 * n)
    {
        return Err(CubicalError::CellOutOfBounds(cell.to_vec()));
    }
    let mut best = u32::MAX;
    for_each_containing_top(cell, image.dims(), |top| {
        best = best.min(image.data[top]);
        true
    });
    Ok(best)
}

/// Calls `f` with the linear index of every top cell containing the cell at
/// doubled coordinates `cell`; stops early when `f` returns false.
fn for_each_containing_top(cell: &[usize], dims: &[usize], mut f: impl FnMut(usize) -> bool) {
    let d = dims.len();
    let mut lo = [0usize; 3];
    let mut count = [0usize; 3];
    for a in 0..d {
        let c = cell[a];
        if c % 2 == 1 {
            lo[a] = c / 2;
            count[a] = 1;
        } else {
            let first = if c == 0 { 0 } else { c / 2 - 1 };
            let last = (c / 2).min(dims[a] - 1);
            lo[a] = first;
            count[a] = last + 1 - first;
        }
    }
    let total: usize = count[..d].iter().product();
    for k in 0..total {
        let mut rem = k;
        let mut linear = 0;
        let mut stride = total;
        for a in 0..d {
            stride /= count[a];
            let off = rem / stride;
            rem %= stride;
            linear = linear * dims[a] + lo[a] + off;
        }
        if !f(linear) {
            return;
        }
    }
}

/// Number of neighbors of a top cell in dimension `dim`.
pub fn neighbor_count(dim: usize) -> usize {
    3usize.pow(dim as u32) - 1
}

/// Converts neighbor-presence bits (first neighbor most significant) to the
/// table index.
pub fn neighborhood_index(bits: &[bool]) -> Result<u32, CubicalError> {
    if bits.len() != 8 && bits.len() != 26 {
        return Err(CubicalError::MaskLength {
            expected: if bits.len() < 17 { 8 } else { 26 },
            got: bits.len(),
        });
    }
    Ok(bits
        .iter()
        .fold(0u32, |acc, &b| (acc << 1) | u32::from(b)))
}

/// Offsets in `{-1,0,1}^dim` of the neighbors, in scan order, center omitted.
pub fn neighbor_offsets(dim: usize) -> Vec<Vec<i32>> {
    let total = 3usize.pow(dim as u32);
    (0..total)
        .map(|k| {
            let mut rem = k;
            let mut off = vec![0i32; dim];
            for a in (0..dim).rev() {
                off[a] = (rem % 3) as i32 - 1;
                rem /= 3;
            }
            off
        })
        .filter(|off| off.iter().any(|&o| o != 0))
        .collect()
}

/// For each face of the center cube: the set of neighbors sharing it (as a
/// bitmask in index order) and the sign `(-1)^dim` of the face.
///
/// A face is described by `e` in `{-1,0,1}^dim`; axes with `e_a = 0` are
/// spanned by the face. A neighbor with offset `o` contains the face iff
/// `o_a = 0` on spanned axes and `o_a` is `0` or `e_a` elsewhere.
fn face_masks(dim: usize) -> Vec<(u32, i8)> {
    let offsets = neighbor_offsets(dim);
    let n = offsets.len();
    let total = 3usize.pow(dim as u32);
    (0..total)
        .map(|k| {
            let mut rem = k;
            let mut e = vec![0i32; dim];
            for a in (0..dim).rev() {
                e[a] = (rem % 3) as i32 - 1;
                rem /= 3;
            }
            let mut mask = 0u32;
            for (idx, o) in offsets.iter().enumerate() {
                let shares = o
                    .iter()
                    .zip(&e)
                    .all(|(&oa, &ea)| oa == 0 || oa == ea);
                if shares {
                    mask |= 1 << (n - 1 - idx);
                }
            }
            let face_dim = e.iter().filter(|&&ea| ea == 0).count();
            (mask, if face_dim % 2 == 0 { 1 } else { -1 })
        })
        .collect()
}

/// Direct evaluation of Euler characteristic changes from face coverage.
#[derive(Debug, Clone)]
pub struct LocalChange {
    dim: usize,
    faces: Vec<(u32, i8)>,
}

impl LocalChange {
    pub fn new(dim: usize) -> Result<Self, CubicalError> {
        if !(2..=3).contains(&dim) {
            return Err(CubicalError::UnsupportedDimension(dim));
        }
        Ok(Self {
            dim,
            faces: face_masks(dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Change in χ from inserting the center top cell and all of its faces
    /// that no present neighbor already contributes.
    #[inline]
    pub fn change(&self, mask: u32) -> i8 {
        self.faces
            .iter()
            .map(|&(m, sign)| if mask & m == 0 { sign } else { 0 })
            .sum()
    }
}

const TABLE_MAGIC: &[u8; 8] = b"EULERCT\0";
const TABLE_FORMAT_VERSION: u32 = 1;

/// Precomputed χ change for every neighborhood configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeTable {
    dim: usize,
    entries: Vec<i8>,
}

impl ChangeTable {
    /// Builds all `2^(3^dim - 1)` entries. For `dim = 3` this is 64 MiB.
    pub fn precompute(dim: usize) -> Result<Self, CubicalError> {
        let local = LocalChange::new(dim)?;
        let size = 1usize << neighbor_count(dim);
        let mut entries = vec![0i8; size];
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let chunk = size.div_ceil(workers).max(1);
        std::thread::scope(|scope| {
            for (c, part) in entries.chunks_mut(chunk).enumerate() {
                let local = &local;
                scope.spawn(move || {
                    let base = c * chunk;
                    for (i, e) in part.iter_mut().enumerate() {
                        *e = local.change((base + i) as u32);
                    }
                });
            }
        });
        Ok(Self { dim, entries })
    }

    /// The 2D table, built once per process.
    pub fn planar() -> &'static ChangeTable {
        static TABLE: OnceLock<ChangeTable> = OnceLock::new();
        TABLE.get_or_init(|| ChangeTable::precompute(2).expect("dim 2 is supported"))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, index: u32) -> i8 {
        self.entries[index as usize]
    }

    fn checksum(entries: &[i8]) -> [u8; 32] {
        let bytes: Vec<u8> = entries.iter().map(|&e| e as u8).collect();
        let digest = Sha256::digest(&bytes);
        let mut out = [0u8; 32];
        out.copy_from_slice(&digest);
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), CubicalError> {
        let mut file = io::BufWriter::new(fs::File::create(path)?);
        file.write_all(TABLE_MAGIC)?;
        file.write_all(&TABLE_FORMAT_VERSION.to_le_bytes())?;
        file.write_all(&(self.dim as u32).to_le_bytes())?;
        file.write_all(&Self::checksum(&self.entries))?;
        let bytes: Vec<u8> = self.entries.iter().map(|&e| e as u8).collect();
        file.write_all(&bytes)?;
        file.flush()?;
        Ok(())
    }

    /// Reads a cached table; `Ok(None)` when the file is stale, from a
    /// different format version, or fails its checksum.
    pub fn load(path: &Path, dim: usize) -> Result<Option<Self>, CubicalError> {
        let mut raw = Vec::new();
        fs::File::open(path)?.read_to_end(&mut raw)?;
        let header = 8 + 4 + 4 + 32;
        let size = 1usize << neighbor_count(dim);
        if raw.len() != header + size || &raw[..8] != TABLE_MAGIC {
            return Ok(None);
        }
        let version = u32::from_le_bytes(raw[8..12].try_into().expect("4 bytes"));
        let stored_dim = u32::from_le_bytes(raw[12..16].try_into().expect("4 bytes"));
        if version != TABLE_FORMAT_VERSION || stored_dim as usize != dim {
            return Ok(None);
        }
        let entries: Vec<i8> = raw[header..].iter().map(|&b| b as i8).collect();
        if Self::checksum(&entries)[..] != raw[16..48] {
            return Ok(None);
        }
        Ok(Some(Self { dim, entries }))
    }

    /// Loads the cached table at `path`, rebuilding and rewriting it when
    /// missing or invalid.
    pub fn load_or_build(path: &Path, dim: usize) -> Result<Self, CubicalError> {
        if path.exists() {
            if let Some(table) = Self::load(path, dim)? {
                return Ok(table);
            }
        }
        let table = Self::precompute(dim)?;
        table.save(path)?;
        Ok(table)
    }
}

/// How 3D neighborhood changes are evaluated. 2D always uses the 256-entry
/// table.
#[derive(Debug, Clone, Default)]
pub enum ChangeMode {
    #[default]
    Direct,
    Eager(Arc<ChangeTable>),
}

#[derive(Debug, Clone, Default)]
pub struct EngineOptions {
    /// Worker threads for the top-cell scan; 0 and 1 both mean sequential.
    pub threads: usize,
    pub mode_3d: ChangeMode,
}

impl EngineOptions {
    pub fn with_threads(threads: usize) -> Self {
        Self {
            threads,
            ..Self::default()
        }
    }
}

enum Changes<'a> {
    Table(&'a ChangeTable),
    Direct(LocalChange),
}

impl Changes<'_> {
    fn for_dim(dim: usize, options: &EngineOptions) -> Result<Changes<'_>, CubicalError> {
        match dim {
            2 => Ok(Changes::Table(ChangeTable::planar())),
            3 => match &options.mode_3d {
                ChangeMode::Eager(table) if table.dim() == 3 => Ok(Changes::Table(table)),
                ChangeMode::Eager(table) => Err(CubicalError::UnsupportedDimension(table.dim())),
                ChangeMode::Direct => Ok(Changes::Direct(LocalChange::new(3)?)),
            },
            d => Err(CubicalError::UnsupportedDimension(d)),
        }
    }

    #[inline]
    fn get(&self, mask: u32) -> i64 {
        match self {
            Changes::Table(t) => i64::from(t.get(mask)),
            Changes::Direct(l) => i64::from(l.change(mask)),
        }
    }
}

/// An image padded by a one-cell outer layer holding `fill`, with linear
/// offsets of the neighborhood stencil.
struct Padded {
    values: Vec<u32>,
    offsets: Vec<isize>,
    /// padded index of every image top cell, in image scan order
    positions: Vec<usize>,
}

impl Padded {
    fn new(image: &GrayImage, fill: u32) -> Self {
        let dims = image.dims();
        let pdims: Vec<usize> = dims.iter().map(|&n| n + 2).collect();
        let mut strides = vec![1usize; pdims.len()];
        for a in (0..pdims.len() - 1).rev() {
            strides[a] = strides[a + 1] * pdims[a + 1];
        }
        let mut values = vec![fill; pdims.iter().product()];
        let mut positions = Vec::with_capacity(image.len());
        let mut index = vec![0usize; dims.len()];
        for &v in image.data() {
            let q: usize = index
                .iter()
                .zip(&strides)
                .map(|(&i, &st)| (i + 1) * st)
                .sum();
            values[q] = v;
            positions.push(q);
            for a in (0..dims.len()).rev() {
                index[a] += 1;
                if index[a] < dims[a] {
                    break;
                }
                index[a] = 0;
            }
        }
        let offsets = neighbor_offsets(dims.len())
            .iter()
            .map(|o| {
                o.iter()
                    .zip(&strides)
                    .map(|(&oa, &st)| oa as isize * st as isize)
                    .sum()
            })
            .collect();
        Self {
            values,
            offsets,
            positions,
        }
    }
}

fn check_pair(image1: &GrayImage, image2: &GrayImage) -> Result<(), CubicalError> {
    if image1.dims() != image2.dims() {
        return Err(CubicalError::DimsMismatch(
            image1.dims().to_vec(),
            image2.dims().to_vec(),
        ));
    }
    if image1.levels() != image2.levels() {
        return Err(CubicalError::LevelsMismatch(image1.levels(), image2.levels()));
    }
    Ok(())
}

/// Presence mask of the neighbors that precede the center in the
/// filtration order: value below `a`, or equal to `a` and earlier in scan
/// order.
#[inline]
fn lower_star_mask(values: &[u32], q: usize, offsets: &[isize], a: u32) -> u32 {
    let n = offsets.len();
    let half = n / 2;
    let mut mask = 0u32;
    for (k, &off) in offsets.iter().enumerate() {
        let v = values[(q as isize + off) as usize];
        let present = if k < half { v <= a } else { v < a };
        mask |= u32::from(present) << (n - 1 - k);
    }
    mask
}

/// Euler characteristic curve of the pixel-intensity filtration over
/// thresholds `0..levels`.
pub fn ecc_image(image: &GrayImage, options: &EngineOptions) -> Result<EulerCurve, CubicalError> {
    let changes = Changes::for_dim(image.ndim(), options)?;
    let levels = image.levels() as usize;
    let padded = Padded::new(image, image.levels());
    let delta = scan_partitioned(padded.positions.len(), options.threads, levels, |range, delta| {
        for &q in &padded.positions[range] {
            let a = padded.values[q];
            let mask = lower_star_mask(&padded.values, q, &padded.offsets, a);
            delta[a as usize] += changes.get(mask);
        }
    });
    let chi = delta
        .iter()
        .scan(0i64, |acc, &d| {
            *acc += d;
            Some(*acc)
        })
        .collect();
    Ok(EulerCurve {
        grid: ThresholdGrid::integer_levels(levels),
        chi,
    })
}

/// Euler characteristic surface of the bifiltration by the intensities of
/// two images over thresholds `0..levels` in both parameters.
///
/// One pass over the top cells: each cell adds its χ change to row
/// `h1(cell)` over runs of columns where its neighborhood is constant, and a
/// final cumulative sum down the columns turns row increments into values.
pub fn ecs_image_pair(
    image1: &GrayImage,
    image2: &GrayImage,
    options: &EngineOptions,
) -> Result<EulerSurface, CubicalError> {
    check_pair(image1, image2)?;
    let changes = Changes::for_dim(image1.ndim(), options)?;
    let levels = image1.levels();
    let cols = levels as usize;
    // padding maps to (m1 + 1, m2 + 1), outside every reported threshold
    let first = Padded::new(image1, levels);
    let second = Padded::new(image2, levels);
    let offsets = &first.offsets;
    let n = offsets.len();

    let delta = scan_partitioned(first.positions.len(), options.threads, cols * cols, |range, delta| {
        let mut thresholds: Vec<u32> = Vec::with_capacity(n + 1);
        let mut neigh2 = [0u32; 26];
        for &q in &first.positions[range] {
            let a = first.values[q];
            let b = second.values[q];
            let lower = lower_star_mask(&first.values, q, offsets, a);

            thresholds.clear();
            for (k, &off) in offsets.iter().enumerate() {
                let v = second.values[(q as isize + off) as usize];
                neigh2[k] = v;
                if v > b {
                    thresholds.push(v);
                }
            }
            thresholds.push(levels);
            thresholds.sort_unstable();
            thresholds.dedup();

            let row = &mut delta[a as usize * cols..(a as usize + 1) * cols];
            let mut start = b;
            for &end in thresholds.iter() {
                let mut present2 = 0u32;
                for (k, &v) in neigh2[..n].iter().enumerate() {
                    present2 |= u32::from(v <= start) << (n - 1 - k);
                }
                let change = changes.get(lower & present2);
                for entry in &mut row[start as usize..end as usize] {
                    *entry += change;
                }
                start = end;
            }
        }
    });

    let grid = ThresholdGrid::integer_levels(cols);
    let chi = Array2::from_shape_vec((cols, cols), delta).expect("square delta buffer");
    Ok(EulerSurface {
        grid1: grid.clone(),
        grid2: grid,
        chi,
    }
    .cumulative_columns())
}

/// Cubical complex of an image pair with a cell present at `(s, t)` exactly
/// when some top cell containing it has `h1 <= s` and `h2 <= t`.
///
/// Each marginal is the min-over-containing-top-cells filtration of
/// [`cell_value`]. Used as the recount oracle for [`ecs_image_pair`].
#[derive(Debug, Clone)]
pub struct CubicalBifiltration {
    image1: GrayImage,
    image2: GrayImage,
    extents: Vec<usize>,
}

impl CubicalBifiltration {
    pub fn new(image1: GrayImage, image2: GrayImage) -> Result<Self, CubicalError> {
        check_pair(&image1, &image2)?;
        let extents = image1.dims().iter().map(|&n| 2 * n + 1).collect();
        Ok(Self {
            image1,
            image2,
            extents,
        })
    }

    pub fn grid(&self) -> ThresholdGrid {
        ThresholdGrid::integer_levels(self.image1.levels() as usize)
    }

    /// Doubled coordinates of cell number `cell`.
    pub fn coords(&self, cell: usize) -> Vec<usize> {
        let mut rem = cell;
        let mut coords = vec![0; self.extents.len()];
        for a in (0..self.extents.len()).rev() {
            coords[a] = rem % self.extents[a];
            rem /= self.extents[a];
        }
        coords
    }

    /// `(h1, h2)` of a cell, each by the min rule.
    pub fn cell_values(&self, cell: usize) -> (u32, u32) {
        let coords = self.coords(cell);
        (
            cell_value(&self.image1, &coords).expect("cell in range"),
            cell_value(&self.image2, &coords).expect("cell in range"),
        )
    }
}

impl Bifiltration for CubicalBifiltration {
    fn num_cells(&self) -> usize {
        self.extents.iter().product()
    }

    fn cell_dim(&self, cell: usize) -> usize {
        self.coords(cell).iter().filter(|&&c| c % 2 == 1).count()
    }

    fn contains(&self, cell: usize, s: f64, t: f64) -> bool {
        let coords = self.coords(cell);
        let mut found = false;
        for_each_containing_top(&coords, self.image1.dims(), |top| {
            found = f64::from(self.image1.data[top]) <= s && f64::from(self.image2.data[top]) <= t;
            !found
        });
        found
    }
}

/// Second-image constructions derived from a 2D image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivedKind {
    Laplacian,
    TopDownGradient,
    Complement,
    RadialGradient,
}

impl FromStr for DerivedKind {
    type Err = CubicalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "laplacian" => Ok(Self::Laplacian),
            "gradient" | "top_down_gradient" | "top-down-gradient" => Ok(Self::TopDownGradient),
            "complement" => Ok(Self::Complement),
            "radial" | "radial_gradient" | "radial-gradient" => Ok(Self::RadialGradient),
            other => Err(CubicalError::UnknownDerivedKind(other.to_string())),
        }
    }
}

pub fn derived_image(image: &GrayImage, kind: DerivedKind) -> Result<GrayImage, CubicalError> {
    if image.ndim() != 2 {
        return Err(CubicalError::Not2d);
    }
    let (n1, n2) = (image.dims()[0], image.dims()[1]);
    let top = i64::from(image.levels() - 1);
    let at = |i: isize, j: isize| -> i64 {
        if i < 0 || j < 0 || i >= n1 as isize || j >= n2 as isize {
            0
        } else {
            i64::from(image.data[i as usize * n2 + j as usize])
        }
    };
    let mut data = Vec::with_capacity(image.len());
    let ci = (n1 as f64 - 1.0) / 2.0;
    let cj = (n2 as f64 - 1.0) / 2.0;
    let max_dist = (ci * ci + cj * cj).sqrt();
    for i in 0..n1 {
        for j in 0..n2 {
            let v = match kind {
                DerivedKind::Laplacian => {
                    let (ii, jj) = (i as isize, j as isize);
                    let lap = 4 * at(ii, jj)
                        - at(ii - 1, jj)
                        - at(ii + 1, jj)
                        - at(ii, jj - 1)
                        - at(ii, jj + 1);
                    lap.clamp(0, top)
                }
                DerivedKind::TopDownGradient => top * i as i64 / n1 as i64,
                DerivedKind::Complement => top - at(i as isize, j as isize),
                DerivedKind::RadialGradient => {
                    if max_dist == 0.0 {
                        0
                    } else {
                        let di = i as f64 - ci;
                        let dj = j as f64 - cj;
                        let r = (di * di + dj * dj).sqrt() / max_dist;
                        ((top as f64 * r).floor() as i64).clamp(0, top)
                    }
                }
            };
            data.push(v as u32);
        }
    }
    GrayImage::new(image.dims().to_vec(), image.levels(), data)
}
