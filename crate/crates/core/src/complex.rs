//! Cell complexes carrying a pair of filtration values, exact Euler
//! characteristics, and the brute-force recount oracles the fast surface
//! algorithms are checked against.

use ndarray::{Array2, Axis};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("cell {cell} lists face {face}, which does not exist")]
    MissingFace { cell: usize, face: usize },
    #[error("cell {cell} (dim {dim}) lists face {face} of dim {face_dim}; faces must have strictly lower dimension")]
    FaceDimension {
        cell: usize,
        dim: usize,
        face: usize,
        face_dim: usize,
    },
    #[error("filtration is not monotone: face {face} has values {face_values:?} but coface {cell} has {cell_values:?}")]
    NotMonotone {
        cell: usize,
        face: usize,
        cell_values: (f64, f64),
        face_values: (f64, f64),
    },
    #[error("cell {cell} has a NaN filtration value")]
    NanValue { cell: usize },
    #[error("threshold grid must be non-empty")]
    EmptyGrid,
    #[error("threshold grid must be strictly increasing (position {0})")]
    GridNotIncreasing(usize),
    #[error("surface shape {rows}x{cols} does not match grids of length {len1} and {len2}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        len1: usize,
        len2: usize,
    },
}

/// Which of the two filtering functions a one-parameter operation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    H1,
    H2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub id: usize,
    pub dim: usize,
}

/// Alternating count `sum_i (-1)^i n_i` over the dimensions of a cell list.
pub fn euler_characteristic<I>(dims: I) -> i64
where
    I: IntoIterator<Item = usize>,
{
    dims.into_iter()
        .map(|d| if d % 2 == 0 { 1 } else { -1 })
        .sum()
}

/// Anything whose cells can be asked "are you present at `(s, t)`?".
///
/// The brute-force oracles only need this, which lets cubical complexes use
/// their own membership rule without being flattened into a
/// [`BifilteredComplex`] first.
pub trait Bifiltration {
    fn num_cells(&self) -> usize;
    fn cell_dim(&self, cell: usize) -> usize;
    fn contains(&self, cell: usize, s: f64, t: f64) -> bool;
}

/// Abstract cell complex with one `(h1, h2)` pair per cell.
///
/// Cell ids are their positions in insertion order. Construction validates
/// that every face exists, has lower dimension, and that both values are
/// monotone along the face relation.
#[derive(Debug, Clone, PartialEq)]
pub struct BifilteredComplex {
    dims: Vec<usize>,
    values: Vec<(f64, f64)>,
    faces: Vec<Vec<usize>>,
}

impl BifilteredComplex {
    pub fn new(
        dims: Vec<usize>,
        values: Vec<(f64, f64)>,
        faces: Vec<Vec<usize>>,
    ) -> Result<Self, ComplexError> {
        assert_eq!(dims.len(), values.len(), "one value pair per cell");
        assert_eq!(dims.len(), faces.len(), "one face list per cell");
        let complex = Self {
            dims,
            values,
            faces,
        };
        complex.validate()?;
        Ok(complex)
    }

    pub fn empty() -> Self {
        Self {
            dims: Vec::new(),
            values: Vec::new(),
            faces: Vec::new(),
        }
    }

    /// Checks face references and monotonicity of both filtering functions.
    pub fn validate(&self) -> Result<(), ComplexError> {
        for (cell, faces) in self.faces.iter().enumerate() {
            let (h1, h2) = self.values[cell];
            if h1.is_nan() || h2.is_nan() {
                return Err(ComplexError::NanValue { cell });
            }
            for &face in faces {
                if face >= self.dims.len() {
                    return Err(ComplexError::MissingFace { cell, face });
                }
                if self.dims[face] >= self.dims[cell] {
                    return Err(ComplexError::FaceDimension {
                        cell,
                        dim: self.dims[cell],
                        face,
                        face_dim: self.dims[face],
                    });
                }
                let (f1, f2) = self.values[face];
                if f1 > h1 || f2 > h2 {
                    return Err(ComplexError::NotMonotone {
                        cell,
                        face,
                        cell_values: (h1, h2),
                        face_values: (f1, f2),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.dims
            .iter()
            .enumerate()
            .map(|(id, &dim)| Cell { id, dim })
    }

    pub fn dim(&self, cell: usize) -> usize {
        self.dims[cell]
    }

    pub fn values(&self, cell: usize) -> (f64, f64) {
        self.values[cell]
    }

    pub fn faces(&self, cell: usize) -> &[usize] {
        &self.faces[cell]
    }

    pub fn euler_characteristic(&self) -> i64 {
        euler_characteristic(self.dims.iter().copied())
    }

    /// Ids of all cells with `h1 <= s` and `h2 <= t`, ascending.
    pub fn sublevel_complex(&self, s: f64, t: f64) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.contains(c, s, t)).collect()
    }

    /// True if every face of every listed cell is also listed.
    pub fn is_face_closed(&self, cells: &[usize]) -> bool {
        let mut present = vec![false; self.len()];
        for &c in cells {
            present[c] = true;
        }
        cells
            .iter()
            .all(|&c| self.faces[c].iter().all(|&f| present[f]))
    }
}

impl Bifiltration for BifilteredComplex {
    fn num_cells(&self) -> usize {
        self.dims.len()
    }

    fn cell_dim(&self, cell: usize) -> usize {
        self.dims[cell]
    }

    fn contains(&self, cell: usize, s: f64, t: f64) -> bool {
        let (h1, h2) = self.values[cell];
        h1 <= s && h2 <= t
    }
}

/// Strictly increasing, non-empty list of thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid(Vec<f64>);

impl ThresholdGrid {
    pub fn new(values: Vec<f64>) -> Result<Self, ComplexError> {
        if values.is_empty() {
            return Err(ComplexError::EmptyGrid);
        }
        for (i, w) in values.windows(2).enumerate() {
            // NaN fails this comparison too, so the negation is deliberate
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(w[0] < w[1]) {
                return Err(ComplexError::GridNotIncreasing(i + 1));
            }
        }
        if values[0].is_nan() {
            return Err(ComplexError::GridNotIncreasing(0));
        }
        Ok(Self(values))
    }

    /// `0, 1, ..., levels - 1`, the grid of an image with `levels` intensities.
    pub fn integer_levels(levels: usize) -> Self {
        assert!(levels > 0);
        Self((0..levels).map(|v| v as f64).collect())
    }

    /// Sorted distinct values of `values`.
    pub fn from_unique(values: impl IntoIterator<Item = f64>) -> Result<Self, ComplexError> {
        let mut v: Vec<f64> = values.into_iter().collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
        Self::new(v)
    }

    /// `count` evenly spaced thresholds from `lo` to `hi` inclusive.
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Result<Self, ComplexError> {
        if count == 0 {
            return Err(ComplexError::EmptyGrid);
        }
        if count == 1 {
            return Self::new(vec![hi]);
        }
        let step = (hi - lo) / (count - 1) as f64;
        let mut v: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
        v[count - 1] = hi;
        Self::new(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the first threshold `>= value`, or `None` if every threshold
    /// is smaller (the value never enters the filtration on this grid).
    pub fn first_at_least(&self, value: f64) -> Option<usize> {
        let idx = self.0.partition_point(|&a| a < value);
        (idx < self.0.len()).then_some(idx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerCurve {
    pub grid: ThresholdGrid,
    pub chi: Vec<i64>,
}

impl EulerCurve {
    pub fn new(grid: ThresholdGrid, chi: Vec<i64>) -> Result<Self, ComplexError> {
        if grid.len() != chi.len() {
            return Err(ComplexError::ShapeMismatch {
                rows: chi.len(),
                cols: 1,
                len1: grid.len(),
                len2: 1,
            });
        }
        Ok(Self { grid, chi })
    }

    /// Curve value at an arbitrary threshold: the entry of the last grid
    /// value `<= alpha`, or 0 below the grid.
    pub fn at(&self, alpha: f64) -> i64 {
        let idx = self.grid.values().partition_point(|&a| a <= alpha);
        if idx == 0 {
            0
        } else {
            self.chi[idx - 1]
        }
    }
}

/// Matrix of Euler characteristics; row `s` is threshold `grid1[s]`,
/// column `t` is threshold `grid2[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerSurface {
    pub grid1: ThresholdGrid,
    pub grid2: ThresholdGrid,
    pub chi: Array2<i64>,
}

impl EulerSurface {
    pub fn new(
        grid1: ThresholdGrid,
        grid2: ThresholdGrid,
        chi: Array2<i64>,
    ) -> Result<Self, ComplexError> {
        let (rows, cols) = chi.dim();
        if rows != grid1.len() || cols != grid2.len() {
            return Err(ComplexError::ShapeMismatch {
                rows,
                cols,
                len1: grid1.len(),
                len2: grid2.len(),
            });
        }
        Ok(Self { grid1, grid2, chi })
    }

    pub fn zeros(grid1: ThresholdGrid, grid2: ThresholdGrid) -> Self {
        let chi = Array2::zeros((grid1.len(), grid2.len()));
        Self { grid1, grid2, chi }
    }

    /// Turns per-row increments into absolute values by summing down each column.
    pub(crate) fn cumulative_columns(mut self) -> Self {
        self.chi.accumulate_axis_inplace(Axis(0), |&prev, cur| *cur += prev);
        self
    }

    /// The curve of `h1` on `grid1`: the last column.
    pub fn last_column(&self) -> EulerCurve {
        let col = self.chi.column(self.grid2.len() - 1).to_vec();
        EulerCurve {
            grid: self.grid1.clone(),
            chi: col,
        }
    }

    /// The curve of `h2` on `grid2`: the last row.
    pub fn last_row(&self) -> EulerCurve {
        let row = self.chi.row(self.grid1.len() - 1).to_vec();
        EulerCurve {
            grid: self.grid2.clone(),
            chi: row,
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            grid1: self.grid2.clone(),
            grid2: self.grid1.clone(),
            chi: self.chi.t().to_owned(),
        }
    }
}

/// Recounts the sublevel complex at every threshold of `grid`.
pub fn brute_force_curve<F: Bifiltration + ?Sized>(
    complex: &F,
    grid: &ThresholdGrid,
    parameter: Parameter,
) -> EulerCurve {
    let chi = grid
        .values()
        .iter()
        .map(|&a| {
            let (s, t) = match parameter {
                Parameter::H1 => (a, f64::INFINITY),
                Parameter::H2 => (f64::INFINITY, a),
            };
            euler_characteristic(
                (0..complex.num_cells())
                    .filter(|&c| complex.contains(c, s, t))
                    .map(|c| complex.cell_dim(c)),
            )
        })
        .collect();
    EulerCurve {
        grid: grid.clone(),
        chi,
    }
}

/// Recounts the sublevel complex independently at every `(s, t)`.
pub fn brute_force_surface<F: Bifiltration + ?Sized>(
    complex: &F,
    grid1: &ThresholdGrid,
    grid2: &ThresholdGrid,
) -> EulerSurface {
    let mut chi = Array2::zeros((grid1.len(), grid2.len()));
    for (s, &a) in grid1.values().iter().enumerate() {
        for (t, &b) in grid2.values().iter().enumerate() {
            chi[[s, t]] = euler_characteristic(
                (0..complex.num_cells())
                    .filter(|&c| complex.contains(c, a, b))
                    .map(|c| complex.cell_dim(c)),
            );
        }
    }
    EulerSurface {
        grid1: grid1.clone(),
        grid2: grid2.clone(),
        chi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    /// Vertex a at (0,0), vertex b at (1,0), edge ab at (1,2).
    fn three_cell() -> BifilteredComplex {
        BifilteredComplex::new(
            vec![0, 0, 1],
            vec![(0.0, 0.0), (1.0, 0.0), (1.0, 2.0)],
            vec![vec![], vec![], vec![0, 1]],
        )
        .unwrap()
    }

    fn grid(v: &[f64]) -> ThresholdGrid {
        ThresholdGrid::new(v.to_vec()).unwrap()
    }

    /// Cells of the cubical complex of an `n1 x n2` block of squares with
    /// some squares removed, as dimensions.
    fn cubical_dims(n1: usize, n2: usize, present: impl Fn(usize, usize) -> bool) -> Vec<usize> {
        let mut dims = Vec::new();
        for x in 0..=2 * n1 {
            for y in 0..=2 * n2 {
                let covered = (0..n1).any(|i| {
                    (0..n2).any(|j| {
                        present(i, j)
                            && (2 * i..=2 * i + 2).contains(&x)
                            && (2 * j..=2 * j + 2).contains(&y)
                    })
                });
                if covered {
                    dims.push(x % 2 + y % 2);
                }
            }
        }
        dims
    }

    #[test]
    fn chi_of_small_complexes() {
        assert_eq!(euler_characteristic([0]), 1);
        assert_eq!(euler_characteristic(std::iter::empty()), 0);
        let full = cubical_dims(3, 3, |_, _| true);
        assert_eq!(full.iter().filter(|&&d| d == 0).count(), 16);
        assert_eq!(full.iter().filter(|&&d| d == 1).count(), 24);
        assert_eq!(full.iter().filter(|&&d| d == 2).count(), 9);
        assert_eq!(euler_characteristic(full), 1);
        let annulus = cubical_dims(3, 3, |i, j| !(i == 1 && j == 1));
        assert_eq!(annulus.iter().filter(|&&d| d == 2).count(), 8);
        assert_eq!(euler_characteristic(annulus), 0);
    }

    #[test]
    fn sublevel_examples() {
        let k = three_cell();
        assert_eq!(k.sublevel_complex(f64::INFINITY, f64::INFINITY), vec![0, 1, 2]);
        assert!(k.sublevel_complex(-1.0, 10.0).is_empty());
        assert_eq!(k.sublevel_complex(1.0, 1.0), vec![0, 1]);
    }

    #[test]
    fn rejects_non_monotone() {
        let err = BifilteredComplex::new(
            vec![0, 0, 1],
            vec![(0.0, 0.0), (3.0, 0.0), (1.0, 2.0)],
            vec![vec![], vec![], vec![0, 1]],
        )
        .unwrap_err();
        assert!(matches!(err, ComplexError::NotMonotone { cell: 2, face: 1, .. }));
    }

    #[test]
    fn rejects_bad_faces() {
        let missing = BifilteredComplex::new(vec![1], vec![(0.0, 0.0)], vec![vec![4]]);
        assert!(matches!(missing, Err(ComplexError::MissingFace { .. })));
        let same_dim =
            BifilteredComplex::new(vec![0, 0], vec![(0.0, 0.0); 2], vec![vec![], vec![0]]);
        assert!(matches!(same_dim, Err(ComplexError::FaceDimension { .. })));
    }

    #[test]
    fn grid_validation() {
        assert_eq!(ThresholdGrid::new(vec![]), Err(ComplexError::EmptyGrid));
        assert_eq!(
            ThresholdGrid::new(vec![0.0, 1.0, 1.0]),
            Err(ComplexError::GridNotIncreasing(2))
        );
        assert!(ThresholdGrid::new(vec![f64::NAN]).is_err());
        let g = grid(&[0.0, 1.0, 2.0]);
        assert_eq!(g.first_at_least(1.0), Some(1));
        assert_eq!(g.first_at_least(0.5), Some(1));
        assert_eq!(g.first_at_least(-3.0), Some(0));
        assert_eq!(g.first_at_least(2.5), None);
        let u = ThresholdGrid::uniform(0.0, 1.0, 5).unwrap();
        assert_eq!(u.values(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn curve_examples() {
        let vertex =
            BifilteredComplex::new(vec![0], vec![(0.5, 0.5)], vec![vec![]]).unwrap();
        let c = brute_force_curve(&vertex, &grid(&[0.0, 1.0]), Parameter::H1);
        assert_eq!(c.chi, vec![0, 1]);

        let path = BifilteredComplex::new(
            vec![0, 0, 1],
            vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            vec![vec![], vec![], vec![0, 1]],
        )
        .unwrap();
        let c = brute_force_curve(&path, &grid(&[0.0, 1.0, 2.0]), Parameter::H1);
        assert_eq!(c.chi, vec![1, 2, 1]);

        let c = brute_force_curve(&BifilteredComplex::empty(), &grid(&[0.0, 5.0]), Parameter::H1);
        assert_eq!(c.chi, vec![0, 0]);
    }

    #[test]
    fn surface_examples() {
        let g = grid(&[0.0, 1.0, 2.0]);
        let s = brute_force_surface(&BifilteredComplex::empty(), &g, &g);
        assert!(s.chi.iter().all(|&v| v == 0));

        let vertex =
            BifilteredComplex::new(vec![0], vec![(1.0, 2.0)], vec![vec![]]).unwrap();
        let s = brute_force_surface(&vertex, &g, &g);
        assert_eq!(s.chi, array![[0, 0, 0], [0, 0, 1], [0, 0, 1]]);

        let s = brute_force_surface(&three_cell(), &g, &g);
        // rows: h1 <= 0 keeps only a; h1 <= 1 adds b; the edge needs h2 <= 2
        assert_eq!(s.chi, array![[1, 1, 1], [2, 2, 1], [2, 2, 1]]);
        assert_eq!(s.last_column(), brute_force_curve(&three_cell(), &g, Parameter::H1));
        assert_eq!(s.last_row(), brute_force_curve(&three_cell(), &g, Parameter::H2));
    }

    #[test]
    fn curve_lookup_between_thresholds() {
        let c = EulerCurve::new(grid(&[0.0, 1.0]), vec![3, 1]).unwrap();
        assert_eq!(c.at(-0.5), 0);
        assert_eq!(c.at(0.5), 3);
        assert_eq!(c.at(7.0), 1);
    }
}
