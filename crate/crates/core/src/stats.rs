//! Ensemble statistics over Euler surfaces: means, terrains, the analytic
//! expectation for correlated random image pairs, and feature vectors.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{EulerCurve, EulerSurface, ThresholdGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("surface {0} does not share the ensemble's grids")]
    GridMismatch(usize),
    #[error("the two ensembles are defined over different grids")]
    EnsembleGridMismatch,
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityRange(f64),
    #[error("image extents and levels must be positive")]
    EmptyImage,
    #[error("region selects no cells")]
    EmptyRegion,
    #[error("stride {stride} exceeds extent {extent}")]
    StrideTooLarge { stride: usize, extent: usize },
    #[error("stride must be at least 1")]
    ZeroStride,
    #[error("feature vector has {got} components, normalization expects {expected}")]
    FeatureLength { expected: usize, got: usize },
}

/// Surfaces over bitwise identical grids.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceEnsemble {
    surfaces: Vec<EulerSurface>,
}

impl SurfaceEnsemble {
    pub fn new(surfaces: Vec<EulerSurface>) -> Result<Self, StatsError> {
        let first = surfaces.first().ok_or(StatsError::EmptyEnsemble)?;
        for (i, s) in surfaces.iter().enumerate().skip(1) {
            if !same_grids(s, first) {
                return Err(StatsError::GridMismatch(i));
            }
        }
        Ok(Self { surfaces })
    }

    pub fn surfaces(&self) -> &[EulerSurface] {
        &self.surfaces
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    pub fn grid1(&self) -> &ThresholdGrid {
        &self.surfaces[0].grid1
    }

    pub fn grid2(&self) -> &ThresholdGrid {
        &self.surfaces[0].grid2
    }
}

fn grid_bits(g: &ThresholdGrid) -> impl Iterator<Item = u64> + '_ {
    g.values().iter().map(|v| v.to_bits())
}

fn same_grid(a: &ThresholdGrid, b: &ThresholdGrid) -> bool {
    a.len() == b.len() && grid_bits(a).eq(grid_bits(b))
}

fn same_grids(a: &EulerSurface, b: &EulerSurface) -> bool {
    same_grid(&a.grid1, &b.grid1) && same_grid(&a.grid2, &b.grid2)
}

/// Pointwise mean, summed in ensemble order.
pub fn mean_surface(ens: &SurfaceEnsemble) -> Array2<f64> {
    let mut sum = Array2::<f64>::zeros(ens.surfaces[0].chi.dim());
    for s in &ens.surfaces {
        sum.zip_mut_with(&s.chi, |acc, &v| *acc += v as f64);
    }
    sum / ens.len() as f64
}

/// Pointwise population standard deviation (divides by the ensemble size).
pub fn std_surface(ens: &SurfaceEnsemble) -> Array2<f64> {
    let mean = mean_surface(ens);
    let mut sq = Array2::<f64>::zeros(mean.dim());
    for s in &ens.surfaces {
        ndarray::Zip::from(&mut sq)
            .and(&s.chi)
            .and(&mean)
            .for_each(|acc, &v, &m| *acc += (v as f64 - m).powi(2));
    }
    (sq / ens.len() as f64).mapv(f64::sqrt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerrainKind {
    Raw,
    Normalized,
}

impl TerrainKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TerrainKind::Raw => "raw",
            TerrainKind::Normalized => "normalized",
        }
    }
}

/// Pointwise difference of two ensembles. Sentinel cells (nonzero
/// difference with zero spread in both ensembles) hold 0.0 and are listed
/// in `sentinels`.
#[derive(Debug, Clone, PartialEq)]
pub struct Terrain {
    pub grid1: ThresholdGrid,
    pub grid2: ThresholdGrid,
    pub values: Array2<f64>,
    pub kind: TerrainKind,
    pub sentinels: Vec<(usize, usize)>,
}

impl Terrain {
    pub fn is_sentinel(&self, s: usize, t: usize) -> bool {
        self.sentinels.binary_search(&(s, t)).is_ok()
    }

    /// Absolute-value view.
    pub fn abs(&self) -> Self {
        Self {
            values: self.values.mapv(f64::abs),
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn check_pair(a: &SurfaceEnsemble, b: &SurfaceEnsemble) -> Result<(), StatsError> {
    if same_grids(&a.surfaces[0], &b.surfaces[0]) {
        Ok(())
    } else {
        Err(StatsError::EnsembleGridMismatch)
    }
}

pub fn terrain(a: &SurfaceEnsemble, b: &SurfaceEnsemble) -> Result<Terrain, StatsError> {
    check_pair(a, b)?;
    Ok(Terrain {
        grid1: a.grid1().clone(),
        grid2: a.grid2().clone(),
        values: mean_surface(a) - mean_surface(b),
        kind: TerrainKind::Raw,
        sentinels: Vec::new(),
    })
}

/// Terrain divided by the sum of the two pointwise standard deviations.
pub fn normalized_terrain(a: &SurfaceEnsemble, b: &SurfaceEnsemble) -> Result<Terrain, StatsError> {
    let raw = terrain(a, b)?;
    let spread = std_surface(a) + std_surface(b);
    let mut sentinels = Vec::new();
    let mut values = raw.values;
    for ((s, t), v) in values.indexed_iter_mut() {
        let sd = spread[[s, t]];
        if sd > 0.0 {
            *v /= sd;
        } else {
            if *v != 0.0 {
                sentinels.push((s, t));
            }
            *v = 0.0;
        }
    }
    Ok(Terrain {
        values,
        kind: TerrainKind::Normalized,
        sentinels,
        ..raw
    })
}

fn check_probability(p: f64) -> Result<(), StatsError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(StatsError::ProbabilityRange(p))
    }
}

/// Number of squares along one axis that touch grid line `i` of `0..=n`.
fn adjacency(i: usize, n: usize) -> u32 {
    u32::from(i > 0) + u32::from(i < n)
}

/// Expected χ of the cubical complex spanned by an `n1 x n2` array of
/// independent squares, each present with probability `prob`.
///
/// A vertex or edge is present when at least one of its `k` containing
/// squares is, so it contributes `1 - (1 - prob)^k`.
pub fn expected_chi_independent_squares(n1: usize, n2: usize, prob: f64) -> f64 {
    let present = |k: u32| 1.0 - (1.0 - prob).powi(k as i32);
    let mut vertices = 0.0;
    let mut edges = 0.0;
    for i in 0..=n1 {
        let ai = adjacency(i, n1);
        for j in 0..=n2 {
            let aj = adjacency(j, n2);
            vertices += present(ai * aj);
            if j < n2 {
                edges += present(ai);
            }
            if i < n1 {
                edges += present(aj);
            }
        }
    }
    vertices - edges + (n1 * n2) as f64 * prob
}

fn check_image(n1: usize, n2: usize, levels: u32) -> Result<(), StatsError> {
    if n1 == 0 || n2 == 0 || levels == 0 {
        Err(StatsError::EmptyImage)
    } else {
        Ok(())
    }
}

/// Probability that a square is in the sublevel set at `(s, t)` when both
/// images share a uniform intensity with probability `p` and are otherwise
/// independent uniform.
pub fn square_probability(s: u32, t: u32, p: f64, levels: u32) -> f64 {
    let u = f64::from(s + 1) / f64::from(levels);
    let w = f64::from(t + 1) / f64::from(levels);
    u.min(w) * p + u * w * (1.0 - p)
}

/// Expected surface over thresholds `0..levels` of a correlated pair of
/// uniform `n1 x n2` images.
pub fn expected_random_pair_surface(
    n1: usize,
    n2: usize,
    p: f64,
    levels: u32,
) -> Result<Array2<f64>, StatsError> {
    check_probability(p)?;
    check_image(n1, n2, levels)?;
    let l = levels as usize;
    Ok(Array2::from_shape_fn((l, l), |(s, t)| {
        expected_chi_independent_squares(n1, n2, square_probability(s as u32, t as u32, p, levels))
    }))
}

/// Expected curve over thresholds `0..levels` of a single uniform image.
pub fn expected_uniform_image_curve(
    n1: usize,
    n2: usize,
    levels: u32,
) -> Result<Vec<f64>, StatsError> {
    check_image(n1, n2, levels)?;
    Ok((0..levels)
        .map(|s| expected_chi_independent_squares(n1, n2, f64::from(s + 1) / f64::from(levels)))
        .collect())
}

/// Re-reads a surface on new grids: each new threshold takes the value at
/// the nearest grid threshold at or below it, and 0 below the grid.
pub fn resample_surface(
    surface: &EulerSurface,
    grid1: &ThresholdGrid,
    grid2: &ThresholdGrid,
) -> EulerSurface {
    let lookup = |grid: &ThresholdGrid, v: f64| grid.values().partition_point(|&a| a <= v).checked_sub(1);
    let rows: Vec<Option<usize>> = grid1.values().iter().map(|&v| lookup(&surface.grid1, v)).collect();
    let cols: Vec<Option<usize>> = grid2.values().iter().map(|&v| lookup(&surface.grid2, v)).collect();
    let chi = Array2::from_shape_fn((grid1.len(), grid2.len()), |(s, t)| match (rows[s], cols[t]) {
        (Some(r), Some(c)) => surface.chi[[r, c]],
        _ => 0,
    });
    EulerSurface::new(grid1.clone(), grid2.clone(), chi).expect("shape from grids")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Half-open index ranges of rows and columns.
    Rectangle {
        rows: std::ops::Range<usize>,
        cols: std::ops::Range<usize>,
    },
    /// Cells with `|value| >= c`.
    AtLeast(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionSummary {
    pub mean: f64,
    pub max: f64,
    pub argmax: (usize, usize),
    pub count: usize,
}

/// Summary of the terrain over a region; sentinel cells are never selected.
pub fn region_aggregate(terrain: &Terrain, region: &Region) -> Result<RegionSummary, StatsError> {
    let selected = |s: usize, t: usize, v: f64| match region {
        Region::Rectangle { rows, cols } => rows.contains(&s) && cols.contains(&t),
        Region::AtLeast(c) => v.abs() >= *c,
    };
    let mut sum = 0.0;
    let mut count = 0;
    let mut best: Option<(f64, (usize, usize))> = None;
    for ((s, t), &v) in terrain.values.indexed_iter() {
        if !selected(s, t, v) || terrain.is_sentinel(s, t) {
            continue;
        }
        sum += v;
        count += 1;
        if best.is_none_or(|(m, _)| v > m) {
            best = Some((v, (s, t)));
        }
    }
    let (max, argmax) = best.ok_or(StatsError::EmptyRegion)?;
    Ok(RegionSummary {
        mean: sum / count as f64,
        max,
        argmax,
        count,
    })
}

/// A curve or surface to be turned into a feature vector.
#[derive(Debug, Clone, Copy)]
pub enum Featurizable<'a> {
    Curve(&'a EulerCurve),
    Surface(&'a EulerSurface),
}

fn check_stride(stride: usize, extent: usize) -> Result<(), StatsError> {
    if stride == 0 {
        Err(StatsError::ZeroStride)
    } else if stride > extent {
        Err(StatsError::StrideTooLarge { stride, extent })
    } else {
        Ok(())
    }
}

/// Keeps every `stride`-th entry starting at 0; for surfaces every
/// `stride`-th row and column, rows concatenated.
pub fn subsample(obj: Featurizable<'_>, stride: usize) -> Result<Vec<f64>, StatsError> {
    match obj {
        Featurizable::Curve(c) => {
            check_stride(stride, c.chi.len())?;
            Ok(c.chi.iter().step_by(stride).map(|&v| v as f64).collect())
        }
        Featurizable::Surface(s) => {
            let (rows, cols) = s.chi.dim();
            check_stride(stride, rows)?;
            check_stride(stride, cols)?;
            Ok(s.chi
                .outer_iter()
                .step_by(stride)
                .flat_map(|row| row.iter().step_by(stride).map(|&v| v as f64).collect::<Vec<_>>())
                .collect())
        }
    }
}

/// Per-component z-score parameters fitted over an ensemble of feature
/// vectors (population sd).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScore {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl ZScore {
    pub fn fit(vectors: &[Vec<f64>]) -> Result<Self, StatsError> {
        let first = vectors.first().ok_or(StatsError::EmptyEnsemble)?;
        let dim = first.len();
        for v in vectors {
            if v.len() != dim {
                return Err(StatsError::FeatureLength {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        let n = vectors.len() as f64;
        let mean: Vec<f64> = (0..dim)
            .map(|j| vectors.iter().map(|v| v[j]).sum::<f64>() / n)
            .collect();
        let sd = (0..dim)
            .map(|j| {
                (vectors.iter().map(|v| (v[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt()
            })
            .collect();
        Ok(Self { mean, sd })
    }

    /// Identity transform for vectors of length `dim`.
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            sd: vec![1.0; dim],
        }
    }

    /// Components with zero spread map to 0.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, StatsError> {
        if v.len() != self.mean.len() {
            return Err(StatsError::FeatureLength {
                expected: self.mean.len(),
                got: v.len(),
            });
        }
        Ok(v.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(&x, (&m, &sd))| if sd > 0.0 { (x - m) / sd } else { 0.0 })
            .collect())
    }
}

/// Subsampled and, if given, z-normalized feature vector.
pub fn featurize(
    obj: Featurizable<'_>,
    stride: usize,
    normalize: Option<&ZScore>,
) -> Result<Vec<f64>, StatsError> {
    let raw = subsample(obj, stride)?;
    match normalize {
        Some(z) => z.apply(&raw),
        None => Ok(raw),
    }
}

/// Kendall's tau-b in `O(n log n)`: sort by the first coordinate, then count
/// inversions of the second with a merge sort.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "paired samples");
    let n = x.len();
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let tied_pairs = |runs: &mut dyn Iterator<Item = usize>| -> u64 {
        runs.map(|r| (r as u64) * (r as u64 - 1) / 2).sum()
    };
    let runs_by = |eq: &dyn Fn(usize) -> bool| {
        let mut runs = Vec::new();
        let mut len = 1;
        for i in 1..n {
            if eq(i) {
                len += 1;
            } else {
                runs.push(len);
                len = 1;
            }
        }
        if n > 0 {
            runs.push(len);
        }
        runs
    };
    let total = (n as u64) * (n as u64).saturating_sub(1) / 2;
    let ties_x = tied_pairs(&mut runs_by(&|i| pairs[i].0 == pairs[i - 1].0).into_iter());
    let ties_xy = tied_pairs(&mut runs_by(&|i| pairs[i] == pairs[i - 1]).into_iter());

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);
    let ties_y = tied_pairs(&mut runs_by(&|i| ys[i] == ys[i - 1]).into_iter());

    let concordant_minus_discordant =
        total as f64 - ties_x as f64 - ties_y as f64 + ties_xy as f64 - 2.0 * swaps as f64;
    let denom = ((total - ties_x) as f64 * (total - ties_y) as f64).sqrt();
    concordant_minus_discordant / denom
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn surface(chi: Array2<i64>) -> EulerSurface {
        let (r, c) = chi.dim();
        EulerSurface::new(
            ThresholdGrid::integer_levels(r),
            ThresholdGrid::integer_levels(c),
            chi,
        )
        .unwrap()
    }

    fn ens(list: Vec<Array2<i64>>) -> SurfaceEnsemble {
        SurfaceEnsemble::new(list.into_iter().map(surface).collect()).unwrap()
    }

    #[test]
    fn mean_and_sd_examples() {
        let s = array![[1, -2], [3, 0]];
        assert_eq!(mean_surface(&ens(vec![s.clone()])), s.mapv(|v| v as f64));
        assert_eq!(mean_surface(&ens(vec![s.clone(), -s.clone()])), Array2::zeros((2, 2)));
        assert_eq!(mean_surface(&ens(vec![array![[1]], array![[3]]])), array![[2.0]]);
        assert_eq!(std_surface(&ens(vec![array![[0]], array![[2]]])), array![[1.0]]);
        assert_eq!(std_surface(&ens(vec![s.clone(), s.clone()])), Array2::zeros((2, 2)));
        assert_eq!(std_surface(&ens(vec![s])), Array2::zeros((2, 2)));
        assert_eq!(SurfaceEnsemble::new(vec![]), Err(StatsError::EmptyEnsemble));
    }

    #[test]
    fn grids_must_match() {
        let a = surface(array![[1, 2]]);
        let mut b = a.clone();
        b.grid2 = ThresholdGrid::new(vec![0.0, 1.5]).unwrap();
        assert_eq!(
            SurfaceEnsemble::new(vec![a.clone(), b.clone()]),
            Err(StatsError::GridMismatch(1))
        );
        let ea = SurfaceEnsemble::new(vec![a]).unwrap();
        let eb = SurfaceEnsemble::new(vec![b]).unwrap();
        assert_eq!(terrain(&ea, &eb), Err(StatsError::EnsembleGridMismatch));
    }

    #[test]
    fn terrain_examples() {
        let a = ens(vec![array![[1, 2], [3, 4]]]);
        let b = ens(vec![array![[0, 5], [3, -1]]]);
        assert_eq!(terrain(&a, &a).unwrap().values, Array2::zeros((2, 2)));
        assert_eq!(terrain(&a, &b).unwrap().values, array![[1.0, -3.0], [0.0, 5.0]]);
    }

    #[test]
    fn normalized_terrain_examples() {
        // numerator 4 with sds 1 and 3
        let a = ens(vec![array![[4]], array![[6]]]);
        let b = ens(vec![array![[-2]], array![[4]]]);
        let t = normalized_terrain(&a, &b).unwrap();
        assert_eq!(t.values, array![[1.0]]);
        assert!(t.sentinels.is_empty());

        let c = ens(vec![array![[7, 1]], array![[7, 1]]]);
        assert_eq!(normalized_terrain(&c, &c).unwrap().values, Array2::zeros((1, 2)));

        let d = ens(vec![array![[7, 2]], array![[7, 0]]]);
        let e = ens(vec![array![[5, 1]], array![[5, 1]]]);
        let t = normalized_terrain(&d, &e).unwrap();
        assert_eq!(t.sentinels, vec![(0, 0)]);
        assert!(t.is_sentinel(0, 0));
        assert_eq!(t.values[[0, 0]], 0.0);
        assert_eq!(t.values[[0, 1]], 0.0);
        assert!(t.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn expected_surface_examples() {
        let e = expected_random_pair_surface(5, 7, 0.3, 16).unwrap();
        assert!((e[[15, 15]] - 1.0).abs() < 1e-12);
        assert_eq!(expected_chi_independent_squares(5, 7, 0.0), 0.0);
        assert!(matches!(
            expected_random_pair_surface(4, 4, 1.5, 16),
            Err(StatsError::ProbabilityRange(_))
        ));
        // P endpoints
        assert_eq!(square_probability(3, 9, 0.0, 16), 4.0 / 16.0 * 10.0 / 16.0);
        assert_eq!(square_probability(3, 9, 1.0, 16), 4.0 / 16.0);
    }

    #[test]
    fn expected_chi_single_square() {
        // one square: four corners and four edges, each in exactly that square
        let p = 0.37;
        assert!((expected_chi_independent_squares(1, 1, p) - p).abs() < 1e-15);
    }

    #[test]
    fn expected_chi_by_enumeration() {
        // exact expectation over all 2^(n1*n2) square subsets
        for (n1, n2) in [(2, 2), (2, 3), (1, 4)] {
            let p: f64 = 0.41;
            let mut exact = 0.0;
            for subset in 0u32..1 << (n1 * n2) {
                let present = |i: usize, j: usize| subset >> (i * n2 + j) & 1 == 1;
                let mut chi = 0i64;
                let touches = |vi: std::ops::RangeInclusive<usize>, vj: std::ops::RangeInclusive<usize>| {
                    vi.clone().any(|i| vj.clone().any(|j| i < n1 && j < n2 && present(i, j)))
                };
                for i in 0..=n1 {
                    for j in 0..=n2 {
                        let lo_i = i.saturating_sub(1);
                        let lo_j = j.saturating_sub(1);
                        chi += i64::from(touches(lo_i..=i, lo_j..=j));
                        if j < n2 {
                            chi -= i64::from(touches(lo_i..=i, j..=j));
                        }
                        if i < n1 {
                            chi -= i64::from(touches(i..=i, lo_j..=j));
                        }
                    }
                }
                chi += (0..n1 * n2).filter(|&k| subset >> k & 1 == 1).count() as i64;
                let ones = subset.count_ones() as i32;
                exact += chi as f64 * p.powi(ones) * (1.0 - p).powi((n1 * n2) as i32 - ones);
            }
            let formula = expected_chi_independent_squares(n1, n2, p);
            assert!((exact - formula).abs() < 1e-12, "{n1}x{n2}: {exact} vs {formula}");
        }
    }

    #[test]
    fn diagonal_at_full_correlation_is_single_image_curve() {
        let e = expected_random_pair_surface(6, 4, 1.0, 12).unwrap();
        let c = expected_uniform_image_curve(6, 4, 12).unwrap();
        for s in 0..12 {
            assert_eq!(e[[s, s]], c[s]);
        }
    }

    #[test]
    fn low_and_high_correlation_share_marginals() {
        let lo = expected_random_pair_surface(32, 32, 0.1, 16).unwrap();
        let hi = expected_random_pair_surface(32, 32, 0.8, 16).unwrap();
        for k in 0..16 {
            assert!((lo[[15, k]] - hi[[15, k]]).abs() < 1e-12);
            assert!((lo[[k, 15]] - hi[[k, 15]]).abs() < 1e-12);
        }
        let diff = &hi - &lo;
        let max = diff.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let corners = [diff[[0, 15]], diff[[15, 0]], diff[[15, 15]]];
        assert!(corners.iter().all(|c| max > 5.0 * c.abs()), "max {max}, corners {corners:?}");
        // the origin and the low edges carry a real but smaller difference
        let origin = diff[[0, 0]].abs();
        assert!(origin > 0.0 && max > 2.0 * origin, "max {max}, origin {origin}");
    }

    #[test]
    fn region_examples() {
        let zero = Terrain {
            grid1: ThresholdGrid::integer_levels(3),
            grid2: ThresholdGrid::integer_levels(3),
            values: Array2::zeros((3, 3)),
            kind: TerrainKind::Raw,
            sentinels: vec![],
        };
        let full = Region::Rectangle { rows: 0..3, cols: 0..3 };
        let r = region_aggregate(&zero, &full).unwrap();
        assert_eq!((r.mean, r.max, r.count), (0.0, 0.0, 9));

        let t = Terrain {
            values: array![[0.5, -4.0, 1.0], [2.0, 3.0, 0.0], [0.0, 0.0, -1.0]],
            ..zero.clone()
        };
        let one = region_aggregate(&t, &Region::Rectangle { rows: 1..2, cols: 0..1 }).unwrap();
        assert_eq!((one.mean, one.max, one.count, one.argmax), (2.0, 2.0, 1, (1, 0)));
        let peak = region_aggregate(&t, &Region::AtLeast(t.max_abs())).unwrap();
        assert_eq!((peak.count, peak.argmax), (1, (0, 1)));
        assert_eq!(region_aggregate(&t, &Region::AtLeast(9.0)), Err(StatsError::EmptyRegion));

        let masked = Terrain {
            sentinels: vec![(1, 1)],
            ..t
        };
        let r = region_aggregate(&masked, &Region::Rectangle { rows: 1..2, cols: 1..2 });
        assert_eq!(r, Err(StatsError::EmptyRegion));
    }

    #[test]
    fn featurize_examples() {
        let curve = EulerCurve::new(ThresholdGrid::integer_levels(12), (0..12).collect()).unwrap();
        assert_eq!(
            featurize(Featurizable::Curve(&curve), 6, None).unwrap(),
            vec![0.0, 6.0]
        );
        let id = ZScore::identity(12);
        assert_eq!(
            featurize(Featurizable::Curve(&curve), 1, Some(&id)).unwrap(),
            (0..12).map(|v| v as f64).collect::<Vec<_>>()
        );
        assert_eq!(
            featurize(Featurizable::Curve(&curve), 13, None),
            Err(StatsError::StrideTooLarge { stride: 13, extent: 12 })
        );
        let s = surface(Array2::from_shape_fn((7, 13), |(i, j)| (10 * i + j) as i64));
        assert_eq!(
            featurize(Featurizable::Surface(&s), 6, None).unwrap(),
            vec![0.0, 6.0, 12.0, 60.0, 66.0, 72.0]
        );
    }

    #[test]
    fn zscore_fit_and_apply() {
        let z = ZScore::fit(&[vec![1.0, 5.0], vec![3.0, 5.0]]).unwrap();
        assert_eq!(z.mean, vec![2.0, 5.0]);
        assert_eq!(z.sd, vec![1.0, 0.0]);
        assert_eq!(z.apply(&[4.0, 9.0]).unwrap(), vec![2.0, 0.0]);
        assert!(z.apply(&[1.0]).is_err());
    }

    #[test]
    fn kendall_matches_quadratic_count() {
        let brute = |x: &[f64], y: &[f64]| {
            let n = x.len();
            let (mut num, mut tx, mut ty, mut total) = (0i64, 0i64, 0i64, 0i64);
            for i in 0..n {
                for j in i + 1..n {
                    let a = (x[i] - x[j]).signum() * (y[i] - y[j]).signum();
                    let (dx, dy) = (x[i] == x[j], y[i] == y[j]);
                    total += 1;
                    tx += i64::from(dx);
                    ty += i64::from(dy);
                    if !dx && !dy {
                        num += a as i64;
                    }
                }
            }
            num as f64 / (((total - tx) * (total - ty)) as f64).sqrt()
        };
        let x = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0];
        let y = [2.0, 7.0, 1.0, 8.0, 2.0, 8.0, 1.0, 8.0, 2.0, 8.0];
        assert!((kendall_tau(&x, &y) - brute(&x, &y)).abs() < 1e-12);
        let up: Vec<f64> = (0..20).map(f64::from).collect();
        let down: Vec<f64> = up.iter().map(|v| -v).collect();
        assert_eq!(kendall_tau(&up, &up), 1.0);
        assert_eq!(kendall_tau(&up, &down), -1.0);
    }

    #[test]
    fn resample_nearest_lower() {
        let s = surface(array![[1, 2], [3, 4]]);
        let g = ThresholdGrid::new(vec![-1.0, 0.5, 7.0]).unwrap();
        let r = resample_surface(&s, &g, &g);
        assert_eq!(r.chi, array![[0, 0, 0], [0, 1, 2], [0, 3, 4]]);
    }
}
