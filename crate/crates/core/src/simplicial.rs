//! Simplicial complexes on point clouds (Delaunay, Vietoris-Rips), their
//! filtering functions, and the binary-search surface algorithm.

use std::collections::HashMap;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust::{incircle, orient2d, Coord};
use thiserror::Error;

use crate::complex::{
    Bifiltration, BifilteredComplex, ComplexError, EulerCurve, EulerSurface, Parameter,
    ThresholdGrid,
};
use crate::parallel::scan_partitioned;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimplicialError {
    #[error("points must have dimension 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("k = {k} must be below the number of points {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be at least 1")]
    KZero,
    #[error("direction has norm {0}, expected 1")]
    NonUnitDirection(f64),
    #[error("direction has {got} components but points have {expected}")]
    DirectionDimension { expected: usize, got: usize },
    #[error("Vietoris-Rips expansion supports max_dim <= 3, got {0}")]
    MaxDim(usize),
    #[error("simplex {0:?} is missing its face {1:?}")]
    NotClosed(Vec<usize>, Vec<usize>),
    #[error("simplex {0:?} has repeated or unsorted vertices")]
    BadSimplex(Vec<usize>),
    #[error("{what} has {got} values for {expected} simplices")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Finite, pairwise distinct points in the plane or in space.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self, SimplicialError> {
        if !(2..=3).contains(&dim) {
            return Err(SimplicialError::BadDimension(dim));
        }
        assert_eq!(coords.len() % dim, 0, "coordinate count must be a multiple of dim");
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(SimplicialError::NonFinite(i / dim));
        }
        let cloud = Self { dim, coords };
        let mut order: Vec<usize> = (0..cloud.len()).collect();
        order.sort_by(|&a, &b| lex_cmp(cloud.point(a), cloud.point(b)));
        for w in order.windows(2) {
            if cloud.point(w[0]) == cloud.point(w[1]) {
                let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(SimplicialError::DuplicatePoint(a, b));
            }
        }
        Ok(cloud)
    }

    pub fn from_points<const D: usize>(points: &[[f64; D]]) -> Result<Self, SimplicialError> {
        Self::new(D, points.iter().flatten().copied().collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn xy(&self, i: usize) -> Coord<f64> {
        let p = self.point(i);
        Coord { x: p[0], y: p[1] }
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Abstract simplicial complex; every simplex is a sorted vertex list and
/// all its faces are present.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    simplices: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl SimplicialComplex {
    pub fn new(simplices: Vec<Vec<usize>>) -> Result<Self, SimplicialError> {
        let mut index = HashMap::with_capacity(simplices.len());
        for (i, s) in simplices.iter().enumerate() {
            if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) || index.contains_key(s) {
                return Err(SimplicialError::BadSimplex(s.clone()));
            }
            index.insert(s.clone(), i);
        }
        let complex = Self { simplices, index };
        for s in &complex.simplices {
            if s.len() > 1 {
                for face in boundary(s) {
                    if !complex.index.contains_key(&face) {
                        return Err(SimplicialError::NotClosed(s.clone(), face));
                    }
                }
            }
        }
        Ok(complex)
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    pub fn simplex(&self, i: usize) -> &[usize] {
        &self.simplices[i]
    }

    pub fn dim(&self, i: usize) -> usize {
        self.simplices[i].len() - 1
    }

    pub fn position(&self, simplex: &[usize]) -> Option<usize> {
        self.index.get(simplex).copied()
    }

    /// Positions of the codimension-one faces of simplex `i`.
    pub fn faces(&self, i: usize) -> Vec<usize> {
        let s = &self.simplices[i];
        if s.len() == 1 {
            return Vec::new();
        }
        boundary(s).map(|f| self.index[&f]).collect()
    }

    pub fn count(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.len() == dim + 1).count()
    }

    pub fn euler_characteristic(&self) -> i64 {
        crate::complex::euler_characteristic(self.simplices.iter().map(|s| s.len() - 1))
    }

    /// Extends vertex values to every simplex by the maximum over its vertices.
    pub fn extend_by_max(&self, vertex_values: &[f64]) -> Vec<f64> {
        self.simplices
            .iter()
            .map(|s| {
                s.iter()
                    .map(|&v| vertex_values[v])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }
}

fn boundary(s: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0..s.len()).map(move |skip| {
        s.iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, &v)| v)
            .collect()
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DelaunayOptions {
    /// Perturb coordinates by at most `1e-9` times the bounding-box diagonal,
    /// with this seed, before triangulating.
    pub jitter_seed: Option<u64>,
}

/// Planar Delaunay triangulation of the convex hull of the points.
#[derive(Debug, Clone, PartialEq)]
pub struct Delaunay {
    pub complex: SimplicialComplex,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
}

impl Delaunay {
    pub fn euler_characteristic(&self) -> i64 {
        self.complex.euler_characteristic()
    }
}

fn jittered(points: &PointCloud, seed: u64) -> Result<PointCloud, SimplicialError> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for i in 0..points.len() {
        let p = points.point(i);
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let diag = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt();
    let scale = 1e-9 * if diag > 0.0 { diag } else { 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = points
        .coords()
        .iter()
        .map(|&c| c + scale * rng.random_range(-1.0..1.0))
        .collect();
    PointCloud::new(2, coords)
}

/// Builds the triangulation by a left-to-right sweep that keeps a convex
/// hull, then restores the empty-circumcircle property with edge flips.
///
/// Orientation and in-circle tests are exact, so "degenerate" means an exact
/// collinearity met on the hull or an exactly cocircular quadruple across a
/// final edge.
pub fn delaunay_2d(
    points: &PointCloud,
    options: DelaunayOptions,
) -> Result<Delaunay, SimplicialError> {
    if points.dim() != 2 {
        return Err(SimplicialError::BadDimension(points.dim()));
    }
    if points.len() < 3 {
        return Err(SimplicialError::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    let perturbed;
    let pts = match options.jitter_seed {
        Some(seed) => {
            perturbed = jittered(points, seed)?;
            &perturbed
        }
        None => points,
    };
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(pts.point(a), pts.point(b)));

    let (a, b, c) = (order[0], order[1], order[2]);
    let o = orient2d(pts.xy(a), pts.xy(b), pts.xy(c));
    if o == 0.0 {
        return Err(SimplicialError::Degenerate(format!(
            "points {a}, {b}, {c} are collinear on the hull"
        )));
    }
    let mut mesh = Mesh::default();
    let mut hull = if o > 0.0 { vec![a, b, c] } else { vec![a, c, b] };
    mesh.add([hull[0], hull[1], hull[2]]);

    for &p in &order[3..] {
        let h = hull.len();
        let mut visible = vec![false; h];
        for i in 0..h {
            let (u, w) = (hull[i], hull[(i + 1) % h]);
            let side = orient2d(pts.xy(u), pts.xy(w), pts.xy(p));
            if side == 0.0 {
                return Err(SimplicialError::Degenerate(format!(
                    "points {u}, {w}, {p} are collinear on the hull"
                )));
            }
            visible[i] = side < 0.0;
        }
        // the visible edges form one cyclic run; find where it starts
        let start = (0..h)
            .find(|&i| visible[i] && !visible[(i + h - 1) % h])
            .expect("a point right of the hull sees at least one edge");
        let mut i = start;
        let mut run = Vec::new();
        while visible[i] {
            let (u, w) = (hull[i], hull[(i + 1) % h]);
            mesh.add([w, u, p]);
            run.push(i);
            i = (i + 1) % h;
        }
        // keep the first and last vertex of the run, drop the interior ones
        let first = hull[start];
        let last = hull[i];
        let mut next = Vec::with_capacity(h + 1);
        let mut k = i;
        loop {
            next.push(hull[k]);
            if hull[k] == first {
                break;
            }
            k = (k + 1) % h;
        }
        next.push(p);
        debug_assert_eq!(next[0], last);
        hull = next;
    }

    mesh.flip_to_delaunay(pts);
    if let Some((u, w)) = mesh.cocircular_edge(pts) {
        return Err(SimplicialError::Degenerate(format!(
            "edge {u}-{w} has four cocircular points around it"
        )));
    }

    let triangles: Vec<[usize; 3]> = mesh.tris.clone();
    let mut simplices: Vec<Vec<usize>> = (0..pts.len()).map(|v| vec![v]).collect();
    let mut edges: Vec<Vec<usize>> = mesh
        .edges
        .keys()
        .filter(|&&(u, w)| u < w || !mesh.edges.contains_key(&(w, u)))
        .map(|&(u, w)| vec![u.min(w), u.max(w)])
        .collect();
    edges.sort();
    edges.dedup();
    let mut tris: Vec<Vec<usize>> = triangles
        .iter()
        .map(|t| {
            let mut s = t.to_vec();
            s.sort_unstable();
            s
        })
        .collect();
    tris.sort();
    simplices.extend(edges);
    simplices.extend(tris);
    Ok(Delaunay {
        complex: SimplicialComplex::new(simplices)?,
        triangles,
    })
}

/// Triangle soup with a directed-edge lookup.
#[derive(Default)]
struct Mesh {
    tris: Vec<[usize; 3]>,
    /// directed edge (u, w) -> triangle holding it counter-clockwise
    edges: HashMap<(usize, usize), usize>,
}

impl Mesh {
    fn add(&mut self, t: [usize; 3]) -> usize {
        let id = self.tris.len();
        self.tris.push(t);
        self.index(id);
        id
    }

    fn index(&mut self, id: usize) {
        let t = self.tris[id];
        for k in 0..3 {
            self.edges.insert((t[k], t[(k + 1) % 3]), id);
        }
    }

    fn third(&self, id: usize, u: usize, w: usize) -> usize {
        *self.tris[id]
            .iter()
            .find(|&&v| v != u && v != w)
            .expect("triangle has a third vertex")
    }

    /// Is the edge u->w (with triangle on its left) illegal: does the vertex
    /// across it lie strictly inside the left triangle's circumcircle?
    fn illegal(&self, pts: &PointCloud, u: usize, w: usize) -> Option<f64> {
        let left = *self.edges.get(&(u, w))?;
        let right = *self.edges.get(&(w, u))?;
        let c = self.third(left, u, w);
        let d = self.third(right, w, u);
        Some(incircle(pts.xy(u), pts.xy(w), pts.xy(c), pts.xy(d)))
    }

    fn flip_to_delaunay(&mut self, pts: &PointCloud) {
        let mut stack: Vec<(usize, usize)> = self.edges.keys().copied().collect();
        stack.sort_unstable();
        while let Some((a, b)) = stack.pop() {
            match self.illegal(pts, a, b) {
                Some(v) if v > 0.0 => {}
                _ => continue,
            }
            let t1 = self.edges[&(a, b)];
            let t2 = self.edges[&(b, a)];
            let c = self.third(t1, a, b);
            let d = self.third(t2, b, a);
            for (u, w) in [(a, b), (b, c), (c, a), (b, a), (a, d), (d, b)] {
                self.edges.remove(&(u, w));
            }
            self.tris[t1] = [a, d, c];
            self.tris[t2] = [d, b, c];
            self.index(t1);
            self.index(t2);
            stack.extend([(a, d), (d, b), (b, c), (c, a)]);
        }
    }

    fn cocircular_edge(&self, pts: &PointCloud) -> Option<(usize, usize)> {
        let mut keys: Vec<(usize, usize)> = self.edges.keys().copied().collect();
        keys.sort_unstable();
        keys.into_iter()
            .filter(|&(u, w)| u < w)
            .find(|&(u, w)| self.illegal(pts, u, w) == Some(0.0))
    }
}

fn circumradius(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let ab = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let bc = ((b[0] - c[0]).powi(2) + (b[1] - c[1]).powi(2)).sqrt();
    let ca = ((c[0] - a[0]).powi(2) + (c[1] - a[1]).powi(2)).sqrt();
    let area2 = ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs();
    ab * bc * ca / (2.0 * area2)
}

/// Alpha-filtration radius of every simplex of a planar Delaunay complex,
/// aligned with `delaunay.complex.simplices()`.
///
/// Vertices enter at 0, triangles at their circumradius, and an edge at half
/// its length when its diametral circle is empty (Gabriel) or otherwise at
/// the circumradius of the triangle whose opposite vertex lies inside that
/// circle.
pub fn alpha_filtration(
    points: &PointCloud,
    delaunay: &Delaunay,
) -> Result<Vec<f64>, SimplicialError> {
    let complex = &delaunay.complex;
    let mut values = vec![f64::NAN; complex.len()];
    let mut attached: Vec<Option<f64>> = vec![None; complex.len()];
    for t in &delaunay.triangles {
        let mut key = t.to_vec();
        key.sort_unstable();
        let id = complex
            .position(&key)
            .ok_or_else(|| SimplicialError::Degenerate("triangle missing from complex".into()))?;
        let r = circumradius(points.point(t[0]), points.point(t[1]), points.point(t[2]));
        values[id] = r;
        for k in 0..3 {
            let (u, w, opp) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            let (pu, pw, po) = (points.point(u), points.point(w), points.point(opp));
            // opposite vertex strictly inside the diametral circle
            let dot = (pu[0] - po[0]) * (pw[0] - po[0]) + (pu[1] - po[1]) * (pw[1] - po[1]);
            if dot < 0.0 {
                let e = complex.position(&[u.min(w), u.max(w)]).expect("edge of triangle");
                attached[e] = Some(attached[e].map_or(r, |prev| prev.min(r)));
            }
        }
    }
    for (i, s) in complex.simplices().iter().enumerate() {
        match s.len() {
            1 => values[i] = 0.0,
            2 => {
                values[i] = attached[i].unwrap_or_else(|| 0.5 * points.distance(s[0], s[1]));
            }
            _ => {}
        }
    }
    Ok(values)
}

/// Root mean squared distance from each point to its `k` nearest neighbors.
pub fn knn_density_filter(points: &PointCloud, k: usize) -> Result<Vec<f64>, SimplicialError> {
    let n = points.len();
    if k == 0 {
        return Err(SimplicialError::KZero);
    }
    if k >= n {
        return Err(SimplicialError::KTooLarge { k, n });
    }
    let mut sq = Vec::with_capacity(n - 1);
    Ok((0..n)
        .map(|v| {
            sq.clear();
            sq.extend((0..n).filter(|&u| u != v).map(|u| points.distance(v, u).powi(2)));
            sq.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
            let mut nearest = sq[..k].to_vec();
            nearest.sort_by(|a, b| a.total_cmp(b));
            (nearest.iter().sum::<f64>() / k as f64).sqrt()
        })
        .collect())
}

/// Height of each point along a unit `direction`.
pub fn height_filter(points: &PointCloud, direction: &[f64]) -> Result<Vec<f64>, SimplicialError> {
    if direction.len() != points.dim() {
        return Err(SimplicialError::DirectionDimension {
            expected: points.dim(),
            got: direction.len(),
        });
    }
    let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(SimplicialError::NonUnitDirection(norm));
    }
    Ok((0..points.len())
        .map(|i| points.point(i).iter().zip(direction).map(|(p, d)| p * d).sum())
        .collect())
}

/// Vietoris-Rips complex up to `max_dim` with simplices entering at their
/// longest edge; only simplices with value `<= max_radius` are kept.
pub fn vietoris_rips(
    points: &PointCloud,
    max_dim: usize,
    max_radius: f64,
) -> Result<(SimplicialComplex, Vec<f64>), SimplicialError> {
    if max_dim > 3 {
        return Err(SimplicialError::MaxDim(max_dim));
    }
    let n = points.len();
    let mut simplices: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut values = vec![0.0; n];
    let dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| points.distance(i, j)).collect())
        .collect();
    let mut frontier: Vec<(Vec<usize>, f64)> = (0..n).map(|v| (vec![v], 0.0)).collect();
    for _ in 0..max_dim {
        let mut next = Vec::new();
        for (s, value) in &frontier {
            let last = *s.last().expect("non-empty simplex");
            #[allow(clippy::needless_range_loop)]
            for w in last + 1..n {
                let longest = s.iter().map(|&v| dist[v][w]).fold(*value, f64::max);
                if longest <= max_radius {
                    let mut t = s.clone();
                    t.push(w);
                    next.push((t, longest));
                }
            }
        }
        for (s, v) in &next {
            simplices.push(s.clone());
            values.push(*v);
        }
        frontier = next;
    }
    Ok((SimplicialComplex::new(simplices)?, values))
}

/// How to derive a threshold grid from filtration values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridChoice {
    /// Sorted distinct values.
    Unique,
    /// `count` evenly spaced thresholds over the value range.
    Uniform { count: usize },
    /// `count` evenly spaced thresholds over a fixed range, shared across
    /// samples.
    Fixed { lo: f64, hi: f64, count: usize },
}

impl GridChoice {
    pub fn build(&self, values: &[f64]) -> Result<ThresholdGrid, ComplexError> {
        match *self {
            GridChoice::Unique => ThresholdGrid::from_unique(values.iter().copied()),
            GridChoice::Uniform { count } => {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if !lo.is_finite() {
                    return Err(ComplexError::EmptyGrid);
                }
                if lo == hi {
                    return ThresholdGrid::new(vec![hi]);
                }
                ThresholdGrid::uniform(lo, hi, count)
            }
            GridChoice::Fixed { lo, hi, count } => ThresholdGrid::uniform(lo, hi, count),
        }
    }
}

/// Simplicial complex with two monotone filtering functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialBifiltration {
    complex: SimplicialComplex,
    h1: Vec<f64>,
    h2: Vec<f64>,
}

impl SimplicialBifiltration {
    pub fn new(
        complex: SimplicialComplex,
        h1: Vec<f64>,
        h2: Vec<f64>,
    ) -> Result<Self, SimplicialError> {
        for (what, h) in [("h1", &h1), ("h2", &h2)] {
            if h.len() != complex.len() {
                return Err(SimplicialError::LengthMismatch {
                    what,
                    expected: complex.len(),
                    got: h.len(),
                });
            }
        }
        let bif = Self { complex, h1, h2 };
        bif.to_complex()?;
        Ok(bif)
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn h1(&self) -> &[f64] {
        &self.h1
    }

    pub fn h2(&self) -> &[f64] {
        &self.h2
    }

    pub fn values(&self, which: Parameter) -> &[f64] {
        match which {
            Parameter::H1 => &self.h1,
            Parameter::H2 => &self.h2,
        }
    }

    /// Same bifiltration with the two functions exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            complex: self.complex.clone(),
            h1: self.h2.clone(),
            h2: self.h1.clone(),
        }
    }

    /// Generic cell-complex view; validates monotonicity.
    pub fn to_complex(&self) -> Result<BifilteredComplex, ComplexError> {
        let dims = (0..self.complex.len()).map(|i| self.complex.dim(i)).collect();
        let values = self.h1.iter().copied().zip(self.h2.iter().copied()).collect();
        let faces = (0..self.complex.len()).map(|i| self.complex.faces(i)).collect();
        BifilteredComplex::new(dims, values, faces)
    }

    pub fn grid(&self, which: Parameter, choice: GridChoice) -> Result<ThresholdGrid, ComplexError> {
        choice.build(self.values(which))
    }
}

impl Bifiltration for SimplicialBifiltration {
    fn num_cells(&self) -> usize {
        self.complex.len()
    }

    fn cell_dim(&self, cell: usize) -> usize {
        self.complex.dim(cell)
    }

    fn contains(&self, cell: usize, s: f64, t: f64) -> bool {
        self.h1[cell] <= s && self.h2[cell] <= t
    }
}

fn sign(dim: usize) -> i64 {
    if dim.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Euler characteristic surface by locating each simplex's entry thresholds
/// with binary search and adding `(-1)^dim` to the rest of its row.
///
/// A simplex enters at the first threshold `>=` its value; simplices above
/// a grid's maximum never enter.
pub fn ecs_points(
    bif: &SimplicialBifiltration,
    grid1: &ThresholdGrid,
    grid2: &ThresholdGrid,
    threads: usize,
) -> EulerSurface {
    let rows = grid1.len();
    let cols = grid2.len();
    let delta = scan_partitioned(bif.complex.len(), threads, rows * cols, |range, delta| {
        for i in range {
            let (Some(s), Some(t)) = (grid1.first_at_least(bif.h1[i]), grid2.first_at_least(bif.h2[i]))
            else {
                continue;
            };
            let change = sign(bif.complex.dim(i));
            for entry in &mut delta[s * cols + t..(s + 1) * cols] {
                *entry += change;
            }
        }
    });
    let chi = Array2::from_shape_vec((rows, cols), delta).expect("delta buffer has grid shape");
    EulerSurface::new(grid1.clone(), grid2.clone(), chi)
        .expect("shape built from grids")
        .cumulative_columns()
}

/// Euler characteristic curve of one of the two filtering functions.
pub fn ecc_points(bif: &SimplicialBifiltration, which: Parameter, grid: &ThresholdGrid) -> EulerCurve {
    let values = bif.values(which);
    let mut delta = vec![0i64; grid.len()];
    for (i, &v) in values.iter().enumerate() {
        if let Some(s) = grid.first_at_least(v) {
            delta[s] += sign(bif.complex.dim(i));
        }
    }
    let chi = delta
        .iter()
        .scan(0i64, |acc, &d| {
            *acc += d;
            Some(*acc)
        })
        .collect();
    EulerCurve {
        grid: grid.clone(),
        chi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{brute_force_curve, brute_force_surface};

    fn cloud(points: &[[f64; 2]]) -> PointCloud {
        PointCloud::from_points(points).unwrap()
    }

    #[test]
    fn triangle_delaunay() {
        let pts = cloud(&[[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]]);
        let d = delaunay_2d(&pts, DelaunayOptions::default()).unwrap();
        assert_eq!(d.complex.count(0), 3);
        assert_eq!(d.complex.count(1), 3);
        assert_eq!(d.complex.count(2), 1);
        assert_eq!(d.euler_characteristic(), 1);
    }

    #[test]
    fn square_needs_jitter() {
        let pts = cloud(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert!(matches!(
            delaunay_2d(&pts, DelaunayOptions::default()),
            Err(SimplicialError::Degenerate(_))
        ));
        let d = delaunay_2d(&pts, DelaunayOptions { jitter_seed: Some(3) }).unwrap();
        assert_eq!(
            (d.complex.count(0), d.complex.count(1), d.complex.count(2)),
            (4, 5, 2)
        );
        assert_eq!(d.euler_characteristic(), 1);
    }

    #[test]
    fn collinear_rejected() {
        let pts = cloud(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]);
        assert!(matches!(
            delaunay_2d(&pts, DelaunayOptions::default()),
            Err(SimplicialError::Degenerate(_))
        ));
        let two = cloud(&[[0.0, 0.0], [1.0, 1.0]]);
        assert!(matches!(
            delaunay_2d(&two, DelaunayOptions::default()),
            Err(SimplicialError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn point_cloud_validation() {
        assert!(matches!(
            PointCloud::from_points(&[[0.0, 0.0], [1.0, 2.0], [0.0, 0.0]]),
            Err(SimplicialError::DuplicatePoint(0, 2))
        ));
        assert!(matches!(
            PointCloud::from_points(&[[0.0, f64::NAN]]),
            Err(SimplicialError::NonFinite(0))
        ));
    }

    #[test]
    fn equilateral_alpha_values() {
        let h = 3f64.sqrt() / 2.0;
        let pts = cloud(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]]);
        let d = delaunay_2d(&pts, DelaunayOptions::default()).unwrap();
        let alpha = alpha_filtration(&pts, &d).unwrap();
        for (i, s) in d.complex.simplices().iter().enumerate() {
            let expected = match s.len() {
                1 => 0.0,
                2 => 0.5,
                _ => 1.0 / 3f64.sqrt(),
            };
            assert!((alpha[i] - expected).abs() < 1e-12, "{s:?}: {}", alpha[i]);
        }
        let bif = SimplicialBifiltration::new(d.complex.clone(), alpha.clone(), alpha).unwrap();
        let grid = ThresholdGrid::new(vec![0.0, 0.25, 0.5, 0.55, 1.0 / 3f64.sqrt(), 1.0]).unwrap();
        let c = ecc_points(&bif, Parameter::H1, &grid);
        assert_eq!(c.chi, vec![3, 3, 0, 0, 1, 1]);
    }

    #[test]
    fn obtuse_edge_takes_circumradius() {
        let pts = cloud(&[[0.0, 0.0], [4.0, 0.0], [2.0, 0.1]]);
        let d = delaunay_2d(&pts, DelaunayOptions::default()).unwrap();
        let alpha = alpha_filtration(&pts, &d).unwrap();
        let long = d.complex.position(&[0, 1]).unwrap();
        let tri = d.complex.position(&[0, 1, 2]).unwrap();
        // half length 2 is smaller than the circumradius
        let r = circumradius(pts.point(0), pts.point(1), pts.point(2));
        assert!(r > 2.0);
        assert_eq!(alpha[long], alpha[tri]);
        assert_eq!(alpha[tri], r);
        let short = d.complex.position(&[0, 2]).unwrap();
        assert!((alpha[short] - 0.5 * pts.distance(0, 2)).abs() < 1e-15);
    }

    #[test]
    fn knn_examples() {
        let pts = cloud(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        assert_eq!(knn_density_filter(&pts, 1).unwrap(), vec![1.0, 1.0, 1.0]);
        let k2 = knn_density_filter(&pts, 2).unwrap();
        assert_eq!(k2[1], 1.0);
        assert!((k2[0] - 2.5f64.sqrt()).abs() < 1e-15);
        assert!((k2[2] - 2.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            knn_density_filter(&pts, 3),
            Err(SimplicialError::KTooLarge { k: 3, n: 3 })
        ));
        let ring = cloud(&[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [-2.0, 0.0], [0.0, -2.0]]);
        assert_eq!(knn_density_filter(&ring, 4).unwrap()[0], 2.0);
    }

    #[test]
    fn height_examples() {
        let pts = cloud(&[[3.0, 7.0], [-1.0, 2.0], [0.5, 0.5]]);
        assert_eq!(height_filter(&pts, &[1.0, 0.0]).unwrap(), vec![3.0, -1.0, 0.5]);
        assert_eq!(height_filter(&pts, &[-1.0, 0.0]).unwrap(), vec![-3.0, 1.0, -0.5]);
        assert!(matches!(
            height_filter(&pts, &[1.0, 1.0]),
            Err(SimplicialError::NonUnitDirection(_))
        ));
        let d = delaunay_2d(&pts, DelaunayOptions::default()).unwrap();
        let h = d.complex.extend_by_max(&height_filter(&pts, &[1.0, 0.0]).unwrap());
        let tri = d.complex.position(&[0, 1, 2]).unwrap();
        assert_eq!(h[tri], 3.0);
    }

    #[test]
    fn rips_examples() {
        let far = cloud(&[[0.0, 0.0], [2.0, 0.0]]);
        let (k, _) = vietoris_rips(&far, 2, 1.0).unwrap();
        assert_eq!(k.len(), 2);

        let h = 3f64.sqrt() / 2.0;
        let tri = cloud(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]]);
        let (k, v) = vietoris_rips(&tri, 2, 1.5).unwrap();
        let t = k.position(&[0, 1, 2]).unwrap();
        assert!((v[t] - 1.0).abs() < 1e-12);

        let square = cloud(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let (k, v) = vietoris_rips(&square, 1, 2.0).unwrap();
        assert_eq!(k.count(1), 6);
        assert_eq!(v[k.position(&[0, 1]).unwrap()], 1.0);
        assert_eq!(v[k.position(&[0, 2]).unwrap()], 2f64.sqrt());
        let bif = SimplicialBifiltration::new(k.clone(), v.clone(), v).unwrap();
        let grid = ThresholdGrid::new(vec![0.0, 1.0, 2f64.sqrt()]).unwrap();
        // four isolated points, a 4-cycle, then both diagonals
        assert_eq!(ecc_points(&bif, Parameter::H1, &grid).chi, vec![4, 0, -2]);
        assert!(matches!(vietoris_rips(&square, 4, 1.0), Err(SimplicialError::MaxDim(4))));
    }

    #[test]
    fn single_vertex_surface_is_indicator() {
        let k = SimplicialComplex::new(vec![vec![0]]).unwrap();
        let bif = SimplicialBifiltration::new(k, vec![1.0], vec![2.0]).unwrap();
        let g = ThresholdGrid::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let s = ecs_points(&bif, &g, &g, 1);
        for (st, &v) in s.chi.indexed_iter() {
            assert_eq!(v, i64::from(st.0 >= 1 && st.1 >= 2));
        }
        assert_eq!(s, brute_force_surface(&bif, &g, &g));
        assert_eq!(
            ecc_points(&bif, Parameter::H2, &g),
            brute_force_curve(&bif, &g, Parameter::H2)
        );
    }

    #[test]
    fn values_above_grid_never_enter() {
        let k = SimplicialComplex::new(vec![vec![0], vec![1], vec![0, 1]]).unwrap();
        let bif = SimplicialBifiltration::new(k, vec![0.0, 0.0, 9.0], vec![0.0, 0.0, 0.0]).unwrap();
        let g = ThresholdGrid::new(vec![0.0, 1.0]).unwrap();
        let s = ecs_points(&bif, &g, &g, 1);
        assert!(s.chi.iter().all(|&v| v == 2));
    }

    #[test]
    fn bifiltration_validation() {
        let k = SimplicialComplex::new(vec![vec![0], vec![1], vec![0, 1]]).unwrap();
        assert!(matches!(
            SimplicialBifiltration::new(k.clone(), vec![0.0, 2.0, 1.0], vec![0.0; 3]),
            Err(SimplicialError::Complex(ComplexError::NotMonotone { .. }))
        ));
        assert!(matches!(
            SimplicialBifiltration::new(k, vec![0.0; 2], vec![0.0; 3]),
            Err(SimplicialError::LengthMismatch { what: "h1", .. })
        ));
        assert!(matches!(
            SimplicialComplex::new(vec![vec![0], vec![0, 1]]),
            Err(SimplicialError::NotClosed(..))
        ));
    }
}
