//! Euler characteristic curves and surfaces of one- and two-parameter
//! sublevel filtrations.
//!
//! - [`complex`]: generic bifiltered cell complexes, threshold grids, curves,
//!   surfaces and the brute-force recount used as an oracle.
//! - [`cubical`]: grayscale images in 2D and 3D, local change tables, and the
//!   single-pass image-pair surface algorithm.
//! - [`simplicial`]: Delaunay and Vietoris-Rips complexes on point clouds,
//!   their filtering functions, and the binary-search surface algorithm.
//! - [`stats`]: ensemble means, terrains, analytic expectations, features.
//! - [`synth`]: seeded synthetic images and point processes.
//! - [`io`]: file formats and heatmap rendering.

pub mod complex;
pub mod cubical;
pub mod io;
mod parallel;
pub mod simplicial;
pub mod stats;
pub mod synth;

pub use complex::{
    brute_force_curve, brute_force_surface, Bifiltration, BifilteredComplex, EulerCurve,
    EulerSurface, Parameter, ThresholdGrid,
};
pub use cubical::{ecc_image, ecs_image_pair, EngineOptions, GrayImage};
pub use simplicial::{ecc_points, ecs_points, PointCloud, SimplicialBifiltration};

/// Matrix type used by surfaces and terrains.
pub use ndarray;
