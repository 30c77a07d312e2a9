//! Seeded generators for correlated image pairs, Clayton copula samples and
//! planar point processes.
//!
//! Every draw for pixel, voxel or point `i` comes from its own ChaCha8
//! stream keyed by `i`, so output depends only on the parameters and seed.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use thiserror::Error;

use crate::cubical::{CubicalError, GrayImage};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("copula parameter theta = {0} must be positive and finite")]
    Theta(f64),
    #[error("intensity {0} must be positive and finite")]
    Intensity(f64),
    #[error("branching ratio {0} must lie in [0, 1)")]
    Branching(f64),
    #[error("offspring spread {0} must be positive and finite")]
    Spread(f64),
    #[error("image extent must be positive")]
    EmptyImage,
    #[error(transparent)]
    Image(#[from] CubicalError),
}

/// Stream reserved for per-sample (rather than per-index) draws.
const GLOBAL_STREAM: u64 = u64::MAX;

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn level(x: f64, levels: u32) -> u32 {
    ((x * f64::from(levels)) as u32).min(levels - 1)
}

/// Pair of `n1 x n2` images with uniform intensities in `0..levels` that
/// share a pixel's value with probability `p` and are independent otherwise.
pub fn gen_correlated_pair(
    n1: usize,
    n2: usize,
    p: f64,
    levels: u32,
    seed: u64,
) -> Result<(GrayImage, GrayImage), SynthError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SynthError::Probability(p));
    }
    if n1 == 0 || n2 == 0 {
        return Err(SynthError::EmptyImage);
    }
    let mut first = Vec::with_capacity(n1 * n2);
    let mut second = Vec::with_capacity(n1 * n2);
    for i in 0..n1 * n2 {
        let mut rng = stream(seed, i as u64);
        let x: f64 = rng.random();
        let v1 = level(rng.random(), levels);
        let v2 = level(rng.random(), levels);
        first.push(v1);
        second.push(if x <= p { v1 } else { v2 });
    }
    Ok((
        GrayImage::new(vec![n1, n2], levels, first)?,
        GrayImage::new(vec![n1, n2], levels, second)?,
    ))
}

fn check_theta(theta: f64) -> Result<(), SynthError> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(SynthError::Theta(theta))
    }
}

/// One Clayton copula draw in `(0, 1)^2` by conditional inversion.
fn clayton_unit(rng: &mut ChaCha8Rng, theta: f64) -> (f64, f64) {
    let u: f64 = rng.sample(Open01);
    let q: f64 = rng.sample(Open01);
    let w = ((q.powf(-theta / (1.0 + theta)) - 1.0) * u.powf(-theta) + 1.0).powf(-1.0 / theta);
    (u, w)
}

/// `n` Clayton copula samples with marginals uniform on `[0, scale)`.
pub fn gen_clayton_points(
    n: usize,
    theta: f64,
    scale: f64,
    seed: u64,
) -> Result<Vec<[f64; 2]>, SynthError> {
    check_theta(theta)?;
    Ok((0..n)
        .map(|i| {
            let (u, w) = clayton_unit(&mut stream(seed, i as u64), theta);
            [u * scale, w * scale]
        })
        .collect())
}

/// Two `n x n x n` volumes whose voxel intensities are the floored
/// coordinates of `n^3` Clayton samples, filled in slice-row-major order.
pub fn gen_copula_images_3d(
    n: usize,
    theta: f64,
    levels: u32,
    seed: u64,
) -> Result<(GrayImage, GrayImage), SynthError> {
    check_theta(theta)?;
    if n == 0 {
        return Err(SynthError::EmptyImage);
    }
    let count = n * n * n;
    let mut first = Vec::with_capacity(count);
    let mut second = Vec::with_capacity(count);
    for i in 0..count {
        let (u, w) = clayton_unit(&mut stream(seed, i as u64), theta);
        first.push(level(u, levels));
        second.push(level(w, levels));
    }
    Ok((
        GrayImage::new(vec![n, n, n], levels, first)?,
        GrayImage::new(vec![n, n, n], levels, second)?,
    ))
}

fn check_intensity(lambda: f64) -> Result<Poisson<f64>, SynthError> {
    if lambda > 0.0 && lambda.is_finite() {
        Poisson::new(lambda).map_err(|_| SynthError::Intensity(lambda))
    } else {
        Err(SynthError::Intensity(lambda))
    }
}

fn uniform_points(count: usize, seed: u64) -> Vec<[f64; 2]> {
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            [rng.random(), rng.random()]
        })
        .collect()
}

/// Homogeneous Poisson process of intensity `lambda` on the unit square.
pub fn gen_poisson(lambda: f64, seed: u64) -> Result<Vec<[f64; 2]>, SynthError> {
    let count = check_intensity(lambda)?.sample(&mut stream(seed, GLOBAL_STREAM)) as usize;
    Ok(uniform_points(count, seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HawkesSample {
    pub points: Vec<[f64; 2]>,
    /// Index of the point that spawned each point; `None` for immigrants
    /// (and, when clipped, for points whose parent was discarded).
    pub parents: Vec<Option<usize>>,
}

impl HawkesSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Spatial Hawkes cluster process: Poisson(`lambda_parent`) immigrants on
/// the unit square, and every point, offspring included, spawns
/// Poisson(`alpha`) offspring displaced by an isotropic Gaussian with
/// per-axis standard deviation `sigma`.
///
/// Offspring outside the unit square are kept unless `clip` is set. The
/// expected total count is `lambda_parent / (1 - alpha)`.
pub fn gen_hawkes_cluster(
    lambda_parent: f64,
    alpha: f64,
    sigma: f64,
    clip: bool,
    seed: u64,
) -> Result<HawkesSample, SynthError> {
    let immigrants = check_intensity(lambda_parent)?;
    if !(0.0..1.0).contains(&alpha) {
        return Err(SynthError::Branching(alpha));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(SynthError::Spread(sigma));
    }
    let count = immigrants.sample(&mut stream(seed, GLOBAL_STREAM)) as usize;
    let mut points = uniform_points(count, seed);
    let mut parents: Vec<Option<usize>> = vec![None; count];
    if alpha > 0.0 {
        let offspring = Poisson::new(alpha).map_err(|_| SynthError::Branching(alpha))?;
        let displacement = Normal::new(0.0, sigma).map_err(|_| SynthError::Spread(sigma))?;
        // points are processed in creation order; point i draws from stream
        // `count + i` so immigrant positions and offspring never share one
        let mut i = 0;
        while i < points.len() {
            let mut rng = stream(seed, (count + i) as u64);
            let children = offspring.sample(&mut rng) as usize;
            let [x, y] = points[i];
            for _ in 0..children {
                let dx = displacement.sample(&mut rng);
                let dy = displacement.sample(&mut rng);
                points.push([x + dx, y + dy]);
                parents.push(Some(i));
            }
            i += 1;
        }
    }
    if !clip {
        return Ok(HawkesSample { points, parents });
    }
    let inside = |p: &[f64; 2]| (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1]);
    let mut remap = vec![None; points.len()];
    let mut kept = HawkesSample {
        points: Vec::new(),
        parents: Vec::new(),
    };
    for (i, p) in points.iter().enumerate() {
        if inside(p) {
            remap[i] = Some(kept.points.len());
            kept.points.push(*p);
            kept.parents.push(parents[i].and_then(|j| remap[j]));
        }
    }
    Ok(kept)
}
