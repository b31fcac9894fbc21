//! Synthetic manifolds with known intrinsic coordinates, image patches, and
//! point-cloud I/O.

mod io;

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_csv, load_embedding_csv, save_csv};

/// Default start of the Swiss-roll angle range.
pub const SWISS_ROLL_T_START: f64 = 1.5 * PI;

/// `N` points in `D` dimensions, optionally with ground-truth manifold
/// coordinates and class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Array2<f64>,
    pub intrinsic: Option<Array2<f64>>,
    /// Generation seed; 0 for clouds read from disk.
    pub seed: u64,
    /// Marks intrinsic columns that are angles in radians.
    #[serde(default)]
    pub angular: Vec<bool>,
    #[serde(default)]
    pub labels: Option<Vec<i64>>,
}

impl PointCloud {
    pub fn new(points: Array2<f64>, intrinsic: Option<Array2<f64>>, seed: u64) -> Result<Self> {
        let m = intrinsic.as_ref().map_or(0, |a| a.ncols());
        let cloud = PointCloud {
            points,
            intrinsic,
            seed,
            angular: vec![false; m],
            labels: None,
        };
        cloud.validate()?;
        Ok(cloud)
    }

    pub fn with_angular(mut self, angular: Vec<bool>) -> Self {
        self.angular = angular;
        self
    }

    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic.as_ref().map_or(0, |a| a.ncols())
    }

    pub fn validate(&self) -> Result<()> {
        let (n, d) = self.points.dim();
        if n < 2 {
            return Err(Error::param(format!("point cloud needs at least 2 points, got {n}")));
        }
        if d < 1 {
            return Err(Error::param("point cloud needs at least 1 dimension"));
        }
        if !self.points.iter().all(|v| v.is_finite()) {
            return Err(Error::param("point cloud contains NaN or infinite entries"));
        }
        if let Some(intr) = &self.intrinsic {
            if intr.nrows() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: intr.nrows(),
                });
            }
            if !intr.iter().all(|v| v.is_finite()) {
                return Err(Error::param("intrinsic coordinates contain NaN or infinite entries"));
            }
        }
        Ok(())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_count(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::param(format!("need n >= 2 samples, got {n}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::param(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// Uniform i.i.d. samples on the rectangle `[0, l1] × [0, l2]`. The strip is
/// its own chart, so `intrinsic == points`.
pub fn gen_strip(n: usize, l1: f64, l2: f64, seed: u64) -> Result<PointCloud> {
    check_count(n)?;
    check_positive("L1", l1)?;
    check_positive("L2", l2)?;
    let mut rng = rng(seed);
    let mut points = Array2::zeros((n, 2));
    for mut row in points.outer_iter_mut() {
        row[0] = rng.random::<f64>() * l1;
        row[1] = rng.random::<f64>() * l2;
    }
    PointCloud::new(points.clone(), Some(points), seed)
}

/// Arc length of the spiral `(t cos t, t sin t)` measured from `t = 0`.
pub fn spiral_arc_length(t: f64) -> f64 {
    0.5 * (t * (1.0 + t * t).sqrt() + t.asinh())
}

/// Swiss roll `(t cos t, h, t sin t)` with `t` uniform over
/// `[1.5π, 1.5π + 2π·turns]` and `h` uniform over `[0, height]`.
/// Intrinsic coordinates are (arc length from the start of the roll, h).
pub fn gen_swiss_roll(n: usize, turns: f64, height: f64, seed: u64) -> Result<PointCloud> {
    check_count(n)?;
    check_positive("turns", turns)?;
    check_positive("height", height)?;
    let t0 = SWISS_ROLL_T_START;
    let span = 2.0 * PI * turns;
    let s0 = spiral_arc_length(t0);
    let mut rng = rng(seed);
    let mut points = Array2::zeros((n, 3));
    let mut intrinsic = Array2::zeros((n, 2));
    for i in 0..n {
        let t = t0 + rng.random::<f64>() * span;
        let h = rng.random::<f64>() * height;
        points[[i, 0]] = t * t.cos();
        points[[i, 1]] = h;
        points[[i, 2]] = t * t.sin();
        intrinsic[[i, 0]] = spiral_arc_length(t) - s0;
        intrinsic[[i, 1]] = h;
    }
    PointCloud::new(points, Some(intrinsic), seed)
}

/// Torus with major radius `big_r` and tube radius `small_r`; both angles
/// uniform on `[0, 2π)`. Intrinsic coordinates are (outer angle θ, inner
/// angle ψ), both flagged angular.
pub fn gen_ring(n: usize, big_r: f64, small_r: f64, seed: u64) -> Result<PointCloud> {
    check_count(n)?;
    check_positive("r", small_r)?;
    check_positive("R", big_r)?;
    if big_r <= small_r {
        return Err(Error::param(format!(
            "ring needs R > r, got R={big_r}, r={small_r}"
        )));
    }
    let mut rng = rng(seed);
    let mut points = Array2::zeros((n, 3));
    let mut intrinsic = Array2::zeros((n, 2));
    for i in 0..n {
        let theta = rng.random::<f64>() * 2.0 * PI;
        let psi = rng.random::<f64>() * 2.0 * PI;
        let radial = big_r + small_r * psi.cos();
        points[[i, 0]] = radial * theta.cos();
        points[[i, 1]] = radial * theta.sin();
        points[[i, 2]] = small_r * psi.sin();
        intrinsic[[i, 0]] = theta;
        intrinsic[[i, 1]] = psi;
    }
    Ok(PointCloud::new(points, Some(intrinsic), seed)?.with_angular(vec![true, true]))
}

/// All `patch × patch` windows whose top-left corner lies on the stride
/// grid and which fit entirely in the image. Points are row-major
/// vectorized patches; intrinsic coordinates are the (row, col) of each
/// patch's top-left pixel.
pub fn extract_patches(image: ArrayView2<f64>, patch: usize, stride: usize) -> Result<PointCloud> {
    let (h, w) = image.dim();
    if patch == 0 || stride == 0 {
        return Err(Error::param("patch size and stride must be at least 1"));
    }
    if patch > h.min(w) {
        return Err(Error::param(format!(
            "patch size {patch} exceeds image dimensions {h}x{w}"
        )));
    }
    let rows: Vec<usize> = (0..=h - patch).step_by(stride).collect();
    let cols: Vec<usize> = (0..=w - patch).step_by(stride).collect();
    let n = rows.len() * cols.len();
    let mut points = Array2::zeros((n, patch * patch));
    let mut intrinsic = Array2::zeros((n, 2));
    let mut idx = 0;
    for &r in &rows {
        for &c in &cols {
            let block = image.slice(ndarray::s![r..r + patch, c..c + patch]);
            for (dst, src) in points.row_mut(idx).iter_mut().zip(block.iter()) {
                *dst = *src;
            }
            intrinsic[[idx, 0]] = r as f64;
            intrinsic[[idx, 1]] = c as f64;
            idx += 1;
        }
    }
    if n < 2 {
        // Single-patch extractions sit below the usual two-point minimum.
        return Ok(PointCloud {
            points,
            intrinsic: Some(intrinsic),
            seed: 0,
            angular: vec![false, false],
            labels: None,
        });
    }
    PointCloud::new(points, Some(intrinsic), 0)
}

/// Labeled sprite images: a Gaussian spot on a small square canvas whose
/// horizontal position ranges `aspect` times further than its vertical one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpriteParams {
    /// Canvas side in pixels.
    pub side: usize,
    /// Horizontal travel of the spot center in pixels.
    pub travel: f64,
    /// Horizontal travel divided by vertical travel.
    pub aspect: f64,
    /// Spot standard deviation in pixels.
    pub spot_sigma: f64,
    /// Per-pixel Gaussian noise level.
    pub noise: f64,
    /// Number of horizontal bins; the label is `2 * bin + (upper half)`.
    pub bins: usize,
}

impl Default for SpriteParams {
    fn default() -> Self {
        SpriteParams {
            side: 12,
            travel: 8.0,
            aspect: 4.0,
            spot_sigma: 1.5,
            noise: 0.0,
            bins: 4,
        }
    }
}

/// Generates labeled sprite images. The class depends on both the long
/// (horizontal) and short (vertical) factors of variation, so a
/// representation that only resolves the long factor misses half the label.
pub fn gen_sprites(n: usize, params: &SpriteParams, seed: u64) -> Result<PointCloud> {
    check_count(n)?;
    check_positive("travel", params.travel)?;
    check_positive("aspect", params.aspect)?;
    check_positive("spot sigma", params.spot_sigma)?;
    if params.side < 2 || params.bins == 0 {
        return Err(Error::param("sprites need side >= 2 and bins >= 1"));
    }
    if params.noise < 0.0 {
        return Err(Error::param("noise must be non-negative"));
    }
    let side = params.side as f64;
    let travel_y = params.travel / params.aspect;
    if params.travel >= side {
        return Err(Error::param("sprite travel must be smaller than the canvas"));
    }
    let mut rng = rng(seed);
    let mut points = Array2::zeros((n, params.side * params.side));
    let mut intrinsic = Array2::zeros((n, 2));
    let mut labels = Vec::with_capacity(n);
    let x0 = 0.5 * (side - 1.0 - params.travel);
    let y0 = 0.5 * (side - 1.0 - travel_y);
    let inv = 1.0 / (2.0 * params.spot_sigma * params.spot_sigma);
    for i in 0..n {
        let u = rng.random::<f64>();
        let v = rng.random::<f64>();
        let cx = x0 + u * params.travel;
        let cy = y0 + v * travel_y;
        for r in 0..params.side {
            for c in 0..params.side {
                let d2 = (c as f64 - cx).powi(2) + (r as f64 - cy).powi(2);
                let mut value = (-d2 * inv).exp();
                if params.noise > 0.0 {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    value += params.noise * z;
                }
                points[[i, r * params.side + c]] = value;
            }
        }
        intrinsic[[i, 0]] = u * params.travel;
        intrinsic[[i, 1]] = v * travel_y;
        let bin = ((u * params.bins as f64) as usize).min(params.bins - 1);
        labels.push((2 * bin + usize::from(v >= 0.5)) as i64);
    }
    PointCloud::new(points, Some(intrinsic), seed)?.with_labels(labels)
}
