//! Redundancy and ground-truth recovery measures.
//!
//! The redundancy score of projection `i` is the normalized leave-one-out
//! Nadaraya–Watson regression error `‖f − f̂‖ / ‖f‖` of `f_i` on
//! `f_1..f_{i-1}`, clipped to `[0, 1]`: near 0 means `f_i` is a function of
//! its predecessors, near 1 means it is unpredictable from them.

mod plot;
mod strip;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::PointCloud;
use crate::embed::Embedding;
use crate::error::{Error, Result};
use crate::smoother::{bandwidth, default_neighbor_cap, nw_row};

pub use plot::{emit_plot_data, PlotSummary};
pub use strip::{strip_mode, strip_oracle, strip_report, ModeMatch, StripReport};

/// Bandwidth factor and neighbor cap for redundancy scoring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreConfig {
    pub alpha: f64,
    pub neighbor_cap: Option<usize>,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            alpha: 0.2,
            neighbor_cap: None,
        }
    }
}

/// Leave-one-out Nadaraya–Watson prediction of `target` from the rows of
/// `predictors`. Samples with no neighbor weight are predicted as 0.
pub fn loo_predict(
    predictors: ArrayView2<f64>,
    target: ArrayView1<f64>,
    h: f64,
    neighbor_cap: usize,
) -> Result<Array1<f64>> {
    let n = predictors.nrows();
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param(format!("regression bandwidth must be positive, got {h}")));
    }
    if target.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: target.len(),
        });
    }
    let cap = neighbor_cap.clamp(1, n.max(2) - 1);
    let pred: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            nw_row(predictors, j, h, cap, true)
                .into_iter()
                .map(|(k, w)| w * target[k])
                .sum()
        })
        .collect();
    Ok(Array1::from(pred))
}

/// Score of column `target` (0-based, must be ≥ 1) against the columns
/// before it, at bandwidth `h`.
pub fn redundancy_score(
    projections: ArrayView2<f64>,
    target: usize,
    h: f64,
    neighbor_cap: usize,
) -> Result<f64> {
    if target == 0 || target >= projections.ncols() {
        return Err(Error::param(format!(
            "redundancy target column must lie in [1, {}), got {target}",
            projections.ncols()
        )));
    }
    let predictors = projections.slice(ndarray::s![.., ..target]);
    let f = projections.column(target);
    let pred = loo_predict(predictors, f, h, neighbor_cap)?;
    let norm = f.dot(&f).sqrt();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let err = &f - &pred;
    Ok((err.dot(&err).sqrt() / norm).clamp(0.0, 1.0))
}

/// Scores for every column, the bandwidth for column `i` following the
/// usual rule over columns `0..i`. Column 0 scores 1 by definition.
pub fn redundancy_scores(projections: ArrayView2<f64>, cfg: &ScoreConfig) -> Result<Vec<f64>> {
    let cap = cfg.neighbor_cap.unwrap_or_else(|| default_neighbor_cap(projections.nrows()));
    let mut scores = Vec::with_capacity(projections.ncols());
    for i in 0..projections.ncols() {
        if i == 0 {
            scores.push(1.0);
            continue;
        }
        let h = bandwidth(projections.slice(ndarray::s![.., ..i]), cfg.alpha)?;
        scores.push(redundancy_score(projections, i, h, cap)?);
    }
    Ok(scores)
}

pub fn pearson(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.sum() / n, b.sum() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(a: ArrayView1<f64>) -> Array1<f64> {
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(|&i, &j| a[i].total_cmp(&a[j]));
    let mut out = Array1::zeros(a.len());
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && a[idx[end]] == a[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            out[i] = avg;
        }
        start = end;
    }
    out
}

pub fn spearman(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    pearson(ranks(a).view(), ranks(b).view())
}

fn correlation_table(
    projections: ArrayView2<f64>,
    cloud: &PointCloud,
    corr: fn(ArrayView1<f64>, ArrayView1<f64>) -> f64,
) -> Result<Array2<f64>> {
    let intr = cloud
        .intrinsic
        .as_ref()
        .ok_or_else(|| Error::Diagnostic("point cloud has no intrinsic coordinates".into()))?;
    if intr.nrows() != projections.nrows() {
        return Err(Error::DimensionMismatch {
            expected: projections.nrows(),
            found: intr.nrows(),
        });
    }
    let (d, m) = (projections.ncols(), intr.ncols());
    let mut out = Array2::zeros((d, m));
    for i in 0..d {
        let f = projections.column(i);
        for j in 0..m {
            let coord = intr.column(j);
            out[[i, j]] = if cloud.angular.get(j).copied().unwrap_or(false) {
                let c = coord.mapv(f64::cos);
                let s = coord.mapv(f64::sin);
                corr(f, c.view()).abs().max(corr(f, s.view()).abs())
            } else {
                corr(f, coord).abs()
            };
        }
    }
    Ok(out)
}

/// `|Spearman|` between each projection and each intrinsic coordinate;
/// angular coordinates are compared through their cosine and sine.
pub fn intrinsic_correlation(emb: &Embedding, cloud: &PointCloud) -> Result<Array2<f64>> {
    correlation_table(emb.projections.view(), cloud, spearman)
}

/// Same layout as [`intrinsic_correlation`] with Pearson correlation.
pub fn intrinsic_pearson(emb: &Embedding, cloud: &PointCloud) -> Result<Array2<f64>> {
    correlation_table(emb.projections.view(), cloud, pearson)
}

/// [`intrinsic_correlation`] for a bare projection matrix.
pub fn projection_correlation(projections: ArrayView2<f64>, cloud: &PointCloud) -> Result<Array2<f64>> {
    correlation_table(projections, cloud, spearman)
}

/// [`intrinsic_pearson`] for a bare projection matrix.
pub fn projection_pearson(projections: ArrayView2<f64>, cloud: &PointCloud) -> Result<Array2<f64>> {
    correlation_table(projections, cloud, pearson)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{EmbedConfig, Method};
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, StandardNormal};

    fn unit(mut v: Array1<f64>) -> Array1<f64> {
        let m = v.mean().unwrap();
        v.mapv_inplace(|x| x - m);
        let n = v.dot(&v).sqrt();
        v / n
    }

    fn two_columns(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((a.len(), 2));
        out.column_mut(0).assign(a);
        out.column_mut(1).assign(b);
        out
    }

    fn smooth_column(n: usize) -> Array1<f64> {
        unit(Array1::from_shape_fn(n, |i| ((i as f64 + 0.5) / n as f64 * 3.0).sin()))
    }

    #[test]
    fn identical_columns_are_redundant() {
        let f = smooth_column(600);
        let proj = two_columns(&f, &f);
        let h = bandwidth(proj.slice(ndarray::s![.., ..1]), 0.2).unwrap();
        let s = redundancy_score(proj.view(), 1, h, 600).unwrap();
        assert!(s < 0.1, "score {s}");
        assert!(redundancy_score(proj.view(), 1, 0.0, 600).is_err());
        assert!(redundancy_score(proj.view(), 0, h, 600).is_err());
    }

    /// Monte-Carlo calibration: a fresh random direction orthogonalized
    /// against `f₁` is essentially unpredictable.
    #[test]
    fn independent_columns_are_unpredictable() {
        let n = 2000;
        let f1 = smooth_column(n);
        let mut worst = 1.0f64;
        for seed in 0..100 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut g = unit(Array1::from_shape_fn(n, |_| StandardNormal.sample(&mut rng)));
            let c = g.dot(&f1);
            g.scaled_add(-c, &f1);
            let g = unit(g);
            let proj = two_columns(&f1, &g);
            let h = bandwidth(proj.slice(ndarray::s![.., ..1]), 0.2).unwrap();
            // Capped smoother keeps the calibration loop quick.
            worst = worst.min(redundancy_score(proj.view(), 1, h, 200).unwrap());
        }
        assert!(worst > 0.9, "worst score {worst}");
    }

    #[test]
    fn score_is_scale_and_sign_invariant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let f1 = smooth_column(300);
        let f2 = unit(f1.mapv(|x| x * x * 300.0) + Array1::from_shape_fn(300, |_| 0.3 * rng.random::<f64>()));
        let proj = two_columns(&f1, &f2);
        let h = 0.01;
        let base = redundancy_score(proj.view(), 1, h, 300).unwrap();
        let scaled = two_columns(&(&f1 * 7.5), &f2);
        let s = redundancy_score(scaled.view(), 1, h * 7.5, 300).unwrap();
        assert!((base - s).abs() < 1e-12);
        let flipped = two_columns(&(-&f1), &(-&f2));
        let s = redundancy_score(flipped.view(), 1, h, 300).unwrap();
        assert!((base - s).abs() < 1e-12);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(ranks(array![3.0, 1.0, 3.0, 2.0].view()), array![3.5, 1.0, 3.5, 2.0]);
        let a = array![1.0, 2.0, 3.0, 4.0];
        assert!((spearman(a.view(), a.mapv(f64::exp).view()) - 1.0).abs() < 1e-15);
    }

    fn embedding(proj: Array2<f64>) -> Embedding {
        let d = proj.ncols();
        Embedding {
            projections: proj,
            eigenvalues: vec![1.0; d],
            redundancy_scores: vec![1.0; d],
            method: Method::Baseline,
            config: EmbedConfig::default(),
            steps: Vec::new(),
            notices: Vec::new(),
        }
    }

    #[test]
    fn intrinsic_correlations() {
        let n = 1500;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let intr = Array2::from_shape_fn((n, 2), |_| rng.random::<f64>());
        let cloud = PointCloud::new(intr.clone(), Some(intr.clone()), 0).unwrap();
        let noise = Array1::from_shape_fn(n, |_| rng.random::<f64>());
        let emb = embedding(two_columns(&intr.column(0).to_owned(), &noise));
        let c = intrinsic_correlation(&emb, &cloud).unwrap();
        assert!((c[[0, 0]] - 1.0).abs() < 1e-12);
        assert!(c[[1, 0]] < 0.1 && c[[1, 1]] < 0.1);
        assert!(c.iter().all(|&v| (0.0..=1.0).contains(&v)));

        let bare = PointCloud::new(intr, None, 0).unwrap();
        assert!(matches!(intrinsic_correlation(&emb, &bare), Err(Error::Diagnostic(_))));
    }

    #[test]
    fn angular_coordinates_use_cos_and_sin() {
        let n = 500;
        let theta = Array1::from_shape_fn(n, |i| i as f64 / n as f64 * std::f64::consts::TAU);
        let intr = Array2::from_shape_fn((n, 1), |(i, _)| theta[i]);
        let cloud = PointCloud::new(intr.clone(), Some(intr), 0)
            .unwrap()
            .with_angular(vec![true]);
        let emb = embedding(two_columns(&theta.mapv(f64::sin), &theta.mapv(f64::cos)));
        let c = intrinsic_correlation(&emb, &cloud).unwrap();
        assert!((c[[0, 0]] - 1.0).abs() < 1e-12 && (c[[1, 0]] - 1.0).abs() < 1e-12);
    }
}
