//! Nearest-neighbor classification on embeddings with a seeded
//! train/tune/test split.

use ndarray::{s, Array2, ArrayView2};
use nrdr_core::embed::{
    dsilva_select, nonredundant_embed, sequential_regression_embed, spectral_embed, EmbedConfig,
};
use nrdr_core::PointCloud;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{KernelArg, MethodArg};
use crate::commands::build_kernel;
use crate::error::CliError;

/// Dsilva selection scans this many baseline columns per requested one.
const DSILVA_OVERSAMPLING: usize = 3;
const DSILVA_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub tune: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffled 60/20/20 split of `0..n`.
pub fn split(n: usize, seed: u64) -> Split {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = n * 3 / 5;
    let n_tune = n / 5;
    let test = idx.split_off(n_train + n_tune);
    let tune = idx.split_off(n_train);
    Split {
        train: idx,
        tune,
        test,
    }
}

/// Fraction of `eval` misclassified by 1-NN over `train` in the rows of
/// `features`. Distance ties go to the earlier training sample.
pub fn nearest_neighbor_error(
    features: ArrayView2<f64>,
    labels: &[i64],
    train: &[usize],
    eval: &[usize],
) -> f64 {
    if eval.is_empty() {
        return 0.0;
    }
    let wrong: usize = eval
        .par_iter()
        .map(|&i| {
            let x = features.row(i);
            let mut best = (f64::INFINITY, usize::MAX);
            for &j in train {
                let d: f64 = x
                    .iter()
                    .zip(features.row(j).iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d < best.0 {
                    best = (d, j);
                }
            }
            usize::from(best.1 == usize::MAX || labels[best.1] != labels[i])
        })
        .sum();
    wrong as f64 / eval.len() as f64
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    pub kernel: KernelArg,
    pub k: usize,
    pub methods: Vec<MethodArg>,
    pub d_list: Vec<usize>,
    pub alpha_grid: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyRow {
    pub method: MethodArg,
    pub d: usize,
    /// Bandwidth factor picked on the tune split, for methods that have one.
    pub alpha: Option<f64>,
    /// Columns actually available (fewer than `d` after early termination).
    pub columns: usize,
    pub tune_error: f64,
    pub test_error: f64,
}

fn uses_alpha(method: MethodArg) -> bool {
    matches!(method, MethodArg::Nonredundant | MethodArg::Seqreg)
}

/// Embeds the whole cloud once per (method, α) with the largest requested
/// `d` and scores every prefix of the projection columns.
pub fn classify(cloud: &PointCloud, opts: &ClassifyOptions) -> Result<Vec<ClassifyRow>, CliError> {
    let labels = cloud
        .labels
        .as_deref()
        .ok_or_else(|| CliError::usage("input has no `label` column"))?;
    let d_max = *opts
        .d_list
        .iter()
        .max()
        .ok_or_else(|| CliError::usage("--d-list is empty"))?;
    if opts.d_list.contains(&0) {
        return Err(CliError::usage("--d-list entries must be positive"));
    }
    if opts.alpha_grid.is_empty() {
        return Err(CliError::usage("--alpha-grid is empty"));
    }
    let parts = split(cloud.len(), opts.seed);
    let kernel = build_kernel(cloud, opts.kernel, opts.k, None, None)?;
    let base_cfg = EmbedConfig {
        d: d_max,
        eigen: nrdr_core::eigensolve::EigenConfig {
            seed: opts.seed,
            ..Default::default()
        },
        ..Default::default()
    };

    let mut rows = Vec::new();
    for &method in &opts.methods {
        let alphas: Vec<Option<f64>> = if uses_alpha(method) {
            opts.alpha_grid.iter().map(|&a| Some(a)).collect()
        } else {
            vec![None]
        };
        let mut candidates: Vec<(Option<f64>, Array2<f64>)> = Vec::new();
        for alpha in alphas {
            let cfg = EmbedConfig {
                alpha: alpha.unwrap_or(base_cfg.alpha),
                ..base_cfg
            };
            let emb = match method {
                MethodArg::Baseline => spectral_embed(&kernel, &cfg)?,
                MethodArg::Nonredundant => nonredundant_embed(&kernel, &cfg)?,
                MethodArg::Seqreg => sequential_regression_embed(
                    cloud,
                    &|c| build_kernel(c, opts.kernel, opts.k, None, None),
                    &cfg,
                )?,
                MethodArg::Dsilva => {
                    let d_large = (d_max * DSILVA_OVERSAMPLING).min(cloud.len() - 1);
                    let wide = spectral_embed(&kernel, &EmbedConfig { d: d_large, ..cfg })?;
                    dsilva_select(&wide, d_max, DSILVA_THRESHOLD)?
                }
            };
            candidates.push((alpha, emb.projections));
        }
        for &d in &opts.d_list {
            let mut best: Option<ClassifyRow> = None;
            for (alpha, proj) in &candidates {
                let columns = d.min(proj.ncols());
                let view = proj.slice(s![.., ..columns]);
                let tune_error = nearest_neighbor_error(view, labels, &parts.train, &parts.tune);
                if best.as_ref().is_none_or(|b| tune_error < b.tune_error) {
                    best = Some(ClassifyRow {
                        method,
                        d,
                        alpha: *alpha,
                        columns,
                        tune_error,
                        test_error: nearest_neighbor_error(view, labels, &parts.train, &parts.test),
                    });
                }
            }
            rows.extend(best);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;

    #[test]
    fn split_is_a_seeded_partition() {
        let a = split(103, 4);
        assert_eq!(a, split(103, 4));
        assert_ne!(a, split(103, 5));
        assert_eq!((a.train.len(), a.tune.len()), (61, 20));
        let mut all: Vec<usize> = a.train.iter().chain(&a.tune).chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..103).collect::<Vec<_>>());
    }

    #[test]
    fn separable_clusters_have_no_error() {
        let x = Array2::from_shape_fn((40, 1), |(i, _)| if i < 20 { i as f64 } else { 100.0 + i as f64 });
        let labels: Vec<i64> = (0..40).map(|i| i64::from(i >= 20)).collect();
        let parts = split(40, 0);
        assert_eq!(nearest_neighbor_error(x.view(), &labels, &parts.train, &parts.test), 0.0);
    }

    /// Class is fixed by factor 1's stratum and factor 2 within it, so
    /// adding factor 2 as a feature cannot hurt.
    #[test]
    fn informative_projection_does_not_increase_error() {
        let n = 1000;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut x = Array2::zeros((n, 2));
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let (u, v): (f64, f64) = (rng.random(), rng.random());
            x[[i, 0]] = u;
            x[[i, 1]] = v;
            labels.push(2 * i64::from(u > 0.5) + i64::from(v > 0.5));
        }
        let parts = split(n, 1);
        let one = nearest_neighbor_error(x.slice(s![.., ..1]), &labels, &parts.train, &parts.test);
        let two = nearest_neighbor_error(x.view(), &labels, &parts.train, &parts.test);
        assert!(two <= one, "{two} > {one}");
        assert!(one > 0.3 && two < 0.1);
    }
}
