//! Baseline, non-redundant and sequential-regression embeddings.

use std::borrow::Cow;

use ndarray::{s, Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::datasets::PointCloud;
use crate::diagnostics::{redundancy_score, redundancy_scores, ScoreConfig};
use crate::eigensolve::{deflated_operator, top_eigenpair, top_eigenpairs, EigenConfig};
use crate::error::{Error, Result};
use crate::kernels::{to_maximization, KernelMatrix, Orientation};
use crate::smoother::{
    bandwidth, build_nw_smoother, default_neighbor_cap, truncated_right_singular_basis,
    DEFAULT_SV_THRESHOLD,
};

/// Eigenvalues at or below this fraction of the first are treated as an
/// exhausted kernel.
const EXHAUSTION_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Baseline,
    Nonredundant,
    Seqreg,
    Dsilva,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedConfig {
    /// Number of projections requested.
    pub d: usize,
    /// Smoother bandwidth factor.
    pub alpha: f64,
    pub sv_threshold: f64,
    /// Neighbors per smoother row; `min(N, 10000)` when unset.
    pub neighbor_cap: Option<usize>,
    pub remove_constant: bool,
    pub eigen: EigenConfig,
    pub score: ScoreConfig,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            d: 2,
            alpha: 0.3,
            sv_threshold: DEFAULT_SV_THRESHOLD,
            neighbor_cap: None,
            remove_constant: true,
            eigen: EigenConfig::default(),
            score: ScoreConfig::default(),
        }
    }
}

impl EmbedConfig {
    fn validate(&self, n: usize) -> Result<()> {
        if self.d == 0 || self.d >= n {
            return Err(Error::param(format!(
                "number of projections must lie in [1, {}), got {}",
                n, self.d
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::param(format!(
                "bandwidth factor must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.neighbor_cap == Some(0) {
            return Err(Error::param("smoother neighbor cap must be at least 1"));
        }
        Ok(())
    }

    fn cap(&self, n: usize) -> usize {
        self.neighbor_cap.unwrap_or_else(|| default_neighbor_cap(n))
    }
}

/// Per-step record of the deflation used to find one projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub step: usize,
    pub bandwidth: f64,
    /// Rank of the deflation basis.
    pub rank: usize,
    pub frobenius_capture: f64,
    /// `‖P V Vᵀ f‖` for the new projection.
    pub truncated_residual: f64,
    /// `‖P f‖`, the full unpredictability residual.
    pub full_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    /// `N × d`, unit-norm columns.
    pub projections: Array2<f64>,
    pub eigenvalues: Vec<f64>,
    pub redundancy_scores: Vec<f64>,
    pub method: Method,
    pub config: EmbedConfig,
    pub steps: Vec<StepInfo>,
    /// Early termination and other non-fatal events.
    pub notices: Vec<String>,
}

impl Embedding {
    pub fn d(&self) -> usize {
        self.projections.ncols()
    }

    fn from_columns(
        cols: Vec<Array1<f64>>,
        eigenvalues: Vec<f64>,
        method: Method,
        config: EmbedConfig,
        steps: Vec<StepInfo>,
        notices: Vec<String>,
    ) -> Result<Self> {
        let projections = stack(&cols);
        let redundancy_scores = redundancy_scores(projections.view(), &config.score)?;
        Ok(Embedding {
            projections,
            eigenvalues,
            redundancy_scores,
            method,
            config,
            steps,
            notices,
        })
    }
}

fn stack(cols: &[Array1<f64>]) -> Array2<f64> {
    let n = cols.first().map_or(0, |c| c.len());
    let mut out = Array2::zeros((n, cols.len()));
    for (i, c) in cols.iter().enumerate() {
        out.column_mut(i).assign(c);
    }
    out
}

fn maximization(kernel: &KernelMatrix) -> Result<Cow<'_, KernelMatrix>> {
    Ok(match kernel.orientation {
        Orientation::Maximize => Cow::Borrowed(kernel),
        Orientation::Minimize => Cow::Owned(to_maximization(kernel.clone())?),
    })
}

/// Leading `cfg.d` nontrivial eigenvectors of the kernel.
pub fn spectral_embed(kernel: &KernelMatrix, cfg: &EmbedConfig) -> Result<Embedding> {
    cfg.validate(kernel.n())?;
    let k = maximization(kernel)?;
    let op = deflated_operator(&k, None, cfg.remove_constant)?;
    let pairs = top_eigenpairs(&op, cfg.d, &cfg.eigen)?;
    let (values, cols) = pairs.into_iter().map(|p| (p.value, p.vector)).unzip();
    Embedding::from_columns(cols, values, Method::Baseline, *cfg, Vec::new(), Vec::new())
}

/// Greedy non-redundant embedding: each projection after the first is the
/// top eigenvector of the kernel restricted to the complement of the
/// smoother's dominant right singular subspace, built from all earlier
/// projections. Stops early, with a notice, when the deflated kernel has no
/// admissible direction left.
pub fn nonredundant_embed(kernel: &KernelMatrix, cfg: &EmbedConfig) -> Result<Embedding> {
    let n = kernel.n();
    cfg.validate(n)?;
    let k = maximization(kernel)?;
    let first = top_eigenpair(&deflated_operator(&k, None, cfg.remove_constant)?, &cfg.eigen)
        .map_err(|e| e.at_step(1))?;
    let lambda1 = first.value;
    let mut cols = vec![first.vector];
    let mut values = vec![lambda1];
    let mut steps = Vec::new();
    let mut notices = Vec::new();

    for step in 2..=cfg.d {
        let prev = stack(&cols);
        let h = bandwidth(prev.view(), cfg.alpha)?;
        let smoother = build_nw_smoother(prev.view(), h, cfg.cap(n))?;
        let basis = truncated_right_singular_basis(&smoother, cfg.sv_threshold, cfg.eigen.seed)
            .map_err(|e| e.at_step(step))?;
        let op = deflated_operator(&k, Some(&basis), cfg.remove_constant)?;
        if op.constraint_rank() >= n {
            notices.push(format!(
                "stopped at step {step}: constraints span the whole space"
            ));
            break;
        }
        let pair = match top_eigenpair(&op, &cfg.eigen) {
            Ok(p) => p,
            Err(Error::Degenerate(msg)) => {
                notices.push(format!("stopped at step {step}: {msg}"));
                break;
            }
            Err(e) => return Err(e.at_step(step)),
        };
        if pair.value <= EXHAUSTION_RATIO * lambda1.abs() {
            notices.push(format!(
                "stopped at step {step}: deflated eigenvalue {:.3e} is negligible",
                pair.value
            ));
            break;
        }
        let mut pf = Array1::zeros(n);
        smoother.matrix.mul_vec(pair.vector.view(), pf.view_mut());
        steps.push(StepInfo {
            step,
            bandwidth: h,
            rank: basis.rank(),
            frobenius_capture: basis.frobenius_capture(&smoother),
            truncated_residual: basis.truncated_residual(&smoother, pair.vector.view()),
            full_residual: pf.dot(&pf).sqrt(),
        });
        log::info!(
            "step {step}: eigenvalue {:.6e}, deflation rank {}",
            pair.value,
            basis.rank()
        );
        values.push(pair.value);
        cols.push(pair.vector);
    }
    for note in &notices {
        log::warn!("{note}");
    }
    Embedding::from_columns(cols, values, Method::Nonredundant, *cfg, steps, notices)
}

/// Residual `X − P X` of the data after Nadaraya–Watson regression on the
/// columns of `prev`.
pub fn regression_residual(
    prev: ArrayView2<f64>,
    points: ArrayView2<f64>,
    alpha: f64,
    neighbor_cap: usize,
) -> Result<Array2<f64>> {
    let h = bandwidth(prev, alpha)?;
    let smoother = build_nw_smoother(prev, h, neighbor_cap)?;
    let mut out = points.to_owned();
    let mut fitted = Array1::zeros(points.nrows());
    for (c, mut col) in out.columns_mut().into_iter().enumerate() {
        smoother.matrix.mul_vec(points.column(c), fitted.view_mut());
        col -= &fitted;
    }
    Ok(out)
}

/// Sequential-regression baseline: after each projection the data are
/// replaced by their regression residual on all projections so far, and a
/// fresh kernel is built on the residual.
pub fn sequential_regression_embed(
    cloud: &PointCloud,
    build_kernel: &dyn Fn(&PointCloud) -> Result<KernelMatrix>,
    cfg: &EmbedConfig,
) -> Result<Embedding> {
    let n = cloud.len();
    cfg.validate(n)?;
    let first_cfg = EmbedConfig { d: 1, ..*cfg };
    let top = |c: &PointCloud| -> Result<(f64, Array1<f64>)> {
        let k = build_kernel(c)?;
        let k = maximization(&k)?;
        let pair = top_eigenpair(&deflated_operator(&k, None, cfg.remove_constant)?, &first_cfg.eigen)?;
        Ok((pair.value, pair.vector))
    };
    let (v1, f1) = top(cloud).map_err(|e| e.at_step(1))?;
    let mut cols = vec![f1];
    let mut values = vec![v1];
    let mut steps = Vec::new();
    for step in 2..=cfg.d {
        let prev = stack(&cols);
        let h = bandwidth(prev.view(), cfg.alpha)?;
        let resid = regression_residual(prev.view(), cloud.points.view(), cfg.alpha, cfg.cap(n))?;
        let resid_cloud = PointCloud::new(resid, cloud.intrinsic.clone(), cloud.seed)?;
        let (v, f) = top(&resid_cloud).map_err(|e| e.at_step(step))?;
        let smoother = build_nw_smoother(prev.view(), h, cfg.cap(n))?;
        let mut pf = Array1::zeros(n);
        smoother.matrix.mul_vec(f.view(), pf.view_mut());
        steps.push(StepInfo {
            step,
            bandwidth: h,
            rank: 0,
            frobenius_capture: 0.0,
            truncated_residual: 0.0,
            full_residual: pf.dot(&pf).sqrt(),
        });
        values.push(v);
        cols.push(f);
    }
    Embedding::from_columns(cols, values, Method::Seqreg, *cfg, steps, Vec::new())
}

/// Post-hoc selection from a larger baseline embedding: scanning columns in
/// order, a column is kept when its leave-one-out score against the columns
/// already kept exceeds `score_threshold`, until `target` are kept.
pub fn dsilva_select(emb: &Embedding, target: usize, score_threshold: f64) -> Result<Embedding> {
    if target == 0 || target > emb.d() {
        return Err(Error::param(format!(
            "selection target must lie in [1, {}], got {target}",
            emb.d()
        )));
    }
    let n = emb.projections.nrows();
    let cap = emb.config.score.neighbor_cap.unwrap_or_else(|| default_neighbor_cap(n));
    let mut kept = vec![0usize];
    let mut scores = vec![1.0];
    for c in 1..emb.d() {
        if kept.len() == target {
            break;
        }
        let mut trial = Array2::zeros((n, kept.len() + 1));
        for (i, &k) in kept.iter().enumerate() {
            trial.column_mut(i).assign(&emb.projections.column(k));
        }
        trial.column_mut(kept.len()).assign(&emb.projections.column(c));
        let h = bandwidth(trial.slice(s![.., ..kept.len()]), emb.config.score.alpha)?;
        let score = redundancy_score(trial.view(), kept.len(), h, cap)?;
        if score > score_threshold {
            kept.push(c);
            scores.push(score);
        }
    }
    let mut notices = emb.notices.clone();
    if kept.len() < target {
        notices.push(format!(
            "only {} of {target} columns passed the score threshold {score_threshold}",
            kept.len()
        ));
    }
    let mut projections = Array2::zeros((n, kept.len()));
    for (i, &k) in kept.iter().enumerate() {
        projections.column_mut(i).assign(&emb.projections.column(k));
    }
    Ok(Embedding {
        projections,
        eigenvalues: kept.iter().map(|&k| emb.eigenvalues[k]).collect(),
        redundancy_scores: scores,
        method: Method::Dsilva,
        config: EmbedConfig { d: target, ..emb.config },
        steps: Vec::new(),
        notices,
    })
}
