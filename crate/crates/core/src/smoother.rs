//! Nadaraya–Watson smoothing in the space of previously found projections,
//! and the truncated right singular basis of the resulting matrix.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{lanczos, EigenConfig, LinearOperator, Want};
use crate::error::{Error, Result};
use crate::kernels::nearest_rows;
use crate::sparse::CsrMatrix;

pub const DEFAULT_SV_THRESHOLD: f64 = 0.03;
pub const MAX_NEIGHBOR_CAP: usize = 10_000;

pub fn default_neighbor_cap(n: usize) -> usize {
    n.min(MAX_NEIGHBOR_CAP)
}

/// Row-stochastic Gaussian-kernel smoother.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoother {
    pub matrix: CsrMatrix,
    pub bandwidth: f64,
    pub neighbor_cap: usize,
}

/// Orthonormal right singular vectors (`N × r`) kept after truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflationBasis {
    pub vectors: Array2<f64>,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
}

impl DeflationBasis {
    pub fn rank(&self) -> usize {
        self.vectors.ncols()
    }

    /// Share of `‖P‖_F²` carried by the retained singular values.
    pub fn frobenius_capture(&self, smoother: &Smoother) -> f64 {
        let kept: f64 = self.singular_values.iter().map(|s| s * s).sum();
        kept / smoother.matrix.frobenius_sq()
    }

    /// `‖P V Vᵀ f‖`, the residual of the truncated unpredictability constraint.
    pub fn truncated_residual(&self, smoother: &Smoother, f: ArrayView1<f64>) -> f64 {
        let coef = self.vectors.t().dot(&f);
        let inside = self.vectors.dot(&coef);
        let mut out = Array1::zeros(f.len());
        smoother.matrix.mul_vec(inside.view(), out.view_mut());
        out.dot(&out).sqrt()
    }
}

/// `h = α · (Σ_j ‖f_j‖² / N)^{1/2}` over the columns of `prev`.
pub fn bandwidth(prev: ArrayView2<f64>, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!("bandwidth factor must be positive, got {alpha}")));
    }
    if prev.ncols() == 0 {
        return Err(Error::param("bandwidth needs at least one previous projection"));
    }
    let n = prev.nrows() as f64;
    let energy: f64 = prev.iter().map(|v| v * v).sum();
    if energy == 0.0 {
        return Err(Error::Degenerate("previous projections are all zero".into()));
    }
    Ok(alpha * (energy / n).sqrt())
}

/// Gaussian weights from row `j` to its `cap` nearest rows in predictor
/// space. With `leave_one_out` the row itself is excluded; otherwise it is
/// always included. Zero weights are dropped; rows are normalized.
pub(crate) fn nw_row(
    predictors: ArrayView2<f64>,
    j: usize,
    h: f64,
    cap: usize,
    leave_one_out: bool,
) -> Vec<(usize, f64)> {
    let n = predictors.nrows();
    let others = if leave_one_out { cap.min(n - 1) } else { cap.saturating_sub(1).min(n - 1) };
    let inv = 1.0 / (2.0 * h * h);
    let mut row: Vec<(usize, f64)> = if others == n - 1 {
        let xj = predictors.row(j);
        (0..n)
            .filter(|&k| k != j)
            .map(|k| {
                let d2: f64 = xj.iter().zip(predictors.row(k)).map(|(a, b)| (a - b) * (a - b)).sum();
                (k, d2.sqrt())
            })
            .collect()
    } else if others == 0 {
        Vec::new()
    } else {
        nearest_rows(predictors, j, others)
    };
    for e in row.iter_mut() {
        e.1 = (-e.1 * e.1 * inv).exp();
    }
    if !leave_one_out {
        row.push((j, 1.0));
    }
    row.retain(|e| e.1 > 0.0);
    let total: f64 = row.iter().map(|e| e.1).sum();
    if total > 0.0 {
        for e in row.iter_mut() {
            e.1 /= total;
        }
    }
    row
}

/// Nadaraya–Watson matrix `[P]_jk ∝ exp(−‖F_j − F_k‖² / 2h²)` over the
/// `neighbor_cap` nearest samples of `j` in projection space (self included),
/// rows normalized to one. `neighbor_cap = N` gives the dense formula.
pub fn build_nw_smoother(prev: ArrayView2<f64>, h: f64, neighbor_cap: usize) -> Result<Smoother> {
    let n = prev.nrows();
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param(format!("smoother bandwidth must be positive, got {h}")));
    }
    if neighbor_cap == 0 || neighbor_cap > n {
        return Err(Error::param(format!(
            "smoother neighbor cap must lie in [1, {n}], got {neighbor_cap}"
        )));
    }
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|j| nw_row(prev, j, h, neighbor_cap, false))
        .collect();
    Ok(Smoother {
        matrix: CsrMatrix::from_rows(n, rows),
        bandwidth: h,
        neighbor_cap,
    })
}

/// `x ↦ Pᵀ P x`.
struct NormalOperator<'a>(&'a CsrMatrix);

impl LinearOperator for NormalOperator<'_> {
    fn dim(&self) -> usize {
        self.0.n_cols()
    }

    fn apply(&self, x: ArrayView1<f64>, y: ArrayViewMut1<f64>) {
        let mut px = Array1::zeros(self.0.n_rows());
        self.0.mul_vec(x, px.view_mut());
        self.0.mul_vec_transposed(px.view(), y);
    }
}

/// Right singular vectors of `P` whose singular values are at least
/// `threshold × σ_max`, found by a Krylov solve on `PᵀP` (P is never
/// densified).
pub fn truncated_right_singular_basis(
    smoother: &Smoother,
    threshold: f64,
    seed: u64,
) -> Result<DeflationBasis> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::param(format!(
            "singular value threshold must lie in (0,1), got {threshold}"
        )));
    }
    let cfg = EigenConfig {
        tol: 1e-12,
        max_iter: 50_000,
        seed,
        krylov_dim: None,
    };
    let op = NormalOperator(&smoother.matrix);
    let ritz = lanczos(&op, Want::AboveFraction(threshold * threshold), &cfg)?;
    let n = smoother.matrix.n_cols();
    let r = ritz.vectors.len();
    let mut vectors = Array2::zeros((n, r));
    for (c, v) in ritz.vectors.iter().enumerate() {
        vectors.column_mut(c).assign(v);
    }
    Ok(DeflationBasis {
        vectors,
        singular_values: ritz.values.iter().map(|v| v.max(0.0).sqrt()).collect(),
        threshold,
    })
}
