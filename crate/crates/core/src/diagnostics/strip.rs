//! Analytic Neumann modes of the rectangle `[0,L1] × [0,L2]`.

use std::f64::consts::PI;

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::pearson;
use crate::datasets::PointCloud;
use crate::embed::Embedding;
use crate::error::{Error, Result};

const MAX_K1: usize = 8;
const MAX_K2: usize = 4;
/// Minimum correlation gap between best and runner-up mode for a confident match.
const CONFIDENT_MARGIN: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeMatch {
    pub k1: usize,
    pub k2: usize,
    pub correlation: f64,
    pub runner_up: (usize, usize),
    pub margin: f64,
    pub confident: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripReport {
    pub matches: Vec<ModeMatch>,
    /// `⌊L1/L2⌋`, the number of leading modes varying along `x1` alone.
    pub expected_x1_modes: usize,
    pub leading_x1_modes_ok: bool,
    /// `‖s₂f₂ − (2(s₁f₁)² − 1)‖ / ‖s₂f₂‖` for the projections matched to
    /// `(1,0)` and `(2,0)`, each scaled by least squares onto its mode.
    pub quadratic_identity_residual: Option<f64>,
}

/// `cos(k1 π x1 / L1) · cos(k2 π x2 / L2)` at every sample.
pub fn strip_mode(cloud: &PointCloud, l1: f64, l2: f64, k1: usize, k2: usize) -> Array1<f64> {
    let x = cloud.intrinsic.as_ref().unwrap_or(&cloud.points);
    Array1::from_shape_fn(x.nrows(), |i| {
        (k1 as f64 * PI * x[[i, 0]] / l1).cos() * (k2 as f64 * PI * x[[i, 1]] / l2).cos()
    })
}

fn match_mode(f: ArrayView1<f64>, modes: &[((usize, usize), Array1<f64>)]) -> ModeMatch {
    let mut scored: Vec<((usize, usize), f64)> = modes
        .iter()
        .map(|(k, m)| (*k, pearson(f, m.view()).abs()))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (best, corr) = scored[0];
    let (runner_up, second) = scored[1];
    ModeMatch {
        k1: best.0,
        k2: best.1,
        correlation: corr,
        runner_up,
        margin: corr - second,
        confident: corr - second >= CONFIDENT_MARGIN,
    }
}

fn fit_scale(f: ArrayView1<f64>, target: &Array1<f64>) -> Array1<f64> {
    let s = f.dot(target) / f.dot(&f);
    f.mapv(|v| s * v)
}

pub fn strip_oracle(emb: &Embedding, cloud: &PointCloud, l1: f64, l2: f64) -> Result<StripReport> {
    strip_report(emb.projections.view(), cloud, l1, l2)
}

/// [`strip_oracle`] for a bare projection matrix.
pub fn strip_report(
    projections: ArrayView2<f64>,
    cloud: &PointCloud,
    l1: f64,
    l2: f64,
) -> Result<StripReport> {
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(Error::param("strip side lengths must be positive"));
    }
    let dims = cloud.intrinsic.as_ref().map_or(cloud.dim(), |m| m.ncols());
    if dims != 2 {
        return Err(Error::Diagnostic(format!(
            "strip oracle needs 2-d coordinates, found {dims}"
        )));
    }
    if projections.nrows() != cloud.len() {
        return Err(Error::DimensionMismatch {
            expected: cloud.len(),
            found: projections.nrows(),
        });
    }
    let mut modes = Vec::new();
    for k1 in 0..=MAX_K1 {
        for k2 in 0..=MAX_K2 {
            if k1 + k2 > 0 {
                modes.push(((k1, k2), strip_mode(cloud, l1, l2, k1, k2)));
            }
        }
    }
    let matches: Vec<ModeMatch> = projections
        .columns()
        .into_iter()
        .map(|f| match_mode(f, &modes))
        .collect();
    let expected_x1_modes = (l1 / l2).floor() as usize;
    let leading_x1_modes_ok = matches.len() >= expected_x1_modes
        && matches[..expected_x1_modes]
            .iter()
            .enumerate()
            .all(|(i, m)| m.k2 == 0 && m.k1 == i + 1);

    let find = |k1: usize| matches.iter().position(|m| m.k1 == k1 && m.k2 == 0);
    let quadratic_identity_residual = match (find(1), find(2)) {
        (Some(a), Some(b)) => {
            let phi10 = strip_mode(cloud, l1, l2, 1, 0);
            let phi20 = strip_mode(cloud, l1, l2, 2, 0);
            let g1 = fit_scale(projections.column(a), &phi10);
            let g2 = fit_scale(projections.column(b), &phi20);
            let pred = g1.mapv(|v| 2.0 * v * v - 1.0);
            let err = &g2 - &pred;
            Some(err.dot(&err).sqrt() / g2.dot(&g2).sqrt())
        }
        _ => None,
    };
    Ok(StripReport {
        matches,
        expected_x1_modes,
        leading_x1_modes_ok,
        quadratic_identity_residual,
    })
}
