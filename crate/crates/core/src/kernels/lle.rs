use ndarray::Array2;
use rayon::prelude::*;

use super::{unit_constant, KernelMatrix, NeighborhoodGraph, Orientation};
use crate::datasets::PointCloud;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Relative ridge: each local Gram gets `reg · trace(C)/k` on its diagonal.
pub const DEFAULT_LLE_REG: f64 = 1e-3;

/// Solves `C w = 1` for symmetric positive definite `C` by Cholesky.
/// Returns `None` when a pivot collapses relative to `scale`.
fn solve_spd_ones(mut c: Array2<f64>, scale: f64) -> Option<Vec<f64>> {
    let k = c.nrows();
    let floor = 1e-13 * scale.max(f64::MIN_POSITIVE);
    for j in 0..k {
        let mut d = c[[j, j]];
        for p in 0..j {
            d -= c[[j, p]] * c[[j, p]];
        }
        if d.is_nan() || d <= floor {
            return None;
        }
        let d = d.sqrt();
        c[[j, j]] = d;
        for i in j + 1..k {
            let mut v = c[[i, j]];
            for p in 0..j {
                v -= c[[i, p]] * c[[j, p]];
            }
            c[[i, j]] = v / d;
        }
    }
    let mut y = vec![1.0; k];
    for i in 0..k {
        for p in 0..i {
            y[i] -= c[[i, p]] * y[p];
        }
        y[i] /= c[[i, i]];
    }
    for i in (0..k).rev() {
        for p in i + 1..k {
            y[i] -= c[[p, i]] * y[p];
        }
        y[i] /= c[[i, i]];
    }
    Some(y)
}

/// Per-point reconstruction weights over each point's k nearest neighbors,
/// summing to one.
pub fn lle_weights(graph: &NeighborhoodGraph, cloud: &PointCloud, reg: f64) -> Result<CsrMatrix> {
    if !(reg >= 0.0 && reg.is_finite()) {
        return Err(Error::param(format!("LLE ridge must be >= 0, got {reg}")));
    }
    if cloud.len() != graph.n {
        return Err(Error::DimensionMismatch {
            expected: graph.n,
            found: cloud.len(),
        });
    }
    let x = &cloud.points;
    let rows: Vec<Vec<(usize, f64)>> = (0..graph.n)
        .into_par_iter()
        .map(|i| {
            let nbrs = &graph.knn[i];
            let k = nbrs.len();
            let z = Array2::from_shape_fn((k, x.ncols()), |(a, d)| x[[nbrs[a].0, d]] - x[[i, d]]);
            let mut c = z.dot(&z.t());
            let trace: f64 = c.diag().sum();
            let ridge = reg * trace / k as f64;
            for a in 0..k {
                c[[a, a]] += ridge;
            }
            let w = solve_spd_ones(c, trace.max(1.0)).ok_or_else(|| {
                Error::Numerical(format!(
                    "local Gram matrix of point {i} is singular; use a ridge reg > 0"
                ))
            })?;
            let total: f64 = w.iter().sum();
            Ok(nbrs.iter().zip(w).map(|(&(j, _), wj)| (j, wj / total)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(CsrMatrix::from_rows(graph.n, rows))
}

/// LLE kernel `(I − W)ᵀ(I − W)`; minimized, constant vector in its null space.
pub fn kernel_lle(graph: &NeighborhoodGraph, cloud: &PointCloud, reg: f64) -> Result<KernelMatrix> {
    let w = lle_weights(graph, cloud, reg)?;
    let m = CsrMatrix::identity(graph.n).add_scaled(1.0, &w, -1.0);
    let mut k = KernelMatrix::sparse(m.gram(), Orientation::Minimize);
    k.trivial_vector = Some(unit_constant(graph.n));
    Ok(k)
}
