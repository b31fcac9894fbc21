use ndarray::Array1;

use super::{unit_constant, KernelMatrix, NeighborhoodGraph, Orientation};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

const SINKHORN_TOL: f64 = 1e-13;
const SINKHORN_MAX_ITER: usize = 200_000;

/// Laplacian-eigenmaps kernel. Heat weights `exp(-d²/(2σ²))` on the graph
/// edges plus unit self-weights are scaled symmetrically until every row
/// sums to one, so the random-walk matrix is itself symmetric and the
/// constant vector is its top eigenvector with eigenvalue 1.
///
/// `sigma` defaults to the mean edge length.
pub fn kernel_lem(graph: &NeighborhoodGraph, sigma: Option<f64>) -> Result<KernelMatrix> {
    graph.ensure_connected()?;
    let sigma = sigma.unwrap_or_else(|| graph.mean_edge_length());
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::param(format!("LEM bandwidth must be positive, got {sigma}")));
    }
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut rows: Vec<Vec<(usize, f64)>> = (0..graph.n).map(|i| vec![(i, 1.0)]).collect();
    for &(i, j, d) in &graph.edges {
        let w = (-d * d * inv).exp();
        rows[i].push((j, w));
        rows[j].push((i, w));
    }
    let w = CsrMatrix::from_rows(graph.n, rows);
    let scale = symmetric_sinkhorn(&w)?;
    let rows = (0..graph.n)
        .map(|i| w.row(i).map(|(j, v)| (j, v * (scale[i] * scale[j]))).collect())
        .collect();
    let p = CsrMatrix::from_rows(graph.n, rows);
    Ok(KernelMatrix {
        storage: super::KernelStorage::Sparse(p),
        orientation: Orientation::Maximize,
        trivial_vector: Some(unit_constant(graph.n)),
        lambda_max_bound: Some(1.0),
        centered: false,
    })
}

/// Positive scaling `s` with `diag(s) W diag(s)` doubly stochastic, for a
/// symmetric nonnegative `W` with positive diagonal.
pub fn symmetric_sinkhorn(w: &CsrMatrix) -> Result<Array1<f64>> {
    let n = w.n_rows();
    let mut s = Array1::from_elem(n, 1.0);
    let mut ws = Array1::zeros(n);
    for _ in 0..SINKHORN_MAX_ITER {
        w.mul_vec(s.view(), ws.view_mut());
        let err = s
            .iter()
            .zip(ws.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a * b - 1.0).abs()));
        if err <= SINKHORN_TOL {
            return Ok(s);
        }
        s.zip_mut_with(&ws, |a, b| *a = (*a / b).sqrt());
    }
    Err(Error::Numerical(
        "symmetric Sinkhorn scaling did not converge".into(),
    ))
}
