//! Algorithm-specific kernel matrices and their normalization to a common
//! maximization orientation.

mod graph;
mod isomap;
mod lem;
mod lle;

use ndarray::{Array1, Array2, ArrayView1, ArrayViewMut1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{self, EigenConfig};
use crate::error::Result;
use crate::sparse::CsrMatrix;

pub use graph::{knn_graph, Metric, NeighborhoodGraph};
pub(crate) use graph::nearest_rows;
pub use isomap::{geodesic_distances, kernel_isomap};
pub use lem::{kernel_lem, symmetric_sinkhorn};
pub use lle::{kernel_lle, lle_weights, DEFAULT_LLE_REG};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelStorage {
    Sparse(CsrMatrix),
    Dense(Array2<f64>),
}

/// Symmetric `N × N` kernel together with the direction in which its
/// quadratic form is optimized.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub storage: KernelStorage,
    pub orientation: Orientation,
    /// Known extreme eigenvector (unit norm) that embeddings must skip.
    pub trivial_vector: Option<Array1<f64>>,
    pub lambda_max_bound: Option<f64>,
    /// When set, the kernel acts as `H K H` with `H = I - 11ᵀ/N`.
    pub centered: bool,
}

pub(crate) fn unit_constant(n: usize) -> Array1<f64> {
    Array1::from_elem(n, 1.0 / (n as f64).sqrt())
}

fn subtract_mean(mut v: ArrayViewMut1<f64>) {
    let mean = v.sum() / v.len() as f64;
    v.mapv_inplace(|x| x - mean);
}

impl KernelMatrix {
    pub fn sparse(m: CsrMatrix, orientation: Orientation) -> Self {
        KernelMatrix {
            storage: KernelStorage::Sparse(m),
            orientation,
            trivial_vector: None,
            lambda_max_bound: None,
            centered: false,
        }
    }

    pub fn dense(m: Array2<f64>, orientation: Orientation) -> Self {
        KernelMatrix {
            storage: KernelStorage::Dense(m),
            orientation,
            trivial_vector: None,
            lambda_max_bound: None,
            centered: false,
        }
    }

    pub fn n(&self) -> usize {
        match &self.storage {
            KernelStorage::Sparse(m) => m.n_rows(),
            KernelStorage::Dense(m) => m.nrows(),
        }
    }

    /// `y = K x` without centering.
    fn apply_raw(&self, x: ArrayView1<f64>, mut y: ArrayViewMut1<f64>) {
        match &self.storage {
            KernelStorage::Sparse(m) => m.mul_vec(x, y),
            KernelStorage::Dense(m) => {
                let ys = y.as_slice_mut().expect("contiguous output");
                ys.par_iter_mut()
                    .enumerate()
                    .for_each(|(i, yi)| *yi = m.row(i).dot(&x));
            }
        }
    }

    /// `y = K x`, or `y = H K H x` for centered kernels.
    pub fn apply(&self, x: ArrayView1<f64>, mut y: ArrayViewMut1<f64>) {
        if self.centered {
            let mut xc = x.to_owned();
            subtract_mean(xc.view_mut());
            self.apply_raw(xc.view(), y.view_mut());
            subtract_mean(y);
        } else {
            self.apply_raw(x, y);
        }
    }

    pub fn mul(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let mut y = Array1::zeros(self.n());
        self.apply(x, y.view_mut());
        y
    }

    /// Dense copy of the operator the kernel represents (including centering).
    pub fn to_dense(&self) -> Array2<f64> {
        let mut k = match &self.storage {
            KernelStorage::Sparse(m) => m.to_dense(),
            KernelStorage::Dense(m) => m.clone(),
        };
        if self.centered {
            let n = k.nrows() as f64;
            let row_means = k.sum_axis(ndarray::Axis(1)) / n;
            let col_means = k.sum_axis(ndarray::Axis(0)) / n;
            let grand = row_means.sum() / n;
            for ((i, j), v) in k.indexed_iter_mut() {
                *v += grand - row_means[i] - col_means[j];
            }
        }
        k
    }

    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            KernelStorage::Sparse(m) => m.max_abs(),
            KernelStorage::Dense(m) => m.iter().fold(0.0, |a, v| a.max(v.abs())),
        }
    }

    /// `max |K_ij - K_ji|` over the stored entries.
    pub fn asymmetry(&self) -> f64 {
        match &self.storage {
            KernelStorage::Sparse(m) => (0..m.n_rows())
                .flat_map(|i| m.row(i).map(move |(j, v)| (i, j, v)))
                .fold(0.0, |a, (i, j, v)| a.max((v - m.get(j, i)).abs())),
            KernelStorage::Dense(m) => {
                let mut worst = 0.0f64;
                for i in 0..m.nrows() {
                    for j in 0..i {
                        worst = worst.max((m[[i, j]] - m[[j, i]]).abs());
                    }
                }
                worst
            }
        }
    }

    /// Largest eigenvalue, from the stored bound or a Krylov solve.
    pub fn lambda_max(&self) -> Result<f64> {
        if let Some(b) = self.lambda_max_bound.filter(|b| b.is_finite()) {
            return Ok(b);
        }
        let cfg = EigenConfig {
            tol: 1e-10,
            ..EigenConfig::default()
        };
        Ok(eigensolve::top_eigenpair(self, &cfg)?.value)
    }
}

/// Turns a minimization kernel into the equivalent maximization kernel
/// `λ_max I − K`. Eigenvectors are shared and the eigenvalue order reverses.
pub fn to_maximization(k: KernelMatrix) -> Result<KernelMatrix> {
    if k.orientation == Orientation::Maximize {
        log::warn!("kernel is already oriented for maximization; leaving it unchanged");
        return Ok(k);
    }
    let lambda = k.lambda_max()?;
    let storage = match k.storage {
        KernelStorage::Sparse(m) => {
            let shifted = CsrMatrix::identity(m.n_rows()).add_scaled(lambda, &m, -1.0);
            KernelStorage::Sparse(shifted)
        }
        KernelStorage::Dense(mut m) => {
            m.mapv_inplace(|v| -v);
            for i in 0..m.nrows() {
                m[[i, i]] += lambda;
            }
            KernelStorage::Dense(m)
        }
    };
    Ok(KernelMatrix {
        storage,
        orientation: Orientation::Maximize,
        trivial_vector: k.trivial_vector,
        lambda_max_bound: Some(lambda),
        centered: k.centered,
    })
}

/// Marks the kernel as double-centered; the centering is applied on the fly.
pub fn center_kernel(mut k: KernelMatrix) -> KernelMatrix {
    k.centered = true;
    k
}
