//! Compressed sparse row storage, just enough for kernels and smoothers.

use ndarray::{Array2, ArrayView1, ArrayViewMut1};
use rayon::prelude::*;

/// Row-major compressed sparse matrix with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists. Columns are sorted and
    /// duplicates within a row are summed.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n_rows = rows.len();
        let mut indptr = Vec::with_capacity(n_rows + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                assert!(c < n_cols, "column {c} out of bounds ({n_cols})");
                if last == Some(c) {
                    *data.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    data.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            n_rows,
            n_cols,
            indptr,
            indices,
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows(n, (0..n).map(|i| vec![(i, 1.0)]).collect())
    }

    pub fn from_dense(dense: &Array2<f64>) -> Self {
        let rows = dense
            .outer_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(c, v)| (c, *v))
                    .collect()
            })
            .collect();
        Self::from_rows(dense.ncols(), rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.data[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(pos) => self.data[span.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// `y = A x`. Rows are independent so the parallel split is deterministic.
    pub fn mul_vec(&self, x: ArrayView1<f64>, mut y: ArrayViewMut1<f64>) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        let ys = y.as_slice_mut().expect("contiguous output");
        ys.par_iter_mut().enumerate().for_each(|(i, yi)| {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        });
    }

    /// `y = Aᵀ x`.
    pub fn mul_vec_transposed(&self, x: ArrayView1<f64>, mut y: ArrayViewMut1<f64>) {
        assert_eq!(x.len(), self.n_rows);
        assert_eq!(y.len(), self.n_cols);
        y.fill(0.0);
        for i in 0..self.n_rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for (c, v) in self.row(i) {
                y[c] += v * xi;
            }
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut rows = vec![Vec::new(); self.n_cols];
        for i in 0..self.n_rows {
            for (c, v) in self.row(i) {
                rows[c].push((i, v));
            }
        }
        CsrMatrix::from_rows(self.n_rows, rows)
    }

    /// Entry-wise `alpha * self + beta * other`.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> CsrMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let rows = (0..self.n_rows)
            .map(|i| {
                self.row(i)
                    .map(|(c, v)| (c, alpha * v))
                    .chain(other.row(i).map(|(c, v)| (c, beta * v)))
                    .collect()
            })
            .collect();
        CsrMatrix::from_rows(self.n_cols, rows)
    }

    /// `selfᵀ · self`, accumulated row by row.
    pub fn gram(&self) -> CsrMatrix {
        let mut acc: Vec<std::collections::BTreeMap<usize, f64>> =
            vec![Default::default(); self.n_cols];
        for i in 0..self.n_rows {
            let span = self.indptr[i]..self.indptr[i + 1];
            let cols = &self.indices[span.clone()];
            let vals = &self.data[span];
            for (a, &ca) in cols.iter().enumerate() {
                for (b, &cb) in cols.iter().enumerate() {
                    *acc[ca].entry(cb).or_insert(0.0) += vals[a] * vals[b];
                }
            }
        }
        let rows = acc.into_iter().map(|m| m.into_iter().collect()).collect();
        CsrMatrix::from_rows(self.n_cols, rows)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n_rows, self.n_cols));
        for i in 0..self.n_rows {
            for (c, v) in self.row(i) {
                out[[i, c]] += v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    #[test]
    fn matvec_matches_dense() {
        let dense = array![[1.0, 0.0, 2.0], [0.0, 0.0, 3.0], [4.0, 5.0, 0.0]];
        let a = CsrMatrix::from_dense(&dense);
        assert_eq!(a.nnz(), 5);
        let x = array![1.0, -1.0, 0.5];
        let mut y = Array1::zeros(3);
        a.mul_vec(x.view(), y.view_mut());
        assert_eq!(y, dense.dot(&x));
        a.mul_vec_transposed(x.view(), y.view_mut());
        assert_eq!(y, dense.t().dot(&x));
        assert_eq!(a.transpose().to_dense(), dense.t());
        assert_eq!(a.gram().to_dense(), dense.t().dot(&dense));
    }

    #[test]
    fn duplicate_entries_are_summed() {
        let a = CsrMatrix::from_rows(2, vec![vec![(1, 1.0), (0, 2.0), (1, 0.5)], vec![]]);
        assert_eq!(a.get(0, 1), 1.5);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.row_sums(), vec![3.5, 0.0]);
    }
}
