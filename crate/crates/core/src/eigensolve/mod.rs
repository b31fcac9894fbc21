//! Largest-eigenpair solvers for symmetric operators that are only ever
//! applied, never formed. The central operator is the deflated kernel
//! `(I − QQᵀ) K (I − QQᵀ)`, where `Q` is an orthonormal basis for the
//! smoother's retained right singular vectors, augmented with the constant
//! direction when the zero-mean constraint is enforced.

mod lanczos;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelMatrix, Orientation};
use crate::smoother::DeflationBasis;

pub(crate) use lanczos::{lanczos, Want};

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: ArrayView1<f64>, y: ArrayViewMut1<f64>);

    /// Rows form an orthonormal basis of directions the operator annihilates
    /// and that returned eigenvectors must be orthogonal to.
    fn constraint_basis(&self) -> Option<ArrayView2<'_, f64>> {
        None
    }
}

impl LinearOperator for KernelMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: ArrayView1<f64>, y: ArrayViewMut1<f64>) {
        KernelMatrix::apply(self, x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenConfig {
    /// Relative residual target `‖A f − λ f‖ ≤ tol·|λ|`.
    pub tol: f64,
    /// Budget of operator applications.
    pub max_iter: usize,
    pub seed: u64,
    /// Krylov subspace size; chosen from the request when unset.
    pub krylov_dim: Option<usize>,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            tol: 1e-9,
            max_iter: 10_000,
            seed: 0,
            krylov_dim: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Array1<f64>,
    /// Explicit residual `‖A f − λ f‖`.
    pub residual: f64,
    /// Set when the next Ritz value is within `1e-10·|λ|`.
    pub near_degenerate: bool,
}

/// Flips `v` so that its largest-magnitude entry is positive.
pub fn fix_sign(v: &mut Array1<f64>) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.mapv_inplace(|x| -x);
    }
}

fn residual(op: &dyn LinearOperator, value: f64, v: &Array1<f64>) -> f64 {
    let mut av = Array1::zeros(v.len());
    op.apply(v.view(), av.view_mut());
    av.scaled_add(-value, v);
    av.dot(&av).sqrt()
}

/// The `count` largest eigenpairs, mutually orthonormal, in descending order.
pub fn top_eigenpairs(
    op: &dyn LinearOperator,
    count: usize,
    cfg: &EigenConfig,
) -> Result<Vec<EigenPair>> {
    let ritz = lanczos(op, Want::Count(count), cfg)?;
    log::debug!(
        "lanczos: {} pairs after {} operator applications",
        count,
        ritz.matvecs
    );
    let values = ritz.values;
    let mut pairs = Vec::with_capacity(count);
    for (i, mut vector) in ritz.vectors.into_iter().enumerate() {
        fix_sign(&mut vector);
        let value = values[i];
        let next = values.get(i + 1).copied().or(ritz.next_value);
        let near_degenerate = next.is_some_and(|nv| (value - nv).abs() < 1e-10 * value.abs());
        if near_degenerate {
            log::warn!("eigenvalue {value:.6e} is nearly degenerate with its successor");
        }
        pairs.push(EigenPair {
            value,
            residual: residual(op, value, &vector),
            vector,
            near_degenerate,
        });
    }
    Ok(pairs)
}

pub fn top_eigenpair(op: &dyn LinearOperator, cfg: &EigenConfig) -> Result<EigenPair> {
    Ok(top_eigenpairs(op, 1, cfg)?.remove(0))
}

/// Kernel restricted to the orthogonal complement of a constraint subspace.
pub struct DeflatedOperator<'a> {
    kernel: &'a KernelMatrix,
    /// `q × N`, orthonormal rows.
    constraint: Option<Array2<f64>>,
}

/// Orthonormalizes candidate directions by two-pass modified Gram–Schmidt,
/// dropping those already in the span of earlier ones. Returns rows.
pub(crate) fn orthonormal_rows(candidates: &[ArrayView1<f64>], n: usize) -> Array2<f64> {
    let mut rows: Vec<Array1<f64>> = Vec::new();
    for c in candidates {
        let mut v = c.to_owned();
        let n0 = v.dot(&v).sqrt();
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &rows {
                let d = q.dot(&v);
                v.scaled_add(-d, q);
            }
        }
        let nv = v.dot(&v).sqrt();
        if nv > 1e-10 * n0 {
            rows.push(v / nv);
        }
    }
    let mut out = Array2::zeros((rows.len(), n));
    for (i, r) in rows.into_iter().enumerate() {
        out.row_mut(i).assign(&r);
    }
    out
}

/// Builds `x ↦ Π K Π x`, with `Π` the orthogonal projector away from
/// `span(V)` and, when `remove_constant` is set, the constant vector. With
/// no basis and no constant removal the operator is `K` itself.
pub fn deflated_operator<'a>(
    kernel: &'a KernelMatrix,
    basis: Option<&DeflationBasis>,
    remove_constant: bool,
) -> Result<DeflatedOperator<'a>> {
    let n = kernel.n();
    if kernel.orientation != Orientation::Maximize {
        return Err(Error::param(
            "deflation requires a maximization kernel; apply to_maximization first",
        ));
    }
    if let Some(b) = basis {
        if b.vectors.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.vectors.nrows(),
            });
        }
    }
    let ones = Array1::from_elem(n, 1.0);
    let mut candidates: Vec<ArrayView1<f64>> = Vec::new();
    if remove_constant {
        candidates.push(ones.view());
    }
    if let Some(b) = basis {
        candidates.extend(b.vectors.columns());
    }
    let constraint = (!candidates.is_empty()).then(|| orthonormal_rows(&candidates, n));
    Ok(DeflatedOperator { kernel, constraint })
}

impl DeflatedOperator<'_> {
    fn project(&self, v: &mut Array1<f64>) {
        if let Some(b) = &self.constraint {
            let coef = b.dot(&*v);
            for (row, c) in b.outer_iter().zip(coef.iter()) {
                v.scaled_add(-*c, &row);
            }
        }
    }

    /// Number of constraint directions projected out.
    pub fn constraint_rank(&self) -> usize {
        self.constraint.as_ref().map_or(0, |b| b.nrows())
    }

    pub fn kernel(&self) -> &KernelMatrix {
        self.kernel
    }
}

impl LinearOperator for DeflatedOperator<'_> {
    fn dim(&self) -> usize {
        self.kernel.n()
    }

    fn apply(&self, x: ArrayView1<f64>, mut y: ArrayViewMut1<f64>) {
        let mut px = x.to_owned();
        self.project(&mut px);
        let mut kx = Array1::zeros(px.len());
        self.kernel.apply(px.view(), kx.view_mut());
        self.project(&mut kx);
        y.assign(&kx);
    }

    fn constraint_basis(&self) -> Option<ArrayView2<'_, f64>> {
        self.constraint.as_ref().map(|b| b.view())
    }
}

/// Largest relative asymmetry `|xᵀAy − yᵀAx| / (‖x‖‖y‖‖A‖)` over random
/// probe pairs, with `‖A‖` estimated from the probes.
pub fn symmetry_defect(op: &dyn LinearOperator, probes: usize, seed: u64) -> f64 {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || Array1::from_shape_fn(n, |_| StandardNormal.sample(&mut rng));
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let (x, y) = (draw(), draw());
        let (mut ax, mut ay) = (Array1::zeros(n), Array1::zeros(n));
        op.apply(x.view(), ax.view_mut());
        op.apply(y.view(), ay.view_mut());
        let nx = x.dot(&x).sqrt();
        let ny = y.dot(&y).sqrt();
        let norm_est = (ax.dot(&ax).sqrt() / nx).max(ay.dot(&ay).sqrt() / ny);
        if norm_est == 0.0 {
            continue;
        }
        let defect = (x.dot(&ay) - y.dot(&ax)).abs() / (nx * ny * norm_est);
        worst = worst.max(defect);
    }
    worst
}
