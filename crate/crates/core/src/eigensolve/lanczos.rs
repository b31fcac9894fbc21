//! Thick-restart Lanczos for the largest eigenpairs of a symmetric operator,
//! with full two-pass reorthogonalization. The projected matrix is the
//! Rayleigh quotient `QᵀAQ` assembled from the Gram–Schmidt coefficients, so
//! restarts need no special arrowhead bookkeeping.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{EigenConfig, LinearOperator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) enum Want {
    /// The `k` largest eigenpairs.
    Count(usize),
    /// Every eigenpair at or above `fraction × λ_max`.
    AboveFraction(f64),
}

#[derive(Debug)]
pub(crate) struct RitzPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Array1<f64>>,
    /// Largest Ritz value not returned, when one was computed.
    pub next_value: Option<f64>,
    pub matvecs: usize,
}

fn project_out(constraint: Option<ArrayView2<f64>>, w: &mut Array1<f64>) {
    if let Some(b) = constraint {
        for row in b.outer_iter() {
            let c = row.dot(w);
            w.scaled_add(-c, &row);
        }
    }
}

/// Standard normal draw made orthogonal to the constraints and the current
/// basis; `None` once the admissible space is exhausted.
fn fresh_direction(
    rng: &mut ChaCha8Rng,
    n: usize,
    constraint: Option<ArrayView2<f64>>,
    basis: &[Array1<f64>],
) -> Option<Array1<f64>> {
    for _ in 0..3 {
        let mut v: Array1<f64> = Array1::from_shape_fn(n, |_| StandardNormal.sample(rng));
        let n0 = v.dot(&v).sqrt();
        for _ in 0..2 {
            project_out(constraint, &mut v);
            for q in basis {
                let c = q.dot(&v);
                v.scaled_add(-c, q);
            }
        }
        let nv = v.dot(&v).sqrt();
        if nv > 1e-8 * n0 {
            v /= nv;
            return Some(v);
        }
    }
    None
}

pub(crate) fn lanczos(op: &dyn LinearOperator, want: Want, cfg: &EigenConfig) -> Result<RitzPairs> {
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::param(format!("eigensolver tolerance must be positive, got {}", cfg.tol)));
    }
    let n = op.dim();
    let constraint = op.constraint_basis();
    let avail = n.saturating_sub(constraint.map_or(0, |b| b.nrows()));
    if avail == 0 {
        return Err(Error::Degenerate("constraints leave no admissible directions".into()));
    }
    let initial = match want {
        Want::Count(k) => {
            if k == 0 || k > avail {
                return Err(Error::param(format!(
                    "requested {k} eigenpairs from a {avail}-dimensional admissible space"
                )));
            }
            k
        }
        Want::AboveFraction(f) => {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::param(format!("cutoff fraction must lie in (0,1), got {f}")));
            }
            8.min(avail)
        }
    };
    let mut m = cfg
        .krylov_dim
        .unwrap_or((2 * initial + 20).max(50))
        .max(initial + 1)
        .min(avail);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut basis: Vec<Array1<f64>> = Vec::with_capacity(m + 1);
    basis.push(fresh_direction(&mut rng, n, constraint, &basis).ok_or_else(|| {
        Error::Degenerate("could not draw an admissible start vector".into())
    })?);
    let mut t = Array2::<f64>::zeros((m, m));
    let mut matvecs = 0usize;
    let mut anorm = 0.0f64;
    let mut w = Array1::zeros(n);

    loop {
        // Expand the Krylov basis to m vectors.
        let mut beta;
        let mut exhausted = false;
        let mut j = basis.len() - 1;
        loop {
            op.apply(basis[j].view(), w.view_mut());
            matvecs += 1;
            let w0 = w.dot(&w).sqrt();
            for _ in 0..2 {
                project_out(constraint, &mut w);
                for (i, q) in basis.iter().enumerate() {
                    let c = q.dot(&w);
                    w.scaled_add(-c, q);
                    t[[i, j]] += c;
                }
            }
            for i in 0..j {
                t[[j, i]] = t[[i, j]];
            }
            beta = w.dot(&w).sqrt();
            anorm = anorm.max(w0);
            if j + 1 == m {
                break;
            }
            if beta <= 1e-10 * anorm || beta == 0.0 {
                match fresh_direction(&mut rng, n, constraint, &basis) {
                    Some(v) => basis.push(v),
                    None => {
                        exhausted = true;
                        beta = 0.0;
                        break;
                    }
                }
            } else {
                basis.push(&w / beta);
            }
            j += 1;
        }

        // Rayleigh–Ritz on the projected matrix.
        let mm = basis.len();
        if mm == avail {
            exhausted = true;
        }
        let proj = DMatrix::from_fn(mm, mm, |a, b| 0.5 * (t[[a, b]] + t[[b, a]]));
        let eig = SymmetricEigen::new(proj);
        let mut order: Vec<usize> = (0..mm).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let resid: Vec<f64> = order
            .iter()
            .map(|&i| beta * eig.eigenvectors[(mm - 1, i)].abs())
            .collect();
        anorm = anorm.max(theta.iter().fold(0.0, |a, v| a.max(v.abs())));

        let (returned, need, converged) = match want {
            Want::Count(k) => {
                let ok = exhausted
                    || (0..k).all(|i| resid[i] <= cfg.tol * theta[i].abs().max(1e-6 * anorm));
                (k, k, ok)
            }
            Want::AboveFraction(f) => {
                let cut = f * theta[0];
                let above = theta.iter().take_while(|&&v| v >= cut).count();
                let ok = if exhausted {
                    true
                } else if above >= mm {
                    false
                } else {
                    (0..above).all(|i| resid[i] <= cfg.tol * theta[0].abs())
                        && theta[above] + resid[above] < cut
                };
                (above, (above + 1).min(mm), ok)
            }
        };
        if exhausted && returned > mm {
            return Err(Error::Degenerate(format!(
                "admissible space holds only {mm} directions, {returned} requested"
            )));
        }

        if converged {
            let ritz = |col: usize| {
                let s = eig.eigenvectors.column(order[col]);
                let mut x = Array1::zeros(n);
                for (q, &c) in basis.iter().zip(s.iter()) {
                    x.scaled_add(c, q);
                }
                let norm = x.dot(&x).sqrt();
                x / norm
            };
            return Ok(RitzPairs {
                values: theta[..returned].to_vec(),
                vectors: (0..returned).map(ritz).collect(),
                next_value: theta.get(returned).copied(),
                matvecs,
            });
        }
        if matvecs >= cfg.max_iter {
            let worst = resid[..need.min(mm)].iter().fold(0.0f64, |a, &r| a.max(r));
            return Err(Error::Convergence {
                step: None,
                residual: worst,
                iterations: matvecs,
            });
        }

        // Thick restart: keep the leading Ritz vectors plus the residual direction.
        if need + 10 > m / 2 && m < avail {
            m = (2 * m).max(need + 20).min(avail);
        }
        let keep = (need + (mm - need) / 2).max(need).min(mm - 1).min(m - 1);
        let mut next: Vec<Array1<f64>> = Vec::with_capacity(m + 1);
        for &col in &order[..keep] {
            let s = eig.eigenvectors.column(col);
            let mut x = Array1::zeros(n);
            for (q, &c) in basis.iter().zip(s.iter()) {
                x.scaled_add(c, q);
            }
            next.push(x);
        }
        t = Array2::zeros((m, m));
        for (i, &th) in theta.iter().take(keep).enumerate() {
            t[[i, i]] = th;
        }
        let resume = if beta > 1e-10 * anorm {
            Some(&w / beta)
        } else {
            fresh_direction(&mut rng, n, constraint, &next)
        };
        match resume {
            Some(v) => next.push(v),
            None => {
                return Err(Error::Degenerate("Krylov restart found no new direction".into()));
            }
        }
        basis = next;
    }
}
