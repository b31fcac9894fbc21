//! Spectral dimensionality reduction with unpredictability constraints.
//!
//! Classical spectral methods (Laplacian eigenmaps, LLE, Isomap) take the
//! leading eigenvectors of a data-dependent kernel, which keeps projections
//! uncorrelated but lets later coordinates be deterministic functions of
//! earlier ones. [`embed::nonredundant_embed`] instead requires each new
//! projection to have zero conditional mean given the previous ones, estimated
//! with a Nadaraya–Watson smoother, and solves each step as a top eigenvector
//! of the kernel deflated by the smoother's dominant right singular vectors.

pub mod datasets;
pub mod diagnostics;
pub mod eigensolve;
pub mod embed;
pub mod error;
pub mod kernels;
pub mod smoother;
pub mod sparse;

pub use datasets::PointCloud;
pub use embed::{Embedding, Method};
pub use error::{Error, Result};
pub use kernels::{KernelMatrix, NeighborhoodGraph, Orientation};
pub use smoother::{DeflationBasis, Smoother};
