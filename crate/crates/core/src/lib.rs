//! Array-variate random variables with Kronecker-structured scale.
//!
//! The crate covers the array algebra (rvec, the inverse Kronecker product,
//! R-matrix multiplication), exact log-densities of the array normal,
//! elliptical and t families, exact samplers based on the spherical
//! representation, multilinear least squares, the monolinear (vectorized) form
//! of the array normal, and a Monte Carlo verification harness.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod densities;
pub mod error;
pub mod format;
pub mod kronecker;
pub mod ks;
pub mod linalg;
pub mod monolinear;
pub mod multilinear;
pub mod quad;
pub mod sampling;
pub mod verify;

pub use array::{linear_index, rvec, unrvec, DataArray, Shape};
pub use densities::{Kernel, KroneckerModel};
pub use error::{Error, Result};
pub use kronecker::{inv_kron, inv_kron_chain, FactorList};
pub use linalg::DenseMatrix;
pub use monolinear::{to_monolinear, MonolinearNormal};
pub use multilinear::{multilinear_lstsq, r_multiply, ModeMaps};
pub use sampling::RandomStream;
pub use verify::McReport;
