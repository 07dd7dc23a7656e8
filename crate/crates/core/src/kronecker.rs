//! The inverse Kronecker product `A ⊗ⁱ B = B ⊗ A` and shortcuts for chains of it.
//!
//! Chains are only materialized for checking and for the monolinear form; the
//! densities and samplers work on the factors directly.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Ordinary Kronecker product `A ⊗ B`.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (p, q) = (a.rows(), a.cols());
    let (r, s) = (b.rows(), b.cols());
    let mut out = DenseMatrix::zeros(p * r, q * s);
    for i in 0..p {
        for j in 0..q {
            let aij = a[(i, j)];
            for k in 0..r {
                for l in 0..s {
                    out[(i * r + k, j * s + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Inverse Kronecker product: block `(j, k)` of the result is `A (B)_{jk}`.
pub fn inv_kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    kron(b, a)
}

/// Ordered per-mode factors `(A1, ..., Ai)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorList(Vec<DenseMatrix>);

impl FactorList {
    pub fn new(factors: Vec<DenseMatrix>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::shape("factor list must not be empty"));
        }
        Ok(FactorList(factors))
    }

    pub fn factors(&self) -> &[DenseMatrix] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DenseMatrix> {
        self.0.iter()
    }

    /// Row counts `(m1, ..., mi)`.
    pub fn row_dims(&self) -> Vec<usize> {
        self.0.iter().map(DenseMatrix::rows).collect()
    }

    /// Column counts `(n1, ..., ni)`.
    pub fn col_dims(&self) -> Vec<usize> {
        self.0.iter().map(DenseMatrix::cols).collect()
    }

    pub fn into_inner(self) -> Vec<DenseMatrix> {
        self.0
    }

    fn require_square(&self) -> Result<()> {
        match self.0.iter().position(|a| !a.is_square()) {
            Some(j) => Err(Error::shape(format!(
                "factor {} is {}x{}, expected square",
                j + 1,
                self.0[j].rows(),
                self.0[j].cols()
            ))),
            None => Ok(()),
        }
    }
}

impl<'a> IntoIterator for &'a FactorList {
    type Item = &'a DenseMatrix;
    type IntoIter = std::slice::Iter<'a, DenseMatrix>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// `A1 ⊗ⁱ A2 ⊗ⁱ ... ⊗ⁱ Ai`, folded from the left.
pub fn inv_kron_chain(fs: &FactorList) -> DenseMatrix {
    let mut it = fs.iter();
    let first = it.next().expect("FactorList is non-empty").clone();
    it.fold(first, |acc, a| inv_kron(&acc, a))
}

/// Determinant of the expanded chain, `Π_j det(Aj)^{Π_{k≠j} m_k}`.
pub fn chain_det(fs: &FactorList) -> Result<f64> {
    fs.require_square()?;
    let dims = fs.row_dims();
    let m: usize = dims.iter().product();
    let mut det = 1.0;
    for (a, &mj) in fs.iter().zip(&dims) {
        let exp = (m / mj) as i32;
        det *= a.det()?.powi(exp);
    }
    Ok(det)
}

/// `log|det|` of the expanded chain, accumulated per factor.
pub fn chain_log_abs_det(fs: &FactorList) -> Result<f64> {
    fs.require_square()?;
    let dims = fs.row_dims();
    let m: usize = dims.iter().product();
    let mut acc = 0.0;
    for (j, (a, &mj)) in fs.iter().zip(&dims).enumerate() {
        let lu = a.lu()?;
        lu.check_nonsingular().map_err(|e| e.in_mode(j + 1))?;
        acc += (m / mj) as f64 * lu.log_abs_det();
    }
    Ok(acc)
}

/// Trace of the expanded chain, `Π_j tr(Aj)`.
pub fn chain_trace(fs: &FactorList) -> Result<f64> {
    fs.require_square()?;
    fs.iter().map(DenseMatrix::trace).product()
}

/// The commutation matrix `K(m, n)`: `K(m, n) vec(X) = vec(X')` for `X` of size `m x n`,
/// with `vec` stacking columns.
pub fn commutation_matrix(m: usize, n: usize) -> DenseMatrix {
    let mut k = DenseMatrix::zeros(m * n, m * n);
    for i in 0..m {
        for j in 0..n {
            // X[i,j] sits at i + j m in vec(X) and at j + i n in vec(X')
            k[(j + i * n, i + j * m)] = 1.0;
        }
    }
    k
}
