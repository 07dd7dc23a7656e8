//! The monolinear form of the array normal: `rvec(X) ~ N(rvec(M), K K')` with
//! `K = A1 ⊗ⁱ ... ⊗ⁱ Ai`, plus Gaussian marginals and conditionals on it.
//!
//! Index sets are one-based positions in rvec order.

use crate::array::DataArray;
use crate::densities::KroneckerModel;
use crate::error::{Error, Result};
use crate::kronecker::inv_kron_chain;
use crate::linalg::{Cholesky, DenseMatrix};

/// Largest `m` for which the `m x m` covariance is materialized.
pub const MAX_MATERIALIZED: usize = 4096;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Multivariate normal with dense covariance.
#[derive(Debug, Clone)]
pub struct MonolinearNormal {
    mean: Vec<f64>,
    cov: DenseMatrix,
    chol: Cholesky,
}

impl MonolinearNormal {
    pub fn new(mean: Vec<f64>, cov: DenseMatrix) -> Result<Self> {
        if cov.rows() != mean.len() || cov.cols() != mean.len() {
            return Err(Error::shape(format!(
                "covariance is {}x{}, mean has length {}",
                cov.rows(),
                cov.cols(),
                mean.len()
            )));
        }
        if !cov.is_symmetric(1e-10 * cov.max_abs().max(1.0)) {
            return Err(Error::Parameter("covariance is not symmetric".into()));
        }
        let chol = cov.cholesky()?;
        Ok(MonolinearNormal { mean, cov, chol })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &DenseMatrix {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn logpdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::shape("point dimension differs from distribution"));
        }
        let d: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        let y = self.chol.forward(&d);
        let q: f64 = y.iter().map(|v| v * v).sum();
        Ok(-0.5 * q - 0.5 * self.dim() as f64 * LN_2PI - 0.5 * self.chol.log_det())
    }

    /// Marginal law of the coordinates in `keep`.
    pub fn marginal(&self, keep: &[usize]) -> Result<MonolinearNormal> {
        let s = self.zero_based(keep, "keep")?;
        MonolinearNormal::new(s.iter().map(|&i| self.mean[i]).collect(), self.cov.select(&s, &s))
    }

    /// Law of the remaining coordinates given `x_G = values`.
    pub fn conditional(&self, given: &[usize], values: &[f64]) -> Result<MonolinearNormal> {
        let g = self.zero_based(given, "given")?;
        if g.len() == self.dim() {
            return Err(Error::shape("conditioning set must be a proper subset"));
        }
        if values.len() != g.len() {
            return Err(Error::shape(format!(
                "{} conditioning values for {} indices",
                values.len(),
                g.len()
            )));
        }
        let s: Vec<usize> = (0..self.dim()).filter(|i| !g.contains(i)).collect();
        let cov_gg = self.cov.select(&g, &g).cholesky()?;
        let cov_sg = self.cov.select(&s, &g);

        let resid: Vec<f64> = g.iter().zip(values).map(|(&i, v)| v - self.mean[i]).collect();
        let w = cov_gg.solve(&resid)?;
        let shift = cov_sg.matvec(&w)?;
        let mean: Vec<f64> = s.iter().zip(&shift).map(|(&i, d)| self.mean[i] + d).collect();

        // Λ_SS - Λ_SG Λ_GG⁻¹ Λ_GS, through B = L⁻¹ Λ_GS
        let mut cov = self.cov.select(&s, &s);
        let b: Vec<Vec<f64>> = (0..s.len()).map(|r| cov_gg.forward(cov_sg.row(r))).collect();
        for r in 0..s.len() {
            for c in 0..s.len() {
                cov[(r, c)] -= b[r].iter().zip(&b[c]).map(|(x, y)| x * y).sum::<f64>();
            }
        }
        MonolinearNormal::new(mean, cov)
    }

    fn zero_based(&self, idx: &[usize], what: &str) -> Result<Vec<usize>> {
        if idx.is_empty() {
            return Err(Error::shape(format!("{what} index set is empty")));
        }
        let m = self.dim();
        let mut seen = vec![false; m];
        idx.iter()
            .map(|&i| {
                if i == 0 || i > m {
                    return Err(Error::Index { mode: 1, index: i, dim: m });
                }
                if std::mem::replace(&mut seen[i - 1], true) {
                    return Err(Error::shape(format!("{what} index {i} repeated")));
                }
                Ok(i - 1)
            })
            .collect()
    }
}

/// `N(rvec(M), K K')` with `K` the expanded factor chain.
pub fn to_monolinear(model: &KroneckerModel) -> Result<MonolinearNormal> {
    let m = model.dim();
    if m > MAX_MATERIALIZED {
        return Err(Error::Capacity(format!(
            "m = {m} exceeds the materialization limit {MAX_MATERIALIZED}"
        )));
    }
    let k = inv_kron_chain(model.factors());
    let mut cov = k.matmul(&k.transpose())?;
    // symmetrize rounding
    for i in 0..m {
        for j in 0..i {
            let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    MonolinearNormal::new(model.mean().rvec().to_vec(), cov)
}

/// Monolinear log-density at `rvec(X)`.
pub fn monolinear_logpdf(dist: &MonolinearNormal, x: &DataArray) -> Result<f64> {
    dist.logpdf(x.rvec())
}
