#![allow(dead_code)]

use arrayvariate::{DataArray, DenseMatrix, FactorList, Kernel, KroneckerModel, ModeMaps, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| normal(rng))
}

/// Strictly diagonally dominant square matrix with diagonal entries of random
/// sign: |a_rr| >= 1 and the off-diagonal row sum stays below 1/2.
pub fn well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let bound = 0.5 / n as f64;
    DenseMatrix::from_fn(n, n, |r, c| {
        if r == c {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sign * (1.0 + 0.5 * rng.random::<f64>())
        } else {
            bound * (2.0 * rng.random::<f64>() - 1.0)
        }
    })
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let a = random_matrix(rng, n, n);
    a.add(&a.transpose()).unwrap().scale(0.5)
}

pub fn random_array(rng: &mut ChaCha8Rng, dims: &[usize]) -> DataArray {
    let shape = Shape::new(dims.to_vec()).unwrap();
    let data = (0..shape.len()).map(|_| normal(rng)).collect();
    DataArray::from_rvec(data, shape).unwrap()
}

/// Random dims of the given order whose product stays within `max_m`.
pub fn random_dims(rng: &mut ChaCha8Rng, order: usize, max_dim: usize, max_m: usize) -> Vec<usize> {
    loop {
        let dims: Vec<usize> = (0..order).map(|_| rng.random_range(1..=max_dim)).collect();
        if dims.iter().product::<usize>() <= max_m {
            return dims;
        }
    }
}

pub fn random_model(rng: &mut ChaCha8Rng, dims: &[usize], kernel: Kernel) -> KroneckerModel {
    let factors = dims.iter().map(|&d| well_conditioned(rng, d)).collect();
    let mean = random_array(rng, dims);
    KroneckerModel::new(mean, FactorList::new(factors).unwrap(), kernel).unwrap()
}

pub fn random_maps(rng: &mut ChaCha8Rng, out_dims: &[usize], in_dims: &[usize]) -> ModeMaps {
    ModeMaps::new(
        out_dims
            .iter()
            .zip(in_dims)
            .map(|(&q, &m)| random_matrix(rng, q, m))
            .collect(),
    )
    .unwrap()
}

/// Relative difference scaled by the larger magnitude (at least one).
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Dense Gaussian log-density via an independent Cholesky (nalgebra).
pub fn mvn_logpdf(mean: &[f64], cov: &DenseMatrix, x: &[f64]) -> f64 {
    let m = mean.len();
    let c = nalgebra::DMatrix::from_fn(m, m, |r, k| cov[(r, k)]);
    let chol = c.cholesky().expect("covariance must be positive definite");
    let d = nalgebra::DVector::from_fn(m, |i, _| x[i] - mean[i]);
    let y = chol.l().solve_lower_triangular(&d).unwrap();
    let logdet = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    -0.5 * y.norm_squared() - 0.5 * m as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * logdet
}

pub fn sym_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let m = nalgebra::DMatrix::from_fn(n, n, |r, c| a[(r, c)]);
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
