//! Exact samplers built on the spherical representation `x = r u`.
//!
//! A draw from an elliptical array law is `X = (A1)^1 ... (Ai)^i unrvec(r u) + M`,
//! with `u` uniform on the unit sphere of `R^m` and `r` drawn from the kernel's
//! radial law.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::array::{DataArray, Shape};
use crate::densities::{Kernel, KroneckerModel};
use crate::error::{Error, Result};

/// Seeded single-owner random stream. Same seed, same sequence.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream for task `task`, seeded by [`split_seed`].
    pub fn child(&self, task: u64) -> RandomStream {
        RandomStream::new(split_seed(self.seed, task))
    }

    pub fn std_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn chi_squared(&mut self, dof: f64) -> Result<f64> {
        let d = ChiSquared::new(dof)
            .map_err(|e| Error::Parameter(format!("chi-squared({dof}): {e}")))?;
        Ok(d.sample(&mut self.rng))
    }
}

/// Child seed for `(seed, task)`: the splitmix64 finalizer applied to
/// `seed + (task + 1) * 0x9E3779B97F4A7C15`.
pub fn split_seed(seed: u64, task: u64) -> u64 {
    let mut z = seed.wrapping_add(task.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A sampled radius and direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalDraw {
    pub r: f64,
    pub u: Vec<f64>,
}

impl SphericalDraw {
    /// The point `r u`.
    pub fn point(&self) -> Vec<f64> {
        self.u.iter().map(|x| self.r * x).collect()
    }
}

/// Array of i.i.d. standard normal cells.
pub fn sample_std_normal_array(shape: &Shape, stream: &mut RandomStream) -> DataArray {
    let data = (0..shape.len()).map(|_| stream.std_normal()).collect();
    DataArray::from_rvec(data, shape.clone()).expect("length matches shape")
}

/// Uniform direction on the unit sphere in `R^m`.
pub fn sample_sphere(m: usize, stream: &mut RandomStream) -> Vec<f64> {
    assert!(m >= 1, "sphere dimension must be at least 1");
    loop {
        let z: Vec<f64> = (0..m).map(|_| stream.std_normal()).collect();
        let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return z.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Draw from the radial law of `kernel` in dimension `m`.
pub fn sample_radius(kernel: &Kernel, m: usize, stream: &mut RandomStream) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    match kernel {
        Kernel::Normal => Ok(stream.chi_squared(m as f64)?.sqrt()),
        Kernel::StudentT(_) | Kernel::Cauchy => {
            let v = kernel.df().expect("t family");
            let z2: f64 = (0..m).map(|_| stream.std_normal().powi(2)).sum();
            let w = stream.chi_squared(v)?;
            Ok((z2 / (w / v)).sqrt())
        }
        Kernel::Custom(c) => Err(Error::Capability(format!(
            "no radial sampler for custom kernel '{}'",
            c.name
        ))),
    }
}

pub fn sample_spherical(kernel: &Kernel, m: usize, stream: &mut RandomStream) -> Result<SphericalDraw> {
    let u = sample_sphere(m, stream);
    let r = sample_radius(kernel, m, stream)?;
    Ok(SphericalDraw { r, u })
}

/// `n` independent draws from the model's elliptical law.
pub fn sample_elliptical(
    model: &KroneckerModel,
    n: usize,
    stream: &mut RandomStream,
) -> Result<Vec<DataArray>> {
    let shape = model.mean().shape().clone();
    let m = shape.len();
    let maps = model.factor_maps();
    (0..n)
        .map(|_| {
            let draw = sample_spherical(model.kernel(), m, stream)?;
            let z = DataArray::from_rvec(draw.point(), shape.clone())?;
            crate::multilinear::r_multiply(&maps, &z)?.add(model.mean())
        })
        .collect()
}

/// Parallel form of [`sample_elliptical`]: draws are split into `tasks` contiguous
/// chunks, chunk `t` uses the stream seeded by `split_seed(seed, t)`, and chunks
/// are concatenated in task order. Output depends on `(seed, n, tasks)` only.
pub fn sample_elliptical_parallel(
    model: &KroneckerModel,
    n: usize,
    seed: u64,
    tasks: usize,
) -> Result<Vec<DataArray>> {
    let tasks = tasks.max(1);
    let base = n / tasks;
    let extra = n % tasks;
    let chunks = (0..tasks)
        .into_par_iter()
        .map(|t| {
            let count = base + usize::from(t < extra);
            let mut stream = RandomStream::new(split_seed(seed, t as u64));
            sample_elliptical(model, count, &mut stream)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}
