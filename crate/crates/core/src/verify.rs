//! Monte Carlo checks of the densities and samplers.
//!
//! Every check is a pure function of its inputs and `(n, seed)` and returns a
//! [`McReport`]. Decision rules: `|z| <= 3` for normalization, max entrywise
//! `|z| <= 5` for covariance, KS p-value `>= 0.01` for radial laws.

use std::fmt;
use std::str::FromStr;

use crate::densities::{radial_pdf, Kernel, KroneckerModel};
use crate::error::{Error, Result};
use crate::kronecker::inv_kron_chain;
use crate::ks::{ks_pvalue, ks_statistic};
use crate::quad::{integrate, integrate_to_infinity};
use crate::sampling::{sample_elliptical, sample_radius, split_seed, RandomStream};

pub const NORMALIZATION_MAX_DIM: usize = 6;
pub const COVARIANCE_MAX_DIM: usize = 16;
pub const Z_MOMENT: f64 = 3.0;
pub const Z_COVARIANCE: f64 = 5.0;
pub const KS_ALPHA: f64 = 0.01;

/// Outcome of one Monte Carlo check.
///
/// For KS checks `estimate` holds the p-value, `target` the significance level
/// and `statistic` the KS distance; `stderr` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub name: String,
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
    pub statistic: f64,
    pub passed: bool,
    pub n: usize,
    pub seed: u64,
}

impl fmt::Display for McReport {
    /// `name estimate stderr target statistic passed n seed`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:.16e} {:.16e} {:.16e} {:.16e} {} {} {}",
            self.name,
            self.estimate,
            self.stderr,
            self.target,
            self.statistic,
            self.passed,
            self.n,
            self.seed
        )
    }
}

impl FromStr for McReport {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |msg: &str| Error::Parse { line: 1, msg: msg.to_string() };
        let tok: Vec<&str> = s.split_whitespace().collect();
        if tok.len() != 8 {
            return Err(parse_err("report record needs 8 fields"));
        }
        let num = |t: &str| t.parse::<f64>().map_err(|_| parse_err(&format!("bad number '{t}'")));
        Ok(McReport {
            name: tok[0].to_string(),
            estimate: num(tok[1])?,
            stderr: num(tok[2])?,
            target: num(tok[3])?,
            statistic: num(tok[4])?,
            passed: tok[5].parse().map_err(|_| parse_err("passed must be true or false"))?,
            n: tok[6].parse().map_err(|_| parse_err("bad sample count"))?,
            seed: tok[7].parse().map_err(|_| parse_err("bad seed"))?,
        })
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Importance-sampling estimate of `∫ exp(logpdf_elliptical)`.
///
/// The proposal is the model with its scale doubled: Gaussian (covariance
/// `4 K K'`) for the normal and custom kernels, and a t law with the same degrees
/// of freedom for t kernels.
pub fn check_normalization(model: &KroneckerModel, n: usize, seed: u64) -> Result<McReport> {
    let m = model.dim();
    if m > NORMALIZATION_MAX_DIM {
        return Err(Error::Capacity(format!(
            "normalization check supports m <= {NORMALIZATION_MAX_DIM}, got {m}"
        )));
    }
    if n < 2 {
        return Err(Error::Parameter("need at least two samples".into()));
    }
    let proposal_kernel = match model.kernel() {
        Kernel::StudentT(v) => Kernel::StudentT(*v),
        Kernel::Cauchy => Kernel::Cauchy,
        _ => Kernel::Normal,
    };
    let proposal = model.with_kernel(proposal_kernel)?.with_scaled_factor(1, 2.0)?;
    let mut stream = RandomStream::new(seed);
    let draws = sample_elliptical(&proposal, n, &mut stream)?;
    let weights = draws
        .iter()
        .map(|x| Ok((model.logpdf_elliptical(x)? - proposal.logpdf_elliptical(x)?).exp()))
        .collect::<Result<Vec<f64>>>()?;
    let (estimate, stderr) = mean_and_stderr(&weights);
    let z = (estimate - 1.0) / stderr;
    Ok(McReport {
        name: format!("normalization:{}", model.kernel().name()),
        estimate,
        stderr,
        target: 1.0,
        statistic: z,
        passed: z.abs() <= Z_MOMENT,
        n,
        seed,
    })
}

/// `∫ exp(logpdf_elliptical)` over the real line for a one-cell model, by quadrature.
pub fn normalization_by_quadrature(model: &KroneckerModel, tol: f64) -> Result<f64> {
    if model.dim() != 1 {
        return Err(Error::Capacity("quadrature normalization needs m = 1".into()));
    }
    let center = model.mean().rvec()[0];
    let shape = model.mean().shape().clone();
    let density = |x: f64| {
        let a = crate::array::DataArray::from_rvec(vec![x], shape.clone()).expect("one cell");
        model.logpdf_elliptical(&a).map(f64::exp).unwrap_or(f64::NAN)
    };
    let upper = integrate_to_infinity(|t| density(center + t), 0.0, 0.5 * tol)?;
    let lower = integrate_to_infinity(|t| density(center - t), 0.0, 0.5 * tol)?;
    Ok(upper + lower)
}

/// Target covariance of `rvec(X)`: `K K'` for the normal kernel and
/// `v/(v-2) K K'` for t kernels with `v > 2`.
pub fn target_covariance(model: &KroneckerModel) -> Result<crate::linalg::DenseMatrix> {
    let scale = match model.kernel() {
        Kernel::Normal => 1.0,
        k => match k.df() {
            Some(v) if v > 2.0 => v / (v - 2.0),
            Some(v) => {
                return Err(Error::Parameter(format!("t law with v = {v} has no covariance")))
            }
            None => return Err(Error::Capability("no covariance for custom kernels".into())),
        },
    };
    let k = inv_kron_chain(model.factors());
    Ok(k.matmul(&k.transpose())?.scale(scale))
}

/// Sample covariance of `rvec(X)` against [`target_covariance`], entrywise.
pub fn check_covariance(model: &KroneckerModel, n: usize, seed: u64) -> Result<McReport> {
    let m = model.dim();
    if m > COVARIANCE_MAX_DIM {
        return Err(Error::Capacity(format!(
            "covariance check supports m <= {COVARIANCE_MAX_DIM}, got {m}"
        )));
    }
    if n < 2 {
        return Err(Error::Parameter("need at least two samples".into()));
    }
    let target = target_covariance(model)?;
    let mut stream = RandomStream::new(seed);
    let draws = sample_elliptical(model, n, &mut stream)?;
    let nf = n as f64;
    let mut mean = vec![0.0; m];
    for x in &draws {
        for (s, v) in mean.iter_mut().zip(x.rvec()) {
            *s += v;
        }
    }
    mean.iter_mut().for_each(|s| *s /= nf);

    // per entry: running sums of the centred product and its square
    let mut sum = vec![0.0; m * m];
    let mut sum_sq = vec![0.0; m * m];
    let mut d = vec![0.0; m];
    for x in &draws {
        for ((di, v), mu) in d.iter_mut().zip(x.rvec()).zip(&mean) {
            *di = v - mu;
        }
        for a in 0..m {
            for b in a..m {
                let p = d[a] * d[b];
                sum[a * m + b] += p;
                sum_sq[a * m + b] += p * p;
            }
        }
    }
    let mut worst = (0.0f64, 0.0, 0.0, 0.0);
    for a in 0..m {
        for b in a..m {
            let s = sum[a * m + b];
            let est = s / (nf - 1.0);
            let mean_p = s / nf;
            let var_p = (sum_sq[a * m + b] / nf - mean_p * mean_p).max(0.0) * nf / (nf - 1.0);
            let se = (var_p / nf).sqrt();
            let diff = est - target[(a, b)];
            let z = if se > 0.0 {
                diff.abs() / se
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            if z >= worst.0 {
                worst = (z, est, se, target[(a, b)]);
            }
        }
    }
    let (z, estimate, stderr, tgt) = worst;
    Ok(McReport {
        name: format!("covariance:{}", model.kernel().name()),
        estimate,
        stderr,
        target: tgt,
        statistic: z,
        passed: z <= Z_COVARIANCE,
        n,
        seed,
    })
}

/// CDF of the radial law at each point of `sorted` (ascending), accumulated by
/// quadrature between consecutive points.
pub fn radial_cdf_sorted(kernel: &Kernel, k: usize, sorted: &[f64]) -> Result<Vec<f64>> {
    radial_pdf(kernel, 1.0, k)?;
    let pdf = |r: f64| radial_pdf(kernel, r, k).unwrap_or(f64::NAN);
    let mut acc = 0.0;
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(sorted.len());
    for &r in sorted {
        if r < prev {
            return Err(Error::Domain("radii must be sorted ascending".into()));
        }
        acc += integrate(pdf, prev, r, 1e-13)?;
        prev = r;
        out.push(acc.min(1.0));
    }
    Ok(out)
}

/// `∫_0^∞ k(r) dr`.
pub fn radial_total_mass(kernel: &Kernel, k: usize) -> Result<f64> {
    radial_pdf(kernel, 1.0, k)?;
    integrate_to_infinity(|r| radial_pdf(kernel, r, k).unwrap_or(f64::NAN), 0.0, 1e-10)
}

/// KS test of sampled radii against the quadrature CDF of the radial pdf.
pub fn check_radial(kernel: &Kernel, m: usize, n: usize, seed: u64) -> Result<McReport> {
    if m == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    let mut stream = RandomStream::new(seed);
    let mut radii = (0..n)
        .map(|_| sample_radius(kernel, m, &mut stream))
        .collect::<Result<Vec<_>>>()?;
    radii.sort_by(f64::total_cmp);
    let cdf = radial_cdf_sorted(kernel, m, &radii)?;
    let d = ks_statistic(&cdf);
    let p = ks_pvalue(d, n);
    Ok(McReport {
        name: format!("radial:{}:m={m}", kernel.name()),
        estimate: p,
        stderr: 0.0,
        target: KS_ALPHA,
        statistic: d,
        passed: p >= KS_ALPHA,
        n,
        seed,
    })
}

/// Every applicable check for `model`, each seeded by `split_seed(seed, index)`.
pub fn verify_model(model: &KroneckerModel, n: usize, seed: u64) -> Result<Vec<McReport>> {
    let m = model.dim();
    let mut reports = Vec::new();
    if m <= NORMALIZATION_MAX_DIM {
        reports.push(check_normalization(model, n, split_seed(seed, 0))?);
    }
    let has_fourth_moment = match model.kernel() {
        Kernel::Normal => true,
        k => k.df().is_some_and(|v| v > 4.0),
    };
    if m <= COVARIANCE_MAX_DIM && has_fourth_moment {
        reports.push(check_covariance(model, n, split_seed(seed, 1))?);
    }
    if !matches!(model.kernel(), Kernel::Custom(_)) {
        reports.push(check_radial(model.kernel(), m, n, split_seed(seed, 2))?);
    }
    Ok(reports)
}
