//! Spherical kernels, the radial law, and log-densities of array normal,
//! elliptical and t variables with Kronecker-structured scale.
//!
//! Everything is evaluated in log space. The only determinant that appears is
//! accumulated factor by factor as `Σ_j (Π_{k≠j} m_k) log|det A_j|`, so the
//! `m x m` scale matrix is never formed.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use statrs::function::gamma::ln_gamma;

use crate::array::DataArray;
use crate::error::{Error, Result};
use crate::kronecker::{chain_log_abs_det, FactorList};
use crate::linalg::DenseMatrix;
use crate::multilinear::{r_multiply, ModeMaps};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

type LogShapeFn = dyn Fn(f64) -> f64 + Send + Sync;
type LogNormalizerFn = dyn Fn(usize) -> f64 + Send + Sync;

/// A user-supplied spherical kernel `f(t) = c_k g(t)`, given in log form.
#[derive(Clone)]
pub struct CustomKernel {
    pub name: String,
    /// `log g(t)` for `t >= 0`.
    pub log_shape: Arc<LogShapeFn>,
    /// `log c_k` making `c_k g(x'x)` a density on `R^k`.
    pub log_normalizer: Arc<LogNormalizerFn>,
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel").field("name", &self.name).finish_non_exhaustive()
    }
}

/// Spherical kernel pdf family.
#[derive(Debug, Clone)]
pub enum Kernel {
    Normal,
    /// Spherical t with `v > 0` degrees of freedom.
    StudentT(f64),
    /// Same law as `StudentT(1.0)`.
    Cauchy,
    Custom(CustomKernel),
}

impl Kernel {
    pub fn student_t(v: f64) -> Result<Kernel> {
        check_df(v)?;
        Ok(Kernel::StudentT(v))
    }

    /// Degrees of freedom for the t family, `None` for the normal and custom kernels.
    pub fn df(&self) -> Option<f64> {
        match self {
            Kernel::StudentT(v) => Some(*v),
            Kernel::Cauchy => Some(1.0),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Kernel::Normal => "normal".into(),
            Kernel::StudentT(v) => format!("t({v})"),
            Kernel::Cauchy => "cauchy".into(),
            Kernel::Custom(c) => c.name.clone(),
        }
    }
}

fn check_df(v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Parameter(format!("degrees of freedom must be positive, got {v}")));
    }
    Ok(())
}

/// Log normalizing constant of the spherical t density on `R^k`.
fn log_t_const(v: f64, k: usize) -> f64 {
    let k = k as f64;
    ln_gamma(0.5 * (v + k)) - ln_gamma(0.5 * v) - 0.5 * k * (v * PI).ln()
}

/// `log f(t)` for the spherical density on `R^k`, where `t = x'x`.
pub fn log_kernel_pdf(kernel: &Kernel, t: f64, k: usize) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("kernel argument must be >= 0, got {t}")));
    }
    if k == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    Ok(match kernel {
        Kernel::Normal => -0.5 * k as f64 * LN_2PI - 0.5 * t,
        Kernel::StudentT(v) => {
            check_df(*v)?;
            log_t_const(*v, k) - 0.5 * (v + k as f64) * (t / v).ln_1p()
        }
        Kernel::Cauchy => log_t_const(1.0, k) - 0.5 * (1.0 + k as f64) * t.ln_1p(),
        Kernel::Custom(c) => (c.log_normalizer)(k) + (c.log_shape)(t),
    })
}

pub fn kernel_pdf(kernel: &Kernel, t: f64, k: usize) -> Result<f64> {
    log_kernel_pdf(kernel, t, k).map(f64::exp)
}

/// Log of the radial density `k(r) = 2 π^{k/2} / Γ(k/2) r^{k-1} f(r²)`.
pub fn log_radial_pdf(kernel: &Kernel, r: f64, k: usize) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius must be >= 0, got {r}")));
    }
    let lf = log_kernel_pdf(kernel, r * r, k)?;
    let kf = k as f64;
    let surface = std::f64::consts::LN_2 + 0.5 * kf * PI.ln() - ln_gamma(0.5 * kf);
    let power = if k == 1 { 0.0 } else { (kf - 1.0) * r.ln() };
    Ok(surface + power + lf)
}

pub fn radial_pdf(kernel: &Kernel, r: f64, k: usize) -> Result<f64> {
    log_radial_pdf(kernel, r, k).map(f64::exp)
}

/// `Σ_j (Π_{k≠j} m_k) log|det A_j|`, the log of the volume factor dividing
/// every density below; doubled when `squared` is set.
pub fn log_jacobian(factors: &FactorList, squared: bool) -> Result<f64> {
    let lj = chain_log_abs_det(factors)?;
    Ok(if squared { 2.0 * lj } else { lj })
}

/// Location array plus one non-singular square factor per mode and a kernel.
#[derive(Debug, Clone)]
pub struct KroneckerModel {
    mean: DataArray,
    factors: FactorList,
    inverses: ModeMaps,
    log_jacobian: f64,
    kernel: Kernel,
}

impl KroneckerModel {
    pub fn new(mean: DataArray, factors: FactorList, kernel: Kernel) -> Result<Self> {
        if factors.len() != mean.shape().order() {
            return Err(Error::shape(format!(
                "{} factors for a mean array of order {}",
                factors.len(),
                mean.shape().order()
            )));
        }
        for (j, (a, &m)) in factors.iter().zip(mean.dims()).enumerate() {
            if a.rows() != m || a.cols() != m {
                return Err(Error::shape(format!(
                    "factor {} is {}x{}, mode extent is {m}",
                    j + 1,
                    a.rows(),
                    a.cols()
                )));
            }
        }
        if let Kernel::StudentT(v) = kernel {
            check_df(v)?;
        }
        let inverses = factors
            .iter()
            .enumerate()
            .map(|(j, a)| a.inverse().map_err(|e| e.in_mode(j + 1)))
            .collect::<Result<Vec<_>>>()?;
        let log_jacobian = log_jacobian(&factors, false)?;
        Ok(KroneckerModel {
            mean,
            factors,
            inverses: ModeMaps::new(inverses)?,
            log_jacobian,
            kernel,
        })
    }

    /// Zero mean of the shape implied by the factors.
    pub fn centered(factors: FactorList, kernel: Kernel) -> Result<Self> {
        let shape = crate::array::Shape::new(factors.row_dims())?;
        KroneckerModel::new(DataArray::zeros(shape), factors, kernel)
    }

    pub fn mean(&self) -> &DataArray {
        &self.mean
    }

    pub fn factors(&self) -> &FactorList {
        &self.factors
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn with_kernel(&self, kernel: Kernel) -> Result<Self> {
        if let Kernel::StudentT(v) = kernel {
            check_df(v)?;
        }
        Ok(KroneckerModel { kernel, ..self.clone() })
    }

    /// Same model with factor `mode` (one-based) multiplied by `alpha`.
    pub fn with_scaled_factor(&self, mode: usize, alpha: f64) -> Result<Self> {
        let mut fs: Vec<DenseMatrix> = self.factors.factors().to_vec();
        let a = fs
            .get_mut(mode.wrapping_sub(1))
            .ok_or_else(|| Error::shape(format!("no factor for mode {mode}")))?;
        *a = a.scale(alpha);
        KroneckerModel::new(self.mean.clone(), FactorList::new(fs)?, self.kernel.clone())
    }

    /// Number of cells `m`.
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Cached `Σ_j (Π_{k≠j} m_k) log|det A_j|`.
    pub fn log_jacobian(&self) -> f64 {
        self.log_jacobian
    }

    pub fn factor_maps(&self) -> ModeMaps {
        ModeMaps::from(self.factors.clone())
    }

    pub fn inverse_maps(&self) -> &ModeMaps {
        &self.inverses
    }

    /// `Z = (A1⁻¹)^1 ... (Ai⁻¹)^i (X - M)`.
    pub fn standardize(&self, x: &DataArray) -> Result<DataArray> {
        r_multiply(&self.inverses, &x.sub(&self.mean)?)
    }

    /// `X = (A1)^1 ... (Ai)^i Z + M`.
    pub fn unstandardize(&self, z: &DataArray) -> Result<DataArray> {
        r_multiply(&self.factor_maps(), z)?.add(&self.mean)
    }

    /// Log-density of the array normal law with this model's location and factors.
    /// The model's kernel is ignored.
    pub fn logpdf_normal(&self, x: &DataArray) -> Result<f64> {
        let q = self.standardize(x)?.sq_norm();
        Ok(-0.5 * q - 0.5 * self.dim() as f64 * LN_2PI - self.log_jacobian)
    }

    /// Log-density of the elliptically contoured law under the model's kernel.
    pub fn logpdf_elliptical(&self, x: &DataArray) -> Result<f64> {
        let q = self.standardize(x)?.sq_norm();
        Ok(log_kernel_pdf(&self.kernel, q, self.dim())? - self.log_jacobian)
    }

    /// Log-density of the array t law with `v` degrees of freedom, location and
    /// factors taken from the model. The model's kernel is ignored.
    pub fn logpdf_t(&self, x: &DataArray, v: f64) -> Result<f64> {
        check_df(v)?;
        let m = self.dim();
        let q = self.standardize(x)?.sq_norm();
        Ok(log_t_const(v, m) - 0.5 * (v + m as f64) * (q / v).ln_1p() - self.log_jacobian)
    }

    /// `exp(logpdf_elliptical)`; underflows or overflows for large `m`.
    pub fn pdf(&self, x: &DataArray) -> Result<f64> {
        self.logpdf_elliptical(x).map(f64::exp)
    }
}

/// Free-function form of [`KroneckerModel::standardize`].
pub fn standardize(model: &KroneckerModel, x: &DataArray) -> Result<DataArray> {
    model.standardize(x)
}

pub fn logpdf_normal(model: &KroneckerModel, x: &DataArray) -> Result<f64> {
    model.logpdf_normal(x)
}

pub fn logpdf_elliptical(model: &KroneckerModel, x: &DataArray) -> Result<f64> {
    model.logpdf_elliptical(x)
}

pub fn logpdf_t(model: &KroneckerModel, x: &DataArray, v: f64) -> Result<f64> {
    model.logpdf_t(x, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::Shape;
    use crate::kronecker::inv_kron_chain;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn kernel_pdf_examples() {
        let k = kernel_pdf(&Kernel::Normal, 0.0, 1).unwrap();
        assert!(close(k, 1.0 / (2.0 * PI).sqrt(), 1e-15));
        assert!(close(k, 0.398_942_280_401_432_7, 1e-15));
        let t1 = kernel_pdf(&Kernel::StudentT(1.0), 0.0, 1).unwrap();
        assert!(close(t1, 1.0 / PI, 1e-15));
        let n2 = kernel_pdf(&Kernel::Normal, 2.0, 2).unwrap();
        assert!(close(n2, (-1.0f64).exp() / (2.0 * PI), 1e-16));
    }

    #[test]
    fn kernel_pdf_errors() {
        assert!(matches!(kernel_pdf(&Kernel::Normal, -1.0, 2), Err(Error::Domain(_))));
        assert!(matches!(kernel_pdf(&Kernel::StudentT(0.0), 1.0, 2), Err(Error::Parameter(_))));
        assert!(matches!(kernel_pdf(&Kernel::StudentT(-2.0), 1.0, 2), Err(Error::Parameter(_))));
        assert!(Kernel::student_t(0.0).is_err());
        assert!(kernel_pdf(&Kernel::Normal, f64::NAN, 2).is_err());
    }

    #[test]
    fn cauchy_is_t1() {
        for k in 1..6 {
            for t in [0.0, 0.3, 1.0, 7.5, 1e4] {
                let a = log_kernel_pdf(&Kernel::Cauchy, t, k).unwrap();
                let b = log_kernel_pdf(&Kernel::StudentT(1.0), t, k).unwrap();
                assert!(close(a, b, 1e-14));
            }
        }
    }

    #[test]
    fn custom_kernel_uses_supplied_normalizer() {
        let gauss = Kernel::Custom(CustomKernel {
            name: "gauss".into(),
            log_shape: Arc::new(|t| -0.5 * t),
            log_normalizer: Arc::new(|k| -0.5 * k as f64 * LN_2PI),
        });
        for k in 1..5 {
            let a = log_kernel_pdf(&gauss, 1.3, k).unwrap();
            let b = log_kernel_pdf(&Kernel::Normal, 1.3, k).unwrap();
            assert!(close(a, b, 1e-15));
        }
        assert!(format!("{gauss:?}").contains("gauss"));
    }

    #[test]
    fn radial_pdf_examples() {
        for r in [0.1f64, 0.5, 1.0, 2.0, 3.7] {
            let rayleigh = r * (-0.5 * r * r).exp();
            assert!(close(radial_pdf(&Kernel::Normal, r, 2).unwrap(), rayleigh, 1e-15));
            let half_normal = 2.0 * (-0.5 * r * r).exp() / (2.0 * PI).sqrt();
            assert!(close(radial_pdf(&Kernel::Normal, r, 1).unwrap(), half_normal, 1e-15));
        }
        for k in 2..6 {
            assert_eq!(radial_pdf(&Kernel::Normal, 0.0, k).unwrap(), 0.0);
            assert_eq!(radial_pdf(&Kernel::StudentT(3.0), 0.0, k).unwrap(), 0.0);
        }
        assert!(radial_pdf(&Kernel::Normal, 0.0, 1).unwrap() > 0.0);
        assert!(matches!(radial_pdf(&Kernel::Normal, -0.1, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn log_jacobian_examples() {
        let ids = FactorList::new(vec![DenseMatrix::identity(2), DenseMatrix::identity(3)]).unwrap();
        assert_eq!(log_jacobian(&ids, false).unwrap(), 0.0);

        let a1 = m(&[&[1.0, 1.0], &[-1.0, 1.0]]);
        let a2 = m(&[&[1.0, 2.0, 0.0], &[0.0, 3.0, 0.0], &[0.5, 0.0, 1.0]]);
        let fs = FactorList::new(vec![a1.clone(), a2]).unwrap();
        let lj = log_jacobian(&fs, false).unwrap();
        assert!(close(lj, 72f64.ln(), 1e-13));
        assert!(close(inv_kron_chain(&fs).det().unwrap(), 72.0, 1e-11));
        assert!(close(log_jacobian(&fs, true).unwrap(), 2.0 * 72f64.ln(), 1e-13));

        let single = FactorList::new(vec![a1]).unwrap();
        assert!(close(log_jacobian(&single, false).unwrap(), 2f64.ln(), 1e-15));

        let neg = FactorList::new(vec![m(&[&[0.0, 1.0], &[1.0, 0.0]])]).unwrap();
        assert!(close(log_jacobian(&neg, false).unwrap(), 0.0, 1e-15));
    }

    fn sample_model(kernel: Kernel) -> KroneckerModel {
        let shape = Shape::new(vec![2, 3]).unwrap();
        let mean = DataArray::from_fn(shape, |i| 0.5 * i[0] as f64 - 0.25 * i[1] as f64);
        let fs = FactorList::new(vec![
            m(&[&[1.5, 0.2], &[-0.3, 0.8]]),
            m(&[&[1.0, 0.1, 0.0], &[0.4, 2.0, -0.2], &[0.0, 0.3, 0.7]]),
        ])
        .unwrap();
        KroneckerModel::new(mean, fs, kernel).unwrap()
    }

    #[test]
    fn standardize_examples() {
        let model = sample_model(Kernel::Normal);
        assert_eq!(model.standardize(model.mean()).unwrap().sq_norm(), 0.0);

        let shape = Shape::new(vec![2, 2]).unwrap();
        let ident = KroneckerModel::new(
            DataArray::filled(shape.clone(), 1.0),
            FactorList::new(vec![DenseMatrix::identity(2), DenseMatrix::identity(2)]).unwrap(),
            Kernel::Normal,
        )
        .unwrap();
        let x = DataArray::from_rvec(vec![1.0, 2.0, 3.0, 4.0], shape).unwrap();
        assert_eq!(ident.standardize(&x).unwrap().rvec(), &[0.0, 1.0, 2.0, 3.0]);

        let x = DataArray::from_fn(Shape::new(vec![2, 3]).unwrap(), |i| {
            (i[0] as f64 * 1.7).cos() * i[1] as f64
        });
        let back = model.unstandardize(&model.standardize(&x).unwrap()).unwrap();
        assert!(back.max_abs_diff(&x).unwrap() <= 1e-9);
        assert!(model.standardize(&DataArray::zeros(Shape::new(vec![3, 2]).unwrap())).is_err());
    }

    #[test]
    fn model_validation() {
        let shape = Shape::new(vec![2, 2]).unwrap();
        let singular = FactorList::new(vec![
            DenseMatrix::identity(2),
            m(&[&[1.0, 2.0], &[2.0, 4.0]]),
        ])
        .unwrap();
        assert_eq!(
            KroneckerModel::new(DataArray::zeros(shape.clone()), singular, Kernel::Normal).unwrap_err(),
            Error::Singular { mode: Some(2) }
        );
        let wrong = FactorList::new(vec![DenseMatrix::identity(2), DenseMatrix::identity(3)]).unwrap();
        assert!(matches!(
            KroneckerModel::new(DataArray::zeros(shape.clone()), wrong, Kernel::Normal),
            Err(Error::Shape(_))
        ));
        let ids = FactorList::new(vec![DenseMatrix::identity(2), DenseMatrix::identity(2)]).unwrap();
        assert!(matches!(
            KroneckerModel::new(DataArray::zeros(shape), ids, Kernel::StudentT(-1.0)),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn logpdf_normal_at_center_identity() {
        let shape = Shape::new(vec![2, 2]).unwrap();
        let ids = FactorList::new(vec![DenseMatrix::identity(2), DenseMatrix::identity(2)]).unwrap();
        let model = KroneckerModel::new(DataArray::zeros(shape.clone()), ids, Kernel::Normal).unwrap();
        let lp = model.logpdf_normal(&DataArray::zeros(shape)).unwrap();
        assert!(close(lp, -2.0 * (2.0 * PI).ln(), 1e-14));
    }

    #[test]
    fn logpdf_normal_one_mode_matches_mvn() {
        // covariance A A', density via Cholesky of the covariance
        let a = m(&[&[1.2, 0.0, 0.3], &[-0.4, 0.9, 0.0], &[0.2, 0.5, 1.1]]);
        let mean = DataArray::from_rvec(vec![0.1, -0.2, 0.3], Shape::new(vec![3]).unwrap()).unwrap();
        let model =
            KroneckerModel::new(mean.clone(), FactorList::new(vec![a.clone()]).unwrap(), Kernel::Normal)
                .unwrap();
        let cov = a.matmul(&a.transpose()).unwrap();
        let chol = cov.cholesky().unwrap();
        for x in [[0.0, 0.0, 0.0], [1.0, -1.0, 0.5], [2.5, 0.3, -1.7]] {
            let d: Vec<f64> = x.iter().zip(mean.rvec()).map(|(a, b)| a - b).collect();
            let y = chol.forward(&d);
            let q: f64 = y.iter().map(|v| v * v).sum();
            let direct = -0.5 * q - 1.5 * LN_2PI - 0.5 * chol.log_det();
            let xa = DataArray::from_rvec(x.to_vec(), Shape::new(vec![3]).unwrap()).unwrap();
            assert!(close(model.logpdf_normal(&xa).unwrap(), direct, 1e-10));
        }
    }

    #[test]
    fn scaling_first_factor_shifts_logpdf() {
        let model = sample_model(Kernel::Normal);
        let scaled = model.with_scaled_factor(1, 2.0).unwrap();
        let base = model.logpdf_normal(model.mean()).unwrap();
        let shifted = scaled.logpdf_normal(model.mean()).unwrap();
        // m1 = 2, product of the other extents = 3
        assert!(close(shifted - base, -3.0 * 2.0 * 2f64.ln(), 1e-12));
    }

    #[test]
    fn elliptical_normal_equals_logpdf_normal() {
        let model = sample_model(Kernel::Normal);
        let x = DataArray::from_fn(Shape::new(vec![2, 3]).unwrap(), |i| (i[0] * i[1]) as f64 * 0.3);
        assert!(close(
            model.logpdf_elliptical(&x).unwrap(),
            model.logpdf_normal(&x).unwrap(),
            1e-12
        ));
    }

    #[test]
    fn t_center_one_dim_is_cauchy_peak() {
        let shape = Shape::new(vec![1]).unwrap();
        let model = KroneckerModel::new(
            DataArray::zeros(shape.clone()),
            FactorList::new(vec![DenseMatrix::identity(1)]).unwrap(),
            Kernel::StudentT(1.0),
        )
        .unwrap();
        let c = DataArray::zeros(shape);
        assert!(close(model.logpdf_elliptical(&c).unwrap(), (1.0 / PI).ln(), 1e-15));
        assert!(close(model.logpdf_t(&c, 1.0).unwrap(), (1.0 / PI).ln(), 1e-15));
        let cauchy = model.with_kernel(Kernel::Cauchy).unwrap();
        assert!(close(cauchy.logpdf_elliptical(&c).unwrap(), (1.0 / PI).ln(), 1e-15));
        assert!(matches!(model.logpdf_t(&c, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn logpdf_t_matches_elliptical_t() {
        let model = sample_model(Kernel::StudentT(3.5));
        let x = DataArray::from_fn(Shape::new(vec![2, 3]).unwrap(), |i| (i[0] + i[1]) as f64 * 0.4);
        assert!(close(
            model.logpdf_t(&x, 3.5).unwrap(),
            model.logpdf_elliptical(&x).unwrap(),
            1e-12
        ));
    }
}
