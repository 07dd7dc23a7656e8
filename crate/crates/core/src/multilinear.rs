//! R-matrix multiplication `(A1)^1 (A2)^2 ... (Ai)^i X` and multilinear least squares.

use crate::array::{DataArray, Shape};
use crate::error::{Error, Result};
use crate::kronecker::{inv_kron_chain, FactorList};
use crate::linalg::DenseMatrix;

/// One matrix per mode; map `j` has size `q_j x m_j` and acts on mode `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMaps(Vec<DenseMatrix>);

impl ModeMaps {
    pub fn new(maps: Vec<DenseMatrix>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::shape("at least one mode map is required"));
        }
        Ok(ModeMaps(maps))
    }

    pub fn identity(shape: &Shape) -> Self {
        ModeMaps(shape.dims().iter().map(|&d| DenseMatrix::identity(d)).collect())
    }

    pub fn maps(&self) -> &[DenseMatrix] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Output shape `(q1, ..., qi)` after checking conformability with `input`.
    pub fn output_shape(&self, input: &Shape) -> Result<Shape> {
        if self.0.len() != input.order() {
            return Err(Error::shape(format!(
                "{} mode maps for an array of order {}",
                self.0.len(),
                input.order()
            )));
        }
        for (j, (a, &m)) in self.0.iter().zip(input.dims()).enumerate() {
            if a.cols() != m {
                return Err(Error::shape(format!(
                    "map for mode {} has {} columns, mode extent is {m}",
                    j + 1,
                    a.cols()
                )));
            }
        }
        Shape::new(self.0.iter().map(DenseMatrix::rows).collect())
    }

    /// Mode-wise products `(A_j B_j)`.
    pub fn compose(&self, inner: &ModeMaps) -> Result<ModeMaps> {
        if self.len() != inner.len() {
            return Err(Error::shape("map chains have different lengths"));
        }
        let maps = self
            .0
            .iter()
            .zip(&inner.0)
            .map(|(a, b)| a.matmul(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModeMaps(maps))
    }

    pub fn to_factor_list(&self) -> FactorList {
        FactorList::new(self.0.clone()).expect("ModeMaps is non-empty")
    }
}

impl From<FactorList> for ModeMaps {
    fn from(fs: FactorList) -> Self {
        ModeMaps(fs.into_inner())
    }
}

/// Multiply mode `mode` (one-based) of `x` by `a`.
pub fn mode_product(a: &DenseMatrix, x: &DataArray, mode: usize) -> Result<DataArray> {
    let shape = x.shape();
    if mode == 0 || mode > shape.order() {
        return Err(Error::shape(format!("mode {mode} out of range for order {}", shape.order())));
    }
    let m = shape.dim(mode);
    if a.cols() != m {
        return Err(Error::shape(format!(
            "map for mode {mode} has {} columns, mode extent is {m}",
            a.cols()
        )));
    }
    let q = a.rows();
    let inner = shape.stride(mode);
    let outer = shape.len() / (inner * m);
    let mut dims = shape.dims().to_vec();
    dims[mode - 1] = q;
    let mut out = DataArray::zeros(Shape::new(dims)?);
    let src = x.rvec();
    let dst = out.data_mut();
    for o in 0..outer {
        let sbase = o * inner * m;
        let dbase = o * inner * q;
        for r in 0..q {
            let row = a.row(r);
            let dslice = &mut dst[dbase + r * inner..dbase + (r + 1) * inner];
            for (c, &arc) in row.iter().enumerate() {
                if arc == 0.0 {
                    continue;
                }
                let sslice = &src[sbase + c * inner..sbase + (c + 1) * inner];
                for (d, &s) in dslice.iter_mut().zip(sslice) {
                    *d += arc * s;
                }
            }
        }
    }
    Ok(out)
}

/// `(A1)^1 (A2)^2 ... (Ai)^i X`, applied one mode at a time in order 1..i.
pub fn r_multiply(maps: &ModeMaps, x: &DataArray) -> Result<DataArray> {
    maps.output_shape(x.shape())?;
    let mut cur = x.clone();
    for (j, a) in maps.maps().iter().enumerate() {
        cur = mode_product(a, &cur, j + 1)?;
    }
    Ok(cur)
}

/// Same as [`r_multiply`] but applying the modes in the given (one-based) order.
pub fn r_multiply_ordered(maps: &ModeMaps, x: &DataArray, order: &[usize]) -> Result<DataArray> {
    maps.output_shape(x.shape())?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (1..=maps.len()).collect::<Vec<_>>() {
        return Err(Error::shape("mode order must be a permutation of 1..i"));
    }
    let mut cur = x.clone();
    for &j in order {
        cur = mode_product(&maps.maps()[j - 1], &cur, j)?;
    }
    Ok(cur)
}

/// Direct elementwise evaluation of the nested sum defining R-matrix multiplication.
///
/// Costs `O(Π q_j · Π m_j)`; meant as a reference for small inputs.
pub fn r_multiply_oracle(maps: &ModeMaps, x: &DataArray) -> Result<DataArray> {
    let out_shape = maps.output_shape(x.shape())?;
    let in_shape = x.shape().clone();
    let src = x.rvec();
    Ok(DataArray::from_fn(out_shape, |q| {
        let mut sum = 0.0;
        let mut r = vec![0usize; q.len()];
        for (pos, &v) in src.iter().enumerate() {
            let mut rest = pos;
            for (rj, &d) in r.iter_mut().zip(in_shape.dims()) {
                *rj = rest % d;
                rest /= d;
            }
            let w: f64 = maps
                .maps()
                .iter()
                .enumerate()
                .map(|(j, a)| a[(q[j] - 1, r[j])])
                .product();
            sum += w * v;
        }
        sum
    }))
}

/// Max-abs gap between `rvec(r_multiply(maps, X))` and `(A1 ⊗ⁱ ... ⊗ⁱ Ai) rvec(X)`.
pub fn monolinear_equiv_check(maps: &ModeMaps, x: &DataArray) -> Result<f64> {
    let y = r_multiply(maps, x)?;
    let k = inv_kron_chain(&maps.to_factor_list());
    let l = k.matvec(x.rvec())?;
    Ok(y.rvec().iter().zip(&l).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Max-abs gap between applying `inner` then `outer` and applying the mode-wise products.
pub fn composition_check(outer: &ModeMaps, inner: &ModeMaps, x: &DataArray) -> Result<f64> {
    let seq = r_multiply(outer, &r_multiply(inner, x)?)?;
    let fused = r_multiply(&outer.compose(inner)?, x)?;
    seq.max_abs_diff(&fused)
}

/// Least-squares solution of `Y = (A1)^1 ... (Ai)^i X + E`: applies the l-inverse
/// of every map to `Y`.
pub fn multilinear_lstsq(maps: &ModeMaps, y: &DataArray) -> Result<DataArray> {
    if maps.len() != y.shape().order() {
        return Err(Error::shape(format!(
            "{} mode maps for an array of order {}",
            maps.len(),
            y.shape().order()
        )));
    }
    let linv = maps
        .maps()
        .iter()
        .enumerate()
        .map(|(j, a)| {
            if a.rows() < a.cols() {
                return Err(Error::Singular { mode: Some(j + 1) });
            }
            a.l_inverse().map_err(|e| e.in_mode(j + 1))
        })
        .collect::<Result<Vec<_>>>()?;
    r_multiply(&ModeMaps(linv), y)
}
