//! Dense multiway arrays stored in rvec order.
//!
//! The rvec ordering stacks cells with the first index varying fastest, so the
//! cell `(j1, ..., ji)` (one-based) sits at position
//! `j1 + (j2 - 1) m1 + (j3 - 1) m1 m2 + ...`. Under this order the mode-wise
//! product `(A1)^1 ... (Ai)^i X` becomes `(Ai ⊗ ... ⊗ A1) rvec(X)`, which is what
//! [`crate::kronecker::inv_kron_chain`] builds.

use crate::error::{Error, Result};

/// Array dimensions `(m1, ..., mi)`; every extent is at least one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::shape("array order must be at least 1"));
        }
        if let Some(mode) = dims.iter().position(|&d| d == 0) {
            return Err(Error::shape(format!("mode {} has zero extent", mode + 1)));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::shape("total size overflows usize"))?;
        Ok(Shape(dims))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    /// Number of modes `i`.
    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// Total number of cells `m = m1 m2 ... mi`.
    pub fn len(&self) -> usize {
        self.0.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Extent of mode `mode` (one-based).
    pub fn dim(&self, mode: usize) -> usize {
        self.0[mode - 1]
    }

    /// Product of all extents except mode `mode` (one-based).
    pub fn complement_len(&self, mode: usize) -> usize {
        self.0
            .iter()
            .enumerate()
            .filter(|&(k, _)| k + 1 != mode)
            .map(|(_, &d)| d)
            .product()
    }

    /// Stride of mode `mode` (one-based) in rvec storage.
    pub(crate) fn stride(&self, mode: usize) -> usize {
        self.0[..mode - 1].iter().product()
    }
}

impl TryFrom<&[usize]> for Shape {
    type Error = Error;

    fn try_from(dims: &[usize]) -> Result<Self> {
        Shape::new(dims.to_vec())
    }
}

/// Position (one-based) of the multi-index `idx` in rvec order.
pub fn linear_index(idx: &[usize], shape: &Shape) -> Result<usize> {
    if idx.len() != shape.order() {
        return Err(Error::shape(format!(
            "multi-index has {} components, array order is {}",
            idx.len(),
            shape.order()
        )));
    }
    let mut pos = 0;
    let mut stride = 1;
    for (k, (&j, &m)) in idx.iter().zip(shape.dims()).enumerate() {
        if j == 0 || j > m {
            return Err(Error::Index { mode: k + 1, index: j, dim: m });
        }
        pos += (j - 1) * stride;
        stride *= m;
    }
    Ok(pos + 1)
}

/// Inverse of [`linear_index`]: the one-based multi-index at position `pos`.
pub fn multi_index(pos: usize, shape: &Shape) -> Result<Vec<usize>> {
    let m = shape.len();
    if pos == 0 || pos > m {
        return Err(Error::Index { mode: 0, index: pos, dim: m });
    }
    let mut rest = pos - 1;
    Ok(shape
        .dims()
        .iter()
        .map(|&d| {
            let j = rest % d;
            rest /= d;
            j + 1
        })
        .collect())
}

/// A dense real array of arbitrary order.
#[derive(Debug, Clone, PartialEq)]
pub struct DataArray {
    shape: Shape,
    data: Vec<f64>,
}

impl DataArray {
    pub fn zeros(shape: Shape) -> Self {
        let data = vec![0.0; shape.len()];
        DataArray { shape, data }
    }

    pub fn filled(shape: Shape, value: f64) -> Self {
        let data = vec![value; shape.len()];
        DataArray { shape, data }
    }

    /// Rebuild an array from its rvec (the `unrvec` map).
    pub fn from_rvec(data: Vec<f64>, shape: Shape) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::shape(format!(
                "vector of length {} cannot fill shape {:?} (needs {})",
                data.len(),
                shape.dims(),
                shape.len()
            )));
        }
        Ok(DataArray { shape, data })
    }

    /// Build from a closure over one-based multi-indices.
    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let m = shape.len();
        let mut idx = vec![1usize; shape.order()];
        let mut data = Vec::with_capacity(m);
        for _ in 0..m {
            data.push(f(&idx));
            for (j, &d) in idx.iter_mut().zip(shape.dims()) {
                if *j < d {
                    *j += 1;
                    break;
                }
                *j = 1;
            }
        }
        DataArray { shape, data }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// The rvec of the array as a borrowed slice.
    pub fn rvec(&self) -> &[f64] {
        &self.data
    }

    pub fn into_rvec(self) -> Vec<f64> {
        self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.data[linear_index(idx, &self.shape)? - 1])
    }

    pub fn set(&mut self, idx: &[usize], value: f64) -> Result<()> {
        let pos = linear_index(idx, &self.shape)?;
        self.data[pos - 1] = value;
        Ok(())
    }

    /// Sum of squared cells.
    pub fn sq_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Euclidean distance between two arrays of equal shape.
    pub fn distance(&self, other: &DataArray) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// The mode-`mode` fiber through the cell whose other coordinates are `fixed`.
    ///
    /// `fixed` lists one-based indices for every mode except `mode`, in mode order.
    pub fn fiber(&self, mode: usize, fixed: &[usize]) -> Result<Vec<f64>> {
        let order = self.shape.order();
        if mode == 0 || mode > order {
            return Err(Error::Index { mode: 0, index: mode, dim: order });
        }
        if fixed.len() + 1 != order {
            return Err(Error::shape(format!(
                "fiber needs {} fixed indices, got {}",
                order - 1,
                fixed.len()
            )));
        }
        let mut idx = Vec::with_capacity(order);
        idx.extend_from_slice(&fixed[..mode - 1]);
        idx.push(1);
        idx.extend_from_slice(&fixed[mode - 1..]);
        let start = linear_index(&idx, &self.shape)? - 1;
        let stride = self.shape.stride(mode);
        Ok((0..self.shape.dim(mode))
            .map(|r| self.data[start + r * stride])
            .collect())
    }

    pub fn max_abs_diff(&self, other: &DataArray) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn add(&self, other: &DataArray) -> Result<DataArray> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DataArray) -> Result<DataArray> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, alpha: f64) -> DataArray {
        DataArray {
            shape: self.shape.clone(),
            data: self.data.iter().map(|x| alpha * x).collect(),
        }
    }

    fn zip_with(&self, other: &DataArray, f: impl Fn(f64, f64) -> f64) -> Result<DataArray> {
        self.check_same_shape(other)?;
        Ok(DataArray {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    fn check_same_shape(&self, other: &DataArray) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::shape(format!(
                "shapes differ: {:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(())
    }
}

/// The rvec of `x`, copied.
pub fn rvec(x: &DataArray) -> Vec<f64> {
    x.rvec().to_vec()
}

pub fn unrvec(x: Vec<f64>, shape: Shape) -> Result<DataArray> {
    DataArray::from_rvec(x, shape)
}
