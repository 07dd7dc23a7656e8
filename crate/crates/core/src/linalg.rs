//! Small dense matrices: LU with partial pivoting, Cholesky, inverse and the
//! l-inverse `(A'A)^{-1} A'`.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Reject a factorization when the smallest pivot magnitude falls below this
/// fraction of the largest one.
pub const PIVOT_RATIO: f64 = 1e-12;

/// Row-major dense matrix of reals. Indexing is zero-based `(row, col)`.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    /// Build from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::shape("ragged rows"));
        }
        DenseMatrix::new(r, c, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = DenseMatrix::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn column(v: &[f64]) -> Self {
        DenseMatrix::zeros(v.len(), 1).with_data(v.to_vec())
    }

    fn with_data(mut self, data: Vec<f64>) -> Self {
        self.data = data;
        self
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DenseMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Entries in row-major order.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::shape(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::shape("matrix sizes differ"));
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, alpha: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| alpha * a).collect(),
        }
    }

    pub fn trace(&self) -> Result<f64> {
        self.require_square()?;
        Ok((0..self.rows).map(|i| self[(i, i)]).sum())
    }

    /// Largest absolute entrywise difference; infinite if sizes differ.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Sub-matrix on the given zero-based row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])])
    }

    fn require_square(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::shape(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    pub fn lu(&self) -> Result<Lu> {
        Lu::new(self)
    }

    /// Determinant via LU with partial pivoting.
    pub fn det(&self) -> Result<f64> {
        Ok(self.lu()?.det())
    }

    /// `log|det A|` together with the sign of the determinant.
    pub fn log_abs_det(&self) -> Result<(f64, f64)> {
        let lu = self.lu()?;
        Ok((lu.log_abs_det(), lu.sign_det()))
    }

    pub fn inverse(&self) -> Result<DenseMatrix> {
        let lu = self.lu()?;
        lu.check_nonsingular()?;
        let n = self.rows;
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for c in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[c] = 1.0;
            let col = lu.solve_unchecked(&e);
            for (r, v) in col.into_iter().enumerate() {
                inv[(r, c)] = v;
            }
        }
        Ok(inv)
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let lu = self.lu()?;
        lu.check_nonsingular()?;
        if b.len() != self.rows {
            return Err(Error::shape("right-hand side length differs from matrix order"));
        }
        Ok(lu.solve_unchecked(b))
    }

    /// Lower-triangular Cholesky factor `L` with `A = L L'`.
    pub fn cholesky(&self) -> Result<Cholesky> {
        Cholesky::new(self)
    }

    /// The l-inverse `(A'A)^{-1} A'` of a full-column-rank matrix, computed as
    /// `R^{-1} Q'` from a Householder QR factorization.
    ///
    /// Fails when `A` has fewer rows than columns or when the smallest `|R_jj|`
    /// is below [`PIVOT_RATIO`] times the largest.
    pub fn l_inverse(&self) -> Result<DenseMatrix> {
        let (p, q) = (self.rows, self.cols);
        if p < q {
            return Err(Error::Singular { mode: None });
        }
        // column-major working copy; reflectors are stored below the diagonal
        let mut a: Vec<Vec<f64>> = (0..q).map(|c| (0..p).map(|r| self[(r, c)]).collect()).collect();
        let mut betas = vec![0.0; q];
        for j in 0..q {
            let tail = a[j][j + 1..].iter().map(|v| v * v).sum::<f64>();
            if tail == 0.0 {
                continue;
            }
            let x0 = a[j][j];
            let norm = (x0 * x0 + tail).sqrt();
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            let v0 = x0 - alpha;
            // H = I - beta v v' with v = (1, x[j+1..] / v0)
            for x in &mut a[j][j + 1..] {
                *x /= v0;
            }
            a[j][j] = 1.0;
            betas[j] = v0.abs() / norm;
            let (head, rest) = a.split_at_mut(j + 1);
            let v = &head[j][j..];
            for col in rest {
                let f = betas[j] * v.iter().zip(&col[j..]).map(|(x, y)| x * y).sum::<f64>();
                for (y, x) in col[j..].iter_mut().zip(v) {
                    *y -= f * x;
                }
            }
            a[j][j] = alpha;
        }
        let diag: Vec<f64> = (0..q).map(|j| a[j][j].abs()).collect();
        let hi = diag.iter().cloned().fold(0.0, f64::max);
        let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi == 0.0 || !(lo >= PIVOT_RATIO * hi) {
            return Err(Error::Singular { mode: None });
        }
        let mut out = DenseMatrix::zeros(q, p);
        for c in 0..p {
            // y = Q' e_c, applying reflectors in order; unit-leading v = (1, tail)
            let mut y = vec![0.0; p];
            y[c] = 1.0;
            for j in 0..q {
                if betas[j] == 0.0 {
                    continue;
                }
                let dot = y[j] + (j + 1..p).map(|r| a[j][r] * y[r]).sum::<f64>();
                let f = betas[j] * dot;
                y[j] -= f;
                for r in j + 1..p {
                    y[r] -= f * a[j][r];
                }
            }
            // back-substitute R x = y[..q]
            for r in (0..q).rev() {
                let s: f64 = (r + 1..q).map(|k| a[k][r] * out[(k, c)]).sum();
                out[(r, c)] = (y[r] - s) / a[r][r];
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

/// `PA = LU` with unit-diagonal `L`, packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: DenseMatrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    fn new(a: &DenseMatrix) -> Result<Self> {
        a.require_square()?;
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|r| (r, lu[(r, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if p != k {
                for c in 0..n {
                    lu.data.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            if pmax == 0.0 {
                continue;
            }
            let pivot = lu[(k, k)];
            for r in k + 1..n {
                let f = lu[(r, k)] / pivot;
                lu[(r, k)] = f;
                if f != 0.0 {
                    for c in k + 1..n {
                        lu[(r, c)] -= f * lu[(k, c)];
                    }
                }
            }
        }
        Ok(Lu { lu, perm, swaps })
    }

    fn pivots(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.lu.rows).map(|i| self.lu[(i, i)])
    }

    pub fn sign_det(&self) -> f64 {
        let neg = self.pivots().filter(|p| *p < 0.0).count() + self.swaps;
        if self.pivots().any(|p| p == 0.0) {
            0.0
        } else if neg.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn det(&self) -> f64 {
        let prod: f64 = self.pivots().product();
        if self.swaps.is_multiple_of(2) {
            prod
        } else {
            -prod
        }
    }

    pub fn log_abs_det(&self) -> f64 {
        self.pivots().map(|p| p.abs().ln()).sum()
    }

    /// Fails when the smallest pivot magnitude is below [`PIVOT_RATIO`] times the largest.
    pub fn check_nonsingular(&self) -> Result<()> {
        let (lo, hi) = self
            .pivots()
            .map(f64::abs)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p), hi.max(p)));
        if hi == 0.0 || !(lo >= PIVOT_RATIO * hi) {
            return Err(Error::Singular { mode: None });
        }
        Ok(())
    }

    fn solve_unchecked(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }
}

#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    fn new(a: &DenseMatrix) -> Result<Self> {
        a.require_square()?;
        let n = a.rows;
        let mut l = DenseMatrix::zeros(n, n);
        let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
        for j in 0..n {
            let d = a[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
            // ratio test on L's diagonal: L_jj^2 = d
            if !(d > PIVOT_RATIO * PIVOT_RATIO * scale) || scale == 0.0 {
                return Err(Error::Singular { mode: None });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let s = a[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
                l[(i, j)] = s / djj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn factor(&self) -> &DenseMatrix {
        &self.l
    }

    /// `log det A = 2 Σ log L_ii`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.l.rows).map(|i| self.l[(i, i)].ln()).sum::<f64>()
    }

    /// Solve `L y = b` by forward substitution.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows;
        let mut y = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| self.l[(i, k)] * y[k]).sum();
            y[i] = (y[i] - s) / self.l[(i, i)];
        }
        y
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.l.rows;
        if b.len() != n {
            return Err(Error::shape("right-hand side length differs from matrix order"));
        }
        let mut x = self.forward(b);
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.l[(k, i)] * x[k]).sum();
            x[i] = (x[i] - s) / self.l[(i, i)];
        }
        Ok(x)
    }
}
