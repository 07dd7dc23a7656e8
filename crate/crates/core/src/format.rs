//! Text formats.
//!
//! `ARRV1`: a line `ARRV1`, a line `dims m1 ... mi`, then `m` reals in rvec
//! order separated by any whitespace. Several arrays may follow one another,
//! separated by blank lines.
//!
//! `MATV1`: a line `MATV1`, a line `dims r c`, then `r c` reals in row-major order.
//!
//! Reals are written with 17 significant digits, which round-trips every `f64`.

use std::fmt::Write as _;

use crate::array::{DataArray, Shape};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Render `x` with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_array(x: &DataArray) -> String {
    let mut s = String::from("ARRV1\ndims");
    for d in x.dims() {
        write!(s, " {d}").unwrap();
    }
    s.push('\n');
    for v in x.rvec() {
        s.push_str(&fmt_real(*v));
        s.push('\n');
    }
    s
}

/// Arrays separated by blank lines.
pub fn write_arrays(xs: &[DataArray]) -> String {
    xs.iter().map(write_array).collect::<Vec<_>>().join("\n")
}

pub fn write_matrix(a: &DenseMatrix) -> String {
    let mut s = format!("MATV1\ndims {} {}\n", a.rows(), a.cols());
    for r in 0..a.rows() {
        let row: Vec<String> = a.row(r).iter().map(|v| fmt_real(*v)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate().peekable() }
    }

    /// Next non-blank line as `(one-based line number, trimmed text)`.
    fn next_nonblank(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if !t.is_empty() {
                return Some((i + 1, t));
            }
        }
        None
    }

    fn peek_nonblank(&mut self) -> Option<(usize, &'a str)> {
        while let Some(&(i, l)) = self.inner.peek() {
            let t = l.trim();
            if !t.is_empty() {
                return Some((i + 1, t));
            }
            self.inner.next();
        }
        None
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn read_header(lines: &mut Lines<'_>, magic: &str, last_line: usize) -> Result<(usize, Vec<usize>)> {
    let (ln, head) = lines
        .next_nonblank()
        .ok_or_else(|| perr(last_line + 1, format!("expected '{magic}'")))?;
    if head != magic {
        return Err(perr(ln, format!("expected '{magic}', found '{head}'")));
    }
    let (ln, dims_line) = lines
        .next_nonblank()
        .ok_or_else(|| perr(ln + 1, "expected 'dims' line"))?;
    let mut tok = dims_line.split_whitespace();
    if tok.next() != Some("dims") {
        return Err(perr(ln, "expected 'dims' followed by extents"));
    }
    let dims = tok
        .map(|t| t.parse::<usize>().map_err(|_| perr(ln, format!("bad extent '{t}'"))))
        .collect::<Result<Vec<_>>>()?;
    Ok((ln, dims))
}

fn read_values(lines: &mut Lines<'_>, count: usize, magic: &str, after: usize) -> Result<(usize, Vec<f64>)> {
    let mut vals = Vec::with_capacity(count);
    let mut last = after;
    while vals.len() < count {
        match lines.peek_nonblank() {
            None => {
                return Err(perr(last + 1, format!("expected {count} values, found {}", vals.len())))
            }
            Some((ln, t)) if t == magic => {
                return Err(perr(ln, format!("expected {count} values, found {}", vals.len())))
            }
            Some((ln, t)) => {
                lines.next_nonblank();
                last = ln;
                for tok in t.split_whitespace() {
                    let v = tok
                        .parse::<f64>()
                        .map_err(|_| perr(ln, format!("bad number '{tok}'")))?;
                    if vals.len() == count {
                        return Err(perr(ln, format!("more than {count} values")));
                    }
                    vals.push(v);
                }
            }
        }
    }
    Ok((last, vals))
}

/// Parse every ARRV1 array in `text`.
pub fn read_arrays(text: &str) -> Result<Vec<DataArray>> {
    let mut lines = Lines::new(text);
    let mut out = Vec::new();
    let mut last = 0;
    while lines.peek_nonblank().is_some() {
        let (ln, dims) = read_header(&mut lines, "ARRV1", last)?;
        let shape = Shape::new(dims).map_err(|e| perr(ln, e.to_string()))?;
        let (end, vals) = read_values(&mut lines, shape.len(), "ARRV1", ln)?;
        last = end;
        out.push(DataArray::from_rvec(vals, shape)?);
    }
    Ok(out)
}

/// Parse exactly one ARRV1 array.
pub fn read_array(text: &str) -> Result<DataArray> {
    let mut xs = read_arrays(text)?;
    match xs.len() {
        1 => Ok(xs.pop().unwrap()),
        0 => Err(perr(1, "no array found")),
        k => Err(perr(1, format!("expected one array, found {k}"))),
    }
}

pub fn read_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = Lines::new(text);
    let (ln, dims) = read_header(&mut lines, "MATV1", 0)?;
    let (r, c) = match dims.as_slice() {
        &[r, c] if r > 0 && c > 0 => (r, c),
        _ => return Err(perr(ln, "matrix needs 'dims r c' with positive r and c")),
    };
    let (end, vals) = read_values(&mut lines, r * c, "MATV1", ln)?;
    if let Some((extra, _)) = lines.peek_nonblank() {
        return Err(perr(extra.max(end), "trailing content after matrix"));
    }
    DenseMatrix::new(r, c, vals)
}
