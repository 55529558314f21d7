//! Dense row-major `f64` linear algebra sized for desk-scale experiments.
//!
//! Everything in here is deliberately plain: contiguous storage, explicit
//! loops, no blocking or SIMD intrinsics. The matrices involved top out
//! around 450x500, where straightforward row-major dot products are already
//! memory-friendly and fast enough, and the simple code keeps the backward
//! passes easy to audit.

mod pca;
mod rng;

pub use pca::{pca_2d, Pca2d};
pub use rng::Rng;

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Build from a flat row-major buffer. Errors if the length does not
    /// match `rows * cols` or any entry is non-finite.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                op: "Matrix::from_vec",
                left: format!("{rows}x{cols} = {} entries", rows * cols),
                right: format!("{} entries supplied", data.len()),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: format!("entry {i} of input buffer"),
                op: "Matrix::from_vec".into(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Build from explicit rows; all rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, |r| r.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != ncols {
                return Err(Error::ShapeMismatch {
                    op: "Matrix::from_rows",
                    left: format!("row 0 has {ncols} entries"),
                    right: format!("row {i} has {} entries", r.len()),
                });
            }
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Matrix::from_vec(rows.len(), ncols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Checked matrix-vector product `self * v`.
    pub fn matvec(&self, v: &Vector) -> Result<Vector> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch {
                op: "Matrix::matvec",
                left: format!("matrix {}x{}", self.rows, self.cols),
                right: format!("vector of length {}", v.len()),
            });
        }
        let mut out = Vector::zeros(self.rows);
        self.matvec_into(v.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    /// `out[i] = dot(row_i, x)`. Internal hot path; shapes are asserted.
    pub(crate) fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (row, o) in self.data.chunks_exact(self.cols).zip(out.iter_mut()) {
            let mut acc = 0.0;
            for (&w, &xi) in row.iter().zip(x.iter()) {
                acc += w * xi;
            }
            *o = acc;
        }
    }

    /// `out[j] += sum_i self[i][j] * a[i]` (transpose product, accumulating).
    pub(crate) fn matvec_t_acc(&self, a: &[f64], out: &mut [f64]) {
        debug_assert_eq!(a.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (row, &ai) in self.data.chunks_exact(self.cols).zip(a.iter()) {
            if ai != 0.0 {
                for (o, &w) in out.iter_mut().zip(row.iter()) {
                    *o += ai * w;
                }
            }
        }
    }

    /// Rank-one update `self[i][j] += a[i] * b[j]`; the outer-product
    /// accumulation used by every weight-gradient block.
    pub(crate) fn add_outer(&mut self, a: &[f64], b: &[f64]) {
        debug_assert_eq!(a.len(), self.rows);
        debug_assert_eq!(b.len(), self.cols);
        for (row, &ai) in self.data.chunks_exact_mut(self.cols).zip(a.iter()) {
            if ai != 0.0 {
                for (w, &bj) in row.iter_mut().zip(b.iter()) {
                    *w += ai * bj;
                }
            }
        }
    }

    /// `self += c * other`, used for SGD updates and gradient accumulation.
    pub fn scaled_add(&mut self, c: f64, other: &Matrix) {
        assert_eq!(self.rows, other.rows, "scaled_add row mismatch");
        assert_eq!(self.cols, other.cols, "scaled_add col mismatch");
        for (s, &o) in self.data.iter_mut().zip(other.data.iter()) {
            *s += c * o;
        }
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn sq_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Dense `f64` vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn zeros(n: usize) -> Self {
        Vector { data: vec![0.0; n] }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        Vector { data }
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Vector { data: s.to_vec() }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    /// `self += c * other`.
    pub fn scaled_add(&mut self, c: f64, other: &Vector) {
        assert_eq!(self.len(), other.len(), "scaled_add length mismatch");
        for (s, &o) in self.data.iter_mut().zip(other.data.iter()) {
            *s += c * o;
        }
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn sq_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

impl From<Vec<f64>> for Vector {
    fn from(data: Vec<f64>) -> Self {
        Vector { data }
    }
}

/// Relative error between two scalars with the denominator floored at 1e-8:
/// `|a - b| / max(|a|, |b|, 1e-8)`. This is the convention used by every
/// gradient check in the crate, so near-zero pairs cannot divide by zero.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Matrix with entries drawn i.i.d. uniform from `[-half_range, +half_range)`.
///
/// Errors if `half_range` is not a strictly positive finite number.
pub fn uniform_init(rng: &mut Rng, rows: usize, cols: usize, half_range: f64) -> Result<Matrix> {
    if !(half_range.is_finite() && half_range > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "uniform_init half_range must be finite and > 0, got {half_range}"
        )));
    }
    let mut m = Matrix::zeros(rows, cols);
    for v in m.data.iter_mut() {
        *v = rng.uniform(half_range);
    }
    Ok(m)
}
