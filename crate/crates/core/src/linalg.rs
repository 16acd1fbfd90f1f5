//! Small dense complex linear algebra.
//!
//! Matrices are column-major so that `vec(A)` (columns stacked top to bottom)
//! is the backing slice itself.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Column-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Cx::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Cx::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<Cx<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Cx<T>>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            if c.len() != rows {
                return Err(Error::Dimension(format!(
                    "column of length {} in a matrix with {rows} rows",
                    c.len()
                )));
            }
            data.extend_from_slice(c);
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            data,
        })
    }

    /// `col · rowᵀ` (no conjugation): entry `(i, j) = col[i]·row[j]`.
    pub fn outer(col: &[Cx<T>], row: &[Cx<T>]) -> Self {
        Self::from_fn(col.len(), row.len(), |i, j| col[i] * row[j])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Column-major entries, i.e. `vec(self)`.
    #[inline]
    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Cx<T>> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[Cx<T>] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [Cx<T>] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<Cx<T>> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (p, &b) in rhs.col(j).iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.col(p)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![Cx::zero(); self.rows];
        for (j, &b) in v.iter().enumerate() {
            for (d, &a) in out.iter_mut().zip(self.col(j)) {
                *d += a * b;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::Dimension("shape mismatch in subtraction".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn frobenius_norm(&self) -> T {
        norm(&self.data)
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (p, q) = rhs.shape();
        Self::from_fn(self.rows * p, self.cols * q, |i, j| {
            self[(i / p, j / q)] * rhs[(i % p, j % q)]
        })
    }

    /// Numerical rank from modified Gram–Schmidt on the columns.
    pub fn rank(&self, rel_tol: T) -> usize {
        orthonormal_basis(&self.columns(), rel_tol).len()
    }

    pub fn columns(&self) -> Vec<Vec<Cx<T>>> {
        (0..self.cols).map(|j| self.col(j).to_vec()).collect()
    }

    /// Lower-triangular `L` with `self = L·Lᴴ`. Only the lower triangle is read.
    pub fn cholesky(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Dimension("cholesky of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite);
            }
            let djj = d.sqrt();
            l[(j, j)] = Cx::new(djj, T::zero());
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(l)
    }
}

impl<T> Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[j * self.rows + i]
    }
}

impl<T> IndexMut<(usize, usize)> for CMat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[j * self.rows + i]
    }
}

/// `aᴴ b`.
pub fn dot<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> Cx<T> {
    a.iter()
        .zip(b)
        .fold(Cx::zero(), |acc, (x, y)| acc + x.conj() * y)
}

/// Compensated (Neumaier) sum; long sums of squares stay exact to a few ulps.
pub fn compensated_sum<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

pub fn norm_sqr<T: Real>(a: &[Cx<T>]) -> T {
    compensated_sum(a.iter().map(|z| z.norm_sqr()))
}

pub fn norm<T: Real>(a: &[Cx<T>]) -> T {
    norm_sqr(a).sqrt()
}

/// `a ⊗ b` for vectors.
pub fn kron_vec<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> Vec<Cx<T>> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// Removes from `v` its components along each (orthonormal) vector in `basis`.
/// Two passes keep the result orthogonal to working precision.
pub fn project_out<T: Real>(v: &mut [Cx<T>], basis: &[Vec<Cx<T>>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= qi * c;
            }
        }
    }
}

/// Orthonormal basis of `span(vectors)`, processed in order. A vector is dropped
/// when its residual norm falls below `rel_tol` times its original norm (or the
/// largest input norm, whichever is bigger).
pub fn orthonormal_basis<T: Real>(vectors: &[Vec<Cx<T>>], rel_tol: T) -> Vec<Vec<Cx<T>>> {
    let scale = vectors
        .iter()
        .map(|v| norm(v))
        .fold(T::zero(), |a, b| a.max(b));
    let mut basis: Vec<Vec<Cx<T>>> = Vec::new();
    if scale == T::zero() {
        return basis;
    }
    for v in vectors {
        let mut w = v.clone();
        project_out(&mut w, &basis);
        let n = norm(&w);
        if n > rel_tol * scale {
            let inv = T::one() / n;
            w.iter_mut().for_each(|x| *x *= inv);
            basis.push(w);
        }
    }
    basis
}
