//! Small fixed-capacity vectors and matrices for state spaces of dimension
//! at most [`MAX_DIM`]. Everything is `Copy`, so the integrators never touch
//! the heap.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use thiserror::Error;

pub const MAX_DIM: usize = 4;

/// Pivots below this magnitude are treated as singular.
pub const PIVOT_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("singular matrix (pivot {pivot:e} in column {column})")]
pub struct SingularMatrix {
    pub column: usize,
    pub pivot: f64,
}

#[derive(Clone, Copy, PartialEq)]
pub struct Vector {
    data: [f64; MAX_DIM],
    len: usize,
}

impl Vector {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_DIM, "dimension {len} exceeds {MAX_DIM}");
        Vector {
            data: [0.0; MAX_DIM],
            len,
        }
    }

    pub fn from_slice(v: &[f64]) -> Self {
        let mut out = Vector::zeros(v.len());
        out.data[..v.len()].copy_from_slice(v);
        out
    }

    pub fn scalar(x: f64) -> Self {
        Vector::from_slice(&[x])
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Vector::zeros(len);
        v.data[i] = 1.0;
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.len]
    }

    pub fn norm(&self) -> f64 {
        self.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }

    /// `self + c·v`
    #[inline]
    pub fn axpy(self, c: f64, v: Vector) -> Vector {
        let mut out = self;
        for i in 0..self.len {
            out.data[i] += c * v.data[i];
        }
        out
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[..self.len][i]
    }
}

impl Add for Vector {
    type Output = Vector;
    #[inline]
    fn add(self, rhs: Vector) -> Vector {
        self.axpy(1.0, rhs)
    }
}

impl Sub for Vector {
    type Output = Vector;
    #[inline]
    fn sub(self, rhs: Vector) -> Vector {
        self.axpy(-1.0, rhs)
    }
}

impl AddAssign for Vector {
    #[inline]
    fn add_assign(&mut self, rhs: Vector) {
        *self = *self + rhs;
    }
}

impl SubAssign for Vector {
    #[inline]
    fn sub_assign(&mut self, rhs: Vector) {
        *self = *self - rhs;
    }
}

impl Mul<Vector> for f64 {
    type Output = Vector;
    #[inline]
    fn mul(self, rhs: Vector) -> Vector {
        let mut out = rhs;
        for i in 0..rhs.len {
            out.data[i] *= self;
        }
        out
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        -1.0 * self
    }
}

/// Square matrix, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix {
    data: [[f64; MAX_DIM]; MAX_DIM],
    dim: usize,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        Matrix {
            data: [[0.0; MAX_DIM]; MAX_DIM],
            dim,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.data[i][i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let mut m = Matrix::zeros(rows.len());
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), rows.len(), "matrix must be square");
            m.data[i][..r.len()].copy_from_slice(r);
        }
        m
    }

    /// The matrix whose `j`-th column is `col(e_j)`.
    pub fn from_columns<F: FnMut(Vector) -> Vector>(dim: usize, mut col: F) -> Self {
        let mut m = Matrix::zeros(dim);
        for j in 0..dim {
            let c = col(Vector::unit(dim, j));
            for i in 0..dim {
                m.data[i][j] = c[i];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.dim && j < self.dim);
        self.data[i][j]
    }

    pub fn apply(&self, v: Vector) -> Vector {
        let mut out = Vector::zeros(self.dim);
        for i in 0..self.dim {
            out[i] = (0..self.dim).map(|j| self.data[i][j] * v[j]).sum();
        }
        out
    }

    pub fn scale(mut self, c: f64) -> Matrix {
        for row in self.data.iter_mut().take(self.dim) {
            for x in row.iter_mut().take(self.dim) {
                *x *= c;
            }
        }
        self
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max(self.data[i][j].abs());
            }
        }
        m
    }

    /// Solves `self · x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: Vector) -> Result<Vector, SingularMatrix> {
        let n = self.dim;
        assert_eq!(b.len(), n);
        let mut a = self.data;
        let mut x = b;
        for col in 0..n {
            let p = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .expect("nonempty range");
            if a[p][col].abs() < PIVOT_THRESHOLD || !a[p][col].is_finite() {
                return Err(SingularMatrix {
                    column: col,
                    pivot: a[p][col],
                });
            }
            a.swap(p, col);
            x.data.swap(p, col);
            for i in col + 1..n {
                let f = a[i][col] / a[col][col];
                if f != 0.0 {
                    for j in col..n {
                        a[i][j] -= f * a[col][j];
                    }
                    x.data[i] -= f * x.data[col];
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = x.data[i];
            for j in i + 1..n {
                s -= a[i][j] * x.data[j];
            }
            x.data[i] = s / a[i][i];
        }
        Ok(x)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.dim).map(|i| &self.data[i][..self.dim]))
            .finish()
    }
}

impl Add for Matrix {
    type Output = Matrix;
    fn add(mut self, rhs: Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.data[i][j] += rhs.data[i][j];
            }
        }
        self
    }
}

impl Sub for Matrix {
    type Output = Matrix;
    fn sub(self, rhs: Matrix) -> Matrix {
        self + rhs.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_needs_pivoting() {
        let a = Matrix::from_rows(&[&[0.0, 1.0], &[2.0, 3.0]]);
        let x = a.solve(Vector::from_slice(&[4.0, 5.0])).unwrap();
        assert!((x[0] + 3.5).abs() < 1e-15 && (x[1] - 4.0).abs() < 1e-15);
        let back = a.apply(x);
        assert_eq!(back.as_slice(), &[4.0, 5.0]);
    }

    #[test]
    fn singular_is_reported() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(a.solve(Vector::from_slice(&[1.0, 1.0])).is_err());
        assert!(Matrix::zeros(1).solve(Vector::scalar(1.0)).is_err());
    }

    #[test]
    fn columns_build_jacobians() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = Matrix::from_columns(2, |v| a.apply(v));
        assert_eq!(a, b);
    }
}
