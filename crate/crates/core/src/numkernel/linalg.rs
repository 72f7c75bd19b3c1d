//! Small dense matrices and LU with partial pivoting.

use crate::error::{Error, Result};
use crate::numkernel::scalar::{norm_inf, Real};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Real> DenseMatrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![R::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = R::one();
        }
        m
    }

    /// Builds a matrix from rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<R>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch(
                "matrix rows have different lengths".into(),
            ));
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_f64_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| R::from_f64(v)).collect())
                .collect(),
        )
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

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max_abs(&self) -> R {
        norm_inf(&self.data)
    }

    pub fn mul_vec(&self, x: &[R]) -> Vec<R> {
        assert_eq!(x.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(R::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// LU factorization with partial pivoting.
    ///
    /// A pivot is rejected as singular when its magnitude falls below
    /// `1e3 * eps * max|entry|`.
    pub fn lu(&self) -> Result<Lu<R>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let scale = self.max_abs();
        let threshold = R::from_f64(1e3) * R::epsilon() * scale.clone();
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].abs();
            for row in col + 1..n {
                let v = a[row * n + col].abs();
                if v > best {
                    best = v;
                    piv = row;
                }
            }
            if scale.is_zero() || best <= threshold {
                return Err(Error::SingularMatrix { column: col });
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                perm.swap(col, piv);
            }
            let pivot = a[col * n + col].clone();
            for row in col + 1..n {
                let factor = a[row * n + col].clone() / pivot.clone();
                if factor.is_zero() {
                    continue;
                }
                for j in col + 1..n {
                    let upd = factor.clone() * a[col * n + j].clone();
                    a[row * n + j] -= upd;
                }
                a[row * n + col] = factor;
            }
        }
        Ok(Lu { n, lu: a, perm })
    }
}

impl<R> std::ops::Index<(usize, usize)> for DenseMatrix<R> {
    type Output = R;

    fn index(&self, (i, j): (usize, usize)) -> &R {
        &self.data[i * self.cols + j]
    }
}

impl<R> std::ops::IndexMut<(usize, usize)> for DenseMatrix<R> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut R {
        &mut self.data[i * self.cols + j]
    }
}

/// Packed LU factors (unit lower triangle below the diagonal).
#[derive(Clone, Debug)]
pub struct Lu<R> {
    n: usize,
    lu: Vec<R>,
    perm: Vec<usize>,
}

impl<R: Real> Lu<R> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[R]) -> Vec<R> {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side length mismatch");
        let mut x: Vec<R> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let upd = self.lu[i * n + j].clone() * x[j].clone();
                x[i] -= upd;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let upd = self.lu[i * n + j].clone() * x[j].clone();
                x[i] -= upd;
            }
            x[i] = x[i].clone() / self.lu[i * n + i].clone();
        }
        x
    }
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn solve_linear<R: Real>(a: &DenseMatrix<R>, b: &[R]) -> Result<Vec<R>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs has length {} but matrix has {} rows",
            b.len(),
            a.rows()
        )));
    }
    Ok(a.lu()?.solve(b))
}
