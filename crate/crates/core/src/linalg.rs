//! Dense complex matrices and the Hermitian log-determinant.

use num_complex::Complex64;
use std::ops::{Index, IndexMut};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a generator called once per entry in row-major order.
    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self * other^H`.
    pub fn mul_adjoint(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.cols);
        CMatrix::from_fn(self.rows, other.rows, |i, j| {
            self.row(i).iter().zip(other.row(j)).map(|(a, b)| a * b.conj()).sum()
        })
    }

    /// `A0 A0^H`, where `A0` keeps only `columns` of `self`.
    pub fn column_gram(&self, columns: &[usize]) -> CMatrix {
        let p = self.rows;
        let mut g = CMatrix::zeros(p, p);
        for i in 0..p {
            let ri = self.row(i);
            for j in 0..=i {
                let rj = self.row(j);
                let s: Complex64 = columns.iter().map(|&k| ri[k] * rj[k].conj()).sum();
                g[(i, j)] = s;
                g[(j, i)] = s.conj();
            }
        }
        g
    }

    /// `I + scale * self` for a square matrix.
    pub fn identity_plus_scaled(&self, scale: f64) -> CMatrix {
        assert_eq!(self.rows, self.cols);
        let mut out = CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * scale);
        for i in 0..self.rows {
            out[(i, i)] += 1.0;
        }
        out
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Natural log-determinant of a Hermitian positive-definite matrix via Cholesky.
///
/// Only the lower triangle is read. Returns `None` when a pivot is not
/// strictly positive and finite.
pub fn hpd_log_det(m: &CMatrix) -> Option<f64> {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let mut l = CMatrix::zeros(n, n);
    let mut log_det = 0.0;
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0 && d.is_finite()) {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        log_det += 2.0 * djj.ln();
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(log_det)
}

/// Squared Euclidean norm of `a - b`.
pub fn dist_sqr(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}
