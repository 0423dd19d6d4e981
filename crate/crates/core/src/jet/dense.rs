//! Small dense matrices over a coefficient field (constant terms, point values).

use super::scalar::Coeff;
use crate::error::{GeomError, Result};
use num_complex::Complex64;
use std::ops::{Index, IndexMut};

#[derive(Clone, Debug, PartialEq)]
pub struct DMat<C: Coeff = Complex64> {
    rows: usize,
    cols: usize,
    data: Vec<C>,
}

impl<C: Coeff> DMat<C> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DMat { rows, cols, data: vec![C::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DMat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "dense product shape");
        DMat::from_fn(self.rows, o.cols, |i, j| {
            let mut s = C::zero();
            for k in 0..self.cols {
                s += self[(i, k)].clone() * o[(k, j)].clone();
            }
            s
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        DMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() + o[(i, j)].clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        DMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() - o[(i, j)].clone())
    }

    pub fn scale(&self, c: &C) -> Self {
        DMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() * c.clone())
    }

    pub fn transpose(&self) -> Self {
        DMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn conj(&self) -> Self {
        DMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn conj_transpose(&self) -> Self {
        DMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Max row sum of moduli.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)].modulus()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.modulus()).fold(0.0, f64::max)
    }

    /// Gauss-Jordan inverse with partial pivoting; errors carry an
    /// infinity-norm condition estimate.
    pub fn inverse(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.norm_inf().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let (piv, best) =
                (col..n)
                    .map(|r| (r, a[(r, col)].modulus()))
                    .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= 1e-13 * scale || a[(piv, col)].is_negligible() && best == 0.0 {
                return Err(GeomError::Singular { cond: if best > 0.0 { scale / best } else { f64::INFINITY } });
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] = a[(col, j)].clone() / p.clone();
                inv[(col, j)] = inv[(col, j)].clone() / p.clone();
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)].clone();
                if f.is_negligible() {
                    continue;
                }
                for j in 0..n {
                    let t = a[(col, j)].clone() * f.clone();
                    a[(r, j)] -= t;
                    let t = inv[(col, j)].clone() * f.clone();
                    inv[(r, j)] -= t;
                }
            }
        }
        Ok(inv)
    }

    /// Infinity-norm condition number (infinite if singular).
    pub fn condition(&self) -> f64 {
        match self.inverse() {
            Ok(inv) => self.norm_inf() * inv.norm_inf(),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> DMat<D> {
        DMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl<C: Coeff> Index<(usize, usize)> for DMat<C> {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.data[i * self.cols + j]
    }
}

impl<C: Coeff> IndexMut<(usize, usize)> for DMat<C> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = DMat::from_fn(3, 3, |i, j| {
            Complex64::new((i * 3 + j) as f64 * 0.1 + if i == j { 2.0 } else { 0.0 }, 0.2 * j as f64)
        });
        let inv = m.inverse().unwrap();
        let p = m.mul(&inv);
        assert!(p.sub(&DMat::identity(3)).max_abs() < 1e-13);
    }

    #[test]
    fn singular_reports_condition() {
        let m = DMat::from_fn(2, 2, |_, _| Complex64::new(1.0, 0.0));
        assert!(matches!(m.inverse(), Err(GeomError::Singular { .. })));
    }
}
