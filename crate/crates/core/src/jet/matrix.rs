//! Matrices with jet entries.

use super::dense::DMat;
use super::scalar::Coeff;
use super::series::Jet;
use crate::error::{structural, Result};
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct JetMatrix<C: Coeff = Complex64> {
    rows: usize,
    cols: usize,
    data: Vec<Jet<C>>,
}

impl<C: Coeff> JetMatrix<C> {
    pub fn zeros(rows: usize, cols: usize, n: usize, order: u32) -> Self {
        JetMatrix { rows, cols, data: vec![Jet::zero(n, order); rows * cols] }
    }

    pub fn identity(size: usize, n: usize, order: u32) -> Self {
        let mut m = Self::zeros(size, size, n, order);
        for i in 0..size {
            m.set(i, i, Jet::one(n, order));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Jet<C>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        let m = JetMatrix { rows, cols, data };
        m.check_uniform().expect("jet matrix entries disagree on (n, order)");
        m
    }

    /// Constant matrix.
    pub fn from_dense(d: &DMat<C>, n: usize, order: u32) -> Self {
        Self::from_fn(d.rows(), d.cols(), |i, j| Jet::constant(n, order, d[(i, j)].clone()))
    }

    fn check_uniform(&self) -> Result<()> {
        if let Some(first) = self.data.first() {
            for e in &self.data {
                if e.n() != first.n() || e.order() != first.order() {
                    return Err(structural("jet matrix entries disagree on (n, order)"));
                }
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n(&self) -> usize {
        self.data[0].n()
    }

    pub fn order(&self) -> u32 {
        self.data[0].order()
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet<C> {
        &self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Jet<C> {
        &mut self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Jet<C>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = &Jet<C>> {
        self.data.iter()
    }

    /// Minimum effective order over the entries.
    pub fn effective_order(&self) -> i32 {
        self.data.iter().map(|e| e.effective_order()).min().unwrap_or(i32::MAX)
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(structural(format!(
                "matrix product shape {}x{} * {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let (n, order) = (self.n(), self.order());
        if o.n() != n || o.order() != order {
            return Err(structural("matrix product (n, order) mismatch"));
        }
        let mut out = Self::zeros(self.rows, o.cols, n, order);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut s = Jet::zero(n, order);
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), o.get(k, j));
                    if a.is_zero() || b.is_zero() {
                        s = s.with_effective_order(a.effective_order().min(b.effective_order()));
                        continue;
                    }
                    s.add_assign_ref(&a.try_mul(b)?);
                }
                out.set(i, j, s);
            }
        }
        Ok(out)
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).expect("jet matrix product")
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix sum shape");
        JetMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + o.get(i, j))
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix difference shape");
        JetMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - o.get(i, j))
    }

    pub fn scale(&self, c: &C) -> Self {
        JetMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).scale(c))
    }

    /// Multiplies every entry by the jet `f`.
    pub fn scale_jet(&self, f: &Jet<C>) -> Self {
        JetMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * f)
    }

    pub fn transpose(&self) -> Self {
        JetMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Entrywise conjugate (the matrix of conjugate functions).
    pub fn conj(&self) -> Self {
        JetMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).conj())
    }

    pub fn conj_transpose(&self) -> Self {
        JetMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn map(&self, f: impl Fn(&Jet<C>) -> Jet<C>) -> Self {
        JetMatrix::from_fn(self.rows, self.cols, |i, j| f(self.get(i, j)))
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        JetMatrix::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    /// `[[a, b], [c, d]]`.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let (r1, c1) = (a.rows, a.cols);
        JetMatrix::from_fn(r1 + c.rows, c1 + b.cols, |i, j| match (i < r1, j < c1) {
            (true, true) => a.get(i, j).clone(),
            (true, false) => b.get(i, j - c1).clone(),
            (false, true) => c.get(i - r1, j).clone(),
            (false, false) => d.get(i - r1, j - c1).clone(),
        })
    }

    pub fn constant_part(&self) -> DMat<C> {
        DMat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).constant_term())
    }

    pub fn eval(&self, z: &[Complex64]) -> DMat<Complex64> {
        DMat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval(z))
    }

    /// Largest trusted coefficient modulus over all entries.
    pub fn residual(&self) -> f64 {
        self.data.iter().map(|e| e.residual()).fold(0.0, f64::max)
    }

    /// Largest trusted coefficient deviation from `o`.
    pub fn distance(&self, o: &Self) -> f64 {
        self.sub(o).residual()
    }

    pub fn with_effective_order(&self, eff: i32) -> Self {
        self.map(|e| e.clone().with_effective_order(eff))
    }

    pub fn truncate(&self, d: i32) -> Self {
        self.map(|e| e.truncate(d))
    }

    pub fn with_order(&self, order: u32) -> Self {
        self.map(|e| e.with_order(order))
    }

    /// Inverse by the Neumann series
    /// `M^{-1} = sum_k (-M0^{-1} R)^k M0^{-1}` with `M = M0 + R`, `R(0) = 0`.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(structural("inverse of a non-square jet matrix"));
        }
        let (size, n, order) = (self.rows, self.n(), self.order());
        let m0 = self.constant_part();
        let m0inv = m0.inverse()?;
        let m0inv_j = JetMatrix::from_dense(&m0inv, n, order);
        let rest = self.sub(&JetMatrix::from_dense(&m0, n, order));
        let k = m0inv_j.mul(&rest).scale(&-C::one());
        // Horner: S = I + K (I + K (I + ...))
        let id = JetMatrix::identity(size, n, order);
        let mut s = id.clone();
        for _ in 0..order {
            s = id.add(&k.mul(&s));
        }
        let inv = s.mul(&m0inv_j);
        let eff = self.effective_order();
        Ok(inv.with_effective_order(eff))
    }

    /// Converts coefficients to another field.
    pub fn map_field<D: Coeff>(&self, f: impl Fn(&C) -> D + Copy) -> JetMatrix<D> {
        JetMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).map_field(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::GeomError;
    use crate::jet::mono::Mono;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_inverse() {
        let id = JetMatrix::<Complex64>::identity(3, 2, 4);
        assert_eq!(id.inverse().unwrap(), id);
    }

    #[test]
    fn nilpotent_neumann_terminates() {
        let n = 2;
        let mut m = JetMatrix::<Complex64>::identity(2, n, 4);
        m.set(0, 1, Jet::z(n, 4, 0));
        let inv = m.inverse().unwrap();
        let mut expected = JetMatrix::identity(2, n, 4);
        expected.set(0, 1, -Jet::z(n, 4, 0));
        assert!(inv.distance(&expected) < 1e-15);
    }

    #[test]
    fn scalar_series_inverse() {
        let n = 2;
        let order = 4;
        let x = &Jet::<Complex64>::z(n, order, 0) + &Jet::zbar(n, order, 0);
        let mut h = JetMatrix::identity(2, n, order);
        h.set(0, 0, &Jet::one(n, order) + &x.scale(&c(0.2, 0.0)));
        let inv = h.inverse().unwrap();
        // 1/(1 + 0.2x) = sum (-0.2x)^k
        let mut series = Jet::zero(n, order);
        let mut p = Jet::one(n, order);
        for _ in 0..=order {
            series = &series + &p;
            p = &p * &x.scale(&c(-0.2, 0.0));
        }
        assert!(inv.get(0, 0).distance(&series) < 1e-15);
        assert!(inv.get(0, 0).coeff(Mono::new(&[1, 0], &[1, 0])).re - 0.08 < 1e-15);
        let prod = h.mul(&inv);
        assert!(prod.distance(&JetMatrix::identity(2, n, order)) < 1e-15);
    }

    #[test]
    fn singular_constant_term() {
        let m = JetMatrix::<Complex64>::zeros(2, 2, 2, 3);
        assert!(matches!(m.inverse(), Err(GeomError::Singular { .. })));
    }
}
