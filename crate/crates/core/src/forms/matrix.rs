use super::{Basis, Form, Geometry, Op};
use crate::error::Result;
use crate::jet::{Jet, JetMatrix};
use num_complex::Complex64;

/// Square matrix of forms, e.g. a connection or curvature matrix.
/// Entry `(i, j)` is the `e_i` component of the image of `e_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormMatrix {
    size: usize,
    entries: Vec<Form>,
}

impl FormMatrix {
    pub fn zero(size: usize, n: usize, order: u32, basis: Basis) -> Self {
        FormMatrix { size, entries: vec![Form::zero(n, order, basis); size * size] }
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> Form) -> Self {
        let mut entries = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                entries.push(f(i, j));
            }
        }
        FormMatrix { size, entries }
    }

    /// Entrywise operator applied to a matrix of functions.
    pub fn differential(g: &Geometry, m: &JetMatrix, op: Op) -> Result<Self> {
        let mut out = Vec::with_capacity(m.rows() * m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                out.push(g.apply(op, &g.function(m.get(i, j).clone()))?);
            }
        }
        Ok(FormMatrix { size: m.rows(), entries: out })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &Form {
        &self.entries[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: Form) {
        self.entries[i * self.size + j] = f;
    }

    pub fn entries(&self) -> impl Iterator<Item = &Form> {
        self.entries.iter()
    }

    pub fn map(&self, f: impl Fn(&Form) -> Form) -> Self {
        FormMatrix { size: self.size, entries: self.entries.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&Form) -> Result<Form>) -> Result<Self> {
        Ok(FormMatrix { size: self.size, entries: self.entries.iter().map(f).collect::<Result<_>>()? })
    }

    fn zip(&self, o: &Self, f: impl Fn(&Form, &Form) -> Result<Form>) -> Result<Self> {
        let entries = self.entries.iter().zip(&o.entries).map(|(a, b)| f(a, b)).collect::<Result<_>>()?;
        Ok(FormMatrix { size: self.size, entries })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.zip(o, |a, b| a.try_add(b))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.zip(o, |a, b| a.try_sub(b))
    }

    pub fn neg(&self) -> Self {
        self.map(|f| f.neg())
    }

    pub fn conj(&self) -> Self {
        self.map(|f| f.conj())
    }

    pub fn transpose(&self) -> Self {
        FormMatrix::from_fn(self.size, |i, j| self.get(j, i).clone())
    }

    /// `(A ^ B)_{ij} = sum_k A_{ik} ^ B_{kj}`.
    pub fn wedge(&self, o: &Self) -> Result<Self> {
        let s = self.size;
        let first = &self.entries[0];
        let mut out = FormMatrix::zero(s, first.n(), first.order(), first.basis());
        for i in 0..s {
            for j in 0..s {
                let mut acc = out.get(i, j).clone();
                for k in 0..s {
                    acc = acc.try_add(&self.get(i, k).wedge(o.get(k, j))?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// `M A` for a matrix of functions `M`.
    pub fn left(&self, m: &JetMatrix) -> Result<Self> {
        let s = self.size;
        let mut out = self.map(|f| Form::zero(f.n(), f.order(), f.basis()));
        for i in 0..s {
            for j in 0..s {
                let mut acc = out.get(i, j).clone();
                for k in 0..s {
                    let c = m.get(i, k);
                    if !c.is_zero() {
                        acc = acc.try_add(&self.get(k, j).scale_jet(c))?;
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// `A M` for a matrix of functions `M`.
    pub fn right(&self, m: &JetMatrix) -> Result<Self> {
        Ok(self.transpose().left(&m.transpose())?.transpose())
    }

    pub fn apply(&self, g: &Geometry, op: Op) -> Result<Self> {
        self.try_map(|f| g.apply(op, f))
    }

    pub fn component(&self, p: u32, q: u32) -> Self {
        self.map(|f| f.component(p, q))
    }

    /// Coefficient of generator mask `mask` in entry `(i, j)`.
    pub fn coefficient(&self, i: usize, j: usize, mask: u16) -> Jet {
        let f = self.get(i, j);
        f.coeff(mask).cloned().unwrap_or_else(|| Jet::zero(f.n(), f.order()))
    }

    pub fn coefficient_at(&self, i: usize, j: usize, mask: u16, z: &[Complex64]) -> Complex64 {
        self.get(i, j).coeff(mask).map_or(Complex64::new(0.0, 0.0), |f| f.eval(z))
    }

    pub fn residual(&self) -> f64 {
        self.entries.iter().map(|f| f.residual()).fold(0.0, f64::max)
    }

    pub fn distance(&self, o: &Self) -> f64 {
        self.sub(o).map_or(f64::INFINITY, |d| d.residual())
    }

    /// Largest coefficient modulus at the point `z`.
    pub fn max_abs_at(&self, z: &[Complex64]) -> f64 {
        self.entries
            .iter()
            .flat_map(|f| f.terms().map(|(_, j)| j.truncate(j.effective_order()).eval(z).norm()))
            .fold(0.0, f64::max)
    }
}
