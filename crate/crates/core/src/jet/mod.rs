//! Jet algebra: sparse truncated power series in `z, zbar` and matrices of them.

mod dense;
mod matrix;
mod mono;
mod scalar;
mod series;

pub use dense::DMat;
pub use matrix::JetMatrix;
pub use mono::{slot, Mono, MultiIndexPair, MAX_DIM};
pub use scalar::{exact, exact_abs_max, exact_is_zero, Coeff, ExactComplex, PRUNE_EPS};
pub use series::{Jet, Substitution};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Serialized jet term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetRecord {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// Terms of `f` in graded order.
pub fn to_records(f: &Jet) -> Vec<JetRecord> {
    f.terms()
        .map(|(m, c)| JetRecord { alpha: m.alpha_vec(f.n()), beta: m.beta_vec(f.n()), re: c.re, im: c.im })
        .collect()
}

pub fn from_records(n: usize, order: u32, recs: &[JetRecord]) -> Jet {
    Jet::from_terms(n, order, recs.iter().map(|r| (Mono::new(&r.alpha, &r.beta), Complex64::new(r.re, r.im))))
}

/// Converts an exact jet to floating point.
pub fn exact_to_f64(f: &Jet<ExactComplex>) -> Jet {
    f.map_field(|c| c.to_c64())
}
