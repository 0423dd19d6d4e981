//! Packed monomials `z^alpha zbar^beta` and per-(n, order) index tables.
//!
//! A monomial is stored in one `u64`: byte `k` holds `alpha_{k+1}` and byte
//! `4 + k` holds `beta_{k+1}`. Multiplying monomials is integer addition and
//! conjugation is a 32-bit rotation.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Largest supported complex dimension.
pub const MAX_DIM: usize = 4;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Mono(u64);

/// Byte slot of real variable `a` in `0..2n`: `a < n` is `z_{a+1}`, otherwise `zbar_{a-n+1}`.
#[inline]
pub fn slot(n: usize, a: usize) -> usize {
    if a < n {
        a
    } else {
        MAX_DIM + a - n
    }
}

impl Mono {
    pub const ONE: Mono = Mono(0);

    /// Builds `z^alpha zbar^beta`; both slices have length `n <= 4`.
    pub fn new(alpha: &[u32], beta: &[u32]) -> Mono {
        debug_assert!(alpha.len() <= MAX_DIM && beta.len() <= MAX_DIM);
        let mut x = 0u64;
        for (k, &e) in alpha.iter().enumerate() {
            x |= ((e as u64) & 0xff) << (8 * k);
        }
        for (k, &e) in beta.iter().enumerate() {
            x |= ((e as u64) & 0xff) << (8 * (MAX_DIM + k));
        }
        Mono(x)
    }

    /// The degree-one monomial of real variable `a` (see [`slot`]).
    pub fn var(n: usize, a: usize) -> Mono {
        Mono(1u64 << (8 * slot(n, a)))
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn alpha(self, k: usize) -> u32 {
        ((self.0 >> (8 * k)) & 0xff) as u32
    }

    #[inline]
    pub fn beta(self, k: usize) -> u32 {
        ((self.0 >> (8 * (MAX_DIM + k))) & 0xff) as u32
    }

    /// Exponent of real variable `a`.
    #[inline]
    pub fn exp(self, n: usize, a: usize) -> u32 {
        ((self.0 >> (8 * slot(n, a))) & 0xff) as u32
    }

    pub fn alpha_vec(self, n: usize) -> Vec<u32> {
        (0..n).map(|k| self.alpha(k)).collect()
    }

    pub fn beta_vec(self, n: usize) -> Vec<u32> {
        (0..n).map(|k| self.beta(k)).collect()
    }

    #[inline]
    pub fn degree(self) -> u32 {
        (self.0.wrapping_mul(0x0101_0101_0101_0101) >> 56) as u32
    }

    pub fn alpha_degree(self) -> u32 {
        ((self.0 & 0xffff_ffff).wrapping_mul(0x0101_0101_0101_0101) >> 56) as u32
    }

    pub fn beta_degree(self) -> u32 {
        self.degree() - self.alpha_degree()
    }

    /// `z^alpha zbar^beta -> z^beta zbar^alpha`.
    #[inline]
    pub fn conj(self) -> Mono {
        Mono(self.0.rotate_left(32))
    }

    #[inline]
    pub fn mul(self, other: Mono) -> Mono {
        Mono(self.0 + other.0)
    }

    /// Divides by variable `a`; `None` if its exponent is zero.
    #[inline]
    pub fn lower(self, n: usize, a: usize) -> Option<Mono> {
        if self.exp(n, a) == 0 {
            None
        } else {
            Some(Mono(self.0 - (1u64 << (8 * slot(n, a)))))
        }
    }

    /// Whether `other` divides `self`.
    pub fn is_divisible_by(self, other: Mono) -> bool {
        (0..8).all(|b| ((other.0 >> (8 * b)) & 0xff) <= ((self.0 >> (8 * b)) & 0xff))
    }

    /// `self / other`, assuming [`Mono::is_divisible_by`].
    pub fn div(self, other: Mono) -> Mono {
        Mono(self.0 - other.0)
    }

    /// Largest 1-based index `r` with `alpha_r != 0`, or 0 when `alpha = 0`.
    pub fn l_alpha(self, n: usize) -> usize {
        (0..n).rev().find(|&k| self.alpha(k) != 0).map_or(0, |k| k + 1)
    }

    /// Enumerates all monomials in `n` conjugate pairs with degree at most `order`,
    /// sorted in graded order.
    pub fn all(n: usize, order: u32) -> Vec<Mono> {
        let mut out = Vec::new();
        let mut exps = vec![0u32; 2 * n];
        fn rec(n: usize, pos: usize, left: u32, exps: &mut [u32], out: &mut Vec<Mono>) {
            if pos == 2 * n {
                out.push(Mono::new(&exps[..n], &exps[n..]));
                return;
            }
            for e in 0..=left {
                exps[pos] = e;
                rec(n, pos + 1, left - e, exps, out);
            }
            exps[pos] = 0;
        }
        rec(n, 0, order, &mut exps, &mut out);
        out.sort();
        out
    }

    /// Monomials `z^alpha` (holomorphic) of exact degree `d`.
    pub fn holomorphic_of_degree(n: usize, d: u32) -> Vec<Mono> {
        Mono::all(n, d).into_iter().filter(|m| m.degree() == d && m.beta_degree() == 0).collect()
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.swap_bytes().cmp(&self.0.swap_bytes()))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Serialized multi-index pair `(alpha, beta)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiIndexPair {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
}

impl MultiIndexPair {
    pub fn from_mono(m: Mono, n: usize) -> Self {
        MultiIndexPair { alpha: m.alpha_vec(n), beta: m.beta_vec(n) }
    }

    pub fn to_mono(&self) -> Mono {
        Mono::new(&self.alpha, &self.beta)
    }

    /// `l(alpha)` with the convention `max(empty) = 0`.
    pub fn l_alpha(&self) -> usize {
        self.alpha.iter().rposition(|&e| e != 0).map_or(0, |k| k + 1)
    }
}

/// Dense index of all monomials for one `(n, order)` plus a product table.
pub(crate) struct MonoTable {
    pub monos: Vec<Mono>,
    index: HashMap<Mono, u32>,
    prod: Option<Vec<u32>>,
    count: usize,
}

const NO_PRODUCT: u32 = u32::MAX;
const MAX_PRODUCT_TABLE: usize = 1600;

impl MonoTable {
    fn build(n: usize, order: u32) -> Self {
        let monos = Mono::all(n, order);
        let count = monos.len();
        let index: HashMap<Mono, u32> = monos.iter().enumerate().map(|(i, m)| (*m, i as u32)).collect();
        let prod = (count <= MAX_PRODUCT_TABLE).then(|| {
            let mut t = vec![NO_PRODUCT; count * count];
            for (i, a) in monos.iter().enumerate() {
                for (j, b) in monos.iter().enumerate() {
                    if a.degree() + b.degree() <= order {
                        t[i * count + j] = index[&a.mul(*b)];
                    }
                }
            }
            t
        });
        MonoTable { monos, index, prod, count }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn idx(&self, m: Mono) -> usize {
        self.index[&m] as usize
    }

    /// Index of the product, assuming its degree does not exceed the order.
    #[inline]
    pub fn prod(&self, i: usize, j: usize) -> usize {
        match &self.prod {
            Some(t) => t[i * self.count + j] as usize,
            None => self.index[&self.monos[i].mul(self.monos[j])] as usize,
        }
    }
}

pub(crate) fn table(n: usize, order: u32) -> Arc<MonoTable> {
    static TABLES: OnceLock<Mutex<HashMap<(usize, u32), Arc<MonoTable>>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = tables.lock().expect("table cache poisoned").get(&(n, order)) {
        return Arc::clone(t);
    }
    let built = Arc::new(MonoTable::build(n, order));
    let mut guard = tables.lock().expect("table cache poisoned");
    Arc::clone(guard.entry((n, order)).or_insert(built))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_roundtrip() {
        let m = Mono::new(&[2, 0, 1], &[0, 3, 0]);
        assert_eq!(m.alpha_vec(3), vec![2, 0, 1]);
        assert_eq!(m.beta_vec(3), vec![0, 3, 0]);
        assert_eq!(m.degree(), 6);
        assert_eq!(m.alpha_degree(), 3);
        assert_eq!(m.conj().alpha_vec(3), vec![0, 3, 0]);
        assert_eq!(m.l_alpha(3), 3);
        assert_eq!(Mono::new(&[0, 0], &[1, 1]).l_alpha(2), 0);
    }

    #[test]
    fn graded_order_and_counts() {
        let all = Mono::all(2, 4);
        // monomials of degree <= 4 in 4 real variables: C(8, 4)
        assert_eq!(all.len(), 70);
        assert_eq!(all[0], Mono::ONE);
        for w in all.windows(2) {
            assert!(w[0].degree() <= w[1].degree());
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn product_table_matches_addition() {
        let t = table(2, 3);
        for i in 0..t.len() {
            for j in 0..t.len() {
                let (a, b) = (t.monos[i], t.monos[j]);
                if a.degree() + b.degree() <= 3 {
                    assert_eq!(t.monos[t.prod(i, j)], a.mul(b));
                }
            }
        }
    }
}
