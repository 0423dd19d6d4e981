use acgeom::jet::{exact, ExactComplex, Jet, Mono};
use num_complex::Complex64;
use proptest::prelude::*;

const N: usize = 2;
const ORDER: u32 = 4;

fn term() -> impl Strategy<Value = (Vec<u32>, Vec<u32>, i64, i64)> {
    (prop::collection::vec(0u32..3, N), prop::collection::vec(0u32..3, N), -8i64..8, -8i64..8)
}

fn monomial(a: &[u32], b: &[u32]) -> Option<Mono> {
    let m = Mono::new(a, b);
    (m.degree() <= ORDER).then_some(m)
}

/// Sparse jets with small dyadic coefficients, so floating-point results are exact.
fn jet() -> impl Strategy<Value = Jet> {
    prop::collection::vec(term(), 0..6).prop_map(|ts| {
        Jet::from_terms(
            N,
            ORDER,
            ts.iter()
                .filter_map(|(a, b, re, im)| {
                    monomial(a, b).map(|m| (m, Complex64::new(*re as f64 / 8.0, *im as f64 / 8.0)))
                })
                .collect::<Vec<_>>(),
        )
    })
}

fn exact_jet() -> impl Strategy<Value = Jet<ExactComplex>> {
    prop::collection::vec(term(), 0..6).prop_map(|ts| {
        Jet::from_terms(
            N,
            ORDER,
            ts.iter()
                .filter_map(|(a, b, re, im)| monomial(a, b).map(|m| (m, exact(*re, 3, *im, 7))))
                .collect::<Vec<_>>(),
        )
    })
}

fn point() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5).prop_map(|(a, b)| Complex64::new(a, b)), N)
}

proptest! {
    #[test]
    fn multiplication_is_commutative_and_associative(f in jet(), g in jet(), h in jet()) {
        prop_assert_eq!(&f * &g, &g * &f);
        prop_assert!((&(&f * &g) * &h).distance(&(&f * &(&g * &h))) <= 1e-13);
    }

    #[test]
    fn exact_ring_axioms(f in exact_jet(), g in exact_jet(), h in exact_jet()) {
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
        prop_assert_eq!(&f * &g, &g * &f);
    }

    #[test]
    fn mixed_partials_commute(f in jet(), j in 0..N, k in 0..N) {
        prop_assert_eq!(f.dz(j).dzbar(k), f.dzbar(k).dz(j));
    }

    #[test]
    fn conjugation_commutes_with_evaluation(f in jet(), p in point()) {
        let lhs = f.conj().eval(&p);
        let rhs = f.eval(&p).conj();
        prop_assert!((lhs - rhs).norm() <= 1e-14);
        prop_assert_eq!(f.conj().conj(), f.clone());
    }

    #[test]
    fn conjugation_is_multiplicative(f in jet(), g in jet()) {
        prop_assert!((&f * &g).conj().distance(&(&f.conj() * &g.conj())) <= 1e-15);
    }
}
