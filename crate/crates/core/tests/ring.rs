//! Field axioms and exact signs in Q(λ) for the golden ratio and the tribonacci constant.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use tessella_core::ring::matrix::{characteristic_polynomial, spectral_radius};
use tessella_core::ring::{IntPoly, Ring, RingElement};
use tessella_core::system::word_to_spec;

fn golden() -> Ring {
    word_to_spec(&["ab", "a"]).unwrap().ring
}

fn tribonacci() -> Ring {
    word_to_spec(&["ab", "ac", "a"]).unwrap().ring
}

fn element(ring: &Ring, coords: &[(i64, i64)]) -> RingElement {
    ring.element(
        coords
            .iter()
            .map(|&(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
            .collect(),
    )
}

fn coords(n: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-50i64..50, 1i64..12), n)
}

proptest! {
    #[test]
    fn golden_field_axioms(a in coords(2), b in coords(2), c in coords(2)) {
        let r = golden();
        let (a, b, c) = (element(&r, &a), element(&r, &b), element(&r, &c));
        prop_assert_eq!((&a + &b) * &c, &a * &c + &b * &c);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        if !a.is_zero() {
            prop_assert_eq!(&a * &a.inverse().unwrap(), r.one());
        }
    }

    #[test]
    fn tribonacci_field_axioms(a in coords(3), b in coords(3)) {
        let r = tribonacci();
        let (a, b) = (element(&r, &a), element(&r, &b));
        prop_assert_eq!((&a + &b) * (&a - &b), &a * &a - &b * &b);
        if !b.is_zero() {
            prop_assert_eq!(&(&a * &b) * &b.inverse().unwrap(), a.clone());
        }
    }

    #[test]
    fn order_agrees_with_floats(a in coords(2), b in coords(2)) {
        let r = golden();
        let (a, b) = (element(&r, &a), element(&r, &b));
        let (x, y) = (a.to_f64(), b.to_f64());
        if (x - y).abs() > 1e-9 {
            prop_assert_eq!(a < b, x < y);
        }
        prop_assert_eq!(a.abs().to_f64(), x.abs());
    }

    #[test]
    fn powers_multiply(a in coords(2), m in 0u32..6, n in 0u32..6) {
        let r = golden();
        let a = element(&r, &a);
        prop_assert_eq!(a.pow(m) * a.pow(n), a.pow(m + n));
    }
}

#[test]
fn generators_satisfy_their_minimal_polynomials() {
    for (ring, poly) in [
        (golden(), "x^2 - x - 1"),
        (tribonacci(), "x^3 - x^2 - x - 1"),
    ] {
        let l = ring.generator().unwrap();
        let p = IntPoly::parse(poly).unwrap();
        let value = p
            .coeffs()
            .iter()
            .enumerate()
            .fold(ring.zero(), |acc, (k, c)| {
                acc + l.pow(k as u32) * ring.from_rational(BigRational::from_integer(c.clone()))
            });
        assert!(value.is_zero());
        assert_eq!(ring.minpoly().unwrap().poly(), &p);
    }
}

#[test]
fn perron_values() {
    // The characteristic polynomial of [[1,1],[1,0]] is x^2 - x - 1, so ρ = φ.
    assert_eq!(
        characteristic_polynomial(&[vec![1, 1], vec![1, 0]]),
        IntPoly::parse("x^2 - x - 1").unwrap()
    );
    let q = |n: i64| BigRational::from_integer(BigInt::from(n));
    let est = spectral_radius(&[vec![q(1), q(1)], vec![q(1), q(0)]]).unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!(est.lower <= phi && phi <= est.upper);
    let v = est.vector.unwrap();
    assert!((v[0] / v[1] - phi).abs() < 1e-9);
}
