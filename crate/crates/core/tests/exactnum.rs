use hypglue::exactnum::is_square_rational;
use hypglue::{FieldElement, Scalar, Sign};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn fe(a: (i64, i64), b: (i64, i64), c: (i64, i64), d: (i64, i64)) -> FieldElement {
    FieldElement::new(q(a.0, a.1), q(b.0, b.1), q(c.0, c.1), q(d.0, d.1))
}

fn coef() -> impl Strategy<Value = (i64, i64)> {
    prop_oneof![
        1 => Just((0i64, 1i64)),
        4 => (-60i64..=60, 1i64..=40),
    ]
}

fn element() -> impl Strategy<Value = FieldElement> {
    (coef(), coef(), coef(), coef()).prop_map(|(a, b, c, d)| fe(a, b, c, d))
}

fn canonical(x: &FieldElement) -> bool {
    x.coords().iter().all(|r| r.denom().is_positive() && r.numer().gcd(r.denom()).is_one())
}

const BITS: u32 = 128;

/// Enclosure of `sqrt(n)` as `[lo, hi] / 2^BITS`.
fn sqrt_interval(n: u32) -> (BigInt, BigInt) {
    let scaled = BigUint::from(n) << (2 * BITS);
    let lo = scaled.sqrt();
    let hi = if &lo * &lo == scaled { lo.clone() } else { &lo + 1u32 };
    (lo.into(), hi.into())
}

/// Sign of `a + b√2 + c√7 + d√14` from a 128-bit interval enclosure, or
/// `None` when the enclosure straddles zero.
fn interval_sign(x: &FieldElement) -> Option<Sign> {
    let one = BigInt::one() << BITS;
    let roots = [(one.clone(), one), sqrt_interval(2), sqrt_interval(7), sqrt_interval(14)];
    // common denominator, then integer interval arithmetic
    let den = x.coords().iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let (mut lo, mut hi) = (BigInt::zero(), BigInt::zero());
    for (r, (rlo, rhi)) in x.coords().iter().zip(roots) {
        let k = r.numer() * (&den / r.denom());
        if k.is_negative() {
            lo += &k * &rhi;
            hi += &k * &rlo;
        } else {
            lo += &k * &rlo;
            hi += &k * &rhi;
        }
    }
    if lo.is_positive() {
        Some(Sign::Positive)
    } else if hi.is_negative() {
        Some(Sign::Negative)
    } else if lo.is_zero() && hi.is_zero() {
        Some(Sign::Zero)
    } else {
        None
    }
}

#[test]
fn basis_relations() {
    let s2 = FieldElement::sqrt2();
    let s7 = FieldElement::sqrt7();
    assert_eq!(s2.clone() * s7.clone(), FieldElement::sqrt14());
    let seventh = s7.scale(&q(1, 7));
    assert_eq!(seventh * s7, FieldElement::integer(1));
}

#[test]
fn inverse_of_two_plus_sqrt7() {
    let x = FieldElement::integer(2) + FieldElement::sqrt7();
    let inv = FieldElement::integer(1).checked_div(&x).unwrap();
    assert_eq!(inv, fe((-2, 3), (0, 1), (1, 3), (0, 1)));
    assert!(FieldElement::integer(1).checked_div(&FieldElement::zero()).is_err());
}

#[test]
fn documented_signs() {
    assert_eq!(FieldElement::zero().signum(), Sign::Zero);
    assert_eq!((FieldElement::sqrt2() - FieldElement::integer(1)).signum(), Sign::Positive);
    let x = FieldElement::sqrt2().scale(&q(2, 1)) - FieldElement::sqrt7();
    assert_eq!(x.signum(), Sign::Positive);
    assert_eq!((-x).signum(), Sign::Negative);
    // 99/70 is a convergent of √2
    let tight = fe((99, 70), (-1, 1), (0, 1), (0, 1));
    assert_eq!(tight.signum(), interval_sign(&tight).unwrap());
}

#[test]
fn rational_square_roots() {
    assert_eq!(is_square_rational(&q(9, 4)), Some(q(3, 2)));
    assert_eq!(is_square_rational(&q(2, 1)), None);
    assert_eq!(is_square_rational(&q(49, 64)), Some(q(7, 8)));
    assert_eq!(is_square_rational(&q(-4, 1)), None);
}

#[test]
fn oracle_resolves_exact_zero() {
    assert_eq!(interval_sign(&FieldElement::zero()), Some(Sign::Zero));
    assert_eq!(interval_sign(&FieldElement::sqrt14()), Some(Sign::Positive));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ring_axioms(x in element(), y in element(), z in element()) {
        prop_assert_eq!((x.clone() + y.clone()) + z.clone(), x.clone() + (y.clone() + z.clone()));
        prop_assert_eq!((x.clone() * y.clone()) * z.clone(), x.clone() * (y.clone() * z.clone()));
        prop_assert_eq!(x.clone() + y.clone(), y.clone() + x.clone());
        prop_assert_eq!(x.clone() * y.clone(), y.clone() * x.clone());
        prop_assert_eq!(x.clone() * (y.clone() + z.clone()), x.clone() * y.clone() + x.clone() * z.clone());
        prop_assert_eq!(x.clone() - x.clone(), FieldElement::zero());
    }

    #[test]
    fn inverse_multiplies_to_one(x in element()) {
        prop_assume!(!x.is_zero());
        let inv = FieldElement::integer(1).checked_div(&x).unwrap();
        prop_assert_eq!(x.clone() * inv.clone(), FieldElement::integer(1));
        prop_assert!(canonical(&inv));
    }

    #[test]
    fn sign_is_multiplicative(x in element(), y in element()) {
        prop_assert_eq!((x.clone() * y.clone()).signum(), x.signum() * y.signum());
    }

    #[test]
    fn sign_matches_interval_oracle(x in element()) {
        if let Some(s) = interval_sign(&x) {
            prop_assert_eq!(x.signum(), s);
        }
    }

    #[test]
    fn coordinates_stay_canonical(x in element(), y in element(), z in element()) {
        let chain = (x.clone() * y.clone() - z.clone()) * (x + z) + y;
        prop_assert!(canonical(&chain));
        if !chain.is_zero() {
            prop_assert!(canonical(&FieldElement::integer(3).checked_div(&chain).unwrap()));
        }
    }

    #[test]
    fn f64_view_agrees_in_sign(x in element()) {
        let f = Scalar::to_f64(&x);
        if f.abs() > 1e-9 {
            prop_assert_eq!(x.signum(), Sign::of_i32(f.signum() as i32));
        }
    }

    #[test]
    fn text_round_trip(x in element()) {
        prop_assert_eq!(FieldElement::parse_text(&x.to_text()).unwrap(), x);
    }
}
