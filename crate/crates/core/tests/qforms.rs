use std::collections::BTreeSet;

use hypglue::qforms::{
    candidate_places, congruent_diagonals, hasse_invariant, hilbert_symbol, prime_divisors, ramification_of_diagonal,
    ramification_set, same_square_class, separate_classes, ClassValue, Place, PlaceSet, RationalQuadraticForm,
};
use hypglue::{Rational, RationalMatrix};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn shipped() -> RationalQuadraticForm {
    RationalQuadraticForm::parse(include_str!("../data/form.txt")).unwrap()
}

fn published_diagonal() -> Vec<Rational> {
    vec![r(7, 2), r(1, 2), r(1, 6), r(-3, 8), r(1, 8)]
}

/// Places where a product formula or Hasse computation can be nontrivial.
fn places_of(xs: &[&Rational]) -> BTreeSet<Place> {
    let mut out = BTreeSet::from([Place::Infinite, Place::Prime(2)]);
    for x in xs {
        for n in [x.numer(), x.denom()] {
            for p in prime_divisors(&n.abs().to_biguint().unwrap()).unwrap() {
                out.insert(Place::Prime(p));
            }
        }
    }
    out
}

/// `x = p^v · u` with `u` an integer prime to `p` after clearing squares, `v ∈ {0, 1}`.
fn reduce_mod_squares(x: &Rational, p: i64) -> (i64, u32) {
    let mut n = (x.numer() * x.denom()).to_i64().unwrap();
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    (n, v % 2)
}

/// Brute-force Hilbert symbol: looks for a primitive zero of `a x² + b y² − z²`
/// modulo `p^e` that Hensel's lemma lifts to Z_p.
fn hilbert_oracle(a: &Rational, b: &Rational, p: i64) -> i8 {
    let (ua, va) = reduce_mod_squares(a, p);
    let (ub, vb) = reduce_mod_squares(b, p);
    let e = if p == 2 { 5 } else { 3 };
    let m = p.pow(e);
    let ca = (ua.rem_euclid(m) * p.pow(va)) % m;
    let cb = (ub.rem_euclid(m) * p.pow(vb)) % m;
    let coefs = [ca, cb, m - 1];
    let val = |mut x: i64| {
        if x % m == 0 {
            return e;
        }
        let mut k = 0;
        while x % p == 0 {
            x /= p;
            k += 1;
        }
        k
    };
    for fixed in 0..3 {
        for s in 0..m {
            for t in 0..m {
                let mut v = [0i64; 3];
                let others: Vec<usize> = (0..3).filter(|&i| i != fixed).collect();
                v[fixed] = 1;
                v[others[0]] = s;
                v[others[1]] = t;
                let f = (0..3).map(|i| coefs[i] * v[i] % m * v[i] % m).sum::<i64>() % m;
                // Hensel: some coordinate with 2·c·v of valuation k and f ≡ 0 mod p^(2k+1)
                let lifts = (0..3).any(|i| {
                    let k = val(2 * coefs[i] % m * v[i] % m);
                    2 * k < e && f % p.pow(2 * k + 1) == 0
                });
                if lifts {
                    return 1;
                }
            }
        }
    }
    -1
}

#[test]
fn documented_hilbert_symbols() {
    assert_eq!(hilbert_symbol(&r(-1, 1), &r(-1, 1), Place::Infinite).unwrap(), -1);
    assert_eq!(hilbert_symbol(&r(2, 1), &r(7, 1), Place::Prime(7)).unwrap(), 1);
    assert_eq!(hilbert_symbol(&r(-1, 1), &r(-1, 1), Place::Prime(2)).unwrap(), -1);
    assert_eq!(hilbert_oracle(&r(2, 1), &r(7, 1), 7), 1);
    assert_eq!(hilbert_oracle(&r(-1, 1), &r(-1, 1), 2), -1);
    assert_eq!(hilbert_oracle(&r(-1, 1), &r(-1, 1), 3), 1);
    assert_eq!(hilbert_oracle(&r(3, 1), &r(7, 1), 7), -1);
}

#[test]
fn no_small_rational_solution_of_sum_of_three_squares() {
    // −x² − y² = z² has only the trivial solution; check all small primitive triples mod 8
    for x in 0..8i64 {
        for y in 0..8 {
            for z in 0..8 {
                if x % 2 == 1 || y % 2 == 1 || z % 2 == 1 {
                    assert_ne!((x * x + y * y + z * z) % 8, 0);
                }
            }
        }
    }
}

#[test]
fn hasse_examples() {
    let ones = vec![r(1, 1); 5];
    for p in [Place::Infinite, Place::Prime(2), Place::Prime(3), Place::Prime(7)] {
        assert_eq!(hasse_invariant(&ones, p).unwrap(), 1);
    }
    assert_eq!(hasse_invariant(&[r(-1, 1), r(-1, 1)], Place::Infinite).unwrap(), -1);
    // two independent diagonalizations of the shipped matrix agree at 3
    let q = shipped();
    let d1 = q.diagonalize_in_order(&[0, 1, 2, 3, 4]).entries;
    let d2 = q.diagonalize_in_order(&[4, 3, 2, 1, 0]).entries;
    assert_eq!(hasse_invariant(&d1, Place::Prime(3)).unwrap(), hasse_invariant(&d2, Place::Prime(3)).unwrap());
}

#[test]
fn diagonalization_examples() {
    let id = RationalQuadraticForm::from_i64_diagonal(&[1, 1]);
    assert_eq!(id.diagonalize().entries, vec![r(1, 1), r(1, 1)]);
    let hyp = RationalQuadraticForm::new(RationalMatrix::from_rows(vec![vec![r(0, 1), r(1, 1)], vec![r(1, 1), r(0, 1)]]))
        .unwrap();
    let d = hyp.diagonalize().entries;
    assert_eq!(d.len(), 2);
    let classes: Vec<bool> = d.iter().map(|x| same_square_class(x, &r(1, 1))).collect();
    assert!(classes.contains(&true));
    assert!(d.iter().any(|x| same_square_class(x, &r(-1, 1))));
}

#[test]
fn shipped_form_invariants() {
    let q = shipped();
    assert_eq!(q.signature(), (4, 1, 0));
    assert_eq!(ramification_set(&q).unwrap(), PlaceSet::parse("{2, 7}").unwrap());
    let standard: Vec<Rational> = [1, 1, 1, 1, -1].iter().map(|&k| r(k, 1)).collect();
    assert!(ramification_of_diagonal(&standard).unwrap().is_empty());
    // the published diagonal belongs to ½xᵀAx
    let half = q.scaled(&r(1, 2)).diagonalize().entries;
    assert!(congruent_diagonals(&half, &published_diagonal()).unwrap());
    assert!(!congruent_diagonals(&q.diagonalize().entries, &published_diagonal()).unwrap());
    assert_eq!(ramification_of_diagonal(&published_diagonal()).unwrap(), PlaceSet::parse("{2, 7}").unwrap());
}

#[test]
fn class_separation() {
    let own = PlaceSet::parse("{2, 7}").unwrap();
    let refs: Vec<(String, ClassValue)> = [("(1)", "∅"), ("(2)", "{3, inf}"), ("(3)", "{2, 5}"), ("(4)", "non-arithmetic")]
        .iter()
        .map(|(k, v)| (k.to_string(), v.parse().unwrap()))
        .collect();
    let rep = separate_classes(&own, &refs);
    assert!(rep.all_distinct);
    assert_eq!(rep.distinct, 5);
    let same = separate_classes(&own, &[("copy".into(), ClassValue::Ramification(own.clone()))]);
    assert!(!same.all_distinct);
    let empty = separate_classes(&own, &[("(1)".into(), "∅".parse().unwrap())]);
    assert!(empty.all_distinct);
}

fn nonzero() -> impl Strategy<Value = Rational> {
    (-400i64..=400, 1i64..=60).prop_filter("nonzero", |(n, _)| *n != 0).prop_map(|(n, d)| r(n, d))
}

fn small_prime_rational() -> impl Strategy<Value = Rational> {
    (prop::sample::select(vec![-1i64, 1]), 0u32..3, 0u32..3, 0u32..2, 0u32..2, 0u32..2).prop_map(|(s, a, b, c, d, e)| {
        r(s * 2i64.pow(a) * 3i64.pow(b) * 7i64.pow(c), 5i64.pow(d) * 3i64.pow(e))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hilbert_symbol_laws(a in nonzero(), b in nonzero(), c in nonzero()) {
        for p in places_of(&[&a, &b, &c]) {
            let h = |x: &Rational, y: &Rational| hilbert_symbol(x, y, p).unwrap();
            prop_assert_eq!(h(&a, &b), h(&b, &a));
            prop_assert_eq!(h(&a, &(&b * &c)), h(&a, &b) * h(&a, &c));
            prop_assert_eq!(h(&a, &(-&a)), 1);
        }
    }

    #[test]
    fn product_formula(a in nonzero(), b in nonzero()) {
        let prod: i32 = places_of(&[&a, &b]).into_iter().map(|p| hilbert_symbol(&a, &b, p).unwrap() as i32).product();
        prop_assert_eq!(prod, 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn hilbert_symbol_matches_brute_force(a in small_prime_rational(), b in small_prime_rational(), p in prop::sample::select(vec![2i64, 3, 5, 7])) {
        prop_assert_eq!(hilbert_symbol(&a, &b, Place::Prime(p as u64)).unwrap(), hilbert_oracle(&a, &b, p));
    }
}

fn signature_41_form() -> impl Strategy<Value = RationalQuadraticForm> {
    let entry = (1i64..=30, 1i64..=6).prop_map(|(n, d)| r(n, d));
    let shear = prop::collection::vec(-3i64..=3, 10);
    (prop::collection::vec(entry, 5), 0usize..5, shear).prop_map(|(mut diag, neg, shear)| {
        diag[neg] = -diag[neg].clone();
        // congruence by a unipotent upper-triangular matrix keeps the signature
        let mut p = vec![vec![Rational::zero(); 5]; 5];
        let mut k = 0;
        for i in 0..5 {
            p[i][i] = r(1, 1);
            for j in i + 1..5 {
                p[i][j] = r(shear[k], 1);
                k += 1;
            }
        }
        let mut m = vec![vec![Rational::zero(); 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                for t in 0..5 {
                    m[i][j] += &p[t][i] * &diag[t] * &p[t][j];
                }
            }
        }
        RationalQuadraticForm::new(RationalMatrix::from_rows(m)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ramification_sets_have_even_size(q in signature_41_form()) {
        prop_assert_eq!(q.signature(), (4, 1, 0));
        prop_assert_eq!(ramification_set(&q).unwrap().len() % 2, 0);
    }

    #[test]
    fn ramification_is_similarity_invariant(l in nonzero()) {
        let q = shipped();
        prop_assert_eq!(ramification_set(&q.scaled(&l)).unwrap(), ramification_set(&q).unwrap());
    }
}

#[test]
fn hasse_invariant_independent_of_pivot_order() {
    let q = shipped();
    let mut orders = Vec::new();
    permutations(&mut vec![0, 1, 2, 3, 4], 0, &mut orders);
    assert_eq!(orders.len(), 120);
    let base = q.diagonalize().entries;
    let places = candidate_places(&base).unwrap();
    for order in &orders {
        let d = q.diagonalize_in_order(order).entries;
        assert!(congruent_diagonals(&d, &base).unwrap());
        for p in places.iter().chain([Place::Prime(3), Place::Prime(5)].iter()) {
            assert_eq!(hasse_invariant(&d, *p).unwrap(), hasse_invariant(&base, *p).unwrap(), "{order:?} at {p}");
        }
    }
}

fn permutations(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, out);
        v.swap(k, i);
    }
}

#[test]
fn prime_factoring() {
    let n = BigInt::from(2u64 * 2 * 3 * 7 * 1_000_003).to_biguint().unwrap();
    assert_eq!(prime_divisors(&n).unwrap(), vec![2, 3, 7, 1_000_003]);
}
