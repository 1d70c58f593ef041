//! Rational quadratic forms: congruence diagonalization, Hilbert symbols,
//! Hasse invariants and the ramification set of a similarity class.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, parse_rational};
use crate::linalg::{congruence_diagonalize, signature, Matrix};

/// A place of Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Prime(u64),
    Infinite,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "{p}"),
            Place::Infinite => f.write_str("∞"),
        }
    }
}

impl std::str::FromStr for Place {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "inf" | "∞" | "infinity" => Ok(Place::Infinite),
            t => {
                let p: u64 = t.parse().map_err(|_| format!("bad place `{t}`"))?;
                if p < 2 || !is_prime_u64(p) {
                    return Err(format!("`{p}` is not prime"));
                }
                Ok(Place::Prime(p))
            }
        }
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A finite set of places, printed as `{2, 7}` or `∅`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PlaceSet(pub BTreeSet<Place>);

impl PlaceSet {
    pub fn new(places: impl IntoIterator<Item = Place>) -> Self {
        PlaceSet(places.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, p: Place) -> bool {
        self.0.contains(&p)
    }

    /// Parses `{2, 7}`, `{3, inf}`, `{}` or `∅`.
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let t = s.trim();
        if t == "∅" || t == "empty" {
            return Ok(PlaceSet::default());
        }
        let inner = t
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| format!("place set must be braced: `{t}`"))?;
        inner
            .split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(str::parse)
            .collect::<std::result::Result<BTreeSet<_>, _>>()
            .map(PlaceSet)
    }
}

impl fmt::Display for PlaceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        let parts: Vec<String> = self.0.iter().map(Place::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Symmetric rational matrix read as a quadratic form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalQuadraticForm {
    matrix: Matrix<BigRational>,
}

/// Result of a congruence diagonalization.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub entries: Vec<BigRational>,
    /// Columns are the new basis: `transformᵀ · q · transform = diag(entries)`.
    pub transform: Matrix<BigRational>,
    pub degenerate: bool,
}

impl RationalQuadraticForm {
    pub fn new(matrix: Matrix<BigRational>) -> Result<Self> {
        if !matrix.is_square() || !matrix.is_symmetric() {
            return Err(Error::Form("matrix is not symmetric".into()));
        }
        Ok(RationalQuadraticForm { matrix })
    }

    pub fn diagonal(entries: &[BigRational]) -> Self {
        RationalQuadraticForm {
            matrix: Matrix::diagonal(entries),
        }
    }

    pub fn from_i64_diagonal(entries: &[i64]) -> Self {
        let e: Vec<BigRational> = entries.iter().map(|&x| BigRational::from_integer(x.into())).collect();
        Self::diagonal(&e)
    }

    /// Form file: first line `n`, then `n` lines of `n` rationals. `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, first) = lines
            .next()
            .ok_or_else(|| Error::parse("form", 1, "empty form file"))?;
        let n: usize = first
            .parse()
            .map_err(|_| Error::parse("form", ln, format!("expected dimension, found `{first}`")))?;
        let mut rows = Vec::with_capacity(n);
        for (ln, line) in lines {
            let row = line
                .split_whitespace()
                .map(parse_rational)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|m| Error::parse("form", ln, m))?;
            if row.len() != n {
                return Err(Error::parse(
                    "form",
                    ln,
                    format!("expected {n} entries, found {}", row.len()),
                ));
            }
            rows.push(row);
        }
        if rows.len() != n {
            return Err(Error::parse(
                "form",
                text.lines().count(),
                format!("expected {n} rows, found {}", rows.len()),
            ));
        }
        Self::new(Matrix::from_rows(rows))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.dim());
        for row in self.matrix.to_rows() {
            let r: Vec<String> = row.iter().map(format_rational).collect();
            s.push_str(&r.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<BigRational> {
        &self.matrix
    }

    pub fn determinant(&self) -> BigRational {
        self.matrix.determinant()
    }

    pub fn is_degenerate(&self) -> bool {
        self.determinant().is_zero()
    }

    /// `(positive, negative, zero)` inertia.
    pub fn signature(&self) -> (usize, usize, usize) {
        signature(&self.matrix)
    }

    pub fn scaled(&self, lambda: &BigRational) -> Self {
        RationalQuadraticForm {
            matrix: self.matrix.map(|x| x * lambda),
        }
    }

    pub fn diagonalize(&self) -> Diagonalization {
        let order: Vec<usize> = (0..self.dim()).collect();
        self.diagonalize_in_order(&order)
    }

    /// Diagonalizes after reordering the basis so that pivots are taken in
    /// the given order. Different orders give different, congruent results.
    pub fn diagonalize_in_order(&self, order: &[usize]) -> Diagonalization {
        let n = self.dim();
        assert_eq!(order.len(), n, "pivot order must be a permutation");
        let mut perm = Matrix::<BigRational>::zeros(n, n);
        for (new, &old) in order.iter().enumerate() {
            perm[(old, new)] = BigRational::one();
        }
        let permuted = &(&perm.transpose() * &self.matrix) * &perm;
        let (entries, p) = congruence_diagonalize(&permuted);
        let degenerate = entries.iter().any(Zero::is_zero);
        Diagonalization {
            entries,
            transform: &perm * &p,
            degenerate,
        }
    }
}

/// Square-free-equivalent integer for a nonzero rational: `n/d ≡ n·d` modulo squares.
fn square_class_integer(q: &BigRational) -> BigInt {
    q.numer() * q.denom()
}

fn valuation(n: &BigInt, p: u64) -> (u32, BigInt) {
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return (v, n);
        }
        n = q;
        v += 1;
    }
}

fn mod_u64(n: &BigInt, p: u64) -> u64 {
    n.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let m = m as u128;
    let mut base = b as u128 % m;
    let mut r: u128 = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    r as u64
}

/// Legendre symbol `(u/p)` for an odd prime `p` not dividing `u`.
fn legendre(u: &BigInt, p: u64) -> i8 {
    let r = pow_mod(mod_u64(u, p), (p - 1) / 2, p);
    if r == 1 {
        1
    } else {
        -1
    }
}

/// Hilbert symbol `(a, b)_p`.
pub fn hilbert_symbol(a: &BigRational, b: &BigRational, p: Place) -> Result<i8> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::Form("Hilbert symbol of zero".into()));
    }
    let a = square_class_integer(a);
    let b = square_class_integer(b);
    let p = match p {
        Place::Infinite => {
            return Ok(if a.is_negative() && b.is_negative() { -1 } else { 1 });
        }
        Place::Prime(p) => p,
    };
    let (alpha, u) = valuation(&a, p);
    let (beta, w) = valuation(&b, p);
    if p == 2 {
        let eps = |x: &BigInt| ((mod_u64(x, 8) - 1) / 2) % 2;
        let omega = |x: &BigInt| {
            let r = mod_u64(x, 8);
            ((r * r - 1) / 8) % 2
        };
        let e = eps(&u) * eps(&w) + alpha as u64 * omega(&w) + beta as u64 * omega(&u);
        return Ok(if e % 2 == 1 { -1 } else { 1 });
    }
    let mut s: i8 = if (alpha as u64 * beta as u64 * ((p - 1) / 2)) % 2 == 1 { -1 } else { 1 };
    if beta % 2 == 1 {
        s *= legendre(&u, p);
    }
    if alpha % 2 == 1 {
        s *= legendre(&w, p);
    }
    Ok(s)
}

/// `Π_{i<j} (a_i, a_j)_p`.
pub fn hasse_invariant(diag: &[BigRational], p: Place) -> Result<i8> {
    if diag.iter().any(Zero::is_zero) {
        return Err(Error::Form("Hasse invariant of a degenerate diagonal".into()));
    }
    let mut s = 1;
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            s *= hilbert_symbol(&diag[i], &diag[j], p)?;
        }
    }
    Ok(s)
}

const TRIAL_BOUND: u64 = 1 << 16;

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    // these bases are deterministic below 2^64
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime divisors of `n`: trial division, then a primality test on
/// the cofactor. Fails if the cofactor is composite beyond the trial bound.
pub fn prime_divisors(n: &BigUint) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    let mut n = n.clone();
    if n.is_zero() {
        return Err(Error::Factorization("cannot factor 0".into()));
    }
    let mut p = 2u64;
    while p < TRIAL_BOUND && n > BigUint::one() {
        let bp = BigUint::from(p);
        if (&n % &bp).is_zero() {
            out.push(p);
            while (&n % &bp).is_zero() {
                n /= &bp;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > BigUint::one() {
        match n.to_u64() {
            Some(m) if is_prime_u64(m) => out.push(m),
            _ if n < BigUint::from(TRIAL_BOUND) * BigUint::from(TRIAL_BOUND) => {
                // no factor below the bound, so the cofactor is prime
                let m = n
                    .to_u64()
                    .ok_or_else(|| Error::Factorization(format!("{n} out of range")))?;
                out.push(m);
            }
            _ => return Err(Error::Factorization(format!("cofactor {n} not resolved"))),
        }
    }
    Ok(out)
}

/// `∞` and every prime dividing 2 or a numerator or denominator of the entries.
pub fn candidate_places(diag: &[BigRational]) -> Result<BTreeSet<Place>> {
    let mut out = BTreeSet::from([Place::Infinite, Place::Prime(2)]);
    for q in diag {
        for part in [q.numer(), q.denom()] {
            if part.is_zero() {
                continue;
            }
            for p in prime_divisors(part.magnitude())? {
                out.insert(Place::Prime(p));
            }
        }
    }
    Ok(out)
}

/// Ramification set of the similarity class of a nondegenerate form of
/// signature (4,1) (or its negative).
///
/// Places where the Hasse invariant of `det(q) · q` is −1. In odd dimension
/// this is the similarity-invariant normalization; for n = 5 it coincides
/// with the Hasse invariant of `q` itself.
pub fn ramification_set(q: &RationalQuadraticForm) -> Result<PlaceSet> {
    let d = q.diagonalize();
    if d.degenerate {
        return Err(Error::Form("degenerate form".into()));
    }
    let sig = q.signature();
    if sig != (4, 1, 0) && sig != (1, 4, 0) {
        return Err(Error::Form(format!(
            "expected signature (4,1) up to sign, found ({}, {})",
            sig.0, sig.1
        )));
    }
    ramification_of_diagonal(&d.entries)
}

/// Same invariant, starting from a diagonal form (no signature check).
pub fn ramification_of_diagonal(diag: &[BigRational]) -> Result<PlaceSet> {
    let det: BigRational = diag.iter().fold(BigRational::one(), |acc, x| acc * x);
    let scaled: Vec<BigRational> = diag.iter().map(|x| x * &det).collect();
    let mut out = BTreeSet::new();
    for p in candidate_places(diag)? {
        if hasse_invariant(&scaled, p)? == -1 {
            out.insert(p);
        }
    }
    Ok(PlaceSet(out))
}

/// Whether `x / y` is a rational square.
pub fn same_square_class(x: &BigRational, y: &BigRational) -> bool {
    if x.is_zero() || y.is_zero() {
        return x.is_zero() && y.is_zero();
    }
    crate::exactnum::is_square_rational(&(x / y)).is_some()
}

/// Checks that two nondegenerate diagonal forms have the same rank,
/// signature, determinant square class and Hasse invariants everywhere;
/// by Hasse–Minkowski this is rational congruence.
pub fn congruent_diagonals(d1: &[BigRational], d2: &[BigRational]) -> Result<bool> {
    if d1.len() != d2.len() {
        return Ok(false);
    }
    let neg = |d: &[BigRational]| d.iter().filter(|x| x.is_negative()).count();
    if neg(d1) != neg(d2) {
        return Ok(false);
    }
    let det = |d: &[BigRational]| d.iter().fold(BigRational::one(), |a, x| a * x);
    if !same_square_class(&det(d1), &det(d2)) {
        return Ok(false);
    }
    let mut places = candidate_places(d1)?;
    places.extend(candidate_places(d2)?);
    for p in places {
        if hasse_invariant(d1, p)? != hasse_invariant(d2, p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Commensurability-class invariant used for comparison.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ClassValue {
    Ramification(PlaceSet),
    NonArithmetic,
}

impl fmt::Display for ClassValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassValue::Ramification(s) => write!(f, "{s}"),
            ClassValue::NonArithmetic => f.write_str("non-arithmetic"),
        }
    }
}

impl std::str::FromStr for ClassValue {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "non-arithmetic" => Ok(ClassValue::NonArithmetic),
            t => PlaceSet::parse(t).map(ClassValue::Ramification),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    /// `(name, value)` rows, the form under study first.
    pub rows: Vec<(String, String)>,
    /// Number of pairwise distinct values among the rows.
    pub distinct: usize,
    pub all_distinct: bool,
}

/// Compares the invariant of the studied class against reference classes.
pub fn separate_classes(own: &PlaceSet, references: &[(String, ClassValue)]) -> SeparationReport {
    let own_value = ClassValue::Ramification(own.clone());
    let mut values: Vec<&ClassValue> = vec![&own_value];
    values.extend(references.iter().map(|(_, v)| v));
    let distinct = values.iter().collect::<BTreeSet<_>>().len();
    let mut rows = vec![("this form".to_string(), own_value.to_string())];
    rows.extend(references.iter().map(|(n, v)| (n.clone(), v.to_string())));
    SeparationReport {
        all_distinct: distinct == values.len(),
        distinct,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn reference_diag() -> Vec<BigRational> {
        vec![q(7, 2), q(1, 2), q(1, 6), q(-3, 8), q(1, 8)]
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(hilbert_symbol(&q(-1, 1), &q(-1, 1), Place::Infinite).unwrap(), -1);
        assert_eq!(hilbert_symbol(&q(2, 1), &q(7, 1), Place::Prime(7)).unwrap(), 1);
        assert_eq!(hilbert_symbol(&q(-1, 1), &q(-1, 1), Place::Prime(2)).unwrap(), -1);
        assert_eq!(hilbert_symbol(&q(3, 1), &q(7, 1), Place::Prime(7)).unwrap(), -1);
        assert!(hilbert_symbol(&q(0, 1), &q(1, 1), Place::Prime(3)).is_err());
    }

    #[test]
    fn hasse_examples() {
        let ones = vec![q(1, 1); 5];
        for p in [Place::Infinite, Place::Prime(2), Place::Prime(3)] {
            assert_eq!(hasse_invariant(&ones, p).unwrap(), 1);
        }
        assert_eq!(hasse_invariant(&[q(-1, 1), q(-1, 1)], Place::Infinite).unwrap(), -1);
    }

    #[test]
    fn ramification_of_reference_forms() {
        let r = ramification_of_diagonal(&reference_diag()).unwrap();
        assert_eq!(r, PlaceSet::new([Place::Prime(2), Place::Prime(7)]));
        let std = RationalQuadraticForm::from_i64_diagonal(&[1, 1, 1, 1, -1]);
        assert!(ramification_set(&std).unwrap().is_empty());
    }

    #[test]
    fn hyperbolic_plane() {
        let h = RationalQuadraticForm::new(Matrix::from_rows(vec![
            vec![q(0, 1), q(1, 1)],
            vec![q(1, 1), q(0, 1)],
        ]))
        .unwrap();
        let d = h.diagonalize();
        assert!(!d.degenerate);
        let prod = &d.entries[0] * &d.entries[1];
        assert!(same_square_class(&prod, &q(-1, 1)));
        let check = &(&d.transform.transpose() * h.matrix()) * &d.transform;
        assert_eq!(check, Matrix::diagonal(&d.entries));
    }

    #[test]
    fn place_set_text() {
        let s = PlaceSet::parse("{3, inf}").unwrap();
        assert_eq!(s.to_string(), "{3, ∞}");
        assert_eq!(PlaceSet::parse("∅").unwrap().to_string(), "∅");
        assert!(PlaceSet::parse("{4}").is_err());
    }

    #[test]
    fn factoring() {
        let n = BigUint::from(2u64 * 2 * 3 * 7 * 1_000_003);
        assert_eq!(prime_divisors(&n).unwrap(), vec![2, 3, 7, 1_000_003]);
        assert!(is_prime_u64(18_446_744_073_709_551_557));
    }
}
