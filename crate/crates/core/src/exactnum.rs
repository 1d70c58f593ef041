//! Exact arithmetic in Q and in the real biquadratic field Q(√2, √7).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{ExactScalar, Scalar, Sign};

/// Parses `p`, `p/q` or `-p/q` into a canonical rational.
pub fn parse_rational(s: &str) -> std::result::Result<BigRational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num.trim()).map_err(|_| format!("bad rational `{s}`"))?;
    let den = BigInt::from_str(den.trim()).map_err(|_| format!("bad rational `{s}`"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(BigRational::new(num, den))
}

pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn int_sqrt_exact(n: &BigInt) -> Option<BigInt> {
    if Signed::is_negative(n) {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Positive square root of `q` when `q` is the square of a rational.
pub fn is_square_rational(q: &BigRational) -> Option<BigRational> {
    // canonical form: numerator and denominator are coprime, so both must be squares
    let n = int_sqrt_exact(q.numer())?;
    let d = int_sqrt_exact(q.denom())?;
    Some(BigRational::new(n, d))
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn sign_q(q: &BigRational) -> Sign {
    <BigRational as Scalar>::sign(q)
}

/// Sign of `p + q√2`.
fn sign_q_sqrt2(p: &BigRational, q: &BigRational) -> Sign {
    let (sp, sq) = (sign_q(p), sign_q(q));
    match (sp, sq) {
        (s, Sign::Zero) | (Sign::Zero, s) => s,
        (a, b) if a == b => a,
        _ => sp * sign_q(&(p * p - rat(2) * q * q)),
    }
}

/// An element `a + b√2 + c√7 + d√14` of Q(√2, √7), real embedding with positive roots.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FieldElement {
    coords: [BigRational; 4],
}

impl FieldElement {
    pub fn new(a: BigRational, b: BigRational, c: BigRational, d: BigRational) -> Self {
        FieldElement {
            coords: [a, b, c, d],
        }
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self::new(rat(a), rat(b), rat(c), rat(d))
    }

    pub fn rational(q: BigRational) -> Self {
        Self::new(q, rat(0), rat(0), rat(0))
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(rat(n))
    }

    pub fn sqrt2() -> Self {
        Self::from_ints(0, 1, 0, 0)
    }

    pub fn sqrt7() -> Self {
        Self::from_ints(0, 0, 1, 0)
    }

    pub fn sqrt14() -> Self {
        Self::from_ints(0, 0, 0, 1)
    }

    /// Coordinates over the basis {1, √2, √7, √14}.
    pub fn coords(&self) -> &[BigRational; 4] {
        &self.coords
    }

    /// Galois conjugate sending √2 to −√2.
    pub fn conj_sqrt2(&self) -> Self {
        let [a, b, c, d] = self.coords.clone();
        Self::new(a, -b, c, -d)
    }

    /// Galois conjugate sending √7 to −√7.
    pub fn conj_sqrt7(&self) -> Self {
        let [a, b, c, d] = self.coords.clone();
        Self::new(a, b, -c, -d)
    }

    /// Field norm down to Q: the product of the four conjugates.
    pub fn norm(&self) -> BigRational {
        let s2 = self.conj_sqrt2();
        let s7 = self.conj_sqrt7();
        let s14 = s2.conj_sqrt7();
        let n = self.clone() * s2 * s7 * s14;
        debug_assert!(n.coords[1..].iter().all(Zero::is_zero));
        n.coords[0].clone()
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let s2 = self.conj_sqrt2();
        let s7 = self.conj_sqrt7();
        let s14 = s2.conj_sqrt7();
        let co = s2 * s7 * s14;
        let n = (self.clone() * co.clone()).coords[0].clone();
        Ok(co.scale(&n.recip()))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.clone() * rhs.inverse()?)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let [a, b, c, d] = &self.coords;
        Self::new(a * q, b * q, c * q, d * q)
    }

    /// Exact sign under √2, √7 > 0.
    pub fn signum(&self) -> Sign {
        let [a, b, c, d] = &self.coords;
        let sa = sign_q_sqrt2(a, b);
        let sb = sign_q_sqrt2(c, d);
        match (sa, sb) {
            (s, Sign::Zero) | (Sign::Zero, s) => s,
            (x, y) if x == y => x,
            _ => {
                // A + B√7 with A = a + b√2, B = c + d√2: compare A² with 7B²
                let two = rat(2);
                let seven = rat(7);
                let p = a * a + &two * b * b - &seven * (c * c + &two * d * d);
                let q = &two * a * b - &seven * &two * c * d;
                sa * sign_q_sqrt2(&p, &q)
            }
        }
    }

    /// Square root of a nonnegative rational, when it is `r`, `r√2`, `r√7`
    /// or `r√14` with `r` rational.
    pub fn sqrt_of_rational(&self) -> Option<Self> {
        if !self.is_rational() || Signed::is_negative(&self.coords[0]) {
            return None;
        }
        let q = &self.coords[0];
        let basis = [Self::integer(1), Self::sqrt2(), Self::sqrt7(), Self::sqrt14()];
        [1i64, 2, 7, 14].into_iter().zip(basis).find_map(|(k, b)| {
            is_square_rational(&(q / BigRational::from_integer(k.into()))).map(|r| b.scale(&r))
        })
    }

    pub fn is_rational(&self) -> bool {
        self.coords[1..].iter().all(Zero::is_zero)
    }

    /// Parses the text form `a b c d` (four rationals).
    pub fn parse_text(s: &str) -> std::result::Result<Self, String> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        Self::from_tokens(&toks)
    }

    pub fn from_tokens(toks: &[&str]) -> std::result::Result<Self, String> {
        if toks.len() != 4 {
            return Err(format!(
                "field element needs 4 rationals, got {}",
                toks.len()
            ));
        }
        let mut it = toks.iter().map(|t| parse_rational(t));
        Ok(Self::new(
            it.next().unwrap()?,
            it.next().unwrap()?,
            it.next().unwrap()?,
            it.next().unwrap()?,
        ))
    }

    /// The canonical text form `a b c d`.
    pub fn to_text(&self) -> String {
        self.coords
            .iter()
            .map(format_rational)
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Human-readable form, e.g. `-1/2 + √7/2`.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        for (coef, root) in self.coords.iter().zip(["", "√2", "√7", "√14"]) {
            if coef.is_zero() {
                continue;
            }
            let neg = Signed::is_negative(coef);
            let mag = coef.abs();
            let body = if root.is_empty() {
                format_rational(&mag)
            } else {
                let n = mag.numer();
                let d = mag.denom();
                let head = if n.is_one() {
                    root.to_string()
                } else {
                    format!("{n}{root}")
                };
                if d.is_one() {
                    head
                } else {
                    format!("{head}/{d}")
                }
            };
            match (out.is_empty(), neg) {
                (true, true) => out.push_str(&format!("-{body}")),
                (true, false) => out.push_str(&body),
                (false, true) => out.push_str(&format!(" - {body}")),
                (false, false) => out.push_str(&format!(" + {body}")),
            }
        }
        if out.is_empty() {
            "0".into()
        } else {
            out
        }
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pretty())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pretty())
    }
}

impl From<BigRational> for FieldElement {
    fn from(q: BigRational) -> Self {
        FieldElement::rational(q)
    }
}

impl From<i64> for FieldElement {
    fn from(n: i64) -> Self {
        FieldElement::integer(n)
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        let [a, b, c, d] = self.coords;
        let [e, f, g, h] = rhs.coords;
        Self::new(a + e, b + f, c + g, d + h)
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> Self {
        let [a, b, c, d] = self.coords;
        let [e, f, g, h] = rhs.coords;
        Self::new(a - e, b - f, c - g, d - h)
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> Self {
        let [a, b, c, d] = self.coords;
        Self::new(-a, -b, -c, -d)
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl Mul<&FieldElement> for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        let [a, b, c, d] = &self.coords;
        let [e, f, g, h] = &rhs.coords;
        // √2√7 = √14, √2√14 = 2√7, √7√14 = 7√2, √14² = 14
        let one = a * e + rat(2) * b * f + rat(7) * c * g + rat(14) * d * h;
        let s2 = a * f + b * e + rat(7) * (c * h + d * g);
        let s7 = a * g + c * e + rat(2) * (b * h + d * f);
        let s14 = a * h + d * e + b * g + c * f;
        FieldElement::new(one, s2, s7, s14)
    }
}

impl Div for FieldElement {
    type Output = FieldElement;
    /// Panics on division by zero; use [`FieldElement::checked_div`] for a `Result`.
    fn div(self, rhs: Self) -> Self {
        self.checked_div(&rhs).expect("division by zero in Q(√2,√7)")
    }
}

impl Zero for FieldElement {
    fn zero() -> Self {
        Self::from_ints(0, 0, 0, 0)
    }
    fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }
}

impl One for FieldElement {
    fn one() -> Self {
        Self::from_ints(1, 0, 0, 0)
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self.clone() - other.clone()).signum() {
            Sign::Negative => std::cmp::Ordering::Less,
            Sign::Zero => std::cmp::Ordering::Equal,
            Sign::Positive => std::cmp::Ordering::Greater,
        }
    }
}

impl Scalar for FieldElement {
    fn sign(&self) -> Sign {
        self.signum()
    }

    fn from_rational(r: &BigRational) -> Self {
        FieldElement::rational(r.clone())
    }

    fn to_f64(&self) -> f64 {
        let [a, b, c, d] = &self.coords;
        let f = |q: &BigRational| ToPrimitive::to_f64(q).unwrap_or(f64::NAN);
        f(a) + f(b) * 2f64.sqrt() + f(c) * 7f64.sqrt() + f(d) * 14f64.sqrt()
    }

    fn as_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.coords[0].clone())
    }
}

impl ExactScalar for FieldElement {}
