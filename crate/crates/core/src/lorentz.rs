//! Minkowski space R^{1,4}: vectors, the bilinear form of signature (4,1),
//! reflections and exact isometry checks.
//!
//! The form is `⟨x,y⟩ = −x0·y0 + x1·y1 + x2·y2 + x3·y3 + x4·y4`. Hyperbolic
//! space is the future sheet `x0 > 0` of `⟨x,x⟩ = −1`; spacelike vectors are
//! outward normals of half-spaces `{x : ⟨x,n⟩ ≤ 0}`.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::exactnum::FieldElement;
use crate::linalg::{signature, Matrix};
use crate::scalar::{Scalar, Sign};

pub const DIM: usize = 5;

/// Diagonal of the Minkowski form.
pub const ETA: [i64; DIM] = [-1, 1, 1, 1, 1];

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LorentzVector<T> {
    coords: [T; DIM],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Causal {
    Spacelike,
    Lightlike,
    Timelike,
}

impl<T: Scalar> LorentzVector<T> {
    pub fn new(coords: [T; DIM]) -> Self {
        LorentzVector { coords }
    }

    pub fn from_slice(v: &[T]) -> Self {
        assert_eq!(v.len(), DIM);
        LorentzVector {
            coords: std::array::from_fn(|i| v[i].clone()),
        }
    }

    pub fn zero() -> Self {
        LorentzVector {
            coords: std::array::from_fn(|_| T::zero()),
        }
    }

    pub fn coords(&self) -> &[T; DIM] {
        &self.coords
    }

    pub fn inner(&self, other: &Self) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .zip(ETA)
            .fold(T::zero(), |acc, ((a, b), e)| {
                let p = a.clone() * b.clone();
                if e < 0 {
                    acc - p
                } else {
                    acc + p
                }
            })
    }

    pub fn norm_sq(&self) -> T {
        self.inner(self)
    }

    pub fn causal(&self) -> Causal {
        match self.norm_sq().sign() {
            Sign::Positive => Causal::Spacelike,
            Sign::Zero => Causal::Lightlike,
            Sign::Negative => Causal::Timelike,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.sign() == Sign::Zero)
    }

    pub fn scale(&self, s: &T) -> Self {
        LorentzVector {
            coords: std::array::from_fn(|i| self.coords[i].clone() * s.clone()),
        }
    }

    /// Lowered-index form `η·v`, so that `⟨x,v⟩ = x · (η v)`.
    pub fn lowered(&self) -> [T; DIM] {
        std::array::from_fn(|i| {
            if ETA[i] < 0 {
                -self.coords[i].clone()
            } else {
                self.coords[i].clone()
            }
        })
    }

    /// Scales so that the first nonzero coordinate is one.
    pub fn projective_normal_form(&self) -> Self {
        match self.coords.iter().find(|c| c.sign() != Sign::Zero) {
            Some(lead) => self.scale(&(T::one() / lead.clone())),
            None => self.clone(),
        }
    }

    /// Sign of `λ` when `self = λ·other` for some nonzero `λ`.
    pub fn proportionality(&self, other: &Self) -> Option<Sign> {
        let k = other.coords.iter().position(|c| c.sign() != Sign::Zero)?;
        let lambda = self.coords[k].clone() / other.coords[k].clone();
        let same = self
            .coords
            .iter()
            .zip(&other.coords)
            .all(|(a, b)| (a.clone() - lambda.clone() * b.clone()).sign() == Sign::Zero);
        (same && lambda.sign() != Sign::Zero).then(|| lambda.sign())
    }

    /// Representative with `x0 ≥ 0` (first nonzero coordinate positive if `x0 = 0`).
    pub fn future(&self) -> Self {
        match self.coords.iter().find(|c| c.sign() != Sign::Zero) {
            Some(c) if c.sign() == Sign::Negative => -self.clone(),
            _ => self.clone(),
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> LorentzVector<U> {
        LorentzVector {
            coords: std::array::from_fn(|i| f(&self.coords[i])),
        }
    }
}

impl<T: Scalar> Add for LorentzVector<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        LorentzVector {
            coords: std::array::from_fn(|i| self.coords[i].clone() + rhs.coords[i].clone()),
        }
    }
}

impl<T: Scalar> Sub for LorentzVector<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        LorentzVector {
            coords: std::array::from_fn(|i| self.coords[i].clone() - rhs.coords[i].clone()),
        }
    }
}

impl<T: Scalar> Neg for LorentzVector<T> {
    type Output = Self;
    fn neg(self) -> Self {
        LorentzVector {
            coords: std::array::from_fn(|i| -self.coords[i].clone()),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for LorentzVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("").field(&self.coords).finish()
    }
}

fn eta<T: Scalar>() -> Matrix<T> {
    Matrix::diagonal(&ETA.map(|e| T::from_ratio(e, 1)))
}

/// A 5×5 matrix preserving the Minkowski form, checked on construction.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IsometryMatrix<T> {
    matrix: Matrix<T>,
}

impl<T: Scalar> IsometryMatrix<T> {
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        if matrix.rows() != DIM || matrix.cols() != DIM {
            return Err(Error::NotAnIsometry);
        }
        let e = eta::<T>();
        let check = &(&matrix.transpose() * &e) * &matrix;
        if !(&check - &e).is_zero() {
            return Err(Error::NotAnIsometry);
        }
        Ok(IsometryMatrix { matrix })
    }

    pub fn identity() -> Self {
        IsometryMatrix {
            matrix: Matrix::identity(DIM),
        }
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn apply(&self, v: &LorentzVector<T>) -> LorentzVector<T> {
        LorentzVector::from_slice(&self.matrix.mul_vec(v.coords()))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        IsometryMatrix {
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// `η Mᵀ η`.
    pub fn inverse(&self) -> Self {
        let e = eta::<T>();
        IsometryMatrix {
            matrix: &(&e * &self.matrix.transpose()) * &e,
        }
    }

    pub fn determinant_sign(&self) -> Sign {
        self.matrix.determinant().sign()
    }

    /// Whether the future light cone is preserved.
    pub fn is_orthochronous(&self) -> bool {
        self.matrix[(0, 0)].sign() == Sign::Positive
    }

    /// Orientation action on H^4: +1 preserving, −1 reversing.
    pub fn orientation(&self) -> Sign {
        let t = if self.is_orthochronous() {
            Sign::Positive
        } else {
            Sign::Negative
        };
        self.determinant_sign() * t
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }

    pub fn is_involution(&self) -> bool {
        self.compose(self).is_identity()
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        self.compose(other) == other.compose(self)
    }
}

/// How two hyperplanes sit relative to each other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairKind<T> {
    /// Intersecting; `cos_sq` is the squared cosine of the angle between normals.
    Angle { cos_sq: T },
    Tangent,
    Ultraparallel { cosh_sq: T },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairClass<T> {
    pub kind: PairKind<T>,
    /// Sign of the raw inner product of the two normals.
    pub inner_sign: Sign,
}

impl<T: Scalar> PairClass<T> {
    /// Squared normalized inner product `⟨u,v⟩² / (⟨u,u⟩⟨v,v⟩)`.
    pub fn squared_value(&self) -> T {
        match &self.kind {
            PairKind::Angle { cos_sq } => cos_sq.clone(),
            PairKind::Tangent => T::one(),
            PairKind::Ultraparallel { cosh_sq } => cosh_sq.clone(),
        }
    }

    pub fn is_orthogonal(&self) -> bool {
        self.inner_sign == Sign::Zero
    }

    /// Interior dihedral angle between two outward normals, as a rational
    /// multiple of π, when it is one of π/6, π/4, π/3, π/2 and supplements.
    pub fn dihedral_angle(&self) -> Option<num_rational::Ratio<i64>> {
        use num_rational::Ratio;
        let PairKind::Angle { cos_sq } = &self.kind else {
            return None;
        };
        // outward normals: ⟨n1,n2⟩ = −cos θ
        let acute = match cos_sq.as_rational()? {
            c if c == num_rational::BigRational::from_integer(0.into()) => {
                return Some(Ratio::new(1, 2))
            }
            c if c == num_rational::BigRational::new(1.into(), 4.into()) => Ratio::new(1, 3),
            c if c == num_rational::BigRational::new(1.into(), 2.into()) => Ratio::new(1, 4),
            c if c == num_rational::BigRational::new(3.into(), 4.into()) => Ratio::new(1, 6),
            _ => return None,
        };
        Some(match self.inner_sign {
            Sign::Negative => acute,
            _ => Ratio::from_integer(1) - acute,
        })
    }
}

fn require_spacelike<T: Scalar>(v: &LorentzVector<T>, name: &str) -> Result<T> {
    let n = v.norm_sq();
    if n.sign() != Sign::Positive {
        return Err(Error::NotSpacelike(name.to_string()));
    }
    Ok(n)
}

/// Relative position of the hyperplanes dual to two spacelike vectors.
pub fn classify_pair<T: Scalar>(u: &LorentzVector<T>, v: &LorentzVector<T>) -> Result<PairClass<T>> {
    let nu = require_spacelike(u, "u")?;
    let nv = require_spacelike(v, "v")?;
    let ip = u.inner(v);
    let s = ip.square() / (nu * nv);
    let kind = match (s.clone() - T::one()).sign() {
        Sign::Negative => PairKind::Angle { cos_sq: s },
        Sign::Zero => PairKind::Tangent,
        Sign::Positive => PairKind::Ultraparallel { cosh_sq: s },
    };
    Ok(PairClass {
        kind,
        inner_sign: ip.sign(),
    })
}

pub fn minkowski_inner<T: Scalar>(u: &LorentzVector<T>, v: &LorentzVector<T>) -> T {
    u.inner(v)
}

/// Reflection `x ↦ x − 2⟨x,v⟩/⟨v,v⟩ · v` in the hyperplane dual to `v`.
pub fn reflection_in<T: Scalar>(v: &LorentzVector<T>) -> Result<IsometryMatrix<T>> {
    let n = require_spacelike(v, "reflection vector")?;
    let two_over = T::from_ratio(2, 1) / n;
    let low = v.lowered();
    let mut m = Matrix::<T>::identity(DIM);
    for i in 0..DIM {
        for j in 0..DIM {
            let e = m[(i, j)].clone() - two_over.clone() * v.coords()[i].clone() * low[j].clone();
            m[(i, j)] = e;
        }
    }
    Ok(IsometryMatrix { matrix: m })
}

/// Basis of `ker(M − I)`.
pub fn fixed_subspace<T: Scalar>(m: &IsometryMatrix<T>) -> Vec<LorentzVector<T>> {
    let shifted = m.matrix() - &Matrix::identity(DIM);
    shifted
        .kernel()
        .into_iter()
        .map(|v| LorentzVector::from_slice(&v))
        .collect()
}

/// `(positive, negative, zero)` inertia of the form restricted to `span(basis)`.
pub fn restricted_signature<T: Scalar>(basis: &[LorentzVector<T>]) -> (usize, usize, usize) {
    let g = Matrix::from_rows(
        basis
            .iter()
            .map(|a| basis.iter().map(|b| a.inner(b)).collect())
            .collect(),
    );
    signature(&g)
}

/// Vector orthogonal to four given vectors (generalized cross product).
/// Zero exactly when the four are linearly dependent.
pub fn orthogonal_complement_of_four<T: Scalar>(vs: [&LorentzVector<T>; 4]) -> LorentzVector<T> {
    let rows: Vec<[T; DIM]> = vs.iter().map(|v| v.lowered()).collect();
    let coords = std::array::from_fn(|j| {
        let cols: Vec<usize> = (0..DIM).filter(|&c| c != j).collect();
        let minor = Matrix::from_rows(
            rows.iter()
                .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
                .collect(),
        )
        .determinant();
        if j % 2 == 0 {
            minor
        } else {
            -minor
        }
    });
    LorentzVector::new(coords)
}

/// One normalized Gram entry: the sign of `⟨vi,vj⟩` and its squared normalized value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramEntry<T> {
    pub sign: Sign,
    pub squared: T,
}

impl GramEntry<FieldElement> {
    /// The entry itself, when its square root lies in Q(√2,√7) with rational
    /// coefficient times one of 1, √2, √7, √14.
    pub fn value(&self) -> Option<FieldElement> {
        let v = self.squared.sqrt_of_rational()?;
        Some(if self.sign == Sign::Negative { -v } else { v })
    }
}

pub fn gram_matrix<T: Scalar>(vs: &[LorentzVector<T>]) -> Result<Vec<Vec<GramEntry<T>>>> {
    for (i, v) in vs.iter().enumerate() {
        require_spacelike(v, &format!("#{i}"))?;
    }
    vs.iter()
        .map(|u| {
            vs.iter()
                .map(|v| {
                    let c = classify_pair(u, v)?;
                    Ok(GramEntry {
                        sign: c.inner_sign,
                        squared: c.squared_value(),
                    })
                })
                .collect()
        })
        .collect()
}

/// A named generator vector, as read from a vectors file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedVector {
    pub name: String,
    pub vector: LorentzVector<FieldElement>,
}

/// Parses the vectors file: `name x0 x1 x2 x3 x4`, each coordinate four
/// rationals `a b c d` meaning `a + b√2 + c√7 + d√14`. `#` starts a comment.
pub fn parse_vectors(text: &str) -> Result<Vec<NamedVector>> {
    let mut out: Vec<NamedVector> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let ctx = |m: String| Error::parse("vectors", lineno + 1, m);
        if toks.len() != 1 + 4 * DIM {
            return Err(ctx(format!(
                "expected a name and {} rationals, found {} tokens",
                4 * DIM,
                toks.len()
            )));
        }
        let name = toks[0].to_string();
        if out.iter().any(|n| n.name == name) {
            return Err(ctx(format!("duplicate vector `{name}`")));
        }
        let coords: Vec<FieldElement> = toks[1..]
            .chunks(4)
            .map(FieldElement::from_tokens)
            .collect::<std::result::Result<_, _>>()
            .map_err(ctx)?;
        out.push(NamedVector {
            name,
            vector: LorentzVector::from_slice(&coords),
        });
    }
    Ok(out)
}

pub fn format_vectors(vs: &[NamedVector]) -> String {
    let mut s = String::new();
    for nv in vs {
        s.push_str(&nv.name);
        for c in nv.vector.coords() {
            s.push_str("  ");
            s.push_str(&c.to_text());
        }
        s.push('\n');
    }
    s
}
