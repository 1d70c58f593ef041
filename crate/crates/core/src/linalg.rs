//! Small dense matrices over any [`Scalar`], with exact elimination.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use crate::scalar::{Scalar, Sign};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self[(i, c)].sign() != Sign::Zero) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = T::one() / self[(r, c)].clone();
            for j in c..self.cols {
                self[(r, j)] = self[(r, j)].clone() * inv.clone();
            }
            for i in 0..self.rows {
                if i == r || self[(i, c)].sign() == Sign::Zero {
                    continue;
                }
                let f = self[(i, c)].clone();
                for j in c..self.cols {
                    let v = self[(i, j)].clone() - f.clone() * self[(r, j)].clone();
                    self[(i, j)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right kernel `{x : A x = 0}`.
    pub fn kernel(&self) -> Vec<Vec<T>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![T::zero(); self.cols];
                x[f] = T::one();
                for (r, &pc) in pivots.iter().enumerate() {
                    x[pc] = -m[(r, f)].clone();
                }
                x
            })
            .collect()
    }

    pub fn determinant(&self) -> T {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.clone();
        let mut det = T::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| m[(i, c)].sign() != Sign::Zero) else {
                return T::zero();
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det = det * piv.clone();
            for i in c + 1..n {
                if m[(i, c)].sign() == Sign::Zero {
                    continue;
                }
                let f = m[(i, c)].clone() / piv.clone();
                for j in c..n {
                    let v = m[(i, j)].clone() - f.clone() * m[(c, j)].clone();
                    m[(i, j)] = v;
                }
            }
        }
        det
    }

    /// Inverse by Gauss–Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = Matrix::<T>::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = T::one();
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        Some(aug.submatrix(0..n, n..2 * n))
    }

    /// Leading principal minors, top-left `1×1` first.
    pub fn leading_minors(&self) -> Vec<T> {
        (1..=self.rows).map(|k| self.submatrix(0..k, 0..k).determinant()).collect()
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let data = rows
            .clone()
            .flat_map(|i| cols.clone().map(move |j| (i, j)))
            .map(|(i, j)| self[(i, j)].clone())
            .collect();
        Matrix {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let data = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self[(i, j)].clone())
            .collect();
        Matrix {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.sign() == Sign::Zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = &self[(i, j)];
                    if i == j {
                        (e.clone() - T::one()).sign() == Sign::Zero
                    } else {
                        e.sign() == Sign::Zero
                    }
                })
            })
    }
}

/// Congruence diagonalization of a symmetric matrix.
///
/// Returns `(d, p)` with `pᵀ · a · p = diag(d)`. Zero pivots are handled by
/// swapping in a later nonzero diagonal entry, or, failing that, by the
/// substitution `e_k ← e_k + e_j / (2 a_kj)` on a hyperbolic block, which makes
/// the new pivot 1. Degenerate forms yield zero entries.
pub fn congruence_diagonalize<T: Scalar>(a: &Matrix<T>) -> (Vec<T>, Matrix<T>) {
    assert!(a.is_symmetric(), "congruence diagonalization needs a symmetric matrix");
    let n = a.rows();
    let mut a = a.clone();
    let mut p = Matrix::identity(n);
    for k in 0..n {
        if a[(k, k)].sign() == Sign::Zero {
            if let Some(j) = (k + 1..n).find(|&j| a[(j, j)].sign() != Sign::Zero) {
                swap_basis(&mut a, &mut p, k, j);
            } else if let Some(j) = (k + 1..n).find(|&j| a[(k, j)].sign() != Sign::Zero) {
                let f = T::one() / (a[(k, j)].clone() + a[(k, j)].clone());
                add_basis(&mut a, &mut p, k, j, f);
            } else {
                continue;
            }
        }
        let piv = a[(k, k)].clone();
        for i in k + 1..n {
            if a[(k, i)].sign() == Sign::Zero {
                continue;
            }
            let f = -(a[(k, i)].clone() / piv.clone());
            add_basis(&mut a, &mut p, i, k, f);
        }
    }
    let d = (0..n).map(|i| a[(i, i)].clone()).collect();
    (d, p)
}

fn swap_basis<T: Scalar>(a: &mut Matrix<T>, p: &mut Matrix<T>, i: usize, j: usize) {
    a.swap_rows(i, j);
    let n = a.rows();
    for r in 0..n {
        a.data.swap(r * n + i, r * n + j);
    }
    for r in 0..p.rows() {
        let c = p.cols();
        p.data.swap(r * c + i, r * c + j);
    }
}

/// Basis change `e_i ← e_i + f · e_j`, applied as a congruence.
fn add_basis<T: Scalar>(a: &mut Matrix<T>, p: &mut Matrix<T>, i: usize, j: usize, f: T) {
    let n = a.rows();
    for c in 0..n {
        let v = a[(i, c)].clone() + f.clone() * a[(j, c)].clone();
        a[(i, c)] = v;
    }
    for r in 0..n {
        let v = a[(r, i)].clone() + f.clone() * a[(r, j)].clone();
        a[(r, i)] = v;
    }
    for r in 0..p.rows() {
        let v = p[(r, i)].clone() + f.clone() * p[(r, j)].clone();
        p[(r, i)] = v;
    }
}

/// `(positive, negative, zero)` counts of a symmetric matrix.
pub fn signature<T: Scalar>(a: &Matrix<T>) -> (usize, usize, usize) {
    let (d, _) = congruence_diagonalize(a);
    d.iter().fold((0, 0, 0), |(p, n, z), x| match x.sign() {
        Sign::Positive => (p + 1, n, z),
        Sign::Negative => (p, n + 1, z),
        Sign::Zero => (p, n, z + 1),
    })
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Matrix::<T>::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.sign() == Sign::Zero {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out[(i, j)].clone() + a.clone() * rhs[(k, j)].clone();
                    out[(i, j)] = v;
                }
            }
        }
        out
    }
}

impl<T: Scalar> std::ops::Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<T: Scalar> Mul for Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: Matrix<T>) -> Matrix<T> {
        &self * &rhs
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.data.chunks(self.cols.max(1)).collect();
        f.debug_list().entries(rows).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn m(rows: &[&[i64]]) -> Matrix<BigRational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())
    }

    #[test]
    fn determinant_and_rank() {
        let a = m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(a.determinant(), q(18));
        assert_eq!(a.rank(), 3);
        let b = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(b.determinant(), q(0));
        assert_eq!(b.rank(), 1);
        let swap = m(&[&[0, 1], &[1, 0]]);
        assert_eq!(swap.determinant(), q(-1));
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let a = m(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, 1, 0]]);
        let k = a.kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(a.mul_vec(v).iter().all(|x| x == &q(0)));
        }
    }

    #[test]
    fn product_and_transpose() {
        let a = m(&[&[1, 2], &[3, 4]]);
        let i = Matrix::identity(2);
        assert_eq!(&a * &i, a);
        assert_eq!((&a * &a).transpose(), &a.transpose() * &a.transpose());
        assert!(i.is_identity());
        assert_eq!(a.leading_minors(), vec![q(1), q(-2)]);
    }

    #[test]
    fn congruence_on_hyperbolic_plane() {
        let h = m(&[&[0, 1], &[1, 0]]);
        let (d, p) = congruence_diagonalize(&h);
        assert_eq!(&(&p.transpose() * &h) * &p, Matrix::diagonal(&d));
        assert_eq!(signature(&h), (1, 1, 0));
        let a = m(&[&[0, 0, 1], &[0, 0, 0], &[1, 0, 3]]);
        let (d, p) = congruence_diagonalize(&a);
        assert_eq!(&(&p.transpose() * &a) * &p, Matrix::diagonal(&d));
        assert_eq!(signature(&a), (1, 1, 1));
    }

    #[test]
    fn float_instantiation() {
        let a: Matrix<f64> = Matrix::from_rows(vec![vec![2.0, 0.0], vec![0.0, 0.5]]);
        assert_eq!(a.determinant(), 1.0);
    }
}
