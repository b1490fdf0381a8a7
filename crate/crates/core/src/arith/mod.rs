//! Exact arithmetic: dense rational/number-field linear algebra and polynomials.
//!
//! Everything here is exact. Matrices are dense with entries in an arbitrary
//! field (`ℚ` via [`BigRational`], or a number field via
//! [`nf::NumberFieldElement`]); elimination uses minimal-bit-size pivoting to
//! limit coefficient blow-up.

pub mod dixon;
pub mod modp;
pub mod nf;
pub mod poly;
pub mod sparse;
pub mod zm;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt::Debug;

/// Element of a field with exact arithmetic.
///
/// `zero_like`/`one_like` derive constants from an existing element so that
/// elements carrying context (a number-field tag) can produce compatible
/// values.
pub trait FieldElement: Clone + PartialEq + Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse. Panics on zero.
    fn inv(&self) -> Self;
    /// Rough bit-size measure used for pivot selection.
    fn complexity(&self) -> u64;

    fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }
}

fn bigint_bits(x: &BigInt) -> u64 {
    x.abs().bits()
}

impl FieldElement for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        assert!(!Zero::is_zero(self), "inverse of zero");
        self.recip()
    }
    fn complexity(&self) -> u64 {
        bigint_bits(self.numer()) + bigint_bits(self.denom())
    }
}

/// Dense exact matrix. Dimensions are nonzero by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMatrix<F: FieldElement> {
    rows: usize,
    cols: usize,
    entries: Vec<F>,
}

impl<F: FieldElement> ExactMatrix<F> {
    pub fn new(rows: usize, cols: usize, entries: Vec<F>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be nonzero");
        assert_eq!(entries.len(), rows * cols);
        ExactMatrix { rows, cols, entries }
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Self {
        assert!(!rows.is_empty() && !rows[0].is_empty());
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols));
        let nrows = rows.len();
        let entries: Vec<F> = rows.into_iter().flatten().collect();
        ExactMatrix::new(nrows, cols, entries)
    }

    pub fn zero_like(rows: usize, cols: usize, sample: &F) -> Self {
        ExactMatrix::new(rows, cols, vec![sample.zero_like(); rows * cols])
    }

    pub fn identity(n: usize, sample: &F) -> Self {
        let mut m = Self::zero_like(n, n, sample);
        for i in 0..n {
            *m.at_mut(i, i) = sample.one_like();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn at(&self, r: usize, c: usize) -> &F {
        &self.entries[r * self.cols + c]
    }
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut F {
        &mut self.entries[r * self.cols + c]
    }
    pub fn row(&self, r: usize) -> &[F] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }
    pub fn entries(&self) -> &[F] {
        &self.entries
    }

    fn sample(&self) -> &F {
        &self.entries[0]
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = self.sample().zero_like();
                for j in 0..self.cols {
                    let e = self.at(i, j);
                    if !e.is_zero() && !v[j].is_zero() {
                        acc = acc.add(&e.mul(&v[j]));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn mul_mat(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let zero = self.sample().zero_like();
        let mut out = Self::zero_like(self.rows, other.cols, &zero);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if !b.is_zero() {
                        let t = out.at(i, j).add(&a.mul(b));
                        *out.at_mut(i, j) = t;
                    }
                }
            }
        }
        out
    }

    /// Reduced row-echelon form together with the pivot column indices.
    ///
    /// Pivot choice: among candidate rows for the current column, take the
    /// entry of minimal bit-size.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut pivot_row = 0usize;
        for col in 0..m.cols {
            if pivot_row >= m.rows {
                break;
            }
            let mut best: Option<(usize, u64)> = None;
            for r in pivot_row..m.rows {
                let e = m.at(r, col);
                if !e.is_zero() {
                    let c = e.complexity();
                    if best.map_or(true, |(_, bc)| c < bc) {
                        best = Some((r, c));
                    }
                }
            }
            let Some((r, _)) = best else { continue };
            m.swap_rows(pivot_row, r);
            let inv = m.at(pivot_row, col).inv();
            for j in col..m.cols {
                let t = m.at(pivot_row, j).mul(&inv);
                *m.at_mut(pivot_row, j) = t;
            }
            for r in 0..m.rows {
                if r == pivot_row || m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col).clone();
                for j in col..m.cols {
                    let t = m.at(r, j).sub(&factor.mul(m.at(pivot_row, j)));
                    *m.at_mut(r, j) = t;
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel. `M · v = 0` exactly for every returned `v`.
    pub fn kernel_basis(&self) -> Vec<Vec<F>> {
        let (r, pivots) = self.rref();
        let zero = self.sample().zero_like();
        let one = self.sample().one_like();
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = Some(i);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut v = vec![zero.clone(); self.cols];
            v[free] = one.clone();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = r.at(i, free).neg();
            }
            basis.push(v);
        }
        basis
    }

    /// Exact solution of `M x = b`, or `None` when the system is inconsistent.
    pub fn solve_linear(&self, b: &[F]) -> Option<Vec<F>> {
        assert_eq!(b.len(), self.rows, "dimension mismatch");
        let zero = self.sample().zero_like();
        let mut aug = Self::zero_like(self.rows, self.cols + 1, &zero);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *aug.at_mut(i, j) = self.at(i, j).clone();
            }
            *aug.at_mut(i, self.cols) = b[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // pivot in the augmented column
        }
        let mut x = vec![zero; self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r.at(i, self.cols).clone();
        }
        Some(x)
    }
}

/// Convenience constructors for rational matrices from integer literals.
pub fn qmat(rows: Vec<Vec<i64>>) -> ExactMatrix<BigRational> {
    ExactMatrix::from_rows(
        rows.into_iter()
            .map(|r| r.into_iter().map(|x| BigRational::from(BigInt::from(x))).collect())
            .collect(),
    )
}

pub fn qvec(v: Vec<i64>) -> Vec<BigRational> {
    v.into_iter().map(|x| BigRational::from(BigInt::from(x))).collect()
}

pub fn qr(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_identity() {
        let m = qmat(vec![vec![1, 0], vec![0, 1]]);
        let (r, pivots) = m.rref();
        assert_eq!(r, m);
        assert_eq!(pivots, vec![0, 1]);
    }

    #[test]
    fn rref_proportional_rows() {
        let m = qmat(vec![vec![1, 2], vec![2, 4]]);
        let (r, pivots) = m.rref();
        assert_eq!(r, qmat(vec![vec![1, 2], vec![0, 0]]));
        assert_eq!(pivots.len(), 1);
    }

    #[test]
    fn rref_idempotent() {
        let m = qmat(vec![vec![2, 3, 5], vec![7, 11, 13], vec![9, 14, 18]]);
        let (r1, _) = m.rref();
        let (r2, _) = r1.rref();
        assert_eq!(r1, r2);
    }

    #[test]
    fn kernel_zero_matrix() {
        let m = qmat(vec![vec![0, 0, 0], vec![0, 0, 0], vec![0, 0, 0]]);
        assert_eq!(m.kernel_basis().len(), 3);
    }

    #[test]
    fn kernel_identity_empty() {
        let m = qmat(vec![vec![1, 0], vec![0, 1]]);
        assert!(m.kernel_basis().is_empty());
    }

    #[test]
    fn kernel_rank_one() {
        let m = qmat(vec![vec![1, 1]]);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        // span of (1, -1)
        assert_eq!(k[0][0], k[0][1].neg());
        assert!(m.mul_vec(&k[0]).iter().all(|x| num_traits::Zero::is_zero(x)));
    }

    #[test]
    fn solve_identity() {
        let m = qmat(vec![vec![1, 0], vec![0, 1]]);
        let b = qvec(vec![3, 4]);
        assert_eq!(m.solve_linear(&b), Some(b));
    }

    #[test]
    fn solve_scalar_half() {
        let m = qmat(vec![vec![2]]);
        assert_eq!(m.solve_linear(&qvec(vec![1])), Some(vec![qr(1, 2)]));
    }

    #[test]
    fn solve_inconsistent() {
        let m = qmat(vec![vec![1], vec![1]]);
        assert_eq!(m.solve_linear(&qvec(vec![0, 1])), None);
    }
}
