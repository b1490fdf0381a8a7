//! Dense univariate polynomials over ℚ.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Polynomial over ℚ, coefficients in ascending degree, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<BigRational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        QPoly { coeffs: vec![BigRational::one()] }
    }

    pub fn x() -> Self {
        QPoly { coeffs: vec![BigRational::zero(), BigRational::one()] }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from(BigInt::from(c))).collect())
    }

    pub fn from_bigints(coeffs: &[BigInt]) -> Self {
        Self::new(coeffs.iter().map(|c| BigRational::from(c.clone())).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn deg(&self) -> usize {
        self.degree().expect("degree of zero polynomial")
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> &BigRational {
        self.coeffs.last().expect("leading coefficient of zero polynomial")
    }

    pub fn is_monic(&self) -> bool {
        !self.is_zero() && self.leading().is_one()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + other.coeff(i));
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) - other.coeff(i));
        }
        Self::new(out)
    }

    pub fn neg(&self) -> Self {
        QPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        QPoly { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Self::new(out)
    }

    /// Euclidean division: returns (quotient, remainder).
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let dd = divisor.deg();
        let lead_inv = divisor.leading().recip();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = &rem[i] * &lead_inv;
            if !c.is_zero() {
                quot[i - dd] = c.clone();
                for j in 0..dd {
                    let t = &rem[i - dd + j] - &c * &divisor.coeffs[j];
                    rem[i - dd + j] = t;
                }
            }
            rem[i] = BigRational::zero();
        }
        (Self::new(quot), Self::new(rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Substitute `x -> x + c`.
    pub fn shift(&self, c: &BigRational) -> Self {
        // Horner on the shifted variable.
        let mut acc = Self::zero();
        let xs = Self::new(vec![c.clone(), BigRational::one()]);
        for coeff in self.coeffs.iter().rev() {
            acc = acc.mul(&xs).add(&Self::constant(coeff.clone()));
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * BigRational::from(BigInt::from(i as i64 + 1)))
                .collect(),
        )
    }

    /// Resultant with the standard Sylvester-determinant sign convention,
    /// computed by the Euclidean remainder recursion.
    pub fn resultant(&self, other: &Self) -> BigRational {
        assert!(!self.is_zero() && !other.is_zero(), "resultant of zero polynomial");
        resultant_rec(self.clone(), other.clone())
    }
}

fn resultant_rec(a: QPoly, b: QPoly) -> BigRational {
    let da = a.deg();
    let db = b.deg();
    if db == 0 {
        return pow_rational(b.leading(), da as u32);
    }
    let r = a.rem(&b);
    if r.is_zero() {
        return BigRational::zero();
    }
    let dr = r.deg();
    // res(a,b) = (-1)^(da*db) * lc(b)^(da - dr) * res(b, r)
    let sign = if (da * db) % 2 == 1 { -BigRational::one() } else { BigRational::one() };
    sign * pow_rational(b.leading(), (da - dr) as u32) * resultant_rec(b, r)
}

fn pow_rational(base: &BigRational, exp: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{qr, ExactMatrix};

    /// Sylvester-matrix determinant oracle for resultants.
    fn sylvester_resultant(a: &QPoly, b: &QPoly) -> BigRational {
        let m = a.deg();
        let n = b.deg();
        if m + n == 0 {
            return BigRational::one();
        }
        let size = m + n;
        let mut rows = vec![vec![BigRational::zero(); size]; size];
        for i in 0..n {
            for j in 0..=m {
                rows[i][i + j] = a.coeff(m - j);
            }
        }
        for i in 0..m {
            for j in 0..=n {
                rows[n + i][i + j] = b.coeff(n - j);
            }
        }
        // determinant by fraction-free expansion via rref tracking
        det(ExactMatrix::from_rows(rows))
    }

    fn det(m: ExactMatrix<BigRational>) -> BigRational {
        let n = m.rows();
        let mut a: Vec<Vec<BigRational>> = (0..n).map(|i| m.row(i).to_vec()).collect();
        let mut d = BigRational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !num_traits::Zero::is_zero(&a[r][col])) else {
                return BigRational::zero();
            };
            if p != col {
                a.swap(p, col);
                d = -d;
            }
            let pivot = a[col][col].clone();
            d *= &pivot;
            for r in col + 1..n {
                if num_traits::Zero::is_zero(&a[r][col]) {
                    continue;
                }
                let f = &a[r][col] / &pivot;
                for j in col..n {
                    let t = &a[r][j] - &f * &a[col][j];
                    a[r][j] = t;
                }
            }
        }
        d
    }

    #[test]
    fn resultant_sign_convention() {
        // res(x, x-1) = -1 under the Sylvester convention
        let a = QPoly::from_ints(&[0, 1]);
        let b = QPoly::from_ints(&[-1, 1]);
        assert_eq!(a.resultant(&b), qr(-1, 1));
    }

    #[test]
    fn resultant_eval_case() {
        // res(x^2+1, x-1) = value of x^2+1 at 1 = 2
        let a = QPoly::from_ints(&[1, 0, 1]);
        let b = QPoly::from_ints(&[-1, 1]);
        assert_eq!(a.resultant(&b), qr(2, 1));
    }

    #[test]
    fn resultant_matches_sylvester_oracle() {
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 40) as i64 % 9) - 4
        };
        for _ in 0..20 {
            let mut ac: Vec<i64> = (0..5).map(|_| next()).collect();
            let mut bc: Vec<i64> = (0..5).map(|_| next()).collect();
            if ac[4] == 0 {
                ac[4] = 1;
            }
            if bc[4] == 0 {
                bc[4] = 1;
            }
            let a = QPoly::from_ints(&ac);
            let b = QPoly::from_ints(&bc);
            assert_eq!(a.resultant(&b), sylvester_resultant(&a, &b));
        }
    }

    #[test]
    fn shift_and_eval() {
        let p = QPoly::from_ints(&[1, 2, 3]); // 3x^2+2x+1
        let s = p.shift(&qr(2, 1));
        assert_eq!(s.eval(&qr(0, 1)), p.eval(&qr(2, 1)));
        assert_eq!(s.eval(&qr(-2, 1)), p.eval(&qr(0, 1)));
    }

    #[test]
    fn div_rem_roundtrip() {
        let a = QPoly::from_ints(&[3, 1, 4, 1, 5]);
        let b = QPoly::from_ints(&[2, 7, 1]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(b.mul(&q).add(&r), a);
        assert!(r.degree().map_or(true, |d| d < b.deg()));
    }
}
