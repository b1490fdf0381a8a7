//! Dixon p-adic lifting for exact solutions of integer linear systems.
//!
//! Solves A x = b over ℚ for a square integer matrix A that is invertible
//! mod the lifting prime: one mod-p inversion, then cheap digit iterations
//! and rational reconstruction. Results are verified exactly by the caller,
//! so the lifting prime never affects reported values.

use super::modp::{mod_inv, ModMatrix};
use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

/// Dense square integer matrix with word-size entries.
#[derive(Clone, Debug)]
pub struct IntMatrix {
    pub n: usize,
    pub data: Vec<i64>,
}

impl IntMatrix {
    pub fn zero(n: usize) -> Self {
        assert!(n > 0);
        IntMatrix { n, data: vec![0; n * n] }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.n + c] = v;
    }

    fn max_abs(&self) -> i64 {
        self.data.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

/// Gauss-Jordan inverse mod p; None when singular mod p.
pub fn invert_mod(a: &IntMatrix, p: u64) -> Option<ModMatrix> {
    let n = a.n;
    let mut m = ModMatrix::zero(n, 2 * n, p);
    for r in 0..n {
        for c in 0..n {
            m.set(r, c, a.at(r, c).rem_euclid(p as i64) as u64);
        }
        m.set(r, n + r, 1);
    }
    for c in 0..n {
        let pr = (c..n).find(|&i| m.at(i, c) != 0)?;
        if pr != c {
            for j in 0..2 * n {
                m.data.swap(c * 2 * n + j, pr * 2 * n + j);
            }
        }
        let inv = mod_inv(m.at(c, c), p);
        for j in 0..2 * n {
            let v = m.at(c, j) * inv % p;
            m.set(c, j, v);
        }
        let pivot_row: Vec<u64> = (0..2 * n).map(|j| m.at(c, j)).collect();
        let width = 2 * n;
        m.data.par_chunks_mut(width).enumerate().for_each(|(i, row)| {
            if i != c && row[c] != 0 {
                let f = row[c];
                for j in c..width {
                    row[j] = (row[j] + p - f * pivot_row[j] % p) % p;
                }
            }
        });
    }
    let mut out = ModMatrix::zero(n, n, p);
    for r in 0..n {
        for c in 0..n {
            out.set(r, c, m.at(r, n + c));
        }
    }
    Some(out)
}

/// Best rational n/d ≡ x (mod m) with |n|, d ≤ sqrt(m/2); None if no such
/// representative exists.
pub fn rational_reconstruct(x: &BigInt, m: &BigInt) -> Option<BigRational> {
    let limit = num_integer::Roots::sqrt(&(m / BigInt::from(2)));
    let (mut r0, mut r1) = (m.clone(), x.mod_floor_big(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > limit {
        let q = &r0 / &r1;
        let r = &r0 - &q * &r1;
        let t = &t0 - &q * &t1;
        r0 = r1;
        r1 = r;
        t0 = t1;
        t1 = t;
    }
    if t1.is_zero() || t1.abs() > limit {
        return None;
    }
    let (num, den) = if t1.sign() == Sign::Minus { (-r1, -t1) } else { (r1, t1) };
    if !num.is_zero() && num.gcd_big(&den) != BigInt::one() {
        // a non-reduced pair means no valid representative in the box
        return None;
    }
    Some(BigRational::new(num, den))
}

trait BigIntExt {
    fn mod_floor_big(&self, m: &BigInt) -> BigInt;
    fn gcd_big(&self, other: &BigInt) -> BigInt;
}

impl BigIntExt for BigInt {
    fn mod_floor_big(&self, m: &BigInt) -> BigInt {
        let r = self % m;
        if r.sign() == Sign::Minus {
            r + m
        } else {
            r
        }
    }
    fn gcd_big(&self, other: &BigInt) -> BigInt {
        num_integer::Integer::gcd(self, other)
    }
}

/// Solve A x = b exactly. `ainv` is A^{-1} mod p from `invert_mod`. The
/// solution is verified by exact multiplication before returning.
pub fn dixon_solve(a: &IntMatrix, ainv: &ModMatrix, b: &[i128], p: u64) -> Option<Vec<BigRational>> {
    let n = a.n;
    assert_eq!(b.len(), n);
    assert_eq!(ainv.rows, n);
    // residual bound: |r| stays near n * max|A|, products fit i128 comfortably
    let amax = a.max_abs() as i128;
    assert!(amax < (1 << 40), "matrix entries too large for i128 iteration");

    let mut r: Vec<i128> = b.to_vec();
    let mut digits: Vec<Vec<u64>> = Vec::new();
    let pb = BigInt::from(p);
    let max_iters = 64 + 4 * n * (64 - (amax as u64 | 1).leading_zeros() as usize + 16) / 31;

    for iter in 1..=max_iters {
        // x = A^{-1} r mod p
        let rm: Vec<u64> = r.iter().map(|v| v.rem_euclid(p as i128) as u64).collect();
        let x = ainv.mul_vec(&rm);
        // r = (r - A x) / p
        let new_r: Vec<i128> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = r[i];
                let base = i * n;
                for k in 0..n {
                    acc -= a.data[base + k] as i128 * x[k] as i128;
                }
                debug_assert_eq!(acc % p as i128, 0);
                acc / p as i128
            })
            .collect();
        r = new_r;
        digits.push(x);

        let finished = r.iter().all(|&v| v == 0);
        if finished || iter % 24 == 0 || iter == max_iters {
            if let Some(sol) = try_reconstruct(&digits, &pb) {
                if verify(a, &sol, b) {
                    return Some(sol);
                }
            }
            if finished {
                // exact p-adic termination but reconstruction failed: solution
                // is the integer Σ digits p^i
                let sol = padic_sum(&digits, &pb)
                    .into_iter()
                    .map(BigRational::from)
                    .collect::<Vec<_>>();
                if verify(a, &sol, b) {
                    return Some(sol);
                }
                return None;
            }
        }
    }
    None
}

fn padic_sum(digits: &[Vec<u64>], p: &BigInt) -> Vec<BigInt> {
    let n = digits[0].len();
    let mut out = vec![BigInt::zero(); n];
    for d in digits.iter().rev() {
        for (o, &x) in out.iter_mut().zip(d.iter()) {
            *o = &*o * p + BigInt::from(x);
        }
    }
    out
}

fn try_reconstruct(digits: &[Vec<u64>], p: &BigInt) -> Option<Vec<BigRational>> {
    let m = p.pow(digits.len() as u32);
    let sums = padic_sum(digits, p);
    sums.iter().map(|x| rational_reconstruct(x, &m)).collect()
}

fn verify(a: &IntMatrix, x: &[BigRational], b: &[i128]) -> bool {
    let n = a.n;
    (0..n).into_par_iter().all(|i| {
        let mut acc = BigRational::zero();
        for k in 0..n {
            if !x[k].is_zero() && a.at(i, k) != 0 {
                acc += &x[k] * BigRational::from(BigInt::from(a.at(i, k)));
            }
        }
        acc == BigRational::from(BigInt::from(b[i]))
    })
}
