//! Dense linear algebra mod a word-size prime.
//!
//! Used for structural analysis (ranks, pivot selection, kernel shape) of
//! large Hecke systems before the exact computation; all results that feed
//! reported invariants are re-verified exactly.

/// Default analysis prime: 31 bits, products fit in u64 before reduction.
pub const ANALYSIS_PRIME: u64 = 2_147_483_647;

#[derive(Clone, Debug)]
pub struct ModMatrix {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

pub fn mod_inv(a: u64, p: u64) -> u64 {
    // Fermat; p prime, a != 0 mod p.
    assert!(a % p != 0, "inverse of zero mod {p}");
    mod_pow(a % p, p - 2, p)
}

pub fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

impl ModMatrix {
    pub fn zero(rows: usize, cols: usize, p: u64) -> Self {
        assert!(rows > 0 && cols > 0);
        assert!(p < (1 << 32), "prime must fit comfortably in u64 products");
        ModMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.p;
    }

    /// In-place row echelon. Returns pivot column per pivot row.
    pub fn echelon(&mut self) -> Vec<usize> {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.at(i, c) != 0) else { continue };
            if pr != r {
                for j in 0..self.cols {
                    self.data.swap(r * self.cols + j, pr * self.cols + j);
                }
            }
            let inv = mod_inv(self.at(r, c), p);
            for j in c..self.cols {
                let v = self.at(r, j) * inv % p;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i != r && self.at(i, c) != 0 {
                    let f = self.at(i, c);
                    for j in c..self.cols {
                        let v = (self.at(i, j) + p - f * self.at(r, j) % p) % p;
                        self.data[i * self.cols + j] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.echelon().len()
    }

    /// Kernel basis as rows.
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        let p = self.p;
        let mut m = self.clone();
        let pivots = m.echelon();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![0u64; self.cols];
            v[free] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                let coef = m.at(r, free);
                if coef != 0 {
                    v[pc] = (p - coef) % p;
                }
            }
            basis.push(v);
        }
        basis
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        let p = self.p;
        (0..self.rows)
            .map(|r| {
                let mut acc = 0u128;
                for c in 0..self.cols {
                    acc += (self.at(r, c) as u128) * (v[c] as u128);
                    if c % 16 == 15 {
                        acc %= p as u128;
                    }
                }
                (acc % p as u128) as u64
            })
            .collect()
    }

    /// Solve self * x = b, returning one solution if consistent.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(b.len(), self.rows);
        let p = self.p;
        let mut aug = ModMatrix::zero(self.rows, self.cols + 1, p);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.at(r, c));
            }
            aug.set(r, self.cols, b[r]);
        }
        let pivots = aug.echelon();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0u64; self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.at(r, self.cols);
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inv_roundtrip() {
        for a in [1u64, 2, 5, 123456, ANALYSIS_PRIME - 1] {
            assert_eq!(a * mod_inv(a, ANALYSIS_PRIME) % ANALYSIS_PRIME, 1);
        }
    }

    #[test]
    fn rank_and_kernel() {
        let p = 10007;
        let mut m = ModMatrix::zero(2, 3, p);
        // rows (1,2,3), (2,4,6): rank 1, kernel dim 2
        for (c, v) in [1u64, 2, 3].iter().enumerate() {
            m.set(0, c, *v);
            m.set(1, c, 2 * *v);
        }
        assert_eq!(m.rank(), 1);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.mul_vec(v).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn solve_consistent_and_not() {
        let p = 10007;
        let mut m = ModMatrix::zero(2, 2, p);
        m.set(0, 0, 1);
        m.set(0, 1, 1);
        m.set(1, 0, 1);
        m.set(1, 1, 1);
        assert!(m.solve(&[3, 3]).is_some());
        assert!(m.solve(&[3, 4]).is_none());
        let x = m.solve(&[3, 3]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![3, 3]);
    }

    #[test]
    fn random_rank_matches_float_free_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            // build rank-r matrix as product of random (5 x r)(r x 6)
            let r = rng.gen_range(1..=4usize);
            let a: Vec<Vec<i64>> =
                (0..5).map(|_| (0..r).map(|_| rng.gen_range(-5..6)).collect()).collect();
            let b: Vec<Vec<i64>> =
                (0..r).map(|_| (0..6).map(|_| rng.gen_range(-5..6)).collect()).collect();
            let p = ANALYSIS_PRIME;
            let mut m = ModMatrix::zero(5, 6, p);
            for i in 0..5 {
                for j in 0..6 {
                    let mut s = 0i64;
                    for k in 0..r {
                        s += a[i][k] * b[k][j];
                    }
                    m.set(i, j, s.rem_euclid(p as i64) as u64);
                }
            }
            assert!(m.rank() <= r);
        }
    }
}
