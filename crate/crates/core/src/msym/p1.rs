//! The projective line P¹(ℤ/N) indexing Manin symbols for Γ₀(N).
//!
//! Classes (c:d) are stored via a canonical normal form: c is scaled to the
//! gcd g = gcd(c, N), then d is minimized over the units congruent to 1 mod
//! N/g that fix c. Enumeration walks one orbit per divisor of N, so the list
//! has exactly ψ(N) = N·∏_{q|N}(1 + 1/q) entries.

use num_integer::Integer;
use std::collections::HashMap;

/// Extended gcd: returns (g, s, t) with s*a + t*b = g ≥ 0.
pub fn xgcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = i64::extended_gcd(&a, &b);
    (e.gcd, e.x, e.y)
}

fn modn(a: i64, n: i64) -> i64 {
    a.rem_euclid(n)
}

/// Canonical representative of the class (c:d) in P¹(ℤ/N), N ≥ 1.
/// Returns (0, 0) when gcd(c, d, N) > 1 (not a valid projective point).
pub fn p1_normalize(n: i64, c: i64, d: i64) -> (i64, i64) {
    assert!(n >= 1);
    if n == 1 {
        return (0, 0);
    }
    let c = modn(c, n);
    let mut d = modn(d, n);
    if c == 0 {
        return if d.gcd(&n) == 1 { (0, 1) } else { (0, 0) };
    }
    if c.gcd(&d).gcd(&n) > 1 {
        return (0, 0);
    }
    // scale by the inverse unit part of c so that c becomes g = gcd(c, N)
    let (g, s, _) = xgcd(c, n);
    let s = modn(s, n);
    // s*c ≡ g (mod N) and s may share a factor with N; fix by adding N/g
    // multiples until s is a unit
    let mut s = s;
    while s.gcd(&n) != 1 {
        s = modn(s + n / g, n);
    }

    d = modn(s * d, n);
    if g == 1 {
        return (1, d);
    }
    // the stabilizer of c = g scales d by units u ≡ 1 mod N/g; take the
    // smallest resulting d
    let mut min_d = d;
    let mut k = 1i64;
    while k * (n / g) < n {
        let u = modn(1 + k * n / g, n);
        if u.gcd(&n) == 1 {
            let dd = modn(u * d, n);
            if dd < min_d {
                min_d = dd;
            }
        }
        k += 1;
    }
    (g, min_d)
}

/// P¹(ℤ/N) with O(1) class lookup.
pub struct P1 {
    pub n: i64,
    pub list: Vec<(i64, i64)>,
    index_map: HashMap<(i64, i64), usize>,
}

impl P1 {
    pub fn new(n: i64) -> Self {
        assert!(n >= 1);
        let mut list = Vec::new();
        if n == 1 {
            list.push((0, 0));
        } else {
            list.push((0, 1));
            list.push((1, 0));
            for d in 1..n {
                if p1_normalize(n, 1, d) == (1, d) {
                    list.push((1, d));
                }
            }
            // one block of classes (g : d) for every divisor g with 1 < g < N
            let mut g = 2;
            while g < n {
                if n % g == 0 {
                    for d in 1..n {
                        if d.gcd(&g) == 1 && p1_normalize(n, g, d) == (g, d) {
                            list.push((g, d));
                        }
                    }
                }
                g += 1;
            }
        }
        list.sort();
        list.dedup();
        let index_map = list.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        P1 { n, list, index_map }
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    /// Index of the class of (c:d); None if gcd(c, d, N) > 1.
    pub fn index(&self, c: i64, d: i64) -> Option<usize> {
        if self.n == 1 {
            return Some(0);
        }
        let key = p1_normalize(self.n, c, d);
        if key == (0, 0) {
            return None;
        }
        Some(self.index_map[&key])
    }
}

/// A matrix [[a, b], [c, d]] in SL₂(ℤ) whose bottom row is congruent mod N
/// to the class of (c:d). Entries are kept small.
pub fn lift_to_sl2z(n: i64, c: i64, d: i64) -> [i64; 4] {
    if n == 1 {
        return [1, 0, 0, 1];
    }
    let (c0, d0) = p1_normalize(n, c, d);
    assert!((c0, d0) != (0, 0), "not a P1 class");
    let (c, mut d) = (c0, d0);
    if c == 0 {
        // class (0:1): bottom row (0, 1)
        return [1, 0, 0, 1];
    }
    // make gcd(c, d) = 1 by shifting d by multiples of N (d + kN hits a
    // residue coprime to c since gcd(c, d, N) = 1)
    let mut k = 0i64;
    while c.gcd(&d) != 1 {
        k += 1;
        d = d0 + k * n;
        assert!(k < 10_000, "lift search failed");
    }
    let (g, s, t) = xgcd(c, d);
    debug_assert_eq!(g, 1);
    // s*c + t*d = 1, so [[t, -s], [c, d]] has determinant t*d + s*c = 1
    [t, -s, c, d]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn psi(n: i64) -> usize {
        let mut out = n;
        let mut m = n;
        let mut q = 2;
        while q * q <= m {
            if m % q == 0 {
                out = out / q * (q + 1);
                while m % q == 0 {
                    m /= q;
                }
            }
            q += 1;
        }
        if m > 1 {
            out = out / m * (m + 1);
        }
        out as usize
    }

    #[test]
    fn sizes_match_psi() {
        for n in [1i64, 2, 3, 5, 8, 11, 12, 14, 43, 60, 90, 389] {
            let p1 = P1::new(n);
            if n == 1 {
                assert_eq!(p1.len(), 1);
            } else {
                assert_eq!(p1.len(), psi(n), "N = {n}");
            }
        }
    }

    #[test]
    fn normalize_is_idempotent_and_scaling_invariant() {
        for n in [11i64, 12, 14, 60] {
            for c in 0..n {
                for d in 0..n {
                    let p = p1_normalize(n, c, d);
                    if p == (0, 0) {
                        continue;
                    }
                    assert_eq!(p1_normalize(n, p.0, p.1), p);
                    // scaling by any unit u fixes the class
                    for u in 1..n {
                        if u.gcd(&n) == 1 {
                            assert_eq!(p1_normalize(n, u * c, u * d), p, "N={n} ({c}:{d}) u={u}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn distinct_classes_are_not_unit_multiples() {
        let n = 12i64;
        let p1 = P1::new(n);
        for i in 0..p1.len() {
            for j in (i + 1)..p1.len() {
                let (c1, d1) = p1.list[i];
                let (c2, d2) = p1.list[j];
                for u in 1..n {
                    if u.gcd(&n) == 1 {
                        assert!(
                            (modn(u * c1, n), modn(u * d1, n)) != (modn(c2, n), modn(d2, n)),
                            "classes {i} and {j} coincide"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn lift_has_det_one_and_correct_class() {
        for n in [11i64, 14, 43, 60, 389] {
            let p1 = P1::new(n);
            for &(c, d) in &p1.list {
                let [a, b, c2, d2] = lift_to_sl2z(n, c, d);
                assert_eq!(a * d2 - b * c2, 1, "det != 1 at N={n} ({c}:{d})");
                assert_eq!(p1_normalize(n, c2, d2), (c, d), "wrong class at N={n}");
            }
        }
    }
}
