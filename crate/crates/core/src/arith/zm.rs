//! Residue arithmetic in ℤ/p^k as a coefficient type for sparse elimination.
//!
//! ℤ/p^k is not a field, but the unit-pivot discipline of `eliminate` only
//! ever inverts p-units, so the same elimination code produces a valid
//! triangular quotient over the residue ring. Elements carry their modulus so
//! the `FieldElement` interface needs no global state.

use super::FieldElement;

/// An element of ℤ/p^k with p^k < 2^63. Inversion panics on non-units, which
/// the unit-pivot predicate rules out during elimination.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Zq {
    pub v: u64,
    pub p: u64,
    pub pm: u64,
}

impl Zq {
    pub fn new(v: u64, p: u64, pm: u64) -> Self {
        Zq { v: v % pm, p, pm }
    }

    pub fn from_i64(v: i64, p: u64, pm: u64) -> Self {
        Zq { v: v.rem_euclid(pm as i64) as u64, p, pm }
    }

    pub fn is_unit(&self) -> bool {
        self.v % self.p != 0
    }

    /// p-adic valuation, capped at the full precision for 0.
    pub fn valuation(&self) -> u32 {
        if self.v == 0 {
            let mut k = 0;
            let mut q = 1u64;
            while q < self.pm {
                q *= self.p;
                k += 1;
            }
            return k;
        }
        let mut v = self.v;
        let mut t = 0;
        while v % self.p == 0 {
            v /= self.p;
            t += 1;
        }
        t
    }
}

/// Inverse of a mod m by extended Euclid; panics when gcd(a, m) > 1.
pub fn inv_mod_u64(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "non-unit has no inverse mod {m}");
    s0.rem_euclid(m as i128) as u64
}

impl FieldElement for Zq {
    fn zero_like(&self) -> Self {
        Zq { v: 0, p: self.p, pm: self.pm }
    }
    fn one_like(&self) -> Self {
        Zq { v: 1 % self.pm, p: self.p, pm: self.pm }
    }
    fn is_zero(&self) -> bool {
        self.v == 0
    }
    fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.pm, other.pm);
        let mut v = self.v + other.v;
        if v >= self.pm {
            v -= self.pm;
        }
        Zq { v, ..*self }
    }
    fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.pm, other.pm);
        let v = if self.v >= other.v { self.v - other.v } else { self.v + self.pm - other.v };
        Zq { v, ..*self }
    }
    fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.pm, other.pm);
        Zq { v: ((self.v as u128 * other.v as u128) % self.pm as u128) as u64, ..*self }
    }
    fn neg(&self) -> Self {
        Zq { v: if self.v == 0 { 0 } else { self.pm - self.v }, ..*self }
    }
    fn inv(&self) -> Self {
        Zq { v: inv_mod_u64(self.v, self.pm), ..*self }
    }
    /// Higher p-valuation means a worse pivot.
    fn complexity(&self) -> u64 {
        self.valuation() as u64
    }
}
