//! Path evaluation of symbols via continued fractions.
//!
//! A path {∞ → p/q} decomposes into unimodular segments g_i{0,∞} built from
//! the convergents of p/q. Evaluating a polynomial-weighted path against a
//! symbol reduces each segment to generator columns: the class of the bottom
//! row of g_i together with the monomial coefficients of Q|g_i. Evaluation is
//! generic over the coefficient table so exact rational, number-field and
//! fixed-modulus residue symbols share one code path.

use super::space::{linear_power_coeffs, ManinSpace};
use crate::arith::nf::NumberFieldElement;
use num_bigint::BigInt;
use num_rational::BigRational;

/// Values of a symbol on every generator column, with ring operations.
pub trait ValueTable {
    type Elem: Clone;
    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul_i128(&self, a: &Self::Elem, c: i128) -> Self::Elem;
    fn col_value(&self, col: usize) -> Self::Elem;
}

/// Exact rational symbol values.
pub struct RatTable(pub Vec<BigRational>);

impl ValueTable for RatTable {
    type Elem = BigRational;
    fn zero(&self) -> BigRational {
        num_traits::Zero::zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn mul_i128(&self, a: &BigRational, c: i128) -> BigRational {
        a * BigRational::from(BigInt::from(c))
    }
    fn col_value(&self, col: usize) -> BigRational {
        self.0[col].clone()
    }
}

/// Exact number-field symbol values.
pub struct NfTable(pub Vec<NumberFieldElement>);

impl ValueTable for NfTable {
    type Elem = NumberFieldElement;
    fn zero(&self) -> NumberFieldElement {
        use crate::arith::FieldElement;
        self.0[0].zero_like()
    }
    fn add(&self, a: &NumberFieldElement, b: &NumberFieldElement) -> NumberFieldElement {
        use crate::arith::FieldElement;
        a.add(b)
    }
    fn mul_i128(&self, a: &NumberFieldElement, c: i128) -> NumberFieldElement {
        a.scale(&BigRational::from(BigInt::from(c)))
    }
    fn col_value(&self, col: usize) -> NumberFieldElement {
        self.0[col].clone()
    }
}

/// Symbol values in ℤ/p^m for scan workloads.
pub struct ResTable {
    pub vals: Vec<u64>,
    pub p: u64,
    pub m: u32,
    pub pm: u64,
}

impl ValueTable for ResTable {
    type Elem = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.pm
    }
    fn mul_i128(&self, a: &u64, c: i128) -> u64 {
        let c = c.rem_euclid(self.pm as i128) as u64;
        ((*a as u128 * c as u128) % self.pm as u128) as u64
    }
    fn col_value(&self, col: usize) -> u64 {
        self.vals[col]
    }
}

/// Monomial coefficients of Q|g with Q given by `poly` (index = power of X).
pub fn act_poly(g: [i128; 4], poly: &[i128], m: u32) -> Vec<i128> {
    let mut out = vec![0i128; m as usize + 1];
    for (t, c) in poly.iter().enumerate() {
        if *c == 0 {
            continue;
        }
        let part = linear_power_coeffs(g[0], g[1], g[2], g[3], t as u32, m);
        for (s, v) in part.iter().enumerate() {
            out[s] = out[s]
                .checked_add(c.checked_mul(*v).expect("path coefficient overflow"))
                .expect("path coefficient overflow");
        }
    }
    out
}

/// Evaluate the symbol on the segment g{0,∞} weighted by Q: the class of the
/// bottom row of g picks the generator, Q|g the monomial coefficients.
fn ev_segment<T: ValueTable>(space: &ManinSpace, table: &T, g: [i128; 4], poly: &[i128]) -> T::Elem {
    let n = space.level as i128;
    let c = (g[2].rem_euclid(n)) as i64;
    let d = (g[3].rem_euclid(n)) as i64;
    let x = space
        .p1
        .index(c, d)
        .expect("unimodular bottom row is a P1 class");
    let coeffs = act_poly(g, poly, space.m);
    let mut acc = table.zero();
    for (t, cf) in coeffs.iter().enumerate() {
        if *cf != 0 {
            let v = table.mul_i128(&table.col_value(space.col(x, t)), *cf);
            acc = table.add(&acc, &v);
        }
    }
    acc
}

/// Evaluate the symbol on {∞ → p/q} (q = 0 means the degenerate path, which
/// is 0) weighted by the polynomial Q.
pub fn ev_from_infinity<T: ValueTable>(
    space: &ManinSpace,
    table: &T,
    p: i128,
    q: i128,
    poly: &[i128],
) -> T::Elem {
    if q == 0 {
        return table.zero();
    }
    let (mut num, mut den) = (p, q);
    if den < 0 {
        num = -num;
        den = -den;
    }
    let g = num_integer::Integer::gcd(&num, &den);
    num /= g;
    den /= g;

    let mut acc = table.zero();
    // convergents p_i/q_i of num/den by floor-quotient continued fractions;
    // segment i is [[p_i, s p_{i-1}],[q_i, s q_{i-1}]], s = (-1)^(i-1),
    // which has determinant 1 and sends {0,∞} to {p_{i-1}/q_{i-1}, p_i/q_i}
    let (mut p2, mut q2) = (0i128, 1i128); // p_{-2}/q_{-2}
    let (mut p1v, mut q1v) = (1i128, 0i128); // p_{-1}/q_{-1}
    let (mut a, mut b) = (num, den);
    let mut idx: i32 = 0;
    loop {
        let quo = a.div_euclid(b);
        let rem = a - quo * b;
        let pi = quo
            .checked_mul(p1v)
            .and_then(|v| v.checked_add(p2))
            .expect("convergent overflow");
        let qi = quo
            .checked_mul(q1v)
            .and_then(|v| v.checked_add(q2))
            .expect("convergent overflow");
        let s: i128 = if idx % 2 == 0 { -1 } else { 1 };
        let g = [pi, s * p1v, qi, s * q1v];
        debug_assert_eq!(g[0] * g[3] - g[1] * g[2], 1);
        let v = ev_segment(space, table, g, poly);
        acc = table.add(&acc, &v);
        if rem == 0 {
            break;
        }
        p2 = p1v;
        q2 = q1v;
        p1v = pi;
        q1v = qi;
        a = b;
        b = rem;
        idx += 1;
        assert!(idx < 400, "continued fraction did not terminate");
    }
    acc
}

/// Evaluate the symbol on the path {α → β} between cusps (q = 0 encodes ∞).
pub fn ev_path<T: ValueTable>(
    space: &ManinSpace,
    table: &T,
    from: (i128, i128),
    to: (i128, i128),
    poly: &[i128],
) -> T::Elem {
    let head = ev_from_infinity(space, table, to.0, to.1, poly);
    let tail = ev_from_infinity(space, table, from.0, from.1, poly);
    table.add(&head, &table.mul_i128(&tail, -1))
}

/// λ(z^(j'); a, n) with j' = j + 1: the symbol evaluated on {∞ → a/n}
/// against (nX - aY)^j Y^(m - j).
pub fn evaluate_lambda<T: ValueTable>(
    space: &ManinSpace,
    table: &T,
    j: u32,
    a: i128,
    n: i128,
) -> T::Elem {
    assert!(n >= 1);
    assert!(j <= space.m);
    let poly = linear_power_coeffs(n, -a, 0, 1, j, space.m);
    ev_from_infinity(space, table, a, n, &poly)
}
