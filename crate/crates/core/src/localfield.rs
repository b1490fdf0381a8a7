//! The completion of the Hecke field at a chosen prime above p.
//!
//! Primes are cut out by Hensel-lifting the mod-p factorization of the
//! defining polynomial; repeated mod-p factors are refined by Newton-polygon
//! segmentation. Valuations of global elements go through resultants with the
//! local factor, so every answer is exact up to the tracked precision.

use crate::arith::nf::{NumberField, NumberFieldElement};
use crate::arith::poly::QPoly;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LocalFieldError {
    #[error("selector matches no local prime (available: {0})")]
    NoMatch(String),
    #[error("selector is ambiguous: {0} primes share (e={1}, f={2}); give a root approximation")]
    Ambiguous(usize, usize, usize),
    #[error("p-adic precision exhausted; rerun with precision above {0}")]
    PrecisionExhausted(u32),
    #[error("local splitting pattern not validated: {0}")]
    Unvalidated(String),
    #[error("reduction mod pi^{0} exceeds known precision {1}")]
    PrecisionTooLow(u32, u32),
    #[error("valuation of zero is +infinity")]
    ZeroValuation,
    #[error("defining polynomial must be monic with integer coefficients")]
    BadPolynomial,
}

/// Data for one prime of K_f above p: the local factor g over ℚ_p (to
/// precision p^W), ramification e, residue degree f.
#[derive(Clone, Debug)]
pub struct LocalPrimeData {
    pub p: u64,
    pub field: Arc<NumberField>,
    pub e: usize,
    pub f_res: usize,
    pub precision_m: u32,
    working_w: u32,
    /// Monic local factor with integer coefficients in [0, p^W).
    local_factor: QPoly,
    /// c with v_π(θ - c) = 1, present for totally ramified factors.
    shift: Option<BigInt>,
    pub validated: bool,
}

/// An element of the completion together with the precision to which it is
/// known: `None` means exact (a genuine global element).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalValue {
    pub representative: NumberFieldElement,
    pub known_precision: Option<u32>,
}

impl LocalValue {
    pub fn exact(x: NumberFieldElement) -> Self {
        LocalValue { representative: x, known_precision: None }
    }
}

/// Result of a valuation query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Exact(i64),
    /// All tracked digits vanish; the true valuation is at least this.
    AtLeast(i64),
    Infinity,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PrimeSelector {
    Unique,
    ByEF { e: usize, f: usize },
    /// Approximate root of h in ℤ_p, given as the residue mod p.
    ByRootModP(u64),
}

pub fn vp_bigint(x: &BigInt, p: u64) -> u64 {
    assert!(!x.is_zero());
    let p = BigInt::from(p);
    let mut v = 0;
    let mut x = x.abs();
    while (&x % &p).is_zero() {
        x /= &p;
        v += 1;
    }
    v
}

pub fn vp_rational(x: &BigRational, p: u64) -> i64 {
    assert!(!x.is_zero());
    vp_bigint(x.numer(), p) as i64 - vp_bigint(x.denom(), p) as i64
}

pub const DEFAULT_PRECISION: u32 = 20;
const W_BUFFER: u32 = 12;

/// Factor h over ℚ_p to precision M and return the prime the selector picks.
pub fn split_prime(
    p: u64,
    h: &QPoly,
    selector: &PrimeSelector,
    precision_m: u32,
) -> Result<LocalPrimeData, LocalFieldError> {
    let all = split_prime_all(p, h, precision_m)?;
    select(all, selector, p)
}

fn select(
    all: Vec<LocalPrimeData>,
    selector: &PrimeSelector,
    p: u64,
) -> Result<LocalPrimeData, LocalFieldError> {
    let describe = |v: &[LocalPrimeData]| {
        v.iter().map(|d| format!("(e={},f={})", d.e, d.f_res)).collect::<Vec<_>>().join(", ")
    };
    match selector {
        PrimeSelector::Unique => {
            if all.len() == 1 {
                Ok(all.into_iter().next().unwrap())
            } else {
                Err(LocalFieldError::NoMatch(describe(&all)))
            }
        }
        PrimeSelector::ByEF { e, f } => {
            let hits: Vec<LocalPrimeData> =
                all.iter().filter(|d| d.e == *e && d.f_res == *f).cloned().collect();
            match hits.len() {
                0 => Err(LocalFieldError::NoMatch(describe(&all))),
                1 => Ok(hits.into_iter().next().unwrap()),
                n => Err(LocalFieldError::Ambiguous(n, *e, *f)),
            }
        }
        PrimeSelector::ByRootModP(r) => {
            // a root approximation picks the factor vanishing at it mod p
            let pb = BigInt::from(p);
            let hits: Vec<LocalPrimeData> = all
                .iter()
                .filter(|d| {
                    let val = d.local_factor.eval(&BigRational::from(BigInt::from(*r)));
                    (val.numer() % &pb).is_zero() && val.denom().is_one()
                })
                .cloned()
                .collect();
            match hits.len() {
                1 => Ok(hits.into_iter().next().unwrap()),
                _ => Err(LocalFieldError::NoMatch(describe(&all))),
            }
        }
    }
}

/// All primes of K_f above p. Σ e·f over the result equals deg h.
pub fn split_prime_all(
    p: u64,
    h: &QPoly,
    precision_m: u32,
) -> Result<Vec<LocalPrimeData>, LocalFieldError> {
    assert!(precision_m >= 1);
    if !h.is_monic() || h.coeffs().iter().any(|c| !c.denom().is_one()) {
        return Err(LocalFieldError::BadPolynomial);
    }
    let field = NumberField::new(h.clone(), format!("deg{}", h.deg()));
    let w = precision_m + W_BUFFER;
    let pw = BigInt::from(p).pow(w);

    // mod-p factorization into distinct irreducibles with multiplicity
    let hp = FpPoly::from_qpoly(h, p);
    let factors = hp.factor(p);

    // Hensel-lift the pairwise-coprime blocks g_i^{m_i}
    let blocks = lift_coprime_blocks(h, &factors, p, w)?;

    let mut out = Vec::new();
    for (block, (gi, mi)) in blocks.into_iter().zip(&factors) {
        if *mi == 1 {
            // irreducible mod p: unramified of degree f = deg g_i
            out.push(LocalPrimeData {
                p,
                field: field.clone(),
                e: 1,
                f_res: gi.deg(),
                precision_m,
                working_w: w,
                local_factor: block,
                shift: None,
                validated: true,
            });
        } else {
            if gi.deg() != 1 {
                return Err(LocalFieldError::Unvalidated(format!(
                    "repeated mod-{p} factor of degree {} > 1",
                    gi.deg()
                )));
            }
            // repeated linear factor (x - c)^m: shift the root to 0 and
            // segment by Newton polygon
            let c = BigInt::from((p - gi.coeffs[0] % p) % p);
            let shifted = reduce_zpoly(&block.shift(&BigRational::from(c.clone())), &pw);
            for part in segment_block(&shifted, p, w)? {
                let unshifted =
                    reduce_zpoly(&part.poly.shift(&BigRational::from(-c.clone())), &pw);
                out.push(LocalPrimeData {
                    p,
                    field: field.clone(),
                    e: part.e,
                    f_res: part.f,
                    precision_m,
                    working_w: w,
                    local_factor: unshifted,
                    shift: if part.e > 1 { Some(c.clone()) } else { None },
                    validated: part.e <= 2,
                });
            }
        }
    }
    debug_assert_eq!(out.iter().map(|d| d.e * d.f_res).sum::<usize>(), h.deg());
    Ok(out)
}

struct SegmentFactor {
    poly: QPoly,
    e: usize,
    f: usize,
}

/// Split a block whose reduction mod p is x^deg by Newton-polygon slopes.
///
/// Validated shapes: any number of integral-slope length-1 segments (simple
/// roots after scaling, lifted by Newton iteration) plus at most one residual
/// single-segment factor of slope a/e with gcd(a,e)=1 and length e (totally
/// ramified). Anything else is rejected.
fn segment_block(block: &QPoly, p: u64, w: u32) -> Result<Vec<SegmentFactor>, LocalFieldError> {
    let pw = BigInt::from(p).pow(w);
    let mut rest = block.clone();
    let mut out = Vec::new();
    loop {
        let segs = newton_segments(&rest, p)?;
        if segs.len() == 1 {
            let (num, den, len) = segs[0];
            if den == len && gcd_u(num as u64, den as u64) == 1 {
                // single totally ramified factor
                out.push(SegmentFactor { poly: rest, e: den, f: 1 });
                return Ok(out);
            }
            if den == 1 && len == 1 {
                out.push(SegmentFactor { poly: rest, e: 1, f: 1 });
                return Ok(out);
            }
            return Err(LocalFieldError::Unvalidated(format!(
                "Newton segment slope {num}/{den} length {len}"
            )));
        }
        // peel one integral-slope length-1 segment: a simple root of
        // valuation a, found by scaling x = p^a u and lifting the unit root
        let Some(&(a, _, _)) = segs.iter().find(|(_, den, len)| *den == 1 && *len == 1) else {
            return Err(LocalFieldError::Unvalidated(format!(
                "multi-segment Newton polygon without simple integral segment: {segs:?}"
            )));
        };
        let root = lift_scaled_root(&rest, a, p, w)?;
        // divide off (x - root) mod p^w
        let lin = QPoly::from_bigints(&[-&root + &pw, BigInt::one()]);
        let (q, r) = rest.div_rem(&lin);
        if !reduce_zpoly(&r, &pw).is_zero() {
            return Err(LocalFieldError::PrecisionExhausted(w));
        }
        out.push(SegmentFactor { poly: reduce_zpoly(&lin, &pw), e: 1, f: 1 });
        rest = reduce_zpoly(&q, &pw);
        if rest.deg() == 0 {
            return Ok(out);
        }
    }
}

/// Lower Newton polygon of g (root of its reduction at 0): list of
/// (numerator, denominator, length) per segment, slopes as positive rationals
/// num/den in lowest terms, lengths in x-units, steepest first.
fn newton_segments(g: &QPoly, p: u64) -> Result<Vec<(usize, usize, usize)>, LocalFieldError> {
    let pts: Vec<(usize, u64)> = g
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| {
            debug_assert!(c.denom().is_one());
            (i, vp_bigint(c.numer(), p))
        })
        .collect();
    if pts[0].0 != 0 {
        return Err(LocalFieldError::Unvalidated("block with zero constant term".into()));
    }
    // lower convex hull from (0, v0) to (deg, 0)
    let mut hull: Vec<(usize, u64)> = Vec::new();
    for &(x, y) in &pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // drop (x2,y2) if it lies on or above segment (x1,y1)-(x,y)
            let lhs = (y as i128 - y1 as i128) * (x2 as i128 - x1 as i128);
            let rhs = (y2 as i128 - y1 as i128) * (x as i128 - x1 as i128);
            if rhs >= lhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    let mut segs = Vec::new();
    for wnd in hull.windows(2) {
        let (x1, y1) = wnd[0];
        let (x2, y2) = wnd[1];
        let dy = y1 - y2;
        let dx = x2 - x1;
        let g = gcd_u(dy, dx as u64).max(1);
        segs.push(((dy / g) as usize, (dx as u64 / g) as usize, dx));
    }
    Ok(segs)
}

/// Newton-lift the unique unit root of g(p^a u) / p^c to precision p^w; the
/// caller guarantees a simple root (length-1 integral segment of slope a).
/// Returns the root of g itself (valuation a).
fn lift_scaled_root(g: &QPoly, a: usize, p: u64, w: u32) -> Result<BigInt, LocalFieldError> {
    let pb = BigInt::from(p);
    let pw = pb.pow(w);
    // f(u) = g(p^a u) / p^content
    let scaled: Vec<BigInt> = g
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c.numer() * pb.pow((a * i) as u32))
        .collect();
    let content = scaled.iter().filter(|c| !c.is_zero()).map(|c| vp_bigint(c, p)).min().unwrap();
    let f: Vec<BigInt> = scaled.iter().map(|c| c / pb.pow(content as u32)).collect();
    let fp = QPoly::from_bigints(&f);
    let fpd = fp.derivative();
    // unit root mod p by scan
    let mut r = None;
    for u in 1..p {
        let v = fp.eval(&BigRational::from(BigInt::from(u)));
        if (v.numer() % &pb).is_zero() {
            let d = fpd.eval(&BigRational::from(BigInt::from(u)));
            if !(d.numer() % &pb).is_zero() {
                r = Some(BigInt::from(u));
                break;
            }
        }
    }
    let Some(mut r) = r else {
        return Err(LocalFieldError::Unvalidated("expected simple unit root not found".into()));
    };
    // Newton iteration mod p^w
    for _ in 0..w + 2 {
        let fv = fp.eval(&BigRational::from(r.clone()));
        let dv = fpd.eval(&BigRational::from(r.clone()));
        let dinv = mod_inv_big(dv.numer(), &pw);
        r = mod_floor(&(&r - fv.numer() * dinv), &pw);
        if fp.eval(&BigRational::from(r.clone())).numer().mod_floor_ref(&pw).is_zero() {
            break;
        }
    }
    Ok(mod_floor(&(r * pb.pow(a as u32)), &pw))
}

/// Lift h ≡ Π gᵢ^{mᵢ} (mod p) to pairwise-coprime monic factors mod p^w.
fn lift_coprime_blocks(
    h: &QPoly,
    factors: &[(FpPoly, usize)],
    p: u64,
    w: u32,
) -> Result<Vec<QPoly>, LocalFieldError> {
    let pw = BigInt::from(p).pow(w);
    if factors.len() == 1 {
        return Ok(vec![reduce_zpoly(h, &pw)]);
    }
    let mut rest = reduce_zpoly(h, &pw);
    let mut out = Vec::new();
    for (i, (gi, mi)) in factors.iter().enumerate() {
        if i + 1 == factors.len() {
            out.push(rest.clone());
            break;
        }
        let a0 = gi.pow(*mi, p);
        let mut b0 = FpPoly::from_qpoly(&rest, p);
        b0 = b0.div_exact(&a0, p);
        let (a, _b) = hensel_pair(&rest, &a0, &b0, p, w)?;
        let (q, r) = rest.div_rem(&a);
        if !reduce_zpoly(&r, &pw).is_zero() {
            return Err(LocalFieldError::PrecisionExhausted(w));
        }
        out.push(a);
        rest = reduce_zpoly(&q, &pw);
    }
    Ok(out)
}

/// Linear Hensel lifting: h ≡ A·B with A ≡ a0, B ≡ b0 mod p, gcd(a0,b0)=1.
fn hensel_pair(
    h: &QPoly,
    a0: &FpPoly,
    b0: &FpPoly,
    p: u64,
    w: u32,
) -> Result<(QPoly, QPoly), LocalFieldError> {
    let (s, t) = FpPoly::bezout(a0, b0, p)
        .ok_or_else(|| LocalFieldError::Unvalidated("mod-p factors not coprime".into()))?;
    let pb = BigInt::from(p);
    let mut a = a0.to_qpoly();
    let mut b = b0.to_qpoly();
    for k in 1..w {
        let pk = pb.pow(k);
        let pk1 = &pk * &pb;
        let diff = h.sub(&a.mul(&b));
        let e_big = reduce_zpoly(&diff, &pk1);
        // E = (h - A B)/p^k mod p
        let e = FpPoly {
            coeffs: {
                let mut v: Vec<u64> = e_big
                    .coeffs()
                    .iter()
                    .map(|c| {
                        let q = c.numer() / &pk;
                        let r: BigInt = mod_floor(&q, &pb);
                        r.try_into().unwrap()
                    })
                    .collect();
                while v.last() == Some(&0) {
                    v.pop();
                }
                v
            },
        };
        if e.coeffs.is_empty() {
            continue;
        }
        let te = t.mul(&e, p);
        let (q, alpha) = te.div_rem(a0, p);
        let beta = s.mul(&e, p).add(&q.mul(b0, p), p);
        a = reduce_zpoly(&a.add(&alpha.to_qpoly().scale(&BigRational::from(pk.clone()))), &pk1);
        b = reduce_zpoly(&b.add(&beta.to_qpoly().scale(&BigRational::from(pk.clone()))), &pk1);
    }
    Ok((a, b))
}

impl LocalPrimeData {
    pub fn number_field(&self) -> &Arc<NumberField> {
        &self.field
    }

    /// Exact local factor, integer coefficients in [0, p^W).
    pub fn local_factor(&self) -> &QPoly {
        &self.local_factor
    }

    /// v_π with v_π(π)=1, v_π(p)=e.
    pub fn valuation(&self, x: &LocalValue) -> Result<Valuation, LocalFieldError> {
        use crate::arith::FieldElement;
        let cap = x.known_precision.map(|m| m as i64);
        if FieldElement::is_zero(&x.representative) {
            return Ok(match cap {
                None => Valuation::Infinity,
                Some(m) => Valuation::AtLeast(m),
            });
        }
        let v = if let Some(q) = x.representative.as_rational() {
            // rational fast path: v_π = e · v_p
            self.e as i64 * vp_rational(&q, self.p)
        } else {
            let res = x.representative.as_poly().resultant(&self.local_factor);
            if num_traits::Zero::is_zero(&res) {
                return Err(LocalFieldError::PrecisionExhausted(self.working_w));
            }
            let vp = vp_rational(&res, self.p);
            if vp > (self.working_w as i64 - 4) * self.f_res as i64 {
                return Err(LocalFieldError::PrecisionExhausted(self.working_w));
            }
            if vp.rem_euclid(self.f_res as i64) != 0 {
                return Err(LocalFieldError::Unvalidated(format!(
                    "resultant valuation {vp} not divisible by f={}",
                    self.f_res
                )));
            }
            vp / self.f_res as i64
        };
        match cap {
            Some(m) if v >= m => Ok(Valuation::AtLeast(m)),
            _ => Ok(Valuation::Exact(v)),
        }
    }

    /// v_π(t) = e·v_p(t) for a nonzero rational integer t.
    pub fn integer_congruence_exponent(&self, t: &BigInt) -> Result<u64, LocalFieldError> {
        if t.is_zero() {
            return Err(LocalFieldError::ZeroValuation);
        }
        Ok(self.e as u64 * vp_bigint(t, self.p))
    }

    /// Canonical residue of x in 𝒪/πᵐ: fixed-basis slot coefficients, slot j
    /// reduced into [0, p^⌈(m−j)/e⌉). Equality mod πᵐ is equality of outputs.
    pub fn reduce_mod(&self, x: &LocalValue, m: u32) -> Result<Vec<BigInt>, LocalFieldError> {
        if let Some(k) = x.known_precision {
            if m > k {
                return Err(LocalFieldError::PrecisionTooLow(m, k));
            }
        }
        let pb = BigInt::from(self.p);
        let rep = x.representative.as_poly().rem(&self.local_factor);
        if self.e == 1 {
            // unramified: coefficient vector mod g, each slot mod p^m
            let md = pb.pow(m);
            let mut out = vec![BigInt::zero(); self.f_res];
            for (j, slot) in out.iter_mut().enumerate() {
                *slot = rational_mod(&rep.coeff(j), &md, self.p)?;
            }
            Ok(out)
        } else if self.f_res == 1 {
            // totally ramified: basis (θ - c)^j, slot j mod p^⌈(m-j)/e⌉
            let c = self.shift.clone().ok_or_else(|| {
                LocalFieldError::Unvalidated("ramified prime without Eisenstein shift".into())
            })?;
            let in_pi_basis = rep.shift(&BigRational::from(c));
            let mut out = vec![BigInt::zero(); self.e];
            for (j, slot) in out.iter_mut().enumerate() {
                if m as usize <= j {
                    continue;
                }
                let digits = (m as usize - j).div_ceil(self.e) as u32;
                *slot = rational_mod(&in_pi_basis.coeff(j), &pb.pow(digits), self.p)?;
            }
            Ok(out)
        } else {
            Err(LocalFieldError::Unvalidated(format!(
                "canonical residues with e={} f={} not supported",
                self.e, self.f_res
            )))
        }
    }
}

/// q mod m for a p-integral rational q (denominator prime to p).
fn rational_mod(q: &BigRational, m: &BigInt, p: u64) -> Result<BigInt, LocalFieldError> {
    if q.is_zero() {
        return Ok(BigInt::zero());
    }
    if vp_bigint(q.denom(), p) != 0 {
        return Err(LocalFieldError::Unvalidated("non-integral element in reduction".into()));
    }
    let dinv = mod_inv_big(q.denom(), m);
    Ok(mod_floor(&(q.numer() * dinv), m))
}

/// Inverse mod m (m a prime power, x a unit).
fn mod_inv_big(x: &BigInt, m: &BigInt) -> BigInt {
    let mut r = (m.clone(), mod_floor(x, m));
    let mut t = (BigInt::zero(), BigInt::one());
    while !r.1.is_zero() {
        let q = &r.0 / &r.1;
        r = (r.1.clone(), &r.0 - &q * &r.1);
        t = (t.1.clone(), &t.0 - &q * &t.1);
    }
    assert!(r.0.is_one(), "non-unit in mod_inv_big");
    mod_floor(&t.0, m)
}

fn mod_floor(x: &BigInt, m: &BigInt) -> BigInt {
    let r = x % m;
    if r.sign() == num_bigint::Sign::Minus {
        r + m
    } else {
        r
    }
}

trait ModFloorRef {
    fn mod_floor_ref(&self, m: &BigInt) -> BigInt;
}
impl ModFloorRef for BigInt {
    fn mod_floor_ref(&self, m: &BigInt) -> BigInt {
        mod_floor(self, m)
    }
}

/// Reduce every coefficient of an integer polynomial into [0, m).
fn reduce_zpoly(a: &QPoly, m: &BigInt) -> QPoly {
    QPoly::new(
        a.coeffs()
            .iter()
            .map(|c| {
                debug_assert!(c.denom().is_one());
                BigRational::from(mod_floor(c.numer(), m))
            })
            .collect(),
    )
}

fn gcd_u(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u(b, a % b)
    }
}

/// Polynomial over 𝔽_p, little-endian coefficients, no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
struct FpPoly {
    coeffs: Vec<u64>,
}

impl FpPoly {
    fn from_qpoly(a: &QPoly, p: u64) -> Self {
        let pb = BigInt::from(p);
        let mut coeffs: Vec<u64> = a
            .coeffs()
            .iter()
            .map(|c| {
                debug_assert!(c.denom().is_one());
                u64::try_from(mod_floor(c.numer(), &pb)).unwrap()
            })
            .collect();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FpPoly { coeffs }
    }

    fn to_qpoly(&self) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|&c| BigRational::from(BigInt::from(c))).collect())
    }

    fn deg(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add(&self, other: &Self, p: u64) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut c = vec![0u64; n];
        for (i, slot) in c.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            *slot = (a + b) % p;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { coeffs: c }
    }

    fn mul(&self, other: &Self, p: u64) -> Self {
        if self.is_zero() || other.is_zero() {
            return FpPoly { coeffs: vec![] };
        }
        let mut c = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] = (c[i + j] + a * b) % p;
            }
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { coeffs: c }
    }

    fn div_rem(&self, d: &Self, p: u64) -> (Self, Self) {
        assert!(!d.is_zero());
        let dl = *d.coeffs.last().unwrap();
        let dinv = crate::arith::modp::mod_inv(dl, p);
        let mut r = self.coeffs.clone();
        let mut q = vec![0u64; self.coeffs.len().saturating_sub(d.coeffs.len()) + 1];
        while r.len() >= d.coeffs.len() && !r.is_empty() {
            let c = *r.last().unwrap() * dinv % p;
            let k = r.len() - d.coeffs.len();
            if c != 0 {
                q[k] = c;
                for (i, &dc) in d.coeffs.iter().enumerate() {
                    r[k + i] = (r[k + i] + p - c * dc % p) % p;
                }
            }
            r.pop();
            while r.last() == Some(&0) {
                r.pop();
            }
            if r.len() < d.coeffs.len() {
                break;
            }
        }
        while q.last() == Some(&0) {
            q.pop();
        }
        (FpPoly { coeffs: q }, FpPoly { coeffs: r })
    }

    fn div_exact(&self, d: &Self, p: u64) -> Self {
        let (q, r) = self.div_rem(d, p);
        assert!(r.is_zero(), "inexact mod-p division");
        q
    }

    fn pow(&self, n: usize, p: u64) -> Self {
        let mut acc = FpPoly { coeffs: vec![1] };
        for _ in 0..n {
            acc = acc.mul(self, p);
        }
        acc
    }

    /// (s, t) with s·a + t·b = 1 mod p; None when gcd ≠ 1.
    fn bezout(a: &Self, b: &Self, p: u64) -> Option<(Self, Self)> {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (FpPoly { coeffs: vec![1] }, FpPoly { coeffs: vec![] });
        let (mut t0, mut t1) = (FpPoly { coeffs: vec![] }, FpPoly { coeffs: vec![1] });
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1, p);
            let qneg = q.mul(&FpPoly { coeffs: vec![p - 1] }, p);
            let s = s0.add(&qneg.mul(&s1, p), p);
            let t = t0.add(&qneg.mul(&t1, p), p);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        if r0.deg() != 0 || r0.is_zero() {
            return None;
        }
        let inv = crate::arith::modp::mod_inv(r0.coeffs[0], p);
        let unit = FpPoly { coeffs: vec![inv] };
        Some((s0.mul(&unit, p), t0.mul(&unit, p)))
    }

    /// Factor a monic polynomial into (irreducible, multiplicity) by trial
    /// division in increasing degree; intended for deg ≤ 4 and small p.
    fn factor(&self, p: u64) -> Vec<(FpPoly, usize)> {
        let mut rest = self.clone();
        let mut out: Vec<(FpPoly, usize)> = Vec::new();
        let mut d = 1;
        while rest.deg() >= 1 && 2 * d <= rest.deg() {
            let mut advanced = false;
            for f in monic_polys(d, p) {
                let mut mult = 0;
                loop {
                    let (q, r) = rest.div_rem(&f, p);
                    if r.is_zero() && q.deg() + d == rest.deg() {
                        rest = q;
                        mult += 1;
                    } else {
                        break;
                    }
                }
                if mult > 0 {
                    out.push((f, mult));
                    advanced = true;
                }
                if rest.deg() < 2 * d {
                    break;
                }
            }
            let _ = advanced;
            d += 1;
        }
        if rest.deg() >= 1 {
            out.push((rest, 1));
        }
        out
    }
}

/// All monic degree-d polynomials over 𝔽_p in lexicographic coefficient order.
fn monic_polys(d: usize, p: u64) -> Vec<FpPoly> {
    let mut out = Vec::new();
    let total = p.pow(d as u32);
    for mut idx in 0..total {
        let mut coeffs = Vec::with_capacity(d + 1);
        for _ in 0..d {
            coeffs.push(idx % p);
            idx /= p;
        }
        coeffs.push(1);
        out.push(FpPoly { coeffs });
    }
    out
}
