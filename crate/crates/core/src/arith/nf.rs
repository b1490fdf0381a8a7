//! Number-field arithmetic: ℚ[x]/(h(x)) for a fixed monic defining polynomial.

use super::poly::QPoly;
use super::FieldElement;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;
use std::sync::Arc;

/// A number field ℚ[x]/(h(x)), h monic and irreducible over ℚ.
///
/// Irreducibility is the caller's responsibility; a reducible h surfaces as a
/// zero-divisor panic during inversion.
#[derive(Debug, PartialEq, Eq)]
pub struct NumberField {
    defining: QPoly,
    tag: String,
}

impl NumberField {
    pub fn new(defining: QPoly, tag: impl Into<String>) -> Arc<Self> {
        assert!(defining.is_monic(), "defining polynomial must be monic");
        assert!(defining.deg() >= 1);
        Arc::new(NumberField { defining, tag: tag.into() })
    }

    /// The rational field presented as ℚ[x]/(x); elements are constants.
    pub fn rationals() -> Arc<Self> {
        NumberField::new(QPoly::x(), "Q")
    }

    pub fn degree(&self) -> usize {
        self.defining.deg()
    }

    pub fn defining(&self) -> &QPoly {
        &self.defining
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn zero(self: &Arc<Self>) -> NumberFieldElement {
        NumberFieldElement { coeffs: vec![BigRational::zero(); self.degree()], field: self.clone() }
    }

    pub fn one(self: &Arc<Self>) -> NumberFieldElement {
        self.from_rational(BigRational::one())
    }

    pub fn from_rational(self: &Arc<Self>, c: BigRational) -> NumberFieldElement {
        let mut coeffs = vec![BigRational::zero(); self.degree()];
        coeffs[0] = c;
        NumberFieldElement { coeffs, field: self.clone() }
    }

    pub fn from_int(self: &Arc<Self>, c: i64) -> NumberFieldElement {
        self.from_rational(BigRational::from(BigInt::from(c)))
    }

    /// The class of x (a root of the defining polynomial).
    pub fn generator(self: &Arc<Self>) -> NumberFieldElement {
        self.from_poly(QPoly::x())
    }

    /// Element from a polynomial representative, reduced mod h.
    pub fn from_poly(self: &Arc<Self>, p: QPoly) -> NumberFieldElement {
        let r = p.rem(&self.defining);
        let mut coeffs = vec![BigRational::zero(); self.degree()];
        for (i, c) in r.coeffs().iter().enumerate() {
            coeffs[i] = c.clone();
        }
        NumberFieldElement { coeffs, field: self.clone() }
    }
}

/// Element of a number field, represented by its coefficient vector of length
/// deg(h) (canonical reduced form).
#[derive(Clone)]
pub struct NumberFieldElement {
    coeffs: Vec<BigRational>,
    field: Arc<NumberField>,
}

impl NumberFieldElement {
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn as_poly(&self) -> QPoly {
        QPoly::new(self.coeffs.clone())
    }

    /// The rational value, when the element is a constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs[1..].iter().all(|c| num_traits::Zero::is_zero(c)) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        NumberFieldElement {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            field: self.field.clone(),
        }
    }
}

impl fmt::Debug for NumberFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NFE[{}]{:?}", self.field.tag(), self.coeffs)
    }
}

impl PartialEq for NumberFieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl FieldElement for NumberFieldElement {
    fn zero_like(&self) -> Self {
        self.field.zero()
    }

    fn one_like(&self) -> Self {
        self.field.one()
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| num_traits::Zero::is_zero(c))
    }

    fn add(&self, other: &Self) -> Self {
        NumberFieldElement {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
            field: self.field.clone(),
        }
    }

    fn sub(&self, other: &Self) -> Self {
        NumberFieldElement {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
            field: self.field.clone(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let prod = self.as_poly().mul(&other.as_poly());
        self.field.from_poly(prod)
    }

    fn neg(&self) -> Self {
        NumberFieldElement {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
            field: self.field.clone(),
        }
    }

    fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero");
        // extended Euclid: a*u + h*v = gcd = constant
        let h = self.field.defining().clone();
        let (g, u) = half_ext_gcd(self.as_poly(), h);
        let gd = g.degree().expect("gcd zero");
        assert_eq!(gd, 0, "defining polynomial not irreducible (zero divisor found)");
        let c = g.coeff(0).recip();
        self.field.from_poly(u.scale(&c))
    }

    fn complexity(&self) -> u64 {
        self.coeffs.iter().map(|c| c.complexity()).sum()
    }
}

/// Returns (gcd, u) with u*a ≡ gcd (mod b).
fn half_ext_gcd(a: QPoly, b: QPoly) -> (QPoly, QPoly) {
    let (mut r0, mut r1) = (a, b);
    let (mut u0, mut u1) = (QPoly::one(), QPoly::zero());
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        let u = u0.sub(&q.mul(&u1));
        r0 = r1;
        r1 = r;
        u0 = u1;
        u1 = u;
    }
    (r0, u0)
}
