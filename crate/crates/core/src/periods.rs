//! Minimal integral normalization of eigensymbols.
//!
//! An eigensymbol computed over the Hecke field is only canonical up to a
//! period scalar. The minimal normalization rescales it by a power of the
//! uniformizer so that every generator value is π-integral and at least one
//! has valuation exactly 0. Since every path value is a ℤ-combination of
//! generator values and every generator value is itself a path value,
//! scanning the finite generator set decides minimality globally.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::arith::nf::NumberFieldElement;
use crate::arith::FieldElement;
use crate::localfield::{LocalFieldError, LocalPrimeData, LocalValue, Valuation};
use crate::msym::paths::{evaluate_lambda, NfTable};
use crate::msym::ManinSpace;

/// An eigensymbol rescaled to its minimal integral normalization at one
/// prime π | p of the Hecke field.
pub struct MinimalEigensymbol {
    pub space: Arc<ManinSpace>,
    pub sign: i64,
    pub prime: LocalPrimeData,
    /// Exponent m with π^m · φ minimal: min v_π over generators becomes 0.
    pub shift_m: i64,
    /// Normalized values on all generator columns; min valuation exactly 0.
    pub values: NfTable,
}

/// Rescale so the minimum valuation over all generator columns is 0.
///
/// Only unramified primes (e = 1) are supported: there p itself is a
/// uniformizer and the rescaling by π^t = p^t stays inside the global field.
pub fn minimal_normalization(
    space: Arc<ManinSpace>,
    values: Vec<NumberFieldElement>,
    sign: i64,
    prime: &LocalPrimeData,
) -> Result<MinimalEigensymbol, LocalFieldError> {
    if prime.e != 1 {
        return Err(LocalFieldError::Unvalidated(
            "minimal normalization requires an unramified prime (e = 1)".into(),
        ));
    }
    let mut min_v: Option<i64> = None;
    for x in &values {
        if FieldElement::is_zero(x) {
            continue;
        }
        match prime.valuation(&LocalValue::exact(x.clone()))? {
            Valuation::Exact(v) => min_v = Some(min_v.map_or(v, |m| m.min(v))),
            Valuation::AtLeast(_) | Valuation::Infinity => unreachable!("exact nonzero value"),
        }
    }
    let min_v = min_v.ok_or(LocalFieldError::ZeroValuation)?;
    let shift_m = -min_v;
    let scale = power_of_p(prime.p, shift_m);
    let normalized: Vec<NumberFieldElement> = values.iter().map(|x| x.scale(&scale)).collect();
    Ok(MinimalEigensymbol { space, sign, prime: prime.clone(), shift_m, values: NfTable(normalized) })
}

fn power_of_p(p: u64, t: i64) -> BigRational {
    let pw = BigInt::from(p).pow(t.unsigned_abs() as u32);
    if t >= 0 {
        BigRational::from(pw)
    } else {
        BigRational::new(BigInt::one(), pw)
    }
}

impl MinimalEigensymbol {
    /// λ^{±,min}(z^{j+1}; a, n): guaranteed π-integral by minimality.
    pub fn normalized_lambda(&self, j: u32, a: i128, n: i128) -> LocalValue {
        let v = evaluate_lambda(self.space.as_ref(), &self.values, j, a, n);
        LocalValue::exact(v)
    }

    /// Exact v_π of a normalized generator value or path value.
    pub fn valuation_of(&self, x: &LocalValue) -> Result<Valuation, LocalFieldError> {
        self.prime.valuation(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localfield::{split_prime, PrimeSelector, DEFAULT_PRECISION};
    use crate::msym::eigen::Eigensymbol;
    use crate::msym::paths::RatTable;
    use crate::msym::ManinSpace;
    use crate::arith::nf::NumberField;
use crate::arith::poly::QPoly;

    fn rat(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    fn qp(p: u64) -> LocalPrimeData {
        split_prime(p, &QPoly::from_ints(&[0, 1]), &PrimeSelector::Unique, DEFAULT_PRECISION)
            .unwrap()
    }

    fn nf_values(table: &RatTable) -> Vec<NumberFieldElement> {
        let q = NumberField::rationals();
        table.0.iter().map(|c| q.from_rational(c.clone())).collect()
    }

    fn min_11a(p: u64, sign: i64) -> MinimalEigensymbol {
        let space = Arc::new(ManinSpace::build(11, 2).unwrap());
        let phi = Eigensymbol::cut_rational(&space, &[(2, rat(-2))], sign).unwrap();
        let vals = nf_values(&phi.values);
        minimal_normalization(space, vals, sign, &qp(p)).unwrap()
    }

    #[test]
    fn shift_matches_brute_force_valuation_scan() {
        // independent oracle: scan v_5 of every nonzero generator value
        // directly with rational valuations, bypassing LocalPrimeData
        let space = Arc::new(ManinSpace::build(11, 2).unwrap());
        let phi = Eigensymbol::cut_rational(&space, &[(2, rat(-2))], 1).unwrap();
        let oracle = phi
            .values
            .0
            .iter()
            .filter(|v| !num_traits::Zero::is_zero(*v))
            .map(|v| crate::localfield::vp_rational(v, 5))
            .min()
            .unwrap();
        let min = min_11a(5, 1);
        assert_eq!(min.shift_m, -oracle);
        // defining property: min valuation over generators is exactly 0
        let mut min_v = i64::MAX;
        for x in &min.values.0 {
            if FieldElement::is_zero(x) {
                continue;
            }
            match min.prime.valuation(&LocalValue::exact(x.clone())).unwrap() {
                Valuation::Exact(v) => min_v = min_v.min(v),
                _ => panic!("exact value must have exact valuation"),
            }
        }
        assert_eq!(min_v, 0);
    }

    #[test]
    fn already_minimal_input_gets_shift_zero() {
        let min = min_11a(5, 1);
        let space = min.space.clone();
        let vals = min.values.0.clone();
        let again = minimal_normalization(space, vals, 1, &qp(5)).unwrap();
        assert_eq!(again.shift_m, 0);
        assert_eq!(again.values.0, min.values.0);
    }

    #[test]
    fn pi_rescaling_covariance_and_unit_independence() {
        let base = min_11a(5, 1);
        let space = base.space.clone();
        // scale by p: shift decreases by exactly 1, normalized values equal
        let scaled: Vec<NumberFieldElement> =
            base.values.0.iter().map(|x| x.scale(&rat(5))).collect();
        let re = minimal_normalization(space.clone(), scaled, 1, &qp(5)).unwrap();
        assert_eq!(re.shift_m, -1);
        assert_eq!(re.values.0, base.values.0);
        // scale by a unit at 5: shift and values-up-to-unit unchanged
        let scaled: Vec<NumberFieldElement> =
            base.values.0.iter().map(|x| x.scale(&BigRational::new(7.into(), 3.into()))).collect();
        let re = minimal_normalization(space, scaled, 1, &qp(5)).unwrap();
        assert_eq!(re.shift_m, 0);
        for (a, b) in re.values.0.iter().zip(&base.values.0) {
            assert_eq!(a.as_poly(), b.scale(&BigRational::new(7.into(), 3.into())).as_poly());
        }
    }

    #[test]
    fn normalized_lambda_is_integral_with_a_zero_valuation_witness() {
        let min = min_11a(5, 1);
        let mut saw_unit = false;
        for n in 1..=20i128 {
            for a in 1..=n {
                if num_integer::Integer::gcd(&a, &n) != 1 {
                    continue;
                }
                let v = min.normalized_lambda(0, a, n);
                if FieldElement::is_zero(&v.representative) {
                    continue;
                }
                match min.valuation_of(&v).unwrap() {
                    Valuation::Exact(t) => {
                        assert!(t >= 0, "lambda({a},{n}) has negative valuation {t}");
                        if t == 0 {
                            saw_unit = true;
                        }
                    }
                    _ => panic!("exact value"),
                }
            }
        }
        assert!(saw_unit, "minimality witness among small lambda values");
    }

    #[test]
    fn zero_symbol_is_rejected() {
        let space = Arc::new(ManinSpace::build(11, 2).unwrap());
        let q = NumberField::rationals();
        let vals = vec![q.zero(); space.ncols];
        assert!(matches!(
            minimal_normalization(space, vals, 1, &qp(5)),
            Err(LocalFieldError::ZeroValuation)
        ));
    }
}
