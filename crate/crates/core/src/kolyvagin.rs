//! Kolyvagin-prime machinery: admissible primes, the ideal I_n, primitive
//! roots and discrete-log tables.
//!
//! A prime ℓ ∤ Np is admissible at level m when π^m divides both ℓ - 1 and
//! 1 - a_ℓ + ℓ^(k-1). Kolyvagin moduli are squarefree products of admissible
//! primes; I_n is generated by the per-prime quantities above, so its π-adic
//! exponent is the minimum of the per-prime minima.

use num_bigint::BigInt;
use thiserror::Error;

use crate::localfield::{LocalFieldError, LocalPrimeData};

#[derive(Debug, Error)]
pub enum KolyvaginError {
    #[error("a_{0} unavailable from descriptor or point counting")]
    ApUnavailable(i64),
    #[error("local field error: {0}")]
    Local(#[from] LocalFieldError),
}

/// Why a candidate prime was rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rejection {
    DividesLevel,
    EqualsP,
    EllMinusOneValuationTooSmall { v1: u64, need: u64 },
    EulerFactorValuationTooSmall { v2: u64, need: u64 },
}

/// An admissible prime with its valuation data and discrete-log table.
#[derive(Clone, Debug)]
pub struct AdmissiblePrime {
    pub ell: i64,
    /// v_π(ℓ - 1)
    pub v1: u64,
    /// v_π(1 - a_ℓ + ℓ^(k-1))
    pub v2: u64,
    pub eta: i64,
    /// log_table[a - 1] = log_η(a) for a in 1..ℓ
    log_table: Vec<u32>,
}

impl AdmissiblePrime {
    /// log_η(a) ∈ ℤ/(ℓ-1) for gcd(a, ℓ) = 1.
    pub fn dlog(&self, a: i64) -> u32 {
        let r = a.rem_euclid(self.ell);
        assert!(r != 0, "dlog of a multiple of ell");
        self.log_table[(r - 1) as usize]
    }
}

/// Smallest positive primitive root mod ℓ, verified by checking
/// η^((ℓ-1)/q) ≠ 1 for every prime q | ℓ - 1.
pub fn choose_primitive_root(ell: i64) -> i64 {
    assert!(ell >= 3);
    let qs = prime_factors((ell - 1) as u64);
    'cand: for eta in 2..ell {
        for &q in &qs {
            if pow_mod(eta, (ell - 1) as u64 / q, ell) == 1 {
                continue 'cand;
            }
        }
        return eta;
    }
    unreachable!("every prime has a primitive root");
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn pow_mod(mut b: i64, mut e: u64, m: i64) -> i64 {
    let mut acc: i128 = 1;
    let mm = m as i128;
    let mut bb = (b.rem_euclid(m)) as i128;
    b = 0;
    let _ = b;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
    }
    acc as i64
}

fn build_log_table(ell: i64, eta: i64) -> Vec<u32> {
    let mut table = vec![u32::MAX; (ell - 1) as usize];
    let mut x: i64 = 1;
    for k in 0..(ell - 1) as u32 {
        table[(x - 1) as usize] = k;
        x = x * eta % ell;
    }
    debug_assert!(table.iter().all(|&v| v != u32::MAX));
    table
}

/// Admissibility test at level m. `a_ell` must come from the form's
/// descriptor or from point counting; there is no fallback.
pub fn is_admissible(
    ell: i64,
    m: u64,
    level: i64,
    weight: u32,
    a_ell: i64,
    prime: &LocalPrimeData,
) -> Result<Result<AdmissiblePrime, Rejection>, KolyvaginError> {
    if level % ell == 0 {
        return Ok(Err(Rejection::DividesLevel));
    }
    if ell == prime.p as i64 {
        return Ok(Err(Rejection::EqualsP));
    }
    let v1 = prime.integer_congruence_exponent(&BigInt::from(ell - 1))?;
    if v1 < m {
        return Ok(Err(Rejection::EllMinusOneValuationTooSmall { v1, need: m }));
    }
    let euler = BigInt::from(1) - BigInt::from(a_ell) + BigInt::from(ell).pow(weight - 1);
    let v2 = if num_traits::Zero::is_zero(&euler) {
        u64::MAX
    } else {
        prime.integer_congruence_exponent(&euler)?
    };
    if v2 < m {
        return Ok(Err(Rejection::EulerFactorValuationTooSmall { v2, need: m }));
    }
    let eta = choose_primitive_root(ell);
    Ok(Ok(AdmissiblePrime { ell, v1, v2, eta, log_table: build_log_table(ell, eta) }))
}

/// Replace the primitive root of an admissible prime (for the independence
/// suite). The replacement must itself be a primitive root.
pub fn with_primitive_root(base: &AdmissiblePrime, eta: i64) -> AdmissiblePrime {
    let ell = base.ell;
    for &q in &prime_factors((ell - 1) as u64) {
        assert!(pow_mod(eta, (ell - 1) as u64 / q, ell) != 1, "{eta} is not a primitive root mod {ell}");
    }
    AdmissiblePrime { ell, v1: base.v1, v2: base.v2, eta, log_table: build_log_table(ell, eta) }
}

/// A squarefree Kolyvagin modulus n with its factor list and I_n exponent.
#[derive(Clone, Debug)]
pub struct KolyvaginModulus {
    pub factors: Vec<AdmissiblePrime>,
}

impl KolyvaginModulus {
    pub fn one() -> Self {
        KolyvaginModulus { factors: Vec::new() }
    }

    pub fn n(&self) -> i128 {
        self.factors.iter().map(|f| f.ell as i128).product()
    }

    pub fn nu(&self) -> usize {
        self.factors.len()
    }

    /// m_n with I_n·𝒪 = π^(m_n)·𝒪; None encodes ∞ (n = 1, I_1 = 0).
    pub fn in_exp(&self) -> Option<u64> {
        self.factors.iter().map(|f| f.v1.min(f.v2)).min()
    }
}

/// All squarefree products of exactly `nu` admissible primes below `bound`,
/// factor lists lexicographic. Accepts an a_ℓ source as a closure so curve
/// point counting and newform descriptors plug in the same way.
pub fn enumerate_moduli(
    level: i64,
    weight: u32,
    prime: &LocalPrimeData,
    m: u64,
    nu: usize,
    bound: i64,
    a_ell: &mut dyn FnMut(i64) -> Result<i64, KolyvaginError>,
) -> Result<Vec<KolyvaginModulus>, KolyvaginError> {
    if nu == 0 {
        return Ok(vec![KolyvaginModulus::one()]);
    }
    let mut primes = Vec::new();
    for ell in 2..bound {
        if !is_prime_i64(ell) || level % ell == 0 || ell == prime.p as i64 {
            continue;
        }
        // cheap precheck before paying for a_ell
        if prime.integer_congruence_exponent(&BigInt::from(ell - 1))? < m {
            continue;
        }
        let a = a_ell(ell)?;
        if let Ok(ap) = is_admissible(ell, m, level, weight, a, prime)? {
            primes.push(ap);
        }
    }
    let mut out = Vec::new();
    let mut stack: Vec<AdmissiblePrime> = Vec::new();
    combos(&primes, nu, 0, &mut stack, &mut out);
    Ok(out)
}

fn combos(
    primes: &[AdmissiblePrime],
    nu: usize,
    start: usize,
    stack: &mut Vec<AdmissiblePrime>,
    out: &mut Vec<KolyvaginModulus>,
) {
    if stack.len() == nu {
        out.push(KolyvaginModulus { factors: stack.clone() });
        return;
    }
    for i in start..primes.len() {
        stack.push(primes[i].clone());
        combos(primes, nu, i + 1, stack, out);
        stack.pop();
    }
}

pub fn is_prime_i64(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2i64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::CurveDescriptor;
    use crate::localfield::{split_prime, PrimeSelector, DEFAULT_PRECISION};
    use crate::arith::poly::QPoly;

    fn qp(p: u64) -> LocalPrimeData {
        split_prime(p, &QPoly::from_ints(&[0, 1]), &PrimeSelector::Unique, DEFAULT_PRECISION)
            .unwrap()
    }

    fn e389() -> CurveDescriptor {
        CurveDescriptor {
            label: "389.a1".into(),
            ainvs: [0, 1, 1, -2, 0],
            conductor: 389,
            ap: Default::default(),
        }
    }

    fn e43() -> CurveDescriptor {
        CurveDescriptor { label: "43.a1".into(), ainvs: [0, 1, 1, 0, 0], conductor: 43, ap: Default::default() }
    }

    #[test]
    fn primitive_roots_smallest_and_verified() {
        assert_eq!(choose_primitive_root(3), 2);
        assert_eq!(choose_primitive_root(7), 3);
        // brute-force oracle: smallest g whose powers enumerate all of (Z/l)^x
        for ell in [5i64, 11, 13, 79, 109, 241] {
            let g = choose_primitive_root(ell);
            let mut seen = vec![false; ell as usize];
            let mut x = 1i64;
            for _ in 0..(ell - 1) {
                seen[x as usize] = true;
                x = x * g % ell;
            }
            assert!((1..ell).all(|a| seen[a as usize]), "{g} not primitive mod {ell}");
            for h in 2..g {
                let mut ord = 1u64;
                let mut y = h % ell;
                while y != 1 {
                    y = y * h % ell;
                    ord += 1;
                }
                assert!(ord < (ell - 1) as u64, "{h} < {g} already primitive mod {ell}");
            }
        }
    }

    #[test]
    fn dlog_basics_and_homomorphism() {
        let p3 = qp(3);
        let e = e389();
        let ap = is_admissible(79, 1, 389, 2, e.ap_count(79).unwrap(), &p3).unwrap().unwrap();
        assert_eq!(ap.dlog(1), 0);
        assert_eq!(ap.dlog(ap.eta), 1);
        for a in 1..79i64 {
            for b in 1..79i64 {
                let lhs = ap.dlog(a * b % 79) as u64;
                let rhs = (ap.dlog(a) as u64 + ap.dlog(b) as u64) % 78;
                assert_eq!(lhs, rhs);
            }
        }
        // spec'd small case: eta_7 = 3 and 3^2 = 9 = 2 mod 7
        let a7 = AdmissiblePrime { ell: 7, v1: 1, v2: 1, eta: 3, log_table: build_log_table(7, 3) };
        assert_eq!(a7.dlog(2), 2);
    }

    #[test]
    fn paper_admissible_pairs_at_389() {
        let p3 = qp(3);
        let e = e389();
        for ell in [79i64, 109] {
            let r = is_admissible(ell, 1, 389, 2, e.ap_count(ell).unwrap(), &p3).unwrap();
            assert!(r.is_ok(), "{ell} must be admissible for 389.a1 at p=3");
        }
        // 2 is never admissible at p = 3
        let r = is_admissible(2, 1, 389, 2, e.ap_count(2).unwrap(), &p3).unwrap();
        assert!(matches!(r, Err(Rejection::EllMinusOneValuationTooSmall { .. })));
    }

    #[test]
    fn enumeration_matches_independent_sieve() {
        // independent filter: trial-division sieve plus direct congruences
        let p3 = qp(3);
        let e = e43();
        let mut src = |ell: i64| e.ap_count(ell).map_err(|_| KolyvaginError::ApUnavailable(ell));
        let got = enumerate_moduli(43, 2, &p3, 1, 1, 100, &mut src).unwrap();
        let got_primes: Vec<i64> = got.iter().map(|m| m.n() as i64).collect();
        let mut want = Vec::new();
        for ell in 2..100i64 {
            if !is_prime_i64(ell) || ell == 3 || ell == 43 {
                continue;
            }
            let a = e.ap_count(ell).unwrap();
            if (ell - 1) % 3 == 0 && (1 - a + ell) % 3 == 0 {
                want.push(ell);
            }
        }
        assert!(!want.is_empty());
        assert_eq!(got_primes, want);
        // nu = 0: exactly n = 1 with I_1 = 0 (exponent infinity)
        let one = enumerate_moduli(43, 2, &p3, 1, 0, 100, &mut src).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].n(), 1);
        assert_eq!(one[0].in_exp(), None);
    }

    #[test]
    fn modulus_invariants_and_monotonicity() {
        let p3 = qp(3);
        let e = e389();
        let mut src = |ell: i64| e.ap_count(ell).map_err(|_| KolyvaginError::ApUnavailable(ell));
        let nu2 = enumerate_moduli(389, 2, &p3, 1, 2, 110, &mut src).unwrap();
        assert!(nu2.iter().any(|m| m.n() == 79 * 109), "79*109 present");
        for m in &nu2 {
            assert_eq!(m.nu(), 2);
            let expect = m.factors.iter().map(|f| f.v1.min(f.v2)).min();
            assert_eq!(m.in_exp(), expect);
            assert!(m.in_exp().unwrap() >= 1);
            // admissible at m implies admissible at smaller m
            for f in &m.factors {
                let r = is_admissible(f.ell, 1, 389, 2, e.ap_count(f.ell).unwrap(), &p3).unwrap();
                assert!(r.is_ok());
            }
        }
    }
}
