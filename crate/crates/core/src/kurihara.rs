//! Kurihara numbers, quadratic twists of symbol values, and stratified scans.
//!
//! δ̃ₙ = Σ_{a ∈ (ℤ/n)^×} λ^{±,min}(z^{r−1}; a, n) · Π_{ℓ|n} log_{η_ℓ}(a),
//! well-defined modulo I_n. Each δ̃ₙ only ever matters modulo π^{m_n} with
//! m_n = v_π(I_n), so the scan works with residues of the normalized symbol
//! at a fixed working precision; the exact n = 1 value is handled separately
//! for ∂⁽⁰⁾.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;

use crate::kolyvagin::KolyvaginModulus;
use crate::localfield::{LocalFieldError, Valuation};
use crate::msym::paths::{act_poly, ev_path, ResTable, ValueTable};
use crate::msym::space::linear_power_coeffs;
use crate::msym::{ManinSpace, P1};
use crate::periods::MinimalEigensymbol;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KuriharaError {
    #[error("sign mismatch: symbol sign {0} but r = {1} needs sign {2}")]
    SignMismatch(i64, u32, i64),
    #[error("residue precision {0} exhausted (needed {1}); rebuild with higher k")]
    PrecisionExhausted(u32, u32),
    #[error("residue prime must have a one-dimensional residue ring (e = f = 1)")]
    ResidueShape,
    #[error("twist conductor {0} must be coprime to the modulus {1}")]
    TwistGcd(i64, i128),
    #[error("local field error: {0}")]
    Local(#[from] LocalFieldError),
}

/// Source of residues λ^{±,min}(z^(r-1); a, n) mod p^m, for primes with
/// trivial residue extension (e = f = 1, so 𝒪/π^m = ℤ/p^m).
pub trait LambdaMod: Sync {
    fn p(&self) -> u64;
    /// Largest m the source can serve.
    fn precision(&self) -> u32;
    fn lambda_mod(&self, j: u32, a: i128, n: i128, m: u32) -> u64;
}

/// Residue table of a minimally normalized eigensymbol mod π^k.
pub struct ResidueEvaluator {
    pub space: Arc<ManinSpace>,
    pub k: u32,
    table: ResTable,
}

impl ResidueEvaluator {
    pub fn from_minimal(min: &MinimalEigensymbol, k: u32) -> Result<Self, KuriharaError> {
        if min.prime.e != 1 || min.prime.f_res != 1 {
            return Err(KuriharaError::ResidueShape);
        }
        let p = min.prime.p;
        let pk = BigInt::from(p).pow(k);
        let mut vals = Vec::with_capacity(min.values.0.len());
        for x in &min.values.0 {
            let slots = min.prime.reduce_mod(&crate::localfield::LocalValue::exact(x.clone()), k)?;
            debug_assert_eq!(slots.len(), 1);
            let r = slots[0].mod_floor_ref(&pk);
            vals.push(r.to_u64().expect("residue fits in u64"));
        }
        Ok(ResidueEvaluator {
            space: min.space.clone(),
            k,
            table: ResTable { vals, p, m: k, pm: p.pow(k) },
        })
    }

    pub fn from_parts(space: Arc<ManinSpace>, p: u64, k: u32, vals: Vec<u64>) -> Self {
        ResidueEvaluator { space, k, table: ResTable { vals, p, m: k, pm: p.pow(k) } }
    }
}

trait ModFloorRef {
    fn mod_floor_ref(&self, m: &BigInt) -> BigInt;
}

impl ModFloorRef for BigInt {
    fn mod_floor_ref(&self, m: &BigInt) -> BigInt {
        let r = self % m;
        if r.is_negative() {
            r + m
        } else {
            r
        }
    }
}

impl LambdaMod for ResidueEvaluator {
    fn p(&self) -> u64 {
        self.table.p
    }

    fn precision(&self) -> u32 {
        self.k
    }

    fn lambda_mod(&self, j: u32, a: i128, n: i128, m: u32) -> u64 {
        assert!(m <= self.k);
        let v = crate::msym::paths::evaluate_lambda(self.space.as_ref(), &self.table, j, a, n);
        v % self.table.p.pow(m)
    }
}

/// A quadratic Dirichlet character of prime conductor d (or trivial, d = 1),
/// given by the Legendre symbol.
#[derive(Clone, Debug)]
pub struct QuadraticTwist {
    pub d: i64,
}

impl QuadraticTwist {
    pub fn new(d: i64) -> Self {
        assert!(d == 1 || crate::kolyvagin::is_prime_i64(d), "prime or trivial conductor only");
        QuadraticTwist { d }
    }

    /// χ(u) ∈ {-1, 0, +1}.
    pub fn chi(&self, u: i128) -> i64 {
        if self.d == 1 {
            return 1;
        }
        let r = (u.rem_euclid(self.d as i128)) as i64;
        if r == 0 {
            return 0;
        }
        // Euler criterion
        let mut acc: i128 = 1;
        let mut b = r as i128;
        let mut e = (self.d - 1) / 2;
        let md = self.d as i128;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % md;
            }
            b = b * b % md;
            e >>= 1;
        }
        if acc == 1 {
            1
        } else {
            -1
        }
    }

    pub fn chi_minus_one(&self) -> i64 {
        self.chi(-1)
    }
}

/// Evaluate the χ-twist of the symbol on an arbitrary path:
/// Σ_u χ(u) · Φ({M_u α → M_u β}, Q|adj(M_u)) with M_u = [[D, u], [0, D]].
/// This is the twisted eigensymbol of level N·D² up to one global scalar.
pub fn twisted_ev<T: ValueTable>(
    space0: &ManinSpace,
    table: &T,
    tw: &QuadraticTwist,
    from: (i128, i128),
    to: (i128, i128),
    poly: &[i128],
) -> T::Elem {
    let d = tw.d as i128;
    let mut acc = table.zero();
    for u in 0..d {
        let c = tw.chi(u);
        if c == 0 {
            continue;
        }
        let adj = [d, -u, 0, d];
        let q = act_poly(adj, poly, space0.m);
        let f = (d * from.0 + u * from.1, d * from.1);
        let t = (d * to.0 + u * to.1, d * to.1);
        let v = ev_path(space0, table, f, t, &q);
        acc = table.add(&acc, &table.mul_i128(&v, c as i128));
    }
    acc
}

/// λ of the twisted form on {∞ → a/n}, up to the same single global scalar.
pub fn twist_lambda<T: ValueTable>(
    space0: &ManinSpace,
    table: &T,
    tw: &QuadraticTwist,
    j: u32,
    a: i128,
    n: i128,
) -> Result<T::Elem, KuriharaError> {
    if num_integer::Integer::gcd(&(tw.d as i128), &n) != 1 {
        return Err(KuriharaError::TwistGcd(tw.d, n));
    }
    let poly = linear_power_coeffs(n, -a, 0, 1, j, space0.m);
    Ok(twisted_ev(space0, table, tw, (1, 0), (a, n), &poly))
}

/// Residue source for a twisted form, freshly minimally normalized: the
/// valuation shift is found by scanning every generator column of the
/// twisted level N·D² through the symbol-level twist identity.
pub struct TwistedEvaluator {
    pub space0: Arc<ManinSpace>,
    pub tw: QuadraticTwist,
    pub k: u32,
    /// min valuation over all twisted generator values; subtracted from
    /// every served residue (fresh minimal normalization)
    pub shift: u32,
    table: ResTable,
}

impl TwistedEvaluator {
    /// `base` must already be minimally normalized for f₀; `k` is the
    /// working residue precision for the base table.
    pub fn build(
        base: &MinimalEigensymbol,
        tw: QuadraticTwist,
        k: u32,
    ) -> Result<Self, KuriharaError> {
        assert!(tw.d == 1 || base.prime.p as i64 != tw.d, "p must be coprime to the twist conductor");
        let ev = ResidueEvaluator::from_minimal(base, k)?;
        let space0 = ev.space.clone();
        let table = ev.table;
        let p = table.p;
        let twisted_level = space0.level * (tw.d as i64) * (tw.d as i64);
        let p1 = P1::new(twisted_level);
        let m = space0.m;
        let mut min_v: u32 = k;
        for x in 0..p1.len() {
            let (c, dd) = p1.list[x];
            let g = crate::msym::p1::lift_to_sl2z(twisted_level, c, dd);
            let gg = [g[0] as i128, g[1] as i128, g[2] as i128, g[3] as i128];
            for j in 0..=m {
                let mut poly = vec![0i128; m as usize + 1];
                poly[j as usize] = 1;
                let q = act_poly(gg, &poly, m);
                let v = twisted_ev(&space0, &table, &tw, (gg[1], gg[3]), (gg[0], gg[2]), &q);
                min_v = min_v.min(trailing_val(v, p, k));
                if min_v == 0 {
                    break;
                }
            }
            if min_v == 0 {
                break;
            }
        }
        if min_v >= k {
            return Err(KuriharaError::PrecisionExhausted(k, k + 4));
        }
        Ok(TwistedEvaluator { space0, tw, k, shift: min_v, table })
    }
}

fn trailing_val(mut r: u64, p: u64, cap: u32) -> u32 {
    if r == 0 {
        return cap;
    }
    let mut v = 0;
    while r % p == 0 {
        r /= p;
        v += 1;
    }
    v.min(cap)
}

impl LambdaMod for TwistedEvaluator {
    fn p(&self) -> u64 {
        self.table.p
    }

    fn precision(&self) -> u32 {
        self.k - self.shift
    }

    fn lambda_mod(&self, j: u32, a: i128, n: i128, m: u32) -> u64 {
        assert!(m + self.shift <= self.k);
        let p = self.table.p;
        let raw = twist_lambda(self.space0.as_ref(), &self.table, &self.tw, j, a, n)
            .expect("modulus coprime to twist conductor");
        // every twisted path value is a Z-combination of twisted generator
        // values, hence divisible by p^shift
        debug_assert_eq!(raw % p.pow(self.shift), 0);
        (raw / p.pow(self.shift)) % p.pow(m)
    }
}

/// Valuation verdict for one δ̃ₙ, always relative to the precision it was
/// computed at: `Exact(v)` with v below the cutoff, else `AtLeast(cutoff)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaValuation {
    Exact(u64),
    AtLeast(u64),
}

#[derive(Clone, Debug)]
pub struct KuriharaNumber {
    pub factors: Vec<i64>,
    pub n: i128,
    pub nu: usize,
    /// v_π(I_n); None for n = 1 (I_1 = 0)
    pub in_exp: Option<u64>,
    pub valuation: DeltaValuation,
    pub predicted_zero: Option<bool>,
}

impl KuriharaNumber {
    pub fn is_nonzero(&self) -> bool {
        matches!(self.valuation, DeltaValuation::Exact(_))
    }
}

/// The sign the eigensymbol must carry for critical point r.
pub fn sign_for_r(r: u32) -> i64 {
    if (r - 1) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// δ̃ₙ^{min,r} mod π^{m_n} (n > 1), or mod π^precision for n = 1.
/// `w` (the functional-equation sign) drives the predicted-zero flag.
pub fn kurihara_number(
    src: &dyn LambdaMod,
    nmod: &KolyvaginModulus,
    r: u32,
    w: Option<i64>,
) -> Result<KuriharaNumber, KuriharaError> {
    let p = src.p();
    let j = r - 1;
    let predicted_zero = w.map(|w| {
        let parity = if nmod.nu() % 2 == 0 { 1 } else { -1 };
        parity != w
    });
    let (m, residue) = match nmod.in_exp() {
        None => {
            // n = 1: serve at full available precision
            let m = src.precision();
            (m, src.lambda_mod(j, 1, 1, m))
        }
        Some(me) => {
            let m = me.min(src.precision() as u64) as u32;
            if (me as u32) > src.precision() {
                return Err(KuriharaError::PrecisionExhausted(src.precision(), me as u32));
            }
            let n = nmod.n();
            let pm = p.pow(m);
            let mut acc: u64 = 0;
            for a in 1..n {
                if num_integer::Integer::gcd(&a, &n) != 1 {
                    continue;
                }
                let mut coef: u64 = 1;
                for f in &nmod.factors {
                    coef = coef * (f.dlog(a as i64) as u64 % pm) % pm;
                }
                if coef == 0 {
                    continue;
                }
                let lam = src.lambda_mod(j, a, n, m);
                acc = (acc + (lam as u128 * coef as u128 % pm as u128) as u64) % pm;
            }
            (m, acc)
        }
    };
    let v = trailing_val(residue, p, m);
    let valuation =
        if v >= m { DeltaValuation::AtLeast(m as u64) } else { DeltaValuation::Exact(v as u64) };
    Ok(KuriharaNumber {
        factors: nmod.factors.iter().map(|f| f.ell).collect(),
        n: nmod.n(),
        nu: nmod.nu(),
        in_exp: nmod.in_exp(),
        valuation,
        predicted_zero,
    })
}

/// ∂⁽⁰⁾ = v_π(δ̃₁) − v_π((r−1)!), computed exactly from the normalized
/// symbol (no residue cutoff).
pub fn delta_one_valuation(
    min: &MinimalEigensymbol,
    r: u32,
) -> Result<Option<u64>, KuriharaError> {
    let v = min.normalized_lambda(r - 1, 1, 1);
    let fact: BigInt = (1..=(r as i64 - 1).max(1)).map(BigInt::from).product();
    let corr = crate::localfield::vp_bigint(&fact, min.prime.p) * min.prime.e as u64;
    match min.prime.valuation(&v)? {
        Valuation::Exact(t) => Ok(Some(t as u64 - corr)),
        Valuation::Infinity => Ok(None),
        Valuation::AtLeast(_) => unreachable!("exact value"),
    }
}

/// One stratum of a scan: the ν value and its computed Kurihara numbers.
#[derive(Clone, Debug)]
pub struct Stratum {
    pub nu: usize,
    pub results: Vec<KuriharaNumber>,
    pub nonvanishing: usize,
    pub vanishing: usize,
    pub bound: i64,
    pub skipped_by_parity: bool,
}

#[derive(Clone, Debug)]
pub struct DeltaScan {
    pub r: u32,
    pub w: Option<i64>,
    pub strata: Vec<Stratum>,
}

/// Compute every δ̃ₙ for the given per-stratum moduli. Per-n computations run
/// in parallel; results are keyed and sorted by n, so output is independent
/// of the worker count. Strata whose parity contradicts w are skipped unless
/// `include_predicted_zero` is set.
pub fn scan(
    src: &dyn LambdaMod,
    strata: &[(usize, Vec<KolyvaginModulus>, i64)],
    r: u32,
    w: Option<i64>,
    include_predicted_zero: bool,
) -> Result<DeltaScan, KuriharaError> {
    let mut out = Vec::new();
    for (nu, moduli, bound) in strata {
        let parity = if nu % 2 == 0 { 1i64 } else { -1 };
        let skip = w.map_or(false, |w| parity != w) && !include_predicted_zero;
        if skip {
            out.push(Stratum {
                nu: *nu,
                results: Vec::new(),
                nonvanishing: 0,
                vanishing: 0,
                bound: *bound,
                skipped_by_parity: true,
            });
            continue;
        }
        let mut results: Vec<KuriharaNumber> = moduli
            .par_iter()
            .map(|nm| kurihara_number(src, nm, r, w))
            .collect::<Result<Vec<_>, _>>()?;
        results.sort_by_key(|k| k.n);
        let nonvanishing = results.iter().filter(|k| k.is_nonzero()).count();
        let vanishing = results.len() - nonvanishing;
        out.push(Stratum {
            nu: *nu,
            results,
            nonvanishing,
            vanishing,
            bound: *bound,
            skipped_by_parity: false,
        });
    }
    Ok(DeltaScan { r, w, strata: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::nf::{NumberField, NumberFieldElement};
    use crate::arith::poly::QPoly;
    use crate::ec::CurveDescriptor;
    use crate::kolyvagin::{enumerate_moduli, KolyvaginError};
    use crate::localfield::{split_prime, LocalPrimeData, PrimeSelector, DEFAULT_PRECISION};
    use crate::msym::eigen::{functional_equation_sign, Eigensymbol};
    use crate::msym::paths::RatTable;
    use crate::periods::minimal_normalization;
    use num_rational::BigRational;

    fn qp(p: u64) -> LocalPrimeData {
        split_prime(p, &QPoly::from_ints(&[0, 1]), &PrimeSelector::Unique, DEFAULT_PRECISION)
            .unwrap()
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    fn nf_values(table: &RatTable) -> Vec<NumberFieldElement> {
        let q = NumberField::rationals();
        table.0.iter().map(|c| q.from_rational(c.clone())).collect()
    }

    fn minimal_for_curve(
        curve: &CurveDescriptor,
        p: u64,
        sign: i64,
    ) -> (MinimalEigensymbol, i64) {
        let space = Arc::new(ManinSpace::build(curve.conductor, 2).unwrap());
        let phi =
            Eigensymbol::cut_rational(&space, &[(2, rat(curve.ap_count(2).unwrap()))], sign)
                .unwrap();
        let w = functional_equation_sign(&space, &phi.values).unwrap();
        let min = minimal_normalization(space, nf_values(&phi.values), sign, &qp(p)).unwrap();
        (min, w)
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
        CurveDescriptor {
            label: "43.a1".into(),
            ainvs: [0, 1, 1, 0, 0],
            conductor: 43,
            ap: Default::default(),
        }
    }

    fn e11() -> CurveDescriptor {
        CurveDescriptor {
            label: "11.a1".into(),
            ainvs: [0, -1, 1, -10, -20],
            conductor: 11,
            ap: Default::default(),
        }
    }

    fn moduli_for(
        curve: &CurveDescriptor,
        p: u64,
        nu: usize,
        bound: i64,
    ) -> Vec<KolyvaginModulus> {
        let lp = qp(p);
        let mut src =
            |ell: i64| curve.ap_count(ell).map_err(|_| KolyvaginError::ApUnavailable(ell));
        enumerate_moduli(curve.conductor, 2, &lp, 1, nu, bound, &mut src).unwrap()
    }

    #[test]
    fn rank_two_curve_389_has_nonzero_delta_at_79_109() {
        let e = e389();
        let (min, w) = minimal_for_curve(&e, 3, 1);
        assert_eq!(w, 1, "389.a1 has even functional equation");
        let ev = ResidueEvaluator::from_minimal(&min, 12).unwrap();
        // parity forces every nu = 1 delta to vanish; check a few explicitly
        let nu1 = moduli_for(&e, 3, 1, 120);
        for nm in &nu1 {
            let k = kurihara_number(&ev, nm, 1, Some(w)).unwrap();
            assert_eq!(k.predicted_zero, Some(true));
            assert!(
                matches!(k.valuation, DeltaValuation::AtLeast(_)),
                "functional equation forces delta_{} = 0",
                k.n
            );
        }
        let nu2 = moduli_for(&e, 3, 2, 110);
        let target = nu2.iter().find(|m| m.n() == 79 * 109).expect("79*109 enumerated");
        let k = kurihara_number(&ev, target, 1, Some(w)).unwrap();
        assert_eq!(k.in_exp, Some(1));
        assert_eq!(k.valuation, DeltaValuation::Exact(0), "delta_(79*109) is a unit mod 3");
    }

    #[test]
    fn rank_one_curve_43_mixed_vanishing_in_nu_one() {
        let e = e43();
        let (min, w) = minimal_for_curve(&e, 3, 1);
        assert_eq!(w, -1, "43.a1 has odd functional equation");
        let ev = ResidueEvaluator::from_minimal(&min, 12).unwrap();
        let nu1 = moduli_for(&e, 3, 1, 500);
        let strata = vec![(1usize, nu1, 500i64)];
        let sc = scan(&ev, &strata, 1, Some(w), false).unwrap();
        let st = &sc.strata[0];
        assert!(!st.skipped_by_parity);
        assert!(st.nonvanishing >= 1, "some delta_ell nonzero mod 3 below 500");
        assert!(st.vanishing >= 1, "some delta_ell zero mod 3 below 500");
        assert_eq!(st.nonvanishing + st.vanishing, st.results.len());
    }

    #[test]
    fn delta_one_matches_l_value_valuation_for_rank_zero_11a() {
        // 11.a1 at p = 5: L(E,1)/Omega_Neron = 1/5, so the symbol in its
        // minimal normalization has lambda(1,1) a 5-adic unit (the minimal
        // period absorbs the denominator); delta_1 must then be a unit
        let e = e11();
        let (min, w) = minimal_for_curve(&e, 5, 1);
        assert_eq!(w, 1);
        let lam = min.normalized_lambda(0, 1, 1);
        assert!(!crate::arith::FieldElement::is_zero(&lam.representative));
        let d0 = delta_one_valuation(&min, 1).unwrap();
        assert_eq!(d0, Some(0), "ord_5(L/Omega_min) = 0 for 11a");
        // residue path agrees with the exact path
        let ev = ResidueEvaluator::from_minimal(&min, 10).unwrap();
        let one = KolyvaginModulus::one();
        let k = kurihara_number(&ev, &one, 1, Some(w)).unwrap();
        assert_eq!(k.valuation, DeltaValuation::Exact(0));
    }

    #[test]
    fn wrong_parity_strata_vanish_exactly() {
        // functional-equation identity: computed, not assumed
        for (curve, expect_w) in [(e11(), 1i64), (e43(), -1)] {
            let (min, w) = minimal_for_curve(&curve, 3, 1);
            assert_eq!(w, expect_w);
            let ev = ResidueEvaluator::from_minimal(&min, 10).unwrap();
            let wrong_nu = if w == 1 { 1usize } else { 2 };
            let bound = 200;
            let mut moduli = moduli_for(&curve, 3, wrong_nu, bound);
            moduli.truncate(8);
            assert!(!moduli.is_empty());
            let sc = scan(&ev, &[(wrong_nu, moduli, bound as i64)], 1, Some(w), true).unwrap();
            for k in &sc.strata[0].results {
                assert_eq!(k.predicted_zero, Some(true));
                assert!(
                    matches!(k.valuation, DeltaValuation::AtLeast(_)),
                    "delta_{} should vanish identically",
                    k.n
                );
            }
        }
    }

    #[test]
    fn primitive_root_independence_of_verdicts() {
        let e = e43();
        let (min, w) = minimal_for_curve(&e, 3, 1);
        let ev = ResidueEvaluator::from_minimal(&min, 10).unwrap();
        let nu1 = moduli_for(&e, 3, 1, 200);
        for nm in nu1 {
            let base = kurihara_number(&ev, &nm, 1, Some(w)).unwrap();
            // replace the primitive root by the next one
            let f = &nm.factors[0];
            let ell = f.ell;
            let next = (f.eta + 1..ell)
                .find(|&g| {
                    let mut ok = true;
                    for q in 2..ell {
                        if (ell - 1) % q == 0 && crate::kolyvagin::is_prime_i64(q) {
                            let mut acc: i64 = 1;
                            for _ in 0..(ell - 1) / q {
                                acc = acc * g % ell;
                            }
                            if acc == 1 {
                                ok = false;
                                break;
                            }
                        }
                    }
                    ok
                })
                .expect("another primitive root exists");
            let alt = KolyvaginModulus {
                factors: vec![crate::kolyvagin::with_primitive_root(f, next)],
            };
            let re = kurihara_number(&ev, &alt, 1, Some(w)).unwrap();
            assert_eq!(base.valuation, re.valuation, "ell = {ell}: ord is root-independent");
        }
    }

    #[test]
    fn scan_is_deterministic_across_worker_counts() {
        let e = e43();
        let (min, w) = minimal_for_curve(&e, 3, 1);
        let ev = ResidueEvaluator::from_minimal(&min, 10).unwrap();
        let nu1 = moduli_for(&e, 3, 1, 300);
        let strata = vec![(1usize, nu1, 300i64)];
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool8 = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let a = pool1.install(|| scan(&ev, &strata, 1, Some(w), false)).unwrap();
        let b = pool8.install(|| scan(&ev, &strata, 1, Some(w), false)).unwrap();
        let fmt = |s: &DeltaScan| {
            s.strata
                .iter()
                .flat_map(|st| st.results.iter().map(|k| format!("{}:{:?}", k.n, k.valuation)))
                .collect::<Vec<_>>()
        };
        assert_eq!(fmt(&a), fmt(&b));
    }

    #[test]
    fn period_rescaling_shifts_delta_valuations_uniformly() {
        let e = e43();
        let space = Arc::new(ManinSpace::build(43, 2).unwrap());
        let phi = Eigensymbol::cut_rational(&space, &[(2, rat(-2))], 1).unwrap();
        let min = minimal_normalization(space.clone(), nf_values(&phi.values), 1, &qp(3)).unwrap();
        // non-minimal: multiply the normalized symbol by pi = 3
        let scaled: Vec<NumberFieldElement> =
            min.values.0.iter().map(|x| x.scale(&rat(3))).collect();
        let nonmin = MinimalEigensymbol {
            space,
            sign: 1,
            prime: min.prime.clone(),
            shift_m: min.shift_m,
            values: crate::msym::paths::NfTable(scaled),
        };
        let ev0 = ResidueEvaluator::from_minimal(&min, 10).unwrap();
        let ev1 = ResidueEvaluator::from_minimal(&nonmin, 10).unwrap();
        // rank-1 curve: delta_1 = lambda(1,1) = 0 exactly, in any normalization
        assert_eq!(delta_one_valuation(&min, 1).unwrap(), None);
        assert_eq!(delta_one_valuation(&nonmin, 1).unwrap(), None);
        // rank-0 curve: the exact delta_1 valuation shifts by exactly t
        let (min11, _) = minimal_for_curve(&e11(), 3, 1);
        let scaled11: Vec<NumberFieldElement> =
            min11.values.0.iter().map(|x| x.scale(&rat(9))).collect();
        let nonmin11 = MinimalEigensymbol {
            space: min11.space.clone(),
            sign: 1,
            prime: min11.prime.clone(),
            shift_m: min11.shift_m,
            values: crate::msym::paths::NfTable(scaled11),
        };
        let d0 = delta_one_valuation(&min11, 1).unwrap().unwrap();
        let d2 = delta_one_valuation(&nonmin11, 1).unwrap().unwrap();
        assert_eq!(d2, d0 + 2);
        // nu = 1 valuations shift by exactly 1 wherever both are exact
        for nm in moduli_for(&e43(), 3, 1, 150) {
            let a = kurihara_number(&ev0, &nm, 1, None).unwrap();
            let b = kurihara_number(&ev1, &nm, 1, None).unwrap();
            match (a.valuation, b.valuation) {
                (DeltaValuation::Exact(x), DeltaValuation::Exact(y)) => assert_eq!(y, x + 1),
                (DeltaValuation::AtLeast(_), _) => {}
                (DeltaValuation::Exact(x), DeltaValuation::AtLeast(c)) => {
                    assert!(x + 1 >= c)
                }
            }
        }
        let _ = e;
    }

    #[test]
    fn twist_oracle_level_11_times_conductor_5() {
        // symbol-level twist of the level-11 form by the quadratic character
        // mod 5 must match the direct level-275 eigensymbol up to ONE global
        // unit across many (a, n) pairs
        let tw = QuadraticTwist::new(5);
        let space0 = Arc::new(ManinSpace::build(11, 2).unwrap());
        let e = e11();
        let phi0 = Eigensymbol::cut_rational(&space0, &[(2, rat(e.ap_count(2).unwrap()))], 1)
            .unwrap();
        // direct computation at level 11*25 = 275 with eigenvalues chi(l) a_l
        let space1 = Arc::new(ManinSpace::build(275, 2).unwrap());
        let aps: Vec<(i64, BigRational)> = [2i64, 3, 7, 13]
            .iter()
            .map(|&l| (l, rat(tw.chi(l as i128) * e.ap_count(l).unwrap())))
            .collect();
        let sign = tw.chi_minus_one(); // twisted + symbol needs base sign chi(-1)
        assert_eq!(sign, 1);
        let phi1 = Eigensymbol::cut_rational(&space1, &aps, 1).unwrap();
        let mut ratio: Option<BigRational> = None;
        let mut checked = 0;
        for n in 1..=16i128 {
            if n % 5 == 0 || n % 11 == 0 {
                continue;
            }
            for a in 1..=n {
                if num_integer::Integer::gcd(&a, &n) != 1 {
                    continue;
                }
                let t = twist_lambda(space0.as_ref(), &phi0.values, &tw, 0, a, n).unwrap();
                let d = crate::msym::paths::evaluate_lambda(space1.as_ref(), &phi1.values, 0, a, n);
                match (num_traits::Zero::is_zero(&t), num_traits::Zero::is_zero(&d)) {
                    (true, true) => continue,
                    (false, false) => {
                        let q = t / d;
                        match &ratio {
                            None => ratio = Some(q),
                            Some(r) => assert_eq!(*r, q, "global ratio at ({a},{n})"),
                        }
                        checked += 1;
                    }
                    _ => panic!("zero/nonzero mismatch at ({a},{n})"),
                }
            }
        }
        assert!(checked >= 20, "need at least 20 informative pairs, got {checked}");
        let r = ratio.unwrap();
        // ratio must be a unit at any p coprime to 5*11 we would scan at
        assert_eq!(crate::localfield::vp_rational(&r, 3), 0);
    }
}
