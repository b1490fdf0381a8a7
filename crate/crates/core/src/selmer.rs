//! Selmer-structure invariants derived from a Kurihara-number scan.
//!
//! From the stratified valuation data the structure theorem reads off the
//! corank (the smallest ν with a nonvanishing δ̃ₙ), the elementary divisors
//! e_i = ½(∂^(ord+2i) − ∂^(ord+2i+2)), and the length ∂^(ord) − ∂^(∞) of the
//! cotorsion part. Scan minima are only upper bounds for the true ∂-values;
//! a report is conclusive only when the e_i chain terminates at 0.

use serde::Serialize;
use thiserror::Error;

use crate::kurihara::{DeltaScan, DeltaValuation, KuriharaNumber};

#[derive(Debug, Error)]
pub enum SelmerError {
    #[error("scan has no conclusive nonvanishing value; report would be a guess")]
    Inconclusive,
    #[error("odd difference {0} between consecutive same-parity strata: unsaturated scan or bug")]
    OddDifference(i64),
    #[error("corank bound requires a nonzero witness")]
    ZeroWitness,
    #[error("rank-zero length requires ord = 0, got {0}")]
    NonzeroOrd(usize),
    #[error("observed valuation below the asserted floor {0}: the floor is wrong")]
    FloorViolation(u64),
}

/// Theorem-level assumptions under which the structure statement holds;
/// attached verbatim to every report.
pub const ASSUMPTIONS: [&str; 3] = [
    "residual Galois representation has large image",
    "some Kurihara number is nonvanishing (delta-tilde is not identically zero)",
    "the relevant Iwasawa main conjecture input holds for the chosen prime",
];

/// Per-stratum minima of ord_π(δ̃ₙ) over the scanned moduli; each is an
/// upper bound for the true ∂⁽ⁱ⁾.
#[derive(Clone, Debug, Serialize)]
pub struct DerivedInvariants {
    /// smallest ν with a nonvanishing value, if any
    pub ord: Option<usize>,
    /// (ν, min exact valuation, #indeterminate) per scanned stratum
    pub partial_bounds: Vec<StratumBound>,
    pub d_infinity_bound: Option<u64>,
    pub w: Option<i64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StratumBound {
    pub nu: usize,
    /// min over exact valuations; None when the stratum had no exact value
    pub min_val: Option<u64>,
    pub indeterminate: usize,
    pub scanned: usize,
    pub bound: i64,
    pub skipped_by_parity: bool,
}

pub fn derive_invariants(scan: &DeltaScan) -> DerivedInvariants {
    let mut partial = Vec::new();
    let mut ord = None;
    let mut dinf: Option<u64> = None;
    for st in &scan.strata {
        let exact: Vec<u64> = st
            .results
            .iter()
            .filter_map(|k| match k.valuation {
                DeltaValuation::Exact(v) => Some(v),
                DeltaValuation::AtLeast(_) => None,
            })
            .collect();
        let min_val = exact.iter().copied().min();
        if let Some(v) = min_val {
            if ord.is_none() {
                ord = Some(st.nu);
            }
            dinf = Some(dinf.map_or(v, |d| d.min(v)));
        }
        partial.push(StratumBound {
            nu: st.nu,
            min_val,
            indeterminate: st.results.len() - exact.len(),
            scanned: st.results.len(),
            bound: st.bound,
            skipped_by_parity: st.skipped_by_parity,
        });
    }
    DerivedInvariants { ord, partial_bounds: partial, d_infinity_bound: dinf, w: scan.w }
}

/// Structure verdict in the shape of the theorem: corank plus doubled
/// elementary divisors.
#[derive(Clone, Debug, Serialize)]
pub struct SelmerReport {
    pub corank: usize,
    /// each e_i contributes (𝒪/π^{e_i})²
    pub e: Vec<u64>,
    pub structure: String,
    pub length_over_div: u64,
    pub parity_ok: Option<bool>,
    pub conclusive: bool,
    pub assumptions: Vec<String>,
}

/// Read the e_i chain off the same-parity strata at and above ord.
/// ∂^(ord+2i) values come from the stratum minima; the chain must decrease
/// by even steps and reach the ∂^(∞) bound.
pub fn structure_report(inv: &DerivedInvariants) -> Result<SelmerReport, SelmerError> {
    structure_report_with_floor(inv, None, "")
}

/// Like [`structure_report`], but with a known lower bound on every
/// valuation in the scan (hence on ∂^(∞)). A Tamagawa number divisible by π
/// forces such a floor: every δ̃ₙ carries it, so the chain terminates at the
/// floor rather than at 0 and elementary divisors are read above it. The
/// stated `reason` is recorded as an extra assumption on the report.
pub fn structure_report_with_floor(
    inv: &DerivedInvariants,
    floor: Option<u64>,
    reason: &str,
) -> Result<SelmerReport, SelmerError> {
    let ord = inv.ord.ok_or(SelmerError::Inconclusive)?;
    // collect ∂^(ord + 2i) from the scanned strata of matching parity
    let mut ds: Vec<(usize, u64)> = Vec::new();
    for b in &inv.partial_bounds {
        if b.nu >= ord && (b.nu - ord) % 2 == 0 {
            if let Some(v) = b.min_val {
                ds.push((b.nu, v));
            }
        }
    }
    ds.sort_by_key(|&(nu, _)| nu);
    if ds.is_empty() || ds[0].0 != ord {
        return Err(SelmerError::Inconclusive);
    }
    let f = floor.unwrap_or(0);
    if ds.iter().any(|&(_, d)| d < f) {
        return Err(SelmerError::FloorViolation(f));
    }
    let dinf = inv.d_infinity_bound.unwrap_or(0).max(f);
    let mut e = Vec::new();
    let mut conclusive = false;
    for w in ds.windows(2) {
        let ((nu0, d0), (nu1, d1)) = (w[0], w[1]);
        if nu1 != nu0 + 2 {
            break;
        }
        let diff = d0 as i64 - d1 as i64;
        if diff < 0 {
            break;
        }
        if diff % 2 != 0 {
            return Err(SelmerError::OddDifference(diff));
        }
        e.push((diff / 2) as u64);
        let _ = d1;
        if diff == 0 {
            conclusive = true;
            break;
        }
    }
    // valuations never drop below the floor, so a chain that reaches it is done
    if ds.last().map(|&(_, d)| d) == Some(f) {
        conclusive = true;
    }
    while e.last() == Some(&0) {
        e.pop();
    }
    for w in e.windows(2) {
        if w[1] > w[0] {
            return Err(SelmerError::Inconclusive);
        }
    }
    let length = ds[0].1 - dinf;
    let structure = render_structure(ord, &e);
    let mut assumptions: Vec<String> = ASSUMPTIONS.iter().map(|s| s.to_string()).collect();
    if floor.is_some() {
        assumptions.push(reason.to_string());
    }
    Ok(SelmerReport {
        corank: ord,
        e,
        structure,
        length_over_div: length,
        parity_ok: inv.w.map(|w| parity_check(ord, w)),
        conclusive,
        assumptions,
    })
}

fn render_structure(ord: usize, e: &[u64]) -> String {
    let mut parts = Vec::new();
    if ord > 0 {
        parts.push(format!("(F/O)^{ord}"));
    }
    for &ei in e {
        if ei > 0 {
            parts.push(format!("(O/pi^{ei})^2"));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// p-parity: (−1)^ord must equal w.
pub fn parity_check(ord: usize, w: i64) -> bool {
    let parity = if ord % 2 == 0 { 1i64 } else { -1 };
    parity == w
}

/// Corollary-level unconditional corank bound from a single nonzero witness.
pub fn corank_upper_bound(witness: &KuriharaNumber) -> Result<usize, SelmerError> {
    if witness.is_nonzero() {
        Ok(witness.nu)
    } else {
        Err(SelmerError::ZeroWitness)
    }
}

/// Length of the (finite) Selmer group in the rank-zero case:
/// ∂⁽⁰⁾ − ∂⁽∞⁾, with the scan-bound caveat on ∂⁽∞⁾.
pub fn rank_zero_length(inv: &DerivedInvariants) -> Result<u64, SelmerError> {
    match inv.ord {
        Some(0) => {}
        Some(o) => return Err(SelmerError::NonzeroOrd(o)),
        None => return Err(SelmerError::Inconclusive),
    }
    let d0 = inv
        .partial_bounds
        .iter()
        .find(|b| b.nu == 0)
        .and_then(|b| b.min_val)
        .ok_or(SelmerError::Inconclusive)?;
    Ok(d0 - inv.d_infinity_bound.unwrap_or(0))
}
