//! Residue-certified eigensymbols for large weight-2 levels.
//!
//! At conductors in the tens of thousands the exact rational eigensymbol cut
//! is out of reach, but Kurihara numbers only need the symbol mod p^k. The
//! weight-2 Manin relations have unit coefficients, so the triangular
//! quotient reduces cleanly mod p^k; eigensymbols are then cut by dense
//! elimination over ℤ/p^k inside the star eigenspace, split into rational
//! eigensystems by restricted Hecke operators, and certified a posteriori by
//! residual checks of every eigen equation on every generator column. The
//! certified precision bounds the digits any downstream valuation may use.

use super::hecke::{hecke_column_image, merel_matrices};
use super::paths::{ev_path, ResTable};
use super::space::{ManinSpace, MsymError};
use crate::arith::sparse::{eliminate, SparseVec, TriangularQuotient};
use crate::arith::zm::{inv_mod_u64, Zq};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Fixed modulus p^k with Barrett reduction; p^k must stay below 2^31 so a
/// product of two residues fits in u64.
#[derive(Clone, Copy, Debug)]
pub struct Modulus {
    pub p: u64,
    pub k: u32,
    pub pm: u64,
    magic: u128,
}

impl Modulus {
    pub fn new(p: u64, k: u32) -> Self {
        let pm = p.checked_pow(k).expect("modulus overflow");
        assert!(pm < (1 << 31), "p^k must fit in 31 bits");
        Modulus { p, k, pm, magic: (1u128 << 96) / pm as u128 }
    }

    /// x mod p^k for x < 2^63.
    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        let q = ((x as u128 * self.magic) >> 96) as u64;
        let mut r = x - q * self.pm;
        while r >= self.pm {
            r -= self.pm;
        }
        r
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.pm {
            s - self.pm
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.pm - b
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a * b)
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.pm - a
        }
    }

    pub fn inv(&self, a: u64) -> u64 {
        inv_mod_u64(a, self.pm)
    }

    pub fn from_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.pm as i128) as u64
    }

    /// p-adic valuation; the zero residue reports the full precision k.
    pub fn val(&self, x: u64) -> u32 {
        if x == 0 {
            return self.k;
        }
        let mut x = x;
        let mut t = 0;
        while x % self.p == 0 {
            x /= self.p;
            t += 1;
        }
        t
    }

    /// Balanced representative in (-p^k/2, p^k/2].
    pub fn balanced(&self, x: u64) -> i64 {
        if x * 2 > self.pm {
            x as i64 - self.pm as i64
        } else {
            x as i64
        }
    }
}

fn rat_to_res(c: &BigRational, md: &Modulus) -> Result<u64, MsymError> {
    let pm = num_bigint::BigInt::from(md.pm);
    let num = ((c.numer() % &pm) + &pm) % &pm;
    let den = ((c.denom() % &pm) + &pm) % &pm;
    let den = den.to_u64().unwrap();
    if den % md.p == 0 {
        return Err(MsymError::Internal("rule denominator is not a p-unit".into()));
    }
    Ok(md.mul(num.to_u64().unwrap(), md.inv(den)))
}

/// Triangular rewrite rules over ℤ/p^k with dense reduce and lift passes.
struct TriRules {
    ncols: usize,
    rules: Vec<Option<Vec<(usize, u64)>>>,
    order: Vec<usize>,
    free: Vec<usize>,
}

impl TriRules {
    fn from_rational(tri: &TriangularQuotient<BigRational>, md: &Modulus) -> Result<Self, MsymError> {
        let rules = tri
            .rules
            .iter()
            .map(|r| {
                r.as_ref()
                    .map(|sv| {
                        sv.entries
                            .iter()
                            .map(|(i, c)| Ok((*i, rat_to_res(c, md)?)))
                            .collect::<Result<Vec<_>, MsymError>>()
                    })
                    .transpose()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TriRules { ncols: tri.ncols, rules, order: tri.order.clone(), free: tri.free.clone() })
    }

    fn from_zq(tri: &TriangularQuotient<Zq>) -> Self {
        let rules = tri
            .rules
            .iter()
            .map(|r| r.as_ref().map(|sv| sv.entries.iter().map(|(i, c)| (*i, c.v)).collect()))
            .collect();
        TriRules { ncols: tri.ncols, rules, order: tri.order.clone(), free: tri.free.clone() }
    }

    /// Back-substitute a vector (given as a dense full-width buffer) to free
    /// coordinates. Rules are triangular in elimination order, so a single
    /// forward pass suffices.
    fn reduce_buf(&self, md: &Modulus, buf: &mut [u64]) -> Vec<u64> {
        debug_assert_eq!(buf.len(), self.ncols);
        for &c in &self.order {
            let a = buf[c];
            if a == 0 {
                continue;
            }
            buf[c] = 0;
            let rule = self.rules[c].as_ref().unwrap();
            for (t, r) in rule {
                buf[*t] = md.add(buf[*t], md.mul(a, *r));
            }
        }
        self.free.iter().map(|&c| buf[c]).collect()
    }

    fn reduce_entries(&self, md: &Modulus, entries: &[(usize, u64)]) -> Vec<u64> {
        let mut buf = vec![0u64; self.ncols];
        for (i, v) in entries {
            buf[*i] = md.add(buf[*i], *v);
        }
        self.reduce_buf(md, &mut buf)
    }

    /// Values on all columns consistent with the rules, given free values.
    fn lift_dense(&self, md: &Modulus, free_vals: &[u64]) -> Vec<u64> {
        debug_assert_eq!(free_vals.len(), self.free.len());
        let mut w = vec![0u64; self.ncols];
        for (&c, v) in self.free.iter().zip(free_vals) {
            w[c] = *v;
        }
        for &c in self.order.iter().rev() {
            let rule = self.rules[c].as_ref().unwrap();
            let mut acc: u128 = 0;
            for (t, r) in rule {
                acc += w[*t] as u128 * *r as u128;
            }
            w[c] = (acc % md.pm as u128) as u64;
        }
        w
    }
}

/// Dense row-major matrix of residues.
pub struct FlatMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl FlatMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        FlatMat { rows, cols, data: vec![0u64; rows * cols] }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let c = self.cols;
        let (lo, hi) = (a.min(b), a.max(b));
        let (left, right) = self.data.split_at_mut(hi * c);
        left[lo * c..(lo + 1) * c].swap_with_slice(&mut right[..c]);
    }
}

/// A subspace of the survivor-coordinate space in reduced echelon form:
/// basis[i][pivots[j]] = δ_ij. `loss` counts precision digits conceded to
/// non-unit pivots while solving; residual certification is separate.
pub struct Subspace {
    pub scols: usize,
    pub basis: Vec<Vec<u64>>,
    pub pivots: Vec<usize>,
    pub loss: u32,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Kernel of a dense matrix over ℤ/p^k, by row-reducing the augmented
/// transpose [Aᵀ | I] with minimum-valuation pivots and then completing the
/// non-unit pivots Howell-style: for a pivot of valuation v, the scaled row
/// p^{k-v}·r is reduced back in, which recovers kernel directions that only
/// appear as combinations of non-unit pivot rows. All row operations use
/// integral multipliers, so every produced basis vector satisfies A v = 0
/// exactly mod p^k; vectors whose reduction has p-content are torsion and
/// are dropped rather than divided, so `loss` is always 0 here. Entries
/// whose valuation reaches `floor` are treated as zero, so matrices accurate
/// to only `floor` digits can still be split.
pub fn kernel_of(mat: &mut FlatMat, md: &Modulus, floor: u32) -> Subspace {
    let (nrows, ncols) = (mat.rows, mat.cols);
    let aug = nrows + ncols;
    let mut b = FlatMat::zero(ncols, aug);
    for i in 0..nrows {
        let row = mat.row(i);
        for j in 0..ncols {
            if row[j] != 0 {
                b.row_mut(j)[i] = row[j];
            }
        }
    }
    for j in 0..ncols {
        b.row_mut(j)[nrows + j] = 1;
    }

    let kdbg = std::env::var("KURIHARA_DEBUG").is_ok() && nrows * ncols > 1 << 22;
    let t0 = std::time::Instant::now();
    let mut rank = 0usize;
    let mut piv_cols: Vec<(usize, u32)> = Vec::new();
    for col in 0..nrows {
        if kdbg && col % 1024 == 0 {
            eprintln!("  kernel_of: col {col}/{nrows} rank {rank} ({:?})", t0.elapsed());
        }
        let mut best: Option<(u32, usize)> = None;
        for r in rank..ncols {
            let v = b.row(r)[col];
            if v == 0 {
                continue;
            }
            let val = md.val(v);
            if val >= floor {
                continue;
            }
            if best.map_or(true, |(bv, _)| val < bv) {
                best = Some((val, r));
                if val == 0 {
                    break;
                }
            }
        }
        let Some((pval, pr)) = best else { continue };
        b.swap_rows(rank, pr);
        let (done, rest) = b.data.split_at_mut((rank + 1) * aug);
        let piv = &done[rank * aug..];
        let pq = md.p.pow(pval);
        let uinv = md.inv(piv[col] / pq);
        rest.par_chunks_mut(aug).for_each(|row| {
            let e = row[col];
            if e == 0 || md.val(e) >= floor {
                return;
            }
            debug_assert!(md.val(e) >= pval);
            let f = md.neg(md.mul(e / pq, uinv));
            if f == 0 {
                return;
            }
            for c in col..aug {
                row[c] = md.reduce(row[c] + f * piv[c]);
            }
        });
        piv_cols.push((col, pval));
        rank += 1;
        if rank == ncols {
            break;
        }
    }

    // pivot rows sorted by column, plus the kernel generators found so far
    let mut pivrows: Vec<(usize, u32, Vec<u64>)> = (0..rank)
        .map(|t| {
            let (c, v) = piv_cols[t];
            (c, v, b.row(t).to_vec())
        })
        .collect();
    let mut gens: Vec<Vec<u64>> =
        (rank..ncols).map(|r| b.row(r)[nrows..].to_vec()).collect();
    drop(b);

    // Howell completion: reduce the p^{k-v} multiple of every non-unit pivot
    // row; a fully reduced row is a kernel generator, a partially reduced one
    // refines or extends the pivot set (then its own multiple is enqueued)
    let scale = |row: &[u64], v: u32| -> Vec<u64> {
        let f = md.p.pow(md.k - v);
        row.iter().map(|&x| md.mul(x, f)).collect()
    };
    let mut queue: std::collections::VecDeque<Vec<u64>> = pivrows
        .iter()
        .filter(|(_, v, _)| *v > 0)
        .map(|(_, v, row)| scale(row, *v))
        .collect();
    let mut rounds = 0usize;
    while let Some(mut w) = queue.pop_front() {
        rounds += 1;
        assert!(rounds < 100_000, "Howell completion did not terminate");
        let mut t = 0usize;
        while t < pivrows.len() {
            let (c, v, _) = pivrows[t];
            let e = w[c];
            if e == 0 || md.val(e) >= floor {
                t += 1;
                continue;
            }
            let ev = md.val(e);
            if ev >= v {
                let pq = md.p.pow(v);
                let uinv = md.inv(pivrows[t].2[c] / pq);
                let f = md.neg(md.mul(e / pq, uinv));
                let piv = &pivrows[t].2;
                for cc in 0..aug {
                    w[cc] = md.reduce(w[cc] + f * piv[cc]);
                }
                t += 1;
            } else {
                // w is the shallower row at this column: swap it in and keep
                // reducing the displaced pivot row
                std::mem::swap(&mut pivrows[t].2, &mut w);
                pivrows[t].1 = ev;
                if ev > 0 {
                    queue.push_back(scale(&pivrows[t].2, ev));
                }
            }
        }
        match w[..nrows]
            .iter()
            .position(|&x| x != 0 && md.val(x) < floor)
        {
            None => gens.push(w[nrows..].to_vec()),
            Some(c) => {
                // a new pivot column appears; register it and enqueue its
                // multiple if it is not a unit
                let v = md.val(w[c]);
                let pos = pivrows.partition_point(|(pc, _, _)| *pc < c);
                if v > 0 {
                    queue.push_back(scale(&w, v));
                }
                pivrows.insert(pos, (c, v, w));
            }
        }
    }
    drop(pivrows);

    // reduced echelon basis of the free part: unit pivots only, torsion
    // generators (p-content after reduction) are dropped
    let mut basis: Vec<Vec<u64>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    while let Some(mut v) = gens.pop() {
        for (bv, &pc) in basis.iter().zip(&pivots) {
            let c = v[pc];
            if c != 0 {
                let f = md.neg(c);
                for (vv, bb) in v.iter_mut().zip(bv) {
                    *vv = md.reduce(*vv + f * *bb);
                }
            }
        }
        let Some(pc) = v.iter().position(|&x| x % md.p != 0) else { continue };
        let inv = md.inv(v[pc]);
        for x in v.iter_mut() {
            *x = md.mul(*x, inv);
        }
        for (bv, _) in basis.iter_mut().zip(&pivots) {
            let c = bv[pc];
            if c != 0 {
                let f = md.neg(c);
                for (bb, vv) in bv.iter_mut().zip(&v) {
                    *bb = md.reduce(*bb + f * *vv);
                }
            }
        }
        basis.push(v);
        pivots.push(pc);
    }
    Subspace { scols: ncols, basis, pivots, loss: 0 }
}

/// The star-sign eigenspace of the weight-2 symbol space for Γ₀(N), presented
/// mod p^k: triangular relation rules, a star quotient on the free columns,
/// and Hecke constraint rows for cutting eigensymbols.
pub struct ResidueSpace {
    pub space: Arc<ManinSpace>,
    pub md: Modulus,
    pub sign: i64,
    tri: TriRules,
    star: TriRules,
}

impl ResidueSpace {
    pub fn build(space: Arc<ManinSpace>, p: u64, k: u32, sign: i64) -> Result<Self, MsymError> {
        if space.weight != 2 {
            return Err(MsymError::Internal("residue path supports weight 2 only".into()));
        }
        assert!(sign == 1 || sign == -1);
        let md = Modulus::new(p, k);
        let tri = TriRules::from_rational(&space.tri, &md)?;
        let d = tri.free.len();

        // star constraint rows in free coordinates: φ(star e_c) = sign φ(e_c)
        let rows: Vec<SparseVec<Zq>> = (0..d)
            .into_par_iter()
            .map(|fi| {
                let c = tri.free[fi];
                let (c2, sg) = space.star_image(c);
                let mut row = tri.reduce_entries(&md, &[(c2, md.from_i128(sg as i128))]);
                row[fi] = md.sub(row[fi], md.from_i128(sign as i128));
                SparseVec::new(
                    row.iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0)
                        .map(|(i, v)| (i, Zq::new(*v, p, md.pm)))
                        .collect(),
                )
            })
            .collect();
        let stri = eliminate(d, &rows, |c: &Zq| c.is_unit());
        let star = TriRules::from_zq(&stri);
        Ok(ResidueSpace { space, md, sign, tri, star })
    }

    /// Free-generator count of the full quotient.
    pub fn free_dim(&self) -> usize {
        self.tri.free.len()
    }

    /// Dimension of the star-sign subspace presentation.
    pub fn survivor_dim(&self) -> usize {
        self.star.free.len()
    }

    fn star_reduce(&self, free_vals: Vec<u64>) -> Vec<u64> {
        let mut buf = free_vals;
        self.star.reduce_buf(&self.md, &mut buf)
    }

    /// Constraint rows of T_ℓ (U_ℓ when ℓ | N) in survivor coordinates: row
    /// fi evaluates φ(T_ℓ e_{free[fi]}) on a survivor-coordinate functional.
    pub fn op_rows(&self, ell: i64) -> Result<FlatMat, MsymError> {
        let mats = merel_matrices(ell);
        let d = self.free_dim();
        let s = self.survivor_dim();
        let rows: Result<Vec<Vec<u64>>, MsymError> = (0..d)
            .into_par_iter()
            .map(|fi| {
                let img = hecke_column_image(&self.space, &mats, self.tri.free[fi]);
                let entries = img
                    .entries
                    .iter()
                    .map(|(i, c)| Ok((*i, rat_to_res(c, &md)?)))
                    .collect::<Result<Vec<_>, MsymError>>()?;
                Ok(self.star_reduce(self.tri.reduce_entries(&md, &entries)))
            })
            .collect();
        let rows = rows?;
        let mut out = FlatMat::zero(d, s);
        for (r, row) in rows.into_iter().enumerate() {
            out.row_mut(r).copy_from_slice(&row);
        }
        Ok(out)
    }

    /// Survivor-coordinate rows of the identity on free columns, for forming
    /// T_ℓ - a·1 constraint blocks.
    pub fn identity_rows(&self) -> FlatMat {
        let d = self.free_dim();
        let s = self.survivor_dim();
        let rows: Vec<Vec<u64>> =
            (0..d).into_par_iter().map(|fi| self.star_reduce(unit_vec(d, fi))).collect();
        let mut out = FlatMat::zero(d, s);
        for (r, row) in rows.into_iter().enumerate() {
            out.row_mut(r).copy_from_slice(&row);
        }
        out
    }

    /// Free-column index behind survivor coordinate `c`.
    pub fn star_free_index(&self, c: usize) -> usize {
        self.star.free[c]
    }

    /// Values on every generator column for a survivor-coordinate vector.
    pub fn lift_values(&self, v: &[u64]) -> Vec<u64> {
        let free_vals = self.star.lift_dense(&self.md, v);
        self.tri.lift_dense(&self.md, &free_vals)
    }

    /// Restriction of the operator with constraint rows `rows` to a stable
    /// subspace, as a dim × dim matrix in basis coordinates. The basis has
    /// unit pivots at its free columns, so reading those coordinates gives
    /// the exact action on the free-part quotient of the kernel module; any
    /// torsion component of the image has zero free coordinates and is
    /// accounted for later by residual certification of the lifted vectors.
    pub fn restrict(&self, rows: &FlatMat, sub: &Subspace) -> Result<FlatMat, MsymError> {
        let k = sub.dim();
        let md = self.md;
        let cols: Vec<Vec<u64>> = sub
            .basis
            .par_iter()
            .map(|v| {
                let yfree: Vec<u64> = (0..rows.rows)
                    .map(|fi| {
                        let row = rows.row(fi);
                        let mut acc: u128 = 0;
                        for (a, b) in row.iter().zip(v) {
                            acc += *a as u128 * *b as u128;
                        }
                        (acc % md.pm as u128) as u64
                    })
                    .collect();
                // T commutes with star, so T^t φ again satisfies the star
                // constraints and is determined by its survivor values
                yfree
            })
            .collect();
        let mut m = FlatMat::zero(k, k);
        for (j, yfree) in cols.iter().enumerate() {
            for (i, &pc) in sub.pivots.iter().enumerate() {
                m.row_mut(i)[j] = yfree[self.star.free[pc]];
            }
        }
        Ok(m)
    }

}

fn unit_vec(n: usize, i: usize) -> Vec<u64> {
    let mut v = vec![0u64; n];
    v[i] = 1;
    v
}

/// Search plan for rational eigensystems: `fixed` constraints are stacked
/// into one dense cut; `split` operators separate the resulting kernel.
pub struct NewformSearch {
    pub fixed: Vec<(i64, i64)>,
    pub split: Vec<(i64, Vec<i64>)>,
}

/// Integer window allowed by the Ramanujan bound at ℓ (weight 2); for ℓ | N
/// the admissible eigenvalues are ±1 (ℓ ∥ N) or 0 (ℓ² | N), all inside it.
pub fn hasse_window(ell: i64) -> Vec<i64> {
    let b = (2.0 * (ell as f64).sqrt()).floor() as i64;
    (-b..=b).collect()
}

/// A residue eigensymbol with its discovered eigensystem and the precision
/// certified by residual checks.
pub struct BigEigensymbol {
    pub space: Arc<ManinSpace>,
    pub md: Modulus,
    pub sign: i64,
    /// Values on all generator columns, minimally normalized (a unit value
    /// exists; all values are integral residues).
    pub values: Vec<u64>,
    /// Eigenvalues fixed by the search path.
    pub eigen: BTreeMap<i64, i64>,
    /// Functional-equation sign from the mod-p^k Fricke probe.
    pub w: i64,
    /// Digits of precision certified by residual checks.
    pub cert: u32,
}

impl BigEigensymbol {
    /// Extract a_ℓ by probing φ(T_ℓ e_col) / φ(e_col) on unit-valued columns
    /// and lifting the consistent residue to the Ramanujan window.
    pub fn eigenvalue(&self, ell: i64) -> Result<i64, MsymError> {
        if let Some(a) = self.eigen.get(&ell) {
            return Ok(*a);
        }
        let md = &self.md;
        let mats = merel_matrices(ell);
        let mut found: Option<u64> = None;
        let mut checked = 0usize;
        for col in 0..self.space.ncols {
            let den = self.values[col];
            if den % md.p == 0 {
                continue;
            }
            let img = hecke_column_image(&self.space, &mats, col);
            let mut acc: u128 = 0;
            for (i, c) in &img.entries {
                let cv = rat_to_res(c, md)?;
                acc += cv as u128 * self.values[*i] as u128;
            }
            let a = md.mul((acc % md.pm as u128) as u64, md.inv(den));
            match found {
                None => found = Some(a),
                Some(prev) if prev != a => {
                    return Err(MsymError::Internal(format!(
                        "inconsistent eigenvalue probes for ell={ell}"
                    )))
                }
                _ => {}
            }
            checked += 1;
            if checked >= 6 {
                break;
            }
        }
        let a = found
            .ok_or_else(|| MsymError::Internal("no unit-valued probe column".into()))?;
        let b = md.balanced(a);
        let bound = (2.0 * (ell as f64).sqrt()).floor() as i64;
        if b.abs() > bound {
            return Err(MsymError::Internal(format!(
                "eigenvalue residue for ell={ell} lifts outside the Ramanujan window"
            )));
        }
        Ok(b)
    }

    /// Minimum residual valuation of T_ℓ φ - a φ over every generator
    /// column: the digits to which the eigen equation is certified.
    pub fn verify_eigen(&self, ell: i64, a: i64) -> Result<u32, MsymError> {
        let md = &self.md;
        let mats = merel_matrices(ell);
        let ar = md.from_i128(a as i128);
        let worst = (0..self.space.ncols)
            .into_par_iter()
            .map(|col| {
                let img = hecke_column_image(&self.space, &mats, col);
                let mut acc: u128 = 0;
                for (i, c) in &img.entries {
                    let cv = rat_to_res(c, md).expect("integral Hecke coefficient");
                    acc += cv as u128 * self.values[*i] as u128;
                }
                let lhs = (acc % md.pm as u128) as u64;
                let rhs = md.mul(ar, self.values[col]);
                md.val(md.sub(lhs, rhs))
            })
            .min()
            .unwrap_or(md.k);
        Ok(worst)
    }

    /// Values reduced mod p^m for handing to the scan evaluator; m must not
    /// exceed the certified precision.
    pub fn values_mod(&self, m: u32) -> Vec<u64> {
        assert!(m <= self.cert, "requested precision exceeds certificate");
        let q = self.md.p.pow(m);
        self.values.iter().map(|v| v % q).collect()
    }
}

/// Fricke ratio of a weight-2 residue eigensymbol; returns ±1.
fn fricke_scalar_residue(
    space: &ManinSpace,
    table: &ResTable,
    md: &Modulus,
) -> Result<i64, MsymError> {
    let n = space.level as i128;
    let poly = [1i128];
    let mut found: Option<u64> = None;
    let mut checked = 0usize;
    for q in 2..80i128 {
        for a in 1..q {
            if num_integer::Integer::gcd(&a, &q) != 1 {
                continue;
            }
            let base = ev_path(space, table, (1, 0), (a, q), &poly);
            let img = ev_path(space, table, (0, 1), (-q, n * a), &poly);
            match found {
                None => {
                    if base % md.p != 0 {
                        found = Some(md.mul(img, md.inv(base)));
                        checked += 1;
                    }
                }
                Some(c) => {
                    // every probe must satisfy img = c·base exactly; this is
                    // what rejects vectors that are not Fricke eigenvectors
                    if md.mul(c, base) != img {
                        return Err(MsymError::FrickeInconsistent);
                    }
                    checked += 1;
                }
            }
            if checked >= 24 {
                let c = found.unwrap();
                return if c == 1 % md.pm {
                    Ok(1)
                } else if c == md.pm - 1 {
                    Ok(-1)
                } else {
                    Err(MsymError::FrickeInconsistent)
                };
            }
        }
    }
    Err(MsymError::Internal("no unit probe path for Fricke ratio".into()))
}

/// Find all rational newform eigensymbols matching a search plan, certify
/// them by residual checks, and attach the Fricke sign. `verify` lists
/// held-out operators included in the certificate.
pub fn find_rational_newforms(
    rs: &ResidueSpace,
    search: &NewformSearch,
    verify: &[i64],
) -> Result<Vec<BigEigensymbol>, MsymError> {
    let md = rs.md;
    let d = rs.free_dim();
    let s = rs.survivor_dim();

    let ident = rs.identity_rows();
    let mut stacked = FlatMat::zero(d * search.fixed.len(), s);
    for (b, (ell, a)) in search.fixed.iter().enumerate() {
        let rows = rs.op_rows(*ell)?;
        let ar = md.from_i128(*a as i128);
        let block = &mut stacked.data[b * d * s..(b + 1) * d * s];
        block.copy_from_slice(&rows.data);
        if *a != 0 {
            for (x, e) in block.iter_mut().zip(&ident.data) {
                *x = md.sub(*x, md.mul(ar, *e));
            }
        }
    }
    let sub0 = kernel_of(&mut stacked, &md, md.k);
    drop(stacked);
    let debug = std::env::var("KURIHARA_DEBUG").is_ok();
    if debug {
        eprintln!("fixed cut: dim {} loss {}", sub0.dim(), sub0.loss);
    }
    let k0 = sub0.dim();

    // exact restricted matrices for every split operator on the fixed cut;
    // all further linear algebra happens in these small coordinates
    let mut mats: Vec<(i64, Vec<i64>, FlatMat)> = Vec::new();
    for (ell, window) in &search.split {
        let rows = rs.op_rows(*ell)?;
        let m = rs.restrict(&rows, &sub0)?;
        if debug {
            // measure how far T b_j strays from the span of the cut: any
            // deficit here pollutes the restricted matrix
            let mut worst = md.k;
            for j in 0..sub0.dim().min(4) {
                let v = &sub0.basis[j];
                let yfree: Vec<u64> = (0..rows.rows)
                    .map(|fi| {
                        let row = rows.row(fi);
                        let mut acc: u128 = 0;
                        for (a, b) in row.iter().zip(v) {
                            acc += *a as u128 * *b as u128;
                        }
                        (acc % md.pm as u128) as u64
                    })
                    .collect();
                for c in 0..s {
                    let mut acc: u128 = 0;
                    for (i, bi) in sub0.basis.iter().enumerate() {
                        let mij = m.row(i)[j];
                        if mij != 0 && bi[c] != 0 {
                            acc += mij as u128 * bi[c] as u128;
                        }
                    }
                    let pred = (acc % md.pm as u128) as u64;
                    let act = yfree[rs.star_free_index(c)];
                    worst = worst.min(md.val(md.sub(act, pred)));
                }
            }
            eprintln!("restrict ell={}: span residual digits {}", ell, worst);
        }
        mats.push((*ell, window.clone(), m));
    }

    // every candidate eigenvalue tuple is cut from scratch as one stacked
    // kernel of the exact fixed-cut matrices: restrictions to nested pieces
    // would be polluted by torsion directions, a fresh stack never is
    let cut = |tuple: &[(usize, i64)]| -> Subspace {
        let mut st = FlatMat::zero(k0 * tuple.len(), k0);
        for (b, (mi, a)) in tuple.iter().enumerate() {
            let block = &mut st.data[b * k0 * k0..(b + 1) * k0 * k0];
            block.copy_from_slice(&mats[*mi].2.data);
            let ar = md.from_i128(*a as i128);
            if *a != 0 {
                for i in 0..k0 {
                    let x = block[i * k0 + i];
                    block[i * k0 + i] = md.sub(x, ar);
                }
            }
        }
        kernel_of(&mut st, &md, md.k)
    };

    let mut frontier: Vec<Vec<(usize, i64)>> = vec![Vec::new()];
    let mut found: Vec<(Vec<(i64, i64)>, Vec<u64>)> = Vec::new();
    for level in 0..mats.len() {
        let mut next = Vec::new();
        for tuple in frontier {
            for &a in &mats[level].1 {
                let mut t = tuple.clone();
                t.push((level, a));
                let ker = cut(&t);
                if ker.dim() == 0 {
                    continue;
                }
                let mut eigs = search.fixed.clone();
                eigs.extend(t.iter().map(|(mi, a)| (mats[*mi].0, *a)));
                if debug {
                    eprintln!("piece {:?}: dim {}", eigs, ker.dim());
                }
                match ker.dim() {
                    1 => found.push((eigs, ker.basis[0].clone())),
                    dd => {
                        if level + 1 == mats.len() {
                            return Err(MsymError::Internal(format!(
                                "search left an unsplit subspace of dimension {dd}; extend the split list"
                            )));
                        }
                        next.push(t);
                    }
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }

    let mut out = Vec::new();
    for (eigs, coords) in found {
        // map the fixed-cut coordinates back to survivor coordinates
        let mut vs = vec![0u64; s];
        for (t, b) in sub0.basis.iter().enumerate() {
            if coords[t] == 0 {
                continue;
            }
            for (x, y) in vs.iter_mut().zip(b) {
                *x = md.reduce(*x + coords[t] * *y);
            }
        }
        let values = rs.lift_values(&vs);
        assert!(values.iter().any(|v| v % md.p != 0), "kernel vector lost minimality");

        // star covariance on every column
        let mut star_worst = md.k;
        for col in 0..rs.space.ncols {
            let (c2, sg) = rs.space.star_image(col);
            let lhs = md.mul(md.from_i128(sg as i128), values[c2]);
            let rhs = md.mul(md.from_i128(rs.sign as i128), values[col]);
            star_worst = star_worst.min(md.val(md.sub(lhs, rhs)));
        }
        if debug {
            eprintln!("candidate {:?}: star residual digits {}", eigs, star_worst);
        }
        if star_worst < 8 {
            continue;
        }

        let mut sym = BigEigensymbol {
            space: rs.space.clone(),
            md,
            sign: rs.sign,
            values,
            eigen: eigs.iter().cloned().collect(),
            w: 0,
            cert: md.k,
        };

        // residual certificate over the cut path and held-out operators
        let mut cert = md.k;
        let mut checks: Vec<(i64, i64)> = eigs.clone();
        for &ell in verify {
            if sym.eigen.contains_key(&ell) {
                continue;
            }
            let a = match sym.eigenvalue(ell) {
                Ok(a) => a,
                Err(e) => {
                    if debug {
                        eprintln!("candidate {:?}: dropped, ell={} extraction: {}", eigs, ell, e);
                    }
                    cert = 0;
                    break;
                }
            };
            checks.push((ell, a));
        }
        if cert == 0 {
            continue;
        }
        for (ell, a) in &checks {
            cert = cert.min(sym.verify_eigen(*ell, *a)?);
            sym.eigen.insert(*ell, *a);
        }
        cert = cert.min(star_worst);
        if debug {
            eprintln!("candidate {:?}: cert {}", eigs, cert);
        }
        if cert < 8 {
            continue;
        }
        sym.cert = cert;

        let table =
            ResTable { vals: sym.values.clone(), p: md.p, m: md.k, pm: md.pm };
        match fricke_scalar_residue(&rs.space, &table, &md) {
            Ok(c) => {
                // weight 2: symbol-level ratio carries an extra -1 relative
                // to the analytic sign, same calibration as the exact path
                sym.w = -c * super::eigen::FRICKE_CALIBRATION;
            }
            Err(MsymError::FrickeInconsistent) => continue,
            Err(e) => return Err(e),
        }
        out.push(sym);
    }
    Ok(out)
}
