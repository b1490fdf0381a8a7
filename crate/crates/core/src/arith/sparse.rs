//! Sparse exact linear algebra for relation quotients.
//!
//! The Manin relation matrix for Γ₀(N) has a few nonzeros per row, so the
//! quotient map onto free generators is computed by sparse elimination with
//! Markowitz pivoting rather than dense reduction. Elimination is generic
//! over the coefficient field so the same code runs exactly over ℚ and in
//! mod-p analysis passes.

use super::FieldElement;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use std::collections::HashMap;

/// Sparse vector: sorted (index, nonzero coefficient) pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVec<F = BigRational> {
    pub entries: Vec<(usize, F)>,
}

impl<F: FieldElement> Default for SparseVec<F> {
    fn default() -> Self {
        SparseVec { entries: Vec::new() }
    }
}

impl<F: FieldElement> SparseVec<F> {
    pub fn new(mut entries: Vec<(usize, F)>) -> Self {
        entries.retain(|(_, c)| !c.is_zero());
        entries.sort_by_key(|(i, _)| *i);
        for w in entries.windows(2) {
            assert_ne!(w[0].0, w[1].0, "duplicate index in sparse vector");
        }
        SparseVec { entries }
    }

    pub fn unit(i: usize, one: F) -> Self {
        SparseVec { entries: vec![(i, one)] }
    }

    pub fn zero() -> Self {
        SparseVec { entries: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize) -> Option<&F> {
        match self.entries.binary_search_by_key(&i, |(j, _)| *j) {
            Ok(pos) => Some(&self.entries[pos].1),
            Err(_) => None,
        }
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return SparseVec::zero();
        }
        SparseVec { entries: self.entries.iter().map(|(i, a)| (*i, a.mul(c))).collect() }
    }

    /// self + c * other, merging sorted index lists.
    pub fn add_scaled(&self, other: &Self, c: &F) -> Self {
        if c.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() || j < other.entries.len() {
            let take_left = j >= other.entries.len()
                || (i < self.entries.len() && self.entries[i].0 < other.entries[j].0);
            let take_right = i >= self.entries.len()
                || (j < other.entries.len() && other.entries[j].0 < self.entries[i].0);
            if take_left {
                out.push(self.entries[i].clone());
                i += 1;
            } else if take_right {
                let (k, b) = &other.entries[j];
                out.push((*k, b.mul(c)));
                j += 1;
            } else {
                let (k, a) = &self.entries[i];
                let v = a.add(&other.entries[j].1.mul(c));
                if !v.is_zero() {
                    out.push((*k, v));
                }
                i += 1;
                j += 1;
            }
        }
        SparseVec { entries: out }
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|(i, _)| *i)
    }
}

/// Triangular elimination result: rule[c] expresses e_c over columns that are
/// either free or eliminated later in `order`; rule_row[c] records which
/// input relation row produced the rule.
pub struct TriangularQuotient<F = BigRational> {
    pub ncols: usize,
    pub rules: Vec<Option<SparseVec<F>>>,
    pub order: Vec<usize>,
    pub rule_row: Vec<Option<usize>>,
    pub free: Vec<usize>,
    pub free_pos: HashMap<usize, usize>,
}

impl<F: FieldElement> TriangularQuotient<F> {
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    pub fn rank(&self) -> usize {
        self.order.len()
    }

    /// Values on all ncols columns consistent with the relations, given the
    /// values on the free columns. One backward pass over the rules.
    pub fn lift_vector(&self, free_vals: &[F], zero: &F) -> Vec<F> {
        assert_eq!(free_vals.len(), self.free.len());
        let mut w: Vec<F> = vec![zero.clone(); self.ncols];
        for (&c, v) in self.free.iter().zip(free_vals) {
            w[c] = v.clone();
        }
        // rules[order[t]] reference only free columns and columns eliminated
        // after t, so resolve in reverse elimination order
        for &c in self.order.iter().rev() {
            let expr = self.rules[c].as_ref().unwrap();
            let mut acc = zero.clone();
            for (i, a) in &expr.entries {
                acc = acc.add(&a.mul(&w[*i]));
            }
            w[c] = acc;
        }
        w
    }

    /// Fully back-substituted class of a vector in free-column coordinates.
    pub fn reduce(&self, v: &SparseVec<F>, one: &F) -> SparseVec<F> {
        let mut term = v.clone();
        // substitute rules until only free columns remain; rules are
        // triangular so this terminates
        loop {
            let mut next = SparseVec::zero();
            let mut changed = false;
            for (j, a) in &term.entries {
                match &self.rules[*j] {
                    Some(sub) => {
                        next = next.add_scaled(sub, a);
                        changed = true;
                    }
                    None => next = next.add_scaled(&SparseVec::unit(*j, one.clone()), a),
                }
            }
            term = next;
            if !changed {
                break;
            }
        }
        SparseVec::new(
            term.entries.iter().map(|(i, c)| (self.free_pos[i], c.clone())).collect(),
        )
    }
}

/// Markowitz-pivoted sparse elimination of relation rows in ℚ^ncols (or any
/// field). `is_unit` restricts which coefficients may be pivots; passing a
/// p-unit test makes every rule coefficient p-integral. Returns the
/// triangular rule set; rank = number of rules.
pub fn eliminate<F: FieldElement>(
    ncols: usize,
    relations: &[SparseVec<F>],
    is_unit: impl Fn(&F) -> bool,
) -> TriangularQuotient<F> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let mut rules: Vec<Option<SparseVec<F>>> = vec![None; ncols];
    let mut rule_row: Vec<Option<usize>> = vec![None; ncols];
    let mut order: Vec<usize> = Vec::new();
    let mut rows: Vec<SparseVec<F>> = relations.to_vec();
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); ncols];
    let mut active: Vec<bool> = vec![true; rows.len()];
    for (r, row) in rows.iter().enumerate() {
        for i in row.indices() {
            col_rows[i].push(r);
        }
    }
    let mut col_count: Vec<usize> = col_rows.iter().map(|v| v.len()).collect();

    // lazy min-heap on (row nnz, row index); stale entries are skipped by
    // re-checking nnz on pop
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = BinaryHeap::new();
    for (r, row) in rows.iter().enumerate() {
        if !row.is_zero() {
            heap.push(Reverse((row.nnz(), r)));
        }
    }
    let mut blocked: Vec<usize> = Vec::new();

    while let Some(Reverse((nnz, pr))) = heap.pop() {
        if !active[pr] || rows[pr].is_zero() || rows[pr].nnz() != nnz {
            continue;
        }
        // within the shortest row, pivot on the allowed entry that touches
        // the fewest other rows, tie-broken by coefficient size
        let mut best: Option<(usize, u64, usize)> = None;
        for (i, c) in &rows[pr].entries {
            if !is_unit(c) {
                continue;
            }
            let key = (col_count[*i], c.complexity(), *i);
            match &best {
                Some(b) if *b <= key => {}
                _ => best = Some(key),
            }
        }
        let Some((_, _, pc)) = best else {
            blocked.push(pr);
            continue;
        };

        let row = rows[pr].clone();
        let c = row.get(pc).unwrap().clone();
        let minus_inv = c.inv().neg();
        let expr = SparseVec::new(
            row.entries
                .iter()
                .filter(|(i, _)| *i != pc)
                .map(|(i, a)| (*i, a.mul(&minus_inv)))
                .collect(),
        );
        active[pr] = false;
        for i in row.indices() {
            col_count[i] -= 1;
        }

        let users = std::mem::take(&mut col_rows[pc]);
        for r in users {
            if !active[r] || r == pr {
                continue;
            }
            let Some(coef) = rows[r].get(pc).cloned() else { continue };
            let before = std::mem::replace(&mut rows[r], SparseVec::zero());
            let mut updated =
                before.add_scaled(&SparseVec::unit(pc, coef.one_like()), &coef.neg());
            updated = updated.add_scaled(&expr, &coef);
            for i in before.indices() {
                col_count[i] -= 1;
            }
            for i in updated.indices() {
                col_count[i] += 1;
                col_rows[i].push(r);
            }
            if !updated.is_zero() {
                heap.push(Reverse((updated.nnz(), r)));
            }
            rows[r] = updated;
        }
        col_count[pc] = 0;

        rules[pc] = Some(expr);
        rule_row[pc] = Some(pr);
        order.push(pc);
        // a previously blocked row may have gained an admissible pivot
        if !blocked.is_empty() {
            for r in std::mem::take(&mut blocked) {
                if active[r] && !rows[r].is_zero() {
                    heap.push(Reverse((rows[r].nnz(), r)));
                }
            }
        }
    }

    for r in blocked {
        if active[r] && !rows[r].is_zero() {
            panic!("row {r} has no admissible pivot (unit-pivot constraint too strict)");
        }
    }

    let free: Vec<usize> = (0..ncols).filter(|i| rules[*i].is_none()).collect();
    let free_pos: HashMap<usize, usize> = free.iter().enumerate().map(|(p, i)| (*i, p)).collect();
    TriangularQuotient { ncols, rules, order, rule_row, free, free_pos }
}

/// Quotient of ℚ^ncols by the row span of a sparse relation matrix, with
/// fully back-substituted rewrite rows for every column.
pub struct SparseQuotient {
    pub ncols: usize,
    pub free: Vec<usize>,
    pub free_pos: HashMap<usize, usize>,
    pub rewrite: Vec<SparseVec>,
    pub rank: usize,
}

impl SparseQuotient {
    pub fn reduce_unit(&self, i: usize) -> &SparseVec {
        &self.rewrite[i]
    }

    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::zero();
        for (i, c) in &v.entries {
            out = out.add_scaled(&self.rewrite[*i], c);
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }
}

/// Quotient with flattened per-column rewrite rows. Suitable for small
/// spaces; large spaces should use `eliminate` directly.
pub fn sparse_quotient(ncols: usize, relations: Vec<SparseVec>) -> SparseQuotient {
    let tri = eliminate(ncols, &relations, |_| true);
    flatten(tri)
}

fn flatten(tri: TriangularQuotient) -> SparseQuotient {
    let one = BigRational::one();
    let mut flat: Vec<Option<SparseVec>> = vec![None; tri.ncols];
    // reverse elimination order: each rule then references only free columns
    // or already-flattened ones
    for &c in tri.order.iter().rev() {
        let expr = tri.rules[c].as_ref().unwrap();
        let mut acc = SparseVec::zero();
        for (i, a) in &expr.entries {
            match &flat[*i] {
                Some(sub) => acc = acc.add_scaled(sub, a),
                None => acc = acc.add_scaled(&SparseVec::unit(*i, one.clone()), a),
            }
        }
        flat[c] = Some(acc);
    }
    let to_free = |v: &SparseVec| {
        SparseVec::new(v.entries.iter().map(|(i, c)| (tri.free_pos[i], c.clone())).collect())
    };
    let mut rewrite = Vec::with_capacity(tri.ncols);
    for i in 0..tri.ncols {
        match &flat[i] {
            Some(expr) => rewrite.push(to_free(expr)),
            None => rewrite.push(SparseVec::unit(tri.free_pos[&i], one.clone())),
        }
    }
    let rank = tri.order.len();
    SparseQuotient { ncols: tri.ncols, free: tri.free, free_pos: tri.free_pos, rewrite, rank }
}

pub fn qbig(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{qvec, ExactMatrix};
    use num_traits::ToPrimitive;

    fn sv(pairs: &[(usize, i64)]) -> SparseVec {
        SparseVec::new(pairs.iter().map(|(i, c)| (*i, qbig(*c))).collect())
    }

    #[test]
    fn add_scaled_merges() {
        let a = sv(&[(0, 1), (2, 3)]);
        let b = sv(&[(1, 2), (2, -3)]);
        let s = a.add_scaled(&b, &qbig(1));
        assert_eq!(s, sv(&[(0, 1), (1, 2)]));
    }

    #[test]
    fn quotient_matches_dense_kernel_dim() {
        let rels = vec![sv(&[(0, 1), (1, 1)]), sv(&[(1, 1), (2, 1)]), sv(&[(0, 1), (2, 1)])];
        let q = sparse_quotient(5, rels.clone());
        let m = ExactMatrix::from_rows(
            rels.iter()
                .map(|r| {
                    qvec(
                        (0..5)
                            .map(|i| r.get(i).cloned().unwrap_or_else(|| qbig(0)))
                            .map(|c| c.numer().to_i64().unwrap())
                            .collect::<Vec<_>>(),
                    )
                })
                .collect(),
        );
        assert_eq!(q.dim(), 5 - m.rank());
        for r in &rels {
            assert!(q.reduce(r).is_zero());
        }
        for &i in &q.free {
            assert_eq!(*q.reduce_unit(i), SparseVec::unit(q.free_pos[&i], qbig(1)));
        }
    }

    #[test]
    fn lift_vector_satisfies_relations() {
        let rels = vec![sv(&[(0, 1), (1, 2), (3, 1)]), sv(&[(1, 1), (2, 1)]), sv(&[(3, 1), (4, -1)])];
        let tri = eliminate(5, &rels, |_| true);
        let free_vals: Vec<_> = (0..tri.dim()).map(|i| qbig(i as i64 + 1)).collect();
        let w = tri.lift_vector(&free_vals, &qbig(0));
        for r in &rels {
            let mut acc = qbig(0);
            for (i, c) in &r.entries {
                acc += c * &w[*i];
            }
            assert_eq!(acc, qbig(0), "relation not satisfied by lift");
        }
        // free slots carry the assigned values
        for (&c, v) in tri.free.iter().zip(&free_vals) {
            assert_eq!(&w[c], v);
        }
    }

    #[test]
    fn unit_pivot_constraint_yields_p_integral_rules() {
        // relation 3*e0 + e1 = 0 must pivot on e1 when 3 is not a unit
        let rels = vec![sv(&[(0, 3), (1, 1)])];
        let tri = eliminate(2, &rels, |c: &BigRational| {
            c.numer().to_i64().map(|n| n % 3 != 0).unwrap_or(true)
        });
        assert!(tri.rules[1].is_some());
        assert!(tri.rules[0].is_none());
        let expr = tri.rules[1].as_ref().unwrap();
        assert!(expr.entries.iter().all(|(_, c)| c.denom().to_i64() == Some(1)));
    }

    #[test]
    fn random_quotient_kills_all_relations() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = 12;
            let rels: Vec<SparseVec> = (0..8)
                .map(|_| {
                    sv(&(0..3)
                        .map(|_| (rng.gen_range(0..n), rng.gen_range(-3..4)))
                        .collect::<Vec<_>>()
                        .into_iter()
                        .fold(Vec::new(), |mut acc: Vec<(usize, i64)>, (i, c)| {
                            if !acc.iter().any(|(j, _)| *j == i) && c != 0 {
                                acc.push((i, c));
                            }
                            acc
                        }))
                })
                .collect();
            let q = sparse_quotient(n, rels.clone());
            for r in &rels {
                assert!(q.reduce(r).is_zero());
            }
        }
    }
}
