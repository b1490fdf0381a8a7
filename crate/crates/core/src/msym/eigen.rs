//! Eigensymbol extraction and verification.
//!
//! An eigensymbol is the functional on generator columns that satisfies all
//! Manin relations, the transpose Hecke equations φ∘T_ℓ = a_ℓ·φ, and a star
//! eigen-equation φ∘ι = sign·φ. Small spaces are cut by exact dense linear
//! algebra over ℚ or over the Hecke field; the result is verified exactly on
//! every generator column, including Hecke operators not used in the cut.

use super::hecke::{hecke_column_image, hecke_matrix_on_quotient, merel_matrices, star_matrix_on_quotient};
use super::paths::{act_poly, ev_path, RatTable};
use super::space::{ManinSpace, MsymError};
use crate::arith::{ExactMatrix, FieldElement};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

/// Lift values on the free generators to all columns through the triangular
/// relation rules. `mul_rat` scales a value by a rational rule coefficient.
pub fn lift_free_values<F: Clone>(
    space: &ManinSpace,
    free_vals: &[F],
    zero: F,
    add: impl Fn(&F, &F) -> F,
    mul_rat: impl Fn(&F, &BigRational) -> F,
) -> Vec<F> {
    let tri = &space.tri;
    assert_eq!(free_vals.len(), tri.free.len());
    let mut w: Vec<F> = vec![zero.clone(); tri.ncols];
    for (&c, v) in tri.free.iter().zip(free_vals) {
        w[c] = v.clone();
    }
    for &c in tri.order.iter().rev() {
        let expr = tri.rules[c].as_ref().unwrap();
        let mut acc = zero.clone();
        for (i, a) in &expr.entries {
            acc = add(&acc, &mul_rat(&w[*i], a));
        }
        w[c] = acc;
    }
    w
}

/// Cut the joint eigenspace of the transpose Hecke matrices and the star
/// involution down to a line, over any field containing ℚ.
/// Returns the values of the eigensymbol on all generator columns.
pub fn cut_eigensymbol_generic<F: FieldElement>(
    space: &ManinSpace,
    aps: &[(i64, F)],
    sign: i64,
    from_rat: impl Fn(&BigRational) -> F,
) -> Result<Vec<F>, MsymError> {
    let d = space.dim();
    if d == 0 {
        return Err(MsymError::EmptyCut);
    }
    let sample = from_rat(&BigRational::one());
    let zero = sample.zero_like();

    // current basis of the remaining subspace, as columns of length d
    let mut basis: Vec<Vec<F>> =
        (0..d).map(|i| (0..d).map(|r| if r == i { sample.one_like() } else { zero.clone() }).collect()).collect();

    let mut constraints: Vec<(Vec<Vec<BigRational>>, F)> = Vec::new();
    for (ell, a) in aps {
        constraints.push((hecke_matrix_on_quotient(space, *ell), a.clone()));
    }
    constraints.push((
        star_matrix_on_quotient(space),
        from_rat(&BigRational::from(BigInt::from(sign))),
    ));

    for (mat, a) in &constraints {
        if basis.is_empty() {
            return Err(MsymError::EmptyCut);
        }
        // rows of (M^t - a) applied to the basis: A[r][b] over basis vectors
        let k = basis.len();
        let mut rows: Vec<Vec<F>> = vec![vec![zero.clone(); k]; d];
        for (bidx, bc) in basis.iter().enumerate() {
            // (M^t u)_r = Σ_i M[i][r] u_i
            for r in 0..d {
                let mut acc = zero.clone();
                for i in 0..d {
                    if !num_traits::Zero::is_zero(&mat[i][r]) {
                        acc = acc.add(&bc[i].mul(&from_rat(&mat[i][r])));
                    }
                }
                acc = acc.sub(&a.mul(&bc[r]));
                rows[r][bidx] = acc;
            }
        }
        let amat = ExactMatrix::from_rows(rows);
        let ker = amat.kernel_basis();
        let mut next: Vec<Vec<F>> = Vec::with_capacity(ker.len());
        for coef in &ker {
            let mut v = vec![zero.clone(); d];
            for (bidx, c) in coef.iter().enumerate() {
                if !c.is_zero() {
                    for r in 0..d {
                        v[r] = v[r].add(&basis[bidx][r].mul(c));
                    }
                }
            }
            next.push(v);
        }
        basis = next;
    }

    match basis.len() {
        0 => Err(MsymError::EmptyCut),
        1 => {
            let u = basis.pop().unwrap();
            Ok(lift_free_values(
                space,
                &u,
                zero,
                |a, b| a.add(b),
                |a, c| a.mul(&from_rat(c)),
            ))
        }
        n => Err(MsymError::AmbiguousCut(n)),
    }
}

/// Exact check of φ∘T_ℓ = a_ℓ·φ on every generator column.
pub fn verify_hecke_eigen<F: FieldElement>(
    space: &ManinSpace,
    values: &[F],
    ell: i64,
    a: &F,
    from_rat: impl Fn(&BigRational) -> F,
) -> Result<(), MsymError> {
    let mats = merel_matrices(ell);
    for col in 0..space.ncols {
        let img = hecke_column_image(space, &mats, col);
        let mut acc = values[0].zero_like();
        for (i, c) in &img.entries {
            acc = acc.add(&values[*i].mul(&from_rat(c)));
        }
        if acc != a.mul(&values[col]) {
            return Err(MsymError::VerificationFailed(format!(
                "T_{ell} eigen-equation fails on column {col}"
            )));
        }
    }
    Ok(())
}

/// Exact check that the values satisfy every Manin relation and the star
/// eigen-equation.
pub fn verify_relations_and_star<F: FieldElement>(
    space: &ManinSpace,
    values: &[F],
    sign: i64,
    from_rat: impl Fn(&BigRational) -> F,
) -> Result<(), MsymError> {
    for (ri, rel) in space.relations.iter().enumerate() {
        let mut acc = values[0].zero_like();
        for (i, c) in &rel.entries {
            acc = acc.add(&values[*i].mul(&from_rat(c)));
        }
        if !acc.is_zero() {
            return Err(MsymError::VerificationFailed(format!("relation {ri} violated")));
        }
    }
    let sgn = from_rat(&BigRational::from(BigInt::from(sign)));
    for col in 0..space.ncols {
        let (c2, sg) = space.star_image(col);
        let lhs = values[c2].mul(&from_rat(&BigRational::from(BigInt::from(sg))));
        if lhs != sgn.mul(&values[col]) {
            return Err(MsymError::VerificationFailed(format!(
                "star eigen-equation fails on column {col}"
            )));
        }
    }
    Ok(())
}

/// The Fricke involution W_N = [[0,-1],[N,0]] acts on an eigensymbol by an
/// exact scalar c with c² = N^(k-2). Returns c, computed as a ratio of path
/// values and cross-checked over several probe paths.
pub fn fricke_scalar(space: &ManinSpace, table: &RatTable) -> Result<BigRational, MsymError> {
    let n = space.level as i128;
    let m = space.m;
    let mut found: Option<BigRational> = None;
    let mut checked = 0usize;
    // probe {∞ -> a/q}: image under W is {-q/(N a) <- 0} with Q replaced by Q|W
    for q in 2..60i128 {
        for a in 1..q {
            if num_integer::Integer::gcd(&a, &q) != 1 {
                continue;
            }
            for j in 0..=m {
                // Q = X^j Y^(m-j)
                let mut poly = vec![0i128; m as usize + 1];
                poly[j as usize] = 1;
                let base = ev_path(space, table, (1, 0), (a, q), &poly);
                if num_traits::Zero::is_zero(&base) {
                    continue;
                }
                let wpoly = act_poly([0, -1, n, 0], &poly, m);
                // W∞ = 0/1, W(a/q) = -q/(N a)
                let img = ev_path(space, table, (0, 1), (-q, n * a), &wpoly);
                let c = img / &base;
                match &found {
                    None => found = Some(c),
                    Some(prev) => {
                        if *prev != c {
                            return Err(MsymError::FrickeInconsistent);
                        }
                    }
                }
                checked += 1;
                if checked >= 8 {
                    let c = found.unwrap();
                    let nm = BigRational::from(BigInt::from(n).pow(m));
                    if &c * &c != nm {
                        return Err(MsymError::FrickeInconsistent);
                    }
                    return Ok(c);
                }
            }
        }
    }
    Err(MsymError::Internal("no nonzero probe path for Fricke ratio".into()))
}

/// Sign of the functional equation of f, from the Fricke scalar. Normalized
/// so that the level-11 weight-2 form has sign +1 (its L-function does not
/// vanish at the center, forcing an even functional equation).
pub fn functional_equation_sign(space: &ManinSpace, table: &RatTable) -> Result<i64, MsymError> {
    let c = fricke_scalar(space, table)?;
    let raw = if c.is_positive() { 1i64 } else { -1 };
    // ε = i^k · (Fricke pseudo-eigenvalue); in weight 2 the symbol-level
    // ratio computed here carries an extra -1 relative to ε, fixed by the
    // level-11 calibration and pinned by the wrong-parity vanishing tests
    let k_twist = if space.weight % 4 == 2 { -1 } else { 1 };
    Ok(raw * k_twist * FRICKE_CALIBRATION)
}

/// Global calibration of the symbol-level Fricke ratio against the analytic
/// functional equation sign; fixed by the level-11 form and cross-checked by
/// the wrong-parity vanishing of every twisted sum.
pub const FRICKE_CALIBRATION: i64 = 1;

/// An eigensymbol with exact rational values on every generator column.
pub struct Eigensymbol {
    pub sign: i64,
    pub values: RatTable,
}

impl Eigensymbol {
    /// Cut, lift and fully verify a rational eigensymbol.
    pub fn cut_rational(
        space: &ManinSpace,
        aps: &[(i64, BigRational)],
        sign: i64,
    ) -> Result<Eigensymbol, MsymError> {
        let values = cut_eigensymbol_generic(space, aps, sign, |c: &BigRational| c.clone())?;
        verify_relations_and_star(space, &values, sign, |c| c.clone())?;
        for (ell, a) in aps {
            verify_hecke_eigen(space, &values, *ell, a, |c| c.clone())?;
        }
        Ok(Eigensymbol { sign, values: RatTable(values) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::CurveDescriptor;
    use crate::msym::paths::{ev_from_infinity, evaluate_lambda, ValueTable};

    fn rat(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    fn curve(label: &str, ainvs: [i64; 5], conductor: i64) -> CurveDescriptor {
        CurveDescriptor { label: label.into(), ainvs, conductor, ap: Default::default() }
    }

    fn e11() -> CurveDescriptor {
        curve("11a1", [0, -1, 1, -10, -20], 11)
    }

    fn e43() -> CurveDescriptor {
        curve("43a1", [0, 1, 1, 0, 0], 43)
    }

    #[test]
    fn cut_11a_both_signs_and_heldout_hecke() {
        let space = ManinSpace::build(11, 2).unwrap();
        let e = e11();
        for sign in [1i64, -1] {
            // cut uses only T_2; every other good prime is held out
            let phi =
                Eigensymbol::cut_rational(&space, &[(2, rat(e.ap_count(2).unwrap()))], sign).unwrap();
            for ell in [3i64, 5, 7, 13, 17, 19] {
                let a = rat(e.ap_count(ell).unwrap());
                verify_hecke_eigen(&space, &phi.values.0, ell, &a, |c| c.clone()).unwrap();
            }
        }
    }

    #[test]
    fn cut_43a_and_heldout_hecke() {
        let space = ManinSpace::build(43, 2).unwrap();
        let e = e43();
        for sign in [1i64, -1] {
            let phi =
                Eigensymbol::cut_rational(&space, &[(2, rat(e.ap_count(2).unwrap()))], sign).unwrap();
            for ell in [3i64, 5, 7, 11, 13, 17, 19] {
                let a = rat(e.ap_count(ell).unwrap());
                verify_hecke_eigen(&space, &phi.values.0, ell, &a, |c| c.clone()).unwrap();
            }
        }
    }

    #[test]
    fn ambiguous_and_empty_cuts_are_reported() {
        let space = ManinSpace::build(43, 2).unwrap();
        // star alone leaves the full 3-dimensional plus part
        match Eigensymbol::cut_rational(&space, &[], 1) {
            Err(MsymError::AmbiguousCut(n)) => assert!(n > 1),
            other => panic!("expected ambiguous cut, got {:?}", other.map(|_| ()).err()),
        }
        // 5 is not a T_2 eigenvalue on the cuspidal part
        match Eigensymbol::cut_rational(&space, &[(2, rat(5))], 1) {
            Err(MsymError::EmptyCut) => {}
            other => panic!("expected empty cut, got {:?}", other.map(|_| ()).err()),
        }
    }

    /// q-expansion of eta(tau)^4 eta(5 tau)^4 up to q^bound, the unique
    /// newform of weight 4 on Gamma_0(5). Independent oracle for its
    /// Hecke eigenvalues.
    fn eta_5_4_coeffs(bound: usize) -> Vec<i64> {
        // expand prod (1 - q^n)^4 * prod (1 - q^(5n))^4, then shift by q
        let mut f = vec![0i64; bound + 1];
        f[0] = 1;
        let mult = |f: &mut Vec<i64>, step: usize, bound: usize| {
            for _ in 0..4 {
                for _rep in 0..1 {
                    let mut g = vec![0i64; bound + 1];
                    for i in 0..=bound {
                        if f[i] == 0 {
                            continue;
                        }
                        g[i] += f[i];
                        if i + step <= bound {
                            g[i + step] -= f[i];
                        }
                    }
                    *f = g;
                }
            }
        };
        for n in 1..=bound {
            mult(&mut f, n, bound);
            if 5 * n <= bound {
                mult(&mut f, 5 * n, bound);
            }
        }
        let mut out = vec![0i64; bound + 1];
        for i in 0..bound {
            out[i + 1] = f[i];
        }
        out
    }

    #[test]
    fn weight_4_level_5_cut_matches_eta_product() {
        let a = eta_5_4_coeffs(20);
        assert_eq!(a[1], 1);
        let space = ManinSpace::build(5, 4).unwrap();
        for sign in [1i64, -1] {
            let phi = Eigensymbol::cut_rational(&space, &[(2, rat(a[2]))], sign).unwrap();
            for ell in [3i64, 7, 11, 13, 17, 19] {
                verify_hecke_eigen(&space, &phi.values.0, ell, &rat(a[ell as usize]), |c| c.clone())
                    .unwrap();
            }
        }
    }

    #[test]
    fn path_invariance_under_gamma0() {
        for (level, weight) in [(11i64, 2u32), (5, 4)] {
            let space = ManinSpace::build(level, weight).unwrap();
            let a2 = if weight == 2 { rat(-2) } else { rat(eta_5_4_coeffs(2)[2]) };
            let phi = Eigensymbol::cut_rational(&space, &[(2, a2)], 1).unwrap();
            let table = &phi.values;
            let n = level as i128;
            let gammas: [[i128; 4]; 3] =
                [[1, 0, n, 1], [1, 1, n, n + 1], [1, 0, 2 * n, 1]];
            for g in gammas {
                assert_eq!(g[0] * g[3] - g[1] * g[2], 1);
                assert_eq!(g[2].rem_euclid(n), 0);
                for (p, q) in [(0i128, 1i128), (1, 3), (2, 7), (3, 1)] {
                    for j in 0..=space.m {
                        let mut poly = vec![0i128; space.m as usize + 1];
                        poly[j as usize] = 1;
                        // phi({g a -> g b}, Q) = phi({a -> b}, Q|g)
                        let lhs = ev_path(
                            &space,
                            table,
                            (g[0], g[2]),
                            (g[0] * p + g[1] * q, g[2] * p + g[3] * q),
                            &poly,
                        );
                        let rhs = ev_path(&space, table, (1, 0), (p, q), &act_poly(g, &poly, space.m));
                        assert_eq!(lhs, rhs, "invariance fails for gamma {g:?} path {p}/{q} j {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn lambda_periodicity_and_degenerate_path() {
        let space = ManinSpace::build(11, 2).unwrap();
        let phi = Eigensymbol::cut_rational(&space, &[(2, rat(-2))], 1).unwrap();
        let table = &phi.values;
        for n in [3i128, 7, 13] {
            for a in 1..n {
                let v1 = evaluate_lambda(&space, table, 0, a, n);
                let v2 = evaluate_lambda(&space, table, 0, a + n, n);
                assert_eq!(v1, v2, "lambda must only depend on a mod n");
            }
        }
        let z = ev_path(&space, table, (2, 7), (2, 7), &[1, 0]);
        assert!(num_traits::Zero::is_zero(&z));
        let z = ev_from_infinity(&space, table, 3, 0, &[1, 0]);
        assert!(num_traits::Zero::is_zero(&z), "degenerate target is the zero path");
    }

    #[test]
    fn hecke_compatibility_at_path_level() {
        // T_ell Phi({a,b}, Q) = sum over coset reps delta of the double coset
        // Gamma_0(N) diag(1, ell) Gamma_0(N) of Phi({delta a, delta b}, Q|adj(delta))
        let cases: [(i64, u32, i64); 2] = [(11, 2, -2), (5, 4, -4)];
        for (level, weight, a2) in cases {
            let space = ManinSpace::build(level, weight).unwrap();
            let phi = Eigensymbol::cut_rational(&space, &[(2, rat(a2))], 1).unwrap();
            let table = &phi.values;
            let curve = e11();
            let eta = eta_5_4_coeffs(7);
            for ell in [3i64, 7] {
                let a = if weight == 2 {
                    rat(curve.ap_count(ell).unwrap())
                } else {
                    rat(eta[ell as usize])
                };
                let le = ell as i128;
                let mut reps: Vec<[i128; 4]> = (0..le).map(|u| [1, u, 0, le]).collect();
                reps.push([le, 0, 0, 1]);
                for (r, s) in [(1i128, 4i128), (2, 9), (1, 1), (0, 1)] {
                    for j in 0..=space.m {
                        let mut poly = vec![0i128; space.m as usize + 1];
                        poly[j as usize] = 1;
                        let base = ev_path(&space, table, (1, 0), (r, s), &poly);
                        let mut acc = table.zero();
                        for g in &reps {
                            let adj = [g[3], -g[1], -g[2], g[0]];
                            let q = act_poly(adj, &poly, space.m);
                            let from = (g[0], g[2]);
                            let to = (g[0] * r + g[1] * s, g[2] * r + g[3] * s);
                            acc += ev_path(&space, table, from, to, &q);
                        }
                        assert_eq!(acc, &a * &base, "T_{ell} path compatibility at ({level},{weight})");
                    }
                }
            }
        }
    }

    #[test]
    fn fricke_scalar_and_sign_calibration() {
        let s11 = ManinSpace::build(11, 2).unwrap();
        let p11 = Eigensymbol::cut_rational(&s11, &[(2, rat(-2))], 1).unwrap();
        let c11 = fricke_scalar(&s11, &p11.values).unwrap();
        let s43 = ManinSpace::build(43, 2).unwrap();
        let p43 = Eigensymbol::cut_rational(&s43, &[(2, rat(-2))], 1).unwrap();
        let c43 = fricke_scalar(&s43, &p43.values).unwrap();
        // weight 2: c^2 = 1 and the two curves have opposite L-function parity
        assert_eq!(&c11 * &c11, rat(1));
        assert_eq!(&c43 * &c43, rat(1));
        assert_eq!(c11, -c43.clone());
        assert_eq!(functional_equation_sign(&s11, &p11.values).unwrap(), 1);
        assert_eq!(functional_equation_sign(&s43, &p43.values).unwrap(), -1);
    }
}
