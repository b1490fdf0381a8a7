//! Presentation of the weight-k Manin symbol space for Γ₀(N).
//!
//! Columns are pairs (x, j) with x ∈ P¹(ℤ/N) and 0 ≤ j ≤ k-2 indexing the
//! monomial X^j Y^{k-2-j}. The two-term (σ) and three-term (τ) relations are
//! assembled exactly and eliminated into a triangular quotient. The boundary
//! map to cusp classes, the star involution, and cusp equivalence for Γ₀(N)
//! live here as well.

use super::p1::{lift_to_sl2z, xgcd, P1};
use crate::arith::sparse::{eliminate, SparseVec, TriangularQuotient};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MsymError {
    #[error("weight must be an even integer >= 2, got {0}")]
    BadWeight(u32),
    #[error("level must be >= 1, got {0}")]
    BadLevel(i64),
    #[error("eigenvalue system cut the space to dimension {0}, expected 1")]
    AmbiguousCut(usize),
    #[error("eigenvalue system is inconsistent: cut dimension is 0")]
    EmptyCut,
    #[error("eigen verification failed: {0}")]
    VerificationFailed(String),
    #[error("Fricke ratio is not constant across probe paths")]
    FrickeInconsistent,
    #[error("{0}")]
    Internal(String),
}

/// Coefficients of (aX + bY)^j (cX + dY)^(m-j) on the monomials X^t Y^(m-t),
/// index t = power of X. Checked i128 arithmetic throughout.
pub fn linear_power_coeffs(a: i128, b: i128, c: i128, d: i128, j: u32, m: u32) -> Vec<i128> {
    let pow_coeffs = |p: i128, q: i128, e: u32| -> Vec<i128> {
        // (pX + qY)^e
        let mut out = vec![0i128; e as usize + 1];
        let mut binom = 1i128;
        for t in 0..=e {
            // coeff of X^t: C(e,t) p^t q^(e-t)
            let mut v = binom;
            for _ in 0..t {
                v = v.checked_mul(p).expect("coefficient overflow");
            }
            for _ in 0..(e - t) {
                v = v.checked_mul(q).expect("coefficient overflow");
            }
            out[t as usize] = v;
            if t < e {
                binom = binom * (e - t) as i128 / (t + 1) as i128;
            }
        }
        out
    };
    let u = pow_coeffs(a, b, j);
    let v = pow_coeffs(c, d, m - j);
    let mut out = vec![0i128; m as usize + 1];
    for (s, us) in u.iter().enumerate() {
        for (t, vt) in v.iter().enumerate() {
            out[s + t] = out[s + t]
                .checked_add(us.checked_mul(*vt).expect("coefficient overflow"))
                .expect("coefficient overflow");
        }
    }
    out
}

fn qint(n: i128) -> BigRational {
    BigRational::from(BigInt::from(n))
}

/// A cusp p/q in lowest terms with q >= 0; infinity is (1, 0).
pub fn normalize_cusp(p: i128, q: i128) -> (i128, i128) {
    if q == 0 {
        return (1, 0);
    }
    let g = p.gcd(&q);
    let (mut p, mut q) = (p / g, q / g);
    if q < 0 {
        p = -p;
        q = -q;
    }
    (p, q)
}

/// Γ₀(N)-equivalence of cusps p1/q1 and p2/q2 (in lowest terms):
/// s1 q2 ≡ s2 q1 (mod gcd(q1 q2, N)) with p_i s_i ≡ 1 (mod q_i).
pub fn cusps_equivalent(n: i64, c1: (i128, i128), c2: (i128, i128)) -> bool {
    let n = n as i128;
    let (p1, q1) = normalize_cusp(c1.0, c1.1);
    let (p2, q2) = normalize_cusp(c2.0, c2.1);
    let inv_mod = |p: i128, q: i128| -> i128 {
        if q == 0 {
            // p = ±1 at the cusp at infinity
            return p;
        }
        let e = i128::extended_gcd(&p.rem_euclid(q), &q);
        debug_assert_eq!(e.gcd, 1);
        e.x.rem_euclid(q.max(1))
    };
    let s1 = inv_mod(p1, q1);
    let s2 = inv_mod(p2, q2);
    let g = (q1 * q2).gcd(&n);
    if g == 0 {
        // both cusps are infinity
        return true;
    }
    (s1 * q2 - s2 * q1).rem_euclid(g) == 0
}

/// The Manin symbol presentation of weight-k modular symbols for Γ₀(N).
pub struct ManinSpace {
    pub level: i64,
    pub weight: u32,
    /// m = k - 2, the degree of the polynomial part.
    pub m: u32,
    pub p1: P1,
    /// SL₂(ℤ) lift per P¹ class, bottom row in the class.
    pub lifts: Vec<[i64; 4]>,
    pub ncols: usize,
    pub relations: Vec<SparseVec>,
    pub tri: TriangularQuotient,
    /// Representative (p, q) per cusp class of Γ₀(N).
    pub cusps: Vec<(i128, i128)>,
    /// Cusp class index of each P¹ class endpoint pair: (class of a/c, class of b/d).
    cusp_of_lift: Vec<(usize, usize)>,
}

impl ManinSpace {
    pub fn build(level: i64, weight: u32) -> Result<ManinSpace, MsymError> {
        Self::build_with_pivot_constraint(level, weight, None)
    }

    /// Build with pivots restricted to p-units, so the triangular rules can
    /// later be reduced mod powers of p.
    pub fn build_with_pivot_constraint(
        level: i64,
        weight: u32,
        pivot_unit_prime: Option<u64>,
    ) -> Result<ManinSpace, MsymError> {
        if weight < 2 || weight % 2 != 0 {
            return Err(MsymError::BadWeight(weight));
        }
        if level < 1 {
            return Err(MsymError::BadLevel(level));
        }
        let m = weight - 2;
        let p1 = P1::new(level);
        let mu = p1.len();
        let width = (m + 1) as usize;
        let ncols = mu * width;
        let col = |x: usize, j: usize| x * width + j;

        // sigma = [[0,-1],[1,0]]: (c:d)σ = (d:-c), Q_j|σ = (-1)^j X^(m-j) Y^j
        // tau = [[0,-1],[1,-1]]: (c:d)τ = (d:-c-d), Q_j|τ = (-Y)^j (X-Y)^(m-j)
        // tau² = [[-1,1],[-1,0]]: (c:d)τ² = (-c-d:c), Q_j|τ² = (Y-X)^j (-X)^(m-j)
        let act = |x: usize, g: [i64; 4]| -> usize {
            let (c, d) = p1.list[x];
            p1.index(c * g[0] + d * g[2], c * g[1] + d * g[3])
                .expect("unimodular action stays in P1")
        };
        let sigma = [0i64, -1, 1, 0];
        let tau = [0i64, -1, 1, -1];
        let tau2 = [-1i64, 1, -1, 0];

        let mut relations: Vec<SparseVec> = Vec::new();
        for x in 0..mu {
            let xs = act(x, sigma);
            if x < xs || (x == xs) {
                for j in 0..=m {
                    if x == xs && j > m - j {
                        continue;
                    }
                    let sign = if j % 2 == 0 { 1 } else { -1 };
                    let mut ent = vec![(col(x, j as usize), qint(1))];
                    let other = (col(xs, (m - j) as usize), qint(sign));
                    if other.0 == ent[0].0 {
                        ent[0].1 += other.1;
                    } else {
                        ent.push(other);
                    }
                    relations.push(SparseVec::new(ent));
                }
            }
        }
        for x in 0..mu {
            let xt = act(x, tau);
            let xt2 = act(x, tau2);
            // one relation row set per τ-orbit
            if x <= xt && x <= xt2 {
                for j in 0..=m {
                    let mut ent: Vec<(usize, BigRational)> = vec![(col(x, j as usize), qint(1))];
                    let ct = linear_power_coeffs(
                        tau[0] as i128,
                        tau[1] as i128,
                        tau[2] as i128,
                        tau[3] as i128,
                        j,
                        m,
                    );
                    let ct2 = linear_power_coeffs(
                        tau2[0] as i128,
                        tau2[1] as i128,
                        tau2[2] as i128,
                        tau2[3] as i128,
                        j,
                        m,
                    );
                    for (t, c) in ct.iter().enumerate() {
                        if *c != 0 {
                            ent.push((col(xt, t), qint(*c)));
                        }
                    }
                    for (t, c) in ct2.iter().enumerate() {
                        if *c != 0 {
                            ent.push((col(xt2, t), qint(*c)));
                        }
                    }
                    // the same column can appear several times; accumulate
                    let mut acc: std::collections::BTreeMap<usize, BigRational> =
                        std::collections::BTreeMap::new();
                    for (i, c) in ent {
                        *acc.entry(i).or_insert_with(|| qint(0)) += c;
                    }
                    relations.push(SparseVec::new(acc.into_iter().collect()));
                }
            }
        }

        let is_unit: Box<dyn Fn(&BigRational) -> bool> = match pivot_unit_prime {
            None => Box::new(|_: &BigRational| true),
            Some(p) => {
                let pb = BigInt::from(p);
                Box::new(move |c: &BigRational| {
                    use num_traits::Zero;
                    !(c.numer() % &pb).is_zero() && !(c.denom() % &pb).is_zero()
                })
            }
        };

        let tri = eliminate(ncols, &relations, |c| is_unit(c));

        let lifts: Vec<[i64; 4]> = p1.list.iter().map(|&(c, d)| lift_to_sl2z(level, c, d)).collect();

        // cusp classes from the lift endpoints a/c and b/d
        let mut cusps: Vec<(i128, i128)> = Vec::new();
        let class_of = |cusp: (i128, i128), cusps: &mut Vec<(i128, i128)>| -> usize {
            let cusp = normalize_cusp(cusp.0, cusp.1);
            for (i, &rep) in cusps.iter().enumerate() {
                if cusps_equivalent(level, rep, cusp) {
                    return i;
                }
            }
            cusps.push(cusp);
            cusps.len() - 1
        };
        let mut cusp_of_lift = Vec::with_capacity(mu);
        for g in &lifts {
            let head = class_of((g[0] as i128, g[2] as i128), &mut cusps);
            let tail = class_of((g[1] as i128, g[3] as i128), &mut cusps);
            cusp_of_lift.push((head, tail));
        }

        Ok(ManinSpace {
            level,
            weight,
            m,
            p1,
            lifts,
            ncols,
            relations,
            tri,
            cusps,
            cusp_of_lift,
        })
    }

    pub fn width(&self) -> usize {
        (self.m + 1) as usize
    }

    pub fn col(&self, x: usize, j: usize) -> usize {
        debug_assert!(j <= self.m as usize);
        x * self.width() + j
    }

    pub fn col_parts(&self, col: usize) -> (usize, usize) {
        (col / self.width(), col % self.width())
    }

    /// Dimension of the full Manin symbol space (quotient by relations).
    pub fn dim(&self) -> usize {
        self.tri.dim()
    }

    /// Boundary of the column (x, j): Q_j(a, c)·[a/c] - Q_j(b, d)·[b/d] over
    /// cusp classes, with [[a,b],[c,d]] the lift of x.
    pub fn boundary_row(&self, col: usize) -> Vec<(usize, BigRational)> {
        let (x, j) = self.col_parts(col);
        let (head, tail) = self.cusp_of_lift[x];
        let m = self.m as usize;
        // the generator is (Q|g⁻¹)·g{0,∞} with Q = X^j Y^(m-j); evaluating
        // Q|g⁻¹ homogeneously at the endpoints g∞ = a/c and g0 = b/d
        // collapses to Q(1,0) and Q(0,1)
        let mut out: Vec<(usize, BigRational)> = Vec::new();
        let hv = if j == m { qint(1) } else { qint(0) };
        let tv = if j == 0 { qint(-1) } else { qint(0) };
        if head == tail {
            let s = hv + tv;
            if !num_traits::Zero::is_zero(&s) {
                out.push((head, s));
            }
        } else {
            if !num_traits::Zero::is_zero(&hv) {
                out.push((head, hv));
            }
            if !num_traits::Zero::is_zero(&tv) {
                out.push((tail, tv));
            }
        }
        out
    }

    /// Dimension of the cuspidal subspace: kernel of the boundary map on the
    /// relation quotient. Equals 2·dim S_k(Γ₀(N)).
    pub fn cuspidal_dim(&self) -> usize {
        use crate::arith::ExactMatrix;
        let d = self.dim();
        if d == 0 {
            return 0;
        }
        let nc = self.cusps.len();
        let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(d);
        for &c in &self.tri.free {
            let mut row = vec![qint(0); nc];
            for (i, v) in self.boundary_row(c) {
                row[i] += v;
            }
            rows.push(row);
        }
        let b = ExactMatrix::from_rows(rows);
        d - b.rank()
    }

    /// The star involution on columns: (x, j) maps to ((-c:d), j) with sign
    /// (-1)^j. Returns (column, sign).
    pub fn star_image(&self, col: usize) -> (usize, i64) {
        let (x, j) = self.col_parts(col);
        let (c, d) = self.p1.list[x];
        let xs = self.p1.index(-c, d).expect("star stays in P1");
        let sign = if j % 2 == 0 { 1 } else { -1 };
        (self.col(xs, j), sign)
    }
}

/// Extended gcd convenience re-export for path code.
pub fn xgcd64(a: i64, b: i64) -> (i64, i64, i64) {
    xgcd(a, b)
}

/// dim S_k(Γ₀(N)) for even k ≥ 2 from the standard genus/dimension formula.
/// Used as an independent oracle against the symbol-space construction.
pub fn dim_cusp_forms(n: i64, k: u32) -> i64 {
    assert!(k >= 2 && k % 2 == 0 && n >= 1);
    let mut mu = n;
    let mut nu2: i64 = 1;
    let mut nu3: i64 = 1;
    let mut m = n;
    let mut q = 2i64;
    let mut primes = Vec::new();
    while q * q <= m {
        if m % q == 0 {
            primes.push(q);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    for &p in &primes {
        mu = mu / p * (p + 1);
        // (-1/p) is 0 at p = 2 and ±1 by p mod 4; (-3/p) is 0 at p = 3 and
        // ±1 by p mod 3
        nu2 *= match p {
            2 => 1,
            _ if p % 4 == 1 => 2,
            _ => 0,
        };
        nu3 *= match p {
            3 => 1,
            _ if p % 3 == 1 => 2,
            _ => 0,
        };
    }
    if n % 4 == 0 {
        nu2 = 0;
    }
    if n % 9 == 0 {
        nu3 = 0;
    }
    if n == 1 {
        nu2 = 1;
        nu3 = 1;
    }
    // number of cusps
    let mut nu_inf: i64 = 0;
    let mut d = 1i64;
    while d * d <= n {
        if n % d == 0 {
            let phi_gcd = |a: i64| -> i64 {
                let mut r = a;
                let mut x = a;
                let mut p = 2;
                while p * p <= x {
                    if x % p == 0 {
                        r = r / p * (p - 1);
                        while x % p == 0 {
                            x /= p;
                        }
                    }
                    p += 1;
                }
                if x > 1 {
                    r = r / x * (x - 1);
                }
                r
            };
            nu_inf += phi_gcd(d.gcd(&(n / d)));
            if d != n / d {
                nu_inf += phi_gcd((n / d).gcd(&d));
            }
        }
        d += 1;
    }
    // genus of X₀(N): 12g = 12 + μ - 3ν₂ - 4ν₃ - 6ν∞
    let g12 = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * nu_inf;
    assert_eq!(g12 % 12, 0);
    let g = g12 / 12;
    if k == 2 {
        return g;
    }
    let k = k as i64;
    (k - 1) * (g - 1) + (k / 2 - 1) * nu_inf + (k / 4) * nu2 + (k / 3) * nu3
}
