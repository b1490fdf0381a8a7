//! Modular symbols for Γ₀(N) in weight k via Manin symbols.
//!
//! A space is presented on generators [x, j] with x ∈ P¹(ℤ/N) and
//! X^j Y^{k-2-j} a monomial, subject to the exact two- and three-term Manin
//! relations. Eigensymbols are functionals on the generators satisfying the
//! relations together with transpose Hecke and star eigen-equations; path
//! values come from continued-fraction decomposition into unimodular
//! segments.

pub mod eigen;
pub mod hecke;
pub mod p1;
pub mod paths;
pub mod residue;
pub mod space;

pub use eigen::Eigensymbol;
pub use p1::P1;
pub use space::ManinSpace;
