//! Exact computation of Kurihara numbers for newforms on Γ₀(N) and the
//! Selmer-group structure they determine.
//!
//! The pipeline: build the weight-k Manin symbol space for Γ₀(N), cut the
//! rational newform eigensymbol exactly, normalize its values by minimal
//! π-adic valuation, then scan Kolyvagin moduli n and report the implied
//! Bloch–Kato Selmer structure over ℚ_p.

pub mod arith;
pub mod kolyvagin;
pub mod kurihara;
pub mod localfield;
pub mod ec;
pub mod msym;
pub mod periods;
pub mod selmer;

pub use arith::{ExactMatrix, FieldElement};
