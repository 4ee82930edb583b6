//! Unitary spherical matrix integrals at finite and large `N`.
//!
//! The crate evaluates `I(A,B;s) = ∫ DU exp((N/s) Tr A U B U†)` and its
//! relatives exactly, and expands the large-`N` free energy
//! `F = lim N⁻² log I` as a graded polynomial in the moments
//! `θ_p = Tr A^p / N`, `θ̄_q = Tr B^q / N` by two independent routes:
//! a character expansion with formal `N` ([`series`]) and a sum over planar
//! permutation pairs ([`planar`]).

pub mod algebra;
pub mod cache;
pub mod dispersionless;
pub mod error;
pub mod exact;
pub mod mc;
pub mod planar;
pub mod series;
pub mod symfun;
pub mod toda;

pub use error::{Error, Result};
