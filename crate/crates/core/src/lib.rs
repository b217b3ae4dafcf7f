//! Exact combinatorics of toric foliations.
//!
//! A toric foliation on a simplicial toric variety is determined by a rational
//! subspace `V` of `N ⊗ Q`. This crate computes its canonical divisor, Klyachko
//! filtrations, singular locus, terminal/canonical classification, intersection
//! numbers against torus-invariant curves, and runs the foliated minimal model
//! program by extremal contractions and flips. All arithmetic is exact.
//!
//! The low-level linear algebra and polyhedral routines ([`exactlin`], [`lp`],
//! [`polycone`]) are generic over the exact scalar type; everything above them
//! works with the arbitrary-precision aliases [`Int`] and [`Rat`].

pub mod document;
pub mod error;
pub mod exactlin;
pub mod fan;
pub mod foliation;
pub mod lp;
pub mod mori;
pub mod polycone;
pub mod singclass;
pub mod verify;

pub use error::{Error, Result};
pub use fan::{FanData, Wall};
pub use foliation::{FoliationDatum, TorusDivisor};

/// Arbitrary-precision lattice coordinates.
pub type Int = num_bigint::BigInt;
/// Arbitrary-precision rationals, always in lowest terms with positive denominator.
pub type Rat = num_rational::BigRational;
/// Machine-word rationals, handy for small experiments with the generic routines.
pub type Rat64 = num_rational::Ratio<i64>;

/// Integer vector in the lattice `N` (or `M`).
pub type IntVector = Vec<Int>;
/// Rational vector in `N_Q` (or `M_Q`).
pub type RatVector = Vec<Rat>;
