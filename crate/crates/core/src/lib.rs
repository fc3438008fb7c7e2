//! Exact computations for invariant measures on the finite Hamming cube.
//!
//! The crate works with the cube `F_2^n` at small `n`, its isometry group
//! (translations by bit-flips composed with coordinate permutations), and
//! probability measures on colourings `K^(F_2^n)` with exact rational
//! weights. On top of that it provides:
//!
//! * [`boolfn`]: Möbius/ANF transforms, degrees, face sums and Reed–Muller
//!   distances for Boolean functions, plus a prime-field variant;
//! * [`measures`]: invariance checks, marginals and orbit (ergodic)
//!   decompositions;
//! * [`constructions`]: the sparse-hyperplane measure, random-walk measures
//!   over finite abelian groups and the selector-mixture experiment;
//! * [`joinings`]: the d-bar distance as an orbit-reduced exact LP;
//! * [`testability`]: random-face tests of low-degree membership;
//! * [`dmt`]: witness search for distant multiple transitivity.
//!
//! Point encoding is fixed crate-wide: coordinate `i` (1-based) of a point is
//! bit `i - 1` of its index.

pub mod boolfn;
pub mod cli;
pub mod constructions;
pub mod cube;
pub mod dmt;
mod error;
pub mod io;
pub mod joinings;
pub mod lp;
pub mod measures;
pub mod rational;
pub mod testability;

pub use error::{Error, Result};
pub use num_rational::BigRational;
