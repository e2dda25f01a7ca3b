//! Exact computation on digit-restricted integer sets.
//!
//! A base `b` and a digit alphabet `D` carve out the sparse set of
//! nonnegative integers whose base-`b` digits all lie in `D`. The crate
//! enumerates these sets exactly and measures how the member sequence
//! distributes and recurs:
//!
//! * [`digits`] — the order-preserving bijection `n ↦ k_n`: ranking,
//!   unranking, membership, digit sums, consecutive-difference structure,
//!   and self-similarity checks;
//! * [`alpha`] — rotation angles with exact rational or double-double real
//!   phase reduction;
//! * [`equidist`] — residue distributions, exponential (Weyl) sums, rational
//!   spectral coefficients, and star discrepancy along the members;
//! * [`dynamics`] — ergodic averages of the member sequence acting on
//!   exactly computable measure-preserving systems, spectral predictions,
//!   multiple recurrence, and a van der Corput inequality harness;
//! * [`intset`] — dense bitset intervals for density experiments;
//! * [`ramsey`] — monochromatic-progression searches with member steps,
//!   restricted van der Waerden numbers, sum-closure certificates, and
//!   density recurrence censuses.
//!
//! Counting statistics are exact (integers or big rationals); floating
//! point appears only where a quantity is genuinely transcendental, such as
//! complex exponentials and irrational rotation angles.

pub mod alpha;
pub mod digits;
pub mod dynamics;
pub mod equidist;
pub mod error;
pub mod intset;
pub mod ramsey;

pub use error::{Error, Result};
