//! Linear sketches for estimating the L1 distance between two integer vectors.
//!
//! Two parties holding `x, y ∈ {-M,…,M}^n` and sharing a 256-bit seed each
//! build an [`L1DiffSketch`] of their vector. A third party subtracts the two
//! sketches and recovers `||x - y||_1` to within `(1 ± ε)` with probability at
//! least 2/3; [`l1diff::estimate_median`] amplifies that by repetition.
//!
//! The building blocks are usable on their own:
//!
//! * [`gf`] prime-field context with exp/dlog tables,
//! * [`hashfam`] polynomial and affine hash families,
//! * [`rangecount`] counting arithmetic-progression hits in an interval,
//! * [`syndrome`] recovery of sparse vectors from power sums,
//! * [`kset`] exact small-L1 sketch built from bucketed power sums,
//! * [`rough`] constant-factor Cauchy median sketch,
//! * [`sketchio`] the versioned binary file format.

pub mod error;
pub mod exec;
pub mod gf;
pub mod hashfam;
pub mod kset;
pub mod l1diff;
pub mod rangecount;
pub mod rough;
pub mod seed;
pub mod sketchio;
pub mod syndrome;

pub use error::{Error, Result};
pub use exec::Execution;
pub use gf::FieldCtx;
pub use hashfam::{AffineHash, PolyHash};
pub use kset::{KSetParams, KSetSketch};
pub use l1diff::{estimate_median, Branch, Estimate, L1DiffParams, L1DiffSketch, Mode};
pub use rangecount::{count_hits, RangeQuery};
pub use rough::RoughSketch;
pub use seed::MasterSeed;
pub use sketchio::{deserialize, serialize};
pub use syndrome::{decode, power_sums, PowerSums, SparseVector};

