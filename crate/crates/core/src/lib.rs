//! Exact-arithmetic toolkit for studying arithmetic progressions that live
//! inside product sets `B.B = { b·b' : b, b' ∈ B }`.
//!
//! The crate is organised bottom-up:
//!
//! - [`exactnum`]: big integers, reduced rationals, quadratic-field elements,
//!   a capacity-bounded segmented sieve and certified logarithm brackets.
//! - [`apcore`]: progression descriptors, canonical reduction and the
//!   pairwise-gcd audit.
//! - [`prodset`]: product sets, the doubled bipartite representation graph and
//!   longest-progression search.
//! - [`cyclelab`]: even cycles, the cycle product identity, the coefficient
//!   polynomial and its divisibility consequences.
//! - [`irregular`]: prime windows, irregular edges and the forest audit.
//! - [`construct`]: the `[1..n] ∪ primes` construction and its coverage
//!   verifier.
//! - [`rationalize`]: the quadratic-field pipeline that turns a base set into
//!   rationals while keeping the progression inside the product set.
//! - [`harness`]: instance files, preprocessing, seeded studies and the
//!   end-to-end pipeline behind the `prodap` binary.

pub mod apcore;
pub mod construct;
pub mod cyclelab;
pub mod error;
pub mod exactnum;
pub mod harness;
pub mod irregular;
pub mod prodset;
pub mod rationalize;

pub use error::{Error, Result};
