//! Exact arithmetic substrate.
//!
//! Integers are `num-bigint` values, rationals are `num-rational`'s
//! [`BigRational`](num_rational::BigRational) (always reduced with a positive
//! denominator). Quadratic-field elements, the prime sieve and the certified
//! logarithm brackets live in the submodules.

pub mod json;
pub mod ln;
pub mod quad;
pub mod sieve;

pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational as Rat;
pub use quad::{QuadElem, QuadField};
pub use sieve::{default_sieve, ord_p, PrimeTable, Sieve, DEFAULT_CAPACITY};

use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest `e` with `p^e | n`. `p` is assumed to be at least 2.
pub fn valuation(n: &BigUint, p: &BigUint) -> Result<u32> {
    if n.is_zero() {
        return Err(Error::UndefinedValuation);
    }
    let mut e = 0;
    let mut rest = n.clone();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&rest, p);
        if !r.is_zero() {
            return Ok(e);
        }
        rest = q;
        e += 1;
    }
}

pub fn valuation_u64(mut n: u64, p: u64) -> u32 {
    debug_assert!(n > 0 && p > 1);
    let mut e = 0;
    while n.is_multiple_of(p) {
        n /= p;
        e += 1;
    }
    e
}

pub fn rat_from_nat(n: &BigUint) -> Rat {
    Rat::from_integer(BigInt::from(n.clone()))
}

pub fn rat_from_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Converts a rational to a natural number when it is a positive integer.
pub fn rat_to_nat(q: &Rat) -> Option<BigUint> {
    if q.is_integer() && q.numer() > &BigInt::zero() {
        q.numer().to_biguint()
    } else {
        None
    }
}

pub fn nat_to_int(n: &BigUint) -> BigInt {
    BigInt::from(n.clone())
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, q| {
        num_integer::Integer::lcm(&acc, q.denom())
    })
}
