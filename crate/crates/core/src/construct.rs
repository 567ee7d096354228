//! The set `B = [1..n] ∪ {primes in [n, M]}` with `M = ⌊n ln n⌋`, whose
//! product set contains every integer in `[1, M]`, and a verifier that
//! produces a factor pair for each of them.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::ln::{floor_n_ln_n, LnThreshold};
use crate::exactnum::Sieve;

/// Below this `n` the transfer loop may fail and the verifier falls back to
/// trying every divisor pair.
pub const EXHAUSTIVE_BELOW: u64 = 10;

/// From this `n` on, `|B| <= 2n` is asserted.
pub const SIZE_CHECK_FROM: u64 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// `x = 1`.
    Trivial,
    /// Largest prime factor above `ln n` with cofactor at most `n`.
    LargePrime,
    /// Moving small primes from one part to the other.
    Transfer,
    /// Divisor-pair search, only used below [`EXHAUSTIVE_BELOW`].
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub pair: (u64, u64),
    pub route: Route,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionResult {
    pub n: u64,
    /// `⌊n ln n⌋`.
    pub m: u64,
    pub log_base: String,
    pub base: Vec<u64>,
    pub witnesses: BTreeMap<u64, Witness>,
}

impl ConstructionResult {
    pub fn contains(&self, v: u64) -> bool {
        self.base.binary_search(&v).is_ok()
    }

    pub fn base_big(&self) -> Vec<BigUint> {
        self.base.iter().map(|&b| BigUint::from(b)).collect()
    }

    /// `|B| / n` as an exact fraction.
    pub fn size_ratio(&self) -> (usize, u64) {
        (self.base.len(), self.n)
    }
}

pub fn theorem2_set(n: u64, sieve: &Sieve) -> Result<ConstructionResult> {
    if n < 3 {
        return Err(Error::Domain(format!("construction needs n >= 3, got {n}")));
    }
    let m = floor_n_ln_n(n)?;
    if m > sieve.capacity() {
        return Err(Error::capacity("n ln n", m, sieve.capacity()));
    }
    let mut base: Vec<u64> = (1..=n).collect();
    if m > n {
        base.extend(sieve.primes_in(n + 1, m)?);
    }
    if n >= SIZE_CHECK_FROM && base.len() as u64 > 2 * n {
        return Err(Error::Falsification(format!(
            "|B| = {} exceeds 2n = {} for n = {n}",
            base.len(),
            2 * n
        )));
    }
    Ok(ConstructionResult { n, m, log_base: "e".into(), base, witnesses: BTreeMap::new() })
}

fn ordered(a: u64, b: u64) -> (u64, u64) {
    (a.min(b), a.max(b))
}

/// Factor pair for `x` from the large-prime rule or the transfer loop.
/// `None` is the branch the construction argues cannot happen.
pub fn split_factor(
    x: u64,
    set: &ConstructionResult,
    threshold: &LnThreshold,
    sieve: &Sieve,
) -> Result<Option<(u64, u64, Route)>> {
    if x == 0 || x > set.m.max(1) {
        return Err(Error::Precondition(format!("{x} is outside [1, {}]", set.m)));
    }
    if x == 1 {
        return Ok(Some((1, 1, Route::Trivial)));
    }
    let factors = sieve.factorize_u64(x)?;
    let p = factors.last().unwrap().0;
    if threshold.exceeded_by(&BigInt::from(p)) && x / p <= set.n {
        let (a, b) = ordered(p, x / p);
        return Ok(Some((a, b, Route::LargePrime)));
    }
    // d2 keeps its prime factors in ascending order with multiplicity
    let mut rest: Vec<u64> = factors.iter().flat_map(|&(q, e)| std::iter::repeat_n(q, e as usize)).collect();
    rest.pop();
    let (mut d1, mut d2) = (p, x / p);
    let mut rest = rest.into_iter();
    loop {
        if set.contains(d1) && set.contains(d2) {
            let (a, b) = ordered(d1, d2);
            return Ok(Some((a, b, Route::Transfer)));
        }
        if d2 == 1 || (d1 <= set.n && d2 <= set.n) {
            return Ok(None);
        }
        let q = rest.next().expect("d2 > 1 has a prime factor left");
        d1 *= q;
        d2 /= q;
    }
}

fn exhaustive_split(x: u64, set: &ConstructionResult) -> Option<(u64, u64)> {
    (1..=x).take_while(|&a| a * a <= x).find(|&a| x.is_multiple_of(a) && set.contains(a) && set.contains(x / a)).map(|a| (a, x / a))
}

/// A witness for every `x` in `[1, M]`. Any gap is a falsification error.
pub fn coverage_check(n: u64, sieve: &Sieve) -> Result<ConstructionResult> {
    let mut set = theorem2_set(n, sieve)?;
    let threshold = LnThreshold::new(&BigUint::from(n))?;
    let found: Vec<(u64, Witness)> = (1..=set.m)
        .into_par_iter()
        .map(|x| {
            let w = match split_factor(x, &set, &threshold, sieve)? {
                Some((a, b, route)) => Witness { pair: (a, b), route },
                None if n < EXHAUSTIVE_BELOW => match exhaustive_split(x, &set) {
                    Some(pair) => Witness { pair, route: Route::Exhaustive },
                    None => return Err(Error::Falsification(format!("no factor pair in B for x = {x}, n = {n}"))),
                },
                None => {
                    return Err(Error::Falsification(format!(
                        "transfer loop found no factor pair in B for x = {x}, n = {n}"
                    )))
                }
            };
            Ok((x, w))
        })
        .collect::<Result<_>>()?;
    for (x, w) in &found {
        let (a, b) = w.pair;
        if a * b != *x || !set.contains(a) || !set.contains(b) {
            return Err(Error::Integrity(format!("witness {a}·{b} for {x} is invalid")));
        }
    }
    set.witnesses = found.into_iter().collect();
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::default_sieve;

    fn split(x: u64, n: u64) -> Option<(u64, u64, Route)> {
        let s = default_sieve();
        let set = theorem2_set(n, s).unwrap();
        let t = LnThreshold::new(&BigUint::from(n)).unwrap();
        split_factor(x, &set, &t, s).unwrap()
    }

    #[test]
    fn set_examples() {
        let s = default_sieve();
        let b = theorem2_set(10, s).unwrap();
        assert_eq!(b.m, 23);
        assert_eq!(b.base, vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 17, 19, 23]);
        assert_eq!(theorem2_set(3, s).unwrap().base, vec![1, 2, 3]);
        let b = theorem2_set(100, s).unwrap();
        assert_eq!((b.m, b.base.len()), (460, 163));
        assert!(theorem2_set(2, s).is_err());
        assert!(matches!(theorem2_set(1000, &Sieve::new(1000)), Err(Error::Capacity { .. })));
    }

    #[test]
    fn split_examples() {
        assert_eq!(split(22, 10), Some((2, 11, Route::LargePrime)));
        assert_eq!(split(16, 10), Some((2, 8, Route::Transfer)));
        assert_eq!(split(1, 10), Some((1, 1, Route::Trivial)));
        assert_eq!(split(23, 10), Some((1, 23, Route::LargePrime)));
        assert_eq!(split(21, 10), Some((3, 7, Route::LargePrime)));
    }

    #[test]
    fn coverage_small() {
        let s = default_sieve();
        for n in 3..60 {
            let c = coverage_check(n, s).unwrap();
            assert_eq!(c.witnesses.len() as u64, c.m);
            if n >= EXHAUSTIVE_BELOW {
                assert!(c.witnesses.values().all(|w| w.route != Route::Exhaustive));
            }
        }
        let c = coverage_check(100, s).unwrap();
        assert_eq!(c.witnesses.len(), 460);
        assert_eq!(c.witnesses[&23].pair, (1, 23));
    }
}
