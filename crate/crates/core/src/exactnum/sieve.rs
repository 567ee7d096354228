//! Capacity-bounded segmented sieve, primality and factorization.
//!
//! Everything here is deterministic trial division or sieving. Any question
//! whose answer would need primes above the configured capacity is answered
//! with [`Error::Capacity`] instead of a probabilistic guess.

use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const DEFAULT_CAPACITY: u64 = 100_000_000;

const SEGMENT: u64 = 1 << 16;

/// All primes up to `limit`, ascending.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn new(limit: u64) -> Self {
        let len = limit as usize + 1;
        let mut composite = vec![false; len.max(2)];
        let mut primes = Vec::new();
        for i in 2..len {
            if composite[i] {
                continue;
            }
            primes.push(i as u64);
            let mut j = i * i;
            while j < len {
                composite[j] = true;
                j += i;
            }
        }
        PrimeTable { limit, primes }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn contains(&self, n: u64) -> bool {
        n <= self.limit && self.primes.binary_search(&n).is_ok()
    }
}

/// Sieve front end with a fixed capacity and a lazily grown table of base
/// primes shared by all callers.
#[derive(Debug)]
pub struct Sieve {
    capacity: u64,
    base: RwLock<Arc<PrimeTable>>,
}

impl Default for Sieve {
    fn default() -> Self {
        Sieve::new(DEFAULT_CAPACITY)
    }
}

/// Process-wide sieve with the default capacity.
pub fn default_sieve() -> &'static Sieve {
    static SIEVE: OnceLock<Sieve> = OnceLock::new();
    SIEVE.get_or_init(Sieve::default)
}

/// `ord_p(n)` with a primality check on `p`, using the default sieve.
pub fn ord_p(n: &BigUint, p: &BigUint) -> Result<u32> {
    default_sieve().ord_p(n, p)
}

impl Sieve {
    pub fn new(capacity: u64) -> Self {
        Sieve {
            capacity,
            base: RwLock::new(Arc::new(PrimeTable::new(1024.min(capacity)))),
        }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    /// A table covering at least `upto` (callers keep `upto <= capacity`).
    fn base_primes(&self, upto: u64) -> Arc<PrimeTable> {
        {
            let table = self.base.read().expect("prime table lock poisoned");
            if table.limit() >= upto {
                return Arc::clone(&table);
            }
        }
        let mut table = self.base.write().expect("prime table lock poisoned");
        if table.limit() < upto {
            let mut limit = table.limit().max(1024);
            while limit < upto {
                limit = limit.saturating_mul(2);
            }
            *table = Arc::new(PrimeTable::new(limit.min(self.capacity)));
        }
        Arc::clone(&table)
    }

    fn check_capacity(&self, what: &str, n: u64) -> Result<()> {
        if n > self.capacity {
            return Err(Error::capacity(what, n, self.capacity));
        }
        Ok(())
    }

    /// Primes `p` with `lo <= p <= hi`, ascending.
    pub fn primes_in(&self, lo: u64, hi: u64) -> Result<Vec<u64>> {
        if lo > hi {
            return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
        }
        self.check_capacity("prime interval upper end", hi)?;
        let lo = lo.max(2);
        if lo > hi {
            return Ok(Vec::new());
        }
        let base = self.base_primes(hi.isqrt());
        let mut out = Vec::new();
        let mut seg_lo = lo;
        loop {
            let seg_hi = seg_lo.saturating_add(SEGMENT - 1).min(hi);
            let mut is_prime = vec![true; (seg_hi - seg_lo + 1) as usize];
            for &p in base.primes() {
                if p * p > seg_hi {
                    break;
                }
                let first = (p * p).max(seg_lo.div_ceil(p) * p);
                let mut m = first;
                while m <= seg_hi {
                    is_prime[(m - seg_lo) as usize] = false;
                    m += p;
                }
            }
            out.extend(
                is_prime
                    .iter()
                    .enumerate()
                    .filter(|(_, &keep)| keep)
                    .map(|(i, _)| seg_lo + i as u64),
            );
            if seg_hi == hi {
                break;
            }
            seg_lo = seg_hi + 1;
        }
        Ok(out)
    }

    pub fn is_prime_u64(&self, n: u64) -> Result<bool> {
        self.check_capacity("primality test", n)?;
        if n < 2 {
            return Ok(false);
        }
        let base = self.base_primes(n.isqrt());
        for &p in base.primes() {
            if p * p > n {
                break;
            }
            if n.is_multiple_of(p) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_prime(&self, n: &BigUint) -> Result<bool> {
        match n.to_u64() {
            Some(v) => self.is_prime_u64(v),
            None => Err(Error::capacity("primality test", n, self.capacity)),
        }
    }

    /// `ord_p(n)`; fails on `n = 0` and on composite `p`.
    pub fn ord_p(&self, n: &BigUint, p: &BigUint) -> Result<u32> {
        if n.is_zero() {
            return Err(Error::UndefinedValuation);
        }
        if !self.is_prime(p)? {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
        super::valuation(n, p)
    }

    pub fn factorize_u64(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        if n < 2 {
            return Err(Error::Domain(format!("cannot factorize {n}")));
        }
        let mut rest = n;
        let mut out = Vec::new();
        // every prime <= done has been divided out of rest
        let mut done = 1u64;
        loop {
            if rest == 1 {
                return Ok(out);
            }
            let root = rest.isqrt();
            if done >= root {
                out.push((rest, 1));
                return Ok(out);
            }
            if done >= self.capacity {
                return Err(Error::capacity(
                    "factorization trial division",
                    format!("sqrt({rest})"),
                    self.capacity,
                ));
            }
            let base = self.base_primes(root.min(self.capacity));
            for &p in base.primes().iter().filter(|&&p| p > done) {
                if p.saturating_mul(p) > rest {
                    break;
                }
                if rest.is_multiple_of(p) {
                    let mut e = 0;
                    while rest.is_multiple_of(p) {
                        rest /= p;
                        e += 1;
                    }
                    out.push((p, e));
                }
            }
            done = base.limit();
        }
    }

    /// Full factorization as ascending `(prime, exponent)` pairs.
    pub fn factorize(&self, n: &BigUint) -> Result<Vec<(BigUint, u32)>> {
        let mut rest = n.clone();
        let mut out = Vec::new();
        let mut done = 1u64;
        loop {
            if let Some(small) = rest.to_u64() {
                if small == 1 && !out.is_empty() {
                    return Ok(out);
                }
                // primes <= done no longer divide, so the word-sized path
                // appends strictly larger primes
                out.extend(
                    self.factorize_u64(small)?
                        .into_iter()
                        .map(|(p, e)| (BigUint::from(p), e)),
                );
                return Ok(out);
            }
            if done >= self.capacity {
                return Err(Error::capacity(
                    "factorization trial division",
                    format!("cofactor {rest}"),
                    self.capacity,
                ));
            }
            let base = self.base_primes(done.saturating_mul(2).clamp(1 << 16, self.capacity));
            let from = done;
            for &p in base.primes().iter().filter(|&&p| p > from) {
                let pb = BigUint::from(p);
                if (&rest % &pb).is_zero() {
                    let mut e = 0;
                    while (&rest % &pb).is_zero() {
                        rest /= &pb;
                        e += 1;
                    }
                    out.push((pb, e));
                    if rest.to_u64().is_some() {
                        break;
                    }
                }
                done = p;
            }
            if rest.to_u64().is_none() {
                done = base.limit();
            }
        }
    }

    /// Squarefree check on `|m|` (1 counts as squarefree).
    pub fn is_squarefree(&self, m: &BigUint) -> Result<bool> {
        if m.is_zero() {
            return Ok(false);
        }
        if m.is_one() {
            return Ok(true);
        }
        Ok(self.factorize(m)?.iter().all(|&(_, e)| e == 1))
    }

    /// Splits `n` as `s^2 · f` with `f` squarefree; returns `(s, f)`.
    pub fn square_split(&self, n: &BigUint) -> Result<(BigUint, BigUint)> {
        if n.is_zero() {
            return Err(Error::Domain("square split of zero".into()));
        }
        if n.is_one() {
            return Ok((BigUint::one(), BigUint::one()));
        }
        let mut s = BigUint::one();
        let mut f = BigUint::one();
        for (p, e) in self.factorize(n)? {
            s *= p.pow(e / 2);
            if e % 2 == 1 {
                f *= p;
            }
        }
        Ok((s, f))
    }
}
