//! Certified rational brackets for natural logarithms.
//!
//! `ln n` is bracketed through `ln n = k·ln 2 + 2·atanh(z)` with
//! `z = (n - 2^k)/(n + 2^k) ∈ [0, 1/3)` and `ln 2 = 2·atanh(1/3)`. A truncated
//! atanh series is a lower bound and the geometric tail estimate gives an
//! upper bound, so every bracket is rigorous. Callers refine until their
//! decision no longer depends on where `ln n` sits inside the bracket.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::Rat;
use crate::error::{Error, Result};

const START_TERMS: usize = 12;
const MAX_TERMS: usize = 3072;

/// `(lo, hi)` with `lo <= atanh(z) <= hi` for `0 <= z < 1`.
fn atanh_bracket(z: &Rat, terms: usize) -> (Rat, Rat) {
    if z.is_zero() {
        return (Rat::zero(), Rat::zero());
    }
    let z2 = z * z;
    let mut power = z.clone();
    let mut sum = Rat::zero();
    for i in 0..terms {
        sum += &power / Rat::from_integer(BigInt::from(2 * i + 1));
        power *= &z2;
    }
    // tail <= z^(2K+1) / ((2K+1)(1 - z²))
    let tail = &power / (Rat::from_integer(BigInt::from(2 * terms + 1)) * (Rat::one() - &z2));
    let hi = &sum + tail;
    (sum, hi)
}

/// Rigorous bracket `lo <= ln n <= hi` using `terms` series terms.
pub fn ln_bracket(n: &BigUint, terms: usize) -> Result<(Rat, Rat)> {
    if n.is_zero() {
        return Err(Error::Domain("logarithm of zero".into()));
    }
    if n.is_one() {
        return Ok((Rat::zero(), Rat::zero()));
    }
    let k = n.bits() - 1;
    let pow = BigUint::one() << k;
    let z = Rat::new(
        BigInt::from(n.clone()) - BigInt::from(pow.clone()),
        BigInt::from(n.clone()) + BigInt::from(pow),
    );
    let third = Rat::new(BigInt::one(), BigInt::from(3));
    let (l2lo, l2hi) = atanh_bracket(&third, terms);
    let (zlo, zhi) = atanh_bracket(&z, terms);
    let two_k = Rat::from_integer(BigInt::from(2 * k));
    let two = Rat::from_integer(BigInt::from(2));
    Ok((&two_k * l2lo + &two * zlo, two_k * l2hi + two * zhi))
}

/// Refines the bracket until `decide(lo, hi)` commits.
pub fn certify<T>(n: &BigUint, mut decide: impl FnMut(&Rat, &Rat) -> Option<T>) -> Result<T> {
    let mut terms = START_TERMS;
    loop {
        let (lo, hi) = ln_bracket(n, terms)?;
        if let Some(v) = decide(&lo, &hi) {
            return Ok(v);
        }
        if terms >= MAX_TERMS {
            return Err(Error::Integrity(format!(
                "could not certify a decision involving ln {n} with {terms} series terms"
            )));
        }
        terms *= 2;
    }
}

fn floor(q: &Rat) -> BigInt {
    q.floor().to_integer()
}

/// `⌊x · ln n⌋` for `x >= 0`.
pub fn floor_scaled_ln(x: &Rat, n: &BigUint) -> Result<BigInt> {
    certify(n, |lo, hi| {
        let a = floor(&(x * lo));
        let b = floor(&(x * hi));
        (a == b).then_some(a)
    })
}

/// `⌊n · ln n⌋`.
pub fn floor_n_ln_n(n: u64) -> Result<u64> {
    let x = Rat::from_integer(BigInt::from(n));
    let v = floor_scaled_ln(&x, &BigUint::from(n))?;
    u64::try_from(v).map_err(|_| Error::capacity("n ln n", n, u64::MAX))
}

/// An open interval `(lo, hi)` around `ln n` that contains no integer, so
/// integer comparisons against `ln n` are decided exactly. For `n = 1` the
/// interval degenerates to the exact value 0.
#[derive(Clone, Debug)]
pub struct LnThreshold {
    n: BigUint,
    floor: BigInt,
}

impl LnThreshold {
    pub fn new(n: &BigUint) -> Result<Self> {
        if n.is_one() {
            return Ok(LnThreshold { n: n.clone(), floor: BigInt::zero() });
        }
        // ln n is irrational for n >= 2, so the bracket eventually avoids integers
        let floor = certify(n, |lo, hi| {
            let a = floor(lo);
            (a == floor(hi) && Rat::from_integer(a.clone()) != *lo).then_some(a)
        })?;
        Ok(LnThreshold { n: n.clone(), floor })
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    /// `⌊ln n⌋`.
    pub fn floor(&self) -> &BigInt {
        &self.floor
    }

    /// Whether the integer `p` is strictly greater than `ln n`.
    pub fn exceeded_by(&self, p: &BigInt) -> bool {
        // either ln n = floor exactly (n = 1) or floor < ln n < floor + 1
        p > &self.floor
    }
}

/// `⌊10^digits · num / (den · ln den)⌋` for `den >= 2`, the fixed-point
/// rendering used by report ratios.
pub fn ratio_over_n_ln_n(num: u64, den: u64, digits: u32) -> Result<String> {
    if den < 2 {
        return Err(Error::Domain(format!("n ln n vanishes at n = {den}")));
    }
    let scale = BigInt::from(10u64).pow(digits);
    let top = Rat::from_integer(BigInt::from(num) * &scale);
    let dn = Rat::from_integer(BigInt::from(den));
    let v = certify(&BigUint::from(den), |lo, hi| {
        let a = floor(&(&top / (&dn * hi)));
        let b = floor(&(&top / (&dn * lo)));
        (a == b).then_some(a)
    })?;
    let (int_part, frac) = num_integer::Integer::div_rem(&v, &scale);
    Ok(format!("{int_part}.{:0>width$}", frac.to_string(), width = digits as usize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn approx(q: &Rat) -> f64 {
        let scaled = (q * Rat::from_integer(BigInt::from(10u64).pow(15))).to_integer();
        scaled.to_f64().unwrap() / 1e15
    }

    #[test]
    fn brackets_contain_reference_values() {
        for n in [2u64, 3, 10, 50, 100, 1000, 123_456_789] {
            let (lo, hi) = ln_bracket(&BigUint::from(n), 20).unwrap();
            let reference = (n as f64).ln();
            assert!(lo <= hi);
            assert!(approx(&lo) <= reference + 1e-12 && approx(&hi) >= reference - 1e-12, "n={n}");
            assert!(approx(&hi) - approx(&lo) < 1e-12);
        }
    }

    #[test]
    fn n_ln_n_floors() {
        assert_eq!(floor_n_ln_n(10).unwrap(), 23);
        assert_eq!(floor_n_ln_n(3).unwrap(), 3);
        assert_eq!(floor_n_ln_n(50).unwrap(), 195);
        assert_eq!(floor_n_ln_n(100).unwrap(), 460);
        assert_eq!(floor_n_ln_n(1).unwrap(), 0);
    }

    #[test]
    fn threshold_compares_exactly() {
        let t = LnThreshold::new(&BigUint::from(10u32)).unwrap();
        assert_eq!(t.floor(), &BigInt::from(2));
        assert!(!t.exceeded_by(&BigInt::from(2)));
        assert!(t.exceeded_by(&BigInt::from(3)));
        // e² ≈ 7.389: ln 7 < 2 < ln 8
        assert_eq!(LnThreshold::new(&BigUint::from(7u32)).unwrap().floor(), &BigInt::from(1));
        assert_eq!(LnThreshold::new(&BigUint::from(8u32)).unwrap().floor(), &BigInt::from(2));
    }

    #[test]
    fn ratio_rendering() {
        // 23 / (10 ln 10) = 0.99886...
        assert_eq!(ratio_over_n_ln_n(23, 10, 6).unwrap(), "0.998877");
        assert!(ratio_over_n_ln_n(1, 1, 6).is_err());
    }
}
