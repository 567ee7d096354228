//! Elements `a + b√m` of a quadratic field `Q(√m)`.
//!
//! `m` is squarefree and not 0 or 1; negative `m` gives imaginary fields, so
//! `Q(√-1)` is the Gaussian rationals. Every element carries its radicand and
//! mixing radicands is a [`Error::FieldMismatch`].

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{default_sieve, Rat, Sieve};
use crate::error::{Error, Result};

/// A validated radicand.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadField {
    m: BigInt,
}

impl QuadField {
    pub fn new(m: BigInt) -> Result<Self> {
        Self::with_sieve(m, default_sieve())
    }

    pub fn with_sieve(m: BigInt, sieve: &Sieve) -> Result<Self> {
        if m.is_zero() || m.is_one() {
            return Err(Error::Domain(format!("radicand {m} does not define a quadratic field")));
        }
        if !sieve.is_squarefree(m.magnitude())? {
            return Err(Error::Domain(format!("radicand {m} is not squarefree")));
        }
        Ok(QuadField { m })
    }

    pub fn radicand(&self) -> &BigInt {
        &self.m
    }

    pub fn elem(&self, a: Rat, b: Rat) -> QuadElem {
        QuadElem { a, b, m: self.m.clone() }
    }

    pub fn rational(&self, a: Rat) -> QuadElem {
        self.elem(a, Rat::zero())
    }

    /// `√m` itself.
    pub fn root(&self) -> QuadElem {
        self.elem(Rat::zero(), Rat::one())
    }

    pub fn contains(&self, x: &QuadElem) -> bool {
        x.m == self.m
    }
}

/// `a + b√m`. The derived order is lexicographic on `(a, b)`; it is only a
/// tie-breaking order, not a field order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadElem {
    a: Rat,
    b: Rat,
    m: BigInt,
}

impl QuadElem {
    pub fn a(&self) -> &Rat {
        &self.a
    }

    pub fn b(&self) -> &Rat {
        &self.b
    }

    pub fn radicand(&self) -> &BigInt {
        &self.m
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        self.is_rational().then_some(&self.a)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn same_field(&self, other: &QuadElem) -> Result<()> {
        if self.m != other.m {
            return Err(Error::FieldMismatch {
                left: self.m.to_string(),
                right: other.m.to_string(),
            });
        }
        Ok(())
    }

    fn m_rat(&self) -> Rat {
        Rat::from_integer(self.m.clone())
    }

    pub fn conj(&self) -> QuadElem {
        QuadElem { a: self.a.clone(), b: -&self.b, m: self.m.clone() }
    }

    /// `a² - m b²`; zero only for the zero element since `m` is not a square.
    pub fn norm(&self) -> Rat {
        &self.a * &self.a - self.m_rat() * &self.b * &self.b
    }

    pub fn scale(&self, k: &Rat) -> QuadElem {
        QuadElem { a: &self.a * k, b: &self.b * k, m: self.m.clone() }
    }

    pub fn checked_add(&self, rhs: &QuadElem) -> Result<QuadElem> {
        self.same_field(rhs)?;
        Ok(QuadElem { a: &self.a + &rhs.a, b: &self.b + &rhs.b, m: self.m.clone() })
    }

    pub fn checked_sub(&self, rhs: &QuadElem) -> Result<QuadElem> {
        self.same_field(rhs)?;
        Ok(QuadElem { a: &self.a - &rhs.a, b: &self.b - &rhs.b, m: self.m.clone() })
    }

    /// `(a₁+b₁√m)(a₂+b₂√m) = (a₁a₂ + b₁b₂m) + (a₁b₂ + a₂b₁)√m`.
    pub fn checked_mul(&self, rhs: &QuadElem) -> Result<QuadElem> {
        self.same_field(rhs)?;
        let a = &self.a * &rhs.a + &self.b * &rhs.b * self.m_rat();
        let b = &self.a * &rhs.b + &rhs.a * &self.b;
        Ok(QuadElem { a, b, m: self.m.clone() })
    }

    pub fn checked_div(&self, rhs: &QuadElem) -> Result<QuadElem> {
        self.same_field(rhs)?;
        if rhs.is_zero() {
            return Err(Error::Domain("division by zero in quadratic field".into()));
        }
        let n = rhs.norm();
        Ok(self.checked_mul(&rhs.conj())?.scale(&n.recip()))
    }

    pub fn recip(&self) -> Result<QuadElem> {
        let one = QuadElem { a: Rat::one(), b: Rat::zero(), m: self.m.clone() };
        one.checked_div(self)
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}√{}", self.a, self.b, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    fn q2() -> QuadField {
        QuadField::new(2.into()).unwrap()
    }

    #[test]
    fn multiplication_examples() {
        let f = q2();
        let s = f.root();
        assert_eq!(s.checked_mul(&s).unwrap(), f.rational(r(2, 1)));
        let x = f.elem(r(1, 1), r(1, 1));
        assert_eq!(x.checked_div(&x).unwrap(), f.rational(r(1, 1)));
        let y = f.elem(r(0, 1), r(3, 2));
        let p = s.checked_mul(&y).unwrap();
        assert_eq!(p, f.rational(r(3, 1)));
        assert!(p.is_rational());
    }

    #[test]
    fn field_errors() {
        let a = q2().root();
        let b = QuadField::new(3.into()).unwrap().root();
        assert!(matches!(a.checked_mul(&b), Err(Error::FieldMismatch { .. })));
        let zero = q2().rational(r(0, 1));
        assert!(matches!(a.checked_div(&zero), Err(Error::Domain(_))));
        assert!(QuadField::new(4.into()).is_err());
        assert!(QuadField::new(1.into()).is_err());
        assert!(QuadField::new(0.into()).is_err());
        assert!(QuadField::new((-1).into()).is_ok());
    }

    #[test]
    fn gaussian_rationals() {
        let f = QuadField::new((-1).into()).unwrap();
        let i = f.root();
        assert_eq!(i.checked_mul(&i).unwrap(), f.rational(r(-1, 1)));
        let u = f.elem(r(1, 1), r(1, 1));
        // (1+i)(1-i) = 2
        assert_eq!(u.checked_mul(&u.conj()).unwrap(), f.rational(r(2, 1)));
        assert_eq!(u.recip().unwrap(), f.elem(r(1, 2), r(-1, 2)));
    }
}
