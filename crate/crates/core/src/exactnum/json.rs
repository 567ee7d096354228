//! String encodings used in every JSON file: integers as decimal strings,
//! rationals as `"p/q"` (or `"p"` when integral) and quadratic elements as
//! `{"a": "3/2", "b": "-1", "m": "2"}`.

use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{QuadElem, QuadField, Rat};
use crate::error::{Error, Result};

pub fn parse_nat(s: &str) -> Result<BigUint> {
    BigUint::from_str(s.trim()).map_err(|_| Error::Input(format!("not a natural number: {s:?}")))
}

pub fn parse_int(s: &str) -> Result<BigInt> {
    BigInt::from_str(s.trim()).map_err(|_| Error::Input(format!("not an integer: {s:?}")))
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        None => Ok(Rat::from_integer(parse_int(s)?)),
        Some((n, d)) => {
            let n = parse_int(n)?;
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Input(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(n, d))
        }
    }
}

pub fn fmt_rat(q: &Rat) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Wire form of a quadratic element; `m` is optional inside instance files
/// where the radicand is given once at top level.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct QuadRepr {
    pub a: String,
    pub b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<String>,
}

impl QuadRepr {
    pub fn from_elem(x: &QuadElem, with_m: bool) -> Self {
        QuadRepr {
            a: fmt_rat(x.a()),
            b: fmt_rat(x.b()),
            m: with_m.then(|| x.radicand().to_string()),
        }
    }

    pub fn to_elem(&self, field: &QuadField) -> Result<QuadElem> {
        if let Some(m) = &self.m {
            if &parse_int(m)? != field.radicand() {
                return Err(Error::FieldMismatch {
                    left: field.radicand().to_string(),
                    right: m.clone(),
                });
            }
        }
        Ok(field.elem(parse_rat(&self.a)?, parse_rat(&self.b)?))
    }
}

impl Serialize for QuadElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QuadRepr::from_elem(self, true).serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadElem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = QuadRepr::deserialize(d)?;
        let m = repr.m.as_deref().ok_or_else(|| D::Error::custom("missing radicand m"))?;
        let field = QuadField::new(parse_int(m).map_err(D::Error::custom)?).map_err(D::Error::custom)?;
        repr.to_elem(&field).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "nat")]` for `BigUint` fields.
pub mod nat {
    use super::*;

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        parse_nat(&s).map_err(D::Error::custom)
    }
}

pub mod nat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|n| n.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigUint>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse_nat(s).map_err(D::Error::custom))
            .collect()
    }
}

pub mod int {
    use super::*;

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        parse_int(&s).map_err(D::Error::custom)
    }
}

pub mod int_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|n| n.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse_int(s).map_err(D::Error::custom))
            .collect()
    }
}

pub mod rat {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(D::Error::custom)
    }
}

pub mod rat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(fmt_rat))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse_rat(s).map_err(D::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_strings() {
        let q = parse_rat("6/-4").unwrap();
        assert_eq!(fmt_rat(&q), "-3/2");
        assert_eq!(fmt_rat(&parse_rat("-1").unwrap()), "-1");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_nat("-3").is_err());
    }

    #[test]
    fn quad_json_shape() {
        let f = QuadField::new(2.into()).unwrap();
        let x = f.elem(parse_rat("3/2").unwrap(), parse_rat("-1").unwrap());
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"a":"3/2","b":"-1","m":"2"}"#);
        let back: QuadElem = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
    }
}
