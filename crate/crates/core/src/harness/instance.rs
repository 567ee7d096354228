//! JSON instance files.
//!
//! ```json
//! {
//!   "field": "quadratic",
//!   "m": "2",
//!   "elements": [{"a": "1", "b": "1"}, {"a": "-2", "b": "2"}],
//!   "ap_terms": ["2", "4", "6"],
//!   "provenance": {"generator": "quadratic-demo"}
//! }
//! ```
//!
//! Integer and rational instances list elements as decimal strings (`"-3"`,
//! `"5/2"`). The progression is given either as a descriptor `ap`
//! (`{"D", "r", "d", "L"}`) or as explicit `ap_terms`, or left out to ask for
//! discovery.

use std::path::Path;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::apcore::ApDescriptor;
use crate::error::{Error, Result};
use crate::exactnum::json::{self, QuadRepr};
use crate::exactnum::{QuadElem, QuadField, Rat};
use crate::rationalize::FieldSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Integer,
    Rational,
    Quadratic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementRepr {
    Text(String),
    Number(i64),
    Quad(QuadRepr),
}

/// The on-disk shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub field: FieldTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<String>,
    pub elements: Vec<ElementRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ap: Option<ApDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ap_terms: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Elements {
    Integer(Vec<BigInt>),
    Rational(Vec<Rat>),
    Quadratic { field: QuadField, elements: Vec<QuadElem> },
}

impl Elements {
    pub fn len(&self) -> usize {
        match self {
            Elements::Integer(v) => v.len(),
            Elements::Rational(v) => v.len(),
            Elements::Quadratic { elements, .. } => elements.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Integer and rational elements as rationals; `None` for quadratic sets.
    pub fn as_rationals(&self) -> Option<Vec<Rat>> {
        match self {
            Elements::Integer(v) => Some(v.iter().map(|x| Rat::from_integer(x.clone())).collect()),
            Elements::Rational(v) => Some(v.clone()),
            Elements::Quadratic { .. } => None,
        }
    }

    pub fn to_field_set(&self) -> FieldSet {
        match self {
            Elements::Quadratic { field, elements } => {
                FieldSet::Quadratic { field: field.clone(), elements: elements.clone() }
            }
            other => FieldSet::Rational(other.as_rationals().unwrap()),
        }
    }
}

/// A parsed, validated instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub elements: Elements,
    pub ap: Option<ApDescriptor>,
    pub ap_terms: Option<Vec<Rat>>,
    pub provenance: Option<serde_json::Value>,
}

fn distinct<T: Ord + Clone + std::fmt::Debug>(v: &[T]) -> Result<()> {
    let mut s = v.to_vec();
    s.sort();
    match s.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(Error::Input(format!("duplicate element {:?}", w[0]))),
        None => Ok(()),
    }
}

fn text_of(e: &ElementRepr) -> Result<String> {
    match e {
        ElementRepr::Text(s) => Ok(s.clone()),
        ElementRepr::Number(n) => Ok(n.to_string()),
        ElementRepr::Quad(_) => Err(Error::Input("quadratic element in a non-quadratic instance".into())),
    }
}

impl Instance {
    pub fn new(elements: Elements) -> Self {
        Instance { elements, ap: None, ap_terms: None, provenance: None }
    }

    pub fn from_file(f: InstanceFile) -> Result<Self> {
        let elements = match f.field {
            FieldTag::Integer => {
                if f.m.is_some() {
                    return Err(Error::Input("\"m\" is only meaningful for quadratic instances".into()));
                }
                let v = f.elements.iter().map(|e| json::parse_int(&text_of(e)?)).collect::<Result<Vec<_>>>()?;
                Elements::Integer(v)
            }
            FieldTag::Rational => {
                if f.m.is_some() {
                    return Err(Error::Input("\"m\" is only meaningful for quadratic instances".into()));
                }
                let v = f.elements.iter().map(|e| json::parse_rat(&text_of(e)?)).collect::<Result<Vec<_>>>()?;
                Elements::Rational(v)
            }
            FieldTag::Quadratic => {
                let m = f.m.as_deref().ok_or_else(|| Error::Input("quadratic instance needs \"m\"".into()))?;
                let field = QuadField::new(json::parse_int(m)?).map_err(|e| Error::Input(e.to_string()))?;
                let elements = f
                    .elements
                    .iter()
                    .map(|e| match e {
                        ElementRepr::Quad(q) => q.to_elem(&field),
                        other => Ok(field.rational(json::parse_rat(&text_of(other)?)?)),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Elements::Quadratic { field, elements }
            }
        };
        if elements.is_empty() {
            return Err(Error::Input("instance has no elements".into()));
        }
        match &elements {
            Elements::Integer(v) => distinct(v)?,
            Elements::Rational(v) => distinct(v)?,
            Elements::Quadratic { elements, .. } => distinct(elements)?,
        }
        if let Some(d) = &f.ap {
            d.validate().map_err(|e| Error::Input(e.to_string()))?;
        }
        let ap_terms = f
            .ap_terms
            .as_ref()
            .map(|v| v.iter().map(|s| json::parse_rat(s)).collect::<Result<Vec<_>>>())
            .transpose()?;
        if let (Some(d), Some(t)) = (&f.ap, &ap_terms) {
            let from_desc: Vec<Rat> = d.terms().into_iter().map(|x| Rat::from_integer(x.into())).collect();
            if &from_desc != t {
                return Err(Error::Input("\"ap\" and \"ap_terms\" disagree".into()));
            }
        }
        Ok(Instance { elements, ap: f.ap, ap_terms, provenance: f.provenance })
    }

    pub fn to_file(&self) -> InstanceFile {
        let (field, m, elements) = match &self.elements {
            Elements::Integer(v) => {
                (FieldTag::Integer, None, v.iter().map(|x| ElementRepr::Text(x.to_string())).collect())
            }
            Elements::Rational(v) => {
                (FieldTag::Rational, None, v.iter().map(|x| ElementRepr::Text(json::fmt_rat(x))).collect())
            }
            Elements::Quadratic { field, elements } => (
                FieldTag::Quadratic,
                Some(field.radicand().to_string()),
                elements.iter().map(|x| ElementRepr::Quad(QuadRepr::from_elem(x, false))).collect(),
            ),
        };
        InstanceFile {
            field,
            m,
            elements,
            ap: self.ap.clone(),
            ap_terms: self.ap_terms.as_ref().map(|v| v.iter().map(json::fmt_rat).collect()),
            provenance: self.provenance.clone(),
        }
    }

    /// The claimed progression as rationals, if any.
    pub fn terms(&self) -> Option<Vec<Rat>> {
        if let Some(t) = &self.ap_terms {
            return Some(t.clone());
        }
        self.ap
            .as_ref()
            .map(|d| d.terms().into_iter().map(|x| Rat::from_integer(x.into())).collect())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Pretty JSON with a trailing newline, the format every CLI output uses.
pub fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Integrity(format!("serialize: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_round_trip() {
        let text = r#"{"field": "integer", "elements": ["-3", 2, "5"], "ap_terms": ["4", "6", "10"]}"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.elements, Elements::Integer(vec![(-3).into(), 2.into(), 5.into()]));
        let again = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(again, inst);
        assert_eq!(again.to_json(), inst.to_json());
    }

    #[test]
    fn quadratic_round_trip() {
        let text = r#"{"field": "quadratic", "m": "-1", "elements": [{"a": "1", "b": "1"}, {"a": "1/2", "b": "-1/2"}, "3"]}"#;
        let inst = Instance::from_json(text).unwrap();
        let Elements::Quadratic { field, elements } = &inst.elements else { panic!() };
        assert_eq!(field.radicand(), &BigInt::from(-1));
        assert!(elements[2].is_rational());
        assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(Instance::from_json(r#"{"field": "integer", "elements": ["1", "1"]}"#).is_err());
        assert!(Instance::from_json(r#"{"field": "integer", "elements": []}"#).is_err());
        assert!(Instance::from_json(r#"{"field": "quadratic", "elements": ["1"]}"#).is_err());
        assert!(Instance::from_json(r#"{"field": "quadratic", "m": "4", "elements": ["1"]}"#).is_err());
        assert!(Instance::from_json(r#"{"field": "integer", "elements": ["x"]}"#).is_err());
        assert!(Instance::from_json(r#"{"field": "integer", "elements": ["1"], "extra": 1}"#).is_err());
        let mismatch = r#"{"field": "integer", "elements": ["1"], "ap": {"D": "1", "r": "1", "d": "1", "L": 3}, "ap_terms": ["1", "2", "4"]}"#;
        assert!(Instance::from_json(mismatch).is_err());
        let bad_ap = r#"{"field": "integer", "elements": ["1"], "ap": {"D": "1", "r": "1", "d": "1", "L": 2}}"#;
        assert!(Instance::from_json(bad_ap).is_err());
    }
}
