//! JSON form of a representation graph, written by `graph` and read back by
//! `cycles` and `irregular`.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::apcore::ApDescriptor;
use crate::error::{Error, Result};
use crate::exactnum::json::{self, QuadRepr};
use crate::exactnum::{QuadElem, Rat};
use crate::harness::instance::{ElementRepr, FieldTag};
use crate::prodset::{RepEdge, RepGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRepr {
    /// Left-copy vertex id.
    pub u: usize,
    /// Right-copy vertex id (`|B| + j`).
    pub v: usize,
    pub index: usize,
    pub value: ElementRepr,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub field: FieldTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<String>,
    pub left: Vec<ElementRepr>,
    pub right: Vec<ElementRepr>,
    pub edges: Vec<EdgeRepr>,
    /// `(neighbour, edge)` pairs per vertex.
    pub adjacency: Vec<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ap: Option<ApDescriptor>,
}

fn assemble<T: crate::prodset::Scalar>(
    g: &RepGraph<T>,
    field: FieldTag,
    m: Option<String>,
    repr: impl Fn(&T) -> ElementRepr,
    ap: Option<ApDescriptor>,
) -> GraphFile {
    let n = g.base().len();
    let values: Vec<ElementRepr> = g.base().iter().map(&repr).collect();
    GraphFile {
        field,
        m,
        left: values.clone(),
        right: values,
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeRepr { u: e.left, v: n + e.right, index: e.index, value: repr(&e.value) })
            .collect(),
        adjacency: g.adjacency(),
        ap,
    }
}

impl GraphFile {
    pub fn from_integer(g: &RepGraph<BigUint>, ap: Option<ApDescriptor>) -> Self {
        assemble(g, FieldTag::Integer, None, |x| ElementRepr::Text(x.to_string()), ap)
    }

    pub fn from_rational(g: &RepGraph<Rat>) -> Self {
        assemble(g, FieldTag::Rational, None, |x| ElementRepr::Text(json::fmt_rat(x)), None)
    }

    pub fn from_quadratic(g: &RepGraph<QuadElem>, m: String) -> Self {
        assemble(g, FieldTag::Quadratic, Some(m), |x| ElementRepr::Quad(QuadRepr::from_elem(x, false)), None)
    }

    /// Rebuilds an integer graph, re-validating every edge label.
    pub fn to_integer(&self) -> Result<RepGraph<BigUint>> {
        if self.field != FieldTag::Integer {
            return Err(Error::Input("only integer graphs can be audited".into()));
        }
        let nat = |e: &ElementRepr| match e {
            ElementRepr::Text(s) => json::parse_nat(s),
            ElementRepr::Number(v) if *v >= 0 => Ok(BigUint::from(*v as u64)),
            other => Err(Error::Input(format!("not a natural number: {other:?}"))),
        };
        let base = self.left.iter().map(nat).collect::<Result<Vec<_>>>()?;
        if self.right != self.left {
            return Err(Error::Input("left and right copies differ".into()));
        }
        let n = base.len();
        let edges = self
            .edges
            .iter()
            .map(|e| {
                if e.u >= n || e.v < n || e.v >= 2 * n {
                    return Err(Error::Input(format!("edge ({}, {}) does not join the two copies", e.u, e.v)));
                }
                Ok(RepEdge { left: e.u, right: e.v - n, index: e.index, value: nat(&e.value)? })
            })
            .collect::<Result<Vec<_>>>()?;
        RepGraph::from_edges(base, edges).map_err(|e| Error::Input(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prodset::build_rep_graph;

    #[test]
    fn integer_round_trip() {
        let base: Vec<BigUint> = [1u64, 2, 3, 4, 6].iter().map(|&x| BigUint::from(x)).collect();
        let terms: Vec<BigUint> = [2u64, 3, 4].iter().map(|&x| BigUint::from(x)).collect();
        let g = build_rep_graph(&base, &terms).unwrap();
        let file = GraphFile::from_integer(&g, Some(ApDescriptor::from_terms(&terms).unwrap()));
        let text = serde_json::to_string(&file).unwrap();
        let back: GraphFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_integer().unwrap(), g);
        let mut bad = back.clone();
        bad.edges[0].value = ElementRepr::Text("5".into());
        assert!(bad.to_integer().is_err());
    }
}
