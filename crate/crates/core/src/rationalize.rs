//! Turning a base set in `Q(√m)` whose progression lies in `Q` into an
//! all-rational base that still represents every term.
//!
//! Within a connected component of the representation graph, the quotient
//! of two vertices an even path apart and the product of two vertices an odd
//! path apart are both rational: they telescope from the edge values. So
//! dividing one colour class by a pivot and multiplying the other by it
//! leaves every edge product unchanged and makes every vertex rational.

use std::collections::VecDeque;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclelab::{find_even_cycle, EvenCycle};
use crate::error::{Error, Result};
use crate::exactnum::{json, QuadElem, QuadField, Rat, Sieve};
use crate::prodset::{build_rep_graph, product_set, RepGraph, Scalar};

/// Scalars with exact division and a rationality test.
pub trait FieldScalar: Scalar {
    fn to_rat(&self) -> Option<Rat>;
    fn is_zero_elem(&self) -> bool;
    fn try_div(&self, rhs: &Self) -> Result<Self>;
}

impl FieldScalar for Rat {
    fn to_rat(&self) -> Option<Rat> {
        Some(self.clone())
    }

    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(self / rhs)
    }
}

impl FieldScalar for QuadElem {
    fn to_rat(&self) -> Option<Rat> {
        self.as_rational().cloned()
    }

    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        self.checked_div(rhs)
    }
}

/// A base set, either rational or inside one quadratic field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldSet {
    Rational(Vec<Rat>),
    Quadratic { field: QuadField, elements: Vec<QuadElem> },
}

impl FieldSet {
    pub fn quadratic(field: QuadField, elements: Vec<QuadElem>) -> Result<Self> {
        if let Some(x) = elements.iter().find(|x| !field.contains(x)) {
            return Err(Error::FieldMismatch {
                left: field.radicand().to_string(),
                right: x.radicand().to_string(),
            });
        }
        Ok(FieldSet::Quadratic { field, elements })
    }

    pub fn len(&self) -> usize {
        match self {
            FieldSet::Rational(v) => v.len(),
            FieldSet::Quadratic { elements, .. } => elements.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_rational(&self) -> bool {
        match self {
            FieldSet::Rational(_) => true,
            FieldSet::Quadratic { elements, .. } => elements.iter().all(QuadElem::is_rational),
        }
    }

    pub fn radicand(&self) -> Option<&BigInt> {
        match self {
            FieldSet::Rational(_) => None,
            FieldSet::Quadratic { field, .. } => Some(field.radicand()),
        }
    }
}

/// Divides every element by `√d`, for `d > 0`.
///
/// With `d = (s/q)²·m'` and `m'` squarefree: a square `d` keeps the field, a
/// rational set moves into `Q(√m')`, and a set already in `Q(√m')` stays
/// there. Anything else would need a second extension.
pub fn scale_by_sqrt_d(set: &FieldSet, d: &Rat, sieve: &Sieve) -> Result<FieldSet> {
    if !d.is_positive() {
        return Err(Error::Domain(format!("scaling needs d > 0, got {}", json::fmt_rat(d))));
    }
    let (p, q) = (d.numer().magnitude().clone(), d.denom().magnitude().clone());
    let (s, m) = sieve.square_split(&(&p * &q))?;
    // √d = (s/q)·√m
    let root = Rat::new(BigInt::from(s), BigInt::from(q));
    if m.is_one() {
        return Ok(match set {
            FieldSet::Rational(v) => FieldSet::Rational(v.iter().map(|x| x / &root).collect()),
            FieldSet::Quadratic { field, elements } => FieldSet::Quadratic {
                field: field.clone(),
                elements: elements.iter().map(|x| x.scale(&root.recip())).collect(),
            },
        });
    }
    let m = BigInt::from(m);
    match set {
        FieldSet::Rational(v) => {
            let field = QuadField::with_sieve(m.clone(), sieve)?;
            // x / ((s/q)√m) = x / ((s/q)·m) · √m
            let k = (&root * Rat::from_integer(m)).recip();
            let elements = v.iter().map(|x| field.elem(Rat::zero(), x * &k)).collect();
            Ok(FieldSet::Quadratic { field, elements })
        }
        FieldSet::Quadratic { field, elements } if field.radicand() == &m => {
            let divisor = field.root().scale(&root);
            let elements = elements.iter().map(|x| x.checked_div(&divisor)).collect::<Result<_>>()?;
            Ok(FieldSet::Quadratic { field: field.clone(), elements })
        }
        FieldSet::Quadratic { field, elements } if elements.iter().all(QuadElem::is_rational) => {
            let rational: Vec<Rat> = elements.iter().map(|x| x.a().clone()).collect();
            scale_by_sqrt_d(&FieldSet::Rational(rational), d, sieve).map_err(|e| match e {
                Error::Domain(msg) => Error::Domain(format!("{msg} (from Q(√{}))", field.radicand())),
                other => other,
            })
        }
        FieldSet::Quadratic { field, .. } => Err(Error::UnsupportedExtension(format!(
            "dividing elements of Q(√{}) by √{} needs Q(√{}, √{})",
            field.radicand(),
            json::fmt_rat(d),
            field.radicand(),
            m
        ))),
    }
}

/// Base set plus rational progression terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadInstance {
    pub base: FieldSet,
    pub terms: Vec<Rat>,
}

impl QuadInstance {
    pub fn new(base: FieldSet, terms: Vec<Rat>) -> Self {
        QuadInstance { base, terms }
    }

    pub fn quad_graph(&self) -> Result<RepGraph<QuadElem>> {
        match &self.base {
            FieldSet::Quadratic { field, elements } => {
                let terms: Vec<QuadElem> = self.terms.iter().map(|t| field.rational(t.clone())).collect();
                build_rep_graph(elements, &terms)
            }
            FieldSet::Rational(_) => Err(Error::Precondition("instance is rational".into())),
        }
    }

    pub fn rational_graph(&self) -> Result<RepGraph<Rat>> {
        match &self.base {
            FieldSet::Rational(v) => build_rep_graph(v, &self.terms),
            FieldSet::Quadratic { .. } => Err(Error::Precondition("instance is quadratic".into())),
        }
    }
}

/// `r` from a 4-cycle whose first two edges carry terms `r + i₁` and
/// `r + i₂` of a progression with difference 1.
pub fn four_cycle_r<T: FieldScalar>(g: &RepGraph<T>, cycle: &EvenCycle, i1: &Rat, i2: &Rat) -> Result<Rat> {
    cycle.validate(g)?;
    if cycle.len() != 4 {
        return Err(Error::Shape(format!("expected a 4-cycle, got length {}", cycle.len())));
    }
    let values = cycle.edge_values(g);
    let (v1, v2) = (values[0], values[1]);
    let q = v1.try_div(v2)?;
    let q = q.to_rat().ok_or_else(|| {
        Error::Integrity(format!("edge quotient {q:?} on 4-cycle {:?} is not rational", cycle.vertices))
    })?;
    // b₁/b₃ is the same quotient, read off the other side of the cycle
    let other = g.vertex_value(cycle.vertices[0]).try_div(g.vertex_value(cycle.vertices[2]))?;
    if other.to_rat().as_ref() != Some(&q) {
        return Err(Error::Integrity(format!("b₁/b₃ disagrees with the edge quotient on {:?}", cycle.vertices)));
    }
    if q.is_one() {
        return Err(Error::Shape(format!(
            "degenerate 4-cycle {:?}: adjacent edges carry the same term",
            cycle.vertices
        )));
    }
    let r = (i1 - &q * i2) / (&q - Rat::one());
    let check = |v: &T, i: &Rat| v.to_rat().as_ref() == Some(&(&r + i));
    if !check(v1, i1) || !check(v2, i2) {
        return Err(Error::Integrity(format!(
            "r = {} does not reproduce the edge terms at offsets {} and {}",
            json::fmt_rat(&r),
            json::fmt_rat(i1),
            json::fmt_rat(i2)
        )));
    }
    Ok(r)
}

/// Alternating product `a₁·a₂⁻¹·a₃·…` of the edge values along a simple
/// path. Even length gives `bᵢ/bⱼ`, odd length gives `bᵢ·bⱼ`.
pub fn path_parity_value<T: FieldScalar>(g: &RepGraph<T>, path: &[usize]) -> Result<Rat> {
    if path.len() < 2 {
        return Err(Error::Shape("a path needs at least one edge".into()));
    }
    let mut seen = std::collections::HashSet::new();
    if !path.iter().all(|v| seen.insert(*v)) {
        return Err(Error::Shape("path is not simple".into()));
    }
    let mut acc = Rat::one();
    for (t, w) in path.windows(2).enumerate() {
        let e = g
            .edge_between(w[0], w[1])
            .ok_or_else(|| Error::Shape(format!("no edge between {} and {}", w[0], w[1])))?;
        let value = &g.edges()[e].value;
        let a = value
            .to_rat()
            .ok_or_else(|| Error::Precondition(format!("edge value {value:?} is not rational")))?;
        if a.is_zero() {
            return Err(Error::Domain(format!("zero edge value between {} and {}", w[0], w[1])));
        }
        if t % 2 == 0 {
            acc *= a;
        } else {
            acc /= a;
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentColoring {
    pub white: Vec<usize>,
    pub black: Vec<usize>,
    pub pivot: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalizedSet {
    /// New value of each left-copy vertex.
    #[serde(with = "json::rat_vec")]
    pub left: Vec<Rat>,
    /// New value of each right-copy vertex.
    #[serde(with = "json::rat_vec")]
    pub right: Vec<Rat>,
    /// Distinct values of both copies, ascending.
    #[serde(with = "json::rat_vec")]
    pub elements: Vec<Rat>,
    pub components: Vec<ComponentColoring>,
    pub isolated: Vec<usize>,
}

/// Adjacency lists, vertex lists of the nontrivial components, and isolated
/// vertices.
type Components = (Vec<Vec<(usize, usize)>>, Vec<Vec<usize>>, Vec<usize>);

fn components<T: Scalar>(g: &RepGraph<T>) -> Components {
    let adj = g.adjacency();
    let mut seen = vec![false; g.order()];
    let mut comps = Vec::new();
    let mut isolated = Vec::new();
    for v in 0..g.order() {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        if adj[v].is_empty() {
            isolated.push(v);
            continue;
        }
        let mut comp = vec![v];
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &(w, _) in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    (adj, comps, isolated)
}

fn rationalize_component<T: FieldScalar>(
    g: &RepGraph<T>,
    adj: &[Vec<(usize, usize)>],
    comp: &[usize],
) -> Result<(ComponentColoring, Vec<(usize, Rat)>)> {
    let pivot = *comp.iter().min_by(|&&u, &&v| (g.vertex_value(u), u).cmp(&(g.vertex_value(v), v))).unwrap();
    let pv = g.vertex_value(pivot);
    if pv.is_zero_elem() {
        return Err(Error::Domain(format!("pivot vertex {pivot} is zero")));
    }
    // BFS tree from the pivot; depth parity is the colour
    let mut parent = std::collections::HashMap::from([(pivot, usize::MAX)]);
    let mut depth = std::collections::HashMap::from([(pivot, 0usize)]);
    let mut queue = VecDeque::from([pivot]);
    while let Some(u) = queue.pop_front() {
        let du = depth[&u];
        for &(w, _) in &adj[u] {
            if let std::collections::hash_map::Entry::Vacant(slot) = depth.entry(w) {
                slot.insert(du + 1);
                parent.insert(w, u);
                queue.push_back(w);
            }
        }
    }
    let mut white = Vec::new();
    let mut black = Vec::new();
    let mut values = Vec::with_capacity(comp.len());
    for &v in comp {
        let mut path = vec![v];
        while path.last() != Some(&pivot) {
            path.push(parent[path.last().unwrap()]);
        }
        path.reverse();
        let bv = g.vertex_value(v);
        let (value, direct) = if depth[&v] % 2 == 0 {
            white.push(v);
            // path value is b_pivot / b_v
            let telescoped = if v == pivot { Rat::one() } else { path_parity_value(g, &path)?.recip() };
            (telescoped, bv.try_div(pv)?)
        } else {
            black.push(v);
            (path_parity_value(g, &path)?, bv.product(pv))
        };
        match direct.to_rat() {
            Some(x) if x == value => values.push((v, value)),
            _ => {
                return Err(Error::Integrity(format!(
                    "vertex {v} of the component {comp:?} does not rationalize: {direct:?} vs path value {}",
                    json::fmt_rat(&value)
                )))
            }
        }
    }
    Ok((ComponentColoring { white, black, pivot }, values))
}

/// Component-wise rescaling of a representation graph with rational edge
/// values. Isolated vertices become 1.
pub fn rationalize_graph<T: FieldScalar>(g: &RepGraph<T>) -> Result<RationalizedSet> {
    for e in g.edges() {
        if e.value.to_rat().is_none() {
            return Err(Error::Precondition(format!("progression term {:?} is not rational", e.value)));
        }
    }
    let (adj, comps, isolated) = components(g);
    let done: Vec<(ComponentColoring, Vec<(usize, Rat)>)> =
        comps.par_iter().map(|c| rationalize_component(g, &adj, c)).collect::<Result<_>>()?;
    let n = g.base().len();
    let mut all = vec![Rat::one(); 2 * n];
    let mut colorings = Vec::with_capacity(done.len());
    for (coloring, values) in done {
        for (v, x) in values {
            all[v] = x;
        }
        colorings.push(coloring);
    }
    for (k, e) in g.edges().iter().enumerate() {
        let (u, v) = g.endpoints(k);
        if Some(&all[u] * &all[v]) != e.value.to_rat() {
            return Err(Error::Integrity(format!("edge {k} lost its term after rescaling")));
        }
    }
    let right = all.split_off(n);
    let mut elements: Vec<Rat> = all.iter().chain(&right).cloned().collect();
    elements.sort();
    elements.dedup();
    Ok(RationalizedSet { left: all, right, elements, components: colorings, isolated })
}

pub fn rationalize_components(inst: &QuadInstance) -> Result<RationalizedSet> {
    let out = match &inst.base {
        FieldSet::Rational(_) => rationalize_graph(&inst.rational_graph()?)?,
        FieldSet::Quadratic { .. } => rationalize_graph(&inst.quad_graph()?)?,
    };
    let products = product_set(&out.elements)?;
    if let Some(t) = inst.terms.iter().find(|t| products.binary_search(t).is_err()) {
        return Err(Error::Integrity(format!("term {} is not in B'.B'", json::fmt_rat(t))));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourCycleAudit {
    pub vertices: usize,
    pub edges: usize,
    /// `⌈(n/4)(1 + √(4n−3))⌉`.
    pub threshold: u64,
    pub triggered: bool,
    pub cycle: Option<EvenCycle>,
    /// False only if the edge count exceeds the threshold and no 4-cycle
    /// exists.
    pub ok: bool,
}

pub fn four_cycle_threshold(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let x = BigUint::from(n).pow(2) * BigUint::from(4 * n - 3);
    let mut s = x.sqrt();
    if &s * &s < x {
        s += 1u32;
    }
    let num = BigUint::from(n) + s;
    let t: BigUint = (num + 3u32) / 4u32;
    u64::try_from(t).expect("threshold fits in u64")
}

pub fn four_cycle_exists_audit<T: Scalar>(g: &RepGraph<T>) -> FourCycleAudit {
    let vertices = g.order();
    let edges = g.edges().len();
    let threshold = four_cycle_threshold(vertices as u64);
    let triggered = edges as u64 > threshold;
    let cycle = find_even_cycle(g, 2);
    let ok = !triggered || cycle.is_some();
    FourCycleAudit { vertices, edges, threshold, triggered, cycle, ok }
}
