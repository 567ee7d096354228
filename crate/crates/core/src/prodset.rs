//! Product sets with representation tracking, the doubled bipartite
//! representation graph, and longest-progression search.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;
use std::ops::{Add, Div, Sub};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::apcore::ApDescriptor;
use crate::error::{Error, Result};
use crate::exactnum::{QuadElem, Rat};

/// Element types a product set can be formed over.
pub trait Scalar: Clone + Ord + Hash + Debug + Send + Sync {
    fn product(&self, other: &Self) -> Self;
}

impl Scalar for BigUint {
    fn product(&self, other: &Self) -> Self {
        self * other
    }
}

impl Scalar for Rat {
    fn product(&self, other: &Self) -> Self {
        self * other
    }
}

impl Scalar for QuadElem {
    /// Panics on mixed radicands; instances validate their field up front.
    fn product(&self, other: &Self) -> Self {
        self.checked_mul(other).expect("quadratic elements from different fields")
    }
}

fn sorted_distinct<T: Scalar>(base: &[T]) -> Result<Vec<T>> {
    if base.is_empty() {
        return Err(Error::Input("base set is empty".into()));
    }
    let mut b = base.to_vec();
    b.sort();
    if let Some(w) = b.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Input(format!("duplicate base element {:?}", w[0])));
    }
    Ok(b)
}

/// `B.B` with every representation `B[i]·B[j]`, `i <= j`, recorded in
/// lexicographic pair order.
#[derive(Clone, Debug)]
pub struct ProductSet<T> {
    base: Vec<T>,
    products: Vec<T>,
    reps: BTreeMap<T, Vec<(usize, usize)>>,
}

impl<T: Scalar> ProductSet<T> {
    pub fn new(base: &[T]) -> Result<Self> {
        let base = sorted_distinct(base)?;
        let mut reps: BTreeMap<T, Vec<(usize, usize)>> = BTreeMap::new();
        for i in 0..base.len() {
            for j in i..base.len() {
                reps.entry(base[i].product(&base[j])).or_default().push((i, j));
            }
        }
        let products = reps.keys().cloned().collect();
        Ok(ProductSet { base, products, reps })
    }

    pub fn base(&self) -> &[T] {
        &self.base
    }

    pub fn products(&self) -> &[T] {
        &self.products
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    pub fn contains(&self, x: &T) -> bool {
        self.reps.contains_key(x)
    }

    /// Index pairs `(i, j)` with `B[i]·B[j] = x`, lexicographic.
    pub fn representations(&self, x: &T) -> &[(usize, usize)] {
        self.reps.get(x).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// `B.B` sorted and deduplicated, without representation bookkeeping.
pub fn product_set<T: Scalar>(base: &[T]) -> Result<Vec<T>> {
    let base = sorted_distinct(base)?;
    let mut out = Vec::with_capacity(base.len() * (base.len() + 1) / 2);
    for i in 0..base.len() {
        for j in i..base.len() {
            out.push(base[i].product(&base[j]));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// One edge per progression term: `left` indexes the first copy of `B`,
/// `right` the second, and `value = B[left]·B[right]` is term `index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepEdge<T> {
    pub left: usize,
    pub right: usize,
    pub index: usize,
    pub value: T,
}

/// Simple bipartite graph on two copies of `B`. Vertex ids are `0..n` for
/// the left copy and `n..2n` for the right copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepGraph<T> {
    base: Vec<T>,
    edges: Vec<RepEdge<T>>,
    lookup: HashMap<(usize, usize), usize>,
}

impl<T: Scalar> RepGraph<T> {
    /// Assembles a graph from explicit edges, checking simplicity and the
    /// product labels.
    pub fn from_edges(base: Vec<T>, edges: Vec<RepEdge<T>>) -> Result<Self> {
        let n = base.len();
        let mut seen = HashSet::new();
        for e in &edges {
            if e.left >= n || e.right >= n {
                return Err(Error::Shape(format!("edge {} points outside the base", e.index)));
            }
            if !seen.insert((e.left, e.right)) {
                return Err(Error::Shape(format!(
                    "parallel edges between {} and {}",
                    e.left, e.right
                )));
            }
            if base[e.left].product(&base[e.right]) != e.value {
                return Err(Error::Shape(format!("edge {} value is not its endpoint product", e.index)));
            }
        }
        Ok(Self::assemble(base, edges))
    }

    fn assemble(base: Vec<T>, edges: Vec<RepEdge<T>>) -> Self {
        let lookup = edges.iter().enumerate().map(|(k, e)| ((e.left, e.right), k)).collect();
        RepGraph { base, edges, lookup }
    }

    pub fn base(&self) -> &[T] {
        &self.base
    }

    pub fn edges(&self) -> &[RepEdge<T>] {
        &self.edges
    }

    /// Number of vertices, `2|B|`.
    pub fn order(&self) -> usize {
        2 * self.base.len()
    }

    pub fn side(&self, v: usize) -> (Side, usize) {
        let n = self.base.len();
        if v < n {
            (Side::Left, v)
        } else {
            (Side::Right, v - n)
        }
    }

    pub fn vertex_value(&self, v: usize) -> &T {
        &self.base[self.side(v).1]
    }

    /// Vertex ids of edge `e`.
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let edge = &self.edges[e];
        (edge.left, self.base.len() + edge.right)
    }

    /// `(neighbour, edge position)` lists, sorted by neighbour id.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.order()];
        for e in 0..self.edges.len() {
            let (u, v) = self.endpoints(e);
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Position of the edge joining `u` and `v`, in either order.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        let n = self.base.len();
        if u >= n || v < n || v >= 2 * n {
            return None;
        }
        self.lookup.get(&(u, v - n)).copied()
    }
}

/// The representation graph of `terms` over `base`: for each term, the
/// lexicographically first pair `(B[i], B[j])`, `i <= j`, with product equal
/// to the term, placed between `B[i]` in the left copy and `B[j]` in the
/// right copy.
pub fn build_rep_graph<T: Scalar>(base: &[T], terms: &[T]) -> Result<RepGraph<T>> {
    let base = sorted_distinct(base)?;
    let mut wanted: BTreeMap<&T, usize> = BTreeMap::new();
    for (k, a) in terms.iter().enumerate() {
        if wanted.insert(a, k).is_some() {
            return Err(Error::Input(format!("repeated progression term {a:?}")));
        }
    }
    let mut chosen: Vec<Option<(usize, usize)>> = vec![None; terms.len()];
    let mut missing = terms.len();
    'scan: for i in 0..base.len() {
        for j in i..base.len() {
            let p = base[i].product(&base[j]);
            if let Some(&k) = wanted.get(&p) {
                if chosen[k].is_none() {
                    chosen[k] = Some((i, j));
                    missing -= 1;
                    if missing == 0 {
                        break 'scan;
                    }
                }
            }
        }
    }
    let mut edges = Vec::with_capacity(terms.len());
    for (k, a) in terms.iter().enumerate() {
        let (i, j) = chosen[k].ok_or_else(|| Error::Representation { term: format!("{a:?}") })?;
        edges.push(RepEdge { left: i, right: j, index: k, value: a.clone() });
    }
    Ok(RepGraph::assemble(base, edges))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    #[default]
    Exact,
    Oracle,
}

impl std::str::FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SearchMode::Exact),
            "oracle" => Ok(SearchMode::Oracle),
            other => Err(Error::Input(format!("unknown search mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    /// Largest `|S|` for exact mode.
    pub exact_max: usize,
    /// Largest `|S|·(max S - min S)` for the oracle.
    pub oracle_work: u128,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { exact_max: 200_000, oracle_work: 50_000_000 }
    }
}

/// A longest progression found in a sorted set. Lengths 1 and 2 are
/// reported but are not progressions in the descriptor sense.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LongestAp {
    #[serde(with = "crate::exactnum::json::nat")]
    pub start: BigUint,
    #[serde(with = "crate::exactnum::json::nat")]
    pub difference: BigUint,
    pub length: usize,
    /// Positions of the terms in the searched set.
    pub witness: Vec<usize>,
}

impl LongestAp {
    /// `D = 1`, `r = start`, `d = difference`; `None` below three terms.
    pub fn descriptor(&self) -> Option<ApDescriptor> {
        ApDescriptor::new(BigUint::from(1u32), self.start.clone(), self.difference.clone(), self.length).ok()
    }

    pub fn terms(&self) -> Vec<BigUint> {
        (0..self.length)
            .map(|i| &self.start + &self.difference * BigUint::from(i))
            .collect()
    }
}

struct Found<T> {
    start: T,
    diff: T,
    len: usize,
}

fn beats<T: Ord>(len: usize, diff: &T, start: &T, best: &Found<T>) -> bool {
    len > best.len || (len == best.len && (diff, start) < (&best.diff, &best.start))
}

/// Pairwise extension with pruning: a start pair is only extended when it
/// could still reach the current best length, and starts with a predecessor
/// in the set are skipped because the predecessor yields a longer run.
fn exact_search<T>(s: &[T]) -> Found<T>
where
    T: Clone + Ord + Hash + Zero + From<u64>,
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Div<&'a T, Output = T>,
{
    let n = s.len();
    if n == 1 {
        return Found { start: s[0].clone(), diff: T::zero(), len: 1 };
    }
    let members: HashSet<&T> = s.iter().collect();
    let mut best = {
        let mut b = Found { start: s[0].clone(), diff: &s[1] - &s[0], len: 2 };
        for w in s.windows(2) {
            let g = &w[1] - &w[0];
            if g < b.diff {
                b = Found { start: w[0].clone(), diff: g, len: 2 };
            }
        }
        b
    };
    let max = &s[n - 1];
    for i in 0..n {
        let x = &s[i];
        let room = max - x;
        for y in &s[i + 1..] {
            let diff = y - x;
            let steps = T::from((best.len - 1) as u64);
            if diff > &room / &steps {
                break;
            }
            if *x >= diff && members.contains(&(x - &diff)) {
                continue;
            }
            let mut len = 2;
            let mut next = y + &diff;
            while members.contains(&next) {
                len += 1;
                next = &next + &diff;
            }
            if len >= 3 && beats(len, &diff, x, &best) {
                best = Found { start: x.clone(), diff, len };
            }
        }
    }
    best
}

/// Brute force over every start and every difference up to the span, with
/// ordered-set membership; ties go to the first hit in (difference, start)
/// order.
fn oracle_search(s: &[u64]) -> Found<u64> {
    let members: BTreeSet<u64> = s.iter().copied().collect();
    if s.len() == 1 {
        return Found { start: s[0], diff: 0, len: 1 };
    }
    let span = s[s.len() - 1] - s[0];
    let mut best = Found { start: 0, diff: 0, len: 0 };
    for diff in 1..=span {
        for &start in s {
            let mut len = 1;
            while members.contains(&(start + diff * len as u64)) {
                len += 1;
            }
            if len > best.len {
                best = Found { start, diff, len };
            }
        }
    }
    best
}

fn check_sorted(s: &[BigUint]) -> Result<()> {
    if s.is_empty() {
        return Err(Error::Input("cannot search an empty set".into()));
    }
    if s.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input("set must be sorted and distinct".into()));
    }
    Ok(())
}

/// Longest arithmetic progression in the sorted distinct set `s`, ties
/// broken by smallest difference and then smallest start.
pub fn longest_ap(s: &[BigUint], mode: SearchMode, limits: SearchLimits) -> Result<LongestAp> {
    check_sorted(s)?;
    let max = s.last().unwrap();
    let small = max.to_u64().filter(|&m| m < 1 << 62);
    let found: Found<BigUint> = match mode {
        SearchMode::Exact => {
            if s.len() > limits.exact_max {
                return Err(Error::capacity(
                    "exact longest-AP search (try raising the limit)",
                    s.len(),
                    limits.exact_max,
                ));
            }
            match small {
                Some(_) => {
                    let words: Vec<u64> = s.iter().map(|x| x.to_u64().unwrap()).collect();
                    let f = exact_search(&words);
                    Found { start: f.start.into(), diff: f.diff.into(), len: f.len }
                }
                None => exact_search(s),
            }
        }
        SearchMode::Oracle => {
            let span = max - &s[0];
            let work = span.to_u128().map(|sp| sp.saturating_mul(s.len() as u128));
            match (small, work) {
                (Some(_), Some(w)) if w <= limits.oracle_work => {
                    let words: Vec<u64> = s.iter().map(|x| x.to_u64().unwrap()).collect();
                    let f = oracle_search(&words);
                    Found { start: f.start.into(), diff: f.diff.into(), len: f.len }
                }
                _ => {
                    return Err(Error::capacity(
                        "oracle longest-AP search (use exact mode)",
                        format!("|S|·span = {}·{}", s.len(), span),
                        limits.oracle_work,
                    ))
                }
            }
        }
    };
    let witness = (0..found.len)
        .map(|i| {
            let t = &found.start + &found.diff * BigUint::from(i);
            s.binary_search(&t).expect("progression term outside the set")
        })
        .collect();
    Ok(LongestAp { start: found.start, difference: found.diff, length: found.len, witness })
}

/// Whether every term of `desc` lies in the sorted set `s`.
pub fn contains_ap(s: &[BigUint], desc: &ApDescriptor) -> bool {
    (0..desc.len).all(|i| s.binary_search(&desc.term(i)).is_ok())
}
