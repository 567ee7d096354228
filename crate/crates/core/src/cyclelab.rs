//! Even cycles in the representation graph and what they force on the
//! progression.
//!
//! Around a cycle `b₁b₂…b₂ₖ` the products of alternate edges agree:
//! `∏ (r + j_even·d) = ∏ (r + j_odd·d)`. Expanding both sides gives
//! `Σ c_t r^{k-t} d^t = 0` with `c_t = e_t(j_even) - e_t(j_odd)`, and coprimality
//! of `r` and `d` then forces `d | c_l` and `r | c_m` for the lowest and
//! highest nonzero coefficients.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::apcore::ApDescriptor;
use crate::error::{Error, Result};
use crate::exactnum::json;
use crate::prodset::{RepGraph, Scalar};

/// A simple even cycle. Edge `t` (0-based) joins `vertices[t]` and
/// `vertices[t + 1]`, wrapping around. Counting edges from 1 as in
/// `b₁b₂, b₂b₃, …`, the "even" edges are those at 0-based odd positions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EvenCycle {
    pub vertices: Vec<usize>,
    /// Edge positions in the graph.
    pub edges: Vec<usize>,
    /// Progression indices `j` of the edges.
    pub indices: Vec<usize>,
}

/// Rotates to the smallest vertex and walks towards its smaller neighbour.
fn canonical_order(vs: &[usize]) -> Vec<usize> {
    let n = vs.len();
    let pos = (0..n).min_by_key(|&i| vs[i]).unwrap();
    let next = vs[(pos + 1) % n];
    let prev = vs[(pos + n - 1) % n];
    if next <= prev {
        (0..n).map(|t| vs[(pos + t) % n]).collect()
    } else {
        (0..n).map(|t| vs[(pos + n - t) % n]).collect()
    }
}

impl EvenCycle {
    /// Builds a cycle from a closed vertex walk, validating it against `g`
    /// and putting it in canonical order.
    pub fn from_vertices<T: Scalar>(g: &RepGraph<T>, vertices: &[usize]) -> Result<Self> {
        let cycle = Self::from_walk(g, &canonical_order(vertices))?;
        Ok(cycle)
    }

    /// Same as [`from_vertices`](Self::from_vertices) but keeps the given
    /// starting point and direction.
    pub fn from_walk<T: Scalar>(g: &RepGraph<T>, vertices: &[usize]) -> Result<Self> {
        let n = vertices.len();
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::Shape(format!("cycle of length {n} is not an even cycle of length >= 4")));
        }
        if vertices.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::Shape("cycle repeats a vertex".into()));
        }
        let mut edges = Vec::with_capacity(n);
        for t in 0..n {
            let (u, v) = (vertices[t], vertices[(t + 1) % n]);
            let e = g
                .edge_between(u, v)
                .ok_or_else(|| Error::Shape(format!("no edge between vertices {u} and {v}")))?;
            edges.push(e);
        }
        let indices: Vec<usize> = edges.iter().map(|&e| g.edges()[e].index).collect();
        if indices.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::Shape("cycle reuses a progression index".into()));
        }
        Ok(EvenCycle { vertices: vertices.to_vec(), edges, indices })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `k` for a cycle of length `2k`.
    pub fn half_len(&self) -> usize {
        self.vertices.len() / 2
    }

    /// The same cycle started `shift` vertices later.
    pub fn rotated<T: Scalar>(&self, g: &RepGraph<T>, shift: usize) -> Result<Self> {
        let n = self.len();
        let vs: Vec<usize> = (0..n).map(|t| self.vertices[(t + shift) % n]).collect();
        Self::from_walk(g, &vs)
    }

    /// Progression indices split into (even-position, odd-position) edges.
    pub fn split_indices(&self) -> (Vec<usize>, Vec<usize>) {
        let even = self.indices.iter().skip(1).step_by(2).copied().collect();
        let odd = self.indices.iter().step_by(2).copied().collect();
        (even, odd)
    }

    pub fn edge_values<'a, T: Scalar>(&self, g: &'a RepGraph<T>) -> Vec<&'a T> {
        self.edges.iter().map(|&e| &g.edges()[e].value).collect()
    }

    pub fn validate<T: Scalar>(&self, g: &RepGraph<T>) -> Result<()> {
        let fresh = Self::from_walk(g, &self.vertices)?;
        if fresh != *self {
            return Err(Error::Shape("cycle edge labels do not match the graph".into()));
        }
        Ok(())
    }
}

fn walk_back(parent: &[usize], mut v: usize) -> Vec<usize> {
    let mut path = vec![v];
    while parent[v] != usize::MAX {
        v = parent[v];
        path.push(v);
    }
    path.reverse();
    path
}

/// Shortest cycle of length at most `2k`, ties broken by canonical vertex
/// sequence. All cycles of the doubled graph are even.
pub fn find_even_cycle<T: Scalar>(g: &RepGraph<T>, k: usize) -> Option<EvenCycle> {
    let adj = g.adjacency();
    let order = g.order();
    let mut best: Option<Vec<usize>> = None;
    let mut dist = vec![usize::MAX; order];
    let mut parent = vec![usize::MAX; order];
    let mut parent_edge = vec![usize::MAX; order];
    for root in 0..order {
        if adj[root].len() < 2 {
            continue;
        }
        let cap = best.as_ref().map_or(2 * k, |b| b.len());
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        parent.iter_mut().for_each(|p| *p = usize::MAX);
        parent_edge.iter_mut().for_each(|p| *p = usize::MAX);
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] + 1 > cap {
                break;
            }
            for &(w, e) in &adj[u] {
                if e == parent_edge[u] {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    parent_edge[w] = e;
                    queue.push_back(w);
                    continue;
                }
                let len = dist[u] + dist[w] + 1;
                if len > cap || len < 4 {
                    continue;
                }
                let pu = walk_back(&parent, u);
                let pw = walk_back(&parent, w);
                let tail: BTreeSet<usize> = pu[1..].iter().copied().collect();
                if pw[1..].iter().any(|v| tail.contains(v)) {
                    continue;
                }
                let mut walk = pu;
                walk.extend(pw[1..].iter().rev());
                let cand = canonical_order(&walk);
                let better = match &best {
                    None => true,
                    Some(b) => (cand.len(), &cand) < (b.len(), b),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
    }
    best.map(|vs| EvenCycle::from_walk(g, &vs).expect("reconstructed cycle is valid"))
}

/// Shortest cycle of length at most `2k` that uses edge `e`.
pub fn shortest_cycle_through_edge<T: Scalar>(g: &RepGraph<T>, e: usize, k: usize) -> Option<EvenCycle> {
    let adj = g.adjacency();
    let (src, dst) = g.endpoints(e);
    let mut parent = vec![usize::MAX; g.order()];
    let mut dist = vec![usize::MAX; g.order()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        if u == dst {
            break;
        }
        // the path plus the closing edge must fit in 2k
        if dist[u] + 2 > 2 * k {
            continue;
        }
        for &(w, f) in &adj[u] {
            if f == e || dist[w] != usize::MAX {
                continue;
            }
            dist[w] = dist[u] + 1;
            parent[w] = u;
            queue.push_back(w);
        }
    }
    if dist[dst] == usize::MAX {
        return None;
    }
    let walk = walk_back(&parent, dst);
    EvenCycle::from_vertices(g, &walk).ok()
}

/// Distinct shortest cycles through each edge, in canonical order.
pub fn cycles_through_edges<T: Scalar>(g: &RepGraph<T>, k: usize) -> Vec<EvenCycle> {
    let found: BTreeSet<EvenCycle> = (0..g.edges().len())
        .filter_map(|e| shortest_cycle_through_edge(g, e, k))
        .collect();
    found.into_iter().collect()
}

/// Every even cycle of length at most `2k`, in canonical order. Fails with a
/// capacity error once more than `cap` cycles have been found.
pub fn enumerate_even_cycles<T: Scalar>(g: &RepGraph<T>, k: usize, cap: usize) -> Result<Vec<EvenCycle>> {
    let adj = g.adjacency();
    let mut found = BTreeSet::new();
    let mut on_path = vec![false; g.order()];
    for s in 0..g.order() {
        if adj[s].len() < 2 {
            continue;
        }
        // iterative DFS over simple paths from s through vertices above s
        let mut path = vec![s];
        let mut cursor = vec![0usize];
        on_path[s] = true;
        while let Some(&u) = path.last() {
            let depth = path.len() - 1;
            let next = cursor[depth];
            if next >= adj[u].len() {
                on_path[u] = false;
                path.pop();
                cursor.pop();
                continue;
            }
            cursor[depth] += 1;
            let w = adj[u][next].0;
            if w == s {
                // each cycle is met once per direction; keep one
                if path.len() >= 4 && path.len() % 2 == 0 && path[1] < path[path.len() - 1] {
                    found.insert(EvenCycle::from_vertices(g, &path)?);
                    if found.len() > cap {
                        return Err(Error::capacity("even cycles", found.len(), cap));
                    }
                }
                continue;
            }
            if w < s || on_path[w] || path.len() >= 2 * k {
                continue;
            }
            on_path[w] = true;
            path.push(w);
            cursor.push(0);
        }
    }
    Ok(found.into_iter().collect())
}

/// Whether the even-position product equals the odd-position product for a
/// closed sequence of edge values.
pub fn alternating_products_agree<T: Scalar>(values: &[&T]) -> Result<bool> {
    if values.len() < 4 || !values.len().is_multiple_of(2) {
        return Err(Error::Shape(format!("{} edge values do not close an even cycle", values.len())));
    }
    let prod = |parity: usize| {
        values
            .iter()
            .skip(parity)
            .step_by(2)
            .map(|v| (*v).clone())
            .reduce(|a, b| a.product(&b))
            .unwrap()
    };
    Ok(prod(1) == prod(0))
}

/// The product identity for a cycle of `g`.
pub fn cycle_identity_check<T: Scalar>(cycle: &EvenCycle, g: &RepGraph<T>) -> Result<bool> {
    cycle.validate(g)?;
    alternating_products_agree(&cycle.edge_values(g))
}

/// `e_0..e_n` of the given values.
pub fn elementary_symmetric(values: &[BigInt]) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); values.len() + 1];
    e[0] = BigInt::one();
    for (i, x) in values.iter().enumerate() {
        for t in (1..=i + 1).rev() {
            let add = &e[t - 1] * x;
            e[t] += add;
        }
    }
    e
}

/// Coefficients `c_0..c_k` of `∏(r + j_even d) - ∏(r + j_odd d)`, read as a
/// form in `r^{k-t} d^t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclePoly {
    pub k: usize,
    #[serde(with = "json::int_vec")]
    pub coefficients: Vec<BigInt>,
    /// Smallest index with a nonzero coefficient (`l`).
    pub low: usize,
    /// Largest index with a nonzero coefficient (`m`).
    pub high: usize,
    pub even_indices: Vec<usize>,
    pub odd_indices: Vec<usize>,
}

impl CyclePoly {
    pub fn from_split(even: &[usize], odd: &[usize]) -> Result<Self> {
        if even.len() != odd.len() || even.is_empty() {
            return Err(Error::Shape("even and odd index lists must be nonempty and equally long".into()));
        }
        let to_int = |v: &[usize]| v.iter().map(|&j| BigInt::from(j)).collect::<Vec<_>>();
        let ee = elementary_symmetric(&to_int(even));
        let eo = elementary_symmetric(&to_int(odd));
        let coefficients: Vec<BigInt> = ee.iter().zip(&eo).map(|(a, b)| a - b).collect();
        let nonzero: Vec<usize> = (0..coefficients.len()).filter(|&t| !coefficients[t].is_zero()).collect();
        let (Some(&low), Some(&high)) = (nonzero.first(), nonzero.last()) else {
            return Err(Error::Integrity(format!(
                "all cycle coefficients vanish for even indices {even:?} and odd indices {odd:?}"
            )));
        };
        Ok(CyclePoly {
            k: even.len(),
            coefficients,
            low,
            high,
            even_indices: even.to_vec(),
            odd_indices: odd.to_vec(),
        })
    }

    /// `Σ c_t r^{k-t} d^t`.
    pub fn evaluate(&self, r: &BigInt, d: &BigInt) -> BigInt {
        let k = self.k as u32;
        self.coefficients
            .iter()
            .enumerate()
            .map(|(t, c)| c * Pow::pow(r, k - t as u32) * Pow::pow(d, t as u32))
            .sum()
    }

    fn describe(&self) -> String {
        format!("cycle with even indices {:?} and odd indices {:?}", self.even_indices, self.odd_indices)
    }
}

/// The coefficient form of a genuine graph cycle. Every edge value must be
/// the descriptor's term at its index, and the form must vanish at `(r, d)`.
pub fn cycle_poly(cycle: &EvenCycle, g: &RepGraph<BigUint>, desc: &ApDescriptor) -> Result<CyclePoly> {
    cycle.validate(g)?;
    for &e in &cycle.edges {
        let edge = &g.edges()[e];
        if edge.index >= desc.len || desc.term(edge.index) != edge.value {
            return Err(Error::Precondition(format!(
                "edge value {} is not term {} of the descriptor",
                edge.value, edge.index
            )));
        }
    }
    let (even, odd) = cycle.split_indices();
    let poly = CyclePoly::from_split(&even, &odd)?;
    let value = poly.evaluate(&desc.start.clone().into(), &desc.step.clone().into());
    if !value.is_zero() {
        return Err(Error::Integrity(format!(
            "coefficient form evaluates to {value} on {}",
            poly.describe()
        )));
    }
    Ok(poly)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisibilityReport {
    #[serde(with = "json::int")]
    pub c_low: BigInt,
    #[serde(with = "json::int")]
    pub c_high: BigInt,
    pub d_divides_low: bool,
    pub r_divides_high: bool,
    /// `|c_t| <= 2·C(k,t)·(max j)^t` for every `t`.
    pub coefficient_bounds: bool,
    pub ok: bool,
}

fn binomial(n: usize, t: usize) -> BigUint {
    (0..t).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - i) / BigUint::from(i + 1))
}

/// Checks `d | c_l`, `r | c_m` and the coefficient size bound. Any failure
/// is an integrity error naming the cycle's indices.
pub fn divisibility_audit(poly: &CyclePoly, desc: &ApDescriptor) -> Result<DivisibilityReport> {
    if !desc.start.gcd(&desc.step).is_one() {
        return Err(Error::Precondition(format!(
            "divisibility needs coprime r = {} and d = {}",
            desc.start, desc.step
        )));
    }
    let r = BigInt::from(desc.start.clone());
    let d = BigInt::from(desc.step.clone());
    let c_low = poly.coefficients[poly.low].clone();
    let c_high = poly.coefficients[poly.high].clone();
    let d_divides_low = c_low.is_multiple_of(&d);
    let r_divides_high = c_high.is_multiple_of(&r);
    let max_j = poly
        .even_indices
        .iter()
        .chain(&poly.odd_indices)
        .max()
        .copied()
        .unwrap_or(0);
    let coefficient_bounds = poly.coefficients.iter().enumerate().all(|(t, c)| {
        let bound = BigUint::from(2u32) * binomial(poly.k, t) * BigUint::from(max_j).pow(t as u32);
        c.magnitude() <= &bound
    });
    let ok = d_divides_low && r_divides_high && coefficient_bounds;
    if !ok {
        return Err(Error::Integrity(format!(
            "divisibility audit failed (d | c_l: {d_divides_low}, r | c_m: {r_divides_high}, \
             bounds: {coefficient_bounds}) on {} with r = {r}, d = {d}",
            poly.describe()
        )));
    }
    Ok(DivisibilityReport { c_low, c_high, d_divides_low, r_divides_high, coefficient_bounds, ok })
}

/// `⌈100·k·n^{1+1/k}⌉`, the smallest `y` with `y^k >= (100kn)^k · n`.
pub fn bondy_simonovits_bound(n: u64, k: u32) -> Result<BigUint> {
    if n < 2 || k < 2 {
        return Err(Error::Precondition(format!("need n >= 2 and k >= 2, got n = {n}, k = {k}")));
    }
    let x = BigUint::from(100u32) * BigUint::from(k) * BigUint::from(n);
    let target = x.pow(k) * BigUint::from(n);
    let mut y = target.nth_root(k);
    if Pow::pow(&y, k) < target {
        y += 1u32;
    }
    Ok(y)
}

/// Everything the CLI reports for one cycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleAudit {
    pub cycle: EvenCycle,
    pub identity: bool,
    #[serde(with = "json::int_vec")]
    pub coefficients: Vec<BigInt>,
    pub l: usize,
    pub m: usize,
    pub divisibility: DivisibilityReport,
}

pub fn audit_cycle(cycle: &EvenCycle, g: &RepGraph<BigUint>, desc: &ApDescriptor) -> Result<CycleAudit> {
    let identity = cycle_identity_check(cycle, g)?;
    if !identity {
        return Err(Error::Integrity(format!("product identity fails on cycle {:?}", cycle.vertices)));
    }
    let poly = cycle_poly(cycle, g, desc)?;
    let divisibility = divisibility_audit(&poly, desc)?;
    Ok(CycleAudit {
        cycle: cycle.clone(),
        identity,
        coefficients: poly.coefficients,
        l: poly.low,
        m: poly.high,
        divisibility,
    })
}
