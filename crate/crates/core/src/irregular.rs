//! Window primes `L/3 < p < L/2`, `p ∤ d`, and the edges whose product
//! carries more of `p` than the common factor `D` does.
//!
//! A set `S` of irregular edges that uses every window prime at most once
//! cannot contain a cycle: along a cycle the alternating products agree, so
//! both sides must carry the same power of each prime, which fails for the
//! prime owned by an edge of `S`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apcore::ApDescriptor;
use crate::error::{Error, Result};
use crate::exactnum::{valuation, Sieve};
use crate::prodset::RepGraph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeWindow {
    pub len: usize,
    pub primes: Vec<u64>,
}

impl PrimeWindow {
    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }
}

pub fn prime_window(desc: &ApDescriptor, sieve: &Sieve) -> Result<PrimeWindow> {
    desc.require_reduced()?;
    let l = desc.len as u64;
    // strict on both ends: 3p > L and 2p < L
    let lo = l / 3 + 1;
    let hi = (l - 1) / 2;
    let primes = if lo > hi {
        Vec::new()
    } else {
        let d = &desc.step;
        sieve
            .primes_in(lo, hi)?
            .into_iter()
            .filter(|&p| !(d % BigUint::from(p)).eq(&BigUint::from(0u32)))
            .collect()
    };
    Ok(PrimeWindow { len: desc.len, primes })
}

/// Number of indices `i < L` with `p | r + d·i`.
pub fn hit_count(p: u64, desc: &ApDescriptor, window: &PrimeWindow) -> Result<usize> {
    if !window.contains(p) || window.len != desc.len {
        return Err(Error::Precondition(format!("{p} is not a window prime for L = {}", desc.len)));
    }
    let pb = BigUint::from(p);
    let r = (&desc.start % &pb).to_u64_digits().first().copied().unwrap_or(0);
    let d = (&desc.step % &pb).to_u64_digits().first().copied().unwrap_or(0);
    Ok((0..desc.len as u64)
        .filter(|&i| (r as u128 + d as u128 * (i % p) as u128).is_multiple_of(p as u128))
        .count())
}

/// An edge of `S` with the window primes it is irregular for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedEdge {
    pub edge: usize,
    pub index: usize,
    pub primes: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrregularityReport {
    pub window: PrimeWindow,
    /// Window prime to the positions of its irregular edges, by ascending
    /// progression index.
    pub irregular: BTreeMap<u64, Vec<usize>>,
    pub selected: Vec<SelectedEdge>,
    pub forest: bool,
    /// Edges of a cycle inside `S`, if one was found.
    pub counterexample: Option<Vec<usize>>,
    /// Largest number of window primes dividing a single `r + d·i`.
    pub max_window_divisors: usize,
}

impl IrregularityReport {
    pub fn selected_edges(&self) -> Vec<usize> {
        self.selected.iter().map(|s| s.edge).collect()
    }
}

/// Fills in the per-prime irregular edges. Selection and the forest flag are
/// left empty.
pub fn classify_edges(g: &RepGraph<BigUint>, desc: &ApDescriptor, window: &PrimeWindow) -> Result<IrregularityReport> {
    for (pos, e) in g.edges().iter().enumerate() {
        if e.index >= desc.len || desc.term(e.index) != e.value {
            return Err(Error::Precondition(format!(
                "edge {pos} has value {} which is not term {} of the descriptor",
                e.value, e.index
            )));
        }
    }
    let per_prime: Vec<(u64, Vec<usize>)> = window
        .primes
        .par_iter()
        .map(|&p| {
            let pb = BigUint::from(p);
            let base = valuation(&desc.common, &pb)?;
            let mut hits: Vec<usize> = Vec::new();
            for (pos, e) in g.edges().iter().enumerate() {
                if valuation(&e.value, &pb)? > base {
                    hits.push(pos);
                }
            }
            hits.sort_by_key(|&pos| (g.edges()[pos].index, pos));
            Ok((p, hits))
        })
        .collect::<Result<_>>()?;
    let max_window_divisors = (0..desc.len)
        .map(|i| {
            let t = &desc.start + &desc.step * BigUint::from(i);
            window
                .primes
                .iter()
                .filter(|&&p| (&t % BigUint::from(p)) == BigUint::from(0u32))
                .count()
        })
        .max()
        .unwrap_or(0);
    Ok(IrregularityReport {
        window: window.clone(),
        irregular: per_prime.into_iter().collect(),
        selected: Vec::new(),
        forest: true,
        counterexample: None,
        max_window_divisors,
    })
}

/// Greedy by progression index: an edge joins `S` iff none of its window
/// primes is already used, and then uses all of them.
pub fn select_independent_irregulars(g: &RepGraph<BigUint>, report: &IrregularityReport) -> Vec<SelectedEdge> {
    let mut primes_of: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for (&p, edges) in &report.irregular {
        for &e in edges {
            primes_of.entry(e).or_default().push(p);
        }
    }
    let mut order: Vec<(usize, usize)> = primes_of.keys().map(|&e| (g.edges()[e].index, e)).collect();
    order.sort_unstable();
    let mut used = BTreeSet::new();
    let mut out = Vec::new();
    for (index, e) in order {
        let primes = &primes_of[&e];
        if primes.iter().any(|p| used.contains(p)) {
            continue;
        }
        used.extend(primes.iter().copied());
        out.push(SelectedEdge { edge: e, index, primes: primes.clone() });
    }
    out
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

pub fn forest_check<T: crate::prodset::Scalar>(g: &RepGraph<T>, edges: &[usize]) -> Result<bool> {
    Ok(find_cycle_in(g, edges)?.is_none())
}

/// Edges of a cycle inside the subgraph spanned by `edges`, if any.
pub fn find_cycle_in<T: crate::prodset::Scalar>(g: &RepGraph<T>, edges: &[usize]) -> Result<Option<Vec<usize>>> {
    let m = g.edges().len();
    if let Some(&bad) = edges.iter().find(|&&e| e >= m) {
        return Err(Error::Precondition(format!("edge {bad} is not in the graph ({m} edges)")));
    }
    let mut uf = UnionFind::new(g.order());
    let mut tree: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.order()];
    for &e in edges {
        let (u, v) = g.endpoints(e);
        if uf.union(u, v) {
            tree[u].push((v, e));
            tree[v].push((u, e));
            continue;
        }
        // close the cycle with the tree path from v back to u
        let mut via = vec![usize::MAX; g.order()];
        let mut seen = vec![false; g.order()];
        seen[u] = true;
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            for &(y, f) in &tree[x] {
                if !seen[y] {
                    seen[y] = true;
                    via[y] = f;
                    queue.push_back(y);
                }
            }
        }
        let mut cycle = vec![e];
        let mut x = v;
        while x != u {
            let f = via[x];
            cycle.push(f);
            let (a, b) = g.endpoints(f);
            x = if a == x { b } else { a };
        }
        return Ok(Some(cycle));
    }
    Ok(None)
}

/// Window, classification, greedy selection and forest check in one pass.
pub fn irregular_audit(g: &RepGraph<BigUint>, desc: &ApDescriptor, sieve: &Sieve) -> Result<IrregularityReport> {
    let window = prime_window(desc, sieve)?;
    let mut report = classify_edges(g, desc, &window)?;
    report.selected = select_independent_irregulars(g, &report);
    report.counterexample = find_cycle_in(g, &report.selected_edges())?;
    report.forest = report.counterexample.is_none();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{default_sieve, valuation_u64};
    use crate::prodset::{build_rep_graph, RepEdge};

    fn nats(v: impl IntoIterator<Item = u64>) -> Vec<BigUint> {
        v.into_iter().map(BigUint::from).collect()
    }

    fn desc(c: u64, r: u64, d: u64, l: usize) -> ApDescriptor {
        ApDescriptor::from_u64(c, r, d, l).unwrap()
    }

    #[test]
    fn window_examples() {
        let s = default_sieve();
        assert_eq!(prime_window(&desc(1, 1, 1, 31), s).unwrap().primes, vec![11, 13]);
        assert_eq!(prime_window(&desc(1, 1, 11, 31), s).unwrap().primes, vec![13]);
        assert!(prime_window(&desc(1, 1, 1, 10), s).unwrap().is_empty());
        // 2p = L and 3p = L are excluded
        assert_eq!(prime_window(&desc(1, 1, 1, 26), s).unwrap().primes, vec![11]);
        assert_eq!(prime_window(&desc(1, 1, 1, 33), s).unwrap().primes, vec![13]);
        // not reduced
        assert!(prime_window(&desc(1, 2, 2, 31), s).is_err());
    }

    #[test]
    fn hit_count_examples() {
        let s = default_sieve();
        let d1 = desc(1, 1, 1, 31);
        let w = prime_window(&d1, s).unwrap();
        assert_eq!(hit_count(11, &d1, &w).unwrap(), 2);
        assert_eq!(hit_count(13, &d1, &w).unwrap(), 2);
        let d2 = desc(1, 11, 1, 31);
        assert_eq!(hit_count(11, &d2, &prime_window(&d2, s).unwrap()).unwrap(), 3);
        assert!(hit_count(7, &d1, &w).is_err());
    }

    #[test]
    fn classification_on_one_to_31() {
        let s = default_sieve();
        let base = nats(1..=31);
        let terms = nats(1..=31);
        let g = build_rep_graph(&base, &terms).unwrap();
        let d = desc(1, 1, 1, 31);
        let report = irregular_audit(&g, &d, s).unwrap();
        let eleven = &report.irregular[&11];
        let values: Vec<u64> = eleven.iter().map(|&e| g.edges()[e].value.to_u64_digits()[0]).collect();
        assert_eq!(values, vec![11, 22]);
        assert!(report.forest);
        // 11 at index 10 and 13 at index 12; 22 and 26 reuse a prime
        assert_eq!(report.selected.iter().map(|x| x.index).collect::<Vec<_>>(), vec![10, 12]);
        assert!(report.max_window_divisors <= 1);
    }

    #[test]
    fn regular_at_equal_valuation() {
        let s = default_sieve();
        // D = 13, r = 1, d = 1, L = 31: term 13·(1 + 12) = 169 has ord_13 = 2 > 1
        let d = desc(13, 1, 1, 31);
        let terms = d.terms();
        let rest: Vec<u64> = (1..=31).filter(|&v| v != 13).collect();
        let mut base = nats([13]);
        base.extend(nats(rest.iter().copied()));
        let pos = |v: u64| if v == 13 { 0 } else { 1 + rest.iter().position(|&x| x == v).unwrap() };
        let edges: Vec<RepEdge<BigUint>> = (0..31)
            .map(|i| RepEdge { left: 0, right: pos(1 + i as u64), index: i, value: terms[i].clone() })
            .collect();
        let g = RepGraph::from_edges(base, edges).unwrap();
        let w = prime_window(&d, s).unwrap();
        let report = classify_edges(&g, &d, &w).unwrap();
        assert_eq!(report.irregular[&13], vec![12, 25]);
        // 13·(1 + 10) = 143 is 11-irregular since D carries no 11
        assert_eq!(report.irregular[&11], vec![10, 21]);
    }

    fn fake_report(irregular: &[(u64, &[usize])]) -> IrregularityReport {
        IrregularityReport {
            window: PrimeWindow { len: 0, primes: irregular.iter().map(|x| x.0).collect() },
            irregular: irregular.iter().map(|(p, e)| (*p, e.to_vec())).collect(),
            selected: Vec::new(),
            forest: true,
            counterexample: None,
            max_window_divisors: 0,
        }
    }

    fn path_graph(k: usize) -> RepGraph<BigUint> {
        let base = nats(1..=(k as u64 + 1));
        let edges = (0..k)
            .map(|i| RepEdge { left: i, right: i + 1, index: i, value: BigUint::from(((i + 1) * (i + 2)) as u64) })
            .collect();
        RepGraph::from_edges(base, edges).unwrap()
    }

    #[test]
    fn greedy_selection_examples() {
        let g = path_graph(3);
        let distinct = fake_report(&[(11, &[0]), (13, &[1]), (17, &[2])]);
        assert_eq!(select_independent_irregulars(&g, &distinct).len(), 3);
        let shared = fake_report(&[(11, &[0, 2])]);
        let s = select_independent_irregulars(&g, &shared);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].index, 0);
        // edge 2 is irregular for both 11 and 13, which edges 0 and 1 took
        let double = fake_report(&[(11, &[0, 2]), (13, &[1, 2])]);
        let s = select_independent_irregulars(&g, &double);
        assert_eq!(s.iter().map(|x| x.edge).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn forest_examples() {
        let base = nats([2, 3, 5, 7]);
        let edge = |l, r, index, v: u64| RepEdge { left: l, right: r, index, value: BigUint::from(v) };
        let g = RepGraph::from_edges(
            base,
            vec![edge(0, 1, 0, 6), edge(0, 2, 1, 10), edge(3, 1, 2, 21), edge(3, 2, 3, 35)],
        )
        .unwrap();
        assert!(forest_check(&g, &[]).unwrap());
        assert!(forest_check(&g, &[0, 1, 2]).unwrap());
        assert!(!forest_check(&g, &[0, 1, 2, 3]).unwrap());
        let mut c = find_cycle_in(&g, &[0, 1, 2, 3]).unwrap().unwrap();
        c.sort();
        assert_eq!(c, vec![0, 1, 2, 3]);
        assert!(forest_check(&g, &[9]).is_err());
    }

    #[test]
    fn hit_count_against_scan() {
        let s = default_sieve();
        for l in [31usize, 47, 100] {
            for d in 1..6u64 {
                for r in [1u64, 7, 11, 29] {
                    let dd = desc(1, r, d, l);
                    if !dd.is_reduced() {
                        continue;
                    }
                    let w = prime_window(&dd, s).unwrap();
                    for &p in &w.primes {
                        let scan = (0..l as u64).filter(|&i| valuation_u64(r + d * i, p) > 0).count();
                        assert_eq!(hit_count(p, &dd, &w).unwrap(), scan);
                    }
                }
            }
        }
    }
}
