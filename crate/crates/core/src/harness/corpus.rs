//! Structured test corpora and the batch audits run over them.

use std::collections::{BTreeMap, HashSet};

use num_bigint::{BigInt, BigUint};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apcore::{reduce_ap, ApDescriptor};
use crate::construct::theorem2_set;
use crate::cyclelab::{audit_cycle, enumerate_even_cycles, EvenCycle};
use crate::error::{Error, Result};
use crate::exactnum::{json, QuadElem, QuadField, Rat, Sieve};
use crate::harness::study::trial_rng;
use crate::irregular::{irregular_audit, SelectedEdge};
use crate::prodset::{build_rep_graph, product_set, RepGraph};
use crate::rationalize::{FieldSet, QuadInstance};

/// A progression inside `B.B`, as raw terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusInstance {
    pub name: String,
    #[serde(with = "json::nat_vec")]
    pub base: Vec<BigUint>,
    #[serde(with = "json::nat_vec")]
    pub terms: Vec<BigUint>,
}

/// `{2^a 3^b : a, b <= 5}`.
pub fn smooth_corpus() -> Vec<BigUint> {
    let mut v: Vec<u64> = (0..=5).flat_map(|a| (0..=5).map(move |b| 2u64.pow(a) * 3u64.pow(b))).collect();
    v.sort_unstable();
    v.into_iter().map(BigUint::from).collect()
}

/// Divisors of `2⁴·3³·5²`.
pub fn divisor_corpus() -> Vec<BigUint> {
    let n = 16u64 * 27 * 25;
    (1..=n).filter(|d| n.is_multiple_of(*d)).map(BigUint::from).collect()
}

/// Every progression in the sorted set `s` of at least `min_len` terms that
/// cannot be extended in either direction.
pub fn maximal_progressions(s: &[BigUint], min_len: usize) -> Vec<Vec<BigUint>> {
    let min_len = min_len.max(2);
    let members: HashSet<&BigUint> = s.iter().collect();
    let Some(max) = s.last() else { return Vec::new() };
    let span = BigUint::from(min_len - 1);
    let mut out = Vec::new();
    for (i, x) in s.iter().enumerate() {
        for y in &s[i + 1..] {
            let diff = y - x;
            if x + &diff * &span > *max {
                break;
            }
            if x > &diff && members.contains(&(x - &diff)) {
                continue;
            }
            let mut run = vec![x.clone(), y.clone()];
            let mut next = y + &diff;
            while members.contains(&next) {
                run.push(next.clone());
                next += &diff;
            }
            if run.len() >= min_len {
                out.push(run);
            }
        }
    }
    out
}

fn instances_from(name: &str, base: &[BigUint], min_len: usize) -> Result<Vec<CorpusInstance>> {
    let products = product_set(base)?;
    Ok(maximal_progressions(&products, min_len)
        .into_iter()
        .enumerate()
        .map(|(k, terms)| CorpusInstance { name: format!("{name}#{k}"), base: base.to_vec(), terms })
        .collect())
}

/// Maximal progressions of length >= 4 in the product sets of the smooth and
/// divisor corpora, the interval `[1, ⌊n ln n⌋]` over the construction set
/// for `n = 10, 20, 30`, and the coprime sub-progressions of that interval
/// for `n = 100` with step 3 to 6.
pub fn structured_corpus(sieve: &Sieve) -> Result<Vec<CorpusInstance>> {
    let mut out = instances_from("smooth", &smooth_corpus(), 4)?;
    out.extend(instances_from("divisors", &divisor_corpus(), 4)?);
    out.extend(construction_corpus(&[10, 20, 30], sieve)?);
    out.extend(subprogression_corpus(100, 6, sieve)?);
    Ok(out)
}

/// Progressions `r + d·i` inside `[1, ⌊n ln n⌋]` for `3 <= d <= max_step` and
/// `1 <= r <= d` coprime to `d`; all of them lie in the product set of the
/// construction set.
pub fn subprogression_corpus(n: u64, max_step: u64, sieve: &Sieve) -> Result<Vec<CorpusInstance>> {
    let set = theorem2_set(n, sieve)?;
    let mut out = Vec::new();
    // d = 2 already carries millions of short cycles at n = 100
    for d in 3..=max_step {
        for r in (1..=d).filter(|r| num_integer::gcd(*r, d) == 1) {
            let terms: Vec<BigUint> = (r..=set.m).step_by(d as usize).map(BigUint::from).collect();
            if terms.len() >= 3 {
                out.push(CorpusInstance { name: format!("theorem2-n{n}-r{r}-d{d}"), base: set.base_big(), terms });
            }
        }
    }
    Ok(out)
}

pub fn construction_corpus(sizes: &[u64], sieve: &Sieve) -> Result<Vec<CorpusInstance>> {
    sizes
        .iter()
        .map(|&n| {
            let set = theorem2_set(n, sieve)?;
            Ok(CorpusInstance {
                name: format!("theorem2-n{n}"),
                base: set.base_big(),
                terms: (1..=set.m).map(BigUint::from).collect(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleFailure {
    pub instance: String,
    pub cycle: Vec<usize>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCorpusReport {
    pub instances: usize,
    pub instances_with_cycles: usize,
    pub cycles_audited: usize,
    /// Audited cycles by half-length `k`.
    pub by_half_len: BTreeMap<usize, usize>,
    pub failures: Vec<CycleFailure>,
}

/// Reduced progression, its base and its graph.
pub fn reduced_graph(inst: &CorpusInstance, sieve: &Sieve) -> Result<(ApDescriptor, RepGraph<BigUint>)> {
    let red = reduce_ap(&inst.terms, &inst.base, sieve)?;
    let g = build_rep_graph(&red.base, &red.terms)?;
    Ok((red.desc, g))
}

/// Upper limit on the cycles enumerated per instance.
pub const CYCLE_CAP: usize = 200_000;

/// Every even cycle of half-length up to `k_max` in every reduced instance,
/// audited exactly.
pub fn cycle_corpus_audit(corpus: &[CorpusInstance], k_max: usize, sieve: &Sieve) -> Result<CycleCorpusReport> {
    let per: Vec<(Vec<EvenCycle>, Vec<CycleFailure>)> = corpus
        .par_iter()
        .map(|inst| {
            let (desc, g) = reduced_graph(inst, sieve)?;
            let cycles = enumerate_even_cycles(&g, k_max, CYCLE_CAP)?;
            let mut failures = Vec::new();
            for c in &cycles {
                if let Err(e) = audit_cycle(c, &g, &desc) {
                    failures.push(CycleFailure {
                        instance: inst.name.clone(),
                        cycle: c.vertices.clone(),
                        message: e.to_string(),
                    });
                }
            }
            Ok((cycles.into_iter().collect(), failures))
        })
        .collect::<Result<_>>()?;
    let mut report = CycleCorpusReport { instances: corpus.len(), ..Default::default() };
    for (cycles, failures) in per {
        if !cycles.is_empty() {
            report.instances_with_cycles += 1;
        }
        report.cycles_audited += cycles.len();
        for c in &cycles {
            *report.by_half_len.entry(c.half_len()).or_default() += 1;
        }
        report.failures.extend(failures);
    }
    Ok(report)
}

/// A cycle inside a selected irregular set: the artifact written when the
/// forest property fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestCounterexample {
    pub instance: CorpusInstance,
    pub desc: ApDescriptor,
    pub selected: Vec<SelectedEdge>,
    pub cycle_edges: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestCorpusReport {
    pub instances: usize,
    pub nonempty_windows: usize,
    pub selected_edges: usize,
    pub max_window_divisors: usize,
    pub counterexamples: Vec<ForestCounterexample>,
}

pub fn forest_corpus_audit(corpus: &[CorpusInstance], sieve: &Sieve) -> Result<ForestCorpusReport> {
    let per: Vec<_> = corpus
        .par_iter()
        .map(|inst| {
            let (desc, g) = reduced_graph(inst, sieve)?;
            let report = irregular_audit(&g, &desc, sieve)?;
            Ok((inst, desc, report))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = ForestCorpusReport { instances: corpus.len(), ..Default::default() };
    for (inst, desc, report) in per {
        if !report.window.is_empty() {
            out.nonempty_windows += 1;
        }
        out.selected_edges += report.selected.len();
        out.max_window_divisors = out.max_window_divisors.max(report.max_window_divisors);
        if let Some(cycle_edges) = report.counterexample {
            out.counterexamples.push(ForestCounterexample {
                instance: inst.clone(),
                desc,
                selected: report.selected,
                cycle_edges,
            });
        }
    }
    Ok(out)
}

/// A quadratic instance built by splitting the construction set across a
/// unit-free surd `u`: `B = {λbu} ∪ {b/(λu)}`, so cross products give back
/// every `bb'` while same-side products stay irrational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitCase {
    pub instance: QuadInstance,
    /// First term of the progression; terms are `start + i`.
    pub start: Rat,
    pub n: u64,
}

pub const SPLIT_GENERATOR_ID: u64 = 101;

pub fn split_instance(seed: u64, index: u64, m: i64, sieve: &Sieve) -> Result<SplitCase> {
    let mut rng = trial_rng(seed, SPLIT_GENERATOR_ID, m.unsigned_abs(), index);
    let field = QuadField::with_sieve(BigInt::from(m), sieve)?;
    let n = rng.gen_range(10..=24u64);
    let set = theorem2_set(n, sieve)?;
    let nonzero = |rng: &mut rand_chacha::ChaCha8Rng| {
        let v: i64 = rng.gen_range(1..=3);
        if rng.gen_bool(0.5) {
            -v
        } else {
            v
        }
    };
    let (c, e) = (nonzero(&mut rng), nonzero(&mut rng));
    let lambda = Rat::new(BigInt::from(rng.gen_range(1..=4i64)), BigInt::from(rng.gen_range(1..=4i64)));
    let u = field.elem(Rat::from_integer(c.into()), Rat::from_integer(e.into()));
    if u.checked_mul(&u)?.is_rational() {
        return Err(Error::Integrity(format!("u = {u} has a rational square")));
    }
    let lu = u.scale(&lambda);
    let inv = lu.recip()?;
    let mut elements: Vec<QuadElem> = Vec::with_capacity(2 * set.base.len());
    for b in &set.base {
        let b = Rat::from_integer(BigInt::from(*b));
        elements.push(lu.scale(&b));
        elements.push(inv.scale(&b));
    }
    let lo = rng.gen_range(1..=set.m / 3);
    let terms: Vec<Rat> = (lo..=set.m).map(|x| Rat::from_integer(BigInt::from(x))).collect();
    let base = FieldSet::quadratic(field, elements)?;
    Ok(SplitCase { instance: QuadInstance::new(base, terms), start: Rat::from_integer(BigInt::from(lo)), n })
}

/// Progression indices of a cycle's edges, as rationals.
pub fn edge_offsets<T: crate::prodset::Scalar>(g: &RepGraph<T>, c: &EvenCycle) -> Vec<Rat> {
    c.edges.iter().map(|&e| Rat::from_integer(BigInt::from(g.edges()[e].index))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::default_sieve;

    fn nats(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn corpora_sizes() {
        assert_eq!(smooth_corpus().len(), 36);
        assert_eq!(divisor_corpus().len(), 60);
    }

    #[test]
    fn maximal_progressions_small() {
        let s = nats(&[1, 2, 3, 4, 6, 8]);
        let got = maximal_progressions(&s, 3);
        assert_eq!(got, vec![nats(&[1, 2, 3, 4]), nats(&[2, 4, 6, 8])]);
        assert!(maximal_progressions(&s, 5).is_empty());
        // [4, 6, 8] extends back to 2, so it is not maximal
        assert!(!got.contains(&nats(&[4, 6, 8])));
    }

    #[test]
    fn construction_instance_has_cycles() {
        let corpus = construction_corpus(&[10], default_sieve()).unwrap();
        let report = cycle_corpus_audit(&corpus, 5, default_sieve()).unwrap();
        assert!(report.cycles_audited > 0);
        assert!(report.failures.is_empty(), "{:?}", report.failures);
        let forest = forest_corpus_audit(&corpus, default_sieve()).unwrap();
        assert!(forest.counterexamples.is_empty());
    }

    #[test]
    fn split_instances_are_valid() {
        for m in [2, -1] {
            let case = split_instance(5, 0, m, default_sieve()).unwrap();
            let g = case.instance.quad_graph().unwrap();
            assert_eq!(g.edges().len(), case.instance.terms.len());
            assert!(g.edges().iter().all(|e| e.value.is_rational()));
        }
    }
}
