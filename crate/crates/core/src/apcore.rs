//! Arithmetic-progression descriptors, the canonical reduction of a
//! progression inside a product set, and the pairwise-gcd audit.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{json, valuation, Sieve};

/// A progression in the form `D·(r + d·i)`, `i = 0..L-1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ApDescriptor {
    /// Common factor `D`.
    #[serde(rename = "D", with = "json::nat")]
    pub common: BigUint,
    /// Reduced start `r`.
    #[serde(rename = "r", with = "json::nat")]
    pub start: BigUint,
    /// Reduced difference `d`.
    #[serde(rename = "d", with = "json::nat")]
    pub step: BigUint,
    /// Number of terms `L`.
    #[serde(rename = "L")]
    pub len: usize,
}

impl ApDescriptor {
    pub fn new(common: BigUint, start: BigUint, step: BigUint, len: usize) -> Result<Self> {
        let desc = ApDescriptor { common, start, step, len };
        desc.validate()?;
        Ok(desc)
    }

    pub fn from_u64(common: u64, start: u64, step: u64, len: usize) -> Result<Self> {
        Self::new(common.into(), start.into(), step.into(), len)
    }

    /// Rejects zero fields and progressions shorter than three terms.
    pub fn validate(&self) -> Result<()> {
        if self.common.is_zero() || self.start.is_zero() {
            return Err(Error::Shape("progression terms must be positive".into()));
        }
        if self.step.is_zero() {
            return Err(Error::Shape("progression difference must be positive".into()));
        }
        if self.len < 3 {
            return Err(Error::Shape(format!(
                "progressions need at least 3 terms, got {}",
                self.len
            )));
        }
        Ok(())
    }

    /// Reads a progression off its terms, with `D = gcd(first, difference)`.
    pub fn from_terms(terms: &[BigUint]) -> Result<Self> {
        let diff = check_progression(terms)?;
        let first = &terms[0];
        let common = first.gcd(&diff);
        Self::new(common.clone(), first / &common, diff / &common, terms.len())
    }

    pub fn term(&self, i: usize) -> BigUint {
        &self.common * (&self.start + &self.step * BigUint::from(i))
    }

    pub fn terms(&self) -> Vec<BigUint> {
        (0..self.len).map(|i| self.term(i)).collect()
    }

    /// Raw first term `D·r`.
    pub fn first(&self) -> BigUint {
        &self.common * &self.start
    }

    /// Raw difference `D·d`.
    pub fn difference(&self) -> BigUint {
        &self.common * &self.step
    }

    /// `gcd(d, D·r) = 1`.
    pub fn is_reduced(&self) -> bool {
        self.step.gcd(&self.first()).is_one()
    }

    pub(crate) fn require_reduced(&self) -> Result<()> {
        self.validate()?;
        if !self.is_reduced() {
            return Err(Error::Precondition(format!(
                "descriptor (D={}, r={}, d={}) is not reduced: gcd(d, D·r) ≠ 1",
                self.common, self.start, self.step
            )));
        }
        Ok(())
    }
}

/// Checks the shape of a term list and returns its positive difference.
pub fn check_progression(terms: &[BigUint]) -> Result<BigUint> {
    if terms.len() < 3 {
        return Err(Error::Shape(format!(
            "progressions need at least 3 terms, got {}",
            terms.len()
        )));
    }
    if terms[0].is_zero() {
        return Err(Error::Shape("progression terms must be positive".into()));
    }
    if terms[1] <= terms[0] {
        return Err(Error::Shape("progression must be strictly increasing".into()));
    }
    let diff = &terms[1] - &terms[0];
    for (i, w) in terms.windows(2).enumerate() {
        if w[1] <= w[0] || &w[1] - &w[0] != diff {
            return Err(Error::Shape(format!("terms {i} and {} break the common difference", i + 1)));
        }
    }
    Ok(diff)
}

/// Finds `b·b' = a` with `b <= b'` in `base`, smallest `b` first.
pub fn find_representation(
    a: &BigUint,
    base: &[BigUint],
    members: &HashSet<BigUint>,
) -> Option<(BigUint, BigUint)> {
    for b in base {
        if b * b > *a {
            break;
        }
        let (q, r) = a.div_rem(b);
        if r.is_zero() && members.contains(&q) {
            return Some((b.clone(), q));
        }
    }
    None
}

fn first_unrepresented<'a>(terms: &'a [BigUint], base: &[BigUint]) -> Option<&'a BigUint> {
    let members: HashSet<BigUint> = base.iter().cloned().collect();
    terms.iter().find(|a| find_representation(a, base, &members).is_none())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionCase {
    /// Pull out `gcd(first, difference)`; terminal.
    ExtractGcd,
    /// `ord_p(first) = 1`: divide every multiple of `p` in `B` by `p`.
    SingleFactor,
    /// `ord_p(first) >= 2`: split `B` by `ord_p` and divide by `1`, `p`, `p²`.
    Partition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub case: ReductionCase,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_nat")]
    pub prime: Option<BigUint>,
    /// `ord_p` of the current first term.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_valuation: Option<u32>,
    /// Divisor applied to each element of the incoming base, in order.
    #[serde(with = "json::nat_vec")]
    pub divisors: Vec<BigUint>,
    /// Base after the step (sorted, deduplicated).
    #[serde(with = "json::nat_vec")]
    pub base: Vec<BigUint>,
    /// Progression after the step.
    pub desc: ApDescriptor,
    /// Total prime-factor count of the base, with multiplicity.
    pub weight: u64,
}

mod opt_nat {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(n) => s.serialize_str(&n.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| crate::exactnum::json::parse_nat(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Ordered record of every reduction step.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
}

impl ReductionTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Whether the weight strictly decreases across the division steps.
    pub fn weight_decreases(&self, initial: u64) -> bool {
        let mut prev = initial;
        for step in self.steps.iter().filter(|s| s.case != ReductionCase::ExtractGcd) {
            if step.weight >= prev {
                return false;
            }
            prev = step.weight;
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    #[serde(with = "json::nat_vec")]
    pub base: Vec<BigUint>,
    pub desc: ApDescriptor,
    #[serde(with = "json::nat_vec")]
    pub terms: Vec<BigUint>,
    /// Weight of the input base, the reference point for the trace.
    pub initial_weight: u64,
    pub trace: ReductionTrace,
}

/// Total number of prime factors (with multiplicity) over the base.
pub fn base_weight(base: &[BigUint], sieve: &Sieve) -> Result<u64> {
    let mut total = 0u64;
    for b in base {
        if b > &BigUint::one() {
            total += sieve.factorize(b)?.iter().map(|&(_, e)| e as u64).sum::<u64>();
        }
    }
    Ok(total)
}

fn normalize_base(base: &[BigUint]) -> Result<Vec<BigUint>> {
    if base.iter().any(Zero::is_zero) {
        return Err(Error::Input("base elements must be positive".into()));
    }
    let mut b = base.to_vec();
    b.sort();
    b.dedup();
    Ok(b)
}

/// Smallest prime `p` with `1 <= ord_p(first) < ord_p(difference)`.
fn obstructing_prime(first: &BigUint, diff: &BigUint, sieve: &Sieve) -> Result<Option<(BigUint, u32)>> {
    let g = first.gcd(diff);
    if g.is_one() {
        return Ok(None);
    }
    for (p, e_first) in sieve.factorize(&g)? {
        // e_first counts p in g; recover the true valuations of both
        let vf = valuation(first, &p)?;
        let vd = valuation(diff, &p)?;
        debug_assert!(e_first >= 1);
        if vf < vd {
            return Ok(Some((p, vf)));
        }
    }
    Ok(None)
}

/// Canonical reduction of `(A, B)` to `A = {D(r + d·i)}` with
/// `gcd(d, D·r) = 1`, transforming `B` so the (rescaled) progression stays
/// inside `B.B`. Representability is re-checked by search after every step;
/// a step that loses a representation is reported as an integrity failure.
pub fn reduce_ap(terms: &[BigUint], base: &[BigUint], sieve: &Sieve) -> Result<Reduction> {
    let diff = check_progression(terms)?;
    let mut base = normalize_base(base)?;
    if let Some(a) = first_unrepresented(terms, &base) {
        return Err(Error::Representation { term: a.to_string() });
    }

    let len = terms.len();
    let mut first = terms[0].clone();
    let mut diff = diff;
    let mut trace = ReductionTrace::default();
    let mut initial_weight = None;
    let mut weight = 0;

    while let Some((p, k)) = obstructing_prime(&first, &diff, sieve)? {
        if initial_weight.is_none() {
            weight = base_weight(&base, sieve)?;
            initial_weight = Some(weight);
        }
        let p2 = &p * &p;
        let (case, divisors): (ReductionCase, Vec<BigUint>) = if k == 1 {
            let divs = base
                .iter()
                .map(|b| if (b % &p).is_zero() { p.clone() } else { BigUint::one() })
                .collect();
            (ReductionCase::SingleFactor, divs)
        } else {
            let mut divs = Vec::with_capacity(base.len());
            for b in &base {
                let v = valuation(b, &p)?;
                divs.push(if v == 0 {
                    BigUint::one()
                } else if v < k {
                    p.clone()
                } else {
                    p2.clone()
                });
            }
            (ReductionCase::Partition, divs)
        };
        let shrink = if k == 1 { p.clone() } else { p2 };
        let next: Vec<BigUint> = base.iter().zip(&divisors).map(|(b, d)| b / d).collect();
        let next = normalize_base(&next)?;
        first /= &shrink;
        diff /= &shrink;

        let current: Vec<BigUint> = (0..len).map(|i| &first + &diff * BigUint::from(i)).collect();
        if let Some(a) = first_unrepresented(&current, &next) {
            return Err(Error::Integrity(format!(
                "reduction by p = {p} ({case:?}, ord_p(first) = {k}) lost the representation of {a}"
            )));
        }
        weight = base_weight(&next, sieve)?;
        trace.steps.push(ReductionStep {
            case,
            prime: Some(p),
            start_valuation: Some(k),
            divisors,
            base: next.clone(),
            desc: ApDescriptor::from_terms(&current)?,
            weight,
        });
        base = next;
    }

    let common = first.gcd(&diff);
    let desc = ApDescriptor::new(common.clone(), &first / &common, &diff / &common, len)?;
    if !desc.is_reduced() {
        return Err(Error::Integrity(format!(
            "reduction terminated with unreduced descriptor (D={}, r={}, d={})",
            desc.common, desc.start, desc.step
        )));
    }
    if !common.is_one() {
        trace.steps.push(ReductionStep {
            case: ReductionCase::ExtractGcd,
            prime: None,
            start_valuation: None,
            divisors: vec![BigUint::one(); base.len()],
            base: base.clone(),
            desc: desc.clone(),
            weight,
        });
    }
    let terms = desc.terms();
    Ok(Reduction {
        base,
        desc,
        terms,
        initial_weight: initial_weight.unwrap_or(weight),
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcdAudit {
    pub ok: bool,
    /// `D·L`.
    #[serde(with = "json::nat")]
    pub bound: BigUint,
    /// Maximizing pair `(i, j, gcd)` with `j < i`.
    pub worst_i: usize,
    pub worst_j: usize,
    #[serde(with = "json::nat")]
    pub worst_gcd: BigUint,
}

fn binary_gcd(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

/// Exhaustive check that `gcd(a_i, a_j) <= D·L` for every pair of terms.
pub fn gcd_bound_audit(desc: &ApDescriptor) -> Result<GcdAudit> {
    desc.require_reduced()?;
    let bound = &desc.common * BigUint::from(desc.len);
    let last = desc.term(desc.len - 1);

    // (gcd, i, j) maximal by gcd, then earliest pair
    let pick = |a: (BigUint, usize, usize), b: (BigUint, usize, usize)| {
        if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
            b
        } else {
            a
        }
    };
    let init = || (BigUint::zero(), usize::MAX, usize::MAX);

    let (worst_gcd, worst_i, worst_j) = if last.to_u64().is_some() {
        let terms: Vec<u64> = desc.terms().iter().map(|t| t.to_u64().unwrap()).collect();
        let (g, i, j) = (1..terms.len())
            .into_par_iter()
            .map(|i| {
                let mut best = (0u64, i, 0usize);
                for j in 0..i {
                    let g = binary_gcd(terms[i], terms[j]);
                    if g > best.0 {
                        best = (g, i, j);
                    }
                }
                best
            })
            .reduce(|| (0, usize::MAX, usize::MAX), |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                    b
                } else {
                    a
                }
            });
        (BigUint::from(g), i, j)
    } else {
        let terms = desc.terms();
        (1..terms.len())
            .into_par_iter()
            .map(|i| {
                let mut best = init();
                for j in 0..i {
                    best = pick(best, (terms[i].gcd(&terms[j]), i, j));
                }
                best
            })
            .reduce(init, pick)
    };
    Ok(GcdAudit {
        ok: worst_gcd <= bound,
        bound,
        worst_i,
        worst_j,
        worst_gcd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::default_sieve;

    fn nats(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn ap_terms_examples() {
        let t = |d, r, s, l| ApDescriptor::from_u64(d, r, s, l).unwrap().terms();
        assert_eq!(t(1, 1, 1, 4), nats(&[1, 2, 3, 4]));
        assert_eq!(t(2, 3, 2, 3), nats(&[6, 10, 14]));
        assert_eq!(t(4, 2, 1, 3), nats(&[8, 12, 16]));
    }

    #[test]
    fn degenerate_descriptors_rejected() {
        assert!(matches!(ApDescriptor::from_u64(1, 1, 0, 4), Err(Error::Shape(_))));
        assert!(matches!(ApDescriptor::from_u64(1, 1, 1, 2), Err(Error::Shape(_))));
        assert!(matches!(check_progression(&nats(&[1, 2, 4])), Err(Error::Shape(_))));
        assert!(matches!(check_progression(&nats(&[5, 3, 1])), Err(Error::Shape(_))));
    }

    #[test]
    fn reduce_single_factor_case() {
        let red = reduce_ap(&nats(&[6, 10, 14]), &nats(&[2, 3, 5, 7]), default_sieve()).unwrap();
        assert_eq!(red.base, nats(&[1, 3, 5, 7]));
        assert_eq!(red.desc, ApDescriptor::from_u64(1, 3, 2, 3).unwrap());
        assert_eq!(red.terms, nats(&[3, 5, 7]));
        assert_eq!(red.trace.steps.len(), 1);
        let step = &red.trace.steps[0];
        assert_eq!(step.case, ReductionCase::SingleFactor);
        assert_eq!(step.prime, Some(BigUint::from(2u32)));
        assert_eq!(step.divisors, nats(&[2, 1, 1, 1]));
        assert!(red.trace.weight_decreases(red.initial_weight));
    }

    #[test]
    fn reduce_gcd_extraction_only() {
        let red = reduce_ap(&nats(&[8, 12, 16]), &nats(&[2, 4, 6, 8]), default_sieve()).unwrap();
        assert_eq!(red.desc, ApDescriptor::from_u64(4, 2, 1, 3).unwrap());
        assert_eq!(red.base, nats(&[2, 4, 6, 8]));
        assert_eq!(red.trace.steps.len(), 1);
        assert_eq!(red.trace.steps[0].case, ReductionCase::ExtractGcd);
    }

    #[test]
    fn reduce_identity() {
        let red = reduce_ap(&nats(&[3, 5, 7]), &nats(&[1, 3, 5, 7]), default_sieve()).unwrap();
        assert_eq!(red.base, nats(&[1, 3, 5, 7]));
        assert_eq!(red.desc, ApDescriptor::from_u64(1, 3, 2, 3).unwrap());
        assert!(red.trace.is_empty());
    }

    #[test]
    fn reduce_partition_case() {
        // A = 4·(1, 3, 5) = [4, 12, 20]: ord_2(4) = 2 < ord_2(8) = 3
        let base = nats(&[2, 4, 6, 10, 1, 3, 5]);
        let red = reduce_ap(&nats(&[4, 12, 20]), &base, default_sieve()).unwrap();
        assert_eq!(red.trace.steps[0].case, ReductionCase::Partition);
        assert_eq!(red.terms, nats(&[1, 3, 5]));
        assert!(red.desc.is_reduced());
        assert!(red.trace.weight_decreases(red.initial_weight));
    }

    #[test]
    fn reduce_errors() {
        match reduce_ap(&nats(&[6, 10, 14]), &nats(&[2, 3, 5]), default_sieve()) {
            Err(Error::Representation { term }) => assert_eq!(term, "14"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            reduce_ap(&nats(&[6, 10, 15]), &nats(&[2, 3, 5]), default_sieve()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn reduce_is_idempotent() {
        let red = reduce_ap(&nats(&[6, 10, 14]), &nats(&[2, 3, 5, 7]), default_sieve()).unwrap();
        let again = reduce_ap(&red.terms, &red.base, default_sieve()).unwrap();
        assert_eq!(again.base, red.base);
        assert_eq!(again.desc, red.desc);
    }

    #[test]
    fn gcd_audit_examples() {
        let a = gcd_bound_audit(&ApDescriptor::from_u64(1, 3, 2, 3).unwrap()).unwrap();
        assert!(a.ok);
        assert_eq!(a.worst_gcd, BigUint::one());

        let a = gcd_bound_audit(&ApDescriptor::from_u64(2, 1, 3, 4).unwrap()).unwrap();
        assert!(a.ok);
        assert_eq!((a.worst_i, a.worst_j), (3, 1));
        assert_eq!(a.worst_gcd, BigUint::from(4u32));
        assert_eq!(a.bound, BigUint::from(8u32));

        let a = gcd_bound_audit(&ApDescriptor::from_u64(1, 1, 1, 10).unwrap()).unwrap();
        assert!(a.ok);
        assert_eq!(a.worst_gcd, BigUint::from(5u32));
        assert_eq!((a.worst_i, a.worst_j), (9, 4));

        let unreduced = ApDescriptor::from_u64(1, 2, 2, 4).unwrap();
        assert!(matches!(gcd_bound_audit(&unreduced), Err(Error::Precondition(_))));
    }

    #[test]
    fn binary_gcd_matches_euclid() {
        for a in 0..60u64 {
            for b in 0..60u64 {
                assert_eq!(binary_gcd(a, b), a.gcd(&b));
            }
        }
    }
}
