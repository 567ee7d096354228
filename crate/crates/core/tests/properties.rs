use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use proptest::prelude::*;

use prodap::apcore::{gcd_bound_audit, reduce_ap, ApDescriptor};
use prodap::construct::coverage_check;
use prodap::exactnum::json::{fmt_rat, parse_rat};
use prodap::exactnum::{default_sieve, QuadField, Rat};
use prodap::harness::corpus::split_instance;
use prodap::harness::instance::Elements;
use prodap::harness::{absolutize, concavity_demo, integerize, Instance};
use prodap::irregular::{hit_count, prime_window};
use prodap::prodset::{build_rep_graph, longest_ap, product_set, SearchLimits, SearchMode};
use prodap::rationalize::rationalize_components;

fn nats(v: &[u64]) -> Vec<BigUint> {
    v.iter().map(|&x| BigUint::from(x)).collect()
}

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn coverage_holds_for_every_n_up_to_2000() {
    let sieve = default_sieve();
    for n in 3..=2000u64 {
        let res = coverage_check(n, sieve).unwrap_or_else(|e| panic!("n = {n}: {e}"));
        assert_eq!(res.witnesses.len() as u64, res.m, "n = {n}");
        if n >= 10 {
            assert!(res.base.len() as u64 <= 2 * n, "n = {n}: |B| = {}", res.base.len());
        }
    }
}

fn small_set() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::btree_set(1u64..60, 1..9).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_and_oracle_search_agree(b in small_set()) {
        let s = product_set(&nats(&b)).unwrap();
        let exact = longest_ap(&s, SearchMode::Exact, SearchLimits::default()).unwrap();
        let oracle = longest_ap(&s, SearchMode::Oracle, SearchLimits::default()).unwrap();
        prop_assert_eq!(exact.length, oracle.length);
        let members: HashSet<&BigUint> = s.iter().collect();
        prop_assert!(exact.terms().iter().all(|t| members.contains(t)));
    }

    #[test]
    fn concavity_margin_is_dd_squared(
        common in 1u64..10_000, r in 1u64..10_000, d in 1u64..10_000, len in 3usize..40
    ) {
        let desc = ApDescriptor::from_u64(common, r, d, len).unwrap();
        let v = concavity_demo(&desc).unwrap();
        prop_assert!(v.concave && v.margins_match);
        prop_assert_eq!(v.expected, BigUint::from(common * d).pow(2));
    }

    #[test]
    fn gcd_bound_on_reduced_descriptors(
        common in 1u64..100, r in 1u64..100_000, d in 1u64..100_000, len in 3usize..200
    ) {
        prop_assume!(d.gcd(&(common * r)) == 1);
        let desc = ApDescriptor::from_u64(common, r, d, len).unwrap();
        let audit = gcd_bound_audit(&desc).unwrap();
        prop_assert!(audit.ok);
        prop_assert!(audit.worst_gcd <= BigUint::from(common * len as u64));
    }

    #[test]
    fn window_primes_hit_two_or_three_times(r in 1u64..1000, d in 1u64..50, len in 31usize..400) {
        prop_assume!(r.gcd(&d) == 1);
        let desc = ApDescriptor::from_u64(1, r, d, len).unwrap();
        let window = prime_window(&desc, default_sieve()).unwrap();
        for &p in &window.primes {
            let hits = hit_count(p, &desc, &window).unwrap();
            prop_assert!(hits == 2 || hits == 3, "p = {} hits = {}", p, hits);
        }
    }

    #[test]
    fn reduction_output_is_reduced_and_represented(b in small_set(), len in 3usize..6) {
        let base = nats(&b);
        let s = product_set(&base).unwrap();
        let found = longest_ap(&s, SearchMode::Exact, SearchLimits::default()).unwrap();
        prop_assume!(found.length >= 3);
        let terms: Vec<BigUint> = found.terms().into_iter().take(len).collect();
        prop_assume!(terms.len() >= 3);
        let red = reduce_ap(&terms, &base, default_sieve()).unwrap();
        prop_assert!(red.desc.is_reduced());
        prop_assert_eq!(&red.terms, &red.desc.terms());
        prop_assert!(red.trace.weight_decreases(red.initial_weight));
        prop_assert!(build_rep_graph(&red.base, &red.terms).is_ok());
    }

    #[test]
    fn quadratic_norm_is_multiplicative(
        a in -20i64..20, b in -20i64..20, c in -20i64..20, e in -20i64..20, q in 1i64..6,
        m in prop::sample::select(vec![-1i64, 2, 3, 5, -7])
    ) {
        let f = QuadField::new(m.into()).unwrap();
        let x = f.elem(rat(a, q), rat(b, 1));
        let y = f.elem(rat(c, 1), rat(e, q));
        let xy = x.checked_mul(&y).unwrap();
        prop_assert_eq!(xy.norm(), x.norm() * y.norm());
        if !y.is_zero() {
            prop_assert_eq!(xy.checked_div(&y).unwrap(), x);
        }
    }

    #[test]
    fn rational_strings_round_trip(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
        let q = rat(n, d);
        prop_assert_eq!(parse_rat(&fmt_rat(&q)).unwrap(), q);
    }

    #[test]
    fn absolutize_then_integerize_keeps_ratios(v in prop::collection::btree_set((-50i64..50, 1i64..7), 1..10)) {
        let elems: Vec<Rat> = v.iter().filter(|(n, _)| *n != 0).map(|&(n, d)| rat(n, d)).collect();
        prop_assume!(!elems.is_empty());
        let abs = absolutize(&elems).unwrap();
        prop_assert!(abs.elements.iter().all(|x| x > &Rat::from_integer(0.into())));
        let (ints, scale) = integerize(&abs.elements).unwrap();
        let scale = Rat::from_integer(BigInt::from(scale));
        for (x, n) in abs.elements.iter().zip(&ints) {
            prop_assert_eq!(x * &scale, Rat::from_integer(BigInt::from(n.clone())));
        }
    }

    #[test]
    fn integer_instances_round_trip(b in small_set()) {
        let inst = Instance::new(Elements::Integer(b.iter().map(|&x| BigInt::from(x)).collect()));
        let text = inst.to_json();
        prop_assert_eq!(Instance::from_json(&text).unwrap().to_json(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_instances_rationalize(seed in 0u64..1_000_000, m in prop::sample::select(vec![2i64, -1, 3, -2])) {
        let case = split_instance(seed, 0, m, default_sieve()).unwrap();
        let out = rationalize_components(&case.instance).unwrap();
        let products: HashSet<Rat> =
            out.elements.iter().flat_map(|a| out.elements.iter().map(move |b| a * b)).collect();
        prop_assert!(case.instance.terms.iter().all(|t| products.contains(t)));
    }
}
