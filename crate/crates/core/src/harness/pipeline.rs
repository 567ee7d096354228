//! End-to-end run on one instance: preprocessing, reduction, graph, cycle
//! and irregularity audits, and the concavity check. Failed audits
//! are collected in `falsifications`; everything else is an error tagged
//! with its stage.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::apcore::{gcd_bound_audit, reduce_ap, GcdAudit, Reduction};
use crate::construct::theorem2_set;
use crate::cyclelab::{audit_cycle, bondy_simonovits_bound, cycles_through_edges, find_even_cycle, CycleAudit, EvenCycle};
use crate::error::{Error, Result};
use crate::exactnum::json::{self, QuadRepr};
use crate::exactnum::{QuadField, Rat, Sieve};
use crate::harness::instance::{Elements, FieldTag, Instance};
use crate::harness::{absolutize, concavity_demo, integerize, Absolutized, ConcavityVerdict};
use crate::irregular::{irregular_audit, IrregularityReport};
use crate::prodset::{build_rep_graph, longest_ap, product_set, RepGraph, Scalar, SearchLimits, SearchMode};
use crate::rationalize::{four_cycle_exists_audit, rationalize_components, scale_by_sqrt_d, FieldSet, FourCycleAudit, QuadInstance, RationalizedSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineOptions {
    /// Largest cycle half-length searched.
    pub k: usize,
    pub mode: SearchMode,
    pub limits: SearchLimits,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { k: 5, mode: SearchMode::Exact, limits: SearchLimits::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticStage {
    #[serde(with = "json::int")]
    pub radicand: BigInt,
    /// Difference of the claimed progression; the base is divided by its root.
    #[serde(with = "json::rat")]
    pub difference: Rat,
    pub scaled_elements: Vec<QuadRepr>,
    #[serde(with = "json::rat_vec")]
    pub scaled_terms: Vec<Rat>,
    pub rationalized: RationalizedSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessStage {
    pub absolutized: Absolutized,
    /// Which part of a sign-changing progression was kept.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_choice: Option<String>,
    #[serde(with = "json::nat")]
    pub integer_scale: BigUint,
    pub source: String,
    #[serde(with = "json::nat_vec")]
    pub base: Vec<BigUint>,
    #[serde(with = "json::nat_vec")]
    pub terms: Vec<BigUint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStage {
    pub vertices: usize,
    pub edges: usize,
    pub components: usize,
    pub isolated_vertices: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleStage {
    pub k: usize,
    pub shortest: Option<EvenCycle>,
    pub audits: Vec<CycleAudit>,
    /// `⌈100k·n^{1+1/k}⌉` for `n = |B|`.
    #[serde(with = "json::nat")]
    pub edge_bound: BigUint,
    pub exceeds_edge_bound: bool,
    pub four_cycle: FourCycleAudit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub field: FieldTag,
    pub elements: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadratic: Option<QuadraticStage>,
    pub preprocess: PreprocessStage,
    pub input_graph: GraphStage,
    pub reduction: Reduction,
    pub gcd_audit: GcdAudit,
    pub reduced_graph: GraphStage,
    pub cycles: CycleStage,
    pub irregular: IrregularityReport,
    pub concavity: ConcavityVerdict,
    pub falsifications: Vec<String>,
    pub green: bool,
}

fn graph_stage<T: Scalar>(g: &RepGraph<T>) -> GraphStage {
    let adj = g.adjacency();
    let mut seen = vec![false; g.order()];
    let (mut components, mut isolated) = (0, 0);
    for v in 0..g.order() {
        if seen[v] {
            continue;
        }
        if adj[v].is_empty() {
            isolated += 1;
            seen[v] = true;
            continue;
        }
        components += 1;
        let mut stack = vec![v];
        seen[v] = true;
        while let Some(u) = stack.pop() {
            for &(w, _) in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    GraphStage { vertices: g.order(), edges: g.edges().len(), components, isolated_vertices: isolated }
}

/// Sorts a claimed progression ascending and checks it has a constant
/// nonzero difference.
fn ascending_progression(terms: &[Rat]) -> Result<(Vec<Rat>, Rat)> {
    if terms.len() < 3 {
        return Err(Error::Input(format!("a progression needs 3 terms, got {}", terms.len())));
    }
    let mut t = terms.to_vec();
    t.sort();
    let d = &t[1] - &t[0];
    if d.is_zero() || t.windows(2).any(|w| w[1].clone() - &w[0] != d) {
        return Err(Error::Input("claimed terms do not form a progression".into()));
    }
    Ok((t, d))
}

/// Keeps the longer of the positive part and the absolute values of the
/// negative part (ties go to the positive part).
fn positive_part(terms: Vec<Rat>) -> Result<(Vec<Rat>, Option<String>)> {
    if terms.iter().all(Signed::is_positive) {
        return Ok((terms, None));
    }
    let pos: Vec<Rat> = terms.iter().filter(|t| t.is_positive()).cloned().collect();
    let mut neg: Vec<Rat> = terms.iter().filter(|t| t.is_negative()).map(|t| t.abs()).collect();
    neg.sort();
    let (kept, note) = if pos.len() >= neg.len() {
        (pos, "positive terms")
    } else {
        (neg, "absolute values of negative terms")
    };
    if kept.len() < 3 {
        return Err(Error::Input(format!("only {} terms survive taking absolute values", kept.len())));
    }
    let note = format!("{note}: kept {} of {}", kept.len(), terms.len());
    Ok((kept, Some(note)))
}

fn scale_terms(terms: &[Rat], scale: &BigUint) -> Result<Vec<BigUint>> {
    let s2 = Rat::from_integer(BigInt::from(scale * scale));
    terms
        .iter()
        .map(|t| {
            let x = t * &s2;
            if x.is_integer() && x.is_positive() {
                Ok(x.to_integer().to_biguint().unwrap())
            } else {
                Err(Error::Representation { term: json::fmt_rat(t) })
            }
        })
        .collect()
}

/// Scales the base by the root of the progression's difference and
/// rationalizes it. Returns the stage, the rational base and the rescaled
/// terms.
pub fn quadratic_stage(field: &QuadField, inst: &Instance, sieve: &Sieve) -> Result<(QuadraticStage, Vec<Rat>, Vec<Rat>)> {
    let Elements::Quadratic { elements, .. } = &inst.elements else { unreachable!() };
    let claimed = inst
        .terms()
        .ok_or_else(|| Error::Input("quadratic instances need a claimed progression".into()))?;
    let (terms, d) = ascending_progression(&claimed)?;
    let base = FieldSet::quadratic(field.clone(), elements.clone())?;
    let scaled = scale_by_sqrt_d(&base, &d, sieve).map_err(|e| e.in_stage("scale"))?;
    let scaled_terms: Vec<Rat> = terms.iter().map(|t| t / &d).collect();
    let qi = QuadInstance::new(scaled.clone(), scaled_terms.clone());
    let rationalized = rationalize_components(&qi).map_err(|e| e.in_stage("rationalize"))?;
    let scaled_elements = match &scaled {
        FieldSet::Quadratic { elements, .. } => elements.iter().map(|x| QuadRepr::from_elem(x, true)).collect(),
        FieldSet::Rational(v) => v.iter().map(|x| QuadRepr { a: json::fmt_rat(x), b: "0".into(), m: None }).collect(),
    };
    let elements = rationalized.elements.clone();
    let stage = QuadraticStage {
        radicand: field.radicand().clone(),
        difference: d,
        scaled_elements,
        scaled_terms: scaled_terms.clone(),
        rationalized,
    };
    Ok((stage, elements, scaled_terms))
}

/// Everything before the graph: the quadratic stage if any, absolute values,
/// integer scaling, and the claimed or discovered progression.
pub fn prepare(
    inst: &Instance,
    opts: &PipelineOptions,
    sieve: &Sieve,
) -> Result<(Option<QuadraticStage>, PreprocessStage)> {
    let (quadratic, rationals, claimed) = match &inst.elements {
        Elements::Quadratic { field, .. } => {
            let (stage, elems, terms) = quadratic_stage(field, inst, sieve)?;
            (Some(stage), elems, Some(terms))
        }
        other => (None, other.as_rationals().unwrap(), inst.terms()),
    };

    let absolutized = absolutize(&rationals).map_err(|e| e.in_stage("absolutize"))?;
    let (base, scale) = integerize(&absolutized.elements).map_err(|e| e.in_stage("integerize"))?;
    let (terms, sign_choice, source) = match claimed {
        Some(c) => {
            let (t, _) = ascending_progression(&c).map_err(|e| e.in_stage("absolutize"))?;
            let (t, note) = positive_part(t).map_err(|e| e.in_stage("absolutize"))?;
            (scale_terms(&t, &scale).map_err(|e| e.in_stage("graph"))?, note, "claimed")
        }
        None => {
            let products = product_set(&base).map_err(|e| e.in_stage("discover"))?;
            let found = longest_ap(&products, opts.mode, opts.limits).map_err(|e| e.in_stage("discover"))?;
            if found.length < 3 {
                return Err(Error::Input("[discover] B.B contains no progression of length 3".into()));
            }
            (found.terms(), None, "discovered")
        }
    };
    let mut base = base;
    base.sort();
    let preprocess = PreprocessStage {
        absolutized,
        sign_choice,
        integer_scale: scale,
        source: source.into(),
        base,
        terms,
    };
    Ok((quadratic, preprocess))
}

pub fn pipeline(inst: &Instance, opts: &PipelineOptions, sieve: &Sieve) -> Result<PipelineReport> {
    if opts.k < 2 {
        return Err(Error::Input(format!("cycle half-length k must be at least 2, got {}", opts.k)));
    }
    let field = match &inst.elements {
        Elements::Integer(_) => FieldTag::Integer,
        Elements::Rational(_) => FieldTag::Rational,
        Elements::Quadratic { .. } => FieldTag::Quadratic,
    };
    let (quadratic, preprocess) = prepare(inst, opts, sieve)?;
    let (base, terms) = (preprocess.base.clone(), preprocess.terms.clone());

    let input_graph = build_rep_graph(&base, &terms).map_err(|e| e.in_stage("graph"))?;
    let reduction = reduce_ap(&terms, &base, sieve).map_err(|e| e.in_stage("reduce"))?;
    let desc = reduction.desc.clone();
    let mut falsifications = Vec::new();
    if !reduction.trace.weight_decreases(reduction.initial_weight) {
        falsifications.push("reduce: base weight did not strictly decrease".to_string());
    }
    let gcd_audit = gcd_bound_audit(&desc).map_err(|e| e.in_stage("gcd"))?;
    if !gcd_audit.ok {
        falsifications.push(format!(
            "gcd: gcd of terms {} and {} is {}, above D·L = {}",
            gcd_audit.worst_i, gcd_audit.worst_j, gcd_audit.worst_gcd, gcd_audit.bound
        ));
    }

    let g = build_rep_graph(&reduction.base, &reduction.terms).map_err(|e| e.in_stage("reduced-graph"))?;
    let shortest = find_even_cycle(&g, opts.k);
    let mut cycles: Vec<EvenCycle> = cycles_through_edges(&g, opts.k);
    if let Some(c) = &shortest {
        if !cycles.contains(c) {
            cycles.push(c.clone());
            cycles.sort();
        }
    }
    let mut audits = Vec::with_capacity(cycles.len());
    for c in &cycles {
        match audit_cycle(c, &g, &desc) {
            Ok(a) => audits.push(a),
            Err(e) if e.is_falsification() => falsifications.push(format!("cycles: {e}")),
            Err(e) => return Err(e.in_stage("cycles")),
        }
    }
    let n = reduction.base.len().max(2) as u64;
    let edge_bound = bondy_simonovits_bound(n, opts.k as u32).map_err(|e| e.in_stage("cycles"))?;
    let exceeds_edge_bound = BigUint::from(g.edges().len()) > edge_bound;
    if exceeds_edge_bound && shortest.is_none() {
        falsifications.push(format!("cycles: {} edges exceed the bound {edge_bound} without a cycle", g.edges().len()));
    }
    let four_cycle = four_cycle_exists_audit(&g);
    if !four_cycle.ok {
        falsifications.push(format!(
            "cycles: {} edges above the 4-cycle threshold {} but no 4-cycle",
            four_cycle.edges, four_cycle.threshold
        ));
    }

    let irregular = irregular_audit(&g, &desc, sieve).map_err(|e| e.in_stage("irregular"))?;
    if let Some(c) = &irregular.counterexample {
        falsifications.push(format!("irregular: selected edges {c:?} close a cycle"));
    }
    let concavity = concavity_demo(&desc).map_err(|e| e.in_stage("concavity"))?;
    if !concavity.concave || !concavity.margins_match {
        falsifications.push("concavity: margins differ from D²d²".to_string());
    }

    Ok(PipelineReport {
        field,
        elements: inst.elements.len(),
        quadratic,
        preprocess,
        input_graph: graph_stage(&input_graph),
        reduction,
        gcd_audit,
        reduced_graph: graph_stage(&g),
        cycles: CycleStage { k: opts.k, shortest, audits, edge_bound, exceeds_edge_bound, four_cycle },
        irregular,
        concavity,
        green: falsifications.is_empty(),
        falsifications,
    })
}

/// The construction set for `n` with the claimed interval `[1, ⌊n ln n⌋]`.
pub fn theorem2_instance(n: u64, sieve: &Sieve) -> Result<Instance> {
    let set = theorem2_set(n, sieve)?;
    let mut inst = Instance::new(Elements::Integer(set.base.iter().map(|&b| BigInt::from(b)).collect()));
    inst.ap = Some(crate::apcore::ApDescriptor::from_u64(1, 1, 1, set.m as usize)?);
    inst.provenance = Some(serde_json::json!({ "generator": "theorem2", "n": n, "m": set.m, "log": "natural" }));
    Ok(inst)
}

/// `{b·u} ∪ {2b/u}` for the construction set with `n = 6` and `u = 1 + √2`.
/// Cross products are `2bb'`, so the claimed progression is `2, 4, …, 20`
/// with difference 2.
pub fn quadratic_demo_instance(sieve: &Sieve) -> Result<Instance> {
    let set = theorem2_set(6, sieve)?;
    let field = QuadField::with_sieve(BigInt::from(2), sieve)?;
    let one = Rat::from_integer(BigInt::from(1));
    let u = field.elem(one.clone(), one);
    let v = u.recip()?.scale(&Rat::from_integer(BigInt::from(2)));
    let mut elements = Vec::new();
    for &b in &set.base {
        let b = Rat::from_integer(BigInt::from(b));
        elements.push(u.scale(&b));
        elements.push(v.scale(&b));
    }
    elements.sort();
    let mut inst = Instance::new(Elements::Quadratic { field, elements });
    inst.ap_terms = Some((1..=set.m).map(|x| Rat::from_integer(BigInt::from(2 * x))).collect());
    inst.provenance = Some(serde_json::json!({
        "generator": "quadratic-demo",
        "n": 6,
        "u": "1 + sqrt(2)",
        "elements": "b*u and 2b/u for b in the construction set",
    }));
    Ok(inst)
}
