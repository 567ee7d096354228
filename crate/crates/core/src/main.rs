use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;

use prodap::apcore::{reduce_ap, ApDescriptor};
use prodap::construct::{coverage_check, theorem2_set};
use prodap::cyclelab::{audit_cycle, bondy_simonovits_bound, cycles_through_edges, find_even_cycle, CycleAudit, EvenCycle};
use prodap::exactnum::json;
use prodap::exactnum::default_sieve;
use prodap::harness::corpus::CycleFailure;
use prodap::harness::graphfile::GraphFile;
use prodap::harness::instance::{to_pretty_json, Elements};
use prodap::harness::pipeline::{prepare, quadratic_demo_instance, quadratic_stage, theorem2_instance};
use prodap::harness::study::{study_metadata, write_csv, Generator, StudyConfig};
use prodap::harness::{absolutize, concavity_demo, integerize, pipeline, scaling_study, Instance, PipelineOptions};
use prodap::irregular::irregular_audit;
use prodap::prodset::{build_rep_graph, longest_ap, product_set, SearchLimits, SearchMode};
use prodap::rationalize::{four_cycle_exists_audit, rationalize_components, FieldSet, FourCycleAudit, QuadInstance, RationalizedSet};
use prodap::{Error, Result};

/// Arithmetic progressions in product sets: exact audits and experiments.
#[derive(Parser)]
#[command(name = "prodap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Out {
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Search {
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Oracle,
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => SearchMode::Exact,
            ModeArg::Oracle => SearchMode::Oracle,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Theorem2,
    QuadraticDemo,
}

#[derive(Subcommand)]
enum Command {
    /// Build B = [1..n] ∪ {primes in [n, n ln n]}; with --verify, a factor pair for every x ≤ n ln n.
    Construct {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Longest progression in B.B.
    FindAp {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        search: Search,
        #[command(flatten)]
        out: Out,
    },
    /// Reduce a claimed progression to D(r + di) with gcd(d, Dr) = 1.
    Reduce {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        search: Search,
        #[command(flatten)]
        out: Out,
    },
    /// Representation graph of the instance's progression.
    Graph {
        #[arg(long = "in")]
        input: PathBuf,
        /// Reduce first and build the graph of the reduced instance.
        #[arg(long)]
        reduce: bool,
        #[command(flatten)]
        search: Search,
        #[command(flatten)]
        out: Out,
    },
    /// Even cycles of a graph file and their coefficient audits.
    Cycles {
        #[arg(long, alias = "in")]
        graph: PathBuf,
        /// Descriptor file; defaults to the graph's own "ap".
        #[arg(long)]
        ap: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Window primes, irregular edges, greedy selection and forest check.
    Irregular {
        #[arg(long, alias = "in")]
        graph: PathBuf,
        #[arg(long)]
        ap: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Rescale a quadratic (or rational) instance to an all-rational base.
    Rationalize {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Strict concavity of log(term(i)) with exact margins.
    ConvexDemo {
        /// Descriptor file, or an instance with "ap".
        #[arg(long = "in", conflicts_with = "desc")]
        input: Option<PathBuf>,
        /// Inline descriptor "D,r,d,L".
        #[arg(long)]
        desc: Option<String>,
        #[command(flatten)]
        out: Out,
    },
    /// Seeded scaling study written as CSV (plus <out>.meta.json).
    Study {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<u64>,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "theorem2,random,geometric")]
        generators: Vec<String>,
        #[command(flatten)]
        search: Search,
        #[command(flatten)]
        out: Out,
    },
    /// Full audit chain on one instance.
    Pipeline {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Accepted for uniformity; the pipeline itself draws no randomness.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        search: Search,
        #[command(flatten)]
        out: Out,
    },
    /// Write one of the built-in instances.
    Instance {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 100)]
        n: u64,
        #[command(flatten)]
        out: Out,
    },
}

enum Outcome {
    Ok,
    Falsified,
}

fn emit(out: &Out, text: &str) -> Result<()> {
    match &out.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: &Out, value: &T) -> Result<()> {
    emit(out, &to_pretty_json(value)?)
}

fn read_descriptor(path: &Path) -> Result<ApDescriptor> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let inner = value.get("ap").cloned().unwrap_or(value);
    let desc: ApDescriptor = serde_json::from_value(inner)?;
    desc.validate().map_err(|e| Error::Input(e.to_string()))?;
    Ok(desc)
}

fn parse_inline_descriptor(s: &str) -> Result<ApDescriptor> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [d0, r, d, l] = parts.as_slice() else {
        return Err(Error::Input(format!("expected D,r,d,L, got {s:?}")));
    };
    let len = l.parse::<usize>().map_err(|e| Error::Input(format!("L: {e}")))?;
    ApDescriptor::new(json::parse_nat(d0)?, json::parse_nat(r)?, json::parse_nat(d)?, len)
        .map_err(|e| Error::Input(e.to_string()))
}

fn options(search: &Search, k: usize) -> PipelineOptions {
    PipelineOptions { k, mode: search.mode.into(), limits: SearchLimits::default() }
}

#[derive(Serialize)]
struct FindApReport {
    #[serde(with = "json::nat")]
    scale: BigUint,
    prodset_size: usize,
    length: usize,
    #[serde(with = "json::nat")]
    start: BigUint,
    #[serde(with = "json::nat")]
    difference: BigUint,
    #[serde(skip_serializing_if = "Option::is_none")]
    descriptor: Option<ApDescriptor>,
}

#[derive(Serialize)]
struct CyclesReport {
    k: usize,
    shortest: Option<EvenCycle>,
    audits: Vec<CycleAudit>,
    failures: Vec<CycleFailure>,
    #[serde(with = "json::nat")]
    edge_bound: BigUint,
    four_cycle: FourCycleAudit,
}

#[derive(Serialize)]
struct RationalizeReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    difference: Option<String>,
    rationalized: RationalizedSet,
    instance: prodap::harness::InstanceFile,
}

fn run(cli: Cli) -> Result<Outcome> {
    let sieve = default_sieve();
    match cli.command {
        Command::Construct { n, verify, out } => {
            let result = if verify { coverage_check(n, sieve)? } else { theorem2_set(n, sieve)? };
            emit_json(&out, &result)?;
        }
        Command::FindAp { input, search, out } => {
            let inst = Instance::read(&input)?;
            let rationals = inst
                .elements
                .as_rationals()
                .ok_or_else(|| Error::Input("find-ap works on integer or rational instances".into()))?;
            let abs = absolutize(&rationals)?;
            let (mut base, scale) = integerize(&abs.elements)?;
            base.sort();
            let products = product_set(&base)?;
            let found = longest_ap(&products, search.mode.into(), SearchLimits::default())?;
            emit_json(
                &out,
                &FindApReport {
                    scale,
                    prodset_size: products.len(),
                    length: found.length,
                    descriptor: found.descriptor(),
                    start: found.start,
                    difference: found.difference,
                },
            )?;
        }
        Command::Reduce { input, search, out } => {
            let inst = Instance::read(&input)?;
            let (_, pre) = prepare(&inst, &options(&search, 5), sieve)?;
            emit_json(&out, &reduce_ap(&pre.terms, &pre.base, sieve)?)?;
        }
        Command::Graph { input, reduce, search, out } => {
            let inst = Instance::read(&input)?;
            let (_, pre) = prepare(&inst, &options(&search, 5), sieve)?;
            let (base, terms) = if reduce {
                let red = reduce_ap(&pre.terms, &pre.base, sieve)?;
                (red.base, red.terms)
            } else {
                (pre.base, pre.terms)
            };
            let g = build_rep_graph(&base, &terms)?;
            emit_json(&out, &GraphFile::from_integer(&g, Some(ApDescriptor::from_terms(&terms)?)))?;
        }
        Command::Cycles { graph, ap, k, out } => {
            if k < 2 {
                return Err(Error::Input("k must be at least 2".into()));
            }
            let file: GraphFile = serde_json::from_str(&read_text(&graph)?)?;
            let g = file.to_integer()?;
            let desc = match ap {
                Some(p) => read_descriptor(&p)?,
                None => file.ap.clone().ok_or_else(|| Error::Input("graph has no \"ap\"; pass --ap".into()))?,
            };
            let shortest = find_even_cycle(&g, k);
            let mut cycles = cycles_through_edges(&g, k);
            if let Some(c) = &shortest {
                if !cycles.contains(c) {
                    cycles.push(c.clone());
                    cycles.sort();
                }
            }
            let mut audits = Vec::new();
            let mut failures = Vec::new();
            for c in &cycles {
                match audit_cycle(c, &g, &desc) {
                    Ok(a) => audits.push(a),
                    Err(e) if e.is_falsification() => failures.push(CycleFailure {
                        instance: graph.display().to_string(),
                        cycle: c.vertices.clone(),
                        message: e.to_string(),
                    }),
                    Err(e) => return Err(e),
                }
            }
            let edge_bound = bondy_simonovits_bound(g.base().len().max(2) as u64, k as u32)?;
            let four_cycle = four_cycle_exists_audit(&g);
            let falsified = !failures.is_empty() || !four_cycle.ok;
            emit_json(&out, &CyclesReport { k, shortest, audits, failures, edge_bound, four_cycle })?;
            if falsified {
                return Ok(Outcome::Falsified);
            }
        }
        Command::Irregular { graph, ap, out } => {
            let file: GraphFile = serde_json::from_str(&read_text(&graph)?)?;
            let g = file.to_integer()?;
            let desc = match ap {
                Some(p) => read_descriptor(&p)?,
                None => file.ap.clone().ok_or_else(|| Error::Input("graph has no \"ap\"; pass --ap".into()))?,
            };
            let report = irregular_audit(&g, &desc, sieve)?;
            emit_json(&out, &report)?;
            if !report.forest {
                return Ok(Outcome::Falsified);
            }
        }
        Command::Rationalize { input, out } => {
            let inst = Instance::read(&input)?;
            let (difference, rationalized, terms) = match &inst.elements {
                Elements::Quadratic { field, .. } => {
                    let (stage, _, terms) = quadratic_stage(field, &inst, sieve)?;
                    (Some(json::fmt_rat(&stage.difference)), stage.rationalized, terms)
                }
                other => {
                    let terms = inst.terms().ok_or_else(|| Error::Input("instance needs a claimed progression".into()))?;
                    let qi = QuadInstance::new(FieldSet::Rational(other.as_rationals().unwrap()), terms.clone());
                    (None, rationalize_components(&qi)?, terms)
                }
            };
            let mut rational = Instance::new(Elements::Rational(rationalized.elements.clone()));
            rational.ap_terms = Some(terms);
            rational.provenance = Some(serde_json::json!({ "rationalized_from": input.display().to_string() }));
            emit_json(&out, &RationalizeReport { difference, rationalized, instance: rational.to_file() })?;
        }
        Command::ConvexDemo { input, desc, out } => {
            let desc = match (input, desc) {
                (Some(p), None) => read_descriptor(&p)?,
                (None, Some(s)) => parse_inline_descriptor(&s)?,
                _ => return Err(Error::Input("pass --in or --desc".into())),
            };
            let verdict = concavity_demo(&desc)?;
            emit_json(&out, &verdict)?;
            if !verdict.concave || !verdict.margins_match {
                return Ok(Outcome::Falsified);
            }
        }
        Command::Study { sizes, trials, seed, generators, search, out } => {
            let generators = generators.iter().map(|g| g.parse::<Generator>()).collect::<Result<Vec<_>>>()?;
            let cfg = StudyConfig { generators, sizes, trials, seed, mode: search.mode.into(), limits: SearchLimits::default() };
            let rows = scaling_study(&cfg, sieve)?;
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            emit(&out, &String::from_utf8(buf).expect("csv is utf-8"))?;
            if let Some(path) = &out.out {
                let mut meta = path.clone().into_os_string();
                meta.push(".meta.json");
                std::fs::write(PathBuf::from(meta), to_pretty_json(&study_metadata(&cfg))?)?;
            }
        }
        Command::Pipeline { input, k, seed: _, search, out } => {
            let inst = Instance::read(&input)?;
            let report = pipeline(&inst, &options(&search, k), sieve)?;
            emit_json(&out, &report)?;
            if !report.green {
                return Ok(Outcome::Falsified);
            }
        }
        Command::Instance { kind, n, out } => {
            let inst = match kind {
                Kind::Theorem2 => theorem2_instance(n, sieve)?,
                Kind::QuadraticDemo => quadratic_demo_instance(sieve)?,
            };
            emit(&out, &inst.to_json())?;
        }
    }
    Ok(Outcome::Ok)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Falsified) => {
            eprintln!("falsification report produced");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
