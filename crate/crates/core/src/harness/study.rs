//! Seeded scaling study: longest progression in `B.B` for several set
//! generators, written as CSV with a JSON sidecar describing the run.

use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::theorem2_set;
use crate::error::{Error, Result};
use crate::exactnum::ln::ratio_over_n_ln_n;
use crate::exactnum::Sieve;
use crate::prodset::{longest_ap, product_set, SearchLimits, SearchMode};

pub const CSV_HEADER: [&str; 9] = [
    "generator",
    "n",
    "set_size",
    "prodset_size",
    "ap_length",
    "ratio_len_over_nlogn",
    "seed",
    "trial",
    "elapsed_ms",
];

pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3)";

/// Random sets are drawn from `[1, RANDOM_UNIVERSE_FACTOR · n]`.
pub const RANDOM_UNIVERSE_FACTOR: u64 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Theorem2,
    Random,
    Geometric,
}

impl Generator {
    pub fn name(self) -> &'static str {
        match self {
            Generator::Theorem2 => "theorem2",
            Generator::Random => "random",
            Generator::Geometric => "geometric",
        }
    }

    /// Stable id mixed into the per-trial seed.
    pub fn id(self) -> u64 {
        match self {
            Generator::Theorem2 => 1,
            Generator::Random => 2,
            Generator::Geometric => 3,
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem2" => Ok(Generator::Theorem2),
            "random" => Ok(Generator::Random),
            "geometric" => Ok(Generator::Geometric),
            other => Err(Error::Input(format!("unknown generator {other:?} (theorem2, random, geometric)"))),
        }
    }
}

/// The stream for one trial: master seed, generator id, `n` and trial
/// index laid out little-endian in the 32-byte ChaCha seed.
pub fn trial_rng(master: u64, generator: u64, n: u64, trial: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    for (k, v) in [master, generator, n, trial].into_iter().enumerate() {
        seed[8 * k..8 * k + 8].copy_from_slice(&v.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// The `n` smallest numbers of the form `2^a 3^b`.
pub fn smooth_numbers(n: usize) -> Vec<u64> {
    let mut out = vec![1u64];
    let (mut i2, mut i3) = (0, 0);
    while out.len() < n {
        let (c2, c3) = (out[i2] * 2, out[i3] * 3);
        let next = c2.min(c3);
        if next == c2 {
            i2 += 1;
        }
        if next == c3 {
            i3 += 1;
        }
        out.push(next);
    }
    out.truncate(n);
    out
}

pub fn generate(g: Generator, n: u64, rng: &mut ChaCha8Rng, sieve: &Sieve) -> Result<Vec<BigUint>> {
    if n == 0 {
        return Err(Error::Input("set size must be positive".into()));
    }
    let v: Vec<u64> = match g {
        Generator::Theorem2 => theorem2_set(n, sieve)?.base,
        Generator::Random => {
            let universe = RANDOM_UNIVERSE_FACTOR * n;
            let mut v: Vec<u64> = sample(rng, universe as usize, n as usize).into_iter().map(|x| x as u64 + 1).collect();
            v.sort_unstable();
            v
        }
        Generator::Geometric => {
            if n > 2000 {
                return Err(Error::capacity("geometric set size", n, 2000));
            }
            smooth_numbers(n as usize)
        }
    };
    Ok(v.into_iter().map(BigUint::from).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub generators: Vec<Generator>,
    pub sizes: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
    pub mode: SearchMode,
    pub limits: SearchLimits,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub generator: String,
    pub n: u64,
    pub set_size: usize,
    pub prodset_size: usize,
    pub ap_length: Option<usize>,
    pub ratio_len_over_nlogn: String,
    pub seed: u64,
    pub trial: u64,
    pub elapsed_ms: u128,
}

impl ExperimentRecord {
    pub fn csv_row(&self) -> [String; 9] {
        [
            self.generator.clone(),
            self.n.to_string(),
            self.set_size.to_string(),
            self.prodset_size.to_string(),
            self.ap_length.map(|l| l.to_string()).unwrap_or_default(),
            self.ratio_len_over_nlogn.clone(),
            self.seed.to_string(),
            self.trial.to_string(),
            self.elapsed_ms.to_string(),
        ]
    }
}

/// One row. Capacity limits turn into a skipped row; other errors propagate.
pub fn run_trial(cfg: &StudyConfig, g: Generator, n: u64, trial: u64, sieve: &Sieve) -> Result<ExperimentRecord> {
    let started = Instant::now();
    let mut rng = trial_rng(cfg.seed, g.id(), n, trial);
    let mut record = ExperimentRecord {
        generator: g.name().into(),
        n,
        set_size: 0,
        prodset_size: 0,
        ap_length: None,
        ratio_len_over_nlogn: String::new(),
        seed: cfg.seed,
        trial,
        elapsed_ms: 0,
    };
    let outcome = (|| -> Result<()> {
        let base = generate(g, n, &mut rng, sieve)?;
        record.set_size = base.len();
        let products = product_set(&base)?;
        record.prodset_size = products.len();
        let found = longest_ap(&products, cfg.mode, cfg.limits)?;
        record.ap_length = Some(found.length);
        record.ratio_len_over_nlogn = if base.len() >= 2 {
            ratio_over_n_ln_n(found.length as u64, base.len() as u64, 6)?
        } else {
            "undefined".into()
        };
        Ok(())
    })();
    match outcome {
        Ok(()) => {}
        Err(e @ Error::Capacity { .. }) => {
            record.ap_length = None;
            record.ratio_len_over_nlogn = format!("skipped ({e})");
        }
        Err(e) => return Err(e),
    }
    record.elapsed_ms = started.elapsed().as_millis();
    Ok(record)
}

/// Every (generator, n, trial) row, sorted in that order.
pub fn scaling_study(cfg: &StudyConfig, sieve: &Sieve) -> Result<Vec<ExperimentRecord>> {
    if cfg.generators.is_empty() || cfg.sizes.is_empty() || cfg.trials == 0 {
        return Err(Error::Input("study needs at least one generator, size and trial".into()));
    }
    let mut tasks = Vec::new();
    for &g in &cfg.generators {
        for &n in &cfg.sizes {
            for t in 0..cfg.trials {
                tasks.push((g, n, t));
            }
        }
    }
    let mut rows: Vec<(Generator, ExperimentRecord)> = tasks
        .par_iter()
        .map(|&(g, n, t)| run_trial(cfg, g, n, t, sieve).map(|r| (g, r)))
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| (a.0.name(), a.1.n, a.1.trial).cmp(&(b.0.name(), b.1.n, b.1.trial)));
    rows.dedup_by(|a, b| a.0 == b.0 && a.1.n == b.1.n && a.1.trial == b.1.trial);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

pub fn write_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record(r.csv_row()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Sidecar metadata for a study CSV.
pub fn study_metadata(cfg: &StudyConfig) -> serde_json::Value {
    serde_json::json!({
        "rng": RNG_NAME,
        "seed_layout": "32-byte seed = master, generator id, n, trial (u64 little-endian each)",
        "seed": cfg.seed,
        "generators": cfg.generators.iter().map(|g| serde_json::json!({"name": g.name(), "id": g.id()})).collect::<Vec<_>>(),
        "sizes": cfg.sizes,
        "trials": cfg.trials,
        "mode": cfg.mode,
        "random_universe": format!("[1, {RANDOM_UNIVERSE_FACTOR}n]"),
        "log": "natural",
        "ratio": "ap_length / (set_size * ln set_size), truncated to 6 decimals",
        "columns": CSV_HEADER,
    })
}
