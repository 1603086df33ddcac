//! Benchmark harness: runs algorithms over a corpus, compares against the
//! exact optimum where affordable, and aggregates approximation ratios.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exact::solve_exact;
use crate::instance::{gen_random, Instance};
use crate::solve::{run, Algorithm, SolveOptions};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("bad generator spec: {0}")]
    Spec(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("no readable instances")]
    Empty,
}

/// Parameters of a seeded random corpus, written as
/// `vars=8,trees=6,k=3,bias=0.5,count=20,seed=1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub num_vars: usize,
    pub num_trees: usize,
    pub max_size: usize,
    pub overlap_bias: f64,
    pub count: usize,
    pub seed: u64,
}

impl std::str::FromStr for GeneratorSpec {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut spec = GeneratorSpec {
            num_vars: 8,
            num_trees: 6,
            max_size: 3,
            overlap_bias: 0.5,
            count: 10,
            seed: 0,
        };
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| BenchError::Spec(format!("`{part}` is not key=value")))?;
            let bad = |e: &dyn std::fmt::Display| BenchError::Spec(format!("{key}: {e}"));
            match key.trim() {
                "vars" => spec.num_vars = value.parse().map_err(|e| bad(&e))?,
                "trees" => spec.num_trees = value.parse().map_err(|e| bad(&e))?,
                "k" => spec.max_size = value.parse().map_err(|e| bad(&e))?,
                "bias" => spec.overlap_bias = value.parse().map_err(|e| bad(&e))?,
                "count" => spec.count = value.parse().map_err(|e| bad(&e))?,
                "seed" => spec.seed = value.parse().map_err(|e| bad(&e))?,
                other => return Err(BenchError::Spec(format!("unknown key `{other}`"))),
            }
        }
        Ok(spec)
    }
}

impl GeneratorSpec {
    /// Named instances; seeds are `seed, seed+1, ...`.
    pub fn generate(&self) -> Result<Vec<(String, Instance)>, BenchError> {
        (0..self.count as u64)
            .map(|i| {
                let seed = self.seed + i;
                gen_random(
                    self.num_vars,
                    self.num_trees,
                    self.max_size,
                    self.overlap_bias,
                    seed,
                )
                .map(|inst| (format!("gen-{seed:06}"), inst))
                .map_err(|e| BenchError::Spec(e.to_string()))
            })
            .collect()
    }
}

/// Reads every file of `dir` as an instance, skipping unreadable ones with a
/// warning. Names are file names; the result is sorted by name.
pub fn load_dir(dir: &Path) -> Result<Vec<(String, Instance)>, BenchError> {
    let entries = std::fs::read_dir(dir).map_err(|e| BenchError::Io {
        path: dir.display().to_string(),
        msg: e.to_string(),
    })?;
    let mut out = Vec::new();
    for entry in entries.flatten() {
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        let parsed = std::fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|t| Instance::parse(&t).map_err(|e| e.to_string()));
        match parsed {
            Ok(p) => out.push((name, p.instance)),
            Err(msg) => log::warn!("skipping {}: {msg}", path.display()),
        }
    }
    if out.is_empty() {
        return Err(BenchError::Empty);
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub algorithms: Vec<Algorithm>,
    /// The exact optimum is computed for instances with at most this many variables.
    pub oracle_cap: usize,
    pub solve: SolveOptions,
    /// Record wall-clock times. Off by default so reports are reproducible byte for byte.
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub algorithm: Algorithm,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchSummary {
    pub algorithm: Algorithm,
    pub instances: usize,
    pub rated: usize,
    pub max_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summary: Vec<BenchSummary>,
}

fn ratio(size: usize, opt: usize) -> f64 {
    if opt == 0 {
        1.0
    } else {
        size as f64 / opt as f64
    }
}

pub fn run_bench(corpus: &[(String, Instance)], opts: &BenchOptions) -> BenchReport {
    let mut rows: Vec<BenchRow> = corpus
        .par_iter()
        .flat_map_iter(|(name, inst)| {
            let opt = (inst.num_vars() <= opts.oracle_cap)
                .then(|| solve_exact(inst, opts.solve.node_budget).ok())
                .flatten()
                .filter(|s| s.exact)
                .map(|s| s.size);
            opts.algorithms.iter().map(move |&alg| {
                let start = Instant::now();
                let result = run(
                    inst,
                    &SolveOptions {
                        algorithm: alg,
                        ..opts.solve.clone()
                    },
                );
                let elapsed = start.elapsed().as_secs_f64() * 1000.0;
                let (size, error) = match result {
                    Ok(o) if o.report.validated => (Some(o.report.size), None),
                    Ok(_) => (None, Some("produced circuit failed validation".to_string())),
                    Err(e) => (None, Some(e.to_string())),
                };
                BenchRow {
                    instance: name.clone(),
                    algorithm: alg,
                    size,
                    opt,
                    ratio: size.zip(opt).map(|(s, o)| ratio(s, o)),
                    error,
                    wall_time_ms: opts.timing.then_some(elapsed),
                }
            })
        })
        .collect();
    rows.sort_by(|a, b| (&a.instance, a.algorithm).cmp(&(&b.instance, b.algorithm)));

    let mut by_alg: BTreeMap<Algorithm, Vec<&BenchRow>> = BTreeMap::new();
    for r in &rows {
        by_alg.entry(r.algorithm).or_default().push(r);
    }
    let summary = by_alg
        .into_iter()
        .map(|(algorithm, rs)| {
            let ratios: Vec<f64> = rs.iter().filter_map(|r| r.ratio).collect();
            BenchSummary {
                algorithm,
                instances: rs.len(),
                rated: ratios.len(),
                max_ratio: ratios.iter().copied().reduce(f64::max),
                mean_ratio: (!ratios.is_empty())
                    .then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
            }
        })
        .collect();
    BenchReport { rows, summary }
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<10} {:>9} {:>7} {:>10} {:>10}\n",
            "algorithm", "instances", "rated", "max_ratio", "mean_ratio"
        );
        let fmt = |r: Option<f64>| r.map_or("-".to_string(), |r| format!("{r:.4}"));
        for row in &self.summary {
            s.push_str(&format!(
                "{:<10} {:>9} {:>7} {:>10} {:>10}\n",
                row.algorithm.to_string(),
                row.instances,
                row.rated,
                fmt(row.max_ratio),
                fmt(row.mean_ratio)
            ));
        }
        s
    }
}
