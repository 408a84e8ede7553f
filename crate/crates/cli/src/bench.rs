//! Benchmark harness: runs solver configurations over seeded random
//! instances and emits one CSV record per run.
//!
//! Rows come out in config order no matter how many worker threads run; the
//! `ORDINAL_CONSENSUS_THREADS` environment variable caps the pool (default 1).
//! All entropy flows through the per-run seed, so reruns reproduce every
//! column except the wall-time measurement.

use crate::{Notion, EXIT_OK, STRONG_EXACT_GUARD, WEAK_EXACT_GUARD};
use anyhow::{bail, Context, Result};
use ordinal_consensus::reductions::{random_system, RandomModel};
use ordinal_consensus::strong::{smis_approx, smis_exact, SolveResult};
use ordinal_consensus::weak::{wmis_approx, wmis_exact};
use serde::Deserialize;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 12] = [
    "schema_version",
    "instance_id",
    "family",
    "n",
    "k",
    "algo",
    "outlier_count",
    "exact_count",
    "ratio",
    "wall_time_micros",
    "comparisons",
    "seed",
];

#[derive(Deserialize, Clone, Debug)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BenchRun {
    pub id: Option<String>,
    /// strong | weak
    pub notion: String,
    /// approx | exact | both
    pub algo: String,
    /// uniform | perturbed-common | ultrametric | line
    pub model: String,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub noise: Option<u32>,
    pub max_exact_n: Option<usize>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub version: u32,
    pub runs: Vec<BenchRun>,
}

pub fn parse_config(text: &str) -> Result<BenchConfig> {
    let config: BenchConfig = serde_json::from_str(text)?;
    if config.version != 1 {
        bail!("unsupported bench config version {}", config.version);
    }
    Ok(config)
}

fn pool_size(runs: usize) -> usize {
    std::env::var("ORDINAL_CONSENSUS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or(1)
        .min(runs.max(1))
}

/// Executes every run and returns the CSV rows in config order.
pub fn run_config(config: &BenchConfig) -> Result<Vec<Vec<String>>> {
    let slots: Mutex<Vec<Option<Result<Vec<String>>>>> =
        Mutex::new((0..config.runs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = pool_size(config.runs.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= config.runs.len() {
                    break;
                }
                let row = run_one(&config.runs[index], index);
                slots.lock().expect("bench worker poisoned the slot lock")[index] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|slot| slot.expect("every slot filled"))
        .collect()
}

fn model_of(run: &BenchRun) -> Result<RandomModel> {
    Ok(match run.model.as_str() {
        "uniform" => RandomModel::Uniform,
        "perturbed-common" => RandomModel::PerturbedCommon { noise: run.noise.unwrap_or(50) },
        "ultrametric" => RandomModel::Ultrametric,
        "line" => RandomModel::Line,
        other => bail!("unknown random model `{other}`"),
    })
}

fn run_one(run: &BenchRun, index: usize) -> Result<Vec<String>> {
    let context = || format!("bench run {} (#{index})", run.id.clone().unwrap_or_default());
    let model = model_of(run).with_context(context)?;
    let notion = match run.notion.as_str() {
        "strong" => Notion::Strong,
        "weak" => Notion::Weak,
        other => bail!("{}: unknown notion `{other}`", context()),
    };
    let sys = random_system(run.n, run.k, model, run.seed);

    let solve_approx = || -> SolveResult {
        match notion {
            Notion::Strong => smis_approx(&sys),
            Notion::Weak => wmis_approx(&sys),
        }
    };
    let solve_exact = || -> Result<SolveResult> {
        Ok(match notion {
            Notion::Strong => {
                smis_exact(&sys, run.max_exact_n.unwrap_or(STRONG_EXACT_GUARD), false)?
            }
            Notion::Weak => wmis_exact(&sys, run.max_exact_n.unwrap_or(WEAK_EXACT_GUARD))?,
        })
    };

    let (primary, exact) = match run.algo.as_str() {
        "approx" => (solve_approx(), None),
        "exact" => {
            let e = solve_exact().with_context(context)?;
            (e.clone(), Some(e))
        }
        "both" => (solve_approx(), Some(solve_exact().with_context(context)?)),
        other => bail!("{}: unknown algo `{other}`", context()),
    };

    let family = format!("random-{}", run.model);
    let instance_id = run
        .id
        .clone()
        .unwrap_or_else(|| format!("{family}-n{}-k{}-s{}", run.n, run.k, run.seed));
    let (exact_count, ratio) = match &exact {
        Some(e) => {
            let ratio = if e.outliers.is_empty() {
                1.0
            } else {
                primary.outliers.len() as f64 / e.outliers.len() as f64
            };
            (e.outliers.len().to_string(), format!("{ratio}"))
        }
        None => (String::new(), String::new()),
    };
    Ok(vec![
        CSV_SCHEMA_VERSION.to_string(),
        instance_id,
        family,
        run.n.to_string(),
        run.k.to_string(),
        run.algo.clone(),
        primary.outliers.len().to_string(),
        exact_count,
        ratio,
        primary.stats.wall_time_micros.to_string(),
        primary.stats.comparisons.to_string(),
        run.seed.to_string(),
    ])
}

pub fn rows_to_csv(rows: &[Vec<String>]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record(row)?;
    }
    let bytes = writer.into_inner().context("flushing csv")?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn cmd_bench(config_path: &Path, out: Option<&Path>) -> Result<i32> {
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let config =
        parse_config(&text).with_context(|| format!("parsing {}", config_path.display()))?;
    let rows = run_config(&config)?;
    let csv = rows_to_csv(&rows)?;
    if let Some(path) = out {
        std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{csv}");
    Ok(EXIT_OK)
}
