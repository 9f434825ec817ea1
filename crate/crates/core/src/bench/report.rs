use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{run_pipeline, PipelineConfig};
use crate::anneal::anneal;
use crate::portfolio::{annualize, build_markowitz_qubo, load_prices, log_returns};
use crate::qubo::{brute_force_solve, energy, random_instance, BinaryVector, QuboMatrix};
use crate::{mix_seed, Error, Result};

/// Instances up to this size get a brute-force optimum in the report.
pub const ORACLE_MAX_VARS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Method {
    #[serde(rename = "gp_naqc")]
    GpNaqc,
    #[serde(rename = "sim_annealing")]
    SimAnnealing,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::GpNaqc, Method::SimAnnealing];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::GpNaqc => "gp_naqc",
            Method::SimAnnealing => "sim_annealing",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteMode {
    Portfolio,
    Random,
}

impl FromStr for SuiteMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "portfolio" => Ok(SuiteMode::Portfolio),
            "random" => Ok(SuiteMode::Random),
            other => Err(Error::InvalidArgument(format!(
                "mode must be portfolio or random, got {other:?}"
            ))),
        }
    }
}

/// One repeat of one method on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance_name: String,
    pub method: Method,
    pub repeat: usize,
    pub seed: u64,
    pub energy: f64,
    pub assignment: BinaryVector,
    pub wall_time_s: f64,
}

/// Summary of the `repeats` runs of one method on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub instance_name: String,
    pub method: Method,
    pub mean_energy: f64,
    /// Sample standard deviation; 0 for a single repeat.
    pub std_energy: f64,
    pub repeats: usize,
    /// Mean wall time per run.
    pub wall_time_s: f64,
    /// Brute-force optimum, for instances small enough to enumerate.
    pub optimum: Option<f64>,
    /// `(mean − optimum) / |optimum|`, or `mean − optimum` when the optimum is 0.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFailure {
    pub instance_name: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub runs: Vec<RunRecord>,
    pub failures: Vec<InstanceFailure>,
}

/// Named instances for a benchmark suite. Each size `k` yields `Q{k}`:
/// the first `k` assets of the price file in portfolio mode, or a random
/// instance in random mode.
pub fn instance_suite(
    mode: SuiteMode,
    sizes: &[usize],
    source: Option<&Path>,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<Vec<(String, QuboMatrix)>> {
    if sizes.is_empty() {
        return Ok(Vec::new());
    }
    match mode {
        SuiteMode::Random => sizes
            .iter()
            .map(|&k| {
                Ok((
                    format!("Q{k}"),
                    random_instance(k, cfg.density, mix_seed(seed, k as u64))?,
                ))
            })
            .collect(),
        SuiteMode::Portfolio => {
            let path = source.ok_or_else(|| {
                Error::InvalidArgument("portfolio mode needs a price file".into())
            })?;
            let prices = load_prices(path)?;
            let needed = sizes.iter().copied().max().unwrap_or(0);
            if needed > prices.n_assets() {
                return Err(Error::Data(format!(
                    "suite needs {needed} assets but {} has only {}",
                    path.display(),
                    prices.n_assets()
                )));
            }
            sizes
                .iter()
                .map(|&k| {
                    let stats = annualize(&log_returns(&prices.leading_assets(k)?)?)?;
                    Ok((format!("Q{k}"), build_markowitz_qubo(&stats, cfg.gamma)?))
                })
                .collect()
        }
    }
}

fn run_seed(global: u64, instance: usize, method: Method, repeat: usize) -> u64 {
    let stream = (instance as u64) << 32 | (method as u64) << 24 | repeat as u64;
    mix_seed(global, stream)
}

fn run_once(
    name: &str,
    q: &QuboMatrix,
    method: Method,
    repeat: usize,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<RunRecord> {
    let start = Instant::now();
    let (assignment, e) = match method {
        Method::GpNaqc => {
            let sol = run_pipeline(q, cfg, seed)?;
            (sol.assignment, sol.qubo_energy)
        }
        Method::SimAnnealing => anneal(q, &cfg.sa.apply(q, seed))?,
    };
    let wall_time_s = start.elapsed().as_secs_f64();
    // Every reported energy is re-scored from the emitted assignment.
    let rescored = energy(q, &assignment)?;
    if rescored != e {
        return Err(Error::InvariantViolation(format!(
            "{method} run {repeat} on {name} reported {e} but its assignment scores {rescored}"
        )));
    }
    Ok(RunRecord {
        instance_name: name.to_string(),
        method,
        repeat,
        seed,
        energy: e,
        assignment,
        wall_time_s,
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn gap(mean: f64, optimum: f64) -> f64 {
    if optimum == 0.0 {
        mean - optimum
    } else {
        (mean - optimum) / optimum.abs()
    }
}

/// Runs both methods `cfg.repeats` times on every instance. Runs execute in
/// parallel; rows keep instance order with `gp_naqc` first. An instance
/// whose runs fail is recorded in `failures` and left out of the rows.
pub fn run_benchmark(
    instances: &[(String, QuboMatrix)],
    cfg: &PipelineConfig,
) -> Result<BenchmarkReport> {
    if instances.is_empty() {
        return Err(Error::InvalidArgument("no instances to benchmark".into()));
    }
    cfg.validate()?;

    let jobs: Vec<(usize, Method, usize)> = (0..instances.len())
        .flat_map(|i| {
            Method::ALL
                .into_iter()
                .flat_map(move |m| (0..cfg.repeats).map(move |k| (i, m, k)))
        })
        .collect();
    let outcomes: Vec<Result<RunRecord>> = jobs
        .par_iter()
        .map(|&(i, m, k)| {
            let (name, q) = &instances[i];
            run_once(name, q, m, k, run_seed(cfg.global_seed, i, m, k), cfg)
        })
        .collect();
    let optima: Vec<Option<f64>> = instances
        .par_iter()
        .map(|(_, q)| (q.n() <= ORACLE_MAX_VARS).then(|| brute_force_solve(q).map(|s| s.1)))
        .map(Option::transpose)
        .collect::<Result<_>>()?;

    let mut report = BenchmarkReport::default();
    let per_instance = Method::ALL.len() * cfg.repeats;
    for (i, chunk) in outcomes.chunks(per_instance).enumerate() {
        let name = &instances[i].0;
        if let Some(err) = chunk.iter().find_map(|r| r.as_ref().err()) {
            report.failures.push(InstanceFailure {
                instance_name: name.clone(),
                message: err.to_string(),
            });
            continue;
        }
        let runs: Vec<RunRecord> = chunk.iter().map(|r| r.as_ref().unwrap().clone()).collect();
        for (m, method_runs) in Method::ALL.iter().zip(runs.chunks(cfg.repeats)) {
            let energies: Vec<f64> = method_runs.iter().map(|r| r.energy).collect();
            let (mean_energy, std_energy) = mean_std(&energies);
            let wall = method_runs.iter().map(|r| r.wall_time_s).sum::<f64>() / cfg.repeats as f64;
            report.rows.push(BenchmarkRow {
                instance_name: name.clone(),
                method: *m,
                mean_energy,
                std_energy,
                repeats: cfg.repeats,
                wall_time_s: wall,
                optimum: optima[i],
                gap: optima[i].map(|o| gap(mean_energy, o)),
            });
        }
        report.runs.extend(runs);
    }
    Ok(report)
}

#[derive(Serialize)]
struct ResultLine<'a> {
    instance: &'a str,
    method: Method,
    repeats: usize,
    mean_energy: f64,
    std_energy: f64,
    optimum: Option<f64>,
    gap: Option<f64>,
}

#[derive(Serialize)]
struct RunLine<'a> {
    instance: &'a str,
    method: Method,
    repeat: usize,
    seed: u64,
    energy: f64,
    assignment: String,
}

#[derive(Serialize)]
struct TimingLine<'a> {
    instance: &'a str,
    method: Method,
    repeat: usize,
    wall_time_s: f64,
}

/// Writes `results.csv`, `runs.csv`, `timing.csv` and one
/// `solution_<name>_<method>_<rep>.txt` per run into `dir`.
///
/// Wall times are kept out of `results.csv` and `runs.csv` so that those
/// two files are byte-identical across runs with the same configuration.
pub fn write_report(dir: &Path, report: &BenchmarkReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("results.csv"))?;
    for row in &report.rows {
        w.serialize(ResultLine {
            instance: &row.instance_name,
            method: row.method,
            repeats: row.repeats,
            mean_energy: row.mean_energy,
            std_energy: row.std_energy,
            optimum: row.optimum,
            gap: row.gap,
        })?;
    }
    w.flush()?;

    let mut runs = csv::Writer::from_path(dir.join("runs.csv"))?;
    let mut timing = csv::Writer::from_path(dir.join("timing.csv"))?;
    for run in &report.runs {
        runs.serialize(RunLine {
            instance: &run.instance_name,
            method: run.method,
            repeat: run.repeat,
            seed: run.seed,
            energy: run.energy,
            assignment: run.assignment.to_string(),
        })?;
        timing.serialize(TimingLine {
            instance: &run.instance_name,
            method: run.method,
            repeat: run.repeat,
            wall_time_s: run.wall_time_s,
        })?;
        fs::write(
            dir.join(format!(
                "solution_{}_{}_{}.txt",
                run.instance_name, run.method, run.repeat
            )),
            format!("{}\n", run.assignment),
        )?;
    }
    runs.flush()?;
    timing.flush()?;
    Ok(())
}
