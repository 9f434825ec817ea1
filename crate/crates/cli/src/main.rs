use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rydberg_qubo::bench::{
    instance_suite, run_benchmark, run_pipeline_detailed, write_report, PipelineConfig, SuiteMode,
};
use rydberg_qubo::qubo::{brute_force_solve, random_instance, QuboMatrix};

/// Grid-partitioned Rydberg-atom heuristic for QUBO, with a
/// simulated-annealing baseline and an exhaustive oracle.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one QUBO file with the hybrid pipeline.
    Solve {
        /// QUBO in text format: `n`, then `n` rows of `n` numbers.
        instance: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run both solvers on a suite and write CSV reports.
    Bench {
        #[arg(long, default_value = "random")]
        mode: SuiteMode,
        /// Comma-separated instance sizes.
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
        sizes: Vec<usize>,
        /// Price CSV for portfolio mode.
        #[arg(long)]
        prices: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Exact minimum by exhaustive enumeration.
    Oracle { instance: PathBuf },
    /// Write a random QUBO instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML pipeline configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured global seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => PipelineConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.global_seed = seed;
        }
        Ok(cfg)
    }
}

fn read_qubo(path: &Path) -> Result<QuboMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.parse()
        .with_context(|| format!("parsing {}", path.display()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve { instance, common } => {
            let cfg = common.config()?;
            let q = read_qubo(&instance)?;
            let out = run_pipeline_detailed(&q, &cfg, cfg.global_seed)?;
            println!("assignment {}", out.solution.assignment);
            println!("energy {}", out.solution.qubo_energy);
            println!("mwis_weight {}", out.solution.mwis_weight);
            println!("subgraphs {}", out.subgraphs);
            println!("edge_fidelity {}", out.embedding.edge_fidelity);
            println!("spurious_edges {}", out.embedding.spurious_edges);
        }
        Command::Bench {
            mode,
            sizes,
            prices,
            out,
            common,
        } => {
            let cfg = common.config()?;
            let suite = instance_suite(mode, &sizes, prices.as_deref(), cfg.global_seed, &cfg)?;
            if suite.is_empty() {
                bail!("no instance sizes given");
            }
            let report = run_benchmark(&suite, &cfg)?;
            for f in &report.failures {
                eprintln!("skipped {}: {}", f.instance_name, f.message);
            }
            write_report(&out, &report)?;
            for row in &report.rows {
                println!(
                    "{:<8} {:<14} {:>14.6} ± {:.6}",
                    row.instance_name, row.method, row.mean_energy, row.std_energy
                );
            }
            println!("wrote {}", out.display());
        }
        Command::Oracle { instance } => {
            let (x, e) = brute_force_solve(&read_qubo(&instance)?)?;
            println!("assignment {x}");
            println!("energy {e}");
        }
        Command::Gen {
            n,
            density,
            seed,
            out,
        } => {
            let text = random_instance(n, density, seed)?.to_string();
            match out {
                Some(path) => {
                    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
                }
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}
