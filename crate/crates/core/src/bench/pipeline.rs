use rayon::prelude::*;

use super::PipelineConfig;
use crate::ahs::{solve_subgraph_with_dt, InteractionModel, SubgraphSolution};
use crate::embedding::{default_theta, embed, EmbeddingReport, UnitDiskGraph};
use crate::merger::{finalize, merge, GlobalSolution};
use crate::partition::{extract_capped_subgraphs, partition};
use crate::qubo::{decompose, QuboMatrix};
use crate::{mix_seed, Error, Result};

/// Seed stream reserved for the layout; box streams come from
/// [`crate::partition::Subgraph::stream_id`].
const LAYOUT_STREAM: u64 = u64::MAX;

/// A pipeline run together with the intermediate artifacts needed to audit it.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub graph: UnitDiskGraph,
    pub embedding: EmbeddingReport,
    pub subgraphs: usize,
    pub local_solutions: Vec<SubgraphSolution>,
    pub solution: GlobalSolution,
}

/// The unit-disk graph a pipeline run with this `seed` solves on. Lets a
/// caller audit an emitted assignment without repeating the simulation.
pub fn pipeline_embedding(
    q: &QuboMatrix,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<(UnitDiskGraph, EmbeddingReport)> {
    cfg.validate().map_err(Error::in_stage("config"))?;
    let theta = cfg.theta.unwrap_or_else(|| default_theta(&decompose(q)));
    embed(q, cfg.blockade_radius, theta, mix_seed(seed, LAYOUT_STREAM))
        .map_err(Error::in_stage("embed"))
}

/// Embeds, partitions, solves every box, merges and maps back.
pub fn run_pipeline(q: &QuboMatrix, cfg: &PipelineConfig, seed: u64) -> Result<GlobalSolution> {
    run_pipeline_detailed(q, cfg, seed).map(|o| o.solution)
}

pub fn run_pipeline_detailed(
    q: &QuboMatrix,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<PipelineOutcome> {
    let (graph, embedding) = pipeline_embedding(q, cfg, seed)?;
    let r = cfg.blockade_radius;

    let subgraphs = partition(&graph, cfg.box_side())
        .and_then(|p| extract_capped_subgraphs(&graph, &p, cfg.atom_cap))
        .map_err(Error::in_stage("partition"))?;

    let model = InteractionModel::calibrated(cfg.schedule.omega_max, r)
        .map_err(Error::in_stage("solve"))?;
    let dt = cfg.schedule.dt();
    let local_solutions = subgraphs
        .par_iter()
        .map(|sub| {
            let sched = cfg
                .schedule
                .schedule_for(sub.vertices.iter().map(|v| v.weight))?;
            solve_subgraph_with_dt(
                sub,
                &model,
                &sched,
                dt,
                cfg.shots,
                mix_seed(seed, sub.stream_id()),
            )
        })
        .collect::<Result<Vec<_>>>()
        .map_err(Error::in_stage("solve"))?;

    let ids = merge(&graph, &local_solutions).map_err(Error::in_stage("merge"))?;
    let solution = finalize(q, &graph, &ids).map_err(Error::in_stage("finalize"))?;
    Ok(PipelineOutcome {
        graph,
        embedding,
        subgraphs: subgraphs.len(),
        local_solutions,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(rows: &[&[f64]]) -> QuboMatrix {
        QuboMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn single_beneficial_variable() {
        let sol = run_pipeline(&q(&[&[-1.0]]), &PipelineConfig::default(), 0).unwrap();
        assert_eq!(
            (sol.assignment.to_string(), sol.qubo_energy),
            ("1".into(), -1.0)
        );
    }

    #[test]
    fn conflicting_pair_keeps_the_better_variable() {
        let sol = run_pipeline(
            &q(&[&[-1.0, 5.0], &[5.0, -2.0]]),
            &PipelineConfig::default(),
            0,
        )
        .unwrap();
        assert_eq!(
            (sol.assignment.to_string(), sol.qubo_energy),
            ("01".into(), -2.0)
        );
    }

    #[test]
    fn null_objective() {
        let sol = run_pipeline(
            &QuboMatrix::zeros(4).unwrap(),
            &PipelineConfig::default(),
            3,
        )
        .unwrap();
        assert_eq!(sol.qubo_energy, 0.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let m = crate::qubo::random_instance(8, 0.4, 5).unwrap();
        let cfg = PipelineConfig::default();
        assert_eq!(
            run_pipeline(&m, &cfg, 11).unwrap(),
            run_pipeline(&m, &cfg, 11).unwrap()
        );
    }

    #[test]
    fn embedding_matches_the_full_run() {
        let m = crate::qubo::random_instance(7, 0.4, 2).unwrap();
        let cfg = PipelineConfig::default();
        let out = run_pipeline_detailed(&m, &cfg, 4).unwrap();
        assert_eq!(pipeline_embedding(&m, &cfg, 4).unwrap().0, out.graph);
    }

    #[test]
    fn errors_name_the_stage() {
        let cfg = PipelineConfig {
            theta: Some(-1.0),
            ..PipelineConfig::default()
        };
        let err = run_pipeline(&q(&[&[-1.0]]), &cfg, 0).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Stage {
                    stage: "config",
                    ..
                }
            ),
            "{err}"
        );
    }
}
