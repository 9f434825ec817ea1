//! Greedy merge of per-box independent sets into one global set.

use std::collections::BTreeSet;

use crate::ahs::SubgraphSolution;
use crate::embedding::{UnitDiskGraph, Vertex};
use crate::qubo::{energy, BinaryVector, QuboMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSolution {
    /// Ascending vertex ids.
    pub independent_set: Vec<usize>,
    pub assignment: BinaryVector,
    pub qubo_energy: f64,
    pub mwis_weight: f64,
}

/// Unions the local selections and keeps candidates in order of
/// decreasing weight (ties by ascending id) whenever they lie strictly
/// farther than the blockade radius from everything kept so far.
pub fn merge(g: &UnitDiskGraph, locals: &[SubgraphSolution]) -> Result<Vec<usize>> {
    let ids: BTreeSet<usize> = locals
        .iter()
        .flat_map(|s| s.selected.iter().map(|v| v.id))
        .collect();
    let mut candidates: Vec<Vertex> = ids
        .into_iter()
        .map(|id| {
            g.vertex(id).copied().ok_or_else(|| {
                Error::InvalidArgument(format!("local solution names unknown vertex {id}"))
            })
        })
        .collect::<Result<_>>()?;
    candidates.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.id.cmp(&b.id)));

    let r = g.blockade_radius();
    let mut kept: Vec<Vertex> = Vec::new();
    for c in candidates {
        if kept.iter().all(|k| k.distance(&c) > r) {
            kept.push(c);
        }
    }
    Ok(kept.into_iter().map(|v| v.id).collect())
}

/// Maps an independent set of `g` back to a QUBO assignment.
pub fn finalize(q: &QuboMatrix, g: &UnitDiskGraph, ids: &[usize]) -> Result<GlobalSolution> {
    let unique: BTreeSet<usize> = ids.iter().copied().collect();
    let chosen: Vec<Vertex> = unique
        .iter()
        .map(|&id| {
            g.vertex(id)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("unknown vertex {id}")))
        })
        .collect::<Result<_>>()?;
    let r = g.blockade_radius();
    for (i, a) in chosen.iter().enumerate() {
        if let Some(b) = chosen[i + 1..].iter().find(|b| a.distance(b) <= r) {
            return Err(Error::InvariantViolation(format!(
                "vertices {} and {} are {} apart, within the blockade radius {r}",
                a.id,
                b.id,
                a.distance(b)
            )));
        }
    }
    let independent_set: Vec<usize> = unique.into_iter().collect();
    let assignment = BinaryVector::from_indices(q.n(), &independent_set)?;
    Ok(GlobalSolution {
        qubo_energy: energy(q, &assignment)?,
        mwis_weight: chosen.iter().map(|v| v.weight).sum(),
        independent_set,
        assignment,
    })
}
