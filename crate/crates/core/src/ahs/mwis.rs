//! Turning measured bitstrings into independent sets, and the exact
//! solver used as oracle and fallback.

use super::{SubgraphSolution, EXACT_MWIS_MAX};
use crate::embedding::Vertex;
use crate::partition::Subgraph;
use crate::qubo::BinaryVector;
use crate::{Error, Result};

fn solution(sub: &Subgraph, chosen: &[usize], shots_used: usize) -> SubgraphSolution {
    let selected: Vec<Vertex> = chosen.iter().map(|&i| sub.vertices[i]).collect();
    SubgraphSolution {
        total_weight: selected.iter().map(|v| v.weight).sum(),
        selected,
        shots_used,
    }
}

fn adjacency(sub: &Subgraph) -> Vec<Vec<bool>> {
    let k = sub.len();
    let mut adj = vec![vec![false; k]; k];
    for (i, j) in sub.local_edges() {
        adj[i][j] = true;
        adj[j][i] = true;
    }
    adj
}

/// Lower weight first, then lower vertex id.
fn lighter(sub: &Subgraph, a: usize, b: usize) -> bool {
    let (va, vb) = (&sub.vertices[a], &sub.vertices[b]);
    va.weight < vb.weight || (va.weight == vb.weight && va.id < vb.id)
}

/// Removes, one at a time, the lightest vertex touching a violated edge.
fn repair(sub: &Subgraph, adj: &[Vec<bool>], mut on: Vec<bool>) -> Vec<bool> {
    let k = sub.len();
    loop {
        let mut victim: Option<usize> = None;
        for i in 0..k {
            if on[i] && (0..k).any(|j| j != i && on[j] && adj[i][j]) {
                victim = match victim {
                    Some(v) if !lighter(sub, i, v) => Some(v),
                    _ => Some(i),
                };
            }
        }
        match victim {
            Some(v) => on[v] = false,
            None => return on,
        }
    }
}

/// Repairs every shot into an independent set, keeps the heaviest, then
/// greedily adds any vertex that stays independent, heaviest first.
pub fn repair_and_select(sub: &Subgraph, shots: &[BinaryVector]) -> Result<SubgraphSolution> {
    if shots.is_empty() {
        return Err(Error::InvalidArgument(
            "no measurement shots to repair".into(),
        ));
    }
    let k = sub.len();
    if let Some(bad) = shots.iter().find(|s| s.len() != k) {
        return Err(Error::InvalidArgument(format!(
            "shot has {} bits for a {k}-atom register",
            bad.len()
        )));
    }
    let adj = adjacency(sub);
    let weight_of = |on: &[bool]| -> f64 {
        (0..k)
            .filter(|&i| on[i])
            .map(|i| sub.vertices[i].weight)
            .sum()
    };

    let mut best: Option<(f64, Vec<bool>)> = None;
    for shot in shots {
        let fixed = repair(sub, &adj, shot.as_slice().to_vec());
        let w = weight_of(&fixed);
        if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
            best = Some((w, fixed));
        }
    }
    let (_, mut on) = best.expect("shots is non-empty");

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let (va, vb) = (&sub.vertices[a], &sub.vertices[b]);
        vb.weight.total_cmp(&va.weight).then(va.id.cmp(&vb.id))
    });
    for i in order {
        if !on[i] && (0..k).all(|j| !(on[j] && adj[i][j])) {
            on[i] = true;
        }
    }
    let chosen: Vec<usize> = (0..k).filter(|&i| on[i]).collect();
    Ok(solution(sub, &chosen, shots.len()))
}

/// Maximum-weight independent set by exhaustive branch and bound. Ties go
/// to the lexicographically smallest sorted list of vertex ids.
pub fn exact_mwis(sub: &Subgraph) -> Result<SubgraphSolution> {
    let k = sub.len();
    if k > EXACT_MWIS_MAX {
        return Err(Error::SizeLimit {
            what: "exact MWIS subgraph",
            size: k,
            limit: EXACT_MWIS_MAX,
        });
    }
    // Branch in ascending id order so candidate sets compare by position.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| sub.vertices[i].id);
    let adj = adjacency(sub);
    let mut conflict = vec![0u32; k];
    for (a, &i) in order.iter().enumerate() {
        for (b, &j) in order.iter().enumerate() {
            if adj[i][j] {
                conflict[a] |= 1 << b;
            }
        }
    }
    let weights: Vec<f64> = order.iter().map(|&i| sub.vertices[i].weight).collect();
    let mut suffix = vec![0.0; k + 1];
    for a in (0..k).rev() {
        suffix[a] = suffix[a + 1] + weights[a];
    }

    struct Search<'a> {
        conflict: &'a [u32],
        weights: &'a [f64],
        suffix: &'a [f64],
        best_weight: f64,
        best: Vec<usize>,
        current: Vec<usize>,
    }
    impl Search<'_> {
        fn run(&mut self, pos: usize, mask: u32, weight: f64) {
            if weight + self.suffix[pos] < self.best_weight {
                return;
            }
            if pos == self.weights.len() {
                if weight > self.best_weight
                    || (weight == self.best_weight && self.current < self.best)
                {
                    self.best_weight = weight;
                    self.best = self.current.clone();
                }
                return;
            }
            if mask & self.conflict[pos] == 0 {
                self.current.push(pos);
                self.run(pos + 1, mask | 1 << pos, weight + self.weights[pos]);
                self.current.pop();
            }
            self.run(pos + 1, mask, weight);
        }
    }
    let mut search = Search {
        conflict: &conflict,
        weights: &weights,
        suffix: &suffix,
        best_weight: f64::NEG_INFINITY,
        best: Vec::new(),
        current: Vec::new(),
    };
    search.run(0, 0, 0.0);
    let mut chosen: Vec<usize> = search.best.iter().map(|&a| order[a]).collect();
    chosen.sort_unstable();
    Ok(solution(sub, &chosen, 0))
}
