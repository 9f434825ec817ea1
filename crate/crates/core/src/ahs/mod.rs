//! Simulated analog Rydberg dynamics on subgraph registers.
//!
//! Each vertex of a subgraph is an atom. The register starts with every atom
//! in the ground state and is driven adiabatically. The Rabi drive follows a
//! trapezoid while a weight-proportional local detuning ramps up from zero
//! against a fixed negative global detuning. Close atoms blockade each other,
//! so the low-energy final states are heavy independent sets. The state
//! vector is propagated exactly and sampled; each shot is then repaired into
//! an independent set.

mod hamiltonian;
mod mwis;
mod propagate;
mod schedule;
mod state;

pub use hamiltonian::{
    build_hamiltonian, InteractionModel, RydbergHamiltonian, INTERACTION_CUTOFF,
    MIN_INTERACTION_DISTANCE,
};
pub use mwis::{exact_mwis, repair_and_select};
pub use propagate::{bessel_j_sequence, ChebyshevPropagator};
pub use schedule::{DriveSchedule, ScheduleConfig, DEFAULT_TIME_STEPS};
pub use state::{evolve, evolve_with_stats, sample, EvolutionStats, QuantumState};

use crate::embedding::Vertex;
use crate::partition::Subgraph;
use crate::Result;

/// Largest register simulated as a full state vector.
pub const ATOM_CAP: usize = 14;
/// Largest subgraph the exhaustive MWIS solver accepts.
pub const EXACT_MWIS_MAX: usize = 24;
pub const DEFAULT_SHOTS: usize = 100;

/// Independent set chosen for one box.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgraphSolution {
    pub selected: Vec<Vertex>,
    pub total_weight: f64,
    /// 0 when the set came from the exact solver.
    pub shots_used: usize,
}

impl SubgraphSolution {
    pub fn empty() -> Self {
        Self {
            selected: Vec::new(),
            total_weight: 0.0,
            shots_used: 0,
        }
    }
}

/// Simulates the register and samples it when it fits under [`ATOM_CAP`],
/// otherwise falls back to [`exact_mwis`].
pub fn solve_subgraph(
    sub: &Subgraph,
    model: &InteractionModel,
    sched: &DriveSchedule,
    shots: usize,
    seed: u64,
) -> Result<SubgraphSolution> {
    solve_subgraph_with_dt(
        sub,
        model,
        sched,
        sched.total_time / DEFAULT_TIME_STEPS as f64,
        shots,
        seed,
    )
}

pub fn solve_subgraph_with_dt(
    sub: &Subgraph,
    model: &InteractionModel,
    sched: &DriveSchedule,
    dt: f64,
    shots: usize,
    seed: u64,
) -> Result<SubgraphSolution> {
    if sub.is_empty() {
        return Ok(SubgraphSolution::empty());
    }
    if sub.len() > ATOM_CAP {
        return exact_mwis(sub);
    }
    let state = evolve(sub, model, sched, dt)?;
    let measured = sample(&state, shots.max(1), seed);
    repair_and_select(sub, &measured)
}
