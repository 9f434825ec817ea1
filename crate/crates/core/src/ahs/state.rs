use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hamiltonian::{InteractionModel, RydbergHamiltonian};
use super::propagate::ChebyshevPropagator;
use super::schedule::DriveSchedule;
use super::ATOM_CAP;
use crate::partition::Subgraph;
use crate::qubo::BinaryVector;
use crate::{Error, Result};

const NORM_TOLERANCE: f64 = 1e-9;

const SQRT3: f64 = 1.732_050_807_568_877_2;
/// Gauss–Legendre nodes on `[0, 1]`.
const GAUSS_NODES: [f64; 2] = [0.5 - SQRT3 / 6.0, 0.5 + SQRT3 / 6.0];
/// Weights `(3 ∓ 2√3)/12` of the fourth-order commutator-free Magnus step.
const MAGNUS_WEIGHTS: [f64; 2] = [0.25 - SQRT3 / 6.0, 0.25 + SQRT3 / 6.0];

/// State vector of a `k`-atom register; bit `i` of a basis index is the
/// occupation of atom `i` (1 = Rydberg).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    atoms: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// All atoms in the ground state.
    pub fn ground(atoms: usize) -> Result<Self> {
        if atoms > ATOM_CAP {
            return Err(Error::SizeLimit {
                what: "simulated register",
                size: atoms,
                limit: ATOM_CAP,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << atoms];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { atoms, amplitudes })
    }

    pub fn from_amplitudes(atoms: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if atoms > ATOM_CAP {
            return Err(Error::SizeLimit {
                what: "simulated register",
                size: atoms,
                limit: ATOM_CAP,
            });
        }
        if amplitudes.len() != 1 << atoms {
            return Err(Error::InvalidArgument(format!(
                "{atoms} atoms need {} amplitudes, got {}",
                1usize << atoms,
                amplitudes.len()
            )));
        }
        let state = Self { atoms, amplitudes };
        if (state.norm() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "state norm {} is not 1",
                state.norm()
            )));
        }
        Ok(state)
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability that atom `i` is excited.
    pub fn excitation(&self, i: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(s, _)| s >> i & 1 == 1)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionStats {
    pub steps: usize,
    /// Norm of the state before the final renormalization.
    pub final_norm: f64,
    pub max_chebyshev_terms: usize,
}

/// Time-ordered evolution from the all-ground state.
pub fn evolve(
    sub: &Subgraph,
    model: &InteractionModel,
    sched: &DriveSchedule,
    dt: f64,
) -> Result<QuantumState> {
    evolve_with_stats(sub, model, sched, dt).map(|(s, _)| s)
}

/// [`evolve`], also reporting the norm drift accumulated before the final
/// renormalization.
///
/// The run is cut into `⌈T/dt⌉` equal steps. Each step is the fourth-order
/// commutator-free Magnus product `exp(−iτ(a₁H₁ + a₂H₂))·exp(−iτ(a₂H₁ + a₁H₂))`
/// of the Hamiltonian sampled at the two Gauss–Legendre nodes, and each
/// factor is applied exactly by Chebyshev expansion.
pub fn evolve_with_stats(
    sub: &Subgraph,
    model: &InteractionModel,
    sched: &DriveSchedule,
    dt: f64,
) -> Result<(QuantumState, EvolutionStats)> {
    sched.validate()?;
    let total = sched.total_time;
    if !(dt.is_finite() && dt > 0.0 && dt <= total / 100.0 * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "time step {dt} must lie in (0, T/100] with T = {total}"
        )));
    }
    let k = sub.len();
    let mut state = QuantumState::ground(k)?;
    let steps = ((total / dt) * (1.0 - 1e-12)).ceil() as usize;
    let step = total / steps as f64;

    let dim = 1usize << k;
    let pairs = model.pair_terms(&sub.vertices);
    let mut interaction = vec![0.0; dim];
    let mut excited = vec![0.0; dim];
    let mut weight = vec![0.0; dim];
    for s in 0..dim {
        for (i, v) in sub.vertices.iter().enumerate() {
            if s >> i & 1 == 1 {
                excited[s] += 1.0;
                weight[s] += v.weight;
            }
        }
        for &(i, j, v) in &pairs {
            if s >> i & 1 == 1 && s >> j & 1 == 1 {
                interaction[s] += v;
            }
        }
    }

    let mut h = RydbergHamiltonian::new(k, 0.0, vec![0.0; dim])?;
    let mut propagator = ChebyshevPropagator::new();
    let dg = sched.delta_global;
    for n in 0..steps {
        let t0 = n as f64 * step;
        let (t1, t2) = (t0 + GAUSS_NODES[0] * step, t0 + GAUSS_NODES[1] * step);
        let (omega1, omega2) = (sched.omega(t1), sched.omega(t2));
        let (dl1, dl2) = (sched.delta_local(t1), sched.delta_local(t2));
        // Earlier-weighted factor first. The coefficients of each factor
        // sum to 1/2, so static terms enter each factor at half strength.
        for (c1, c2) in [
            (MAGNUS_WEIGHTS[1], MAGNUS_WEIGHTS[0]),
            (MAGNUS_WEIGHTS[0], MAGNUS_WEIGHTS[1]),
        ] {
            let dl = c1 * dl1 + c2 * dl2;
            h.omega = c1 * omega1 + c2 * omega2;
            for s in 0..dim {
                h.diagonal[s] = 0.5 * (interaction[s] - dg * excited[s]) - dl * weight[s];
            }
            propagator.step(&h, step, &mut state.amplitudes);
        }
    }

    let final_norm = state.norm();
    state.amplitudes.iter_mut().for_each(|a| *a /= final_norm);
    Ok((
        state,
        EvolutionStats {
            steps,
            final_norm,
            max_chebyshev_terms: propagator.max_terms,
        },
    ))
}

/// `shots` independent projective measurements in the occupation basis.
pub fn sample(state: &QuantumState, shots: usize, seed: u64) -> Vec<BinaryVector> {
    let mut cdf = Vec::with_capacity(state.amplitudes.len());
    let mut acc = 0.0;
    for a in &state.amplitudes {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..shots)
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            BinaryVector::from_code(state.atoms, idx as u64)
        })
        .collect()
}
