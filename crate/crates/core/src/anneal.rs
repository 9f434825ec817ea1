//! Single-flip Metropolis simulated annealing for QUBO.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::qubo::{energy, BinaryVector, QuboMatrix};
use crate::{Error, Result};

pub const DEFAULT_SWEEPS: usize = 2000;
pub const DEFAULT_T_END: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealConfig {
    pub sweeps: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub seed: u64,
}

impl AnnealConfig {
    /// 2000 sweeps cooling from `2·max|Q|` to `1e-3`.
    pub fn for_instance(q: &QuboMatrix, seed: u64) -> Self {
        let scale = 2.0 * q.max_abs();
        Self {
            sweeps: DEFAULT_SWEEPS,
            t_start: if scale > DEFAULT_T_END { scale } else { 1.0 },
            t_end: DEFAULT_T_END,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_start > self.t_end && self.t_start.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "temperatures must satisfy t_start > t_end > 0, got {} and {}",
                self.t_start, self.t_end
            )));
        }
        Ok(())
    }

    /// Temperature of sweep `k`, geometric from `t_start` to `t_end`.
    pub fn temperature(&self, k: usize) -> f64 {
        if self.sweeps <= 1 {
            return self.t_start;
        }
        let frac = k as f64 / (self.sweeps - 1) as f64;
        self.t_start * (self.t_end / self.t_start).powf(frac)
    }
}

/// Overrides of the per-instance defaults, as read from a config file.
#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealOverrides {
    pub sweeps: Option<usize>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
}

impl AnnealOverrides {
    pub fn apply(&self, q: &QuboMatrix, seed: u64) -> AnnealConfig {
        let base = AnnealConfig::for_instance(q, seed);
        AnnealConfig {
            sweeps: self.sweeps.unwrap_or(base.sweeps),
            t_start: self.t_start.unwrap_or(base.t_start),
            t_end: self.t_end.unwrap_or(base.t_end),
            seed,
        }
    }
}

/// Assignment with cached local fields `Σ_{j≠i} Q_ij x_j`.
#[derive(Debug, Clone)]
pub(crate) struct FlipState<'a> {
    q: &'a QuboMatrix,
    pub x: Vec<bool>,
    field: Vec<f64>,
    pub energy: f64,
}

impl<'a> FlipState<'a> {
    pub fn new(q: &'a QuboMatrix, x: Vec<bool>) -> Self {
        let n = q.n();
        let field: Vec<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && x[j])
                    .map(|j| q.get(i, j))
                    .sum()
            })
            .collect();
        let energy = (0..n)
            .filter(|&i| x[i])
            .map(|i| q.get(i, i) + field[i])
            .sum();
        Self {
            q,
            x,
            field,
            energy,
        }
    }

    /// Energy change of flipping bit `i`.
    #[inline]
    pub fn delta(&self, i: usize) -> f64 {
        let sign = if self.x[i] { -1.0 } else { 1.0 };
        sign * (self.q.get(i, i) + 2.0 * self.field[i])
    }

    pub fn flip(&mut self, i: usize) {
        let d = self.delta(i);
        let sign = if self.x[i] { -1.0 } else { 1.0 };
        self.x[i] = !self.x[i];
        self.energy += d;
        for (k, (f, qik)) in self.field.iter_mut().zip(self.q.row(i)).enumerate() {
            if k != i {
                *f += sign * qik;
            }
        }
    }
}

/// Returns the best assignment visited and its exactly re-evaluated energy.
pub fn anneal(q: &QuboMatrix, cfg: &AnnealConfig) -> Result<(BinaryVector, f64)> {
    cfg.validate()?;
    let n = q.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let mut state = FlipState::new(q, start);
    let mut best = (state.energy, state.x.clone());
    let mut order: Vec<usize> = (0..n).collect();

    for sweep in 0..cfg.sweeps {
        let t = cfg.temperature(sweep);
        order.shuffle(&mut rng);
        for &i in &order {
            let d = state.delta(i);
            if d <= 0.0 || rng.gen::<f64>() < (-d / t).exp() {
                state.flip(i);
                if state.energy < best.0 {
                    best = (state.energy, state.x.clone());
                }
            }
        }
    }

    let x = BinaryVector::from_bools(best.1);
    let e = energy(q, &x)?;
    Ok((x, e))
}
