//! Rydberg register Hamiltonian in the occupation basis.
//!
//! Basis state `s` has atom `i` excited iff bit `i` of `s` is set. The
//! Hamiltonian is the diagonal detuning-plus-interaction part and a uniform
//! transverse drive `(Ω/2) Σ σˣ`, so it is stored as its diagonal plus `Ω`
//! and applied matrix-free.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ATOM_CAP;
use crate::embedding::Vertex;
use crate::partition::Subgraph;
use crate::{Error, Result};

/// Pairs farther apart than this many blockade radii do not interact.
pub const INTERACTION_CUTOFF: f64 = 2.5;
/// Pairs closer than this many blockade radii interact as if at this
/// distance, bounding the stiffness of the register at 64·Ω_max.
pub const MIN_INTERACTION_DISTANCE: f64 = 0.5;

/// Van der Waals interaction `V(d) = C₆ / d⁶`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionModel {
    /// rad·µm⁶/µs.
    pub c6: f64,
    /// µm.
    pub blockade_radius: f64,
}

impl InteractionModel {
    /// Chooses `C₆` so that the interaction at the blockade radius equals
    /// the peak Rabi frequency.
    pub fn calibrated(omega_max: f64, blockade_radius: f64) -> Result<Self> {
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "peak Rabi frequency must be positive, got {omega_max}"
            )));
        }
        if !(blockade_radius.is_finite() && blockade_radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "blockade radius must be positive, got {blockade_radius}"
            )));
        }
        Ok(Self {
            c6: omega_max * blockade_radius.powi(6),
            blockade_radius,
        })
    }

    pub fn interaction(&self, distance: f64) -> f64 {
        let r = self.blockade_radius;
        if distance > INTERACTION_CUTOFF * r {
            return 0.0;
        }
        self.c6 / distance.max(MIN_INTERACTION_DISTANCE * r).powi(6)
    }

    /// Pairwise interactions `(i, j, V_ij)` of a register, `i < j`.
    pub fn pair_terms(&self, atoms: &[Vertex]) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                let v = self.interaction(atoms[i].distance(&atoms[j]));
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

/// `H = (Ω/2) Σ σˣ + diag(E_s)` over `2^k` occupation states.
#[derive(Debug, Clone, PartialEq)]
pub struct RydbergHamiltonian {
    atoms: usize,
    pub omega: f64,
    pub diagonal: Vec<f64>,
}

impl RydbergHamiltonian {
    pub fn new(atoms: usize, omega: f64, diagonal: Vec<f64>) -> Result<Self> {
        if atoms > ATOM_CAP {
            return Err(Error::SizeLimit {
                what: "simulated register",
                size: atoms,
                limit: ATOM_CAP,
            });
        }
        if diagonal.len() != 1 << atoms {
            return Err(Error::InvalidArgument(format!(
                "{atoms} atoms need a diagonal of length {}, got {}",
                1usize << atoms,
                diagonal.len()
            )));
        }
        Ok(Self {
            atoms,
            omega,
            diagonal,
        })
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// `out = H · v`.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let half = 0.5 * self.omega;
        for (s, o) in out.iter_mut().enumerate() {
            let mut acc = v[s] * self.diagonal[s];
            if half != 0.0 {
                let mut flips = Complex64::new(0.0, 0.0);
                for i in 0..self.atoms {
                    flips += v[s ^ (1 << i)];
                }
                acc += flips * half;
            }
            *o = acc;
        }
    }

    /// Gershgorin bounds on the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let radius = 0.5 * self.omega.abs() * self.atoms as f64;
        let (lo, hi) = self
            .diagonal
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| {
                (lo.min(d), hi.max(d))
            });
        (lo - radius, hi + radius)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for s in 0..dim {
            m[(s, s)] = self.diagonal[s];
            for i in 0..self.atoms {
                m[(s, s ^ (1 << i))] = 0.5 * self.omega;
            }
        }
        m
    }
}

/// Diagonal of the register Hamiltonian for the given detunings.
pub(crate) fn diagonal_energies(
    weights: &[f64],
    pairs: &[(usize, usize, f64)],
    delta_global: f64,
    delta_local_scale: f64,
) -> Vec<f64> {
    let k = weights.len();
    let detuning: Vec<f64> = weights
        .iter()
        .map(|&w| delta_global + delta_local_scale * w)
        .collect();
    (0..1usize << k)
        .map(|s| {
            let mut e = 0.0;
            for (i, d) in detuning.iter().enumerate() {
                if s >> i & 1 == 1 {
                    e -= d;
                }
            }
            for &(i, j, v) in pairs {
                if s >> i & 1 == 1 && s >> j & 1 == 1 {
                    e += v;
                }
            }
            e
        })
        .collect()
}

/// `H = Σ (Ω/2) σˣ_i − Σ (Δ_global + Δ_local·w_i) n_i + Σ_{i<j} V_ij n_i n_j`.
pub fn build_hamiltonian(
    sub: &Subgraph,
    model: &InteractionModel,
    omega: f64,
    delta_global: f64,
    delta_local_scale: f64,
) -> Result<RydbergHamiltonian> {
    let k = sub.len();
    if k > ATOM_CAP {
        return Err(Error::SizeLimit {
            what: "simulated register",
            size: k,
            limit: ATOM_CAP,
        });
    }
    let weights: Vec<f64> = sub.vertices.iter().map(|v| v.weight).collect();
    let pairs = model.pair_terms(&sub.vertices);
    Ok(RydbergHamiltonian {
        atoms: k,
        omega,
        diagonal: diagonal_energies(&weights, &pairs, delta_global, delta_local_scale),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ahs::test_support::register;

    #[test]
    fn single_atom_drive() {
        let m = InteractionModel::calibrated(1.0, 1.0).unwrap();
        let h = build_hamiltonian(&register(&[(0.0, 0.0, 1.0)], 1.0), &m, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(
            h.to_dense(),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0])
        );
    }

    #[test]
    fn single_atom_local_detuning() {
        let m = InteractionModel::calibrated(1.0, 1.0).unwrap();
        let h = build_hamiltonian(&register(&[(0.0, 0.0, 2.0)], 1.0), &m, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(
            h.to_dense(),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -2.0])
        );
    }

    #[test]
    fn pair_at_radius_only_shifts_doubly_excited_state() {
        let r = 5.0;
        let m = InteractionModel::calibrated(3.0, r).unwrap();
        let sub = register(&[(0.0, 0.0, 1.0), (r, 0.0, 1.0)], r);
        let h = build_hamiltonian(&sub, &m, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(h.diagonal, vec![0.0, 0.0, 0.0, m.c6 / r.powi(6)]);
        assert!((h.diagonal[3] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn calibration_identity() {
        for (omega, r) in [(7.54, 5.0), (1.0, 1.0), (20.0, 8.7)] {
            let m = InteractionModel::calibrated(omega, r).unwrap();
            assert!((m.c6 / r.powi(6) - omega).abs() <= 1e-12 * omega);
        }
        assert!(InteractionModel::calibrated(0.0, 1.0).is_err());
    }

    #[test]
    fn cutoff_and_clamp() {
        let m = InteractionModel::calibrated(2.0, 1.0).unwrap();
        assert_eq!(m.interaction(2.6), 0.0);
        assert!(m.interaction(2.4) > 0.0);
        assert_eq!(m.interaction(0.1), m.interaction(0.5));
        assert_eq!(m.interaction(0.0), 128.0);
    }

    #[test]
    fn oversized_register_rejected() {
        let pts: Vec<(f64, f64, f64)> = (0..ATOM_CAP + 1)
            .map(|i| (i as f64 * 3.0, 0.0, 1.0))
            .collect();
        let m = InteractionModel::calibrated(1.0, 1.0).unwrap();
        assert!(matches!(
            build_hamiltonian(&register(&pts, 1.0), &m, 1.0, -1.0, 1.0),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn hermitian_and_matches_matrix_free_action() {
        let sub = register(
            &[
                (0.0, 0.0, 1.0),
                (0.7, 0.2, 2.0),
                (1.4, 0.9, 1.5),
                (0.2, 1.3, 0.7),
            ],
            1.0,
        );
        let m = InteractionModel::calibrated(7.5, 1.0).unwrap();
        let h = build_hamiltonian(&sub, &m, 6.1, -3.0, 2.2).unwrap();
        let dense = h.to_dense();
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                assert!((dense[(i, j)] - dense[(j, i)]).abs() <= 1e-12);
            }
        }
        let v: Vec<Complex64> = (0..h.dim())
            .map(|s| Complex64::new((s as f64).sin(), (s as f64 * 0.3).cos()))
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); h.dim()];
        h.apply(&v, &mut out);
        for s in 0..h.dim() {
            let expect: Complex64 = (0..h.dim()).map(|t| v[t] * dense[(s, t)]).sum();
            assert!((out[s] - expect).norm() < 1e-12);
        }
    }
}
