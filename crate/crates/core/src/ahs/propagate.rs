//! Action of `exp(−iHτ)` on a state by Chebyshev expansion.
//!
//! With the spectrum of `H` inside `[c − a, c + a]`,
//!
//! ```text
//! exp(−iHτ) = e^{−icτ} [ J₀(aτ) + 2 Σ_{n≥1} (−i)ⁿ Jₙ(aτ) Tₙ((H − c)/a) ]
//! ```
//!
//! which converges to machine precision once `n` exceeds `aτ` by a few
//! tens, without forming `H` densely.

use num_complex::Complex64;

use super::hamiltonian::RydbergHamiltonian;

/// `[J₀(z), J₁(z), …, J_nmax(z)]` by Miller's downward recurrence,
/// normalized with `J₀ + 2 Σ J₂ₖ = 1`.
pub fn bessel_j_sequence(z: f64, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = nmax.max(z.ceil() as usize);
    let start = 2 * ((top + 30 + (160.0 * top as f64).sqrt() as usize) / 2);
    let (mut above, mut here) = (0.0f64, 1e-30f64);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= nmax {
            out[k] = here;
        }
        if k % 2 == 0 {
            norm += 2.0 * here;
        }
        let below = 2.0 * k as f64 / z * here - above;
        above = here;
        here = below;
        if here.abs() > 1e250 {
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
            above *= 1e-250;
            here *= 1e-250;
            norm *= 1e-250;
        }
    }
    out[0] = here;
    norm += here;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Truncation bound on `2 Σ_{n>N} |Jₙ|`, which caps the error of one step
/// because every `Tₙ` of the rescaled Hamiltonian has norm at most 1.
const TAIL_TOLERANCE: f64 = 1e-15;

/// Reusable buffers for repeated propagation of one register size.
#[derive(Debug, Default)]
pub struct ChebyshevPropagator {
    prev: Vec<Complex64>,
    curr: Vec<Complex64>,
    next: Vec<Complex64>,
    acc: Vec<Complex64>,
    diag: Vec<f64>,
    /// Largest expansion order used so far.
    pub max_terms: usize,
}

/// `next = 2·H̃·curr − prev` (or `H̃·curr` when `prev` is absent), where
/// `H̃` has diagonal `diag` and transverse amplitude `flip` per atom.
fn recurrence(
    atoms: usize,
    diag: &[f64],
    flip: f64,
    curr: &[Complex64],
    prev: Option<&[Complex64]>,
    next: &mut [Complex64],
) {
    for (s, out) in next.iter_mut().enumerate() {
        let mut flips = Complex64::new(0.0, 0.0);
        for i in 0..atoms {
            flips += curr[s ^ (1 << i)];
        }
        let hv = curr[s] * diag[s] + flips * flip;
        *out = match prev {
            Some(p) => hv * 2.0 - p[s],
            None => hv,
        };
    }
}

impl ChebyshevPropagator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces `state` by `exp(−i H τ) state`.
    pub fn step(&mut self, h: &RydbergHamiltonian, tau: f64, state: &mut [Complex64]) {
        let dim = state.len();
        let (lo, hi) = h.spectral_bounds();
        let center = 0.5 * (lo + hi);
        let half_width = 0.5 * (hi - lo);
        let phase = Complex64::from_polar(1.0, -center * tau);
        if half_width * tau < 1e-15 {
            state.iter_mut().for_each(|a| *a *= phase);
            return;
        }

        let z = half_width * tau;
        let mut coeffs = bessel_j_sequence(z, (z + 10.0 * z.cbrt() + 20.0).ceil() as usize);
        let mut tail = 0.0;
        while coeffs.len() > 2 {
            tail += 2.0 * coeffs[coeffs.len() - 1].abs();
            if tail > TAIL_TOLERANCE {
                break;
            }
            coeffs.pop();
        }
        self.max_terms = self.max_terms.max(coeffs.len() - 1);

        for buf in [
            &mut self.prev,
            &mut self.curr,
            &mut self.next,
            &mut self.acc,
        ] {
            buf.clear();
            buf.resize(dim, Complex64::new(0.0, 0.0));
        }
        self.diag.clear();
        self.diag
            .extend(h.diagonal.iter().map(|d| (d - center) / half_width));
        let flip = 0.5 * h.omega / half_width;
        let atoms = h.atoms();

        self.prev.copy_from_slice(state);
        recurrence(atoms, &self.diag, flip, &self.prev, None, &mut self.curr);
        let mut minus_i_pow = Complex64::new(0.0, -1.0);
        let c1 = minus_i_pow * (2.0 * coeffs[1]);
        for s in 0..dim {
            self.acc[s] = self.prev[s] * coeffs[0] + self.curr[s] * c1;
        }
        for &jn in &coeffs[2..] {
            minus_i_pow *= Complex64::new(0.0, -1.0);
            recurrence(
                atoms,
                &self.diag,
                flip,
                &self.curr,
                Some(&self.prev),
                &mut self.next,
            );
            let cn = minus_i_pow * (2.0 * jn);
            for (a, t) in self.acc.iter_mut().zip(&self.next) {
                *a += t * cn;
            }
            std::mem::swap(&mut self.prev, &mut self.curr);
            std::mem::swap(&mut self.curr, &mut self.next);
        }
        for (s, a) in state.iter_mut().zip(&self.acc) {
            *s = a * phase;
        }
    }
}
