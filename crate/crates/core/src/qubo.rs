//! QUBO instances, energy evaluation and the exhaustive oracle.
//!
//! All instances are minimization problems: the objective of an assignment
//! `x` is `xᵀ Q x` with `Q` symmetric.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

/// Largest instance the exhaustive oracle accepts.
pub const BRUTE_FORCE_MAX_VARS: usize = 24;

/// Symmetric real cost matrix of a QUBO instance.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl QuboMatrix {
    /// Builds an instance from rows, symmetrizing as `(Q + Qᵀ) / 2`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument(
                "QUBO matrix must have n >= 1".into(),
            ));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_flat(n, flat)
    }

    /// Builds an instance from a row-major buffer of length `n * n`.
    pub fn from_flat(n: usize, flat: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "QUBO matrix must have n >= 1".into(),
            ));
        }
        if flat.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                flat.len()
            )));
        }
        if let Some(pos) = flat.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "entry ({}, {}) is not finite",
                pos / n,
                pos % n
            )));
        }
        let mut entries = flat;
        for i in 0..n {
            for j in (i + 1)..n {
                let a = entries[i * n + j];
                let b = entries[j * n + i];
                if a != b {
                    let avg = 0.5 * (a + b);
                    entries[i * n + j] = avg;
                    entries[j * n + i] = avg;
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_flat(n, vec![0.0; n * n])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut flat = vec![0.0; n * n];
        for i in 0..n {
            flat[i * n + i] = 1.0;
        }
        Self::from_flat(n, flat)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Leading `k × k` block (the first `k` variables).
    pub fn leading(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n {
            return Err(Error::InvalidArgument(format!(
                "cannot take {k} leading variables of an n = {} instance",
                self.n
            )));
        }
        let flat = (0..k)
            .flat_map(|i| self.row(i)[..k].iter().copied())
            .collect();
        Self::from_flat(k, flat)
    }
}

impl fmt::Display for QuboMatrix {
    /// Plain-text format: `n` on the first line, then `n` rows of `n` values.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for QuboMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty QUBO file".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::Format(format!("bad dimension line {header:?}")))?;
        let mut rows = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::Format(format!("row {i}: bad value {tok:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != n {
                return Err(Error::Format(format!(
                    "row {i} has {} values, expected {n}",
                    row.len()
                )));
            }
            rows.push(row);
        }
        if rows.len() != n {
            return Err(Error::Format(format!(
                "expected {n} rows, found {}",
                rows.len()
            )));
        }
        Self::new(rows)
    }
}

/// Assignment of the binary decision variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryVector(Vec<bool>);

impl BinaryVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Rejects any entry outside `{0, 1}`.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .enumerate()
            .map(|(i, &b)| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidArgument(format!(
                    "bit {i} has value {other}, expected 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    /// Bit `i` is taken from bit `i` of `code`.
    pub fn from_code(n: usize, code: u64) -> Self {
        Self((0..n).map(|i| (code >> i) & 1 == 1).collect())
    }

    pub fn from_indices(n: usize, ones: &[usize]) -> Result<Self> {
        let mut bits = vec![false; n];
        for &i in ones {
            if i >= n {
                return Err(Error::InvalidArgument(format!(
                    "index {i} out of range for n = {n}"
                )));
            }
            bits[i] = true;
        }
        Ok(Self(bits))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.0.iter().map(|&b| b as u8).collect()
    }
}

impl fmt::Display for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BinaryVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Format(format!("bad bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// Linear fields `h` (the diagonal) and zero-diagonal couplings `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingDecomposition {
    pub h: Vec<f64>,
    /// Row-major `n × n`, zero on the diagonal.
    pub j: Vec<f64>,
}

impl IsingDecomposition {
    pub fn n(&self) -> usize {
        self.h.len()
    }

    #[inline]
    pub fn coupling(&self, i: usize, k: usize) -> f64 {
        self.j[i * self.h.len() + k]
    }

    pub fn max_abs_coupling(&self) -> f64 {
        self.j.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `diag(h) + J`.
    pub fn reconstruct(&self) -> Result<QuboMatrix> {
        let n = self.n();
        let mut flat = self.j.clone();
        for (i, &hi) in self.h.iter().enumerate() {
            flat[i * n + i] = hi;
        }
        QuboMatrix::from_flat(n, flat)
    }
}

fn check_len(q: &QuboMatrix, x: &BinaryVector) -> Result<()> {
    if x.len() != q.n() {
        return Err(Error::InvalidArgument(format!(
            "assignment has {} bits but the instance has {} variables",
            x.len(),
            q.n()
        )));
    }
    Ok(())
}

/// `xᵀ Q x`.
pub fn energy(q: &QuboMatrix, x: &BinaryVector) -> Result<f64> {
    check_len(q, x)?;
    let ones: Vec<usize> = x.ones().collect();
    let mut total = 0.0;
    for &i in &ones {
        let row = q.row(i);
        for &j in &ones {
            total += row[j];
        }
    }
    Ok(total)
}

pub fn decompose(q: &QuboMatrix) -> IsingDecomposition {
    let n = q.n();
    let h = (0..n).map(|i| q.get(i, i)).collect();
    let mut j = q.entries.clone();
    for i in 0..n {
        j[i * n + i] = 0.0;
    }
    IsingDecomposition { h, j }
}

/// Exact minimizer over all `2^n` assignments.
///
/// Assignments whose energies agree to within a relative `1e-9` of the
/// instance scale are treated as tied; among ties the one with the lowest
/// integer encoding (bit `i` = variable `i`) wins. The returned energy is
/// re-evaluated with [`energy`].
pub fn brute_force_solve(q: &QuboMatrix) -> Result<(BinaryVector, f64)> {
    let n = q.n();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(Error::SizeLimit {
            what: "brute-force QUBO instance",
            size: n,
            limit: BRUTE_FORCE_MAX_VARS,
        });
    }
    let prefix_bits = n.saturating_sub(12).min(8);
    let low_bits = n - prefix_bits;
    let chunks = 1u64 << prefix_bits;

    let best = (0..chunks)
        .into_par_iter()
        .map(|p| {
            let mut min = f64::INFINITY;
            gray_walk(q, p << low_bits, low_bits, |e, _| min = min.min(e));
            min
        })
        .reduce(|| f64::INFINITY, f64::min);

    let scale: f64 = q.entries.iter().map(|v| v.abs()).sum();
    let cutoff = best + 1e-9 * (1.0 + scale);
    let code = (0..chunks)
        .into_par_iter()
        .map(|p| {
            let mut lowest = u64::MAX;
            gray_walk(q, p << low_bits, low_bits, |e, c| {
                if e <= cutoff && c < lowest {
                    lowest = c;
                }
            });
            lowest
        })
        .min()
        .unwrap_or(0);

    let x = BinaryVector::from_code(n, code);
    let e = energy(q, &x)?;
    Ok((x, e))
}

/// Visits every assignment whose high bits equal those of `base` by
/// flipping one of the `low_bits` low bits at a time in Gray-code order,
/// reporting `(energy, code)` for each.
fn gray_walk(q: &QuboMatrix, base: u64, low_bits: usize, mut visit: impl FnMut(f64, u64)) {
    let n = q.n();
    let mut x: Vec<bool> = (0..n).map(|i| (base >> i) & 1 == 1).collect();
    // field[i] = Σ_{j≠i} Q_ij x_j
    let mut field: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && x[j])
                .map(|j| q.get(i, j))
                .sum()
        })
        .collect();
    let mut e: f64 = (0..n)
        .filter(|&i| x[i])
        .map(|i| q.get(i, i) + field[i])
        .sum();
    let mut code = base;
    visit(e, code);
    for step in 1u64..(1u64 << low_bits) {
        let i = step.trailing_zeros() as usize;
        let sign = if x[i] { -1.0 } else { 1.0 };
        e += sign * (q.get(i, i) + 2.0 * field[i]);
        x[i] = !x[i];
        code ^= 1 << i;
        let row = q.row(i);
        for (k, f) in field.iter_mut().enumerate() {
            if k != i {
                *f += sign * row[k];
            }
        }
        visit(e, code);
    }
}

/// Random symmetric instance: diagonal uniform in `[-1, 1]`; each
/// off-diagonal pair is nonzero with probability `density`, drawn uniform
/// in `[-1, 1]`. Draws are taken diagonal first, then the upper triangle
/// row by row.
pub fn random_instance(n: usize, density: f64, seed: u64) -> Result<QuboMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "random instance needs n >= 1".into(),
        ));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidArgument(format!(
            "density {density} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flat = vec![0.0; n * n];
    for i in 0..n {
        flat[i * n + i] = rng.gen_range(-1.0..=1.0);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < density {
                let mut v = 0.0;
                while v == 0.0 {
                    v = rng.gen_range(-1.0..=1.0);
                }
                flat[i * n + j] = v;
                flat[j * n + i] = v;
            }
        }
    }
    QuboMatrix::from_flat(n, flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn q(rows: &[&[f64]]) -> QuboMatrix {
        QuboMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn bits(b: &[u8]) -> BinaryVector {
        BinaryVector::from_bits(b).unwrap()
    }

    #[test]
    fn energy_examples() {
        let m = q(&[&[1.0, 2.0], &[2.0, 3.0]]);
        assert_eq!(energy(&m, &bits(&[0, 0])).unwrap(), 0.0);
        assert_eq!(energy(&m, &bits(&[1, 1])).unwrap(), 8.0);
        let d = q(&[&[-1.0, 0.0], &[0.0, -1.0]]);
        assert_eq!(energy(&d, &bits(&[1, 0])).unwrap(), -1.0);
    }

    #[test]
    fn energy_rejects_dimension_mismatch() {
        let m = QuboMatrix::identity(3).unwrap();
        assert!(matches!(
            energy(&m, &bits(&[1, 0])),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn asymmetric_input_is_symmetrized() {
        let m = q(&[&[0.0, 4.0], &[0.0, 0.0]]);
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(energy(&m, &bits(&[1, 1])).unwrap(), 4.0);
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(QuboMatrix::new(vec![vec![f64::NAN]]).is_err());
        assert!(QuboMatrix::new(vec![vec![1.0, 2.0]]).is_err());
        assert!(QuboMatrix::new(vec![]).is_err());
    }

    #[test]
    fn bits_outside_binary_rejected() {
        assert!(BinaryVector::from_bits(&[0, 2]).is_err());
        assert!("01x".parse::<BinaryVector>().is_err());
        assert_eq!("0110".parse::<BinaryVector>().unwrap(), bits(&[0, 1, 1, 0]));
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(&q(&[&[1.0, 2.0], &[2.0, 3.0]]));
        assert_eq!(d.h, vec![1.0, 3.0]);
        assert_eq!(d.j, vec![0.0, 2.0, 2.0, 0.0]);

        let d = decompose(&QuboMatrix::identity(3).unwrap());
        assert_eq!(d.h, vec![1.0; 3]);
        assert!(d.j.iter().all(|&v| v == 0.0));

        let d = decompose(&q(&[&[0.0, 5.0], &[5.0, 0.0]]));
        assert_eq!(d.h, vec![0.0, 0.0]);
        assert_eq!(d.j, vec![0.0, 5.0, 5.0, 0.0]);
    }

    #[test]
    fn brute_force_examples() {
        let (x, e) = brute_force_solve(&q(&[&[-1.0, 0.0], &[0.0, -1.0]])).unwrap();
        assert_eq!((x, e), (bits(&[1, 1]), -2.0));

        // (0,0)=0, (1,0)=-1, (0,1)=-1, (1,1)=-1-1+8=6: tie at -1, lower code wins.
        let (x, e) = brute_force_solve(&q(&[&[-1.0, 4.0], &[4.0, -1.0]])).unwrap();
        assert_eq!((x, e), (bits(&[1, 0]), -1.0));

        let (x, e) = brute_force_solve(&QuboMatrix::zeros(3).unwrap()).unwrap();
        assert_eq!((x, e), (bits(&[0, 0, 0]), 0.0));
    }

    #[test]
    fn brute_force_size_limit() {
        let big = QuboMatrix::zeros(25).unwrap();
        assert!(matches!(
            brute_force_solve(&big),
            Err(Error::SizeLimit { size: 25, .. })
        ));
    }

    #[test]
    fn brute_force_chunked_matches_plain_enumeration() {
        // n = 15 exercises the parallel prefix split.
        let m = random_instance(15, 0.4, 11).unwrap();
        let (x, e) = brute_force_solve(&m).unwrap();
        let mut best = (f64::INFINITY, 0u64);
        for code in 0..(1u64 << 15) {
            let v = energy(&m, &BinaryVector::from_code(15, code)).unwrap();
            if v < best.0 - 1e-12 {
                best = (v, code);
            }
        }
        assert_eq!(x, BinaryVector::from_code(15, best.1));
        assert!((e - best.0).abs() < 1e-12);
    }

    #[test]
    fn random_instance_density_extremes() {
        let sparse = random_instance(5, 0.0, 3).unwrap();
        assert!(decompose(&sparse).j.iter().all(|&v| v == 0.0));
        let dense = random_instance(5, 1.0, 3).unwrap();
        let nonzero = (0..5)
            .flat_map(|i| ((i + 1)..5).map(move |j| (i, j)))
            .filter(|&(i, j)| dense.get(i, j) != 0.0)
            .count();
        assert_eq!(nonzero, 10);
        assert_eq!(
            random_instance(5, 0.5, 9).unwrap(),
            random_instance(5, 0.5, 9).unwrap()
        );
        assert!(random_instance(0, 0.5, 9).is_err());
    }

    #[test]
    fn text_format_round_trip() {
        let m = random_instance(4, 0.7, 5).unwrap();
        let text = m.to_string();
        assert!(text.starts_with("4\n"));
        assert_eq!(text.parse::<QuboMatrix>().unwrap(), m);
        assert!("2\n1 2\n3".parse::<QuboMatrix>().is_err());
        assert!("x\n".parse::<QuboMatrix>().is_err());
    }

    proptest! {
        #[test]
        fn energy_agrees_with_ising_form(
            n in 1usize..8, seed in any::<u64>(), code in any::<u64>()
        ) {
            let m = random_instance(n, 0.6, seed).unwrap();
            let x = BinaryVector::from_code(n, code);
            let d = decompose(&m);
            let mut alt = 0.0;
            for i in 0..n {
                if x.get(i) {
                    alt += d.h[i];
                    for j in 0..n {
                        if j != i && x.get(j) {
                            alt += d.coupling(i, j);
                        }
                    }
                }
            }
            let e = energy(&m, &x).unwrap();
            prop_assert!((e - alt).abs() <= 1e-12 * e.abs().max(1.0));
            prop_assert_eq!(d.reconstruct().unwrap(), m);
        }

        #[test]
        fn brute_force_is_a_lower_bound(n in 1usize..9, seed in any::<u64>()) {
            let m = random_instance(n, 0.5, seed).unwrap();
            let (_, best) = brute_force_solve(&m).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
            for _ in 0..100 {
                let x = BinaryVector::from_code(n, rng.gen());
                prop_assert!(best <= energy(&m, &x).unwrap() + 1e-12);
            }
        }

        #[test]
        fn random_instances_are_symmetric(n in 1usize..10, d in 0.0f64..=1.0, seed in any::<u64>()) {
            let m = random_instance(n, d, seed).unwrap();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(m.get(i, j), m.get(j, i));
                }
            }
        }
    }
}
