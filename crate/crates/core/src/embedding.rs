//! Placement of QUBO variables as weighted atoms in the plane.
//!
//! Variables become vertices of a unit-disk graph. A pair of variables with
//! a strong positive coupling should not both be selected, which is what a
//! blockade edge enforces, so such pairs are laid out closer than the
//! blockade radius and every other pair farther away. The layout is an
//! approximation; [`EmbeddingReport`] measures how well it worked.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::qubo::{decompose, IsingDecomposition, QuboMatrix};
use crate::{Error, Result};

/// Layout target for a conflicting pair, in units of the blockade radius.
pub const CONFLICT_DISTANCE: f64 = 0.8;
/// Layout target for every other pair, in units of the blockade radius.
pub const FREE_DISTANCE: f64 = 1.5;
pub const MAX_LAYOUT_ITERATIONS: usize = 500;
pub const LAYOUT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    /// Index of the QUBO variable this vertex stands for.
    pub id: usize,
    /// Micrometers.
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

impl Vertex {
    #[inline]
    pub fn distance(&self, other: &Vertex) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Unit-disk edge rule: inclusive at exactly `r`.
#[inline]
pub fn within_blockade(a: &Vertex, b: &Vertex, r: f64) -> bool {
    a.distance(b) <= r
}

/// Weighted vertices in the plane; edges are every pair within the
/// blockade radius and are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitDiskGraph {
    vertices: Vec<Vertex>,
    blockade_radius: f64,
}

impl UnitDiskGraph {
    pub fn new(vertices: Vec<Vertex>, blockade_radius: f64) -> Result<Self> {
        if !(blockade_radius.is_finite() && blockade_radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "blockade radius must be positive, got {blockade_radius}"
            )));
        }
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !seen.insert(v.id) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate vertex id {}",
                    v.id
                )));
            }
            if !(v.x.is_finite() && v.y.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "vertex {} has non-finite coordinates",
                    v.id
                )));
            }
            if !(v.weight.is_finite() && v.weight > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "vertex {} has non-positive weight {}",
                    v.id, v.weight
                )));
            }
        }
        Ok(Self {
            vertices,
            blockade_radius,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn blockade_radius(&self) -> f64 {
        self.blockade_radius
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, id: usize) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    /// Unordered id pairs `(a, b)`, `a < b`, within the blockade radius.
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        unit_disk_edges(&self.vertices, self.blockade_radius)
    }
}

pub(crate) fn unit_disk_edges(vertices: &[Vertex], r: f64) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            if within_blockade(a, b, r) {
                out.insert((a.id.min(b.id), a.id.max(b.id)));
            }
        }
    }
    out
}

/// Same as [`edges`](UnitDiskGraph::edges) but as positions in `vertices`.
pub(crate) fn local_edges(vertices: &[Vertex], r: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..vertices.len() {
        for j in (i + 1)..vertices.len() {
            if within_blockade(&vertices[i], &vertices[j], r) {
                out.push((i, j));
            }
        }
    }
    out
}

impl fmt::Display for UnitDiskGraph {
    /// `n r` on the first line, then one `id x y weight` line per vertex.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.vertices.len(), self.blockade_radius)?;
        for v in &self.vertices {
            writeln!(f, "{} {} {} {}", v.id, v.x, v.y, v.weight)?;
        }
        Ok(())
    }
}

impl FromStr for UnitDiskGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty graph file".into()))?;
        let mut parts = header.split_whitespace();
        let (n, r) = match (parts.next(), parts.next(), parts.next()) {
            (Some(n), Some(r), None) => (
                n.parse::<usize>()
                    .map_err(|_| Error::Format(format!("bad vertex count {n:?}")))?,
                r.parse::<f64>()
                    .map_err(|_| Error::Format(format!("bad radius {r:?}")))?,
            ),
            _ => return Err(Error::Format(format!("bad header line {header:?}"))),
        };
        let vertices = lines
            .map(|line| {
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 4 {
                    return Err(Error::Format(format!("bad vertex line {line:?}")));
                }
                let num = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Format(format!("bad number {s:?} in {line:?}")))
                };
                Ok(Vertex {
                    id: f[0]
                        .parse()
                        .map_err(|_| Error::Format(format!("bad id in {line:?}")))?,
                    x: num(f[1])?,
                    y: num(f[2])?,
                    weight: num(f[3])?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if vertices.len() != n {
            return Err(Error::Format(format!(
                "header announces {n} vertices, found {}",
                vertices.len()
            )));
        }
        Self::new(vertices, r)
    }
}

/// How faithfully the geometric edges reproduce the intended conflicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingReport {
    pub intended_edges: usize,
    pub realized_edges: usize,
    pub spurious_edges: usize,
    /// `realized / intended`, or 1 when nothing was intended.
    pub edge_fidelity: f64,
}

/// Pairs `(i, j)`, `i < j`, with coupling `J_ij > theta`.
pub fn intended_conflict_graph(dec: &IsingDecomposition, theta: f64) -> BTreeSet<(usize, usize)> {
    let n = dec.n();
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if dec.coupling(i, j) > theta {
                out.insert((i, j));
            }
        }
    }
    out
}

/// `0.1 · max|J|`, or 1 for an instance without couplings.
pub fn default_theta(dec: &IsingDecomposition) -> f64 {
    let m = dec.max_abs_coupling();
    if m > 0.0 {
        0.1 * m
    } else {
        1.0
    }
}

/// `w_i = max(h) − h_i + ε` with `ε` one percent of the spread of `h`.
pub fn vertex_weights(h: &[f64]) -> Vec<f64> {
    let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = h.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = max - min;
    let eps = 0.01 * if spread > 0.0 { spread } else { 1.0 };
    h.iter().map(|&hi| max - hi + eps).collect()
}

pub fn embed(
    q: &QuboMatrix,
    r: f64,
    theta: f64,
    seed: u64,
) -> Result<(UnitDiskGraph, EmbeddingReport)> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "blockade radius must be positive, got {r}"
        )));
    }
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "conflict threshold must be positive, got {theta}"
        )));
    }
    let dec = decompose(q);
    let n = dec.n();
    let conflicts = intended_conflict_graph(&dec, theta);
    let weights = vertex_weights(&dec.h);

    let mut targets = vec![FREE_DISTANCE * r; n * n];
    for &(i, j) in &conflicts {
        targets[i * n + j] = CONFLICT_DISTANCE * r;
        targets[j * n + i] = CONFLICT_DISTANCE * r;
    }
    let positions = stress_layout(n, &targets, r, seed);

    let vertices: Vec<Vertex> = positions
        .iter()
        .zip(&weights)
        .enumerate()
        .map(|(id, (&(x, y), &weight))| Vertex { id, x, y, weight })
        .collect();
    let graph = UnitDiskGraph::new(vertices, r)?;

    let realized = graph.edges();
    let realized_edges = conflicts.intersection(&realized).count();
    let spurious_edges = realized.difference(&conflicts).count();
    let report = EmbeddingReport {
        intended_edges: conflicts.len(),
        realized_edges,
        spurious_edges,
        edge_fidelity: if conflicts.is_empty() {
            1.0
        } else {
            realized_edges as f64 / conflicts.len() as f64
        },
    };
    Ok((graph, report))
}

/// Weighted stress of a layout, with weights `d_ij⁻²`.
fn stress(pos: &[(f64, f64)], targets: &[f64]) -> f64 {
    let n = pos.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = targets[i * n + j];
            let dist = (pos[i].0 - pos[j].0).hypot(pos[i].1 - pos[j].1);
            s += (dist - d).powi(2) / (d * d);
        }
    }
    s
}

/// Localized stress majorization: each vertex in turn moves to the
/// weighted average of where its pairwise targets would place it. The
/// result is translated so that the lower-left corner of its bounding box
/// sits at the origin.
fn stress_layout(n: usize, targets: &[f64], r: f64, seed: u64) -> Vec<(f64, f64)> {
    if n == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = FREE_DISTANCE * r * (n as f64).sqrt();
    let mut pos: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0.0..side), rng.gen_range(0.0..side)))
        .collect();

    let mut prev = stress(&pos, targets);
    for _ in 0..MAX_LAYOUT_ITERATIONS {
        if prev == 0.0 {
            break;
        }
        for i in 0..n {
            let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = targets[i * n + j];
                let w = 1.0 / (d * d);
                let (dx, dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
                let dist = dx.hypot(dy);
                let (mut tx, mut ty) = pos[j];
                if dist > 0.0 {
                    tx += d * dx / dist;
                    ty += d * dy / dist;
                }
                sx += w * tx;
                sy += w * ty;
                sw += w;
            }
            pos[i] = (sx / sw, sy / sw);
        }
        let current = stress(&pos, targets);
        let converged = (prev - current).abs() <= LAYOUT_TOLERANCE * prev;
        prev = current;
        if converged {
            break;
        }
    }

    let min_x = pos.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let min_y = pos.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    pos.iter().map(|&(x, y)| (x - min_x, y - min_y)).collect()
}
