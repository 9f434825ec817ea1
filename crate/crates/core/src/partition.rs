//! Square-grid decomposition of a unit-disk graph.
//!
//! With box side `s > 2r`, an edge can only join vertices in the same or
//! neighbouring boxes, so boxes that are not neighbours never interact.

use std::collections::BTreeMap;

use crate::embedding::{local_edges, UnitDiskGraph, Vertex};
use crate::{Error, Result};

/// Default box side in units of the blockade radius.
pub const DEFAULT_BOX_FACTOR: f64 = 2.5;
const MAX_SPLIT_DEPTH: usize = 20;

pub type BoxIndex = (i64, i64);

#[derive(Debug, Clone, PartialEq)]
pub struct GridPartition {
    pub box_side: f64,
    pub origin: (f64, f64),
    /// Vertex id to box index.
    pub assignment: BTreeMap<usize, BoxIndex>,
}

impl GridPartition {
    pub fn box_of(&self, x: f64, y: f64) -> BoxIndex {
        (
            ((x - self.origin.0) / self.box_side).floor() as i64,
            ((y - self.origin.1) / self.box_side).floor() as i64,
        )
    }

    /// One `box_i box_j vertex_id` line per vertex, ordered by vertex id.
    pub fn dump(&self) -> String {
        self.assignment
            .iter()
            .map(|(id, (bi, bj))| format!("{bi} {bj} {id}\n"))
            .collect()
    }
}

/// Vertices of one grid box, or of one quadrant of an oversized box.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    pub box_index: BoxIndex,
    /// Quadrants taken while splitting an oversized box (0..4 each,
    /// `qx + 2·qy`); empty for an unsplit box.
    pub quadrant_path: Vec<u8>,
    pub vertices: Vec<Vertex>,
    pub blockade_radius: f64,
}

impl Subgraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as pairs of positions in `vertices`.
    pub fn local_edges(&self) -> Vec<(usize, usize)> {
        local_edges(&self.vertices, self.blockade_radius)
    }

    /// Stable identifier used to derive per-box seeds.
    pub fn stream_id(&self) -> u64 {
        let mut h = crate::mix_seed(self.box_index.0 as u64, self.box_index.1 as u64);
        for &q in &self.quadrant_path {
            h = crate::mix_seed(h, q as u64 + 1);
        }
        h
    }
}

/// Assigns each vertex to the box `floor((p − origin) / s)`, with the
/// origin at the componentwise minimum of the coordinates.
pub fn partition(g: &UnitDiskGraph, s: f64) -> Result<GridPartition> {
    let r = g.blockade_radius();
    if !(s.is_finite() && s > 2.0 * r) {
        return Err(Error::InvalidArgument(format!(
            "box side {s} must exceed twice the blockade radius ({}) so that \
             vertices in non-adjacent boxes cannot interact",
            2.0 * r
        )));
    }
    let origin = g
        .vertices()
        .iter()
        .fold((f64::INFINITY, f64::INFINITY), |(mx, my), v| {
            (mx.min(v.x), my.min(v.y))
        });
    let origin = if g.is_empty() { (0.0, 0.0) } else { origin };
    let mut p = GridPartition {
        box_side: s,
        origin,
        assignment: BTreeMap::new(),
    };
    for v in g.vertices() {
        let b = p.box_of(v.x, v.y);
        p.assignment.insert(v.id, b);
    }
    Ok(p)
}

/// One subgraph per non-empty box, sorted by box index.
pub fn extract_subgraphs(g: &UnitDiskGraph, p: &GridPartition) -> Result<Vec<Subgraph>> {
    let mut boxes: BTreeMap<BoxIndex, Vec<Vertex>> = BTreeMap::new();
    for v in g.vertices() {
        let b = *p.assignment.get(&v.id).ok_or_else(|| {
            Error::InvalidArgument(format!("vertex {} is not in the partition", v.id))
        })?;
        boxes.entry(b).or_default().push(*v);
    }
    Ok(boxes
        .into_iter()
        .map(|(box_index, vertices)| Subgraph {
            box_index,
            quadrant_path: Vec::new(),
            vertices,
            blockade_radius: g.blockade_radius(),
        })
        .collect())
}

/// Like [`extract_subgraphs`], but any box holding more than `cap`
/// vertices is recursively cut into four quadrants until every part fits.
/// Quadrants of one box can interact with each other, so the merge step
/// remains responsible for global independence.
pub fn extract_capped_subgraphs(
    g: &UnitDiskGraph,
    p: &GridPartition,
    cap: usize,
) -> Result<Vec<Subgraph>> {
    let mut out = Vec::new();
    for sub in extract_subgraphs(g, p)? {
        let corner = (
            p.origin.0 + sub.box_index.0 as f64 * p.box_side,
            p.origin.1 + sub.box_index.1 as f64 * p.box_side,
        );
        split_into(sub, corner, p.box_side, cap, 0, &mut out);
    }
    Ok(out)
}

fn split_into(
    sub: Subgraph,
    corner: (f64, f64),
    side: f64,
    cap: usize,
    depth: usize,
    out: &mut Vec<Subgraph>,
) {
    if sub.len() <= cap || depth >= MAX_SPLIT_DEPTH {
        out.push(sub);
        return;
    }
    let half = 0.5 * side;
    let mut parts: [Vec<Vertex>; 4] = Default::default();
    for v in &sub.vertices {
        let qx = (((v.x - corner.0) / half).floor() as i64).clamp(0, 1) as usize;
        let qy = (((v.y - corner.1) / half).floor() as i64).clamp(0, 1) as usize;
        parts[qx + 2 * qy].push(*v);
    }
    for (quad, vertices) in parts.into_iter().enumerate() {
        if vertices.is_empty() {
            continue;
        }
        let mut quadrant_path = sub.quadrant_path.clone();
        quadrant_path.push(quad as u8);
        let child_corner = (
            corner.0 + (quad % 2) as f64 * half,
            corner.1 + (quad / 2) as f64 * half,
        );
        let child = Subgraph {
            box_index: sub.box_index,
            quadrant_path,
            vertices,
            blockade_radius: sub.blockade_radius,
        };
        split_into(child, child_corner, half, cap, depth + 1, out);
    }
}
