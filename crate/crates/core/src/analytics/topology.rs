//! Interval-batched view of a graph's topology: the timeline cut at every
//! point where the vertex or edge set changes, so each interval holds one
//! static graph.

use std::collections::BTreeMap;

use crate::graph::{EdgeKey, TGraph, VertexId};
use crate::time::Interval;

/// Static-per-interval topology shared by every analytics execution path.
///
/// All paths must build identical instances for the same graph; the engine's
/// determinism then makes results identical bit for bit regardless of which
/// representation produced the topology.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalTopology {
    pub directed: bool,
    /// Consecutive intervals between topology change points, ascending.
    pub intervals: Vec<Interval>,
    /// All vertices, ascending; indices below refer to this list.
    pub verts: Vec<VertexId>,
    /// All edges, ascending, as index pairs into `verts`.
    pub edges: Vec<(u32, u32)>,
    /// Per interval, one bit per vertex.
    pub vertex_active: Vec<Vec<bool>>,
    /// Per interval, one bit per edge.
    pub edge_active: Vec<Vec<bool>>,
}

impl TemporalTopology {
    pub fn from_tgraph(t: &TGraph) -> Self {
        let cps = t.topology_change_points();
        let intervals: Vec<Interval> = cps
            .windows(2)
            .map(|w| Interval::new(w[0], w[1]).expect("change points ascend"))
            .collect();
        let verts = t.vertices().keys();
        let vidx: BTreeMap<VertexId, u32> = verts
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, i as u32))
            .collect();
        let ekeys: Vec<EdgeKey> = t.edges().keys();
        let edges: Vec<(u32, u32)> = ekeys
            .iter()
            .map(|k| (vidx[&k.src], vidx[&k.dst]))
            .collect();
        let vpres = crate::graph::presence_index(t.vertices());
        let epres = crate::graph::presence_index(t.edges());
        // Presence is constant inside each interval, so one probe suffices.
        let vertex_active = intervals
            .iter()
            .map(|iv| verts.iter().map(|v| vpres[v].contains(iv.start())).collect())
            .collect();
        let edge_active = intervals
            .iter()
            .map(|iv| {
                ekeys
                    .iter()
                    .map(|e| epres[e].contains(iv.start()))
                    .collect()
            })
            .collect();
        TemporalTopology {
            directed: t.directed(),
            intervals,
            verts,
            edges,
            vertex_active,
            edge_active,
        }
    }

    pub fn interval_count(&self) -> usize {
        self.intervals.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }

    /// Out-degree of every vertex in every interval. For undirected graphs
    /// this is the incident-edge count (a loop counts once).
    pub fn out_degrees(&self) -> Vec<Vec<i64>> {
        self.intervals
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let mut deg = vec![0i64; self.verts.len()];
                for (ei, (s, d)) in self.edges.iter().enumerate() {
                    if !self.edge_active[i][ei] {
                        continue;
                    }
                    deg[*s as usize] += 1;
                    if !self.directed && s != d {
                        deg[*d as usize] += 1;
                    }
                }
                deg
            })
            .collect()
    }

    /// Incoming neighbor list per vertex, sorted by sender index; each entry
    /// is `(sender, edge index)`. Undirected edges appear in both lists.
    pub fn in_neighbors(&self) -> Vec<Vec<(u32, u32)>> {
        let mut inn: Vec<Vec<(u32, u32)>> = vec![Vec::new(); self.verts.len()];
        for (ei, (s, d)) in self.edges.iter().enumerate() {
            inn[*d as usize].push((*s, ei as u32));
            if !self.directed && s != d {
                inn[*s as usize].push((*d, ei as u32));
            }
        }
        for list in &mut inn {
            list.sort_unstable();
        }
        inn
    }
}
