//! Partitioned-history representation: the topology interval grid is cut
//! into fixed-size runs, and each run stores only the entities alive inside
//! it, with bitmaps local to the run. Like the single-structure form it
//! holds topology only; attributes are dropped at build time.

use std::collections::{BTreeMap, BTreeSet};

use crate::analytics::TemporalTopology;
use crate::error::GraphError;
use crate::graph::{EdgeKey, TGraph, VertexId};
use crate::relation::TemporalRelation;
use crate::time::{Interval, IntervalSet};

use super::bits::{bits_to_presence, presence_to_bits, PresenceBits};
use super::og::{combine_maps, presence_to_relation, SetOpKind};

pub const DEFAULT_GROUP_SIZE: usize = 8;

/// One run of consecutive grid intervals with its local entities.
#[derive(Debug, Clone, PartialEq)]
pub struct HgGroup {
    /// Index of the run's first interval in the full grid.
    pub start: usize,
    pub intervals: Vec<Interval>,
    pub verts: Vec<VertexId>,
    pub edges: Vec<EdgeKey>,
    pub vbits: Vec<PresenceBits>,
    pub ebits: Vec<PresenceBits>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HgRepr {
    directed: bool,
    group_size: usize,
    intervals: Vec<Interval>,
    groups: Vec<HgGroup>,
}

impl HgRepr {
    pub fn build(t: &TGraph) -> Self {
        Self::build_grouped(t, DEFAULT_GROUP_SIZE)
    }

    pub fn build_grouped(t: &TGraph, group_size: usize) -> Self {
        let group_size = group_size.max(1);
        let intervals: Vec<Interval> = t
            .topology_change_points()
            .windows(2)
            .map(|w| Interval::new(w[0], w[1]).expect("change points ascend"))
            .collect();
        let vpres = crate::graph::presence_index(t.vertices());
        let epres = crate::graph::presence_index(t.edges());
        let mut groups = Vec::new();
        let mut start = 0;
        while start < intervals.len() {
            let run = &intervals[start..(start + group_size).min(intervals.len())];
            let span =
                Interval::new(run[0].start(), run[run.len() - 1].end()).expect("grid ascends");
            // Locality: only entities alive inside this run are stored here.
            let verts: Vec<VertexId> = vpres
                .iter()
                .filter(|(_, p)| !p.clip(&span).is_empty())
                .map(|(v, _)| *v)
                .collect();
            let edges: Vec<EdgeKey> = epres
                .iter()
                .filter(|(_, p)| !p.clip(&span).is_empty())
                .map(|(e, _)| *e)
                .collect();
            let vbits = verts
                .iter()
                .map(|v| presence_to_bits(&vpres[v], run))
                .collect();
            let ebits = edges
                .iter()
                .map(|e| presence_to_bits(&epres[e], run))
                .collect();
            groups.push(HgGroup {
                start,
                intervals: run.to_vec(),
                verts,
                edges,
                vbits,
                ebits,
            });
            start += group_size;
        }
        HgRepr {
            directed: t.directed(),
            group_size,
            intervals,
            groups,
        }
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn groups(&self) -> &[HgGroup] {
        &self.groups
    }

    pub fn interval_count(&self) -> usize {
        self.intervals.len()
    }

    /// Reconstructs the presence relations by stitching the groups' local
    /// runs back together. Exact on topology.
    pub fn to_tgraph(&self) -> TGraph {
        TGraph::from_consistent_parts(
            self.directed,
            presence_to_relation(&self.vertex_presence()),
            presence_to_relation(&self.edge_presence()),
            TemporalRelation::new(),
            TemporalRelation::new(),
        )
    }

    /// Per-vertex presence stitched from the groups' local bitmaps.
    pub fn vertex_presence(&self) -> BTreeMap<VertexId, IntervalSet> {
        let mut out: BTreeMap<VertexId, IntervalSet> = BTreeMap::new();
        for g in &self.groups {
            for (v, bits) in g.verts.iter().zip(&g.vbits) {
                let local = bits_to_presence(bits, &g.intervals);
                let entry = out.entry(*v).or_insert_with(IntervalSet::empty);
                *entry = entry.union(&local);
            }
        }
        out
    }

    /// Per-edge presence stitched from the groups' local bitmaps.
    pub fn edge_presence(&self) -> BTreeMap<EdgeKey, IntervalSet> {
        let mut out: BTreeMap<EdgeKey, IntervalSet> = BTreeMap::new();
        for g in &self.groups {
            for (e, bits) in g.edges.iter().zip(&g.ebits) {
                let local = bits_to_presence(bits, &g.intervals);
                let entry = out.entry(*e).or_insert_with(IntervalSet::empty);
                *entry = entry.union(&local);
            }
        }
        out
    }

    /// Global interval-batched topology rebuilt from the per-group bitmaps;
    /// identical to the one the single-structure form derives.
    pub fn to_topology(&self) -> TemporalTopology {
        let vset: BTreeSet<VertexId> =
            self.groups.iter().flat_map(|g| g.verts.iter().copied()).collect();
        let eset: BTreeSet<EdgeKey> =
            self.groups.iter().flat_map(|g| g.edges.iter().copied()).collect();
        let verts: Vec<VertexId> = vset.into_iter().collect();
        let edges: Vec<EdgeKey> = eset.into_iter().collect();
        let vidx: BTreeMap<VertexId, u32> = verts
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, i as u32))
            .collect();
        let eidx: BTreeMap<EdgeKey, u32> = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (*e, i as u32))
            .collect();
        let mut vertex_active = vec![vec![false; verts.len()]; self.intervals.len()];
        let mut edge_active = vec![vec![false; edges.len()]; self.intervals.len()];
        for g in &self.groups {
            for (v, bits) in g.verts.iter().zip(&g.vbits) {
                for (local, active) in bits.iter().enumerate() {
                    if *active {
                        vertex_active[g.start + local][vidx[v] as usize] = true;
                    }
                }
            }
            for (e, bits) in g.edges.iter().zip(&g.ebits) {
                for (local, active) in bits.iter().enumerate() {
                    if *active {
                        edge_active[g.start + local][eidx[e] as usize] = true;
                    }
                }
            }
        }
        TemporalTopology {
            directed: self.directed,
            intervals: self.intervals.clone(),
            verts,
            edges: edges.iter().map(|e| (vidx[&e.src], vidx[&e.dst])).collect(),
            vertex_active,
            edge_active,
        }
    }

    pub fn connected_components(&self, pname: &str) -> Result<TGraph, GraphError> {
        let topo = self.to_topology();
        crate::analytics::connected_components_on(&self.to_tgraph(), &topo, pname)
    }

    pub fn pagerank(
        &self,
        pname: &str,
        damping: f64,
        tolerance: f64,
        supersteps: usize,
    ) -> Result<TGraph, GraphError> {
        let topo = self.to_topology();
        crate::analytics::pagerank_on(
            &self.to_tgraph(),
            &topo,
            pname,
            damping,
            tolerance,
            supersteps,
        )
    }

    /// Window zoom with presence quantified from the grouped bitmaps.
    pub fn node_by_window(
        &self,
        kind: crate::ops::WindowKind,
        qv: crate::ops::Quantifier,
        qe: crate::ops::Quantifier,
        fv: &[crate::agg::ResolveSpec],
        fe: &[crate::agg::ResolveSpec],
    ) -> Result<TGraph, GraphError> {
        let windows = crate::ops::windows_for(&self.to_tgraph(), kind)?;
        let no_vattrs = TemporalRelation::new();
        let no_eattrs = TemporalRelation::new();
        crate::ops::node_by_window_from_presence(
            self.directed,
            &self.vertex_presence(),
            &no_vattrs,
            &self.edge_presence(),
            &no_eattrs,
            &windows,
            qv,
            qe,
            fv,
            fe,
        )
    }

    /// Set operations as interval algebra on the stitched presence runs.
    pub fn merge(&self, other: &HgRepr, how: SetOpKind) -> Result<HgRepr, GraphError> {
        if self.directed != other.directed {
            return Err(GraphError::DirectednessMismatch {
                left: self.directed,
                right: other.directed,
            });
        }
        let tv_pres = combine_maps(&self.vertex_presence(), &other.vertex_presence(), how);
        let mut te_pres = combine_maps(&self.edge_presence(), &other.edge_presence(), how);
        if matches!(how, SetOpKind::Difference) {
            for (e, pres) in te_pres.iter_mut() {
                let empty = IntervalSet::empty();
                let s = tv_pres.get(&e.src).unwrap_or(&empty);
                let d = tv_pres.get(&e.dst).unwrap_or(&empty);
                *pres = pres.intersect(s).intersect(d);
            }
        }
        let source = TGraph::from_consistent_parts(
            self.directed,
            presence_to_relation(&tv_pres),
            presence_to_relation(&te_pres),
            TemporalRelation::new(),
            TemporalRelation::new(),
        );
        Ok(HgRepr::build_grouped(&source, self.group_size))
    }
}
