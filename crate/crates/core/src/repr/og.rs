//! Single-structure representation: one combined graph listing every entity
//! ever present, each carrying a presence bitmap over the topology interval
//! grid. Holds topology only; attributes are dropped at build time, so the
//! round trip back to relations reproduces the source topology exactly and
//! nothing else.

use std::collections::BTreeMap;

use crate::analytics::TemporalTopology;
use crate::error::GraphError;
use crate::graph::{EdgeKey, TGraph, VertexId};
use crate::relation::TemporalRelation;
use crate::time::{Interval, IntervalSet};

use super::bits::{bits_to_presence, presence_to_bits, PresenceBits};

#[derive(Debug, Clone, PartialEq)]
pub struct OgRepr {
    directed: bool,
    intervals: Vec<Interval>,
    verts: Vec<VertexId>,
    edges: Vec<EdgeKey>,
    vbits: Vec<PresenceBits>,
    ebits: Vec<PresenceBits>,
}

impl OgRepr {
    pub fn build(t: &TGraph) -> Self {
        let intervals: Vec<Interval> = t
            .topology_change_points()
            .windows(2)
            .map(|w| Interval::new(w[0], w[1]).expect("change points ascend"))
            .collect();
        let verts = t.vertices().keys();
        let edges = t.edges().keys();
        let vpres = crate::graph::presence_index(t.vertices());
        let epres = crate::graph::presence_index(t.edges());
        let vbits = verts
            .iter()
            .map(|v| presence_to_bits(&vpres[v], &intervals))
            .collect();
        let ebits = edges
            .iter()
            .map(|e| presence_to_bits(&epres[e], &intervals))
            .collect();
        OgRepr {
            directed: t.directed(),
            intervals,
            verts,
            edges,
            vbits,
            ebits,
        }
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn interval_count(&self) -> usize {
        self.intervals.len()
    }

    /// Reconstructs the presence relations from the bitmaps. Exact on
    /// topology: the grid sits at the topology change points, so every
    /// original period is a run of whole grid intervals.
    pub fn to_tgraph(&self) -> TGraph {
        TGraph::from_consistent_parts(
            self.directed,
            presence_to_relation(&self.vertex_presence()),
            presence_to_relation(&self.edge_presence()),
            TemporalRelation::new(),
            TemporalRelation::new(),
        )
    }

    /// Per-vertex presence recovered from the bitmaps.
    pub fn vertex_presence(&self) -> BTreeMap<VertexId, IntervalSet> {
        self.verts
            .iter()
            .zip(&self.vbits)
            .map(|(v, bits)| (*v, bits_to_presence(bits, &self.intervals)))
            .collect()
    }

    /// Per-edge presence recovered from the bitmaps.
    pub fn edge_presence(&self) -> BTreeMap<EdgeKey, IntervalSet> {
        self.edges
            .iter()
            .zip(&self.ebits)
            .map(|(e, bits)| (*e, bits_to_presence(bits, &self.intervals)))
            .collect()
    }

    /// Interval-batched topology straight from the bitmaps; identical to
    /// what the relation form derives for the same graph.
    pub fn to_topology(&self) -> TemporalTopology {
        let vidx: BTreeMap<VertexId, u32> = self
            .verts
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, i as u32))
            .collect();
        TemporalTopology {
            directed: self.directed,
            intervals: self.intervals.clone(),
            verts: self.verts.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| (vidx[&e.src], vidx[&e.dst]))
                .collect(),
            vertex_active: (0..self.intervals.len())
                .map(|i| self.vbits.iter().map(|b| b[i]).collect())
                .collect(),
            edge_active: (0..self.intervals.len())
                .map(|i| self.ebits.iter().map(|b| b[i]).collect())
                .collect(),
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

    /// Window zoom with presence quantified from the bitmaps. Change-count
    /// windows count topology changes, the only ones this form stores.
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

    /// Set operations as interval algebra on the presence bitmaps. Always
    /// applicable here: this form holds no attributes, so no value merging
    /// can arise.
    pub fn merge(&self, other: &OgRepr, how: SetOpKind) -> Result<OgRepr, GraphError> {
        if self.directed != other.directed {
            return Err(GraphError::DirectednessMismatch {
                left: self.directed,
                right: other.directed,
            });
        }
        let tv_pres = combine_maps(&self.vertex_presence(), &other.vertex_presence(), how);
        let mut te_pres = combine_maps(&self.edge_presence(), &other.edge_presence(), how);
        if matches!(how, SetOpKind::Difference) {
            // Surviving edges still need both endpoints.
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
        Ok(OgRepr::build(&source))
    }
}

/// Which set operation [`OgRepr::merge`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOpKind {
    Union,
    Intersection,
    Difference,
}

pub(crate) fn combine_maps<K: crate::relation::RelItem>(
    left: &BTreeMap<K, IntervalSet>,
    right: &BTreeMap<K, IntervalSet>,
    how: SetOpKind,
) -> BTreeMap<K, IntervalSet> {
    let mut out: BTreeMap<K, IntervalSet> = BTreeMap::new();
    let empty = IntervalSet::empty();
    let keys: std::collections::BTreeSet<&K> = left.keys().chain(right.keys()).collect();
    for k in keys {
        let l = left.get(k).unwrap_or(&empty);
        let r = right.get(k).unwrap_or(&empty);
        let merged = match how {
            SetOpKind::Union => l.union(r),
            SetOpKind::Intersection => l.intersect(r),
            SetOpKind::Difference => l.subtract(r),
        };
        if !merged.is_empty() {
            out.insert(k.clone(), merged);
        }
    }
    out
}

pub(crate) fn presence_to_relation<K: crate::relation::RelItem>(
    pres: &BTreeMap<K, IntervalSet>,
) -> crate::relation::TemporalRelation<K, ()> {
    let mut rows = Vec::new();
    for (k, set) in pres {
        for run in set.runs() {
            rows.push((k.clone(), (), *run));
        }
    }
    crate::relation::TemporalRelation::from_tuples(rows).coalesce()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{coauthors, coauthors_alt};
    use crate::ops::{Quantifier, WindowKind};

    fn iv(s: i64, e: i64) -> Interval {
        Interval::from_raw(s, e).unwrap()
    }

    #[test]
    fn bitmaps_follow_the_topology_grid() {
        let g = coauthors();
        let og = OgRepr::build(&g);
        assert_eq!(og.interval_count(), 5);
        let vpres = og.vertex_presence();
        assert_eq!(vpres[&VertexId(2)].runs(), &[iv(1, 11)]);
        let epres = og.edge_presence();
        assert_eq!(
            epres[&EdgeKey::undirected(VertexId(1), VertexId(2))].runs(),
            &[iv(1, 5)]
        );
    }

    #[test]
    fn round_trip_is_the_attr_stripped_source() {
        let g = coauthors();
        let og = OgRepr::build(&g);
        assert_eq!(og.to_tgraph(), g.strip_attrs());
    }

    #[test]
    fn topology_from_bits_equals_topology_from_relations() {
        let g = coauthors();
        let og = OgRepr::build(&g);
        assert_eq!(og.to_topology(), TemporalTopology::from_tgraph(&g));
    }

    #[test]
    fn native_components_match_relation_components() {
        let g = coauthors();
        let og = OgRepr::build(&g);
        let native = og.connected_components("comp").unwrap();
        let direct =
            crate::analytics::connected_components(&g.strip_attrs(), "comp").unwrap();
        assert_eq!(native, direct);
    }

    #[test]
    fn native_windows_match_relation_windows() {
        let g = coauthors();
        let og = OgRepr::build(&g);
        let native = og
            .node_by_window(
                WindowKind::Units(3),
                Quantifier::All,
                Quantifier::Exists,
                &[],
                &[],
            )
            .unwrap();
        let direct = g
            .strip_attrs()
            .node_by_window(
                WindowKind::Units(3),
                Quantifier::All,
                Quantifier::Exists,
                &[],
                &[],
            )
            .unwrap();
        assert_eq!(native, direct);
    }

    #[test]
    fn bitmap_set_ops_match_relation_set_ops() {
        let a = coauthors().strip_attrs();
        let b = coauthors_alt().strip_attrs();
        let oa = OgRepr::build(&a);
        let ob = OgRepr::build(&b);
        for how in [SetOpKind::Union, SetOpKind::Intersection, SetOpKind::Difference] {
            let native = oa.merge(&ob, how).unwrap().to_tgraph();
            let direct = match how {
                SetOpKind::Union => a.union(&b, &[], &[]).unwrap(),
                SetOpKind::Intersection => a.intersection(&b, &[], &[]).unwrap(),
                SetOpKind::Difference => a.difference(&b).unwrap(),
            };
            assert_eq!(native, direct, "{how:?}");
        }
    }

    #[test]
    fn merge_on_attr_bearing_sources_uses_their_topology() {
        // Attributes were already dropped at build, so merging is the same
        // as merging the stripped graphs.
        let g = coauthors();
        let og = OgRepr::build(&g);
        let merged = og.merge(&og, SetOpKind::Union).unwrap().to_tgraph();
        assert_eq!(merged, g.strip_attrs());
    }
}
