//! Temporal set operators over whole graphs.
//!
//! Vertices and edges combine per point: an entity is in the union when it
//! is in either input, in the intersection when in both, in the difference
//! when in the left input only. Attributes from both sides are reconciled by
//! `resolve`; the difference keeps left attributes only.

use crate::agg::{resolve, ResolveSpec};
use crate::error::GraphError;
use crate::graph::{
    constrain_edge_attrs, constrain_edges, constrain_vertex_attrs, presence_index, TGraph,
};
use crate::relation::{RelItem, TemporalRelation};
use crate::time::IntervalSet;

fn check_directedness(a: &TGraph, b: &TGraph) -> Result<(), GraphError> {
    if a.directed() != b.directed() {
        return Err(GraphError::DirectednessMismatch {
            left: a.directed(),
            right: b.directed(),
        });
    }
    Ok(())
}

fn combine_presence<K: RelItem>(
    left: &TemporalRelation<K, ()>,
    right: &TemporalRelation<K, ()>,
    f: impl Fn(&IntervalSet, &IntervalSet) -> IntervalSet,
) -> TemporalRelation<K, ()> {
    let l = presence_index(left);
    let r = presence_index(right);
    let mut keys: Vec<&K> = l.keys().chain(r.keys()).collect();
    keys.sort();
    keys.dedup();
    let empty = IntervalSet::empty();
    let mut tuples = Vec::new();
    for k in keys {
        let a = l.get(k).unwrap_or(&empty);
        let b = r.get(k).unwrap_or(&empty);
        for run in f(a, b).runs() {
            tuples.push((k.clone(), (), *run));
        }
    }
    // Interval-set runs are disjoint and non-adjacent per key.
    TemporalRelation::from_tuples(tuples).coalesce()
}

/// Temporal union. Attribute conflicts between the inputs are reconciled by
/// `fv`/`fe`; names without a spec merge with set semantics.
pub fn union(
    t1: &TGraph,
    t2: &TGraph,
    fv: &[ResolveSpec],
    fe: &[ResolveSpec],
) -> Result<TGraph, GraphError> {
    check_directedness(t1, t2)?;
    let tv = combine_presence(t1.vertices(), t2.vertices(), |a, b| a.union(b));
    let te = combine_presence(t1.edges(), t2.edges(), |a, b| a.union(b));
    let tav = resolve(fv, &t1.vertex_attrs().bag_union(t2.vertex_attrs()))?;
    let tae = resolve(fe, &t1.edge_attrs().bag_union(t2.edge_attrs()))?;
    Ok(TGraph::from_consistent_parts(t1.directed(), tv, te, tav, tae))
}

/// Temporal intersection: entities keep the points they hold in both inputs;
/// attributes from either side survive on the shared presence.
pub fn intersection(
    t1: &TGraph,
    t2: &TGraph,
    fv: &[ResolveSpec],
    fe: &[ResolveSpec],
) -> Result<TGraph, GraphError> {
    check_directedness(t1, t2)?;
    let tv = combine_presence(t1.vertices(), t2.vertices(), |a, b| a.intersect(b));
    let te = combine_presence(t1.edges(), t2.edges(), |a, b| a.intersect(b));
    let tav = constrain_vertex_attrs(
        &resolve(fv, &t1.vertex_attrs().bag_union(t2.vertex_attrs()))?,
        &tv,
    );
    let tae = constrain_edge_attrs(
        &resolve(fe, &t1.edge_attrs().bag_union(t2.edge_attrs()))?,
        &te,
    );
    Ok(TGraph::from_consistent_parts(t1.directed(), tv, te, tav, tae))
}

/// Temporal difference: points where an entity exists in `t1` but not `t2`.
/// Edges additionally require both endpoints to survive; left attributes are
/// trimmed to the surviving entities.
pub fn difference(t1: &TGraph, t2: &TGraph) -> Result<TGraph, GraphError> {
    check_directedness(t1, t2)?;
    let tv = combine_presence(t1.vertices(), t2.vertices(), |a, b| a.subtract(b));
    let te_surviving = combine_presence(t1.edges(), t2.edges(), |a, b| a.subtract(b));
    let te = constrain_edges(&te_surviving, &tv);
    let tav = constrain_vertex_attrs(t1.vertex_attrs(), &tv);
    let tae = constrain_edge_attrs(t1.edge_attrs(), &te);
    Ok(TGraph::from_consistent_parts(t1.directed(), tv, te, tav, tae))
}

/// Shared helper for tests: per-point entity sets.
#[cfg(test)]
fn point_entities<K: RelItem>(
    r: &TemporalRelation<K, ()>,
    lo: i64,
    hi: i64,
) -> std::collections::BTreeMap<i64, Vec<K>> {
    let mut out = std::collections::BTreeMap::new();
    for c in lo..hi {
        let ks: Vec<K> = r
            .at(crate::time::TimePoint(c))
            .map(|(k, _)| k.clone())
            .collect();
        if !ks.is_empty() {
            out.insert(c, ks);
        }
    }
    out
}
