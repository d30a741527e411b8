//! The relational operator algebra over temporal graphs.
//!
//! Every operator consumes and produces whole [`TGraph`]s and obeys point
//! semantics: the snapshot of the output at any time point equals the
//! corresponding nontemporal operation applied to the input snapshot.
//! Predicates and map functions that reference tuple periods switch the
//! operator to period-extended evaluation, where the period of the coalesced
//! input tuple is visible as data.

mod aggregate;
mod edge_create;
mod map;
mod node_create;
mod set_ops;
mod slice;
mod subgraph;

pub use aggregate::{aggregate, AggDirection, AggParams};
pub use edge_create::{edge_create, EdgeQuery};
pub use node_create::{
    node_by_attrs, node_by_window, skolem_id, windows_for, GroupAttr, Quantifier, WindowKind,
};
pub(crate) use aggregate::order_insensitive;
pub(crate) use node_create::node_by_window_from_presence;
pub use set_ops::{difference, intersection, union};
pub use slice::slice;
pub use subgraph::{esubgraph, vsubgraph};
pub use map::{emap, vmap};

use std::collections::BTreeMap;

use crate::graph::{EdgeKey, TGraph, VertexId};
use crate::relation::{RelItem, TemporalRelation};
use crate::time::Interval;
use crate::value::PropertySet;

impl TGraph {
    pub fn slice(&self, window: Interval) -> TGraph {
        slice(self, window)
    }

    pub fn vsubgraph(&self, pred: &crate::expr::Expr) -> Result<TGraph, crate::GraphError> {
        vsubgraph(self, pred)
    }

    pub fn esubgraph(&self, pred: &crate::expr::Expr) -> Result<TGraph, crate::GraphError> {
        esubgraph(self, pred)
    }

    pub fn vmap(&self, f: &crate::expr::MapFunc) -> Result<TGraph, crate::GraphError> {
        vmap(self, f)
    }

    pub fn emap(&self, f: &crate::expr::MapFunc) -> Result<TGraph, crate::GraphError> {
        emap(self, f)
    }

    pub fn aggregate(&self, params: &AggParams) -> Result<TGraph, crate::GraphError> {
        aggregate(self, params)
    }

    pub fn union(
        &self,
        other: &TGraph,
        fv: &[crate::ResolveSpec],
        fe: &[crate::ResolveSpec],
    ) -> Result<TGraph, crate::GraphError> {
        union(self, other, fv, fe)
    }

    pub fn intersection(
        &self,
        other: &TGraph,
        fv: &[crate::ResolveSpec],
        fe: &[crate::ResolveSpec],
    ) -> Result<TGraph, crate::GraphError> {
        intersection(self, other, fv, fe)
    }

    pub fn difference(&self, other: &TGraph) -> Result<TGraph, crate::GraphError> {
        difference(self, other)
    }

    pub fn node_by_attrs(
        &self,
        groups: &[GroupAttr],
        fv: &[crate::ResolveSpec],
        fe: &[crate::ResolveSpec],
    ) -> Result<TGraph, crate::GraphError> {
        node_by_attrs(self, groups, fv, fe)
    }

    pub fn node_by_window(
        &self,
        window: WindowKind,
        qv: Quantifier,
        qe: Quantifier,
        fv: &[crate::ResolveSpec],
        fe: &[crate::ResolveSpec],
    ) -> Result<TGraph, crate::GraphError> {
        node_by_window(self, window, qv, qe, fv, fe)
    }

    pub fn edge_create(
        &self,
        other: &TGraph,
        query: &EdgeQuery,
        fe: &[crate::ResolveSpec],
    ) -> Result<TGraph, crate::GraphError> {
        edge_create(self, other, query, fe)
    }
}

/// A row of the coalesced outer join between a presence relation and its
/// attribute relation: the entity, its property set when one is recorded,
/// and the maximal period on which both are constant.
pub(crate) type JoinRow<'a, K> = (K, Option<&'a PropertySet>, Interval);

/// Outer-joins presence with attributes for every entity.
///
/// Within one presence run the pieces alternate between attribute records
/// and gaps, so the rows come out coalesced by `(key, props)`.
pub(crate) fn join_rows<'a, K: RelItem>(
    presence: &TemporalRelation<K, ()>,
    attrs: &'a TemporalRelation<K, PropertySet>,
) -> Vec<JoinRow<'a, K>> {
    let index = attr_index(attrs);
    let empty: Vec<(&PropertySet, Interval)> = Vec::new();
    let mut rows = Vec::new();
    for (k, (), p) in presence.iter() {
        let recs = index.get(k).unwrap_or(&empty);
        let mut cut = p.start();
        let mut bounds: Vec<_> = recs
            .iter()
            .flat_map(|(_, rp)| [rp.start(), rp.end()])
            .filter(|b| *b > p.start() && *b < p.end())
            .collect();
        bounds.sort();
        bounds.dedup();
        bounds.push(p.end());
        for b in bounds {
            let piece = Interval::new(cut, b).expect("bounds ascend");
            let props = recs
                .iter()
                .find(|(_, rp)| rp.contains(piece.start()))
                .map(|(ps, _)| *ps);
            rows.push((k.clone(), props, piece));
            cut = b;
        }
    }
    rows
}

/// Attribute records grouped per key, period-sorted.
pub(crate) fn attr_index<K: RelItem>(
    attrs: &TemporalRelation<K, PropertySet>,
) -> BTreeMap<K, Vec<(&PropertySet, Interval)>> {
    let mut map: BTreeMap<K, Vec<(&PropertySet, Interval)>> = BTreeMap::new();
    for (k, ps, p) in attrs.iter() {
        map.entry(k.clone()).or_default().push((ps, *p));
    }
    map
}

/// Vertex join rows of a graph.
pub(crate) fn vertex_rows(t: &TGraph) -> Vec<JoinRow<'_, VertexId>> {
    join_rows(t.vertices(), t.vertex_attrs())
}

/// Edge join rows of a graph.
pub(crate) fn edge_rows(t: &TGraph) -> Vec<JoinRow<'_, EdgeKey>> {
    join_rows(t.edges(), t.edge_attrs())
}
