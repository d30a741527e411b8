//! Subgraph operators: keep the vertices or edges satisfying a predicate.

use crate::error::GraphError;
use crate::expr::{Binding, EvalCtx, Expr};
use crate::graph::{
    constrain_edge_attrs, constrain_edges, constrain_vertex_attrs, TGraph,
};
use crate::relation::TemporalRelation;

use super::{edge_rows, vertex_rows};

/// Vertex-induced temporal subgraph.
///
/// A vertex survives at a point when the predicate holds on its identity and
/// properties there; edges survive while both endpoints do; attributes follow
/// their entities. Period references in the predicate see the period of the
/// coalesced vertex-with-attributes row.
pub fn vsubgraph(t: &TGraph, pred: &Expr) -> Result<TGraph, GraphError> {
    let mut kept = Vec::new();
    for (v, props, piece) in vertex_rows(t) {
        let ctx = EvalCtx {
            v: Binding::vertex_with_props(v, props),
            p: Some(piece),
            ..EvalCtx::default()
        };
        if pred.eval_predicate(&ctx).map_err(GraphError::Eval)? {
            kept.push((v, (), piece));
        }
    }
    let tv = TemporalRelation::from_tuples(kept).coalesce();
    let te = constrain_edges(t.edges(), &tv);
    let tav = constrain_vertex_attrs(t.vertex_attrs(), &tv);
    let tae = constrain_edge_attrs(t.edge_attrs(), &te);
    Ok(t.with_parts(tv, te, tav, tae))
}

/// Edge subgraph: keeps edges satisfying the predicate, leaves vertices
/// untouched, and trims edge attributes to the surviving edges.
pub fn esubgraph(t: &TGraph, pred: &Expr) -> Result<TGraph, GraphError> {
    let mut kept = Vec::new();
    for (e, props, piece) in edge_rows(t) {
        let ctx = EvalCtx {
            e: Binding::edge_with_props(e, props),
            p: Some(piece),
            ..EvalCtx::default()
        };
        if pred.eval_predicate(&ctx).map_err(GraphError::Eval)? {
            kept.push((e, (), piece));
        }
    }
    let te = TemporalRelation::from_tuples(kept).coalesce();
    let tae = constrain_edge_attrs(t.edge_attrs(), &te);
    Ok(t.with_parts(t.vertices().clone(), te, t.vertex_attrs().clone(), tae))
}
