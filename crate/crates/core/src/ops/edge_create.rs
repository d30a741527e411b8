//! Edge creation across two graphs: connect concurrent vertex pairs, or
//! compose two-hop paths into direct edges.

use crate::agg::resolve;
use crate::error::GraphError;
use crate::expr::{Binding, EvalCtx, Expr, MapFunc};
use crate::graph::{constrain_edge_attrs, constrain_edges, EdgeKey, TGraph};
use crate::relation::TemporalRelation;
use crate::time::Interval;
use crate::value::PropertySet;

use super::{edge_rows, vertex_rows};

/// What to connect and with which new attributes.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeQuery {
    /// Cross product of concurrent vertices (left graph binds `v1`, right
    /// binds `v2`): every pair satisfying `cond` during their overlap gets
    /// an edge, attributed by `attrs`.
    VertexPairs { cond: Expr, attrs: MapFunc },
    /// Two-hop composition (left edge binds `e1`, right binds `e2`): every
    /// pair of concurrent edges meeting head-to-tail and satisfying `cond`
    /// yields an edge from `e1`'s tail to `e2`'s head during the overlap.
    EdgePaths { cond: Expr, attrs: MapFunc },
}

/// Builds a new graph whose vertices are the union of both inputs and whose
/// edges come from `query`. Original edges are discarded; new edge
/// attributes are folded by `fe` when several matches stamp the same edge
/// and period.
pub fn edge_create(
    t1: &TGraph,
    t2: &TGraph,
    query: &EdgeQuery,
    fe: &[crate::agg::ResolveSpec],
) -> Result<TGraph, GraphError> {
    if t1.directed() != t2.directed() {
        return Err(GraphError::DirectednessMismatch {
            left: t1.directed(),
            right: t2.directed(),
        });
    }
    let directed = t1.directed();
    let tv = t1.vertices().bag_union(t2.vertices()).coalesce();
    let tav = resolve(
        &[],
        &t1.vertex_attrs().bag_union(t2.vertex_attrs()),
    )?;

    let mut edge_tuples: Vec<(EdgeKey, (), Interval)> = Vec::new();
    let mut attr_tuples: Vec<(EdgeKey, PropertySet, Interval)> = Vec::new();
    let mut emit = |key: EdgeKey,
                    period: Interval,
                    attrs: &MapFunc,
                    ctx: &EvalCtx|
     -> Result<(), GraphError> {
        let key = key.canonical(directed);
        let props = attrs
            .apply(&PropertySet::new(), ctx)
            .map_err(GraphError::Eval)?;
        edge_tuples.push((key, (), period));
        if !props.is_empty() {
            attr_tuples.push((key, props, period));
        }
        Ok(())
    };

    match query {
        EdgeQuery::VertexPairs { cond, attrs } => {
            let left = vertex_rows(t1);
            let right = vertex_rows(t2);
            for (v1, p1props, p1) in &left {
                for (v2, p2props, p2) in &right {
                    if v1 == v2 {
                        continue;
                    }
                    let Some(overlap) = p1.intersect(p2) else {
                        continue;
                    };
                    let ctx = EvalCtx {
                        v1: Binding::vertex_with_props(*v1, *p1props),
                        v2: Binding::vertex_with_props(*v2, *p2props),
                        p: Some(overlap),
                        p1: Some(*p1),
                        p2: Some(*p2),
                        ..EvalCtx::default()
                    };
                    if cond.eval_predicate(&ctx).map_err(GraphError::Eval)? {
                        emit(EdgeKey::new(*v1, *v2), overlap, attrs, &ctx)?;
                    }
                }
            }
        }
        EdgeQuery::EdgePaths { cond, attrs } => {
            let left = edge_rows(t1);
            let right = edge_rows(t2);
            // Undirected edges can be walked in either direction.
            let orientations = |k: EdgeKey| -> Vec<(crate::graph::VertexId, crate::graph::VertexId)> {
                if directed || k.is_loop() {
                    vec![(k.src, k.dst)]
                } else {
                    vec![(k.src, k.dst), (k.dst, k.src)]
                }
            };
            for (e1, e1props, p1) in &left {
                for (e2, e2props, p2) in &right {
                    let Some(overlap) = p1.intersect(p2) else {
                        continue;
                    };
                    for (a, b) in orientations(*e1) {
                        for (c, d) in orientations(*e2) {
                            if b != c {
                                continue;
                            }
                            // A path must move on: its composition is not
                            // the hop it came from walked back.
                            if a == d && !directed {
                                continue;
                            }
                            let ctx = EvalCtx {
                                e1: Binding::edge_with_props(EdgeKey::new(a, b), *e1props),
                                e2: Binding::edge_with_props(EdgeKey::new(c, d), *e2props),
                                p: Some(overlap),
                                p1: Some(*p1),
                                p2: Some(*p2),
                                ..EvalCtx::default()
                            };
                            if cond.eval_predicate(&ctx).map_err(GraphError::Eval)? {
                                emit(EdgeKey::new(a, d), overlap, attrs, &ctx)?;
                            }
                        }
                    }
                }
            }
        }
    }

    let te_raw = TemporalRelation::from_tuples(edge_tuples).coalesce();
    let te = constrain_edges(&te_raw, &tv);
    let trimmed = te_raw.tuples().iter().map(|(_, _, p)| p.length()).sum::<i64>()
        - te.tuples().iter().map(|(_, _, p)| p.length()).sum::<i64>();
    if trimmed > 0 {
        log::warn!("edge_create trimmed {trimmed} edge point(s) without both endpoints");
    }
    let tae = constrain_edge_attrs(&resolve(fe, &TemporalRelation::from_tuples(attr_tuples))?, &te);
    Ok(TGraph::from_consistent_parts(directed, tv, te, tav, tae))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agg::{AggFunc, ResolveSpec};
    use crate::expr::{BinOp, Scope};
    use crate::fixtures::{coauthors, coauthors_alt};
    use crate::graph::VertexId;
    use crate::time::{Interval, TimePoint};
    use crate::value::PropertyValue;

    fn iv(s: i64, e: i64) -> Interval {
        Interval::from_raw(s, e).unwrap()
    }

    fn lit(v: PropertyValue) -> Expr {
        Expr::Lit(v)
    }

    #[test]
    fn vertex_pairs_connect_same_school() {
        let g = coauthors();
        // Connect vertices sharing a school; record it on the edge.
        let cond = Expr::Binary(
            BinOp::Eq,
            Box::new(Expr::Prop(Scope::V1, "school".to_string())),
            Box::new(Expr::Prop(Scope::V2, "school".to_string())),
        );
        let attrs = MapFunc::new(vec![(
            "school".to_string(),
            Expr::Prop(Scope::V1, "school".to_string()),
        )]);
        let out = edge_create(&g, &g, &EdgeQuery::VertexPairs { cond, attrs }, &[]).unwrap();
        assert_eq!(out.validate(), vec![]);
        // Ann and Cat share Drexel while Cat exists.
        let e13 = EdgeKey::undirected(VertexId(1), VertexId(3));
        assert_eq!(out.edges().presence(&e13).runs(), &[iv(6, 11)]);
        let snap = out.snapshot_at(TimePoint(7));
        assert_eq!(
            snap.edge_props[&e13].get("school"),
            Some(&PropertyValue::text("Drexel"))
        );
        // Nobody shares CUNY with Bob in this graph.
        let e12 = EdgeKey::undirected(VertexId(1), VertexId(2));
        assert!(out.edges().presence(&e12).is_empty());
        // Vertices carry over untouched.
        assert_eq!(out.vertices(), g.vertices());
        assert_eq!(out.vertex_attrs(), g.vertex_attrs());
    }

    #[test]
    fn vertex_pairs_across_two_graphs() {
        let t1 = coauthors();
        let t2 = coauthors_alt();
        let cond = Expr::Binary(
            BinOp::Eq,
            Box::new(Expr::Prop(Scope::V1, "name".to_string())),
            Box::new(Expr::Prop(Scope::V2, "name".to_string())),
        );
        let out = edge_create(
            &t1,
            &t2,
            &EdgeQuery::VertexPairs { cond, attrs: MapFunc::new(vec![]) },
            &[],
        )
        .unwrap();
        // Same ids name the same people, and self pairs are skipped, so the
        // only edges would link distinct ids with equal names: none here.
        assert!(out.edges().is_empty());
        // The vertex set is the union: v4 appears.
        assert_eq!(
            out.vertices().presence(&VertexId(4)).runs(),
            &[iv(1, 7)]
        );
        // Union attributes resolve: v1's school differs between graphs.
        let snap = out.snapshot_at(TimePoint(2));
        assert_eq!(
            snap.vertex_props[&VertexId(1)].get("school"),
            Some(&PropertyValue::set([
                PropertyValue::text("CUNY"),
                PropertyValue::text("Drexel")
            ]))
        );
    }

    #[test]
    fn edge_paths_compose_two_hops() {
        let g = coauthors();
        // (v1,v2) on [1,5) and (v2,v3) on [6,9) never overlap: no path.
        let out = edge_create(
            &g,
            &g,
            &EdgeQuery::EdgePaths {
                cond: lit(PropertyValue::Bool(true)),
                attrs: MapFunc::new(vec![]),
            },
            &[],
        )
        .unwrap();
        assert!(out.edges().is_empty());
    }

    #[test]
    fn edge_paths_on_overlapping_hops() {
        let t2 = coauthors_alt();
        // (v1,v2) on [1,3) and (v1,v4) on [2,5) share v1 during [2,3):
        // composing them links v2 with v4.
        let out = edge_create(
            &t2,
            &t2,
            &EdgeQuery::EdgePaths {
                cond: lit(PropertyValue::Bool(true)),
                attrs: MapFunc::new(vec![(
                    "via".to_string(),
                    Expr::Dst(Scope::E1),
                )]),
            },
            &[ResolveSpec::new(AggFunc::Any, "via")],
        )
        .unwrap();
        assert_eq!(out.validate(), vec![]);
        let e24 = EdgeKey::undirected(VertexId(2), VertexId(4));
        assert_eq!(out.edges().presence(&e24).runs(), &[iv(2, 3)]);
        let snap = out.snapshot_at(TimePoint(2));
        assert_eq!(
            snap.edge_props[&e24].get("via"),
            Some(&PropertyValue::Int(1))
        );
        // A hop composed with itself walked back is not a path.
        assert!(out
            .edges()
            .presence(&EdgeKey::undirected(VertexId(1), VertexId(1)))
            .is_empty());
    }

    #[test]
    fn edge_path_attrs_can_combine_both_hops() {
        let t2 = coauthors_alt();
        let attrs = MapFunc::new(vec![(
            "cnt".to_string(),
            Expr::Binary(
                BinOp::Add,
                Box::new(Expr::Prop(Scope::E1, "cnt".to_string())),
                Box::new(Expr::Prop(Scope::E2, "cnt".to_string())),
            ),
        )]);
        let out = edge_create(
            &t2,
            &t2,
            &EdgeQuery::EdgePaths { cond: lit(PropertyValue::Bool(true)), attrs },
            &[],
        )
        .unwrap();
        // Only (v1,v2) carries cnt, and (v1,v4) has none: the sum is Null,
        // so no attribute lands on the composed edge.
        let e24 = EdgeKey::undirected(VertexId(2), VertexId(4));
        assert_eq!(out.edges().presence(&e24).runs(), &[iv(2, 3)]);
        assert!(out.edge_attrs().is_empty());
    }

    #[test]
    fn dangling_new_edges_are_trimmed_to_endpoints() {
        // Pair people whose overlap outlives one of them is impossible by
        // construction; instead check the constraint path with a condition
        // that stamps the full overlap but endpoints that end earlier in tv.
        // Period p refers to the overlap, so this passes untrimmed.
        let g = coauthors();
        let cond = Expr::Call(
            crate::expr::FuncName::Has,
            vec![Expr::Prop(Scope::V1, "name".to_string())],
        );
        let out = edge_create(
            &g,
            &g,
            &EdgeQuery::VertexPairs { cond, attrs: MapFunc::new(vec![]) },
            &[],
        )
        .unwrap();
        assert_eq!(out.validate(), vec![]);
        // Every pair of concurrent vertices is connected.
        assert_eq!(out.edges().keys().len(), 3);
    }

    #[test]
    fn mismatched_directedness_is_rejected() {
        let g = coauthors();
        let d = TGraph::empty(true);
        let err = edge_create(
            &g,
            &d,
            &EdgeQuery::VertexPairs {
                cond: lit(PropertyValue::Bool(true)),
                attrs: MapFunc::new(vec![]),
            },
            &[],
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::DirectednessMismatch { .. }));
    }
}
