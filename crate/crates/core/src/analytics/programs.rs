//! Stock vertex programs (connected components, PageRank), an
//! expression-driven program for pipeline scripts, and the glue that turns
//! engine output back into a graph property.

use ordered_float::OrderedFloat;

use crate::agg::{resolve, AggFunc};
use crate::error::GraphError;
use crate::expr::{Binding, EvalCtx, EvalValue, Expr};
use crate::graph::{TGraph, VertexId};
use crate::relation::TemporalRelation;
use crate::time::Interval;
use crate::value::{PropertySet, PropertyValue};

use super::engine::{run_program, VertexProgram};
use super::topology::TemporalTopology;

/// Minimum-id flood fill: connected components (weak components on directed
/// graphs, since messages travel against edges too).
pub struct MinIdComponents;

impl VertexProgram for MinIdComponents {
    fn init(&self, v: VertexId, _d: i64) -> Result<PropertyValue, GraphError> {
        Ok(PropertyValue::Int(v.0 as i64))
    }

    fn message(
        &self,
        state: &PropertyValue,
        _d: i64,
    ) -> Result<Option<PropertyValue>, GraphError> {
        Ok(Some(state.clone()))
    }

    fn combine(&self, a: &PropertyValue, b: &PropertyValue) -> Result<PropertyValue, GraphError> {
        Ok(a.min(b).clone())
    }

    fn update(
        &self,
        _v: VertexId,
        state: &PropertyValue,
        incoming: Option<&PropertyValue>,
        _d: i64,
    ) -> Result<PropertyValue, GraphError> {
        Ok(match incoming {
            Some(m) if m < state => m.clone(),
            _ => state.clone(),
        })
    }

    fn converged(&self, old: &PropertyValue, new: &PropertyValue) -> bool {
        old == new
    }
}

/// Damped PageRank without sink redistribution: each round a vertex scores
/// `(1 - d) + d * sum(rank_in / deg_in)`. Requires a directed graph.
pub struct PageRank {
    pub damping: f64,
    pub tolerance: f64,
}

impl VertexProgram for PageRank {
    fn init(&self, _v: VertexId, _d: i64) -> Result<PropertyValue, GraphError> {
        Ok(PropertyValue::float(1.0))
    }

    fn message(
        &self,
        state: &PropertyValue,
        out_degree: i64,
    ) -> Result<Option<PropertyValue>, GraphError> {
        if out_degree == 0 {
            return Ok(None);
        }
        let rank = state.as_f64().ok_or_else(|| {
            GraphError::TypeMismatch(format!("rank state must be numeric, got {state}"))
        })?;
        Ok(Some(PropertyValue::float(rank / out_degree as f64)))
    }

    fn combine(&self, a: &PropertyValue, b: &PropertyValue) -> Result<PropertyValue, GraphError> {
        match (a.as_f64(), b.as_f64()) {
            (Some(x), Some(y)) => Ok(PropertyValue::float(x + y)),
            _ => Err(GraphError::TypeMismatch(
                "rank messages must be numeric".to_string(),
            )),
        }
    }

    fn update(
        &self,
        _v: VertexId,
        _state: &PropertyValue,
        incoming: Option<&PropertyValue>,
        _d: i64,
    ) -> Result<PropertyValue, GraphError> {
        let sum = incoming.and_then(|m| m.as_f64()).unwrap_or(0.0);
        Ok(PropertyValue::float(
            (1.0 - self.damping) + self.damping * sum,
        ))
    }

    fn converged(&self, old: &PropertyValue, new: &PropertyValue) -> bool {
        match (old.as_f64(), new.as_f64()) {
            (Some(a), Some(b)) => (a - b).abs() <= self.tolerance,
            _ => false,
        }
    }
}

/// Script-defined vertex program. The `init` expression sees the vertex (its
/// id and out-degree); `msg` and `update` see the sender's or own `state`,
/// and `update` additionally sees the folded messages as `agg`. The combine
/// function must be associative, so only `sum`, `min` and `max` are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprProgram {
    pub init: Expr,
    pub msg: Expr,
    pub combine: AggFunc,
    pub update: Expr,
    /// Numeric convergence tolerance; equality when absent.
    pub tolerance: Option<f64>,
}

impl ExprProgram {
    pub fn validated(self) -> Result<Self, GraphError> {
        match self.combine {
            AggFunc::Sum | AggFunc::Min | AggFunc::Max => Ok(self),
            other => Err(GraphError::UnknownAggregate(format!(
                "{} cannot fold vertex messages pairwise",
                other.name()
            ))),
        }
    }

    fn ctx_for<'a>(
        v: Option<VertexId>,
        state: Option<&'a PropertyValue>,
        agg: Option<&'a PropertyValue>,
        out_degree: i64,
    ) -> EvalCtx<'a> {
        EvalCtx {
            v: Binding {
                vertex: v,
                state,
                out_degree: Some(out_degree),
                ..Binding::default()
            },
            agg,
            ..EvalCtx::default()
        }
    }

    fn scalar(value: EvalValue, role: &str) -> Result<PropertyValue, GraphError> {
        match value {
            EvalValue::Value(v) => Ok(v),
            EvalValue::Null => Err(GraphError::Eval(format!("{role} evaluated to null"))),
            EvalValue::Period(_) => Err(GraphError::Eval(format!(
                "{role} evaluated to a period, expected a value"
            ))),
        }
    }
}

impl VertexProgram for ExprProgram {
    fn init(&self, v: VertexId, out_degree: i64) -> Result<PropertyValue, GraphError> {
        let ctx = Self::ctx_for(Some(v), None, None, out_degree);
        Self::scalar(
            self.init.eval(&ctx).map_err(GraphError::Eval)?,
            "vertex init",
        )
    }

    fn message(
        &self,
        state: &PropertyValue,
        out_degree: i64,
    ) -> Result<Option<PropertyValue>, GraphError> {
        let ctx = Self::ctx_for(None, Some(state), None, out_degree);
        match self.msg.eval(&ctx).map_err(GraphError::Eval)? {
            EvalValue::Value(v) => Ok(Some(v)),
            EvalValue::Null => Ok(None),
            EvalValue::Period(_) => Err(GraphError::Eval(
                "message evaluated to a period, expected a value".to_string(),
            )),
        }
    }

    fn combine(&self, a: &PropertyValue, b: &PropertyValue) -> Result<PropertyValue, GraphError> {
        let dummy = Interval::from_raw(0, 1).expect("static interval");
        Ok(crate::agg::apply_agg(
            self.combine,
            &[(a.clone(), dummy), (b.clone(), dummy)],
        )?)
    }

    fn update(
        &self,
        v: VertexId,
        state: &PropertyValue,
        incoming: Option<&PropertyValue>,
        out_degree: i64,
    ) -> Result<PropertyValue, GraphError> {
        let ctx = Self::ctx_for(Some(v), Some(state), incoming, out_degree);
        Self::scalar(
            self.update.eval(&ctx).map_err(GraphError::Eval)?,
            "vertex update",
        )
    }

    fn converged(&self, old: &PropertyValue, new: &PropertyValue) -> bool {
        match self.tolerance {
            None => old == new,
            Some(tol) => match (old.as_f64(), new.as_f64()) {
                (Some(a), Some(b)) => (a - b).abs() <= tol,
                _ => old == new,
            },
        }
    }
}

/// Merges per-interval final states back into the source graph as vertex
/// property `pname`. Adjacent intervals with equal states fuse into one row.
pub fn attach_vertex_states(
    t: &TGraph,
    topo: &TemporalTopology,
    states: &[Vec<Option<PropertyValue>>],
    pname: &str,
) -> Result<TGraph, GraphError> {
    let mut rows: Vec<(VertexId, PropertySet, Interval)> = Vec::new();
    for (vi, v) in topo.verts.iter().enumerate() {
        let mut i = 0;
        while i < topo.interval_count() {
            let Some(val) = states[i][vi].as_ref() else {
                i += 1;
                continue;
            };
            let mut j = i + 1;
            while j < topo.interval_count()
                && states[j][vi].as_ref() == Some(val)
                && topo.intervals[j - 1].end() == topo.intervals[j].start()
            {
                j += 1;
            }
            let period = Interval::new(topo.intervals[i].start(), topo.intervals[j - 1].end())
                .expect("runs ascend");
            let mut ps = PropertySet::new();
            ps.insert(pname.to_string(), val.clone());
            rows.push((*v, ps, period));
            i = j;
        }
    }
    let fused = TemporalRelation::from_tuples(rows);
    let tav = resolve(&[], &t.vertex_attrs().bag_union(&fused))?;
    Ok(TGraph::from_consistent_parts(
        t.directed(),
        t.vertices().clone(),
        t.edges().clone(),
        tav,
        t.edge_attrs().clone(),
    ))
}

/// Labels every vertex with the smallest vertex id reachable from it at each
/// point, under property `pname`.
pub fn connected_components(t: &TGraph, pname: &str) -> Result<TGraph, GraphError> {
    let topo = TemporalTopology::from_tgraph(t);
    connected_components_on(t, &topo, pname)
}

/// Component labelling over a prebuilt topology (representations reuse it).
pub fn connected_components_on(
    t: &TGraph,
    topo: &TemporalTopology,
    pname: &str,
) -> Result<TGraph, GraphError> {
    // Flooding needs at most |V| rounds on any component.
    let bound = topo.vertex_count().max(1) + 1;
    // Weak components: labels must cross edges against their direction too,
    // so the flood always runs on an undirected view of the topology.
    let out = if topo.directed {
        let mut undirected = topo.clone();
        undirected.directed = false;
        run_program(&undirected, &MinIdComponents, bound)?
    } else {
        run_program(topo, &MinIdComponents, bound)?
    };
    attach_vertex_states(t, topo, &out.states, pname)
}

/// Damped PageRank under property `pname`. Directed graphs only.
pub fn pagerank(
    t: &TGraph,
    pname: &str,
    damping: f64,
    tolerance: f64,
    max_supersteps: usize,
) -> Result<TGraph, GraphError> {
    let topo = TemporalTopology::from_tgraph(t);
    pagerank_on(t, &topo, pname, damping, tolerance, max_supersteps)
}

/// PageRank over a prebuilt topology (representations reuse it).
pub fn pagerank_on(
    t: &TGraph,
    topo: &TemporalTopology,
    pname: &str,
    damping: f64,
    tolerance: f64,
    max_supersteps: usize,
) -> Result<TGraph, GraphError> {
    if !t.directed() {
        return Err(GraphError::RequiresDirected { op: "pagerank" });
    }
    let program = PageRank { damping, tolerance };
    let out = run_program(topo, &program, max_supersteps)?;
    attach_vertex_states(t, topo, &out.states, pname)
}

/// Runs a script-defined program under property `pname`.
pub fn run_expr_program(
    t: &TGraph,
    program: ExprProgram,
    pname: &str,
    max_supersteps: usize,
) -> Result<TGraph, GraphError> {
    let topo = TemporalTopology::from_tgraph(t);
    run_expr_program_on(t, &topo, program, pname, max_supersteps)
}

/// Runs a script-defined program over a prebuilt topology.
pub fn run_expr_program_on(
    t: &TGraph,
    topo: &TemporalTopology,
    program: ExprProgram,
    pname: &str,
    max_supersteps: usize,
) -> Result<TGraph, GraphError> {
    let program = program.validated()?;
    let out = run_program(topo, &program, max_supersteps)?;
    attach_vertex_states(t, topo, &out.states, pname)
}

/// Reference fold for tests elsewhere: exact rank iteration on one static
/// snapshot, kept independent of the engine.
pub fn static_pagerank_reference(
    n: usize,
    edges: &[(usize, usize)],
    damping: f64,
    rounds: usize,
) -> Vec<f64> {
    let mut out_deg = vec![0usize; n];
    for (s, _) in edges {
        out_deg[*s] += 1;
    }
    let mut rank = vec![1.0f64; n];
    for _ in 0..rounds {
        let mut incoming = vec![Vec::new(); n];
        for (s, d) in edges {
            incoming[*d].push(rank[*s] / out_deg[*s] as f64);
        }
        rank = incoming
            .iter()
            .map(|msgs| {
                let sum: f64 = msgs.iter().fold(0.0, |acc, m| acc + m);
                (1.0 - damping) + damping * sum
            })
            .collect();
    }
    rank
}

/// Float extraction helper for rank comparisons in tests.
pub fn rank_of(value: &PropertyValue) -> Option<f64> {
    match value {
        PropertyValue::Float(OrderedFloat(f)) => Some(*f),
        PropertyValue::Int(i) => Some(*i as f64),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::coauthors;
    use crate::props;
    use crate::time::TimePoint;

    fn iv(s: i64, e: i64) -> Interval {
        Interval::from_raw(s, e).unwrap()
    }

    #[test]
    fn components_label_the_fixture_over_time() {
        let g = coauthors();
        let out = connected_components(&g, "comp").unwrap();
        assert_eq!(out.validate(), vec![]);
        let comp = |v: u64, c: i64| {
            let snap_points: Vec<(i64, Option<PropertyValue>)> = (0..11)
                .map(|p| {
                    let s = out.snapshot_at(TimePoint(p));
                    (
                        p,
                        s.vertex_props
                            .get(&VertexId(v))
                            .and_then(|ps| ps.get("comp"))
                            .cloned(),
                    )
                })
                .collect();
            (c, snap_points)
        };
        // v1 leads its component throughout.
        let (_, v1_labels) = comp(1, 1);
        assert!(v1_labels
            .iter()
            .all(|(_, l)| *l == Some(PropertyValue::Int(1))));
        // v2 is with v1 while they collaborate, then on its own.
        let s3 = out.snapshot_at(TimePoint(3));
        assert_eq!(
            s3.vertex_props[&VertexId(2)].get("comp"),
            Some(&PropertyValue::Int(1))
        );
        let s5 = out.snapshot_at(TimePoint(5));
        assert_eq!(
            s5.vertex_props[&VertexId(2)].get("comp"),
            Some(&PropertyValue::Int(2))
        );
        // v3 joins v2's component during their collaboration.
        let s7 = out.snapshot_at(TimePoint(7));
        assert_eq!(
            s7.vertex_props[&VertexId(3)].get("comp"),
            Some(&PropertyValue::Int(2))
        );
        let s9 = out.snapshot_at(TimePoint(9));
        assert_eq!(
            s9.vertex_props[&VertexId(3)].get("comp"),
            Some(&PropertyValue::Int(3))
        );
    }

    #[test]
    fn component_rows_fuse_across_equal_intervals() {
        let g = coauthors();
        let out = connected_components(&g, "comp").unwrap();
        // v1's label is 1 on all five topology intervals: one fused row.
        let v1_rows: Vec<Interval> = out
            .vertex_attrs()
            .iter()
            .filter(|(v, ps, _)| *v == VertexId(1) && ps.contains("comp"))
            .map(|(_, _, p)| *p)
            .collect();
        assert_eq!(v1_rows, vec![iv(0, 11)]);
        // Original attributes survive alongside the new one.
        let s0 = out.snapshot_at(TimePoint(0));
        assert_eq!(
            s0.vertex_props[&VertexId(1)].get("name"),
            Some(&PropertyValue::text("Ann"))
        );
    }

    #[test]
    fn pagerank_requires_directed() {
        let g = coauthors();
        let err = pagerank(&g, "pr", 0.85, 1e-6, 10).unwrap_err();
        assert!(matches!(err, GraphError::RequiresDirected { op: "pagerank" }));
    }

    #[test]
    fn pagerank_chain_matches_reference() {
        // v1 -> v2 -> v3 on [0,2).
        let tv = TemporalRelation::from_tuples(vec![
            (VertexId(1), (), iv(0, 2)),
            (VertexId(2), (), iv(0, 2)),
            (VertexId(3), (), iv(0, 2)),
        ]);
        let te = TemporalRelation::from_tuples(vec![
            (crate::graph::EdgeKey::new(VertexId(1), VertexId(2)), (), iv(0, 2)),
            (crate::graph::EdgeKey::new(VertexId(2), VertexId(3)), (), iv(0, 2)),
        ]);
        let g = TGraph::from_relations(
            true,
            tv,
            te,
            TemporalRelation::new(),
            TemporalRelation::new(),
        )
        .unwrap();
        let out = pagerank(&g, "pr", 0.85, 1e-9, 60).unwrap();
        let snap = out.snapshot_at(TimePoint(0));
        let got: Vec<f64> = [1u64, 2, 3]
            .iter()
            .map(|v| {
                rank_of(snap.vertex_props[&VertexId(*v)].get("pr").unwrap()).unwrap()
            })
            .collect();
        let want = static_pagerank_reference(3, &[(0, 1), (1, 2)], 0.85, 60);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-6, "got {g}, want {w}");
        }
        // The chain's exact fixed point.
        assert!((got[0] - 0.15).abs() < 1e-9);
        assert!((got[1] - (0.15 + 0.85 * 0.15)).abs() < 1e-9);
    }

    #[test]
    fn isolated_vertices_score_the_base_rank() {
        let tv = TemporalRelation::from_tuples(vec![(VertexId(7), (), iv(0, 1))]);
        let g = TGraph::from_relations(
            true,
            tv,
            TemporalRelation::new(),
            TemporalRelation::new(),
            TemporalRelation::new(),
        )
        .unwrap();
        let out = pagerank(&g, "pr", 0.85, 1e-6, 10).unwrap();
        let snap = out.snapshot_at(TimePoint(0));
        let pr = rank_of(snap.vertex_props[&VertexId(7)].get("pr").unwrap()).unwrap();
        assert!((pr - 0.15).abs() < 1e-12);
    }

    #[test]
    fn expr_program_reimplements_min_id() {
        let g = coauthors();
        let program = ExprProgram {
            init: Expr::Id(crate::expr::Scope::V),
            msg: Expr::State(crate::expr::Scope::V),
            combine: AggFunc::Min,
            update: Expr::Call(
                crate::expr::FuncName::Min,
                vec![
                    Expr::State(crate::expr::Scope::V),
                    Expr::MsgAgg,
                ],
            ),
            tolerance: None,
        };
        let via_expr = run_expr_program(&g, program, "comp", 10).unwrap();
        let direct = connected_components(&g, "comp").unwrap();
        assert_eq!(via_expr.vertex_attrs(), direct.vertex_attrs());
    }

    #[test]
    fn pairwise_fold_rejects_non_associative_functions() {
        let program = ExprProgram {
            init: Expr::Lit(PropertyValue::Int(0)),
            msg: Expr::State(crate::expr::Scope::V),
            combine: AggFunc::Mean,
            update: Expr::MsgAgg,
            tolerance: None,
        };
        assert!(program.validated().is_err());
    }

    #[test]
    fn attach_respects_presence_gaps() {
        // A vertex absent in the middle must not get a fused row bridging
        // the gap.
        let tv = TemporalRelation::from_tuples(vec![
            (VertexId(1), (), iv(0, 2)),
            (VertexId(1), (), iv(4, 6)),
            (VertexId(2), (), iv(0, 6)),
        ]);
        let g = TGraph::from_relations(
            false,
            tv,
            TemporalRelation::new(),
            TemporalRelation::new(),
            TemporalRelation::new(),
        )
        .unwrap();
        let out = connected_components(&g, "comp").unwrap();
        assert_eq!(out.validate(), vec![]);
        let v1_rows: Vec<Interval> = out
            .vertex_attrs()
            .iter()
            .filter(|(v, _, _)| *v == VertexId(1))
            .map(|(_, _, p)| *p)
            .collect();
        assert_eq!(v1_rows, vec![iv(0, 2), iv(4, 6)]);
        let _ = props! {"guard" => 1i64};
    }
}
