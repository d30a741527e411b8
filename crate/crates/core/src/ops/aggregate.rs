//! Neighborhood aggregation: fold values flowing over edges into a vertex
//! property.

use crate::agg::{resolve, AggFunc, ResolveSpec};
use crate::error::GraphError;
use crate::expr::{Binding, EvalCtx, Expr};
use crate::graph::{TGraph, VertexId};
use crate::props;
use crate::relation::TemporalRelation;
use crate::time::Interval;
use crate::value::PropertySet;

use super::attr_index;

/// Which endpoint of a directed edge receives the aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggDirection {
    /// Values flow src -> dst: each vertex aggregates over incoming edges.
    In,
    /// Values flow dst -> src: each vertex aggregates over outgoing edges.
    Out,
    /// Both orientations contribute.
    Both,
}

impl AggDirection {
    pub fn token(&self) -> &'static str {
        match self {
            AggDirection::In => "in",
            AggDirection::Out => "out",
            AggDirection::Both => "both",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "in" => AggDirection::In,
            "out" => AggDirection::Out,
            "both" => AggDirection::Both,
            _ => return None,
        })
    }
}

/// Parameters of [`aggregate`].
///
/// Expression scopes: `v1` is the receiving vertex, `v2` the contributing
/// neighbor, `e` the connecting edge, `p` the row period.
#[derive(Debug, Clone, PartialEq)]
pub struct AggParams {
    pub dir: AggDirection,
    /// Row filter; `None` keeps every row.
    pub cond: Option<Expr>,
    /// Contribution computed per row; rows evaluating to Null are skipped.
    pub map: Expr,
    /// Fold applied per receiver.
    pub func: AggFunc,
    /// Output property name.
    pub pname: String,
}

/// The record covering the start of `piece`, if any.
fn props_at<'a>(
    recs: &[(&'a PropertySet, Interval)],
    piece: &Interval,
) -> Option<&'a PropertySet> {
    recs.iter()
        .find(|(_, rp)| rp.contains(piece.start()))
        .map(|(ps, _)| *ps)
}

/// For every vertex and point, folds the mapped contributions of its
/// incident edges into property `pname`. Vertices with no contributing edge
/// at a point carry no `pname` there. An existing property named `pname`
/// merges with the computed one by set semantics. Undirected graphs always
/// aggregate over both orientations; a direction is only meaningful on
/// directed graphs.
pub fn aggregate(t: &TGraph, params: &AggParams) -> Result<TGraph, GraphError> {
    let vattrs = attr_index(t.vertex_attrs());
    let eattrs = attr_index(t.edge_attrs());
    let empty: Vec<(&PropertySet, Interval)> = Vec::new();

    // Oriented contribution rows (receiver, contributor, edge).
    let mut rows: Vec<(VertexId, PropertySet, Interval)> = Vec::new();
    for (ekey, (), p) in t.edges().iter() {
        let mut orientations: Vec<(VertexId, VertexId)> = Vec::new();
        let incoming = matches!(params.dir, AggDirection::In | AggDirection::Both);
        let outgoing = matches!(params.dir, AggDirection::Out | AggDirection::Both);
        if !t.directed() || incoming {
            orientations.push((ekey.dst, ekey.src));
        }
        if !t.directed() || outgoing {
            orientations.push((ekey.src, ekey.dst));
        }
        orientations.dedup();
        if ekey.is_loop() {
            orientations.truncate(1);
        }
        for (receiver, contributor) in orientations {
            // Refine the edge period wherever any referenced attribute set
            // changes, so each piece evaluates against constant bindings.
            let recv_recs = vattrs.get(&receiver).unwrap_or(&empty);
            let contrib_recs = vattrs.get(&contributor).unwrap_or(&empty);
            let edge_recs = eattrs.get(ekey).unwrap_or(&empty);
            let mut bounds: Vec<_> = recv_recs
                .iter()
                .chain(contrib_recs.iter())
                .chain(edge_recs.iter())
                .flat_map(|(_, rp)| [rp.start(), rp.end()])
                .filter(|b| *b > p.start() && *b < p.end())
                .collect();
            bounds.sort();
            bounds.dedup();
            bounds.push(p.end());
            let mut cut = p.start();
            for b in bounds {
                let piece = Interval::new(cut, b).expect("bounds ascend");
                cut = b;
                let ctx = EvalCtx {
                    v1: Binding::vertex_with_props(receiver, props_at(recv_recs, &piece)),
                    v2: Binding::vertex_with_props(contributor, props_at(contrib_recs, &piece)),
                    e: Binding::edge_with_props(*ekey, props_at(edge_recs, &piece)),
                    p: Some(piece),
                    ..EvalCtx::default()
                };
                if let Some(cond) = &params.cond {
                    if !cond.eval_predicate(&ctx).map_err(GraphError::Eval)? {
                        continue;
                    }
                }
                if let Some(value) = params
                    .map
                    .eval(&ctx)
                    .map_err(GraphError::Eval)?
                    .into_option()
                {
                    rows.push((receiver, props! {params.pname.clone() => value}, piece));
                }
            }
        }
    }

    let contributions = TemporalRelation::from_tuples(rows);
    let folded = resolve(
        &[ResolveSpec::new(params.func, params.pname.clone())],
        &contributions,
    )?;
    let tav = resolve(&[], &t.vertex_attrs().bag_union(&folded))?;
    Ok(t.with_parts(
        t.vertices().clone(),
        t.edges().clone(),
        tav,
        t.edge_attrs().clone(),
    ))
}

/// True for aggregation functions that are insensitive to how contribution
/// periods are fragmented; dispatch uses this to decide whether a snapshot-
/// based execution is exact.
pub(crate) fn order_insensitive(func: AggFunc) -> bool {
    !matches!(func, AggFunc::First | AggFunc::Last | AggFunc::List)
}
