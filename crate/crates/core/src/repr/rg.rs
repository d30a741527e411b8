//! Snapshot-sequence representation: the timeline cut at every change point,
//! one complete static graph per interval.

use std::collections::BTreeMap;

use crate::agg::{apply_agg, set_reduce};
use crate::error::GraphError;
use crate::expr::{Binding, EvalCtx, Expr, MapFunc};
use crate::graph::{SnapshotGraph, TGraph, VertexId};
use crate::ops::AggParams;
use crate::relation::TemporalRelation;
use crate::time::Interval;
use crate::value::{PropertySet, PropertyValue};

/// A graph stored as dated snapshots. Exact: the slice grid follows every
/// change point, so stitching the slices back recovers the original
/// relations.
#[derive(Debug, Clone, PartialEq)]
pub struct RgRepr {
    directed: bool,
    slices: Vec<(Interval, SnapshotGraph)>,
}

impl RgRepr {
    pub fn build(t: &TGraph) -> Self {
        let slices = t
            .change_points()
            .windows(2)
            .map(|w| {
                let iv = Interval::new(w[0], w[1]).expect("change points ascend");
                (iv, t.snapshot_at(iv.start()))
            })
            .collect();
        RgRepr {
            directed: t.directed(),
            slices,
        }
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn slices(&self) -> &[(Interval, SnapshotGraph)] {
        &self.slices
    }

    /// Narrows to a window by selecting the covered slices; only the two
    /// boundary slices need their interval clipped.
    pub fn slice_range(&self, window: Interval) -> RgRepr {
        let from = self.slices.partition_point(|(iv, _)| iv.end() <= window.start());
        let to = self.slices.partition_point(|(iv, _)| iv.start() < window.end());
        let slices = self.slices[from..to]
            .iter()
            .map(|(iv, snap)| {
                let clipped = iv.intersect(&window).expect("selected slices overlap");
                (clipped, snap.clone())
            })
            .collect();
        RgRepr {
            directed: self.directed,
            slices,
        }
    }

    /// Rebuilds the relation form by stitching the slices back together.
    pub fn to_tgraph(&self) -> TGraph {
        let mut tv = Vec::new();
        let mut te = Vec::new();
        let mut tav = Vec::new();
        let mut tae = Vec::new();
        for (iv, snap) in &self.slices {
            tv.extend(snap.vertices.iter().map(|v| (*v, (), *iv)));
            te.extend(snap.edges.iter().map(|e| (*e, (), *iv)));
            tav.extend(snap.vertex_props.iter().map(|(v, ps)| (*v, ps.clone(), *iv)));
            tae.extend(snap.edge_props.iter().map(|(e, ps)| (*e, ps.clone(), *iv)));
        }
        TGraph::from_consistent_parts(
            self.directed,
            TemporalRelation::from_tuples(tv).coalesce(),
            TemporalRelation::from_tuples(te).coalesce(),
            TemporalRelation::from_tuples(tav).coalesce(),
            TemporalRelation::from_tuples(tae).coalesce(),
        )
    }

    /// Applies a per-snapshot transformation, keeping the grid.
    pub fn map_snapshots<F>(&self, f: F) -> Result<RgRepr, GraphError>
    where
        F: Fn(&Interval, &SnapshotGraph) -> Result<SnapshotGraph, GraphError>,
    {
        let slices = self
            .slices
            .iter()
            .map(|(iv, snap)| Ok((*iv, f(iv, snap)?)))
            .collect::<Result<Vec<_>, GraphError>>()?;
        Ok(RgRepr {
            directed: self.directed,
            slices,
        })
    }

    /// Snapshot-local vertex filter; edges lose any endpoint filtered away.
    pub fn vsubgraph(&self, pred: &Expr) -> Result<RgRepr, GraphError> {
        self.map_snapshots(|_, snap| {
            let mut out = SnapshotGraph::default();
            for v in &snap.vertices {
                let ctx = EvalCtx {
                    v: Binding::vertex_with_props(*v, snap.vertex_props.get(v)),
                    ..EvalCtx::default()
                };
                if pred.eval_predicate(&ctx).map_err(GraphError::Eval)? {
                    out.vertices.insert(*v);
                    if let Some(ps) = snap.vertex_props.get(v) {
                        out.vertex_props.insert(*v, ps.clone());
                    }
                }
            }
            for e in &snap.edges {
                if out.vertices.contains(&e.src) && out.vertices.contains(&e.dst) {
                    out.edges.insert(*e);
                    if let Some(ps) = snap.edge_props.get(e) {
                        out.edge_props.insert(*e, ps.clone());
                    }
                }
            }
            Ok(out)
        })
    }

    /// Snapshot-local edge filter; vertices stay.
    pub fn esubgraph(&self, pred: &Expr) -> Result<RgRepr, GraphError> {
        self.map_snapshots(|_, snap| {
            let mut out = snap.clone();
            out.edges.clear();
            out.edge_props.clear();
            for e in &snap.edges {
                let ctx = EvalCtx {
                    e: Binding::edge_with_props(*e, snap.edge_props.get(e)),
                    ..EvalCtx::default()
                };
                if pred.eval_predicate(&ctx).map_err(GraphError::Eval)? {
                    out.edges.insert(*e);
                    if let Some(ps) = snap.edge_props.get(e) {
                        out.edge_props.insert(*e, ps.clone());
                    }
                }
            }
            Ok(out)
        })
    }

    /// Snapshot-local vertex property update.
    pub fn vmap(&self, f: &MapFunc) -> Result<RgRepr, GraphError> {
        self.map_snapshots(|_, snap| {
            let mut out = snap.clone();
            out.vertex_props.clear();
            for (v, ps) in &snap.vertex_props {
                let ctx = EvalCtx {
                    v: Binding::vertex_with_props(*v, Some(ps)),
                    ..EvalCtx::default()
                };
                let mapped = f.apply(ps, &ctx).map_err(GraphError::Eval)?;
                if !mapped.is_empty() {
                    out.vertex_props.insert(*v, mapped);
                }
            }
            Ok(out)
        })
    }

    /// Snapshot-local edge property update.
    pub fn emap(&self, f: &MapFunc) -> Result<RgRepr, GraphError> {
        self.map_snapshots(|_, snap| {
            let mut out = snap.clone();
            out.edge_props.clear();
            for (e, ps) in &snap.edge_props {
                let ctx = EvalCtx {
                    e: Binding::edge_with_props(*e, Some(ps)),
                    ..EvalCtx::default()
                };
                let mapped = f.apply(ps, &ctx).map_err(GraphError::Eval)?;
                if !mapped.is_empty() {
                    out.edge_props.insert(*e, mapped);
                }
            }
            Ok(out)
        })
    }

    /// Snapshot-local neighborhood aggregation. Callers must ensure the
    /// expressions are time-invariant and the function order-insensitive;
    /// under those conditions this matches the relation-form operator.
    pub fn aggregate(&self, params: &AggParams) -> Result<RgRepr, GraphError> {
        let directed = self.directed;
        self.map_snapshots(|_, snap| {
            aggregate_snapshot(directed, snap, params)
        })
    }

    /// Per-snapshot analytics: each slice runs the program on its own static
    /// topology (no work shared across slices).
    pub fn connected_components(&self, pname: &str) -> Result<RgRepr, GraphError> {
        self.run_each_slice(&crate::analytics::MinIdComponents, pname, usize::MAX, false)
    }

    pub fn pagerank(
        &self,
        pname: &str,
        damping: f64,
        tolerance: f64,
        supersteps: usize,
    ) -> Result<RgRepr, GraphError> {
        if !self.directed {
            return Err(GraphError::RequiresDirected { op: "pagerank" });
        }
        self.run_per_slice(
            &crate::analytics::PageRank { damping, tolerance },
            pname,
            supersteps,
        )
    }

    pub fn run_per_slice<P: crate::analytics::VertexProgram>(
        &self,
        program: &P,
        pname: &str,
        supersteps: usize,
    ) -> Result<RgRepr, GraphError> {
        self.run_each_slice(program, pname, supersteps, self.directed)
    }

    /// `directed_view` lets component labelling flood both ways on directed
    /// graphs; every other program keeps the graph's own orientation.
    fn run_each_slice<P: crate::analytics::VertexProgram>(
        &self,
        program: &P,
        pname: &str,
        supersteps: usize,
        directed_view: bool,
    ) -> Result<RgRepr, GraphError> {
        self.map_snapshots(|iv, snap| {
            let topo = single_slice_topology(directed_view, iv, snap);
            // The full superstep budget applies per slice; halting on
            // convergence keeps provably-converging programs finite.
            let out = crate::analytics::run_program(&topo, program, supersteps)?;
            let mut next = snap.clone();
            for (vi, v) in topo.verts.iter().enumerate() {
                let Some(state) = out.states[0][vi].clone() else {
                    continue;
                };
                let entry = next.vertex_props.entry(*v).or_default();
                merge_property(entry, pname, state);
            }
            Ok(next)
        })
    }

    /// Script-defined vertex program, slice by slice.
    pub fn pregel(
        &self,
        program: &crate::analytics::ExprProgram,
        pname: &str,
        supersteps: usize,
    ) -> Result<RgRepr, GraphError> {
        let program = program.clone().validated()?;
        self.run_per_slice(&program, pname, supersteps)
    }

    /// The slice covering `point`, when one exists.
    fn snapshot_covering(&self, point: crate::time::TimePoint) -> Option<&SnapshotGraph> {
        let at = self.slices.partition_point(|(iv, _)| iv.end() <= point);
        match self.slices.get(at) {
            Some((iv, snap)) if iv.contains(point) => Some(snap),
            _ => None,
        }
    }

    /// Set operation computed slice by slice on the refined common grid.
    /// Order-sensitive resolve functions need whole-history chronology that
    /// single slices cannot see, so they are refused here.
    pub fn merge(
        &self,
        other: &RgRepr,
        how: crate::repr::SetOpKind,
        fv: &[crate::agg::ResolveSpec],
        fe: &[crate::agg::ResolveSpec],
    ) -> Result<RgRepr, GraphError> {
        use crate::repr::SetOpKind;
        if self.directed != other.directed {
            return Err(GraphError::DirectednessMismatch {
                left: self.directed,
                right: other.directed,
            });
        }
        if fv
            .iter()
            .chain(fe.iter())
            .any(|s| !crate::ops::order_insensitive(s.func))
        {
            return Err(GraphError::Unsupported(
                "order-sensitive resolve functions need the relation form".to_string(),
            ));
        }
        let mut bounds: std::collections::BTreeSet<crate::time::TimePoint> =
            std::collections::BTreeSet::new();
        for (iv, _) in self.slices().iter().chain(other.slices()) {
            bounds.insert(iv.start());
            bounds.insert(iv.end());
        }
        let bounds: Vec<_> = bounds.into_iter().collect();
        let mut slices = Vec::new();
        for w in bounds.windows(2) {
            let iv = Interval::new(w[0], w[1]).expect("bounds ascend");
            let a = self.snapshot_covering(iv.start());
            let b = other.snapshot_covering(iv.start());
            // Union resolve specs consume their input name even on periods
            // only one input covers, so one-sided union slices still go
            // through the relation union (against nothing) when specs exist.
            let one_sided = |snap: &SnapshotGraph| -> Result<SnapshotGraph, GraphError> {
                if fv.is_empty() && fe.is_empty() {
                    return Ok(snap.clone());
                }
                let g = single_slice_graph(self.directed, &iv, snap);
                let out = g.union(&TGraph::empty(self.directed), fv, fe)?;
                Ok(out.snapshot_at(iv.start()))
            };
            let merged = match (a, b) {
                (None, None) => None,
                (Some(x), None) => match how {
                    SetOpKind::Union => Some(one_sided(x)?),
                    SetOpKind::Difference => Some(x.clone()),
                    SetOpKind::Intersection => None,
                },
                (None, Some(y)) => match how {
                    SetOpKind::Union => Some(one_sided(y)?),
                    SetOpKind::Intersection | SetOpKind::Difference => None,
                },
                (Some(x), Some(y)) => {
                    let ga = single_slice_graph(self.directed, &iv, x);
                    let gb = single_slice_graph(self.directed, &iv, y);
                    let out = match how {
                        SetOpKind::Union => ga.union(&gb, fv, fe)?,
                        SetOpKind::Intersection => ga.intersection(&gb, fv, fe)?,
                        SetOpKind::Difference => ga.difference(&gb)?,
                    };
                    Some(out.snapshot_at(iv.start()))
                }
            };
            if let Some(snap) = merged {
                slices.push((iv, snap));
            }
        }
        // The refined grid may cut where nothing changes; rebuild from the
        // stitched relations to restore the change-point grid invariant.
        let stitched = RgRepr {
            directed: self.directed,
            slices,
        }
        .to_tgraph();
        Ok(RgRepr::build(&stitched))
    }
}

/// One-interval topology for a single snapshot.
fn single_slice_topology(
    directed: bool,
    iv: &Interval,
    snap: &SnapshotGraph,
) -> crate::analytics::TemporalTopology {
    let verts: Vec<VertexId> = snap.vertices.iter().copied().collect();
    let vidx: BTreeMap<VertexId, u32> = verts
        .iter()
        .enumerate()
        .map(|(i, v)| (*v, i as u32))
        .collect();
    let edges: Vec<(u32, u32)> = snap
        .edges
        .iter()
        .map(|e| (vidx[&e.src], vidx[&e.dst]))
        .collect();
    let n_e = edges.len();
    crate::analytics::TemporalTopology {
        directed,
        intervals: vec![*iv],
        verts,
        edges,
        vertex_active: vec![vec![true; snap.vertices.len()]],
        edge_active: vec![vec![true; n_e]],
    }
}

/// A one-slice graph: the snapshot's content stamped with the interval.
fn single_slice_graph(directed: bool, iv: &Interval, snap: &SnapshotGraph) -> TGraph {
    TGraph::from_consistent_parts(
        directed,
        TemporalRelation::from_tuples(snap.vertices.iter().map(|v| (*v, (), *iv))),
        TemporalRelation::from_tuples(snap.edges.iter().map(|e| (*e, (), *iv))),
        TemporalRelation::from_tuples(
            snap.vertex_props.iter().map(|(v, ps)| (*v, ps.clone(), *iv)),
        ),
        TemporalRelation::from_tuples(
            snap.edge_props.iter().map(|(e, ps)| (*e, ps.clone(), *iv)),
        ),
    )
}

/// Mirrors how the relation form folds a computed value into existing
/// properties: equal values keep one copy, conflicts become a set.
fn merge_property(props: &mut PropertySet, pname: &str, value: PropertyValue) {
    let dummy = Interval::from_raw(0, 1).expect("static");
    let merged = match props.get(pname) {
        None => value,
        Some(old) => set_reduce(&[(old.clone(), dummy), (value, dummy)]),
    };
    props.insert(pname.to_string(), merged);
}

fn aggregate_snapshot(
    directed: bool,
    snap: &SnapshotGraph,
    params: &AggParams,
) -> Result<SnapshotGraph, GraphError> {
    use crate::ops::AggDirection;
    // Contributions per receiver, in deterministic edge order.
    let mut contributions: BTreeMap<VertexId, Vec<PropertyValue>> = BTreeMap::new();
    for e in &snap.edges {
        let mut orientations: Vec<(VertexId, VertexId)> = Vec::new();
        if directed {
            if matches!(params.dir, AggDirection::In | AggDirection::Both) {
                orientations.push((e.dst, e.src));
            }
            if matches!(params.dir, AggDirection::Out | AggDirection::Both) {
                orientations.push((e.src, e.dst));
            }
        } else {
            orientations.push((e.dst, e.src));
            orientations.push((e.src, e.dst));
        }
        orientations.dedup();
        if e.is_loop() {
            orientations.truncate(1);
        }
        for (receiver, contributor) in orientations {
            let ctx = EvalCtx {
                v1: Binding::vertex_with_props(receiver, snap.vertex_props.get(&receiver)),
                v2: Binding::vertex_with_props(contributor, snap.vertex_props.get(&contributor)),
                e: Binding::edge_with_props(*e, snap.edge_props.get(e)),
                ..EvalCtx::default()
            };
            if let Some(cond) = &params.cond {
                if !cond.eval_predicate(&ctx).map_err(GraphError::Eval)? {
                    continue;
                }
            }
            match params.map.eval(&ctx).map_err(GraphError::Eval)? {
                crate::expr::EvalValue::Value(v) => {
                    contributions.entry(receiver).or_default().push(v)
                }
                crate::expr::EvalValue::Null => {}
                crate::expr::EvalValue::Period(_) => {
                    return Err(GraphError::Eval(
                        "aggregation map evaluated to a period".to_string(),
                    ))
                }
            }
        }
    }
    let mut out = snap.clone();
    let dummy = Interval::from_raw(0, 1).expect("static");
    for (receiver, values) in contributions {
        let timed: Vec<(PropertyValue, Interval)> =
            values.into_iter().map(|v| (v, dummy)).collect();
        let folded = apply_agg(params.func, &timed)?;
        let entry = out.vertex_props.entry(receiver).or_default();
        merge_property(entry, &params.pname, folded);
    }
    Ok(out)
}

/// Sanity helper for tests: a snapshot's degree map.
pub fn snapshot_degrees(snap: &SnapshotGraph, directed: bool) -> BTreeMap<VertexId, usize> {
    let mut deg: BTreeMap<VertexId, usize> = snap.vertices.iter().map(|v| (*v, 0)).collect();
    for e in &snap.edges {
        *deg.get_mut(&e.dst).expect("endpoint present") += 1;
        if !directed && !e.is_loop() {
            *deg.get_mut(&e.src).expect("endpoint present") += 1;
        }
    }
    deg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::coauthors;
    use crate::time::TimePoint;

    fn iv(s: i64, e: i64) -> Interval {
        Interval::from_raw(s, e).unwrap()
    }

    #[test]
    fn build_and_stitch_round_trips() {
        let g = coauthors();
        let rg = RgRepr::build(&g);
        // Grid at every change point: {0,1,4,5,6,9,11} -> six slices.
        assert_eq!(rg.slices().len(), 6);
        let back = rg.to_tgraph();
        assert_eq!(back.vertices(), g.vertices());
        assert_eq!(back.edges(), g.edges());
        assert_eq!(back.vertex_attrs(), g.vertex_attrs());
        assert_eq!(back.edge_attrs(), g.edge_attrs());
    }

    #[test]
    fn slice_range_matches_relation_slice() {
        let g = coauthors();
        let rg = RgRepr::build(&g);
        let window = iv(2, 7);
        let narrowed = rg.slice_range(window).to_tgraph();
        let direct = g.slice(window);
        assert_eq!(narrowed.vertices(), direct.vertices());
        assert_eq!(narrowed.edges(), direct.edges());
        assert_eq!(narrowed.vertex_attrs(), direct.vertex_attrs());
        assert_eq!(narrowed.edge_attrs(), direct.edge_attrs());
    }

    #[test]
    fn snapshot_filter_matches_relation_filter() {
        let g = coauthors();
        let rg = RgRepr::build(&g);
        let pred = Expr::Binary(
            crate::expr::BinOp::Eq,
            Box::new(Expr::Prop(crate::expr::Scope::V, "school".to_string())),
            Box::new(Expr::Lit(PropertyValue::text("Drexel"))),
        );
        let native = rg.vsubgraph(&pred).unwrap().to_tgraph();
        let direct = g.vsubgraph(&pred).unwrap();
        assert_eq!(native.vertices(), direct.vertices());
        assert_eq!(native.edges(), direct.edges());
        assert_eq!(native.vertex_attrs(), direct.vertex_attrs());
    }

    #[test]
    fn per_slice_components_match_batched_components(){
        let g = coauthors();
        let rg = RgRepr::build(&g);
        let native = rg.connected_components("comp").unwrap().to_tgraph();
        let direct = crate::analytics::connected_components(&g, "comp").unwrap();
        assert_eq!(native.vertex_attrs(), direct.vertex_attrs());
        assert_eq!(native.vertices(), direct.vertices());
    }

    #[test]
    fn snapshot_degree_helper_counts_both_ends() {
        let g = coauthors();
        let snap = g.snapshot_at(TimePoint(2));
        let deg = snapshot_degrees(&snap, false);
        assert_eq!(deg[&VertexId(1)], 1);
        assert_eq!(deg[&VertexId(2)], 1);
    }

    #[test]
    fn merge_applies_specs_on_one_sided_periods() {
        // v1 lives only in the left input; union's resolve spec must still
        // consume "weight" there.
        let left = TGraph::from_consistent_parts(
            false,
            TemporalRelation::from_tuples([(VertexId(1), (), iv(0, 4))]),
            TemporalRelation::default(),
            TemporalRelation::from_tuples([(
                VertexId(1),
                crate::props! { "weight" => PropertyValue::Int(2) },
                iv(0, 4),
            )]),
            TemporalRelation::default(),
        );
        let right = TGraph::from_consistent_parts(
            false,
            TemporalRelation::from_tuples([(VertexId(2), (), iv(2, 6))]),
            TemporalRelation::default(),
            TemporalRelation::default(),
            TemporalRelation::default(),
        );
        let specs = [crate::agg::ResolveSpec::renamed(
            crate::agg::AggFunc::Count,
            "weight",
            "wn",
        )];
        let expect = left.union(&right, &specs, &[]).unwrap();
        let merged = RgRepr::build(&left)
            .merge(&RgRepr::build(&right), crate::repr::SetOpKind::Union, &specs, &[])
            .unwrap();
        assert_eq!(merged.to_tgraph(), expect);
    }
}
