//! The temporal property graph: four valid-time relations plus global
//! consistency rules.
//!
//! * vertices (`tv`): vertex presence periods, unit payload
//! * edges (`te`): edge presence periods, unit payload
//! * vertex attributes (`tav`): one property set per vertex per point
//! * edge attributes (`tae`): one property set per edge per point
//!
//! Consistency rules checked by [`TGraph::validate`]:
//! R1 no entity occurs twice at one point, R2 at most one property set per
//! entity per point, R3 referential integrity (edges within both endpoints'
//! presence, attributes within their entity's presence), R4 all four
//! relations coalesced. Undirected graphs store each edge once, with
//! `src <= dst`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::agg::resolve;
use crate::error::GraphError;
use crate::relation::{change_points, RelItem, TemporalRelation};
use crate::time::{Interval, IntervalSet, TimePoint};
use crate::value::PropertySet;

/// Vertex identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Edge identifier: an ordered pair of vertices. Undirected graphs keep
/// `src <= dst` as the canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey {
    pub src: VertexId,
    pub dst: VertexId,
}

impl EdgeKey {
    pub fn new(src: VertexId, dst: VertexId) -> Self {
        EdgeKey { src, dst }
    }

    /// Canonical form for an undirected graph.
    pub fn undirected(a: VertexId, b: VertexId) -> Self {
        if a <= b {
            EdgeKey { src: a, dst: b }
        } else {
            EdgeKey { src: b, dst: a }
        }
    }

    pub fn canonical(&self, directed: bool) -> Self {
        if directed {
            *self
        } else {
            EdgeKey::undirected(self.src, self.dst)
        }
    }

    pub fn is_loop(&self) -> bool {
        self.src == self.dst
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.src, self.dst)
    }
}

pub type VertexRelation = TemporalRelation<VertexId, ()>;
pub type EdgeRelation = TemporalRelation<EdgeKey, ()>;
pub type VertexAttrRelation = TemporalRelation<VertexId, PropertySet>;
pub type EdgeAttrRelation = TemporalRelation<EdgeKey, PropertySet>;

/// A consistency violation found by [`TGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// R1/R2: two records for one entity share a time point.
    OverlappingRecords {
        relation: &'static str,
        entity: String,
        at: TimePoint,
        distinct_values: bool,
    },
    /// R3: a record lies outside the presence of what it references.
    DanglingReference {
        relation: &'static str,
        entity: String,
        missing: String,
        at: TimePoint,
    },
    /// R4: a relation holds mergeable value-equal tuples.
    NotCoalesced {
        relation: &'static str,
        entity: String,
        at: TimePoint,
    },
    /// An undirected graph stores an edge with src > dst.
    NonCanonicalEdge { edge: EdgeKey },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OverlappingRecords {
                relation,
                entity,
                at,
                distinct_values,
            } => {
                let kind = if *distinct_values { "R2" } else { "R1" };
                write!(f, "{kind}: {relation} holds overlapping records for {entity} at {at}")
            }
            Violation::DanglingReference {
                relation,
                entity,
                missing,
                at,
            } => write!(f, "R3: {relation} record for {entity} references absent {missing} at {at}"),
            Violation::NotCoalesced {
                relation,
                entity,
                at,
            } => write!(f, "R4: {relation} is not coalesced around {entity} at {at}"),
            Violation::NonCanonicalEdge { edge } => {
                write!(f, "undirected edge {edge} is not stored in canonical order")
            }
        }
    }
}

/// The state of a temporal graph at one time point.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SnapshotGraph {
    pub vertices: BTreeSet<VertexId>,
    pub edges: BTreeSet<EdgeKey>,
    pub vertex_props: BTreeMap<VertexId, PropertySet>,
    pub edge_props: BTreeMap<EdgeKey, PropertySet>,
}

impl SnapshotGraph {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.edges.is_empty()
    }
}

/// A temporal property graph. Construction establishes the consistency
/// rules; operators preserve them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TGraph {
    directed: bool,
    tv: VertexRelation,
    te: EdgeRelation,
    tav: VertexAttrRelation,
    tae: EdgeAttrRelation,
}

impl TGraph {
    /// An empty graph.
    pub fn empty(directed: bool) -> Self {
        TGraph {
            directed,
            tv: TemporalRelation::new(),
            te: TemporalRelation::new(),
            tav: TemporalRelation::new(),
            tae: TemporalRelation::new(),
        }
    }

    /// Assembles a consistent graph from arbitrary relations.
    ///
    /// Steps: canonicalize undirected edge keys, coalesce presence relations,
    /// resolve attribute relations with default specs (conflicting values
    /// become sets), trim attributes to entity presence and edges to endpoint
    /// presence. For an undirected graph, attribute records arriving under
    /// both orientations of one edge with different property sets at a shared
    /// point are rejected as an attempt to store parallel edges.
    pub fn from_relations(
        directed: bool,
        tv: VertexRelation,
        te: EdgeRelation,
        tav: VertexAttrRelation,
        tae: EdgeAttrRelation,
    ) -> Result<Self, GraphError> {
        let (te, tae) = if directed {
            (te, tae)
        } else {
            check_orientation_conflict(&tae)?;
            let te = TemporalRelation::from_tuples(
                te.iter().map(|(e, (), p)| (e.canonical(false), (), *p)),
            );
            let tae = TemporalRelation::from_tuples(
                tae.iter().map(|(e, ps, p)| (e.canonical(false), ps.clone(), *p)),
            );
            (te, tae)
        };
        let tv = tv.coalesce();
        let te = constrain_edges(&te.coalesce(), &tv);
        let tav = resolve(&[], &tav)?;
        let tae = resolve(&[], &tae)?;
        let tav = constrain_vertex_attrs(&tav, &tv);
        let tae = constrain_edge_attrs(&tae, &te);
        Ok(TGraph {
            directed,
            tv,
            te,
            tav,
            tae,
        })
    }

    /// Wraps relations that already satisfy every rule. Used by operators
    /// whose outputs are consistent by construction; debug builds verify.
    pub(crate) fn from_consistent_parts(
        directed: bool,
        tv: VertexRelation,
        te: EdgeRelation,
        tav: VertexAttrRelation,
        tae: EdgeAttrRelation,
    ) -> Self {
        let g = TGraph {
            directed,
            tv,
            te,
            tav,
            tae,
        };
        debug_assert!(g.validate().is_empty(), "inconsistent parts: {:?}", g.validate());
        g
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    /// The same topology with every vertex and edge attribute dropped.
    pub fn strip_attrs(&self) -> TGraph {
        TGraph {
            directed: self.directed,
            tv: self.tv.clone(),
            te: self.te.clone(),
            tav: TemporalRelation::new(),
            tae: TemporalRelation::new(),
        }
    }

    /// True when the graph carries no vertex or edge attributes.
    pub fn is_attr_free(&self) -> bool {
        self.tav.is_empty() && self.tae.is_empty()
    }

    pub fn vertices(&self) -> &VertexRelation {
        &self.tv
    }

    pub fn edges(&self) -> &EdgeRelation {
        &self.te
    }

    pub fn vertex_attrs(&self) -> &VertexAttrRelation {
        &self.tav
    }

    pub fn edge_attrs(&self) -> &EdgeAttrRelation {
        &self.tae
    }

    pub fn is_empty(&self) -> bool {
        self.tv.is_empty() && self.te.is_empty()
    }

    /// Earliest start and latest end across all four relations.
    pub fn lifetime(&self) -> Option<Interval> {
        let mut pts = self.change_points().into_iter();
        let first = pts.next()?;
        let last = pts.last().unwrap_or(first);
        Interval::new(first, last).ok()
    }

    /// Distinct period endpoints across all four relations.
    pub fn change_points(&self) -> Vec<TimePoint> {
        change_points(&[
            self.tv.boundary_points(),
            self.te.boundary_points(),
            self.tav.boundary_points(),
            self.tae.boundary_points(),
        ])
    }

    /// Distinct period endpoints of the presence relations only.
    pub fn topology_change_points(&self) -> Vec<TimePoint> {
        change_points(&[self.tv.boundary_points(), self.te.boundary_points()])
    }

    /// The nontemporal graph valid at point `c`.
    pub fn snapshot_at(&self, c: TimePoint) -> SnapshotGraph {
        SnapshotGraph {
            vertices: self.tv.at(c).map(|(v, _)| *v).collect(),
            edges: self.te.at(c).map(|(e, _)| *e).collect(),
            vertex_props: self.tav.at(c).map(|(v, ps)| (*v, ps.clone())).collect(),
            edge_props: self.tae.at(c).map(|(e, ps)| (*e, ps.clone())).collect(),
        }
    }

    /// Checks every consistency rule and reports each violation once.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        overlap_violations("vertices", &self.tv, &mut out);
        overlap_violations("edges", &self.te, &mut out);
        overlap_violations("vertex attributes", &self.tav, &mut out);
        overlap_violations("edge attributes", &self.tae, &mut out);

        if !self.directed {
            for (e, (), _) in self.te.iter() {
                if e.src > e.dst {
                    let v = Violation::NonCanonicalEdge { edge: *e };
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
        }

        // R3: every edge period inside both endpoints' presence.
        let vertex_presence = presence_index(&self.tv);
        for (e, (), p) in self.te.iter() {
            for (role, end) in [("src", e.src), ("dst", e.dst)] {
                let covered = vertex_presence
                    .get(&end)
                    .map(|s| IntervalSet::from_intervals([*p]).within(s))
                    .unwrap_or(false);
                if !covered {
                    out.push(Violation::DanglingReference {
                        relation: "edges",
                        entity: e.to_string(),
                        missing: format!("{role} vertex {end}"),
                        at: first_uncovered(p, vertex_presence.get(&end)),
                    });
                }
            }
        }
        // R3: attributes inside their entity's presence.
        for (v, _, p) in self.tav.iter() {
            let covered = vertex_presence
                .get(v)
                .map(|s| IntervalSet::from_intervals([*p]).within(s))
                .unwrap_or(false);
            if !covered {
                out.push(Violation::DanglingReference {
                    relation: "vertex attributes",
                    entity: v.to_string(),
                    missing: format!("vertex {v}"),
                    at: first_uncovered(p, vertex_presence.get(v)),
                });
            }
        }
        let edge_presence = presence_index(&self.te);
        for (e, _, p) in self.tae.iter() {
            let covered = edge_presence
                .get(e)
                .map(|s| IntervalSet::from_intervals([*p]).within(s))
                .unwrap_or(false);
            if !covered {
                out.push(Violation::DanglingReference {
                    relation: "edge attributes",
                    entity: e.to_string(),
                    missing: format!("edge {e}"),
                    at: first_uncovered(p, edge_presence.get(e)),
                });
            }
        }
        out
    }

    /// Replaces the four relations wholesale; callers restore consistency.
    pub(crate) fn with_parts(
        &self,
        tv: VertexRelation,
        te: EdgeRelation,
        tav: VertexAttrRelation,
        tae: EdgeAttrRelation,
    ) -> TGraph {
        TGraph {
            directed: self.directed,
            tv,
            te,
            tav,
            tae,
        }
    }
}

/// Presence sets of every key in a unit relation.
pub(crate) fn presence_index<K: RelItem>(
    r: &TemporalRelation<K, ()>,
) -> BTreeMap<K, IntervalSet> {
    let mut map: BTreeMap<K, Vec<Interval>> = BTreeMap::new();
    for (k, (), p) in r.iter() {
        map.entry(k.clone()).or_default().push(*p);
    }
    map.into_iter()
        .map(|(k, ps)| (k, IntervalSet::from_intervals(ps)))
        .collect()
}

fn first_uncovered(p: &Interval, presence: Option<&IntervalSet>) -> TimePoint {
    match presence {
        None => p.start(),
        Some(s) => {
            let gap = IntervalSet::from_intervals([*p]).subtract(s);
            gap.runs().first().map(|r| r.start()).unwrap_or(p.start())
        }
    }
}

fn overlap_violations<K: RelItem + fmt::Display, V: RelItem>(
    relation: &'static str,
    r: &TemporalRelation<K, V>,
    out: &mut Vec<Violation>,
) {
    // Tuples sort by (key, start), so one forward scan finds overlaps and
    // mergeable neighbours.
    let tuples = r.tuples();
    for i in 0..tuples.len() {
        let (k, v, p) = &tuples[i];
        for (k2, v2, p2) in tuples.iter().skip(i + 1) {
            // Later tuples of the same key start no earlier; once one starts
            // past p's end it can neither overlap nor touch p.
            if k2 != k || p2.start() > p.end() {
                break;
            }
            if p.overlaps(p2) {
                out.push(Violation::OverlappingRecords {
                    relation,
                    entity: k.to_string(),
                    at: p.intersect(p2).expect("overlap checked").start(),
                    distinct_values: v != v2,
                });
            } else if p.merges_with(p2) && v == v2 {
                out.push(Violation::NotCoalesced {
                    relation,
                    entity: k.to_string(),
                    at: p.end().min(p2.end()),
                });
            }
        }
    }
}

/// Trims every tuple of `r` to the presence of the key produced by `refs`.
/// Output point semantics: `(k, v)` survives at `c` iff it held at `c` and
/// every referenced key is present at `c`. Output is coalesced.
pub fn constrain<K: RelItem, V: RelItem, S: RelItem>(
    r: &TemporalRelation<K, V>,
    presence: &BTreeMap<S, IntervalSet>,
    refs: impl Fn(&K) -> Vec<S>,
) -> TemporalRelation<K, V> {
    let mut tuples = Vec::new();
    for (k, v, p) in r.iter() {
        let mut allowed = IntervalSet::from_intervals([*p]);
        for s in refs(k) {
            match presence.get(&s) {
                Some(ps) => allowed = allowed.intersect(ps),
                None => {
                    allowed = IntervalSet::empty();
                }
            }
            if allowed.is_empty() {
                break;
            }
        }
        for piece in allowed.runs() {
            tuples.push((k.clone(), v.clone(), *piece));
        }
    }
    TemporalRelation::from_tuples(tuples).coalesce()
}

/// Edges trimmed to both endpoints' presence.
pub fn constrain_edges(te: &EdgeRelation, tv: &VertexRelation) -> EdgeRelation {
    let presence = presence_index(tv);
    constrain(te, &presence, |e: &EdgeKey| {
        if e.is_loop() {
            vec![e.src]
        } else {
            vec![e.src, e.dst]
        }
    })
}

/// Vertex attributes trimmed to vertex presence.
pub fn constrain_vertex_attrs(tav: &VertexAttrRelation, tv: &VertexRelation) -> VertexAttrRelation {
    let presence = presence_index(tv);
    constrain(tav, &presence, |v: &VertexId| vec![*v])
}

/// Edge attributes trimmed to edge presence.
pub fn constrain_edge_attrs(tae: &EdgeAttrRelation, te: &EdgeRelation) -> EdgeAttrRelation {
    let presence = presence_index(te);
    constrain(tae, &presence, |e: &EdgeKey| vec![*e])
}

/// Rejects undirected attribute input that stores different property sets
/// under the two orientations of one edge at a shared point.
fn check_orientation_conflict(tae: &EdgeAttrRelation) -> Result<(), GraphError> {
    let mut by_pair: BTreeMap<EdgeKey, Vec<(EdgeKey, &PropertySet, Interval)>> = BTreeMap::new();
    for (e, ps, p) in tae.iter() {
        by_pair
            .entry(e.canonical(false))
            .or_default()
            .push((*e, ps, *p));
    }
    for (pair, rows) in by_pair {
        for (i, (ea, psa, pa)) in rows.iter().enumerate() {
            for (eb, psb, pb) in rows.iter().skip(i + 1) {
                if ea != eb && psa != psb {
                    if let Some(shared) = pa.intersect(pb) {
                        return Err(GraphError::MultigraphAttempt {
                            src: pair.src.0,
                            dst: pair.dst.0,
                            at: shared.start(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}
