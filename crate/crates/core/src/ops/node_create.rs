//! Node-creation operators: collapse vertices by attribute values, or zoom
//! the timeline out into windows.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::agg::{resolve, set_reduce, ResolveSpec, TimedValue};
use crate::error::GraphError;
use crate::graph::{constrain_edges, EdgeKey, TGraph, VertexId};
use crate::relation::TemporalRelation;
use crate::time::{Interval, IntervalSet, TimePoint};
use crate::value::{PropertySet, PropertyValue};

use super::vertex_rows;

/// One grouping dimension of [`node_by_attrs`]: an attribute name or a
/// constant (grouping by a constant puts every vertex in one group).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupAttr {
    Property(String),
    Constant(PropertyValue),
}

impl GroupAttr {
    fn label(&self) -> String {
        match self {
            GroupAttr::Property(n) => format!("a:{n}"),
            GroupAttr::Constant(c) => format!("c:{c}"),
        }
    }
}

/// Deterministic synthetic vertex id for a group-value combination.
///
/// The id is a cryptographic digest of the labelled values, so equal groups
/// get equal ids in any run, on any execution path.
pub fn skolem_id(labelled_values: &[(String, PropertyValue)]) -> VertexId {
    let mut hasher = Sha256::new();
    for (label, value) in labelled_values {
        hasher.update(label.as_bytes());
        hasher.update([0x1]);
        hasher.update(value.to_string().as_bytes());
        hasher.update([0x2]);
    }
    let digest = hasher.finalize();
    VertexId(u64::from_be_bytes(digest[..8].try_into().expect("8 bytes")))
}

/// Collapses vertices sharing the values of `groups` into one vertex per
/// point. Edges map to edges between group vertices (self-loops allowed);
/// member attributes are folded per group by `fv`, member edge attributes by
/// `fe`. Vertices missing a grouping attribute at a point stay out of every
/// group at that point.
pub fn node_by_attrs(
    t: &TGraph,
    groups: &[GroupAttr],
    fv: &[ResolveSpec],
    fe: &[ResolveSpec],
) -> Result<TGraph, GraphError> {
    if groups.is_empty() {
        return Err(GraphError::Unsupported(
            "grouping needs at least one attribute or constant".to_string(),
        ));
    }
    // Piece-wise membership: member vertex -> (period, group id).
    let mut membership: BTreeMap<VertexId, Vec<(Interval, VertexId)>> = BTreeMap::new();
    let mut group_values: BTreeMap<VertexId, Vec<(String, PropertyValue)>> = BTreeMap::new();
    let mut tv_rows: Vec<(VertexId, (), Interval)> = Vec::new();
    let mut tav_rows: Vec<(VertexId, PropertySet, Interval)> = Vec::new();

    for (member, props, piece) in vertex_rows(t) {
        let mut key: Vec<(String, PropertyValue)> = Vec::with_capacity(groups.len());
        let mut complete = true;
        for g in groups {
            let value = match g {
                GroupAttr::Constant(c) => Some(c.clone()),
                GroupAttr::Property(name) => props.and_then(|ps| ps.get(name)).cloned(),
            };
            match value {
                Some(v) => key.push((g.label(), v)),
                None => {
                    complete = false;
                    break;
                }
            }
        }
        if !complete {
            continue;
        }
        let gid = skolem_id(&key);
        match group_values.get(&gid) {
            Some(existing) if existing != &key => {
                return Err(GraphError::SkolemCollision {
                    a: format!("{existing:?}"),
                    b: format!("{key:?}"),
                });
            }
            None => {
                group_values.insert(gid, key);
            }
            _ => {}
        }
        membership.entry(member).or_default().push((piece, gid));
        tv_rows.push((gid, (), piece));
        if let Some(ps) = props {
            if !ps.is_empty() {
                tav_rows.push((gid, ps.clone(), piece));
            }
        }
    }

    let tv = TemporalRelation::from_tuples(tv_rows).coalesce();
    let tav = resolve(fv, &TemporalRelation::from_tuples(tav_rows))?;

    // Map each edge piece-wise through both endpoints' memberships.
    let lookup = |v: VertexId, at: TimePoint| -> Option<VertexId> {
        membership
            .get(&v)?
            .iter()
            .find(|(p, _)| p.contains(at))
            .map(|(_, gid)| *gid)
    };
    let mut te_rows: Vec<(EdgeKey, (), Interval)> = Vec::new();
    let mut tae_rows: Vec<(EdgeKey, PropertySet, Interval)> = Vec::new();
    let eattrs = super::attr_index(t.edge_attrs());
    let no_attrs: Vec<(&PropertySet, Interval)> = Vec::new();
    for (ekey, (), p) in t.edges().iter() {
        let mut bounds: Vec<TimePoint> = [ekey.src, ekey.dst]
            .iter()
            .filter_map(|v| membership.get(v))
            .flatten()
            .flat_map(|(mp, _)| [mp.start(), mp.end()])
            .chain(
                eattrs
                    .get(ekey)
                    .unwrap_or(&no_attrs)
                    .iter()
                    .flat_map(|(_, ap)| [ap.start(), ap.end()]),
            )
            .filter(|b| *b > p.start() && *b < p.end())
            .collect();
        bounds.sort();
        bounds.dedup();
        bounds.push(p.end());
        let mut cut = p.start();
        for b in bounds {
            let piece = Interval::new(cut, b).expect("bounds ascend");
            cut = b;
            let (Some(ga), Some(gb)) = (
                lookup(ekey.src, piece.start()),
                lookup(ekey.dst, piece.start()),
            ) else {
                continue;
            };
            let gkey = EdgeKey::new(ga, gb).canonical(t.directed());
            te_rows.push((gkey, (), piece));
            if let Some(ps) = eattrs
                .get(ekey)
                .unwrap_or(&no_attrs)
                .iter()
                .find(|(_, ap)| ap.contains(piece.start()))
                .map(|(ps, _)| *ps)
            {
                tae_rows.push((gkey, ps.clone(), piece));
            }
        }
    }
    let te = TemporalRelation::from_tuples(te_rows).coalesce();
    let tae = resolve(fe, &TemporalRelation::from_tuples(tae_rows))?;
    Ok(TGraph::from_consistent_parts(t.directed(), tv, te, tav, tae))
}

/// Window shape for [`node_by_window`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    /// Fixed width in timeline units, anchored at the graph's earliest point.
    /// The last window is truncated at the graph's lifetime end.
    Units(i64),
    /// Every `n` change points of the graph starts a new window.
    Changes(usize),
    /// One window spanning the whole lifetime.
    Lifetime,
}

/// How much of a window an entity must be present for to count as present in
/// that window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantifier {
    /// The whole window.
    All,
    /// More than half of it.
    Most,
    /// At least this fraction of it (inclusive).
    AtLeast(f64),
    /// Any point of it.
    Exists,
}

impl Quantifier {
    /// Lower bound of accepted presence fractions, and whether the bound
    /// itself is accepted.
    fn threshold(&self) -> (f64, bool) {
        match self {
            Quantifier::All => (1.0, true),
            Quantifier::Most => (0.5, false),
            Quantifier::AtLeast(x) => (*x, true),
            Quantifier::Exists => (0.0, false),
        }
    }

    pub fn accepts(&self, covered: i64, window_len: i64) -> bool {
        let f = covered as f64 / window_len as f64;
        let (lb, inclusive) = self.threshold();
        if inclusive {
            f >= lb
        } else {
            f > lb
        }
    }

    /// True when `self` accepts strictly fewer presence fractions.
    pub fn stricter_than(&self, other: &Quantifier) -> bool {
        let (la, ia) = self.threshold();
        let (lb, ib) = other.threshold();
        la > lb || (la == lb && !ia && ib)
    }
}

/// Materializes the window grid for a graph.
pub fn windows_for(t: &TGraph, kind: WindowKind) -> Result<Vec<Interval>, GraphError> {
    let Some(lifetime) = t.lifetime() else {
        return Ok(Vec::new());
    };
    match kind {
        WindowKind::Lifetime => Ok(vec![lifetime]),
        WindowKind::Units(w) => {
            if w <= 0 {
                return Err(crate::error::TemporalError::NonPositiveWindow(w).into());
            }
            let mut out = Vec::new();
            let mut ws = lifetime.start().0;
            while ws < lifetime.end().0 {
                let we = (ws + w).min(lifetime.end().0);
                out.push(Interval::from_raw(ws, we).expect("ws < we"));
                ws = we;
            }
            Ok(out)
        }
        WindowKind::Changes(n) => {
            if n == 0 {
                return Err(crate::error::TemporalError::NonPositiveStride(n).into());
            }
            let cps = t.change_points();
            let mut marks: Vec<TimePoint> = cps.iter().copied().step_by(n).collect();
            if *marks.last().expect("non-empty graph has change points")
                != *cps.last().expect("checked")
            {
                marks.push(*cps.last().expect("checked"));
            }
            Ok(marks
                .windows(2)
                .map(|w| Interval::new(w[0], w[1]).expect("marks ascend"))
                .collect())
        }
    }
}

/// Zooms the timeline out to a window grid.
///
/// An entity is present in a window when its covered fraction satisfies the
/// quantifier (`qv` for vertices, `qe` for edges); qualifying entities are
/// stamped with the whole window. Attribute values recorded during a window
/// are folded per window by `fv`/`fe` (set semantics by default). When the
/// vertex quantifier is stricter than the edge quantifier, edges are
/// additionally trimmed to their endpoints' windows.
pub fn node_by_window(
    t: &TGraph,
    kind: WindowKind,
    qv: Quantifier,
    qe: Quantifier,
    fv: &[ResolveSpec],
    fe: &[ResolveSpec],
) -> Result<TGraph, GraphError> {
    let windows = windows_for(t, kind)?;
    node_by_window_from_presence(
        t.directed(),
        &crate::graph::presence_index(t.vertices()),
        t.vertex_attrs(),
        &crate::graph::presence_index(t.edges()),
        t.edge_attrs(),
        &windows,
        qv,
        qe,
        fv,
        fe,
    )
}

/// Window zoom over prebuilt presence indexes. Representations that keep
/// presence in their own structures call this directly.
#[allow(clippy::too_many_arguments)]
pub(crate) fn node_by_window_from_presence(
    directed: bool,
    vpres: &BTreeMap<crate::graph::VertexId, IntervalSet>,
    vattrs: &TemporalRelation<crate::graph::VertexId, PropertySet>,
    epres: &BTreeMap<EdgeKey, IntervalSet>,
    eattrs: &TemporalRelation<EdgeKey, PropertySet>,
    windows: &[Interval],
    qv: Quantifier,
    qe: Quantifier,
    fv: &[ResolveSpec],
    fe: &[ResolveSpec],
) -> Result<TGraph, GraphError> {
    if windows.is_empty() {
        return Ok(TGraph::empty(directed));
    }
    let (tv, tav) = windowed_relation(vpres, vattrs, windows, qv, fv)?;
    let (te_raw, tae_raw) = windowed_relation(epres, eattrs, windows, qe, fe)?;
    let (te, tae) = if qv.stricter_than(&qe) {
        let te = constrain_edges(&te_raw, &tv);
        let tae = crate::graph::constrain_edge_attrs(&tae_raw, &te);
        (te, tae)
    } else {
        (te_raw, tae_raw)
    };
    Ok(TGraph::from_consistent_parts(directed, tv, te, tav, tae))
}

/// Window-quantified presence and per-window attribute folding for one
/// entity class.
fn windowed_relation<K: crate::relation::RelItem>(
    pres: &BTreeMap<K, IntervalSet>,
    attrs: &TemporalRelation<K, PropertySet>,
    windows: &[Interval],
    q: Quantifier,
    specs: &[ResolveSpec],
) -> Result<(TemporalRelation<K, ()>, TemporalRelation<K, PropertySet>), GraphError> {
    let attr_idx = super::attr_index(attrs);
    let mut unit_rows: Vec<(K, (), Interval)> = Vec::new();
    let mut attr_rows: Vec<(K, PropertySet, Interval)> = Vec::new();
    for (k, pset) in pres {
        for w in windows {
            let covered = pset.clip(w).covered_length();
            if covered == 0 || !q.accepts(covered, w.length()) {
                continue;
            }
            unit_rows.push((k.clone(), (), *w));
            // Fold attribute values recorded during this window. Clipped
            // periods order `first`/`last`/`list` within the window.
            if let Some(recs) = attr_idx.get(k) {
                let mut bag: BTreeMap<&String, Vec<TimedValue>> = BTreeMap::new();
                for (ps, rp) in recs {
                    if let Some(clipped) = rp.intersect(w) {
                        for (name, value) in ps.iter() {
                            bag.entry(name).or_default().push((value.clone(), clipped));
                        }
                    }
                }
                if !bag.is_empty() {
                    let mut folded = PropertySet::new();
                    for (name, vals) in bag {
                        let matching: Vec<&ResolveSpec> =
                            specs.iter().filter(|s| s.input == *name).collect();
                        if matching.is_empty() {
                            folded.insert(name.clone(), set_reduce(&vals));
                        } else {
                            for spec in matching {
                                folded.insert(spec.output.clone(), crate::agg::apply_agg(spec.func, &vals)?);
                            }
                        }
                    }
                    if !folded.is_empty() {
                        attr_rows.push((k.clone(), folded, *w));
                    }
                }
            }
        }
    }
    Ok((
        TemporalRelation::from_tuples(unit_rows).coalesce(),
        TemporalRelation::from_tuples(attr_rows).coalesce(),
    ))
}
