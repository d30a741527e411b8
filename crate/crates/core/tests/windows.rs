//! Window-zoom oracle: presence quantification over window grids is checked
//! against brute-force per-point counting, for every quantifier pair on both
//! entity kinds, with attribute folding recomputed from raw records.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use tgraph_core::agg::ResolveSpec;
use tgraph_core::generate::{corpus_graph, CorpusParams};
use tgraph_core::ops::{Quantifier, WindowKind};
use tgraph_core::{
    AggFunc, EdgeKey, Interval, PropertySet, PropertyValue, SnapshotGraph, TGraph, TimePoint,
    VertexId,
};

const QUANTIFIERS: [Quantifier; 4] = [
    Quantifier::All,
    Quantifier::Most,
    Quantifier::AtLeast(0.4),
    Quantifier::Exists,
];

/// Acceptance by point count, written out per quantifier.
fn accepts(q: Quantifier, covered: i64, len: i64) -> bool {
    let f = covered as f64 / len as f64;
    match q {
        Quantifier::All => covered == len,
        Quantifier::Most => 2 * covered > len,
        Quantifier::AtLeast(x) => f >= x,
        Quantifier::Exists => covered > 0,
    }
}

/// Strictness: accepts fewer presence fractions.
fn stricter(a: Quantifier, b: Quantifier) -> bool {
    fn threshold(q: Quantifier) -> (f64, bool) {
        match q {
            Quantifier::All => (1.0, true),
            Quantifier::Most => (0.5, false),
            Quantifier::AtLeast(x) => (x, true),
            Quantifier::Exists => (0.0, false),
        }
    }
    let ((la, ia), (lb, ib)) = (threshold(a), threshold(b));
    la > lb || (la == lb && !ia && ib)
}

/// All period endpoints in the graph, from raw tuples.
fn boundaries(g: &TGraph) -> Vec<i64> {
    let mut pts = BTreeSet::new();
    for (_, _, p) in g.vertices().iter() {
        pts.insert(p.start().0);
        pts.insert(p.end().0);
    }
    for (_, _, p) in g.edges().iter() {
        pts.insert(p.start().0);
        pts.insert(p.end().0);
    }
    for (_, _, p) in g.vertex_attrs().iter() {
        pts.insert(p.start().0);
        pts.insert(p.end().0);
    }
    for (_, _, p) in g.edge_attrs().iter() {
        pts.insert(p.start().0);
        pts.insert(p.end().0);
    }
    pts.into_iter().collect()
}

/// The window grid, rebuilt without the engine's helpers.
fn reference_windows(g: &TGraph, kind: &WindowKind) -> Vec<(i64, i64)> {
    let bs = boundaries(g);
    let (Some(lo), Some(hi)) = (bs.first().copied(), bs.last().copied()) else {
        return Vec::new();
    };
    if lo == hi {
        return Vec::new();
    }
    match kind {
        WindowKind::Lifetime => vec![(lo, hi)],
        WindowKind::Units(w) => {
            let mut out = Vec::new();
            let mut s = lo;
            while s < hi {
                out.push((s, (s + w).min(hi)));
                s += w;
            }
            out
        }
        WindowKind::Changes(n) => {
            let mut marks: Vec<i64> = bs.iter().copied().step_by(*n).collect();
            if *marks.last().unwrap() != hi {
                marks.push(hi);
            }
            marks.windows(2).map(|w| (w[0], w[1])).collect()
        }
    }
}

/// Points in `[s, e)` during which a key is present in the raw tuples.
fn covered<K: PartialEq>(tuples: &[(K, (), Interval)], key: &K, s: i64, e: i64) -> i64 {
    (s..e)
        .filter(|c| {
            tuples
                .iter()
                .any(|(k, _, p)| k == key && p.contains(TimePoint(*c)))
        })
        .count() as i64
}

/// Distinct-or-set fold used for unspecced names.
fn fold_distinct(vals: &[PropertyValue]) -> PropertyValue {
    let distinct: BTreeSet<PropertyValue> = vals.iter().cloned().collect();
    if distinct.len() == 1 {
        distinct.into_iter().next().unwrap()
    } else {
        PropertyValue::Set(distinct)
    }
}

/// Window fold of one entity's attribute records: per name, the values of
/// records overlapping the window. `count_name` maps through a count spec
/// into `count_out`; everything else keeps set semantics.
fn fold_window_attrs<K: PartialEq>(
    attrs: &[(K, PropertySet, Interval)],
    key: &K,
    s: i64,
    e: i64,
    count_name: Option<(&str, &str)>,
) -> PropertySet {
    let mut bag: BTreeMap<&String, Vec<PropertyValue>> = BTreeMap::new();
    for (k, ps, p) in attrs {
        if k != key || p.end().0 <= s || p.start().0 >= e {
            continue;
        }
        for (name, value) in ps.iter() {
            bag.entry(name).or_default().push(value.clone());
        }
    }
    let mut out = PropertySet::new();
    for (name, vals) in bag {
        match count_name {
            Some((input, output)) if input == name => {
                out.insert(output, PropertyValue::Int(vals.len() as i64));
            }
            _ => {
                out.insert(name.clone(), fold_distinct(&vals));
            }
        }
    }
    out
}

struct Expected {
    /// Window bounds and the qualifying vertices/edges of each window.
    windows: Vec<(i64, i64, BTreeSet<VertexId>, BTreeSet<EdgeKey>)>,
}

fn expected_memberships(
    g: &TGraph,
    kind: &WindowKind,
    qv: Quantifier,
    qe: Quantifier,
) -> Expected {
    let vkeys: BTreeSet<VertexId> = g.vertices().iter().map(|(v, _, _)| *v).collect();
    let ekeys: BTreeSet<EdgeKey> = g.edges().iter().map(|(e, _, _)| *e).collect();
    let mut windows = Vec::new();
    for (s, e) in reference_windows(g, kind) {
        let vs: BTreeSet<VertexId> = vkeys
            .iter()
            .filter(|v| accepts(qv, covered(g.vertices().tuples(), v, s, e), e - s))
            .copied()
            .collect();
        let mut es: BTreeSet<EdgeKey> = ekeys
            .iter()
            .filter(|k| accepts(qe, covered(g.edges().tuples(), k, s, e), e - s))
            .copied()
            .collect();
        if stricter(qv, qe) {
            es.retain(|k| vs.contains(&k.src) && vs.contains(&k.dst));
        }
        windows.push((s, e, vs, es));
    }
    Expected { windows }
}

fn expected_snapshot(
    g: &TGraph,
    expected: &Expected,
    c: i64,
    fv_count: Option<(&str, &str)>,
    fe_count: Option<(&str, &str)>,
) -> SnapshotGraph {
    let Some((s, e, vs, es)) = expected
        .windows
        .iter()
        .find(|(s, e, _, _)| *s <= c && c < *e)
        .map(|(s, e, vs, es)| (*s, *e, vs.clone(), es.clone()))
    else {
        return SnapshotGraph::default();
    };
    let mut vertex_props = BTreeMap::new();
    for v in &vs {
        let folded = fold_window_attrs(g.vertex_attrs().tuples(), v, s, e, fv_count);
        if !folded.is_empty() {
            vertex_props.insert(*v, folded);
        }
    }
    let mut edge_props = BTreeMap::new();
    for k in &es {
        let folded = fold_window_attrs(g.edge_attrs().tuples(), k, s, e, fe_count);
        if !folded.is_empty() {
            edge_props.insert(*k, folded);
        }
    }
    SnapshotGraph {
        vertices: vs,
        edges: es,
        vertex_props,
        edge_props,
    }
}

fn window_kinds() -> impl Strategy<Value = WindowKind> {
    prop_oneof![
        (1i64..10).prop_map(WindowKind::Units),
        (1usize..5).prop_map(WindowKind::Changes),
        Just(WindowKind::Lifetime),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    /// Every quantifier pair, default set-semantics folding.
    #[test]
    fn window_zoom_matches_point_counting(seed in any::<u64>(), kind in window_kinds()) {
        let g = corpus_graph(seed, &CorpusParams::default());
        for qv in QUANTIFIERS {
            for qe in QUANTIFIERS {
                let out = g.node_by_window(kind, qv, qe, &[], &[]).unwrap();
                assert_eq!(out.validate(), vec![]);
                let expected = expected_memberships(&g, &kind, qv, qe);
                for c in -1..23 {
                    let got = out.snapshot_at(TimePoint(c));
                    let want = expected_snapshot(&g, &expected, c, None, None);
                    prop_assert_eq!(
                        got, want,
                        "window zoom diverges at {} under {:?}/{:?}/{:?}", c, kind, qv, qe
                    );
                }
            }
        }
    }

    /// Spec-driven folding: counting records per window on both entity kinds.
    #[test]
    fn window_folds_apply_named_specs(seed in any::<u64>(), kind in window_kinds()) {
        let g = corpus_graph(seed, &CorpusParams::default());
        let fv = [ResolveSpec::renamed(AggFunc::Count, "weight", "wn")];
        let fe = [ResolveSpec::renamed(AggFunc::Count, "w", "wn")];
        let (qv, qe) = (Quantifier::Exists, Quantifier::Exists);
        let out = g.node_by_window(kind, qv, qe, &fv, &fe).unwrap();
        assert_eq!(out.validate(), vec![]);
        let expected = expected_memberships(&g, &kind, qv, qe);
        for c in -1..23 {
            let got = out.snapshot_at(TimePoint(c));
            let want = expected_snapshot(&g, &expected, c, Some(("weight", "wn")), Some(("w", "wn")));
            prop_assert_eq!(
                got, want,
                "spec folding diverges at {} under {:?}", c, kind
            );
        }
    }
}
