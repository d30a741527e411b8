//! Analytics against independent references: component labels must match a
//! per-snapshot union-find, ranks must match a per-snapshot power iteration,
//! and the batched engine must agree with slice-by-slice execution.

use std::collections::BTreeMap;

use proptest::prelude::*;

use tgraph_core::analytics::{connected_components, pagerank, run_expr_program, ExprProgram};
use tgraph_core::expr::{Expr, FuncName, Scope};
use tgraph_core::generate::{corpus_graph, CorpusParams};
use tgraph_core::repr::RgRepr;
use tgraph_core::{AggFunc, PropertyValue, SnapshotGraph, TGraph, TimePoint, VertexId};

fn probes() -> impl Iterator<Item = TimePoint> {
    (0..22).map(TimePoint)
}

/// Plain union-find, the reference for component labels.
struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let r = self.find(self.0[i]);
            self.0[i] = r;
        }
        self.0[i]
    }
    fn join(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Smallest vertex id in each snapshot component, ignoring edge direction.
fn reference_components(s: &SnapshotGraph) -> BTreeMap<VertexId, i64> {
    let verts: Vec<VertexId> = s.vertices.iter().copied().collect();
    let idx: BTreeMap<VertexId, usize> = verts
        .iter()
        .enumerate()
        .map(|(i, v)| (*v, i))
        .collect();
    let mut dsu = Dsu::new(verts.len());
    for e in &s.edges {
        dsu.join(idx[&e.src], idx[&e.dst]);
    }
    let mut min_of_root: BTreeMap<usize, u64> = BTreeMap::new();
    for (i, v) in verts.iter().enumerate() {
        let r = dsu.find(i);
        let m = min_of_root.entry(r).or_insert(v.0);
        *m = (*m).min(v.0);
    }
    verts
        .iter()
        .enumerate()
        .map(|(i, v)| (*v, min_of_root[&dsu.find(i)] as i64))
        .collect()
}

/// Fixed-point rank iteration on one snapshot: every vertex starts at 1 and
/// each round scores `(1 - d) + d * sum(rank_in / out_degree_in)`.
fn reference_pagerank(s: &SnapshotGraph, damping: f64, rounds: usize) -> BTreeMap<VertexId, f64> {
    let verts: Vec<VertexId> = s.vertices.iter().copied().collect();
    let idx: BTreeMap<VertexId, usize> = verts
        .iter()
        .enumerate()
        .map(|(i, v)| (*v, i))
        .collect();
    let mut out_deg = vec![0usize; verts.len()];
    for e in &s.edges {
        out_deg[idx[&e.src]] += 1;
    }
    let mut rank = vec![1.0f64; verts.len()];
    for _ in 0..rounds {
        let mut sums = vec![0.0f64; verts.len()];
        for e in &s.edges {
            let u = idx[&e.src];
            sums[idx[&e.dst]] += rank[u] / out_deg[u] as f64;
        }
        for (r, sum) in rank.iter_mut().zip(&sums) {
            *r = (1.0 - damping) + damping * sum;
        }
    }
    verts
        .iter()
        .enumerate()
        .map(|(i, v)| (*v, rank[i]))
        .collect()
}

fn int_prop(s: &SnapshotGraph, v: &VertexId, name: &str) -> Option<i64> {
    match s.vertex_props.get(v).and_then(|ps| ps.get(name)) {
        Some(PropertyValue::Int(i)) => Some(*i),
        _ => None,
    }
}

fn float_prop(s: &SnapshotGraph, v: &VertexId, name: &str) -> Option<f64> {
    s.vertex_props
        .get(v)
        .and_then(|ps| ps.get(name))
        .and_then(|p| p.as_f64())
}

/// Maximum-id flood: a tiny script program that must agree across engines.
fn max_id_flood() -> ExprProgram {
    ExprProgram {
        init: Expr::Id(Scope::V),
        msg: Expr::State(Scope::V),
        combine: AggFunc::Max,
        update: Expr::Call(FuncName::Max, vec![Expr::State(Scope::V), Expr::MsgAgg]),
        tolerance: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn component_labels_match_union_find(seed in any::<u64>(), directed in any::<bool>()) {
        let p = CorpusParams { directed: Some(directed), ..CorpusParams::default() };
        let g = corpus_graph(seed, &p);
        let out = connected_components(&g, "comp").unwrap();
        prop_assert_eq!(out.validate(), vec![]);
        for c in probes() {
            let s = out.snapshot_at(c);
            let want = reference_components(&g.snapshot_at(c));
            prop_assert_eq!(s.vertices.len(), want.len());
            for v in &s.vertices {
                prop_assert_eq!(
                    int_prop(&s, v, "comp"), Some(want[v]),
                    "vertex {:?} at {:?}", v, c
                );
            }
        }
    }

    #[test]
    fn ranks_match_power_iteration(seed in any::<u64>()) {
        let p = CorpusParams {
            directed: Some(true),
            max_vertices: 30,
            ..CorpusParams::default()
        };
        let g = corpus_graph(seed, &p);
        let out = pagerank(&g, "rank", 0.85, 1e-9, 500).unwrap();
        prop_assert_eq!(out.validate(), vec![]);
        for c in probes() {
            let s = out.snapshot_at(c);
            let want = reference_pagerank(&g.snapshot_at(c), 0.85, 300);
            for v in &s.vertices {
                let got = float_prop(&s, v, "rank").expect("every present vertex is ranked");
                let expect = want[v];
                prop_assert!(
                    (got - expect).abs() <= 1e-6,
                    "vertex {:?} at {:?}: engine {} vs reference {}", v, c, got, expect
                );
            }
        }
    }

    #[test]
    fn batched_flood_matches_per_slice_flood(seed in any::<u64>(), directed in any::<bool>()) {
        let p = CorpusParams { directed: Some(directed), ..CorpusParams::default() };
        let g = corpus_graph(seed, &p);
        let batched = run_expr_program(&g, max_id_flood(), "mx", 400).unwrap();
        let per_slice: TGraph = RgRepr::build(&g)
            .pregel(&max_id_flood(), "mx", 400)
            .unwrap()
            .to_tgraph();
        prop_assert_eq!(batched, per_slice);
    }

    #[test]
    fn batched_components_match_per_slice_components(seed in any::<u64>(), directed in any::<bool>()) {
        let p = CorpusParams { directed: Some(directed), ..CorpusParams::default() };
        let g = corpus_graph(seed, &p);
        let batched = connected_components(&g, "comp").unwrap();
        let per_slice = RgRepr::build(&g)
            .connected_components("comp")
            .unwrap()
            .to_tgraph();
        prop_assert_eq!(batched, per_slice);
    }

    #[test]
    fn batched_ranks_match_per_slice_ranks_bitwise(seed in any::<u64>()) {
        let p = CorpusParams {
            directed: Some(true),
            max_vertices: 30,
            ..CorpusParams::default()
        };
        let g = corpus_graph(seed, &p);
        let batched = pagerank(&g, "rank", 0.85, 1e-9, 500).unwrap();
        let per_slice = RgRepr::build(&g)
            .pagerank("rank", 0.85, 1e-9, 500)
            .unwrap()
            .to_tgraph();
        // Per-interval trajectories are independent, so the floats agree to
        // the last bit and whole-graph equality is exact.
        prop_assert_eq!(batched, per_slice);
    }
}
