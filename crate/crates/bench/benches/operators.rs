//! Operator micro-benchmarks across physical forms: slice as the window
//! widens (relation form vs snapshot sequence) and window zoom on the
//! bitmap form as the window size changes.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tgraph_bench::churn_graph;
use tgraph_core::ops::{Quantifier, WindowKind};
use tgraph_core::repr::{OgRepr, RgRepr};
use tgraph_core::{Interval, TimePoint};

fn bench_slice(c: &mut Criterion) {
    let g = churn_graph(64, 400, 200);
    let rg = RgRepr::build(&g);
    let mut group = c.benchmark_group("slice");
    group.sample_size(20);
    for width in [8i64, 16, 32] {
        let window = Interval::new(TimePoint(8), TimePoint(8 + width)).unwrap();
        group.bench_with_input(BenchmarkId::new("ve", width), &window, |b, w| {
            b.iter(|| g.slice(*w))
        });
        group.bench_with_input(BenchmarkId::new("rg", width), &window, |b, w| {
            b.iter(|| rg.slice_range(*w).to_tgraph())
        });
    }
    group.finish();
}

fn bench_node_w(c: &mut Criterion) {
    let g = churn_graph(64, 400, 200);
    let og = OgRepr::build(&g);
    let mut group = c.benchmark_group("node_w");
    group.sample_size(20);
    for width in [4i64, 8, 16] {
        group.bench_with_input(BenchmarkId::new("og-units", width), &width, |b, w| {
            b.iter(|| {
                og.node_by_window(
                    WindowKind::Units(*w),
                    Quantifier::All,
                    Quantifier::Exists,
                    &[],
                    &[],
                )
                .unwrap()
            })
        });
        group.bench_with_input(BenchmarkId::new("ve-units", width), &width, |b, w| {
            b.iter(|| {
                g.node_by_window(
                    WindowKind::Units(*w),
                    Quantifier::All,
                    Quantifier::Exists,
                    &[],
                    &[],
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_set_ops(c: &mut Criterion) {
    let a = churn_graph(32, 300, 150);
    let b = churn_graph(32, 280, 150);
    let oa = OgRepr::build(&a);
    let ob = OgRepr::build(&b);
    let mut group = c.benchmark_group("union");
    group.sample_size(20);
    group.bench_function("ve", |bch| b_iter_union_ve(bch, &a, &b));
    group.bench_function("og-bitmaps", |bch| {
        bch.iter(|| oa.merge(&ob, tgraph_core::repr::SetOpKind::Union).unwrap())
    });
    group.finish();
}

fn b_iter_union_ve(bch: &mut criterion::Bencher, a: &tgraph_core::TGraph, b: &tgraph_core::TGraph) {
    bch.iter(|| a.union(b, &[], &[]).unwrap());
}

criterion_group!(benches, bench_slice, bench_node_w, bench_set_ops);
criterion_main!(benches);
