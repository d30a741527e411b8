//! Shared setup for the criterion benchmarks: seeded graphs sized so every
//! suite measures the same data.

use tgraph_core::generate::{evolving_graph, GenConfig};
use tgraph_core::TGraph;

/// An undirected churn graph with roughly one representative interval per
/// time point.
pub fn churn_graph(time_points: i64, initial_edges: usize, vertices: usize) -> TGraph {
    let report = evolving_graph(&GenConfig {
        vertices,
        time_points,
        initial_edges,
        evolution_rate: 0.4,
        directed: false,
        with_attrs: false,
        seed: 42,
    })
    .expect("bench configuration is valid");
    report.graph
}

/// The directed variant, for pagerank suites.
pub fn churn_graph_directed(time_points: i64, initial_edges: usize, vertices: usize) -> TGraph {
    let report = evolving_graph(&GenConfig {
        vertices,
        time_points,
        initial_edges,
        evolution_rate: 0.4,
        directed: true,
        with_attrs: false,
        seed: 43,
    })
    .expect("bench configuration is valid");
    report.graph
}
