//! Iterative graph analytics over evolving topology. The timeline is cut
//! into intervals of constant topology and a vertex-centric program runs
//! over all intervals at once, sharing message payloads across intervals
//! where the sender's state is unchanged and halting each interval on its
//! own convergence.

mod engine;
mod programs;
mod topology;

pub use engine::{run_program, IntervalMessage, PregelOutcome, VertexProgram};
pub use programs::{
    attach_vertex_states, connected_components, connected_components_on, pagerank, pagerank_on,
    rank_of, run_expr_program, run_expr_program_on, static_pagerank_reference, ExprProgram,
    MinIdComponents, PageRank,
};
pub use topology::TemporalTopology;
