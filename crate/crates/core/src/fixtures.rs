//! Small hand-checked graphs shared by tests, benches, and documentation.
//!
//! The timeline of both fixtures is months, with index 0 standing for
//! 2015-01-15; index 1 is 2015-02-15, index 5 is 2015-06-15, and so on.

use crate::graph::{EdgeKey, TGraph, VertexId};
use crate::props;
use crate::relation::TemporalRelation;
use crate::time::Interval;

fn iv(s: i64, e: i64) -> Interval {
    Interval::from_raw(s, e).expect("fixture intervals are non-empty")
}

fn v(n: u64) -> VertexId {
    VertexId(n)
}

fn e(a: u64, b: u64) -> EdgeKey {
    EdgeKey::undirected(v(a), v(b))
}

/// An undirected co-authorship graph with three authors.
///
/// * v1 present `[0,11)`, v2 `[1,11)`, v3 `[6,11)`
/// * collaborations: (v1,v2) on `[1,5)` with 4 joint papers, (v2,v3) on
///   `[6,9)` with 2
/// * v1 is Ann at Drexel throughout; v2 is Bob at CUNY with a salary bump
///   from 100 to 200 at index 4, salary recorded until index 6; v3 is Cat at
///   Drexel from index 6
pub fn coauthors() -> TGraph {
    let tv = TemporalRelation::from_tuples(vec![
        (v(1), (), iv(0, 11)),
        (v(2), (), iv(1, 11)),
        (v(3), (), iv(6, 11)),
    ]);
    let te = TemporalRelation::from_tuples(vec![
        (e(1, 2), (), iv(1, 5)),
        (e(2, 3), (), iv(6, 9)),
    ]);
    let tav = TemporalRelation::from_tuples(vec![
        (v(1), props! {"name" => "Ann", "school" => "Drexel"}, iv(0, 11)),
        (
            v(2),
            props! {"name" => "Bob", "school" => "CUNY", "sal" => 100i64},
            iv(1, 4),
        ),
        (
            v(2),
            props! {"name" => "Bob", "school" => "CUNY", "sal" => 200i64},
            iv(4, 6),
        ),
        (v(3), props! {"name" => "Cat", "school" => "Drexel"}, iv(6, 11)),
    ]);
    let tae = TemporalRelation::from_tuples(vec![
        (e(1, 2), props! {"cnt" => 4i64}, iv(1, 5)),
        (e(2, 3), props! {"cnt" => 2i64}, iv(6, 9)),
    ]);
    TGraph::from_relations(false, tv, te, tav, tae).expect("fixture is consistent")
}

/// A second co-authorship graph sharing v1 and v2 with [`coauthors`] but with
/// different periods, a new author v4, and no v3. Used to exercise the
/// binary operators.
pub fn coauthors_alt() -> TGraph {
    let tv = TemporalRelation::from_tuples(vec![
        (v(1), (), iv(1, 5)),
        (v(2), (), iv(1, 3)),
        (v(4), (), iv(1, 7)),
    ]);
    let te = TemporalRelation::from_tuples(vec![
        (e(1, 2), (), iv(1, 3)),
        (e(1, 4), (), iv(2, 5)),
    ]);
    let tav = TemporalRelation::from_tuples(vec![
        (v(1), props! {"name" => "Ann", "school" => "CUNY"}, iv(1, 5)),
        (v(2), props! {"name" => "Bob"}, iv(1, 3)),
        (v(4), props! {"name" => "Dan", "school" => "CUNY"}, iv(1, 7)),
    ]);
    let tae = TemporalRelation::from_tuples(vec![(e(1, 2), props! {"cnt" => 1i64}, iv(1, 3))]);
    TGraph::from_relations(false, tv, te, tav, tae).expect("fixture is consistent")
}
