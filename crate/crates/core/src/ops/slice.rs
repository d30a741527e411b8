//! Timeline windowing.

use crate::graph::TGraph;
use crate::time::Interval;

/// Restricts a graph to `window`: every record is clipped to it, records
/// entirely outside disappear. For any point inside the window the snapshot
/// is unchanged; outside it is empty.
pub fn slice(t: &TGraph, window: Interval) -> TGraph {
    t.with_parts(
        t.vertices().clip(&window),
        t.edges().clip(&window),
        t.vertex_attrs().clip(&window),
        t.edge_attrs().clip(&window),
    )
}

#[cfg(test)]
mod tests {
    use crate::fixtures::coauthors;
    use crate::time::{Interval, TimePoint};

    #[test]
    fn slice_clips_all_four_relations() {
        let g = coauthors();
        let s = g.slice(Interval::from_raw(2, 7).unwrap());
        assert_eq!(s.validate(), vec![]);
        for c in 0..12 {
            let here = s.snapshot_at(TimePoint(c));
            if (2..7).contains(&c) {
                assert_eq!(here, g.snapshot_at(TimePoint(c)), "point {c}");
            } else {
                assert!(here.is_empty(), "point {c}");
            }
        }
    }

    #[test]
    fn slice_outside_lifetime_is_empty() {
        let g = coauthors();
        let s = g.slice(Interval::from_raw(20, 30).unwrap());
        assert!(s.is_empty());
    }
}
