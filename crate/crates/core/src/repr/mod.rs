//! Interchangeable physical forms of a temporal graph.
//!
//! All four forms answer the same queries with identical results; they
//! differ in how history is laid out and therefore in what each operation
//! costs:
//!
//! * `Ve` keeps the four coalesced relations themselves. Every operation is
//!   native.
//! * `Rg` materializes one snapshot per change interval. Snapshot-local
//!   operations touch each slice independently; time-crossing ones go
//!   through the relation form.
//! * `Og` keeps one structure plus a presence bitmap per entity over the
//!   topology interval grid. Structural analytics and window zoom read the
//!   bitmaps directly.
//! * `Hg` partitions the grid into fixed-size runs, each storing only the
//!   entities alive inside it. Same native surface as `Og` with better
//!   locality on long histories.
//!
//! [`dispatch::execute`] routes an [`dispatch::Operation`] to the native
//! path when the form supports it and falls back to the relation form
//! otherwise, reporting which route was taken.

mod bits;
pub mod dispatch;
pub mod hg;
pub mod og;
pub mod rg;

pub use bits::{bits_to_presence, presence_to_bits, PresenceBits};
pub use dispatch::{execute, ExecutionPlan, Operation, Route};
pub use hg::{HgGroup, HgRepr, DEFAULT_GROUP_SIZE};
pub use og::{OgRepr, SetOpKind};
pub use rg::RgRepr;

use crate::error::GraphError;
use crate::graph::TGraph;

/// Which physical form to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReprKind {
    Ve,
    Rg,
    Og,
    Hg,
}

impl ReprKind {
    pub const ALL: [ReprKind; 4] = [ReprKind::Ve, ReprKind::Rg, ReprKind::Og, ReprKind::Hg];

    pub fn name(&self) -> &'static str {
        match self {
            ReprKind::Ve => "ve",
            ReprKind::Rg => "rg",
            ReprKind::Og => "og",
            ReprKind::Hg => "hg",
        }
    }

    pub fn parse(s: &str) -> Option<ReprKind> {
        match s.to_ascii_lowercase().as_str() {
            "ve" => Some(ReprKind::Ve),
            "rg" => Some(ReprKind::Rg),
            "og" => Some(ReprKind::Og),
            "hg" => Some(ReprKind::Hg),
            _ => None,
        }
    }
}

impl std::fmt::Display for ReprKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A temporal graph held in one of the four physical forms.
#[derive(Debug, Clone)]
pub enum Representation {
    Ve(TGraph),
    Rg(RgRepr),
    Og(OgRepr),
    Hg(HgRepr),
}

impl Representation {
    pub fn build(kind: ReprKind, t: &TGraph) -> Representation {
        match kind {
            ReprKind::Ve => Representation::Ve(t.clone()),
            ReprKind::Rg => Representation::Rg(RgRepr::build(t)),
            ReprKind::Og => Representation::Og(OgRepr::build(t)),
            ReprKind::Hg => Representation::Hg(HgRepr::build(t)),
        }
    }

    pub fn kind(&self) -> ReprKind {
        match self {
            Representation::Ve(_) => ReprKind::Ve,
            Representation::Rg(_) => ReprKind::Rg,
            Representation::Og(_) => ReprKind::Og,
            Representation::Hg(_) => ReprKind::Hg,
        }
    }

    /// Back to the relation form. Exact: every form retains enough to
    /// reproduce the original coalesced relations.
    pub fn to_tgraph(&self) -> TGraph {
        match self {
            Representation::Ve(t) => t.clone(),
            Representation::Rg(r) => r.to_tgraph(),
            Representation::Og(o) => o.to_tgraph(),
            Representation::Hg(h) => h.to_tgraph(),
        }
    }

    pub fn directed(&self) -> bool {
        match self {
            Representation::Ve(t) => t.directed(),
            Representation::Rg(r) => r.directed(),
            Representation::Og(o) => o.directed(),
            Representation::Hg(h) => h.directed(),
        }
    }
}

/// Round-trip check used by tests and the equivalence harness. The relation
/// and snapshot-sequence forms must reproduce the source exactly; the two
/// bitmap forms hold topology only, so they must reproduce the source with
/// its attributes dropped.
pub fn round_trips(t: &TGraph) -> Result<(), GraphError> {
    for kind in ReprKind::ALL {
        let back = Representation::build(kind, t).to_tgraph();
        let expect = match kind {
            ReprKind::Ve | ReprKind::Rg => t.clone(),
            ReprKind::Og | ReprKind::Hg => t.strip_attrs(),
        };
        if back != expect {
            return Err(GraphError::Unsupported(format!(
                "{kind} round-trip altered the graph"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{coauthors, coauthors_alt};

    #[test]
    fn kind_names_round_trip() {
        for kind in ReprKind::ALL {
            assert_eq!(ReprKind::parse(kind.name()), Some(kind));
        }
        assert_eq!(ReprKind::parse("OG"), Some(ReprKind::Og));
        assert_eq!(ReprKind::parse("nope"), None);
    }

    #[test]
    fn every_form_round_trips_the_fixtures() {
        round_trips(&coauthors()).unwrap();
        round_trips(&coauthors_alt()).unwrap();
        round_trips(&TGraph::empty(false)).unwrap();
    }
}
