//! Discrete time points and half-open validity intervals.
//!
//! All temporal data in the engine is stamped with [`Interval`]s over a
//! discrete integer timeline. An interval `[start, end)` contains `start` and
//! every later point strictly before `end`; `end` itself is excluded. The
//! mapping between timeline indices and calendar dates lives outside the
//! engine (the loader resolves dates against a dataset manifest).

use std::fmt;

use crate::error::TemporalError;

/// A discrete instant on the timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TimePoint(pub i64);

impl TimePoint {
    pub const MIN: TimePoint = TimePoint(i64::MIN);
    pub const MAX: TimePoint = TimePoint(i64::MAX);
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<i64> for TimePoint {
    fn from(v: i64) -> Self {
        TimePoint(v)
    }
}

/// A non-empty half-open period `[start, end)`.
///
/// The `start < end` invariant is established at construction; every other
/// method can therefore assume non-emptiness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    start: TimePoint,
    end: TimePoint,
}

impl Interval {
    /// Builds `[start, end)`, rejecting empty periods.
    pub fn new(start: TimePoint, end: TimePoint) -> Result<Self, TemporalError> {
        if start < end {
            Ok(Interval { start, end })
        } else {
            Err(TemporalError::EmptyInterval {
                start: start.0,
                end: end.0,
            })
        }
    }

    /// Builds `[start, end)` from raw indices.
    pub fn from_raw(start: i64, end: i64) -> Result<Self, TemporalError> {
        Interval::new(TimePoint(start), TimePoint(end))
    }

    pub fn start(&self) -> TimePoint {
        self.start
    }

    pub fn end(&self) -> TimePoint {
        self.end
    }

    /// Number of timeline points covered.
    pub fn length(&self) -> i64 {
        self.end.0 - self.start.0
    }

    pub fn contains(&self, c: TimePoint) -> bool {
        self.start <= c && c < self.end
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// True when the two periods share no point but touch (`[1,3)` and `[3,5)`).
    pub fn adjacent(&self, other: &Interval) -> bool {
        self.end == other.start || other.end == self.start
    }

    /// True when the union of the two periods is itself an interval.
    pub fn merges_with(&self, other: &Interval) -> bool {
        self.overlaps(other) || self.adjacent(other)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        if start < end {
            Some(Interval { start, end })
        } else {
            None
        }
    }

    /// Union of two merging periods; `None` when a gap separates them.
    pub fn merge(&self, other: &Interval) -> Option<Interval> {
        if self.merges_with(other) {
            Some(Interval {
                start: self.start.min(other.start),
                end: self.end.max(other.end),
            })
        } else {
            None
        }
    }

    /// True when every point of `self` lies inside `other`.
    pub fn within(&self, other: &Interval) -> bool {
        other.start <= self.start && self.end <= other.end
    }

    /// Points of `self` not in `other`: zero, one, or two pieces.
    pub fn subtract(&self, other: &Interval) -> Vec<Interval> {
        let mut out = Vec::new();
        if !self.overlaps(other) {
            out.push(*self);
            return out;
        }
        if self.start < other.start {
            out.push(Interval {
                start: self.start,
                end: other.start,
            });
        }
        if other.end < self.end {
            out.push(Interval {
                start: other.end,
                end: self.end,
            });
        }
        out
    }

    /// Iterates every contained point. Intended for small test oracles.
    pub fn points(&self) -> impl Iterator<Item = TimePoint> {
        (self.start.0..self.end.0).map(TimePoint)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// A coalesced set of pairwise disjoint, non-adjacent intervals in ascending
/// order. Acts as the presence set of one entity on the timeline.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntervalSet {
    runs: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { runs: Vec::new() }
    }

    /// Normalizes an arbitrary collection of intervals.
    pub fn from_intervals<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        let mut v: Vec<Interval> = iter.into_iter().collect();
        v.sort();
        let mut runs: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match runs.last_mut() {
                Some(last) if last.merges_with(&iv) => {
                    *last = last.merge(&iv).expect("checked merges_with");
                }
                _ => runs.push(iv),
            }
        }
        IntervalSet { runs }
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn runs(&self) -> &[Interval] {
        &self.runs
    }

    pub fn contains(&self, c: TimePoint) -> bool {
        // Runs are sorted; find the last run starting at or before c.
        match self.runs.partition_point(|r| r.start() <= c) {
            0 => false,
            i => self.runs[i - 1].contains(c),
        }
    }

    /// Total number of covered points.
    pub fn covered_length(&self) -> i64 {
        self.runs.iter().map(Interval::length).sum()
    }

    pub fn insert(&mut self, iv: Interval) {
        let mut all = std::mem::take(&mut self.runs);
        all.push(iv);
        *self = IntervalSet::from_intervals(all);
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(self.runs.iter().chain(other.runs.iter()).copied())
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.runs.len() && j < other.runs.len() {
            if let Some(iv) = self.runs[i].intersect(&other.runs[j]) {
                out.push(iv);
            }
            if self.runs[i].end() <= other.runs[j].end() {
                i += 1;
            } else {
                j += 1;
            }
        }
        // Pieces of disjoint runs intersected with disjoint runs stay disjoint
        // and ordered, but may be adjacent across run boundaries; normalize.
        IntervalSet::from_intervals(out)
    }

    /// Points of `self` not covered by `other`.
    pub fn subtract(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for run in &self.runs {
            let mut pieces = vec![*run];
            for o in &other.runs {
                let mut next = Vec::new();
                for p in pieces {
                    next.extend(p.subtract(o));
                }
                pieces = next;
                if pieces.is_empty() {
                    break;
                }
            }
            out.extend(pieces);
        }
        IntervalSet::from_intervals(out)
    }

    /// Intersection of `self` with a single window.
    pub fn clip(&self, window: &Interval) -> IntervalSet {
        IntervalSet::from_intervals(self.runs.iter().filter_map(|r| r.intersect(window)))
    }

    /// True when every point of `self` lies in `other`.
    pub fn within(&self, other: &IntervalSet) -> bool {
        self.subtract(other).is_empty()
    }
}

impl FromIterator<Interval> for IntervalSet {
    fn from_iter<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        IntervalSet::from_intervals(iter)
    }
}
