//! Temporal relations: bags of `(key, value, interval)` tuples under point
//! semantics, plus the interval primitives the whole engine is built from
//! (coalesce, split, normalize, extend, change points).
//!
//! A relation is *coalesced* when no two tuples with the same key and value
//! overlap or touch. Coalescing is tracked lazily: constructors that cannot
//! guarantee the property clear the flag, and operators that need coalesced
//! input call [`TemporalRelation::coalesce`] first (a no-op when the flag is
//! already set). Tuples are kept canonically sorted by `(key, start, end,
//! value)` so equal relations compare equal structurally.

use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;

use crate::config;
use crate::error::TemporalError;
use crate::time::{Interval, IntervalSet, TimePoint};

/// Bound for keys and values stored in temporal relations.
pub trait RelItem: Clone + Ord + Hash + Send + Sync {}
impl<T: Clone + Ord + Hash + Send + Sync> RelItem for T {}

/// One tuple of a temporal relation.
pub type Tuple<K, V> = (K, V, Interval);

/// A temporal relation over keys `K` with payload `V`.
///
/// Unit payloads (`V = ()`) model pure presence relations; property-set
/// payloads model attribute relations.
#[derive(Debug, Clone)]
pub struct TemporalRelation<K, V> {
    tuples: Vec<Tuple<K, V>>,
    coalesced: bool,
}

impl<K: RelItem, V: RelItem> Default for TemporalRelation<K, V> {
    fn default() -> Self {
        TemporalRelation {
            tuples: Vec::new(),
            coalesced: true,
        }
    }
}

impl<K: RelItem, V: RelItem> PartialEq for TemporalRelation<K, V> {
    fn eq(&self, other: &Self) -> bool {
        self.tuples == other.tuples
    }
}
impl<K: RelItem, V: RelItem> Eq for TemporalRelation<K, V> {}

impl<K: RelItem, V: RelItem> TemporalRelation<K, V> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a relation from arbitrary tuples; the result is sorted but not
    /// assumed coalesced.
    pub fn from_tuples<I: IntoIterator<Item = Tuple<K, V>>>(tuples: I) -> Self {
        let mut tuples: Vec<_> = tuples.into_iter().collect();
        sort_canonical(&mut tuples);
        TemporalRelation {
            tuples,
            coalesced: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn tuples(&self) -> &[Tuple<K, V>] {
        &self.tuples
    }

    pub fn into_tuples(self) -> Vec<Tuple<K, V>> {
        self.tuples
    }

    pub fn is_coalesced(&self) -> bool {
        self.coalesced
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tuple<K, V>> {
        self.tuples.iter()
    }

    /// Distinct keys, ascending.
    pub fn keys(&self) -> Vec<K> {
        let mut ks: Vec<K> = self.tuples.iter().map(|(k, _, _)| k.clone()).collect();
        ks.dedup();
        ks.sort();
        ks.dedup();
        ks
    }

    /// Tuples valid at point `c`: the snapshot of the relation.
    pub fn at(&self, c: TimePoint) -> impl Iterator<Item = (&K, &V)> {
        self.tuples
            .iter()
            .filter(move |(_, _, p)| p.contains(c))
            .map(|(k, v, _)| (k, v))
    }

    /// Presence set of one key (union of its tuple periods, any value).
    pub fn presence(&self, key: &K) -> IntervalSet {
        IntervalSet::from_intervals(
            self.tuples
                .iter()
                .filter(|(k, _, _)| k == key)
                .map(|(_, _, p)| *p),
        )
    }

    /// Merges value-equivalent tuples whose periods overlap or touch.
    ///
    /// Point semantics are preserved exactly: the output contains the same
    /// `(key, value)` pairs at every time point, with maximal periods.
    pub fn coalesce(&self) -> Self {
        if self.coalesced {
            return self.clone();
        }
        let mut groups = partition_by_group(&self.tuples, |(k, v, _)| (k.clone(), v.clone()));
        let folded: Vec<Vec<Tuple<K, V>>> = groups
            .par_drain(..)
            .map(|((k, v), mut periods)| {
                periods.sort();
                let mut out: Vec<Tuple<K, V>> = Vec::new();
                let mut current: Option<Interval> = None;
                for p in periods {
                    current = match current {
                        None => Some(p),
                        Some(c) => match c.merge(&p) {
                            Some(m) => Some(m),
                            None => {
                                out.push((k.clone(), v.clone(), c));
                                Some(p)
                            }
                        },
                    };
                }
                if let Some(c) = current {
                    out.push((k, v, c));
                }
                out
            })
            .collect();
        let mut tuples: Vec<Tuple<K, V>> = folded.into_iter().flatten().collect();
        sort_canonical(&mut tuples);
        TemporalRelation {
            tuples,
            coalesced: true,
        }
    }

    /// Restricts every tuple to `window`, dropping what falls outside.
    pub fn clip(&self, window: &Interval) -> Self {
        let tuples: Vec<Tuple<K, V>> = self
            .tuples
            .iter()
            .filter_map(|(k, v, p)| p.intersect(window).map(|q| (k.clone(), v.clone(), q)))
            .collect();
        // Clipping cannot introduce new overlap between value-equal tuples.
        TemporalRelation {
            tuples,
            coalesced: self.coalesced,
        }
    }

    /// Splits tuples along a window grid: windows are `[s + k*w, s + (k+1)*w)`
    /// for integer `k`. Each output tuple is the non-empty intersection of an
    /// input tuple with one window. The final fragment of a tuple may be
    /// shorter than `w`; it is emitted, not dropped.
    pub fn split(&self, s: TimePoint, w: i64) -> Result<Self, TemporalError> {
        if w <= 0 {
            return Err(TemporalError::NonPositiveWindow(w));
        }
        let mut tuples = Vec::with_capacity(self.tuples.len());
        for (k, v, p) in &self.tuples {
            let first = (p.start().0 - s.0).div_euclid(w);
            let mut ws = s.0 + first * w;
            while ws < p.end().0 {
                let window = Interval::from_raw(ws, ws + w).expect("w > 0");
                if let Some(piece) = p.intersect(&window) {
                    tuples.push((k.clone(), v.clone(), piece));
                }
                ws += w;
            }
        }
        sort_canonical(&mut tuples);
        Ok(TemporalRelation {
            tuples,
            coalesced: false,
        })
    }

    /// Splits tuples at every boundary point lying strictly inside them.
    /// Point semantics are unchanged; the output is generally uncoalesced.
    pub fn normalize(&self, boundaries: &[TimePoint]) -> Self {
        let mut bs: Vec<TimePoint> = boundaries.to_vec();
        bs.sort();
        bs.dedup();
        let mut tuples = Vec::with_capacity(self.tuples.len());
        for (k, v, p) in &self.tuples {
            let lo = bs.partition_point(|b| *b <= p.start());
            let hi = bs.partition_point(|b| *b < p.end());
            let mut start = p.start();
            for b in &bs[lo..hi] {
                tuples.push((k.clone(), v.clone(), Interval::new(start, *b).expect("b inside p")));
                start = *b;
            }
            tuples.push((k.clone(), v.clone(), Interval::new(start, p.end()).expect("non-empty tail")));
        }
        sort_canonical(&mut tuples);
        TemporalRelation {
            tuples,
            coalesced: false,
        }
    }

    /// Makes the period of each tuple available as data alongside the value.
    pub fn extend(&self) -> impl Iterator<Item = (&K, &V, TimePoint, TimePoint)> {
        self.tuples.iter().map(|(k, v, p)| (k, v, p.start(), p.end()))
    }

    /// All period endpoints (starts and ends), ascending and deduplicated.
    pub fn boundary_points(&self) -> Vec<TimePoint> {
        let mut pts = BTreeSet::new();
        for (_, _, p) in &self.tuples {
            pts.insert(p.start());
            pts.insert(p.end());
        }
        pts.into_iter().collect()
    }

    /// Maps values, keeping periods. The result may be uncoalesced (distinct
    /// values can map to one value on touching periods).
    pub fn map_values<W: RelItem>(&self, f: impl Fn(&K, &V) -> W + Sync) -> TemporalRelation<K, W> {
        let mut tuples: Vec<Tuple<K, W>> = self
            .tuples
            .par_iter()
            .map(|(k, v, p)| (k.clone(), f(k, v), *p))
            .collect();
        sort_canonical(&mut tuples);
        TemporalRelation {
            tuples,
            coalesced: false,
        }
    }

    /// Keeps tuples whose key and value satisfy `f`; periods untouched, so a
    /// coalesced input stays coalesced.
    pub fn filter(&self, f: impl Fn(&K, &V) -> bool + Sync) -> Self {
        let tuples: Vec<Tuple<K, V>> = self
            .tuples
            .par_iter()
            .filter(|(k, v, _)| f(k, v))
            .cloned()
            .collect();
        TemporalRelation {
            tuples,
            coalesced: self.coalesced,
        }
    }

    /// Bag union: concatenates tuple multisets. Result is uncoalesced.
    pub fn bag_union(&self, other: &Self) -> Self {
        let mut tuples = self.tuples.clone();
        tuples.extend(other.tuples.iter().cloned());
        sort_canonical(&mut tuples);
        TemporalRelation {
            tuples,
            coalesced: false,
        }
    }
}

/// Change points of a family of relations: every distinct period endpoint.
/// Between two consecutive change points no relation in the family changes.
pub fn change_points(boundary_sets: &[Vec<TimePoint>]) -> Vec<TimePoint> {
    let mut pts = BTreeSet::new();
    for b in boundary_sets {
        pts.extend(b.iter().copied());
    }
    pts.into_iter().collect()
}

/// Sorts tuples canonically by `(key, start, end, value)`.
fn sort_canonical<K: RelItem, V: RelItem>(tuples: &mut [Tuple<K, V>]) {
    tuples.par_sort_unstable_by(|(ka, va, pa), (kb, vb, pb)| {
        ka.cmp(kb)
            .then_with(|| pa.cmp(pb))
            .then_with(|| va.cmp(vb))
    });
}

/// Groups tuple periods by an extracted key, bucketing keys by hash so the
/// buckets can be processed in parallel. The number of buckets follows the
/// configured partition count; the output is key-sorted and therefore
/// independent of it.
fn partition_by_group<K: RelItem, V: RelItem, G: RelItem>(
    tuples: &[Tuple<K, V>],
    group: impl Fn(&Tuple<K, V>) -> G + Sync,
) -> Vec<(G, Vec<Interval>)> {
    let parts = config::partitions().max(1);
    let mut buckets: Vec<Vec<(G, Interval)>> = (0..parts).map(|_| Vec::new()).collect();
    for t in tuples {
        let g = group(t);
        let mut h = std::collections::hash_map::DefaultHasher::new();
        g.hash(&mut h);
        let b = (h.finish() as usize) % parts;
        buckets[b].push((g, t.2));
    }
    let mut grouped: Vec<(G, Vec<Interval>)> = buckets
        .into_par_iter()
        .map(|mut bucket| {
            bucket.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out: Vec<(G, Vec<Interval>)> = Vec::new();
            for (g, p) in bucket {
                match out.last_mut() {
                    Some((lg, ps)) if *lg == g => ps.push(p),
                    _ => out.push((g, vec![p])),
                }
            }
            out
        })
        .flatten()
        .collect();
    grouped.sort_by(|a, b| a.0.cmp(&b.0));
    grouped
}
