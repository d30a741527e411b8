//! Seeded synthetic graph generators.
//!
//! Two flavours serve different jobs. [`evolving_graph`] grows an
//! edge-churn interaction graph whose evolution rate is tunable and
//! reported as the average edit similarity between consecutive snapshots
//! (the Jaccard overlap of their vertex and edge sets). [`random_tgraph`]
//! draws small unruly graphs — staggered lifetimes, presence gaps,
//! overlapping attribute records — for the property-test corpora.

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

use crate::error::GraphError;
use crate::graph::{EdgeKey, TGraph, VertexId};
use crate::relation::TemporalRelation;
use crate::time::{Interval, TimePoint};
use crate::value::{PropertySet, PropertyValue};

/// Parameters of the edge-churn generator.
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub vertices: usize,
    /// Timeline length; snapshots sit at `0..time_points`.
    pub time_points: i64,
    /// Edge count at time 0, roughly maintained throughout.
    pub initial_edges: usize,
    /// Fraction of live edges replaced per step (half removed, half added).
    /// 0 freezes the topology; 1 replaces about half of it each step.
    pub evolution_rate: f64,
    pub directed: bool,
    /// Adds an occasionally changing `weight` property per vertex.
    pub with_attrs: bool,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            vertices: 100,
            time_points: 16,
            initial_edges: 200,
            evolution_rate: 0.2,
            directed: false,
            with_attrs: false,
            seed: 7,
        }
    }
}

/// The generated graph plus the measurements callers report.
#[derive(Debug, Clone)]
pub struct GenReport {
    pub graph: TGraph,
    /// Mean Jaccard overlap of consecutive snapshots' vertex and edge sets.
    pub avg_edit_similarity: f64,
    pub edge_tuples: usize,
    pub interval_count: usize,
}

/// Grows a graph by replacing a fixed fraction of its edges at every time
/// step. All vertices live through the whole timeline, so the topology
/// interval grid is driven entirely by edge churn: about one representative
/// interval per step once the rate is nonzero.
pub fn evolving_graph(cfg: &GenConfig) -> Result<GenReport, GraphError> {
    if cfg.vertices < 2 {
        return Err(GraphError::Unsupported(
            "edge churn needs at least two vertices".to_string(),
        ));
    }
    if cfg.time_points < 1 {
        return Err(GraphError::Unsupported(
            "the timeline needs at least one point".to_string(),
        ));
    }
    if !(0.0..=1.0).contains(&cfg.evolution_rate) {
        return Err(GraphError::Unsupported(
            "evolution rate must lie in [0, 1]".to_string(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.vertices as u64;
    let horizon = TimePoint(cfg.time_points);
    let life = Interval::new(TimePoint(0), horizon).expect("positive length");

    let tv = TemporalRelation::from_tuples((1..=n).map(|v| (VertexId(v), (), life)));

    // Live edges and the step each was opened at.
    let mut active: BTreeMap<EdgeKey, TimePoint> = BTreeMap::new();
    let mut closed: Vec<(EdgeKey, (), Interval)> = Vec::new();
    let mut snapshots_sim = Vec::new();

    let draw_edge = |rng: &mut ChaCha8Rng| -> EdgeKey {
        loop {
            let a = rng.gen_range(1..=n);
            let b = rng.gen_range(1..=n);
            if a == b {
                continue;
            }
            return if cfg.directed {
                EdgeKey::new(VertexId(a), VertexId(b))
            } else {
                EdgeKey::undirected(VertexId(a), VertexId(b))
            };
        }
    };

    let mut attempts = 0usize;
    while active.len() < cfg.initial_edges && attempts < cfg.initial_edges * 30 {
        let e = draw_edge(&mut rng);
        active.entry(e).or_insert(TimePoint(0));
        attempts += 1;
    }

    for step in 1..cfg.time_points {
        let now = TimePoint(step);
        let before: BTreeSet<EdgeKey> = active.keys().copied().collect();
        let churn = ((active.len() as f64) * cfg.evolution_rate / 2.0).round() as usize;

        // Close a sample of live edges.
        let keys: Vec<EdgeKey> = active.keys().copied().collect();
        let mut removed_now: BTreeSet<EdgeKey> = BTreeSet::new();
        if churn > 0 && !keys.is_empty() {
            for idx in sample(&mut rng, keys.len(), churn.min(keys.len())) {
                let e = keys[idx];
                let since = active.remove(&e).expect("sampled from live set");
                closed.push((e, (), Interval::new(since, now).expect("since < now")));
                removed_now.insert(e);
            }
        }
        // Open as many fresh ones. Skipping edges closed this very step
        // keeps the tuple from coalescing back into the one just closed.
        let mut added = 0;
        let mut attempts = 0;
        while added < churn && attempts < churn * 30 + 30 {
            let e = draw_edge(&mut rng);
            attempts += 1;
            if active.contains_key(&e) || removed_now.contains(&e) {
                continue;
            }
            active.insert(e, now);
            added += 1;
        }

        let after: BTreeSet<EdgeKey> = active.keys().copied().collect();
        let inter = before.intersection(&after).count();
        let uni = before.union(&after).count();
        snapshots_sim.push((cfg.vertices + inter) as f64 / (cfg.vertices + uni) as f64);
    }
    for (e, since) in active {
        closed.push((e, (), Interval::new(since, horizon).expect("since < horizon")));
    }
    let te = TemporalRelation::from_tuples(closed);

    let tav = if cfg.with_attrs {
        let mut rows = Vec::new();
        for v in 1..=n {
            let mut run_start = TimePoint(0);
            let mut weight: i64 = rng.gen_range(0..100);
            for t in 1..cfg.time_points {
                if rng.gen_bool((cfg.evolution_rate / 4.0).clamp(0.0, 1.0)) {
                    let mut ps = PropertySet::default();
                    ps.insert("weight".to_string(), PropertyValue::Int(weight));
                    rows.push((
                        VertexId(v),
                        ps,
                        Interval::new(run_start, TimePoint(t)).expect("ascending"),
                    ));
                    run_start = TimePoint(t);
                    weight = rng.gen_range(0..100);
                }
            }
            let mut ps = PropertySet::default();
            ps.insert("weight".to_string(), PropertyValue::Int(weight));
            rows.push((
                VertexId(v),
                ps,
                Interval::new(run_start, horizon).expect("ascending"),
            ));
        }
        TemporalRelation::from_tuples(rows)
    } else {
        TemporalRelation::new()
    };

    let graph = TGraph::from_relations(cfg.directed, tv, te, tav, TemporalRelation::new())?;
    let avg = if snapshots_sim.is_empty() {
        1.0
    } else {
        snapshots_sim.iter().sum::<f64>() / snapshots_sim.len() as f64
    };
    Ok(GenReport {
        avg_edit_similarity: avg,
        edge_tuples: graph.edges().len(),
        interval_count: graph.topology_change_points().len().saturating_sub(1),
        graph,
    })
}

/// Parameters for the small random graphs of the test corpora.
#[derive(Debug, Clone)]
pub struct CorpusParams {
    pub max_vertices: usize,
    pub max_time: i64,
    pub max_edge_tuples: usize,
    /// Chance that an entity piece carries an attribute record.
    pub attr_prob: f64,
    /// Fixes directedness; `None` flips a coin per graph.
    pub directed: Option<bool>,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            max_vertices: 50,
            max_time: 20,
            max_edge_tuples: 200,
            attr_prob: 0.6,
            directed: None,
        }
    }
}

/// [`random_tgraph`] seeded directly, for callers without an rng.
pub fn corpus_graph(seed: u64, p: &CorpusParams) -> TGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_tgraph(&mut rng, p)
}

/// Draws one random graph: staggered lifetimes with gaps, edges clipped to
/// their endpoints, overlapping attribute records left for construction to
/// resolve. Built through the validating constructor, so the result always
/// satisfies the representation rules.
pub fn random_tgraph(rng: &mut ChaCha8Rng, p: &CorpusParams) -> TGraph {
    let directed = p.directed.unwrap_or_else(|| rng.gen_bool(0.5));
    let n = rng.gen_range(1..=p.max_vertices.max(1)) as u64;
    let horizon = p.max_time.max(2);

    let rand_iv = |rng: &mut ChaCha8Rng, lo: i64, hi: i64| -> Option<Interval> {
        if hi - lo < 1 {
            return None;
        }
        let s = rng.gen_range(lo..hi);
        let e = rng.gen_range(s + 1..=hi);
        Some(Interval::from_raw(s, e).expect("s < e"))
    };

    let mut tv_rows = Vec::new();
    let mut lifetimes: BTreeMap<VertexId, Vec<Interval>> = BTreeMap::new();
    for v in 1..=n {
        let first = rand_iv(rng, 0, horizon).expect("horizon >= 2");
        let mut runs = vec![first];
        // A second run after a gap, sometimes.
        if rng.gen_bool(0.3) && first.end().0 + 2 < horizon {
            if let Some(second) = rand_iv(rng, first.end().0 + 1, horizon) {
                runs.push(second);
            }
        }
        for r in &runs {
            tv_rows.push((VertexId(v), (), *r));
        }
        lifetimes.insert(VertexId(v), runs);
    }

    let mut te_rows = Vec::new();
    let mut tae_rows = Vec::new();
    let edge_tuples = rng.gen_range(0..=p.max_edge_tuples);
    for _ in 0..edge_tuples {
        let a = VertexId(rng.gen_range(1..=n));
        let b = VertexId(rng.gen_range(1..=n));
        if a == b {
            continue;
        }
        let key = if directed {
            EdgeKey::new(a, b)
        } else {
            EdgeKey::undirected(a, b)
        };
        let Some(want) = rand_iv(rng, 0, horizon) else {
            continue;
        };
        // Clip to both endpoints so referential integrity holds piecewise.
        for ra in &lifetimes[&a] {
            for rb in &lifetimes[&b] {
                let Some(both) = ra.intersect(rb) else {
                    continue;
                };
                let Some(piece) = both.intersect(&want) else {
                    continue;
                };
                te_rows.push((key, (), piece));
                if rng.gen_bool(p.attr_prob * 0.5) {
                    let mut ps = PropertySet::default();
                    ps.insert(
                        "w".to_string(),
                        PropertyValue::Int(rng.gen_range(0..5)),
                    );
                    tae_rows.push((key, ps, piece));
                }
            }
        }
    }

    let mut tav_rows = Vec::new();
    let schools = ["Drexel", "CUNY", "UCB", "MIT"];
    for (v, runs) in &lifetimes {
        for r in runs {
            if !rng.gen_bool(p.attr_prob) {
                continue;
            }
            // One or two records, possibly overlapping; resolve sorts it out.
            for _ in 0..rng.gen_range(1..=2) {
                let Some(iv) = rand_iv(rng, r.start().0, r.end().0) else {
                    continue;
                };
                let mut ps = PropertySet::default();
                match rng.gen_range(0..3) {
                    0 => {
                        ps.insert(
                            "weight".to_string(),
                            PropertyValue::Int(rng.gen_range(0..5)),
                        );
                    }
                    1 => {
                        ps.insert(
                            "school".to_string(),
                            PropertyValue::text(schools[rng.gen_range(0..schools.len())]),
                        );
                    }
                    _ => {
                        ps.insert(
                            "score".to_string(),
                            PropertyValue::float(rng.gen_range(0..40) as f64 / 4.0),
                        );
                    }
                }
                tav_rows.push((*v, ps, iv));
            }
        }
    }

    TGraph::from_relations(
        directed,
        TemporalRelation::from_tuples(tv_rows),
        TemporalRelation::from_tuples(te_rows),
        TemporalRelation::from_tuples(tav_rows),
        TemporalRelation::from_tuples(tae_rows),
    )
    .expect("clipped rows cannot break the rules")
}
