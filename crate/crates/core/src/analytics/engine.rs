//! Superstep engine over an interval-batched topology. All intervals advance
//! in lockstep; a message is computed once per run of intervals in which the
//! sender's state is unchanged, and each interval halts on its own once its
//! states converge.

use rayon::prelude::*;

use crate::error::GraphError;
use crate::graph::VertexId;
use crate::value::PropertyValue;

use super::topology::TemporalTopology;

/// A vertex-centric program the engine iterates to a fixed point.
///
/// Implementations must be deterministic: the engine guarantees messages are
/// folded in ascending sender order, so equal inputs give equal outputs on
/// every execution path.
pub trait VertexProgram: Sync {
    /// State before the first superstep.
    fn init(&self, v: VertexId, out_degree: i64) -> Result<PropertyValue, GraphError>;

    /// Message a vertex sends along each outgoing edge, or `None` to stay
    /// silent. Undirected edges carry messages both ways.
    fn message(
        &self,
        state: &PropertyValue,
        out_degree: i64,
    ) -> Result<Option<PropertyValue>, GraphError>;

    /// Folds two messages into one. Must be associative.
    fn combine(
        &self,
        a: &PropertyValue,
        b: &PropertyValue,
    ) -> Result<PropertyValue, GraphError>;

    /// Next state from the current one and the folded incoming messages
    /// (`None` when nothing arrived).
    fn update(
        &self,
        v: VertexId,
        state: &PropertyValue,
        incoming: Option<&PropertyValue>,
        out_degree: i64,
    ) -> Result<PropertyValue, GraphError>;

    /// Whether an old/new state pair counts as settled.
    fn converged(&self, old: &PropertyValue, new: &PropertyValue) -> bool;
}

/// A message payload valid over a run of consecutive intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMessage {
    pub payload: PropertyValue,
    /// Half-open range of interval indices the payload covers.
    pub validity: std::ops::Range<usize>,
}

/// Final states and per-interval iteration counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PregelOutcome {
    /// `states[interval][vertex index]`; `None` where the vertex is absent.
    pub states: Vec<Vec<Option<PropertyValue>>>,
    /// Supersteps each interval ran before halting.
    pub iterations: Vec<usize>,
}

/// Runs `program` over every interval of `topo` for at most `max_supersteps`
/// rounds, halting each interval as soon as all of its states converge.
pub fn run_program<P: VertexProgram>(
    topo: &TemporalTopology,
    program: &P,
    max_supersteps: usize,
) -> Result<PregelOutcome, GraphError> {
    let n_interval = topo.interval_count();
    let n_vert = topo.vertex_count();
    let degrees = topo.out_degrees();
    let in_nbrs = topo.in_neighbors();

    let mut states: Vec<Vec<Option<PropertyValue>>> = Vec::with_capacity(n_interval);
    for i in 0..n_interval {
        let mut row = Vec::with_capacity(n_vert);
        for vi in 0..n_vert {
            row.push(if topo.vertex_active[i][vi] {
                Some(program.init(topo.verts[vi], degrees[i][vi])?)
            } else {
                None
            });
        }
        states.push(row);
    }
    let mut halted = vec![false; n_interval];
    let mut iterations = vec![0usize; n_interval];

    for _ in 0..max_supersteps {
        if halted.iter().all(|h| *h) {
            break;
        }
        // Message phase: per sender, one payload per validity run of equal
        // state and degree across still-running intervals.
        let outboxes: Vec<Vec<IntervalMessage>> = (0..n_vert)
            .into_par_iter()
            .map(|vi| {
                let mut out = Vec::new();
                let mut i = 0;
                while i < n_interval {
                    let live = !halted[i] && states[i][vi].is_some();
                    if !live {
                        i += 1;
                        continue;
                    }
                    let state = states[i][vi].as_ref().expect("checked");
                    let deg = degrees[i][vi];
                    let mut j = i + 1;
                    while j < n_interval
                        && !halted[j]
                        && states[j][vi].as_ref() == Some(state)
                        && degrees[j][vi] == deg
                    {
                        j += 1;
                    }
                    if let Some(payload) = program.message(state, deg)? {
                        out.push(IntervalMessage {
                            payload,
                            validity: i..j,
                        });
                    }
                    i = j;
                }
                Ok(out)
            })
            .collect::<Result<_, GraphError>>()?;

        // Update phase: each receiver folds senders in ascending order.
        type SteppedRow = Option<(Vec<Option<PropertyValue>>, bool)>;
        let stepped: Vec<SteppedRow> = (0..n_interval)
            .into_par_iter()
            .map(|i| -> Result<SteppedRow, GraphError> {
                if halted[i] {
                    return Ok(None);
                }
                let mut row = Vec::with_capacity(n_vert);
                let mut settled = true;
                for vi in 0..n_vert {
                    let Some(old) = &states[i][vi] else {
                        row.push(None);
                        continue;
                    };
                    let mut agg: Option<PropertyValue> = None;
                    for (sender, ei) in &in_nbrs[vi] {
                        if !topo.edge_active[i][*ei as usize] {
                            continue;
                        }
                        let Some(msg) = outboxes[*sender as usize]
                            .iter()
                            .find(|m| m.validity.contains(&i))
                        else {
                            continue;
                        };
                        agg = Some(match agg {
                            None => msg.payload.clone(),
                            Some(acc) => program.combine(&acc, &msg.payload)?,
                        });
                    }
                    let new = program.update(topo.verts[vi], old, agg.as_ref(), degrees[i][vi])?;
                    if !program.converged(old, &new) {
                        settled = false;
                    }
                    row.push(Some(new));
                }
                Ok(Some((row, settled)))
            })
            .collect::<Result<_, GraphError>>()?;

        for (i, step) in stepped.into_iter().enumerate() {
            if let Some((row, settled)) = step {
                states[i] = row;
                iterations[i] += 1;
                if settled {
                    halted[i] = true;
                }
            }
        }
    }

    Ok(PregelOutcome { states, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::coauthors;
    use crate::graph::TGraph;
    use crate::value::PropertyValue;

    /// Minimum-id flood fill, the simplest complete program.
    struct MinId;

    impl VertexProgram for MinId {
        fn init(&self, v: VertexId, _d: i64) -> Result<PropertyValue, GraphError> {
            Ok(PropertyValue::Int(v.0 as i64))
        }
        fn message(
            &self,
            state: &PropertyValue,
            _d: i64,
        ) -> Result<Option<PropertyValue>, GraphError> {
            Ok(Some(state.clone()))
        }
        fn combine(
            &self,
            a: &PropertyValue,
            b: &PropertyValue,
        ) -> Result<PropertyValue, GraphError> {
            Ok(a.min(b).clone())
        }
        fn update(
            &self,
            _v: VertexId,
            state: &PropertyValue,
            incoming: Option<&PropertyValue>,
            _d: i64,
        ) -> Result<PropertyValue, GraphError> {
            Ok(match incoming {
                Some(m) if m < state => m.clone(),
                _ => state.clone(),
            })
        }
        fn converged(&self, old: &PropertyValue, new: &PropertyValue) -> bool {
            old == new
        }
    }

    #[test]
    fn min_id_floods_each_interval_independently() {
        let topo = super::super::topology::TemporalTopology::from_tgraph(&coauthors());
        let out = run_program(&topo, &MinId, 50).unwrap();
        let int = |x: i64| Some(PropertyValue::Int(x));
        // [0,1): only v1. [1,5): v1-v2 share 1. [5,6): isolated.
        // [6,9): v2-v3 share 2, v1 alone. [9,11): all isolated.
        assert_eq!(out.states[0], vec![int(1), None, None]);
        assert_eq!(out.states[1], vec![int(1), int(1), None]);
        assert_eq!(out.states[2], vec![int(1), int(2), None]);
        assert_eq!(out.states[3], vec![int(1), int(2), int(2)]);
        assert_eq!(out.states[4], vec![int(1), int(2), int(3)]);
        // Every interval here settles within two supersteps.
        assert!(out.iterations.iter().all(|n| *n <= 2));
    }

    #[test]
    fn halted_intervals_stop_counting() {
        let topo = super::super::topology::TemporalTopology::from_tgraph(&coauthors());
        let out = run_program(&topo, &MinId, 50).unwrap();
        // The edgeless interval [5,6) settles in one superstep.
        assert_eq!(out.iterations[2], 1);
        // The flooding interval needs a second round to confirm.
        assert_eq!(out.iterations[1], 2);
    }

    #[test]
    fn empty_topology_runs_to_nothing() {
        let topo =
            super::super::topology::TemporalTopology::from_tgraph(&TGraph::empty(false));
        let out = run_program(&topo, &MinId, 10).unwrap();
        assert!(out.states.is_empty());
    }
}
