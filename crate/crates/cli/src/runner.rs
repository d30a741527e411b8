//! Executes parsed pipelines over a chosen physical form.
//!
//! Free names in the pipeline are bound to datasets; every assignment runs
//! through the dispatcher, which picks a native or conversion route per
//! (operation, form) pair, and the chosen plans are reported alongside the
//! materialized results. Date literals are resolved against one calendar,
//! normally the calendar of the first loaded dataset.

use std::collections::BTreeMap;

use tgraph_core::analytics::ExprProgram;
use tgraph_core::repr::{execute, ExecutionPlan, HgRepr, Operation, Representation, ReprKind};
use tgraph_core::{GraphError, Interval, TGraph, TimePoint};

use crate::dsl::{Pipeline, PipelineOp, Statement};
use crate::manifest::TimeMapper;

/// How to run a pipeline.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Physical form every dataset is built into.
    pub kind: ReprKind,
    /// Group size for the `hg` form; its default when absent.
    pub hg_group_size: Option<usize>,
    /// Calendar for date literals.
    pub mapper: TimeMapper,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            kind: ReprKind::Ve,
            hg_group_size: None,
            mapper: TimeMapper::Integer,
        }
    }
}

impl RunOptions {
    pub fn build(&self, t: &TGraph) -> Representation {
        match (self.kind, self.hg_group_size) {
            (ReprKind::Hg, Some(k)) => Representation::Hg(HgRepr::build_grouped(t, k)),
            (kind, _) => Representation::build(kind, t),
        }
    }
}

/// What a run produced: per-assignment execution plans and the materialized
/// graphs, in statement order.
#[derive(Debug)]
pub struct RunReport {
    pub plans: Vec<(String, ExecutionPlan)>,
    pub results: Vec<(String, TGraph)>,
}

/// Why a run stopped. `Unbound` and `Args` are problems with the pipeline
/// text or invocation; `Op` is an operator failing on real data.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("line {line}: `{name}` is neither assigned above nor a provided dataset")]
    Unbound { line: usize, name: String },
    #[error("line {line}: {message}")]
    Args { line: usize, message: String },
    #[error("line {line}: {op} failed: {source}")]
    Op {
        line: usize,
        op: &'static str,
        source: GraphError,
    },
}

impl RunError {
    /// Process exit code the error maps to: 2 for bad input, 3 for a
    /// failing operator.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Unbound { .. } | RunError::Args { .. } => 2,
            RunError::Op { .. } => 3,
        }
    }
}

fn args_err<T>(line: usize, message: impl Into<String>) -> Result<T, RunError> {
    Err(RunError::Args {
        line,
        message: message.into(),
    })
}

/// Turns a resolved pipeline op into a dispatchable operation. Binary
/// operands are taken from `env`.
fn to_operation(
    line: usize,
    op: &PipelineOp,
    env: &BTreeMap<String, Representation>,
) -> Result<Operation, RunError> {
    let fetch = |name: &str| -> Result<Box<Representation>, RunError> {
        env.get(name)
            .cloned()
            .map(Box::new)
            .ok_or_else(|| RunError::Unbound {
                line,
                name: name.to_string(),
            })
    };
    Ok(match op {
        PipelineOp::Slice { from, to, .. } => {
            let (a, b) = match (from, to) {
                (crate::dsl::TimeArg::Point(a), crate::dsl::TimeArg::Point(b)) => (*a, *b),
                _ => return args_err(line, "slice bounds still hold unresolved dates"),
            };
            let iv = Interval::new(TimePoint(a), TimePoint(b)).map_err(|_| RunError::Args {
                line,
                message: format!("slice from {a} is not before to {b}"),
            })?;
            Operation::Slice(iv)
        }
        PipelineOp::VSubgraph { cond, .. } => Operation::VSubgraph(cond.clone()),
        PipelineOp::ESubgraph { cond, .. } => Operation::ESubgraph(cond.clone()),
        PipelineOp::VMap { map, .. } => Operation::VMap(map.clone()),
        PipelineOp::EMap { map, .. } => Operation::EMap(map.clone()),
        PipelineOp::Agg { params, .. } => Operation::Aggregate(params.clone()),
        PipelineOp::Union {
            right, fv, fe, ..
        } => Operation::Union {
            other: fetch(right)?,
            fv: fv.clone(),
            fe: fe.clone(),
        },
        PipelineOp::Intersection {
            right, fv, fe, ..
        } => Operation::Intersection {
            other: fetch(right)?,
            fv: fv.clone(),
            fe: fe.clone(),
        },
        PipelineOp::Difference { right, .. } => Operation::Difference {
            other: fetch(right)?,
        },
        PipelineOp::NodeA { by, fv, fe, .. } => Operation::NodeByAttrs {
            groups: by.clone(),
            fv: fv.clone(),
            fe: fe.clone(),
        },
        PipelineOp::NodeW {
            window,
            qv,
            qe,
            fv,
            fe,
            ..
        } => Operation::NodeByWindow {
            window: *window,
            qv: *qv,
            qe: *qe,
            fv: fv.clone(),
            fe: fe.clone(),
        },
        PipelineOp::EdgeC {
            right, query, fe, ..
        } => Operation::EdgeCreate {
            other: fetch(right)?,
            query: query.clone(),
            fe: fe.clone(),
        },
        PipelineOp::Pregel {
            program,
            pname,
            supersteps,
            ..
        } => {
            let program: ExprProgram =
                program.clone().validated().map_err(|source| RunError::Op {
                    line,
                    op: "pregel",
                    source,
                })?;
            Operation::Pregel {
                program,
                pname: pname.clone(),
                supersteps: *supersteps,
            }
        }
        PipelineOp::PageRank {
            pname,
            damping,
            tolerance,
            supersteps,
            ..
        } => Operation::PageRank {
            pname: pname.clone(),
            damping: *damping,
            tolerance: *tolerance,
            supersteps: *supersteps,
        },
        PipelineOp::Cc { pname, .. } => Operation::ConnectedComponents {
            pname: pname.clone(),
        },
    })
}

/// Runs `pipeline` with the free names bound from `datasets`.
pub fn run_pipeline(
    pipeline: &Pipeline,
    datasets: &BTreeMap<String, TGraph>,
    opts: &RunOptions,
) -> Result<RunReport, RunError> {
    let mut env: BTreeMap<String, Representation> = BTreeMap::new();
    let mut plans = Vec::new();
    let mut results = Vec::new();
    for st in &pipeline.statements {
        match st {
            Statement::Assign { line, name, op } => {
                let op = op
                    .resolve_dates(&|d| opts.mapper.to_point(d))
                    .map_err(|message| RunError::Args {
                        line: *line,
                        message,
                    })?;
                let primary = op.inputs()[0].to_string();
                // Bind datasets lazily so only referenced ones are built.
                for input in op.inputs() {
                    if !env.contains_key(input) {
                        if let Some(t) = datasets.get(input) {
                            env.insert(input.to_string(), opts.build(t));
                        }
                    }
                }
                let operation = to_operation(*line, &op, &env)?;
                let input = env.get(&primary).ok_or_else(|| RunError::Unbound {
                    line: *line,
                    name: primary.clone(),
                })?;
                let (out, plan) = execute(input, &operation).map_err(|source| RunError::Op {
                    line: *line,
                    op: operation.name(),
                    source,
                })?;
                log::debug!(
                    "{name} = {}: input {} route {:?}",
                    plan.op,
                    plan.input,
                    plan.route
                );
                plans.push((name.clone(), plan));
                env.insert(name.clone(), out);
            }
            Statement::Materialize { line, name } => {
                let rep = env.get(name).ok_or_else(|| RunError::Unbound {
                    line: *line,
                    name: name.clone(),
                })?;
                results.push((name.clone(), rep.to_tgraph()));
            }
        }
    }
    Ok(RunReport { plans, results })
}
