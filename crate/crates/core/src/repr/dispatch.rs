//! Routing of algebra operations to physical forms.
//!
//! Every form can answer every operation; the matrix here decides whether
//! the input's own structures do the work or the input is first converted.
//! The returned plan records the decision so benchmarks can attribute cost
//! to the route, not just the operator.

use crate::agg::ResolveSpec;
use crate::analytics::ExprProgram;
use crate::error::GraphError;
use crate::expr::{Expr, MapFunc};
use crate::graph::TGraph;
use crate::ops::{AggParams, EdgeQuery, GroupAttr, Quantifier, WindowKind};
use crate::time::Interval;

use super::og::SetOpKind;
use super::{HgRepr, OgRepr, Representation, ReprKind, RgRepr};

/// How an operation reached an implementation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Ran on the input form's own structures.
    Native,
    /// Ran after conversion to the named form. `Convert(Ve)` is the
    /// relation-form fallback; analytics on the relation form run as
    /// `Convert(Hg)`, deriving the interval-batched bitmap topology first.
    Convert(ReprKind),
}

impl Route {
    pub fn is_native(&self) -> bool {
        matches!(self, Route::Native)
    }
}

/// What the dispatcher decided for one (operation, form) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecutionPlan {
    pub input: ReprKind,
    pub op: &'static str,
    pub route: Route,
}

/// One operation of the algebra, with its operands, ready to dispatch.
#[derive(Debug, Clone)]
pub enum Operation {
    Slice(Interval),
    VSubgraph(Expr),
    ESubgraph(Expr),
    VMap(MapFunc),
    EMap(MapFunc),
    Aggregate(AggParams),
    Union {
        other: Box<Representation>,
        fv: Vec<ResolveSpec>,
        fe: Vec<ResolveSpec>,
    },
    Intersection {
        other: Box<Representation>,
        fv: Vec<ResolveSpec>,
        fe: Vec<ResolveSpec>,
    },
    Difference {
        other: Box<Representation>,
    },
    NodeByAttrs {
        groups: Vec<GroupAttr>,
        fv: Vec<ResolveSpec>,
        fe: Vec<ResolveSpec>,
    },
    NodeByWindow {
        window: WindowKind,
        qv: Quantifier,
        qe: Quantifier,
        fv: Vec<ResolveSpec>,
        fe: Vec<ResolveSpec>,
    },
    EdgeCreate {
        other: Box<Representation>,
        query: EdgeQuery,
        fe: Vec<ResolveSpec>,
    },
    ConnectedComponents {
        pname: String,
    },
    PageRank {
        pname: String,
        damping: f64,
        tolerance: f64,
        supersteps: usize,
    },
    Pregel {
        program: ExprProgram,
        pname: String,
        supersteps: usize,
    },
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::Slice(_) => "slice",
            Operation::VSubgraph(_) => "vsubgraph",
            Operation::ESubgraph(_) => "esubgraph",
            Operation::VMap(_) => "vmap",
            Operation::EMap(_) => "emap",
            Operation::Aggregate(_) => "aggregate",
            Operation::Union { .. } => "union",
            Operation::Intersection { .. } => "intersection",
            Operation::Difference { .. } => "difference",
            Operation::NodeByAttrs { .. } => "node_a",
            Operation::NodeByWindow { .. } => "node_w",
            Operation::EdgeCreate { .. } => "edge_create",
            Operation::ConnectedComponents { .. } => "connected_components",
            Operation::PageRank { .. } => "pagerank",
            Operation::Pregel { .. } => "pregel",
        }
    }
}

fn specs_order_insensitive(fv: &[ResolveSpec], fe: &[ResolveSpec]) -> bool {
    fv.iter()
        .chain(fe.iter())
        .all(|s| crate::ops::order_insensitive(s.func))
}

/// The support matrix. Relation form: everything native except the
/// analytics, which derive the bitmap topology first. Snapshot sequence:
/// whatever a single snapshot can answer (no period references, no
/// order-sensitive folds) plus per-slice analytics. Bitmap forms: analytics,
/// window zoom and same-form set operations; all else falls back to the
/// relation form.
pub fn plan_for(kind: ReprKind, op: &Operation) -> ExecutionPlan {
    use Operation as Op;
    let route = match kind {
        ReprKind::Ve => match op {
            Op::ConnectedComponents { .. } | Op::PageRank { .. } | Op::Pregel { .. } => {
                Route::Convert(ReprKind::Hg)
            }
            _ => Route::Native,
        },
        ReprKind::Rg => match op {
            Op::Slice(_) => Route::Native,
            Op::VSubgraph(e) | Op::ESubgraph(e) => {
                if e.depends_on_time() {
                    Route::Convert(ReprKind::Ve)
                } else {
                    Route::Native
                }
            }
            Op::VMap(f) | Op::EMap(f) => {
                if f.depends_on_time() {
                    Route::Convert(ReprKind::Ve)
                } else {
                    Route::Native
                }
            }
            Op::Aggregate(p) => {
                let time_free = !p.map.depends_on_time()
                    && p.cond.as_ref().map_or(true, |c| !c.depends_on_time());
                if time_free && crate::ops::order_insensitive(p.func) {
                    Route::Native
                } else {
                    Route::Convert(ReprKind::Ve)
                }
            }
            Op::Union { other, fv, fe } | Op::Intersection { other, fv, fe } => {
                if other.kind() == ReprKind::Rg && specs_order_insensitive(fv, fe) {
                    Route::Native
                } else {
                    Route::Convert(ReprKind::Ve)
                }
            }
            Op::Difference { other } => {
                if other.kind() == ReprKind::Rg {
                    Route::Native
                } else {
                    Route::Convert(ReprKind::Ve)
                }
            }
            Op::ConnectedComponents { .. } | Op::PageRank { .. } | Op::Pregel { .. } => {
                Route::Native
            }
            Op::NodeByAttrs { .. } | Op::NodeByWindow { .. } | Op::EdgeCreate { .. } => {
                Route::Convert(ReprKind::Ve)
            }
        },
        ReprKind::Og | ReprKind::Hg => match op {
            Op::ConnectedComponents { .. }
            | Op::PageRank { .. }
            | Op::Pregel { .. }
            | Op::NodeByWindow { .. } => Route::Native,
            Op::Union { other, .. } | Op::Intersection { other, .. } => {
                if other.kind() == kind {
                    Route::Native
                } else {
                    Route::Convert(ReprKind::Ve)
                }
            }
            Op::Difference { other } => {
                if other.kind() == kind {
                    Route::Native
                } else {
                    Route::Convert(ReprKind::Ve)
                }
            }
            _ => Route::Convert(ReprKind::Ve),
        },
    };
    ExecutionPlan {
        input: kind,
        op: op.name(),
        route,
    }
}

/// Dispatches one operation, returning the result and the plan that was
/// followed. Native results stay in the input's form when it can hold them
/// losslessly; results that carry data the form cannot hold (computed
/// attributes on the bitmap forms) and all relation-form fallbacks come
/// back as `Ve`.
pub fn execute(
    rep: &Representation,
    op: &Operation,
) -> Result<(Representation, ExecutionPlan), GraphError> {
    let plan = plan_for(rep.kind(), op);
    let out = match plan.route {
        Route::Native => run_native(rep, op)?,
        Route::Convert(_) => run_on_relations(&rep.to_tgraph(), op)?,
    };
    Ok((out, plan))
}

fn set_op_how(op: &Operation) -> SetOpKind {
    match op {
        Operation::Union { .. } => SetOpKind::Union,
        Operation::Intersection { .. } => SetOpKind::Intersection,
        Operation::Difference { .. } => SetOpKind::Difference,
        _ => unreachable!("not a set operation"),
    }
}

fn run_native(rep: &Representation, op: &Operation) -> Result<Representation, GraphError> {
    match rep {
        Representation::Ve(t) => run_on_relations(t, op),
        Representation::Rg(rg) => run_on_snapshots(rg, op),
        Representation::Og(og) => run_on_og(og, op),
        Representation::Hg(hg) => run_on_hg(hg, op),
    }
}

/// The relation-form implementations; also the fallback target.
fn run_on_relations(t: &TGraph, op: &Operation) -> Result<Representation, GraphError> {
    use Operation as Op;
    let out = match op {
        Op::Slice(iv) => t.slice(*iv),
        Op::VSubgraph(e) => t.vsubgraph(e)?,
        Op::ESubgraph(e) => t.esubgraph(e)?,
        Op::VMap(f) => t.vmap(f)?,
        Op::EMap(f) => t.emap(f)?,
        Op::Aggregate(p) => t.aggregate(p)?,
        Op::Union { other, fv, fe } => t.union(&other.to_tgraph(), fv, fe)?,
        Op::Intersection { other, fv, fe } => t.intersection(&other.to_tgraph(), fv, fe)?,
        Op::Difference { other } => t.difference(&other.to_tgraph())?,
        Op::NodeByAttrs { groups, fv, fe } => t.node_by_attrs(groups, fv, fe)?,
        Op::NodeByWindow {
            window,
            qv,
            qe,
            fv,
            fe,
        } => t.node_by_window(*window, *qv, *qe, fv, fe)?,
        Op::EdgeCreate { other, query, fe } => t.edge_create(&other.to_tgraph(), query, fe)?,
        Op::ConnectedComponents { pname } => crate::analytics::connected_components(t, pname)?,
        Op::PageRank {
            pname,
            damping,
            tolerance,
            supersteps,
        } => crate::analytics::pagerank(t, pname, *damping, *tolerance, *supersteps)?,
        Op::Pregel {
            program,
            pname,
            supersteps,
        } => crate::analytics::run_expr_program(t, program.clone(), pname, *supersteps)?,
    };
    Ok(Representation::Ve(out))
}

fn run_on_snapshots(rg: &RgRepr, op: &Operation) -> Result<Representation, GraphError> {
    use Operation as Op;
    let out = match op {
        Op::Slice(iv) => rg.slice_range(*iv),
        Op::VSubgraph(e) => rg.vsubgraph(e)?,
        Op::ESubgraph(e) => rg.esubgraph(e)?,
        Op::VMap(f) => rg.vmap(f)?,
        Op::EMap(f) => rg.emap(f)?,
        Op::Aggregate(p) => rg.aggregate(p)?,
        Op::Union { other, fv, fe } | Op::Intersection { other, fv, fe } => {
            let Representation::Rg(org) = other.as_ref() else {
                unreachable!("planned native set op on mismatched forms");
            };
            rg.merge(org, set_op_how(op), fv, fe)?
        }
        Op::Difference { other } => {
            let Representation::Rg(org) = other.as_ref() else {
                unreachable!("planned native set op on mismatched forms");
            };
            rg.merge(org, SetOpKind::Difference, &[], &[])?
        }
        Op::ConnectedComponents { pname } => rg.connected_components(pname)?,
        Op::PageRank {
            pname,
            damping,
            tolerance,
            supersteps,
        } => rg.pagerank(pname, *damping, *tolerance, *supersteps)?,
        Op::Pregel {
            program,
            pname,
            supersteps,
        } => rg.pregel(program, pname, *supersteps)?,
        _ => unreachable!("planned native on an unsupported snapshot operation"),
    };
    Ok(Representation::Rg(out))
}

fn run_on_og(og: &OgRepr, op: &Operation) -> Result<Representation, GraphError> {
    use Operation as Op;
    match op {
        // Analytics results carry computed attributes, which this form
        // cannot hold; they come back in relation form.
        Op::ConnectedComponents { pname } => {
            Ok(Representation::Ve(og.connected_components(pname)?))
        }
        Op::PageRank {
            pname,
            damping,
            tolerance,
            supersteps,
        } => Ok(Representation::Ve(og.pagerank(
            pname,
            *damping,
            *tolerance,
            *supersteps,
        )?)),
        Op::Pregel {
            program,
            pname,
            supersteps,
        } => Ok(Representation::Ve(crate::analytics::run_expr_program_on(
            &og.to_tgraph(),
            &og.to_topology(),
            program.clone(),
            pname,
            *supersteps,
        )?)),
        Op::NodeByWindow {
            window,
            qv,
            qe,
            fv,
            fe,
        } => Ok(Representation::Og(OgRepr::build(&og.node_by_window(
            *window, *qv, *qe, fv, fe,
        )?))),
        Op::Union { other, .. } | Op::Intersection { other, .. } | Op::Difference { other } => {
            let Representation::Og(oog) = other.as_ref() else {
                unreachable!("planned native set op on mismatched forms");
            };
            Ok(Representation::Og(og.merge(oog, set_op_how(op))?))
        }
        _ => unreachable!("planned native on an unsupported bitmap operation"),
    }
}

fn run_on_hg(hg: &HgRepr, op: &Operation) -> Result<Representation, GraphError> {
    use Operation as Op;
    match op {
        Op::ConnectedComponents { pname } => {
            Ok(Representation::Ve(hg.connected_components(pname)?))
        }
        Op::PageRank {
            pname,
            damping,
            tolerance,
            supersteps,
        } => Ok(Representation::Ve(hg.pagerank(
            pname,
            *damping,
            *tolerance,
            *supersteps,
        )?)),
        Op::Pregel {
            program,
            pname,
            supersteps,
        } => Ok(Representation::Ve(crate::analytics::run_expr_program_on(
            &hg.to_tgraph(),
            &hg.to_topology(),
            program.clone(),
            pname,
            *supersteps,
        )?)),
        Op::NodeByWindow {
            window,
            qv,
            qe,
            fv,
            fe,
        } => Ok(Representation::Hg(HgRepr::build_grouped(
            &hg.node_by_window(*window, *qv, *qe, fv, fe)?,
            hg.group_size(),
        ))),
        Op::Union { other, .. } | Op::Intersection { other, .. } | Op::Difference { other } => {
            let Representation::Hg(ohg) = other.as_ref() else {
                unreachable!("planned native set op on mismatched forms");
            };
            Ok(Representation::Hg(hg.merge(ohg, set_op_how(op))?))
        }
        _ => unreachable!("planned native on an unsupported bitmap operation"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{BinOp, Expr};
    use crate::fixtures::{coauthors, coauthors_alt};
    use crate::value::PropertyValue;

    fn school_is_drexel() -> Expr {
        Expr::Binary(
            BinOp::Eq,
            Box::new(Expr::Prop(crate::expr::Scope::V, "school".to_string())),
            Box::new(Expr::Lit(PropertyValue::text("Drexel"))),
        )
    }

    #[test]
    fn relation_form_is_native_except_analytics() {
        let op = Operation::Slice(Interval::from_raw(2, 7).unwrap());
        assert_eq!(plan_for(ReprKind::Ve, &op).route, Route::Native);
        let cc = Operation::ConnectedComponents {
            pname: "c".to_string(),
        };
        assert_eq!(
            plan_for(ReprKind::Ve, &cc).route,
            Route::Convert(ReprKind::Hg)
        );
    }

    #[test]
    fn snapshot_form_delegates_period_predicates() {
        let timeless = Operation::VSubgraph(school_is_drexel());
        assert_eq!(plan_for(ReprKind::Rg, &timeless).route, Route::Native);
        let timed = Operation::VSubgraph(Expr::Binary(
            BinOp::Lt,
            Box::new(Expr::Start(crate::expr::PeriodRef::P)),
            Box::new(Expr::Lit(PropertyValue::Int(5))),
        ));
        assert_eq!(
            plan_for(ReprKind::Rg, &timed).route,
            Route::Convert(ReprKind::Ve)
        );
    }

    #[test]
    fn bitmap_forms_answer_analytics_and_windows_natively() {
        let cc = Operation::ConnectedComponents {
            pname: "c".to_string(),
        };
        let win = Operation::NodeByWindow {
            window: crate::ops::WindowKind::Units(3),
            qv: crate::ops::Quantifier::All,
            qe: crate::ops::Quantifier::Exists,
            fv: vec![],
            fe: vec![],
        };
        for kind in [ReprKind::Og, ReprKind::Hg] {
            assert_eq!(plan_for(kind, &cc).route, Route::Native);
            assert_eq!(plan_for(kind, &win).route, Route::Native);
            let vmap = Operation::VMap(crate::expr::MapFunc::new(vec![]));
            assert_eq!(plan_for(kind, &vmap).route, Route::Convert(ReprKind::Ve));
        }
    }

    #[test]
    fn every_route_of_vsubgraph_agrees_with_the_relation_result() {
        let g = coauthors();
        let op = Operation::VSubgraph(school_is_drexel());
        let expect = g.vsubgraph(&school_is_drexel()).unwrap();
        for kind in [ReprKind::Ve, ReprKind::Rg] {
            let rep = Representation::build(kind, &g);
            let (out, plan) = execute(&rep, &op).unwrap();
            assert_eq!(out.to_tgraph(), expect, "{kind}");
            assert_eq!(plan.route.is_native(), true, "{kind}");
        }
        // Bitmap forms fall back to relations; they hold no attributes, so
        // the comparison runs against the stripped source.
        let expect = g.strip_attrs().vsubgraph(&school_is_drexel()).unwrap();
        for kind in [ReprKind::Og, ReprKind::Hg] {
            let rep = Representation::build(kind, &g);
            let (out, plan) = execute(&rep, &op).unwrap();
            assert_eq!(out.to_tgraph(), expect, "{kind}");
            assert_eq!(plan.route, Route::Convert(ReprKind::Ve), "{kind}");
        }
    }

    #[test]
    fn native_set_ops_agree_across_forms() {
        let a = coauthors().strip_attrs();
        let b = coauthors_alt().strip_attrs();
        let expect = a.union(&b, &[], &[]).unwrap();
        for kind in ReprKind::ALL {
            let ra = Representation::build(kind, &a);
            let rb = Representation::build(kind, &b);
            let op = Operation::Union {
                other: Box::new(rb),
                fv: vec![],
                fe: vec![],
            };
            let (out, plan) = execute(&ra, &op).unwrap();
            assert_eq!(out.to_tgraph(), expect, "{kind}");
            assert!(plan.route.is_native(), "{kind}");
        }
    }

    #[test]
    fn analytics_agree_across_forms() {
        let g = coauthors();
        let cc = Operation::ConnectedComponents {
            pname: "comp".to_string(),
        };
        let expect = crate::analytics::connected_components(&g, "comp").unwrap();
        let stripped = crate::analytics::connected_components(&g.strip_attrs(), "comp").unwrap();
        for kind in ReprKind::ALL {
            let rep = Representation::build(kind, &g);
            let (out, _) = execute(&rep, &cc).unwrap();
            let want = match kind {
                ReprKind::Ve | ReprKind::Rg => &expect,
                ReprKind::Og | ReprKind::Hg => &stripped,
            };
            assert_eq!(&out.to_tgraph(), want, "{kind}");
        }
    }
}
