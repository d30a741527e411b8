//! Cross-form equivalence on random graphs: every operation the dispatcher
//! supports must give the same answer from every physical form, up to the
//! attributes the bitmap forms do not hold.

use proptest::prelude::*;

use tgraph_core::agg::ResolveSpec;
use tgraph_core::analytics::ExprProgram;
use tgraph_core::expr::{BinOp, Expr, FuncName, MapFunc, Scope};
use tgraph_core::generate::{corpus_graph, CorpusParams};
use tgraph_core::ops::{AggDirection, AggParams, GroupAttr, Quantifier, WindowKind};
use tgraph_core::repr::{execute, round_trips, Operation, Representation, ReprKind};
use tgraph_core::{AggFunc, Interval, PropertyValue, TGraph};

fn weight_gt(x: i64) -> Expr {
    Expr::Binary(
        BinOp::Gt,
        Box::new(Expr::Prop(Scope::V, "weight".to_string())),
        Box::new(Expr::Lit(PropertyValue::Int(x))),
    )
}

fn max_id_flood() -> ExprProgram {
    ExprProgram {
        init: Expr::Id(Scope::V),
        msg: Expr::State(Scope::V),
        combine: AggFunc::Max,
        update: Expr::Call(FuncName::Max, vec![Expr::State(Scope::V), Expr::MsgAgg]),
        tolerance: None,
    }
}

/// Unary operations the equivalence sweep exercises. Predicates and maps
/// are time-free so the snapshot form keeps them native.
fn unary_ops() -> Vec<Operation> {
    vec![
        Operation::Slice(Interval::from_raw(3, 11).unwrap()),
        Operation::VSubgraph(weight_gt(2)),
        Operation::ESubgraph(Expr::Binary(
            BinOp::Ge,
            Box::new(Expr::Prop(Scope::E, "w".to_string())),
            Box::new(Expr::Lit(PropertyValue::Int(1))),
        )),
        Operation::VMap(MapFunc::new(vec![(
            "big".to_string(),
            weight_gt(2),
        )])),
        Operation::EMap(MapFunc::new(vec![(
            "wbig".to_string(),
            Expr::Binary(
                BinOp::Ge,
                Box::new(Expr::Prop(Scope::E, "w".to_string())),
                Box::new(Expr::Lit(PropertyValue::Int(2))),
            ),
        )])),
        Operation::Aggregate(AggParams {
            dir: AggDirection::Both,
            cond: None,
            map: Expr::Prop(Scope::V2, "weight".to_string()),
            func: AggFunc::Count,
            pname: "nw".to_string(),
        }),
        Operation::NodeByAttrs {
            groups: vec![GroupAttr::Property("school".to_string())],
            fv: vec![],
            fe: vec![],
        },
        Operation::NodeByWindow {
            window: WindowKind::Units(5),
            qv: Quantifier::Exists,
            qe: Quantifier::Exists,
            fv: vec![],
            fe: vec![],
        },
        Operation::NodeByWindow {
            window: WindowKind::Changes(3),
            qv: Quantifier::All,
            qe: Quantifier::Most,
            fv: vec![],
            fe: vec![],
        },
    ]
}

/// Runs `op` from every form and compares against the relation-form result,
/// stripped for the topology-only forms.
fn assert_all_forms_agree(g: &TGraph, op: &Operation) {
    let full = execute(&Representation::Ve(g.clone()), op)
        .unwrap()
        .0
        .to_tgraph();
    let stripped = execute(&Representation::Ve(g.strip_attrs()), op)
        .unwrap()
        .0
        .to_tgraph();
    for kind in ReprKind::ALL {
        let rep = Representation::build(kind, g);
        let (out, _) = execute(&rep, op).unwrap();
        let want = match kind {
            ReprKind::Ve | ReprKind::Rg => &full,
            ReprKind::Og | ReprKind::Hg => &stripped,
        };
        assert_eq!(&out.to_tgraph(), want, "{kind} diverges on {}", op.name());
    }
}

/// Same comparison for two-input operations; `other` is built in the same
/// form so the planner picks the native merge where one exists.
fn assert_all_forms_agree_binary(
    a: &TGraph,
    b: &TGraph,
    make: impl Fn(Representation) -> Operation,
) {
    let full = execute(
        &Representation::Ve(a.clone()),
        &make(Representation::Ve(b.clone())),
    )
    .unwrap()
    .0
    .to_tgraph();
    let stripped = execute(
        &Representation::Ve(a.strip_attrs()),
        &make(Representation::Ve(b.strip_attrs())),
    )
    .unwrap()
    .0
    .to_tgraph();
    for kind in ReprKind::ALL {
        let ra = Representation::build(kind, a);
        let rb = Representation::build(kind, b);
        let op = make(rb);
        let (out, _) = execute(&ra, &op).unwrap();
        let want = match kind {
            ReprKind::Ve | ReprKind::Rg => &full,
            ReprKind::Og | ReprKind::Hg => &stripped,
        };
        assert_eq!(&out.to_tgraph(), want, "{kind} diverges on {}", op.name());
    }
}

fn pair_params(directed: bool) -> CorpusParams {
    CorpusParams {
        max_vertices: 20,
        max_edge_tuples: 60,
        directed: Some(directed),
        ..CorpusParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn every_form_round_trips_random_graphs(seed in any::<u64>()) {
        let g = corpus_graph(seed, &CorpusParams::default());
        round_trips(&g).unwrap();
    }

    #[test]
    fn unary_operations_agree_across_forms(seed in any::<u64>()) {
        let g = corpus_graph(seed, &CorpusParams::default());
        for op in unary_ops() {
            assert_all_forms_agree(&g, &op);
        }
    }

    #[test]
    fn analytics_agree_across_forms(seed in any::<u64>()) {
        let g = corpus_graph(seed, &CorpusParams::default());
        let ops = [
            Operation::ConnectedComponents { pname: "comp".to_string() },
            Operation::Pregel {
                program: max_id_flood(),
                pname: "flood".to_string(),
                supersteps: 64,
            },
        ];
        for op in ops {
            assert_all_forms_agree(&g, &op);
        }
    }

    #[test]
    fn pagerank_agrees_across_forms(seed in any::<u64>()) {
        let g = corpus_graph(
            seed,
            &CorpusParams { directed: Some(true), ..CorpusParams::default() },
        );
        let op = Operation::PageRank {
            pname: "rank".to_string(),
            damping: 0.85,
            tolerance: 1e-9,
            supersteps: 200,
        };
        assert_all_forms_agree(&g, &op);
    }

    #[test]
    fn set_operations_agree_across_forms(seed in any::<u64>(), directed in any::<bool>()) {
        let p = pair_params(directed);
        let a = corpus_graph(seed, &p);
        let b = corpus_graph(seed.wrapping_add(0x9e3779b97f4a7c15), &p);
        assert_all_forms_agree_binary(&a, &b, |rb| Operation::Union {
            other: Box::new(rb),
            fv: vec![],
            fe: vec![],
        });
        assert_all_forms_agree_binary(&a, &b, |rb| Operation::Union {
            other: Box::new(rb),
            fv: vec![ResolveSpec::renamed(AggFunc::Count, "weight", "wn")],
            fe: vec![],
        });
        assert_all_forms_agree_binary(&a, &b, |rb| Operation::Intersection {
            other: Box::new(rb),
            fv: vec![],
            fe: vec![],
        });
        assert_all_forms_agree_binary(&a, &b, |rb| Operation::Difference {
            other: Box::new(rb),
        });
    }

    #[test]
    fn edge_create_agrees_across_forms(seed in any::<u64>(), directed in any::<bool>()) {
        let p = pair_params(directed);
        let a = corpus_graph(seed, &p);
        let b = corpus_graph(seed.wrapping_add(0x9e3779b97f4a7c15), &p);
        assert_all_forms_agree_binary(&a, &b, |rb| Operation::EdgeCreate {
            other: Box::new(rb),
            query: tgraph_core::ops::EdgeQuery::VertexPairs {
                cond: Expr::Binary(
                    BinOp::Eq,
                    Box::new(Expr::Prop(Scope::V1, "weight".to_string())),
                    Box::new(Expr::Prop(Scope::V2, "weight".to_string())),
                ),
                attrs: MapFunc::new(vec![]),
            },
            fe: vec![],
        });
    }

    /// Group size must not change bitmap-form answers: extremes degenerate
    /// to one-snapshot-per-interval and one-group-overall.
    #[test]
    fn group_size_does_not_change_answers(seed in any::<u64>(), k in 1usize..70) {
        use tgraph_core::repr::HgRepr;
        let g = corpus_graph(seed, &CorpusParams::default());
        let baseline =
            tgraph_core::analytics::connected_components(&g.strip_attrs(), "comp").unwrap();
        let hg = HgRepr::build_grouped(&g, k);
        prop_assert_eq!(hg.to_tgraph(), g.strip_attrs());
        prop_assert_eq!(hg.connected_components("comp").unwrap(), baseline);
    }
}
