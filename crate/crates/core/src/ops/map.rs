//! Attribute map operators.

use crate::error::GraphError;
use crate::expr::{Binding, EvalCtx, MapFunc};
use crate::graph::TGraph;
use crate::relation::TemporalRelation;

/// Rewrites vertex property sets through `f`. Presence relations are
/// untouched; entities without an attribute record stay without one.
/// Records whose updated property set ends up empty are dropped.
pub fn vmap(t: &TGraph, f: &MapFunc) -> Result<TGraph, GraphError> {
    let mut tuples = Vec::new();
    for (v, ps, p) in t.vertex_attrs().iter() {
        let ctx = EvalCtx {
            v: Binding::vertex_with_props(*v, Some(ps)),
            p: Some(*p),
            ..EvalCtx::default()
        };
        let out = f.apply(ps, &ctx).map_err(GraphError::Eval)?;
        if !out.is_empty() {
            tuples.push((*v, out, *p));
        }
    }
    let tav = TemporalRelation::from_tuples(tuples).coalesce();
    Ok(t.with_parts(
        t.vertices().clone(),
        t.edges().clone(),
        tav,
        t.edge_attrs().clone(),
    ))
}

/// Rewrites edge property sets through `f`; the edge-side mirror of [`vmap`].
pub fn emap(t: &TGraph, f: &MapFunc) -> Result<TGraph, GraphError> {
    let mut tuples = Vec::new();
    for (e, ps, p) in t.edge_attrs().iter() {
        let ctx = EvalCtx {
            e: Binding::edge_with_props(*e, Some(ps)),
            p: Some(*p),
            ..EvalCtx::default()
        };
        let out = f.apply(ps, &ctx).map_err(GraphError::Eval)?;
        if !out.is_empty() {
            tuples.push((*e, out, *p));
        }
    }
    let tae = TemporalRelation::from_tuples(tuples).coalesce();
    Ok(t.with_parts(
        t.vertices().clone(),
        t.edges().clone(),
        t.vertex_attrs().clone(),
        tae,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{BinOp, Expr, Scope};
    use crate::fixtures::coauthors;
    use crate::graph::VertexId;
    use crate::props;
    use crate::time::{Interval, TimePoint};
    use crate::value::PropertyValue;

    #[test]
    fn vmap_updates_existing_records_only() {
        let g = coauthors();
        let f = MapFunc::new(vec![(
            "double_sal".to_string(),
            Expr::Binary(
                BinOp::Mul,
                Box::new(Expr::Prop(Scope::V, "sal".into())),
                Box::new(Expr::Lit(2i64.into())),
            ),
        )]);
        let m = g.vmap(&f).unwrap();
        assert_eq!(m.validate(), vec![]);
        assert_eq!(m.vertices(), g.vertices());
        assert_eq!(m.edges(), g.edges());
        let at2 = m.snapshot_at(TimePoint(2));
        // v2 had sal=100 at 2; the assignment adds double_sal=200 and keeps the rest.
        let ps = at2.vertex_props.get(&VertexId(2)).unwrap();
        assert_eq!(ps.get("double_sal"), Some(&PropertyValue::Int(200)));
        assert_eq!(ps.get("sal"), Some(&PropertyValue::Int(100)));
        // v1 has no sal: the assignment is skipped, the record survives unchanged.
        assert_eq!(
            at2.vertex_props.get(&VertexId(1)),
            Some(&props! {"name" => "Ann", "school" => "Drexel"})
        );
    }

    #[test]
    fn vmap_output_coalesces_when_values_converge() {
        // Overwrite sal with a constant: v2's two salary records become one.
        let g = coauthors();
        let f = MapFunc::new(vec![("sal".to_string(), Expr::Lit(1i64.into()))]);
        let m = g.vmap(&f).unwrap();
        let v2_rows: Vec<_> = m
            .vertex_attrs()
            .iter()
            .filter(|(v, _, _)| *v == VertexId(2))
            .collect();
        assert_eq!(v2_rows.len(), 1);
        assert_eq!(v2_rows[0].2, Interval::from_raw(1, 6).unwrap());
    }

    #[test]
    fn emap_touches_edge_attrs_only() {
        let g = coauthors();
        let f = MapFunc::new(vec![(
            "heavy".to_string(),
            Expr::Binary(
                BinOp::Ge,
                Box::new(Expr::Prop(Scope::E, "cnt".into())),
                Box::new(Expr::Lit(3i64.into())),
            ),
        )]);
        let m = g.emap(&f).unwrap();
        assert_eq!(m.validate(), vec![]);
        assert_eq!(m.vertex_attrs(), g.vertex_attrs());
        let snap = m.snapshot_at(TimePoint(2));
        let (_, ps) = snap.edge_props.iter().next().unwrap();
        assert_eq!(ps.get("heavy"), Some(&PropertyValue::Bool(true)));
    }
}
