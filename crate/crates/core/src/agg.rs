//! Aggregation functions and temporal group-by (`resolve`).
//!
//! `resolve` reconciles attribute relations that violate the one-record-per-
//! entity rule: within each key's group, periods are normalized against the
//! group's own change points, the live property sets on each sub-period are
//! bag-unioned, and per-name aggregation functions reduce conflicting values.
//! Names without an explicit spec fall back to `set` semantics, which
//! additionally collapses a single distinct value to the bare value, so
//! resolving an already-consistent relation changes nothing.
//!
//! Numeric folds sort their operands canonically before reducing. That makes
//! float results identical no matter which execution path produced the
//! operand multiset, which the cross-representation equivalence tests rely
//! on.

use std::collections::BTreeSet;

use ordered_float::OrderedFloat;
use rayon::prelude::*;

use crate::error::ValueError;
use crate::relation::{RelItem, TemporalRelation};
use crate::time::Interval;
use crate::value::{PropertySet, PropertyValue};

/// Aggregation function over a bag of temporal values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggFunc {
    /// Distinct values as a set; a single distinct value stays bare.
    Set,
    /// All values in chronological order `(start, end, value)`.
    List,
    /// Number of values.
    Count,
    Min,
    Max,
    Sum,
    Mean,
    /// Population standard deviation.
    Stdev,
    /// Canonically smallest value: a deterministic pick-one.
    Any,
    /// Value whose originating period starts earliest.
    First,
    /// Value whose originating period ends latest.
    Last,
}

impl AggFunc {
    pub fn name(&self) -> &'static str {
        match self {
            AggFunc::Set => "set",
            AggFunc::List => "list",
            AggFunc::Count => "count",
            AggFunc::Min => "min",
            AggFunc::Max => "max",
            AggFunc::Sum => "sum",
            AggFunc::Mean => "mean",
            AggFunc::Stdev => "stdev",
            AggFunc::Any => "any",
            AggFunc::First => "first",
            AggFunc::Last => "last",
        }
    }

    pub fn parse(name: &str) -> Option<AggFunc> {
        Some(match name {
            "set" => AggFunc::Set,
            "list" => AggFunc::List,
            "count" => AggFunc::Count,
            "min" => AggFunc::Min,
            "max" => AggFunc::Max,
            "sum" => AggFunc::Sum,
            "mean" | "avg" => AggFunc::Mean,
            "stdev" => AggFunc::Stdev,
            "any" => AggFunc::Any,
            "first" => AggFunc::First,
            "last" => AggFunc::Last,
            _ => return None,
        })
    }
}

/// One entry of a resolve specification: `func(input) as output`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolveSpec {
    pub func: AggFunc,
    pub input: String,
    pub output: String,
}

impl ResolveSpec {
    pub fn new(func: AggFunc, name: impl Into<String>) -> Self {
        let input = name.into();
        ResolveSpec {
            func,
            output: input.clone(),
            input,
        }
    }

    pub fn renamed(func: AggFunc, input: impl Into<String>, output: impl Into<String>) -> Self {
        ResolveSpec {
            func,
            input: input.into(),
            output: output.into(),
        }
    }
}

/// A value together with the period of the tuple it came from. `first` and
/// `last` order by this period; every other function ignores it.
pub type TimedValue = (PropertyValue, Interval);

/// Applies one aggregation function to a non-empty bag of timed values.
pub fn apply_agg(func: AggFunc, values: &[TimedValue]) -> Result<PropertyValue, ValueError> {
    if values.is_empty() {
        return Err(ValueError::EmptyAggregate {
            func: func.name().to_string(),
        });
    }
    match func {
        AggFunc::Count => Ok(PropertyValue::Int(values.len() as i64)),
        AggFunc::Set => {
            let distinct: BTreeSet<PropertyValue> =
                values.iter().map(|(v, _)| v.clone()).collect();
            Ok(PropertyValue::Set(distinct))
        }
        AggFunc::List => {
            let mut rows: Vec<&TimedValue> = values.iter().collect();
            rows.sort_by(|(va, pa), (vb, pb)| pa.cmp(pb).then_with(|| va.cmp(vb)));
            Ok(PropertyValue::List(
                rows.into_iter().map(|(v, _)| v.clone()).collect(),
            ))
        }
        AggFunc::Any => Ok(values.iter().map(|(v, _)| v).min().unwrap().clone()),
        AggFunc::First => {
            let best = values
                .iter()
                .min_by(|(va, pa), (vb, pb)| pa.start().cmp(&pb.start()).then_with(|| va.cmp(vb)))
                .unwrap();
            Ok(best.0.clone())
        }
        AggFunc::Last => {
            let latest = values.iter().map(|(_, p)| p.end()).max().unwrap();
            let best = values
                .iter()
                .filter(|(_, p)| p.end() == latest)
                .map(|(v, _)| v)
                .min()
                .unwrap();
            Ok(best.clone())
        }
        AggFunc::Min | AggFunc::Max => extremum(func, values),
        AggFunc::Sum => numeric_sum(values),
        AggFunc::Mean => {
            let (sum, n) = float_sum(func, values)?;
            Ok(PropertyValue::float(sum / n as f64))
        }
        AggFunc::Stdev => {
            let (sum, n) = float_sum(func, values)?;
            let mean = sum / n as f64;
            let mut sq: Vec<OrderedFloat<f64>> = values
                .iter()
                .map(|(v, _)| OrderedFloat((v.as_f64().unwrap() - mean).powi(2)))
                .collect();
            sq.sort();
            let var: f64 = sq.into_iter().map(|x| x.0).sum::<f64>() / n as f64;
            Ok(PropertyValue::float(var.sqrt()))
        }
    }
}

fn extremum(func: AggFunc, values: &[TimedValue]) -> Result<PropertyValue, ValueError> {
    let all_numeric = values.iter().all(|(v, _)| v.is_numeric());
    if all_numeric {
        let pick = |a: &PropertyValue, b: &PropertyValue| {
            let (x, y) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            let cmp = OrderedFloat(x).cmp(&OrderedFloat(y)).then_with(|| a.cmp(b));
            match func {
                AggFunc::Min => cmp != std::cmp::Ordering::Greater,
                _ => cmp != std::cmp::Ordering::Less,
            }
        };
        let mut best = &values[0].0;
        for (v, _) in &values[1..] {
            if !pick(best, v) {
                best = v;
            }
        }
        return Ok(best.clone());
    }
    // Non-numeric extrema need a single comparable type.
    let tag = values[0].0.type_name();
    if values.iter().any(|(v, _)| v.type_name() != tag) {
        return Err(ValueError::BadOperands {
            func: func.name().to_string(),
            expected: "values of one comparable type",
            got: "mixed types".to_string(),
        });
    }
    let it = values.iter().map(|(v, _)| v);
    let best = match func {
        AggFunc::Min => it.min(),
        _ => it.max(),
    };
    Ok(best.unwrap().clone())
}

fn numeric_sum(values: &[TimedValue]) -> Result<PropertyValue, ValueError> {
    if values.iter().any(|(v, _)| !v.is_numeric()) {
        return Err(ValueError::BadOperands {
            func: "sum".to_string(),
            expected: "numeric values",
            got: non_numeric_tag(values),
        });
    }
    if values.iter().all(|(v, _)| matches!(v, PropertyValue::Int(_))) {
        let mut ints: Vec<i64> = values
            .iter()
            .map(|(v, _)| match v {
                PropertyValue::Int(i) => *i,
                _ => unreachable!(),
            })
            .collect();
        ints.sort_unstable();
        let mut acc: i64 = 0;
        for i in ints {
            acc = acc
                .checked_add(i)
                .ok_or_else(|| ValueError::Overflow("sum".to_string()))?;
        }
        return Ok(PropertyValue::Int(acc));
    }
    let (sum, _) = float_sum(AggFunc::Sum, values)?;
    Ok(PropertyValue::float(sum))
}

/// Sum of the operands as floats, folded in sorted order for determinism.
fn float_sum(func: AggFunc, values: &[TimedValue]) -> Result<(f64, usize), ValueError> {
    let mut xs = Vec::with_capacity(values.len());
    for (v, _) in values {
        match v.as_f64() {
            Some(x) => xs.push(OrderedFloat(x)),
            None => {
                return Err(ValueError::BadOperands {
                    func: func.name().to_string(),
                    expected: "numeric values",
                    got: non_numeric_tag(values),
                })
            }
        }
    }
    xs.sort();
    Ok((xs.iter().map(|x| x.0).sum(), values.len()))
}

fn non_numeric_tag(values: &[TimedValue]) -> String {
    values
        .iter()
        .find(|(v, _)| !v.is_numeric())
        .map(|(v, _)| v.type_name().to_string())
        .unwrap_or_else(|| "?".to_string())
}

/// Default reconciliation: distinct values become a set, a lone distinct
/// value stays bare.
pub fn set_reduce(values: &[TimedValue]) -> PropertyValue {
    let distinct: BTreeSet<&PropertyValue> = values.iter().map(|(v, _)| v).collect();
    if distinct.len() == 1 {
        (*distinct.iter().next().unwrap()).clone()
    } else {
        PropertyValue::Set(distinct.into_iter().cloned().collect())
    }
}

/// Temporal group-by over an attribute relation.
///
/// Tuples sharing a key are normalized against the group's change points; on
/// each sub-period the live property sets are bag-unioned and reduced per
/// name. Names covered by `specs` are consumed into the spec outputs; all
/// other names get [`set_reduce`]. The output satisfies the one-record rule
/// and is coalesced. Tuples whose reduced property set is empty are dropped.
pub fn resolve<K: RelItem>(
    specs: &[ResolveSpec],
    r: &TemporalRelation<K, PropertySet>,
) -> Result<TemporalRelation<K, PropertySet>, ValueError> {
    for (i, a) in specs.iter().enumerate() {
        for b in &specs[i + 1..] {
            if a.output == b.output {
                return Err(ValueError::BadOperands {
                    func: a.func.name().to_string(),
                    expected: "distinct output names",
                    got: format!("duplicate `{}`", a.output),
                });
            }
        }
    }

    // Group tuples by key preserving canonical order.
    let mut groups: Vec<(&K, Vec<(&PropertySet, Interval)>)> = Vec::new();
    for (k, ps, p) in r.iter() {
        match groups.last_mut() {
            Some((gk, rows)) if *gk == k => rows.push((ps, *p)),
            _ => groups.push((k, vec![(ps, *p)])),
        }
    }

    let per_group: Result<Vec<Vec<(K, PropertySet, Interval)>>, ValueError> = groups
        .par_iter()
        .map(|(k, rows)| {
            let mut bounds: Vec<_> = rows
                .iter()
                .flat_map(|(_, p)| [p.start(), p.end()])
                .collect();
            bounds.sort();
            bounds.dedup();
            let mut out = Vec::new();
            for w in bounds.windows(2) {
                let sub = Interval::new(w[0], w[1]).expect("distinct sorted bounds");
                // No boundary lies inside `sub`, so tuple liveness is constant on it.
                let live: Vec<&(&PropertySet, Interval)> = rows
                    .iter()
                    .filter(|(_, p)| p.contains(sub.start()))
                    .collect();
                if live.is_empty() {
                    continue;
                }
                let mut bag: Vec<(&String, TimedValue)> = Vec::new();
                for (ps, p) in &live {
                    for (name, value) in ps.iter() {
                        bag.push((name, (value.clone(), *p)));
                    }
                }
                bag.sort_by(|a, b| a.0.cmp(b.0));
                let mut reduced = PropertySet::new();
                let mut i = 0;
                while i < bag.len() {
                    let name = bag[i].0;
                    let mut j = i;
                    while j < bag.len() && bag[j].0 == name {
                        j += 1;
                    }
                    let vals: Vec<TimedValue> = bag[i..j].iter().map(|(_, tv)| tv.clone()).collect();
                    let matching: Vec<&ResolveSpec> =
                        specs.iter().filter(|s| s.input == *name).collect();
                    if matching.is_empty() {
                        reduced.insert(name.clone(), set_reduce(&vals));
                    } else {
                        for spec in matching {
                            reduced.insert(spec.output.clone(), apply_agg(spec.func, &vals)?);
                        }
                    }
                    i = j;
                }
                if !reduced.is_empty() {
                    out.push(((*k).clone(), reduced, sub));
                }
            }
            Ok(out)
        })
        .collect();

    let tuples: Vec<(K, PropertySet, Interval)> = per_group?.into_iter().flatten().collect();
    Ok(TemporalRelation::from_tuples(tuples).coalesce())
}
