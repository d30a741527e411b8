//! Expression language for predicates, map functions, and vertex programs.
//!
//! Expressions are evaluated against an [`EvalCtx`] that binds a subset of
//! named scopes: `v`/`e` (the entity a predicate or map runs on), `v1`/`v2`
//! (the two vertex sides of a join or message), `e1`/`e2` (the two edge legs
//! of a path join), `p`/`p1`/`p2` (tuple periods), `state` and `agg` (vertex
//! program state and combined messages).
//!
//! Missing properties evaluate to `Null`. Null propagates through arithmetic
//! and comparisons; predicates treat a Null result as false, and map
//! assignments that evaluate to Null are skipped. Equality across types is
//! defined (always false); ordering across incompatible types yields Null.
//!
//! Whether an expression references time (`p.start`, interval literals,
//! period tests) is observable via [`Expr::depends_on_time`]; operators use
//! it to pick between plain and period-extended evaluation.

use ordered_float::OrderedFloat;

use crate::agg::{apply_agg, AggFunc, TimedValue};
use crate::graph::{EdgeKey, VertexId};
use crate::time::Interval;
use crate::value::{PropertySet, PropertyValue};

/// Named scopes an expression can reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scope {
    V,
    E,
    V1,
    V2,
    E1,
    E2,
}

impl Scope {
    pub fn token(&self) -> &'static str {
        match self {
            Scope::V => "v",
            Scope::E => "e",
            Scope::V1 => "v1",
            Scope::V2 => "v2",
            Scope::E1 => "e1",
            Scope::E2 => "e2",
        }
    }
}

/// Period references: the row period and the two legs of a path join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PeriodRef {
    P,
    P1,
    P2,
}

impl PeriodRef {
    pub fn token(&self) -> &'static str {
        match self {
            PeriodRef::P => "p",
            PeriodRef::P1 => "p1",
            PeriodRef::P2 => "p2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn token(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

/// Built-in functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FuncName {
    /// Collection reductions; a scalar argument acts as a singleton.
    Mean,
    Stdev,
    Sum,
    Min,
    Max,
    Count,
    /// Size of a collection or length of a text value.
    Len,
    Abs,
    /// True when the argument is not Null.
    Has,
    /// `contains(collection, x)`.
    Contains,
    /// Period tests against an interval literal: `overlaps(i)`, `during(i)`,
    /// `before(i)`, `after(i)` test the row period `p`.
    Overlaps,
    During,
    Before,
    After,
}

impl FuncName {
    pub fn token(&self) -> &'static str {
        match self {
            FuncName::Mean => "mean",
            FuncName::Stdev => "stdev",
            FuncName::Sum => "sum",
            FuncName::Min => "min",
            FuncName::Max => "max",
            FuncName::Count => "count",
            FuncName::Len => "len",
            FuncName::Abs => "abs",
            FuncName::Has => "has",
            FuncName::Contains => "contains",
            FuncName::Overlaps => "overlaps",
            FuncName::During => "during",
            FuncName::Before => "before",
            FuncName::After => "after",
        }
    }

    pub fn parse(s: &str) -> Option<FuncName> {
        Some(match s {
            "mean" | "avg" => FuncName::Mean,
            "stdev" => FuncName::Stdev,
            "sum" => FuncName::Sum,
            "min" => FuncName::Min,
            "max" => FuncName::Max,
            "count" => FuncName::Count,
            "len" => FuncName::Len,
            "abs" => FuncName::Abs,
            "has" => FuncName::Has,
            "contains" => FuncName::Contains,
            "overlaps" => FuncName::Overlaps,
            "during" => FuncName::During,
            "before" => FuncName::Before,
            "after" => FuncName::After,
            _ => return None,
        })
    }
}

/// An expression tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Lit(PropertyValue),
    /// A calendar date literal, kept symbolic until a dataset manifest maps
    /// it onto the timeline. Evaluation of an unresolved date is an error.
    Date(String),
    /// Property access `scope.a.name`.
    Prop(Scope, String),
    /// Vertex identity `scope.id`.
    Id(Scope),
    /// Edge endpoints `scope.src` / `scope.dst`.
    Src(Scope),
    Dst(Scope),
    /// Period endpoints `p.start` / `p.end` as timeline integers.
    Start(PeriodRef),
    End(PeriodRef),
    /// Interval literal `[a, b)`; operands must resolve to timeline integers.
    IntervalLit(Box<Expr>, Box<Expr>),
    /// Vertex program state: bare `state` is the current vertex's state,
    /// `v1.state` / `v2.state` address message endpoints.
    State(Scope),
    /// Combined incoming message in a vertex program update (`agg`).
    MsgAgg,
    /// Out-degree of a vertex scope in the current snapshot (`v1.outdeg`).
    OutDegree(Scope),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(FuncName, Vec<Expr>),
}

/// A map function: ordered `name := expr` assignments applied as updates to
/// a property set. Assignments evaluating to Null are skipped.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MapFunc {
    pub assigns: Vec<(String, Expr)>,
}

impl MapFunc {
    pub fn new(assigns: Vec<(String, Expr)>) -> Self {
        MapFunc { assigns }
    }

    pub fn depends_on_time(&self) -> bool {
        self.assigns.iter().any(|(_, e)| e.depends_on_time())
    }

    /// Applies the assignments to `input` under `ctx`.
    pub fn apply(&self, input: &PropertySet, ctx: &EvalCtx) -> Result<PropertySet, String> {
        let mut out = input.clone();
        for (name, expr) in &self.assigns {
            match expr.eval(ctx)? {
                EvalValue::Null => {}
                EvalValue::Value(v) => out.insert(name.clone(), v),
                EvalValue::Period(_) => {
                    return Err(format!("assignment `{name}` produced a period, not a value"))
                }
            }
        }
        Ok(out)
    }
}

/// One scope's bindings during evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Binding<'a> {
    pub vertex: Option<VertexId>,
    pub edge: Option<EdgeKey>,
    pub props: Option<&'a PropertySet>,
    pub state: Option<&'a PropertyValue>,
    pub out_degree: Option<i64>,
}

impl<'a> Binding<'a> {
    pub fn vertex_with_props(v: VertexId, props: Option<&'a PropertySet>) -> Self {
        Binding {
            vertex: Some(v),
            props,
            ..Binding::default()
        }
    }

    pub fn edge_with_props(e: EdgeKey, props: Option<&'a PropertySet>) -> Self {
        Binding {
            edge: Some(e),
            props,
            ..Binding::default()
        }
    }
}

/// Evaluation context: whichever scopes the calling operator binds.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvalCtx<'a> {
    pub v: Binding<'a>,
    pub e: Binding<'a>,
    pub v1: Binding<'a>,
    pub v2: Binding<'a>,
    pub e1: Binding<'a>,
    pub e2: Binding<'a>,
    pub p: Option<Interval>,
    pub p1: Option<Interval>,
    pub p2: Option<Interval>,
    pub agg: Option<&'a PropertyValue>,
}

impl<'a> EvalCtx<'a> {
    fn scope(&self, s: Scope) -> &Binding<'a> {
        match s {
            Scope::V => &self.v,
            Scope::E => &self.e,
            Scope::V1 => &self.v1,
            Scope::V2 => &self.v2,
            Scope::E1 => &self.e1,
            Scope::E2 => &self.e2,
        }
    }

    fn period(&self, r: PeriodRef) -> Option<Interval> {
        match r {
            PeriodRef::P => self.p,
            PeriodRef::P1 => self.p1,
            PeriodRef::P2 => self.p2,
        }
    }
}

/// Result of evaluating an expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalValue {
    Value(PropertyValue),
    Period(Interval),
    Null,
}

impl EvalValue {
    fn value(v: PropertyValue) -> Self {
        EvalValue::Value(v)
    }

    pub fn into_option(self) -> Option<PropertyValue> {
        match self {
            EvalValue::Value(v) => Some(v),
            _ => None,
        }
    }
}

impl Expr {
    /// True when evaluation inspects tuple periods or interval literals.
    pub fn depends_on_time(&self) -> bool {
        match self {
            Expr::Start(_) | Expr::End(_) | Expr::IntervalLit(..) | Expr::Date(_) => true,
            Expr::Lit(_)
            | Expr::Prop(..)
            | Expr::Id(_)
            | Expr::Src(_)
            | Expr::Dst(_)
            | Expr::State(_)
            | Expr::MsgAgg
            | Expr::OutDegree(_) => false,
            Expr::Unary(_, a) => a.depends_on_time(),
            Expr::Binary(_, a, b) => a.depends_on_time() || b.depends_on_time(),
            Expr::Call(f, args) => {
                matches!(
                    f,
                    FuncName::Overlaps | FuncName::During | FuncName::Before | FuncName::After
                ) || args.iter().any(Expr::depends_on_time)
            }
        }
    }

    /// Rewrites date literals into timeline integers via `map`.
    pub fn resolve_dates(&self, map: &impl Fn(&str) -> Result<i64, String>) -> Result<Expr, String> {
        Ok(match self {
            Expr::Date(d) => Expr::Lit(PropertyValue::Int(map(d)?)),
            Expr::Unary(op, a) => Expr::Unary(*op, Box::new(a.resolve_dates(map)?)),
            Expr::Binary(op, a, b) => Expr::Binary(
                *op,
                Box::new(a.resolve_dates(map)?),
                Box::new(b.resolve_dates(map)?),
            ),
            Expr::IntervalLit(a, b) => Expr::IntervalLit(
                Box::new(a.resolve_dates(map)?),
                Box::new(b.resolve_dates(map)?),
            ),
            Expr::Call(f, args) => Expr::Call(
                *f,
                args.iter()
                    .map(|a| a.resolve_dates(map))
                    .collect::<Result<_, _>>()?,
            ),
            other => other.clone(),
        })
    }

    /// Evaluates under `ctx`.
    pub fn eval(&self, ctx: &EvalCtx) -> Result<EvalValue, String> {
        match self {
            Expr::Lit(v) => Ok(EvalValue::value(v.clone())),
            Expr::Date(d) => Err(format!(
                "date literal {d} was not resolved against a timeline"
            )),
            Expr::Prop(s, name) => Ok(match ctx.scope(*s).props.and_then(|ps| ps.get(name)) {
                Some(v) => EvalValue::value(v.clone()),
                None => EvalValue::Null,
            }),
            Expr::Id(s) => Ok(match ctx.scope(*s).vertex {
                Some(v) => EvalValue::value(PropertyValue::Int(v.0 as i64)),
                None => EvalValue::Null,
            }),
            Expr::Src(s) => Ok(match ctx.scope(*s).edge {
                Some(e) => EvalValue::value(PropertyValue::Int(e.src.0 as i64)),
                None => EvalValue::Null,
            }),
            Expr::Dst(s) => Ok(match ctx.scope(*s).edge {
                Some(e) => EvalValue::value(PropertyValue::Int(e.dst.0 as i64)),
                None => EvalValue::Null,
            }),
            Expr::Start(r) => Ok(match ctx.period(*r) {
                Some(p) => EvalValue::value(PropertyValue::Int(p.start().0)),
                None => EvalValue::Null,
            }),
            Expr::End(r) => Ok(match ctx.period(*r) {
                Some(p) => EvalValue::value(PropertyValue::Int(p.end().0)),
                None => EvalValue::Null,
            }),
            Expr::IntervalLit(a, b) => {
                let (a, b) = (a.eval(ctx)?, b.eval(ctx)?);
                match (a, b) {
                    (
                        EvalValue::Value(PropertyValue::Int(s)),
                        EvalValue::Value(PropertyValue::Int(e)),
                    ) => match Interval::from_raw(s, e) {
                        Ok(iv) => Ok(EvalValue::Period(iv)),
                        Err(e) => Err(e.to_string()),
                    },
                    _ => Err("interval literal bounds must be timeline integers".to_string()),
                }
            }
            Expr::State(s) => Ok(match ctx.scope(*s).state {
                Some(v) => EvalValue::value(v.clone()),
                None => EvalValue::Null,
            }),
            Expr::MsgAgg => Ok(match ctx.agg {
                Some(v) => EvalValue::value(v.clone()),
                None => EvalValue::Null,
            }),
            Expr::OutDegree(s) => Ok(match ctx.scope(*s).out_degree {
                Some(d) => EvalValue::value(PropertyValue::Int(d)),
                None => EvalValue::Null,
            }),
            Expr::Unary(op, a) => eval_unary(*op, a.eval(ctx)?),
            Expr::Binary(op, a, b) => eval_binary(*op, a.eval(ctx)?, b.eval(ctx)?),
            Expr::Call(f, args) => eval_call(*f, args, ctx),
        }
    }

    /// Evaluates as a predicate: Null counts as false, non-boolean values
    /// are an error.
    pub fn eval_predicate(&self, ctx: &EvalCtx) -> Result<bool, String> {
        match self.eval(ctx)? {
            EvalValue::Value(PropertyValue::Bool(b)) => Ok(b),
            EvalValue::Null => Ok(false),
            other => Err(format!(
                "predicate evaluated to {}, expected a boolean",
                describe(&other)
            )),
        }
    }
}

fn describe(v: &EvalValue) -> String {
    match v {
        EvalValue::Value(v) => format!("{} `{v}`", v.type_name()),
        EvalValue::Period(p) => format!("period {p}"),
        EvalValue::Null => "null".to_string(),
    }
}

fn eval_unary(op: UnaryOp, a: EvalValue) -> Result<EvalValue, String> {
    match op {
        UnaryOp::Not => {
            let b = match a {
                EvalValue::Value(PropertyValue::Bool(b)) => b,
                EvalValue::Null => false,
                other => return Err(format!("cannot negate {}", describe(&other))),
            };
            Ok(EvalValue::value(PropertyValue::Bool(!b)))
        }
        UnaryOp::Neg => match a {
            EvalValue::Value(PropertyValue::Int(i)) => i
                .checked_neg()
                .map(|n| EvalValue::value(PropertyValue::Int(n)))
                .ok_or_else(|| "integer overflow in negation".to_string()),
            EvalValue::Value(PropertyValue::Float(f)) => {
                Ok(EvalValue::value(PropertyValue::Float(-f)))
            }
            EvalValue::Null => Ok(EvalValue::Null),
            other => Err(format!("cannot negate {}", describe(&other))),
        },
    }
}

fn eval_binary(op: BinOp, a: EvalValue, b: EvalValue) -> Result<EvalValue, String> {
    use BinOp::*;
    match op {
        And | Or => {
            let to_bool = |v: EvalValue| -> Result<bool, String> {
                match v {
                    EvalValue::Value(PropertyValue::Bool(x)) => Ok(x),
                    EvalValue::Null => Ok(false),
                    other => Err(format!("logical operand is {}", describe(&other))),
                }
            };
            let (x, y) = (to_bool(a)?, to_bool(b)?);
            Ok(EvalValue::value(PropertyValue::Bool(if op == And {
                x && y
            } else {
                x || y
            })))
        }
        Eq | Ne => {
            // Null == Null is Null (unknown), mirroring missing-data logic.
            if matches!(a, EvalValue::Null) || matches!(b, EvalValue::Null) {
                return Ok(EvalValue::Null);
            }
            let equal = match (&a, &b) {
                (EvalValue::Value(x), EvalValue::Value(y)) => match (x.as_f64(), y.as_f64()) {
                    (Some(fx), Some(fy)) => OrderedFloat(fx) == OrderedFloat(fy),
                    _ => x == y,
                },
                (EvalValue::Period(x), EvalValue::Period(y)) => x == y,
                _ => false,
            };
            Ok(EvalValue::value(PropertyValue::Bool(if op == Eq {
                equal
            } else {
                !equal
            })))
        }
        Lt | Le | Gt | Ge => {
            if matches!(a, EvalValue::Null) || matches!(b, EvalValue::Null) {
                return Ok(EvalValue::Null);
            }
            let ord = match (&a, &b) {
                (EvalValue::Value(x), EvalValue::Value(y)) => match (x.as_f64(), y.as_f64()) {
                    (Some(fx), Some(fy)) => Some(OrderedFloat(fx).cmp(&OrderedFloat(fy))),
                    _ => match (x, y) {
                        (PropertyValue::Text(s), PropertyValue::Text(t)) => Some(s.cmp(t)),
                        (PropertyValue::Bool(s), PropertyValue::Bool(t)) => Some(s.cmp(t)),
                        _ => None,
                    },
                },
                _ => None,
            };
            Ok(match ord {
                None => EvalValue::Null,
                Some(o) => {
                    let res = match op {
                        Lt => o.is_lt(),
                        Le => o.is_le(),
                        Gt => o.is_gt(),
                        _ => o.is_ge(),
                    };
                    EvalValue::value(PropertyValue::Bool(res))
                }
            })
        }
        Add | Sub | Mul | Div | Mod => {
            if matches!(a, EvalValue::Null) || matches!(b, EvalValue::Null) {
                return Ok(EvalValue::Null);
            }
            let (x, y) = match (&a, &b) {
                (EvalValue::Value(x), EvalValue::Value(y)) if x.is_numeric() && y.is_numeric() => {
                    (x.clone(), y.clone())
                }
                // Text concatenation is the one non-numeric arithmetic form.
                (
                    EvalValue::Value(PropertyValue::Text(s)),
                    EvalValue::Value(PropertyValue::Text(t)),
                ) if op == Add => {
                    return Ok(EvalValue::value(PropertyValue::Text(format!("{s}{t}"))));
                }
                _ => {
                    return Err(format!(
                        "arithmetic `{}` needs numeric operands, got {} and {}",
                        op.token(),
                        describe(&a),
                        describe(&b)
                    ))
                }
            };
            // Division always promotes to float; other ops stay integral
            // when both sides are integers.
            if op == Div {
                let (fx, fy) = (x.as_f64().unwrap(), y.as_f64().unwrap());
                return Ok(EvalValue::value(PropertyValue::float(fx / fy)));
            }
            match (&x, &y) {
                (PropertyValue::Int(i), PropertyValue::Int(j)) => {
                    let r = match op {
                        Add => i.checked_add(*j),
                        Sub => i.checked_sub(*j),
                        Mul => i.checked_mul(*j),
                        Mod => {
                            if *j == 0 {
                                return Err("modulo by zero".to_string());
                            }
                            i.checked_rem_euclid(*j)
                        }
                        _ => unreachable!(),
                    };
                    r.map(|n| EvalValue::value(PropertyValue::Int(n)))
                        .ok_or_else(|| format!("integer overflow in `{}`", op.token()))
                }
                _ => {
                    let (fx, fy) = (x.as_f64().unwrap(), y.as_f64().unwrap());
                    let r = match op {
                        Add => fx + fy,
                        Sub => fx - fy,
                        Mul => fx * fy,
                        Mod => fx.rem_euclid(fy),
                        _ => unreachable!(),
                    };
                    Ok(EvalValue::value(PropertyValue::float(r)))
                }
            }
        }
    }
}

fn eval_call(f: FuncName, args: &[Expr], ctx: &EvalCtx) -> Result<EvalValue, String> {
    let arity = |n: usize| -> Result<(), String> {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!(
                "{} expects {n} argument(s), got {}",
                f.token(),
                args.len()
            ))
        }
    };
    match f {
        FuncName::Has => {
            arity(1)?;
            let v = args[0].eval(ctx)?;
            Ok(EvalValue::value(PropertyValue::Bool(!matches!(
                v,
                EvalValue::Null
            ))))
        }
        FuncName::Abs => {
            arity(1)?;
            match args[0].eval(ctx)? {
                EvalValue::Value(PropertyValue::Int(i)) => i
                    .checked_abs()
                    .map(|n| EvalValue::value(PropertyValue::Int(n)))
                    .ok_or_else(|| "integer overflow in abs".to_string()),
                EvalValue::Value(PropertyValue::Float(x)) => {
                    Ok(EvalValue::value(PropertyValue::float(x.abs())))
                }
                EvalValue::Null => Ok(EvalValue::Null),
                other => Err(format!("abs of {}", describe(&other))),
            }
        }
        FuncName::Len => {
            arity(1)?;
            match args[0].eval(ctx)? {
                EvalValue::Value(PropertyValue::List(v)) => {
                    Ok(EvalValue::value(PropertyValue::Int(v.len() as i64)))
                }
                EvalValue::Value(PropertyValue::Set(s)) => {
                    Ok(EvalValue::value(PropertyValue::Int(s.len() as i64)))
                }
                EvalValue::Value(PropertyValue::Map(m)) => {
                    Ok(EvalValue::value(PropertyValue::Int(m.len() as i64)))
                }
                EvalValue::Value(PropertyValue::Text(s)) => {
                    Ok(EvalValue::value(PropertyValue::Int(s.chars().count() as i64)))
                }
                EvalValue::Null => Ok(EvalValue::Null),
                other => Err(format!("len of {}", describe(&other))),
            }
        }
        FuncName::Contains => {
            arity(2)?;
            let coll = args[0].eval(ctx)?;
            let item = args[1].eval(ctx)?;
            match (coll, item) {
                (EvalValue::Null, _) | (_, EvalValue::Null) => Ok(EvalValue::Null),
                (EvalValue::Value(c), EvalValue::Value(x)) => {
                    let found = match &c {
                        PropertyValue::List(v) => v.contains(&x),
                        PropertyValue::Set(s) => s.contains(&x),
                        PropertyValue::Text(s) => match &x {
                            PropertyValue::Text(needle) => s.contains(needle.as_str()),
                            _ => false,
                        },
                        _ => return Err(format!("contains over {}", c.type_name())),
                    };
                    Ok(EvalValue::value(PropertyValue::Bool(found)))
                }
                _ => Err("contains over a period".to_string()),
            }
        }
        FuncName::Overlaps | FuncName::During | FuncName::Before | FuncName::After => {
            arity(1)?;
            let p = match ctx.p {
                Some(p) => p,
                None => return Ok(EvalValue::Null),
            };
            let arg = match args[0].eval(ctx)? {
                EvalValue::Period(iv) => iv,
                other => {
                    return Err(format!(
                        "{} expects an interval literal, got {}",
                        f.token(),
                        describe(&other)
                    ))
                }
            };
            let res = match f {
                FuncName::Overlaps => p.overlaps(&arg),
                FuncName::During => p.within(&arg),
                FuncName::Before => p.end() <= arg.start(),
                FuncName::After => p.start() >= arg.end(),
                _ => unreachable!(),
            };
            Ok(EvalValue::value(PropertyValue::Bool(res)))
        }
        FuncName::Mean | FuncName::Stdev | FuncName::Sum | FuncName::Min | FuncName::Max
        | FuncName::Count => {
            if args.is_empty() {
                return Err(format!("{} expects at least one argument", f.token()));
            }
            // One argument reduces over its elements; several arguments
            // reduce over all of them together, skipping nulls, so
            // `min(x, y)` works even when one side is unbound.
            let dummy = Interval::from_raw(0, 1).expect("static");
            let mut elems: Vec<TimedValue> = Vec::new();
            for arg in args {
                match arg.eval(ctx)? {
                    EvalValue::Null => continue,
                    EvalValue::Period(_) => {
                        return Err(format!("{} over a period", f.token()))
                    }
                    EvalValue::Value(v) => {
                        elems.extend(v.elements().into_iter().map(|x| (x.clone(), dummy)));
                    }
                }
            }
            if elems.is_empty() {
                return Ok(EvalValue::Null);
            }
            let func = match f {
                FuncName::Mean => AggFunc::Mean,
                FuncName::Stdev => AggFunc::Stdev,
                FuncName::Sum => AggFunc::Sum,
                FuncName::Min => AggFunc::Min,
                FuncName::Max => AggFunc::Max,
                FuncName::Count => AggFunc::Count,
                _ => unreachable!(),
            };
            apply_agg(func, &elems)
                .map(EvalValue::value)
                .map_err(|e| e.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::props;

    fn lit(v: impl Into<PropertyValue>) -> Expr {
        Expr::Lit(v.into())
    }

    fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    #[test]
    fn arithmetic_promotes_and_divides_as_float() {
        let ctx = EvalCtx::default();
        let e = bin(BinOp::Add, lit(2i64), lit(3i64));
        assert_eq!(e.eval(&ctx).unwrap(), EvalValue::Value(PropertyValue::Int(5)));
        let e = bin(BinOp::Div, lit(1i64), lit(2i64));
        assert_eq!(e.eval(&ctx).unwrap(), EvalValue::Value(PropertyValue::float(0.5)));
        let e = bin(BinOp::Mul, lit(2i64), lit(1.5f64));
        assert_eq!(e.eval(&ctx).unwrap(), EvalValue::Value(PropertyValue::float(3.0)));
    }

    #[test]
    fn missing_properties_are_null_and_predicates_treat_null_as_false() {
        let ps = props! {"sal" => 100i64};
        let ctx = EvalCtx {
            v: Binding::vertex_with_props(VertexId(1), Some(&ps)),
            ..EvalCtx::default()
        };
        let missing = Expr::Prop(Scope::V, "bonus".to_string());
        assert_eq!(missing.eval(&ctx).unwrap(), EvalValue::Null);
        let pred = bin(BinOp::Gt, missing.clone(), lit(0i64));
        assert!(!pred.eval_predicate(&ctx).unwrap());
        let has = Expr::Call(FuncName::Has, vec![missing]);
        assert_eq!(has.eval(&ctx).unwrap(), EvalValue::Value(PropertyValue::Bool(false)));
        let present = bin(BinOp::Ge, Expr::Prop(Scope::V, "sal".to_string()), lit(100i64));
        assert!(present.eval_predicate(&ctx).unwrap());
    }

    #[test]
    fn period_accessors_and_interval_tests() {
        let ctx = EvalCtx {
            p: Some(Interval::from_raw(3, 7).unwrap()),
            ..EvalCtx::default()
        };
        let start = Expr::Start(PeriodRef::P);
        assert_eq!(start.eval(&ctx).unwrap(), EvalValue::Value(PropertyValue::Int(3)));
        let test = Expr::Call(
            FuncName::Overlaps,
            vec![Expr::IntervalLit(Box::new(lit(6i64)), Box::new(lit(9i64)))],
        );
        assert!(test.eval_predicate(&ctx).unwrap());
        let test = Expr::Call(
            FuncName::Before,
            vec![Expr::IntervalLit(Box::new(lit(7i64)), Box::new(lit(9i64)))],
        );
        assert!(test.eval_predicate(&ctx).unwrap());
        assert!(test.depends_on_time());
        assert!(!lit(1i64).depends_on_time());
    }

    #[test]
    fn collection_reductions_match_aggregates() {
        let ctx = EvalCtx::default();
        let coll = lit(PropertyValue::list([
            PropertyValue::Int(2),
            PropertyValue::Int(4),
        ]));
        let mean = Expr::Call(FuncName::Mean, vec![coll.clone()]);
        assert_eq!(mean.eval(&ctx).unwrap(), EvalValue::Value(PropertyValue::float(3.0)));
        let cnt = Expr::Call(FuncName::Count, vec![coll.clone()]);
        assert_eq!(cnt.eval(&ctx).unwrap(), EvalValue::Value(PropertyValue::Int(2)));
        let single = Expr::Call(FuncName::Count, vec![lit(5i64)]);
        assert_eq!(single.eval(&ctx).unwrap(), EvalValue::Value(PropertyValue::Int(1)));
    }

    #[test]
    fn map_func_updates_and_skips_null() {
        let ps = props! {"deg" => PropertyValue::list([2i64.into(), 4i64.into()])};
        let ctx = EvalCtx {
            v: Binding::vertex_with_props(VertexId(1), Some(&ps)),
            ..EvalCtx::default()
        };
        let f = MapFunc::new(vec![
            (
                "cv".to_string(),
                bin(
                    BinOp::Mul,
                    bin(
                        BinOp::Div,
                        Expr::Call(FuncName::Stdev, vec![Expr::Prop(Scope::V, "deg".into())]),
                        Expr::Call(FuncName::Mean, vec![Expr::Prop(Scope::V, "deg".into())]),
                    ),
                    lit(100i64),
                ),
            ),
            ("gone".to_string(), Expr::Prop(Scope::V, "absent".into())),
        ]);
        let out = f.apply(&ps, &ctx).unwrap();
        assert!(out.contains("deg"));
        assert!(!out.contains("gone"));
        let cv = out.get("cv").unwrap().as_f64().unwrap();
        assert!((cv - 100.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unresolved_dates_error_but_resolve_dates_rewrites_them() {
        let e = bin(BinOp::Ge, Expr::Start(PeriodRef::P), Expr::Date("2015-02-15".into()));
        assert!(e.eval(&EvalCtx::default()).is_err() || matches!(e.eval(&EvalCtx::default()), Ok(EvalValue::Null)));
        let resolved = e
            .resolve_dates(&|d| if d == "2015-02-15" { Ok(1) } else { Err("?".into()) })
            .unwrap();
        let ctx = EvalCtx {
            p: Some(Interval::from_raw(3, 7).unwrap()),
            ..EvalCtx::default()
        };
        assert!(resolved.eval_predicate(&ctx).unwrap());
    }
}
