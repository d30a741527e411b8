//! The pipeline language: one statement per line, binding operator results
//! to names.
//!
//! ```text
//! # comment
//! t1 = slice(g, from=2015-01-15, to=2015-07-15)
//! t2 = agg(t1, dir=in, map="1", func=count, pname=deg)
//! t3 = node_w(t2, window=units:3, qv=all, qe=exists, fv="list(deg)")
//! t4 = vmap(t3, map="cv = stdev(v.a.deg) / mean(v.a.deg) * 100")
//! materialize t4
//! ```
//!
//! An assignment is `name = op(input[, input2][, key=value...])`. Inputs are
//! names: either results of earlier assignments or free names bound to
//! datasets at run time. Values are numbers, `yyyy-mm-dd` dates, words like
//! `units:3`, or double-quoted strings holding expression text (see
//! [`crate::exprs`]), map functions, or semicolon-separated lists. Each name
//! is assigned at most once, every use comes after its assignment, and the
//! pipeline ends with at least one `materialize name` statement naming the
//! results to keep.
//!
//! Operations and their keys:
//!
//! | op | keys |
//! |----|------|
//! | `slice(g)` | `from`, `to` (time point or date) |
//! | `vsubgraph(g)` / `esubgraph(g)` | `where` (predicate) |
//! | `vmap(g)` / `emap(g)` | `map` (assignments) |
//! | `agg(g)` | `dir`=in\|out\|both, `map`, `func`, `pname`, optional `where` |
//! | `union(a, b)` / `intersection(a, b)` | optional `fv`, `fe` (spec lists) |
//! | `difference(a, b)` | |
//! | `node_a(g)` | `by` (group list), optional `fv`, `fe` |
//! | `node_w(g)` | `window`=units:N\|changes:N\|lifetime, `qv`, `qe`, optional `fv`, `fe` |
//! | `edge_c(a, b)` | `query`=pairs\|paths, `where`, optional `attrs`, `fe` |
//! | `pregel(g)` | `init`, `msg`, `combine`=sum\|min\|max, `update`, `pname`, optional `iter`, `tol` |
//! | `pagerank(g)` | `pname`, optional `damping`, `tol`, `iter` |
//! | `cc(g)` | `pname` |
//!
//! Spec lists are `func(name)` or `func(name) as out`, semicolon-separated.
//! Group lists are property names or literal constants. Quantifiers are
//! `all`, `most`, `exists`, or `atleast:0.4`.

use std::collections::HashSet;
use std::fmt;

use tgraph_core::agg::{AggFunc, ResolveSpec};
use tgraph_core::analytics::ExprProgram;
use tgraph_core::expr::{Expr, MapFunc};
use tgraph_core::ops::{AggDirection, AggParams, EdgeQuery, GroupAttr, Quantifier, WindowKind};

use crate::exprs::{self, ExprError};

pub const DEFAULT_SUPERSTEPS: usize = 100;
pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_PR_TOLERANCE: f64 = 1e-9;

/// A parse or validation failure with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for PipelineError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, PipelineError> {
    Err(PipelineError {
        line,
        message: message.into(),
    })
}

/// A time bound: a timeline integer, or a date resolved by the dataset's
/// manifest at run time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeArg {
    Point(i64),
    Date(String),
}

impl TimeArg {
    pub fn resolve(&self, map: &impl Fn(&str) -> Result<i64, String>) -> Result<i64, String> {
        match self {
            TimeArg::Point(p) => Ok(*p),
            TimeArg::Date(d) => map(d),
        }
    }
}

/// One operation with its operand names and arguments.
#[derive(Debug, Clone, PartialEq)]
pub enum PipelineOp {
    Slice {
        input: String,
        from: TimeArg,
        to: TimeArg,
    },
    VSubgraph {
        input: String,
        cond: Expr,
    },
    ESubgraph {
        input: String,
        cond: Expr,
    },
    VMap {
        input: String,
        map: MapFunc,
    },
    EMap {
        input: String,
        map: MapFunc,
    },
    Agg {
        input: String,
        params: AggParams,
    },
    Union {
        left: String,
        right: String,
        fv: Vec<ResolveSpec>,
        fe: Vec<ResolveSpec>,
    },
    Intersection {
        left: String,
        right: String,
        fv: Vec<ResolveSpec>,
        fe: Vec<ResolveSpec>,
    },
    Difference {
        left: String,
        right: String,
    },
    NodeA {
        input: String,
        by: Vec<GroupAttr>,
        fv: Vec<ResolveSpec>,
        fe: Vec<ResolveSpec>,
    },
    NodeW {
        input: String,
        window: WindowKind,
        qv: Quantifier,
        qe: Quantifier,
        fv: Vec<ResolveSpec>,
        fe: Vec<ResolveSpec>,
    },
    EdgeC {
        left: String,
        right: String,
        query: EdgeQuery,
        fe: Vec<ResolveSpec>,
    },
    Pregel {
        input: String,
        program: ExprProgram,
        pname: String,
        supersteps: usize,
    },
    PageRank {
        input: String,
        pname: String,
        damping: f64,
        tolerance: f64,
        supersteps: usize,
    },
    Cc {
        input: String,
        pname: String,
    },
}

impl PipelineOp {
    pub fn op_name(&self) -> &'static str {
        match self {
            PipelineOp::Slice { .. } => "slice",
            PipelineOp::VSubgraph { .. } => "vsubgraph",
            PipelineOp::ESubgraph { .. } => "esubgraph",
            PipelineOp::VMap { .. } => "vmap",
            PipelineOp::EMap { .. } => "emap",
            PipelineOp::Agg { .. } => "agg",
            PipelineOp::Union { .. } => "union",
            PipelineOp::Intersection { .. } => "intersection",
            PipelineOp::Difference { .. } => "difference",
            PipelineOp::NodeA { .. } => "node_a",
            PipelineOp::NodeW { .. } => "node_w",
            PipelineOp::EdgeC { .. } => "edge_c",
            PipelineOp::Pregel { .. } => "pregel",
            PipelineOp::PageRank { .. } => "pagerank",
            PipelineOp::Cc { .. } => "cc",
        }
    }

    /// Operand names, left to right.
    pub fn inputs(&self) -> Vec<&str> {
        match self {
            PipelineOp::Slice { input, .. }
            | PipelineOp::VSubgraph { input, .. }
            | PipelineOp::ESubgraph { input, .. }
            | PipelineOp::VMap { input, .. }
            | PipelineOp::EMap { input, .. }
            | PipelineOp::Agg { input, .. }
            | PipelineOp::NodeA { input, .. }
            | PipelineOp::NodeW { input, .. }
            | PipelineOp::Pregel { input, .. }
            | PipelineOp::PageRank { input, .. }
            | PipelineOp::Cc { input, .. } => vec![input],
            PipelineOp::Union { left, right, .. }
            | PipelineOp::Intersection { left, right, .. }
            | PipelineOp::Difference { left, right }
            | PipelineOp::EdgeC { left, right, .. } => vec![left, right],
        }
    }

    /// Replaces every date literal using `map` (a dataset's calendar).
    pub fn resolve_dates(
        &self,
        map: &impl Fn(&str) -> Result<i64, String>,
    ) -> Result<PipelineOp, String> {
        let rx = |e: &Expr| e.resolve_dates(map);
        let rmap = |m: &MapFunc| -> Result<MapFunc, String> {
            Ok(MapFunc::new(
                m.assigns
                    .iter()
                    .map(|(n, e)| Ok((n.clone(), e.resolve_dates(map)?)))
                    .collect::<Result<Vec<_>, String>>()?,
            ))
        };
        Ok(match self {
            PipelineOp::Slice { input, from, to } => PipelineOp::Slice {
                input: input.clone(),
                from: TimeArg::Point(from.resolve(map)?),
                to: TimeArg::Point(to.resolve(map)?),
            },
            PipelineOp::VSubgraph { input, cond } => PipelineOp::VSubgraph {
                input: input.clone(),
                cond: rx(cond)?,
            },
            PipelineOp::ESubgraph { input, cond } => PipelineOp::ESubgraph {
                input: input.clone(),
                cond: rx(cond)?,
            },
            PipelineOp::VMap { input, map: m } => PipelineOp::VMap {
                input: input.clone(),
                map: rmap(m)?,
            },
            PipelineOp::EMap { input, map: m } => PipelineOp::EMap {
                input: input.clone(),
                map: rmap(m)?,
            },
            PipelineOp::Agg { input, params } => PipelineOp::Agg {
                input: input.clone(),
                params: AggParams {
                    dir: params.dir,
                    cond: params.cond.as_ref().map(&rx).transpose()?,
                    map: rx(&params.map)?,
                    func: params.func,
                    pname: params.pname.clone(),
                },
            },
            PipelineOp::EdgeC {
                left,
                right,
                query,
                fe,
            } => PipelineOp::EdgeC {
                left: left.clone(),
                right: right.clone(),
                query: match query {
                    EdgeQuery::VertexPairs { cond, attrs } => EdgeQuery::VertexPairs {
                        cond: rx(cond)?,
                        attrs: rmap(attrs)?,
                    },
                    EdgeQuery::EdgePaths { cond, attrs } => EdgeQuery::EdgePaths {
                        cond: rx(cond)?,
                        attrs: rmap(attrs)?,
                    },
                },
                fe: fe.clone(),
            },
            PipelineOp::Pregel {
                input,
                program,
                pname,
                supersteps,
            } => PipelineOp::Pregel {
                input: input.clone(),
                program: ExprProgram {
                    init: rx(&program.init)?,
                    msg: rx(&program.msg)?,
                    combine: program.combine,
                    update: rx(&program.update)?,
                    tolerance: program.tolerance,
                },
                pname: pname.clone(),
                supersteps: *supersteps,
            },
            other => other.clone(),
        })
    }
}

/// One line of a pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Assign {
        line: usize,
        name: String,
        op: PipelineOp,
    },
    Materialize {
        line: usize,
        name: String,
    },
}

/// A parsed, validated pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub statements: Vec<Statement>,
}

impl Pipeline {
    /// Free names, in first-use order: these must be bound to datasets.
    pub fn inputs(&self) -> Vec<String> {
        let assigned: HashSet<&str> = self
            .statements
            .iter()
            .filter_map(|s| match s {
                Statement::Assign { name, .. } => Some(name.as_str()),
                Statement::Materialize { .. } => None,
            })
            .collect();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for s in &self.statements {
            if let Statement::Assign { op, .. } = s {
                for input in op.inputs() {
                    if !assigned.contains(input) && seen.insert(input.to_string()) {
                        out.push(input.to_string());
                    }
                }
            }
        }
        out
    }

    /// Materialized names, in statement order.
    pub fn materialized(&self) -> Vec<String> {
        self.statements
            .iter()
            .filter_map(|s| match s {
                Statement::Materialize { name, .. } => Some(name.clone()),
                Statement::Assign { .. } => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum DslTok {
    Ident(String),
    Num(String),
    Date(String),
    Str(String),
    Sym(char),
}

impl DslTok {
    fn describe(&self) -> String {
        match self {
            DslTok::Ident(s) => format!("`{s}`"),
            DslTok::Num(s) => format!("number `{s}`"),
            DslTok::Date(s) => format!("date `{s}`"),
            DslTok::Str(_) => "quoted string".to_string(),
            DslTok::Sym(c) => format!("`{c}`"),
        }
    }
}

fn lex_line(line: usize, text: &str) -> Result<Vec<DslTok>, PipelineError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                i += 1;
            }
            toks.push(DslTok::Ident(s));
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let neg = c == '-';
            if neg {
                i += 1;
            }
            if !neg {
                if let Some(d) = date_at(&chars, i) {
                    toks.push(DslTok::Date(d));
                    i += 10;
                    continue;
                }
            }
            let mut s = String::new();
            if neg {
                s.push('-');
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                i += 1;
            }
            if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                s.push('.');
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    i += 1;
                }
            }
            if matches!(chars.get(i), Some('e' | 'E')) {
                let mut j = i + 1;
                if matches!(chars.get(j), Some('+' | '-')) {
                    j += 1;
                }
                if chars.get(j).is_some_and(|d| d.is_ascii_digit()) {
                    s.extend(chars[i..j].iter());
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        s.push(chars[i]);
                        i += 1;
                    }
                }
            }
            if chars.get(i).is_some_and(|d| d.is_alphanumeric() || *d == '_') {
                return err(line, format!("malformed number near `{s}`"));
            }
            toks.push(DslTok::Num(s));
            continue;
        }
        if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return err(line, "unterminated string"),
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => match chars.get(i + 1) {
                        Some(e @ ('\\' | '"')) => {
                            s.push(*e);
                            i += 2;
                        }
                        _ => {
                            return err(line, "bad escape in string; only \\\\ and \\\" work")
                        }
                    },
                    Some(other) => {
                        s.push(*other);
                        i += 1;
                    }
                }
            }
            toks.push(DslTok::Str(s));
            continue;
        }
        if matches!(c, '=' | '(' | ')' | ',' | ':') {
            toks.push(DslTok::Sym(c));
            i += 1;
            continue;
        }
        return err(line, format!("unexpected character `{c}`"));
    }
    Ok(toks)
}

fn date_at(chars: &[char], i: usize) -> Option<String> {
    if i + 10 > chars.len() {
        return None;
    }
    let w = &chars[i..i + 10];
    let digits = |r: std::ops::Range<usize>| w[r].iter().all(|c| c.is_ascii_digit());
    if digits(0..4) && w[4] == '-' && digits(5..7) && w[7] == '-' && digits(8..10) {
        if chars.get(i + 10).is_some_and(|c| c.is_ascii_digit()) {
            return None;
        }
        return Some(w.iter().collect());
    }
    None
}

/// One argument value as written.
#[derive(Debug, Clone, PartialEq)]
enum ArgValue {
    /// Bare word, optionally with a `:suffix` (e.g. `units:3`).
    Word(String, Option<String>),
    Num(String),
    Date(String),
    Text(String),
}

impl ArgValue {
    fn describe(&self) -> &'static str {
        match self {
            ArgValue::Word(..) => "a word",
            ArgValue::Num(_) => "a number",
            ArgValue::Date(_) => "a date",
            ArgValue::Text(_) => "a quoted string",
        }
    }
}

/// Arguments of one op call, with consumed-key tracking.
struct Args {
    line: usize,
    op: String,
    pos: Vec<String>,
    kv: Vec<(String, ArgValue)>,
}

impl Args {
    fn take(&mut self, key: &str) -> Option<ArgValue> {
        let idx = self.kv.iter().position(|(k, _)| k == key)?;
        Some(self.kv.remove(idx).1)
    }

    fn require(&mut self, key: &str) -> Result<ArgValue, PipelineError> {
        self.take(key)
            .ok_or_else(|| PipelineError {
                line: self.line,
                message: format!("`{}` needs key `{key}`", self.op),
            })
    }

    fn finish(&mut self) -> Result<(), PipelineError> {
        if let Some((k, _)) = self.kv.first() {
            return err(self.line, format!("unknown key `{k}` for `{}`", self.op));
        }
        Ok(())
    }

    fn one_input(&mut self) -> Result<String, PipelineError> {
        if self.pos.len() != 1 {
            return err(
                self.line,
                format!("`{}` takes exactly one input, got {}", self.op, self.pos.len()),
            );
        }
        Ok(self.pos.remove(0))
    }

    fn two_inputs(&mut self) -> Result<(String, String), PipelineError> {
        if self.pos.len() != 2 {
            return err(
                self.line,
                format!("`{}` takes exactly two inputs, got {}", self.op, self.pos.len()),
            );
        }
        let right = self.pos.remove(1);
        Ok((self.pos.remove(0), right))
    }

    fn text(&mut self, key: &str) -> Result<String, PipelineError> {
        match self.require(key)? {
            ArgValue::Text(s) => Ok(s),
            other => err(
                self.line,
                format!("key `{key}` needs a quoted string, got {}", other.describe()),
            ),
        }
    }

    fn opt_text(&mut self, key: &str) -> Result<Option<String>, PipelineError> {
        match self.take(key) {
            None => Ok(None),
            Some(ArgValue::Text(s)) => Ok(Some(s)),
            Some(other) => err(
                self.line,
                format!("key `{key}` needs a quoted string, got {}", other.describe()),
            ),
        }
    }

    fn word(&mut self, key: &str) -> Result<(String, Option<String>), PipelineError> {
        match self.require(key)? {
            ArgValue::Word(h, s) => Ok((h, s)),
            other => err(
                self.line,
                format!("key `{key}` needs a word, got {}", other.describe()),
            ),
        }
    }

    /// A property name: bare word or quoted string.
    fn prop_name(&mut self, key: &str) -> Result<String, PipelineError> {
        match self.require(key)? {
            ArgValue::Word(h, None) => Ok(h),
            ArgValue::Text(s) if !s.trim().is_empty() => Ok(s),
            other => err(
                self.line,
                format!("key `{key}` needs a property name, got {}", other.describe()),
            ),
        }
    }

    fn time(&mut self, key: &str) -> Result<TimeArg, PipelineError> {
        match self.require(key)? {
            ArgValue::Num(raw) => match raw.parse::<i64>() {
                Ok(p) => Ok(TimeArg::Point(p)),
                Err(_) => err(
                    self.line,
                    format!("key `{key}` needs an integer time point or a date, got `{raw}`"),
                ),
            },
            ArgValue::Date(d) => Ok(TimeArg::Date(d)),
            other => err(
                self.line,
                format!("key `{key}` needs a time point or a date, got {}", other.describe()),
            ),
        }
    }

    fn opt_f64(&mut self, key: &str, default: f64) -> Result<f64, PipelineError> {
        match self.take(key) {
            None => Ok(default),
            Some(ArgValue::Num(raw)) => raw.parse::<f64>().map_err(|_| PipelineError {
                line: self.line,
                message: format!("key `{key}` needs a number, got `{raw}`"),
            }),
            Some(other) => err(
                self.line,
                format!("key `{key}` needs a number, got {}", other.describe()),
            ),
        }
    }

    fn opt_usize(&mut self, key: &str, default: usize) -> Result<usize, PipelineError> {
        match self.take(key) {
            None => Ok(default),
            Some(ArgValue::Num(raw)) => match raw.parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => err(
                    self.line,
                    format!("key `{key}` needs a positive integer, got `{raw}`"),
                ),
            },
            Some(other) => err(
                self.line,
                format!("key `{key}` needs a positive integer, got {}", other.describe()),
            ),
        }
    }

    fn expr(&mut self, key: &str) -> Result<Expr, PipelineError> {
        let text = self.text(key)?;
        parse_expr_arg(self.line, key, &text)
    }

    fn opt_expr(&mut self, key: &str) -> Result<Option<Expr>, PipelineError> {
        match self.opt_text(key)? {
            None => Ok(None),
            Some(text) => Ok(Some(parse_expr_arg(self.line, key, &text)?)),
        }
    }

    fn map_func(&mut self, key: &str) -> Result<MapFunc, PipelineError> {
        let text = self.text(key)?;
        exprs::parse_map_func(&text).map_err(|e| wrap_expr_err(self.line, key, e))
    }

    fn opt_map_func(&mut self, key: &str) -> Result<MapFunc, PipelineError> {
        match self.opt_text(key)? {
            None => Ok(MapFunc::default()),
            Some(text) => exprs::parse_map_func(&text).map_err(|e| wrap_expr_err(self.line, key, e)),
        }
    }

    fn specs(&mut self, key: &str) -> Result<Vec<ResolveSpec>, PipelineError> {
        match self.opt_text(key)? {
            None => Ok(Vec::new()),
            Some(text) => parse_spec_list(&text).map_err(|m| PipelineError {
                line: self.line,
                message: format!("key `{key}`: {m}"),
            }),
        }
    }

    fn quantifier(&mut self, key: &str) -> Result<Quantifier, PipelineError> {
        let (head, suffix) = self.word(key)?;
        match (head.as_str(), suffix) {
            ("all", None) => Ok(Quantifier::All),
            ("most", None) => Ok(Quantifier::Most),
            ("exists", None) => Ok(Quantifier::Exists),
            ("atleast", Some(x)) => match x.parse::<f64>() {
                Ok(f) if (0.0..=1.0).contains(&f) => Ok(Quantifier::AtLeast(f)),
                _ => err(
                    self.line,
                    format!("`atleast:` needs a fraction in [0, 1], got `{x}`"),
                ),
            },
            (h, _) => err(
                self.line,
                format!("key `{key}` must be all, most, exists, or atleast:x, got `{h}`"),
            ),
        }
    }

    fn window(&mut self) -> Result<WindowKind, PipelineError> {
        let (head, suffix) = self.word("window")?;
        match (head.as_str(), suffix) {
            ("lifetime", None) => Ok(WindowKind::Lifetime),
            ("units", Some(x)) => match x.parse::<i64>() {
                Ok(n) if n > 0 => Ok(WindowKind::Units(n)),
                _ => err(self.line, format!("`units:` needs a positive integer, got `{x}`")),
            },
            ("changes", Some(x)) => match x.parse::<usize>() {
                Ok(n) if n > 0 => Ok(WindowKind::Changes(n)),
                _ => err(
                    self.line,
                    format!("`changes:` needs a positive integer, got `{x}`"),
                ),
            },
            (h, _) => err(
                self.line,
                format!("key `window` must be units:N, changes:N, or lifetime, got `{h}`"),
            ),
        }
    }
}

fn wrap_expr_err(line: usize, key: &str, e: ExprError) -> PipelineError {
    PipelineError {
        line,
        message: format!("key `{key}`: {e}"),
    }
}

fn parse_expr_arg(line: usize, key: &str, text: &str) -> Result<Expr, PipelineError> {
    exprs::parse_expr(text).map_err(|e| wrap_expr_err(line, key, e))
}

/// Splits on `;` outside single-quoted text, dropping blank items.
fn split_items(text: &str) -> Vec<String> {
    let mut items = Vec::new();
    let mut cur = String::new();
    let mut in_quote = false;
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' if in_quote => {
                cur.push(c);
                if let Some(n) = chars.next() {
                    cur.push(n);
                }
            }
            '\'' => {
                in_quote = !in_quote;
                cur.push(c);
            }
            ';' if !in_quote => {
                items.push(std::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    items.push(cur);
    items
        .into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Parses `func(name)[ as out]` items.
fn parse_spec_list(text: &str) -> Result<Vec<ResolveSpec>, String> {
    use crate::exprs::Tok;
    let mut out = Vec::new();
    for item in split_items(text) {
        let toks: Vec<Tok> = exprs::lex(&item)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|(_, t)| t)
            .collect();
        let name_of = |t: &Tok| -> Option<String> {
            match t {
                Tok::Ident(s) | Tok::Text(s) => Some(s.clone()),
                _ => None,
            }
        };
        let bad = || format!("bad spec `{item}`; write func(name) or func(name) as out");
        let (func, input, rest) = match toks.as_slice() {
            [Tok::Ident(f), Tok::Sym("("), name, Tok::Sym(")"), rest @ ..] => {
                (f, name_of(name).ok_or_else(bad)?, rest)
            }
            _ => return Err(bad()),
        };
        let func = AggFunc::parse(func).ok_or_else(|| format!("unknown aggregate `{func}`"))?;
        let spec = match rest {
            [] => ResolveSpec::new(func, input),
            [Tok::Ident(kw), name] if kw.as_str() == "as" => {
                ResolveSpec::renamed(func, input, name_of(name).ok_or_else(bad)?)
            }
            _ => return Err(bad()),
        };
        out.push(spec);
    }
    Ok(out)
}

/// Parses group items: property names or literal constants.
fn parse_group_list(text: &str) -> Result<Vec<GroupAttr>, String> {
    let mut out = Vec::new();
    for item in split_items(text) {
        if exprs::is_ident(&item) && !matches!(item.as_str(), "true" | "false") {
            out.push(GroupAttr::Property(item));
            continue;
        }
        match exprs::parse_expr(&item) {
            Ok(Expr::Lit(v)) => out.push(GroupAttr::Constant(v)),
            Ok(_) => {
                return Err(format!(
                    "group `{item}` must be a property name or a literal constant"
                ))
            }
            Err(e) => return Err(format!("group `{item}`: {e}")),
        }
    }
    if out.is_empty() {
        return Err("the group list is empty".to_string());
    }
    Ok(out)
}

struct Cursor<'a> {
    line: usize,
    toks: &'a [DslTok],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a DslTok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a DslTok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&DslTok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char, what: &str) -> Result<(), PipelineError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            let found = self
                .peek()
                .map_or("end of line".to_string(), |t| t.describe());
            err(self.line, format!("expected `{c}` {what}, found {found}"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, PipelineError> {
        match self.next() {
            Some(DslTok::Ident(s)) => Ok(s.clone()),
            other => {
                let found = other.map_or("end of line".to_string(), |t| t.describe());
                err(self.line, format!("expected {what}, found {found}"))
            }
        }
    }

    fn value(&mut self) -> Result<ArgValue, PipelineError> {
        match self.next() {
            Some(DslTok::Ident(h)) => {
                if self.eat_sym(':') {
                    let suffix = match self.next() {
                        Some(DslTok::Num(s)) => s.clone(),
                        Some(DslTok::Ident(s)) => s.clone(),
                        other => {
                            let found = other.map_or("end of line".to_string(), |t| t.describe());
                            return err(
                                self.line,
                                format!("expected a suffix after `{h}:`, found {found}"),
                            );
                        }
                    };
                    Ok(ArgValue::Word(h.clone(), Some(suffix)))
                } else {
                    Ok(ArgValue::Word(h.clone(), None))
                }
            }
            Some(DslTok::Num(s)) => Ok(ArgValue::Num(s.clone())),
            Some(DslTok::Date(s)) => Ok(ArgValue::Date(s.clone())),
            Some(DslTok::Str(s)) => Ok(ArgValue::Text(s.clone())),
            other => {
                let found = other.map_or("end of line".to_string(), |t| t.describe());
                err(self.line, format!("expected a value, found {found}"))
            }
        }
    }
}

fn parse_statement(line: usize, toks: &[DslTok]) -> Result<Statement, PipelineError> {
    let mut cur = Cursor { line, toks, pos: 0 };
    let first = cur.ident("a name or `materialize`")?;
    if first == "materialize" {
        let name = cur.ident("a name to materialize")?;
        if let Some(t) = cur.peek() {
            return err(line, format!("unexpected {} after materialize", t.describe()));
        }
        return Ok(Statement::Materialize { line, name });
    }
    cur.expect_sym('=', "after the result name")?;
    let op_name = cur.ident("an operation name")?;
    cur.expect_sym('(', "after the operation name")?;

    let mut pos: Vec<String> = Vec::new();
    let mut kv: Vec<(String, ArgValue)> = Vec::new();
    if !cur.eat_sym(')') {
        loop {
            // `ident =` starts a keyword argument; a bare value is positional.
            let is_kw = matches!(cur.peek(), Some(DslTok::Ident(_)))
                && cur.toks.get(cur.pos + 1) == Some(&DslTok::Sym('='));
            if is_kw {
                let key = cur.ident("a key")?;
                cur.expect_sym('=', "after the key")?;
                if kv.iter().any(|(k, _)| *k == key) {
                    return err(line, format!("key `{key}` is given twice"));
                }
                kv.push((key, cur.value()?));
            } else {
                if !kv.is_empty() {
                    return err(line, "positional inputs must come before key=value arguments");
                }
                match cur.value()? {
                    ArgValue::Word(h, None) => pos.push(h),
                    other => {
                        return err(
                            line,
                            format!("inputs must be names, got {}", other.describe()),
                        )
                    }
                }
            }
            if cur.eat_sym(')') {
                break;
            }
            cur.expect_sym(',', "between arguments")?;
        }
    }
    if let Some(t) = cur.peek() {
        return err(line, format!("unexpected {} after the close paren", t.describe()));
    }

    let mut args = Args {
        line,
        op: op_name.clone(),
        pos,
        kv,
    };
    let op = build_op(&op_name, &mut args)?;
    Ok(Statement::Assign {
        line,
        name: first,
        op,
    })
}

fn build_op(op_name: &str, a: &mut Args) -> Result<PipelineOp, PipelineError> {
    let op = match op_name {
        "slice" => PipelineOp::Slice {
            input: a.one_input()?,
            from: a.time("from")?,
            to: a.time("to")?,
        },
        "vsubgraph" => PipelineOp::VSubgraph {
            input: a.one_input()?,
            cond: a.expr("where")?,
        },
        "esubgraph" => PipelineOp::ESubgraph {
            input: a.one_input()?,
            cond: a.expr("where")?,
        },
        "vmap" => PipelineOp::VMap {
            input: a.one_input()?,
            map: a.map_func("map")?,
        },
        "emap" => PipelineOp::EMap {
            input: a.one_input()?,
            map: a.map_func("map")?,
        },
        "agg" => {
            let input = a.one_input()?;
            let (dir_word, dir_suffix) = a.word("dir")?;
            if dir_suffix.is_some() {
                return err(a.line, "key `dir` takes no suffix");
            }
            let dir = AggDirection::parse(&dir_word).ok_or_else(|| PipelineError {
                line: a.line,
                message: format!("key `dir` must be in, out, or both, got `{dir_word}`"),
            })?;
            let map = a.expr("map")?;
            let (func_word, func_suffix) = a.word("func")?;
            if func_suffix.is_some() {
                return err(a.line, "key `func` takes no suffix");
            }
            let func = AggFunc::parse(&func_word).ok_or_else(|| PipelineError {
                line: a.line,
                message: format!("unknown aggregate `{func_word}`"),
            })?;
            let pname = a.prop_name("pname")?;
            let cond = a.opt_expr("where")?;
            PipelineOp::Agg {
                input,
                params: AggParams {
                    dir,
                    cond,
                    map,
                    func,
                    pname,
                },
            }
        }
        "union" | "intersection" => {
            let (left, right) = a.two_inputs()?;
            let fv = a.specs("fv")?;
            let fe = a.specs("fe")?;
            if op_name == "union" {
                PipelineOp::Union { left, right, fv, fe }
            } else {
                PipelineOp::Intersection { left, right, fv, fe }
            }
        }
        "difference" => {
            let (left, right) = a.two_inputs()?;
            PipelineOp::Difference { left, right }
        }
        "node_a" => {
            let input = a.one_input()?;
            let by_text = a.text("by")?;
            let by = parse_group_list(&by_text).map_err(|m| PipelineError {
                line: a.line,
                message: format!("key `by`: {m}"),
            })?;
            PipelineOp::NodeA {
                input,
                by,
                fv: a.specs("fv")?,
                fe: a.specs("fe")?,
            }
        }
        "node_w" => PipelineOp::NodeW {
            input: a.one_input()?,
            window: a.window()?,
            qv: a.quantifier("qv")?,
            qe: a.quantifier("qe")?,
            fv: a.specs("fv")?,
            fe: a.specs("fe")?,
        },
        "edge_c" => {
            let (left, right) = a.two_inputs()?;
            let (query_word, query_suffix) = a.word("query")?;
            if query_suffix.is_some() {
                return err(a.line, "key `query` takes no suffix");
            }
            let cond = a.expr("where")?;
            let attrs = a.opt_map_func("attrs")?;
            let query = match query_word.as_str() {
                "pairs" => EdgeQuery::VertexPairs { cond, attrs },
                "paths" => EdgeQuery::EdgePaths { cond, attrs },
                other => {
                    return err(
                        a.line,
                        format!("key `query` must be pairs or paths, got `{other}`"),
                    )
                }
            };
            PipelineOp::EdgeC {
                left,
                right,
                query,
                fe: a.specs("fe")?,
            }
        }
        "pregel" => {
            let input = a.one_input()?;
            let init = a.expr("init")?;
            let msg = a.expr("msg")?;
            let (cw, cs) = a.word("combine")?;
            if cs.is_some() {
                return err(a.line, "key `combine` takes no suffix");
            }
            let combine = match AggFunc::parse(&cw) {
                Some(f @ (AggFunc::Sum | AggFunc::Min | AggFunc::Max)) => f,
                _ => {
                    return err(
                        a.line,
                        format!("key `combine` must be sum, min, or max, got `{cw}`"),
                    )
                }
            };
            let update = a.expr("update")?;
            let pname = a.prop_name("pname")?;
            let supersteps = a.opt_usize("iter", DEFAULT_SUPERSTEPS)?;
            let tolerance = match a.take("tol") {
                None => None,
                Some(ArgValue::Num(raw)) => Some(raw.parse::<f64>().map_err(|_| PipelineError {
                    line: a.line,
                    message: format!("key `tol` needs a number, got `{raw}`"),
                })?),
                Some(other) => {
                    return err(
                        a.line,
                        format!("key `tol` needs a number, got {}", other.describe()),
                    )
                }
            };
            PipelineOp::Pregel {
                input,
                program: ExprProgram {
                    init,
                    msg,
                    combine,
                    update,
                    tolerance,
                },
                pname,
                supersteps,
            }
        }
        "pagerank" => PipelineOp::PageRank {
            input: a.one_input()?,
            pname: a.prop_name("pname")?,
            damping: a.opt_f64("damping", DEFAULT_DAMPING)?,
            tolerance: a.opt_f64("tol", DEFAULT_PR_TOLERANCE)?,
            supersteps: a.opt_usize("iter", DEFAULT_SUPERSTEPS)?,
        },
        "cc" => PipelineOp::Cc {
            input: a.one_input()?,
            pname: a.prop_name("pname")?,
        },
        other => return err(a.line, format!("unknown operation `{other}`")),
    };
    a.finish()?;
    Ok(op)
}

fn validate(statements: &[Statement]) -> Result<(), PipelineError> {
    let all: HashSet<&str> = statements
        .iter()
        .filter_map(|s| match s {
            Statement::Assign { name, .. } => Some(name.as_str()),
            Statement::Materialize { .. } => None,
        })
        .collect();
    let mut bound: HashSet<&str> = HashSet::new();
    let mut any_materialize = false;
    for s in statements {
        match s {
            Statement::Assign { line, name, op } => {
                if bound.contains(name.as_str()) {
                    return err(*line, format!("`{name}` is assigned twice"));
                }
                for input in op.inputs() {
                    if all.contains(input) && !bound.contains(input) {
                        return err(*line, format!("`{input}` is used before it is assigned"));
                    }
                }
                bound.insert(name);
            }
            Statement::Materialize { line, name } => {
                if !bound.contains(name.as_str()) {
                    return err(
                        *line,
                        format!("materialize target `{name}` is not assigned in the pipeline"),
                    );
                }
                any_materialize = true;
            }
        }
    }
    if !any_materialize {
        let line = statements.last().map_or(1, |s| match s {
            Statement::Assign { line, .. } | Statement::Materialize { line, .. } => *line,
        });
        return err(line, "a pipeline needs at least one materialize statement");
    }
    if let Some(last) = statements.last() {
        if !matches!(last, Statement::Materialize { .. }) {
            let line = match last {
                Statement::Assign { line, .. } | Statement::Materialize { line, .. } => *line,
            };
            return err(line, "the last statement must be a materialize");
        }
    }
    Ok(())
}

/// Parses a whole pipeline text; `#` comments and blank lines are skipped.
pub fn parse_pipeline(text: &str) -> Result<Pipeline, PipelineError> {
    let mut statements = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = lex_line(line, raw)?;
        if toks.is_empty() {
            continue;
        }
        statements.push(parse_statement(line, &toks)?);
    }
    validate(&statements)?;
    Ok(Pipeline { statements })
}

fn dsl_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn fmt_name(s: &str) -> Result<String, String> {
    if exprs::is_ident(s) && s != "materialize" {
        Ok(s.to_string())
    } else {
        Err(format!("`{s}` is not a writable name"))
    }
}

fn fmt_prop_key(s: &str) -> String {
    if exprs::is_ident(s) {
        s.to_string()
    } else {
        dsl_quote(s)
    }
}

fn fmt_specs(key: &str, specs: &[ResolveSpec]) -> Result<String, String> {
    if specs.is_empty() {
        return Ok(String::new());
    }
    let items: Vec<String> = specs
        .iter()
        .map(|s| {
            let input = spec_name(&s.input);
            if s.input == s.output {
                format!("{}({input})", s.func.name())
            } else {
                format!("{}({input}) as {}", s.func.name(), spec_name(&s.output))
            }
        })
        .collect();
    Ok(format!(", {key}={}", dsl_quote(&items.join("; "))))
}

fn spec_name(s: &str) -> String {
    if exprs::is_ident(s) && s != "as" {
        s.to_string()
    } else {
        exprs::quote_text(s)
    }
}

fn fmt_expr_arg(key: &str, e: &Expr) -> Result<String, String> {
    Ok(format!("{key}={}", dsl_quote(&exprs::format_expr(e)?)))
}

fn fmt_time(t: &TimeArg) -> String {
    match t {
        TimeArg::Point(p) => p.to_string(),
        TimeArg::Date(d) => d.clone(),
    }
}

fn fmt_quantifier(q: &Quantifier) -> Result<String, String> {
    Ok(match q {
        Quantifier::All => "all".to_string(),
        Quantifier::Most => "most".to_string(),
        Quantifier::Exists => "exists".to_string(),
        Quantifier::AtLeast(x) => format!("atleast:{}", exprs::fmt_float(*x)?),
    })
}

fn fmt_window(w: &WindowKind) -> String {
    match w {
        WindowKind::Units(n) => format!("units:{n}"),
        WindowKind::Changes(n) => format!("changes:{n}"),
        WindowKind::Lifetime => "lifetime".to_string(),
    }
}

fn fmt_groups(by: &[GroupAttr]) -> Result<String, String> {
    let items: Vec<String> = by
        .iter()
        .map(|g| match g {
            GroupAttr::Property(n) => {
                if exprs::is_ident(n) && !matches!(n.as_str(), "true" | "false") {
                    Ok(n.clone())
                } else {
                    Err(format!("group property `{n}` is not a writable name"))
                }
            }
            GroupAttr::Constant(v) => exprs::format_expr(&Expr::Lit(v.clone())),
        })
        .collect::<Result<_, String>>()?;
    Ok(dsl_quote(&items.join("; ")))
}

fn format_op(op: &PipelineOp) -> Result<String, String> {
    Ok(match op {
        PipelineOp::Slice { input, from, to } => {
            format!("slice({input}, from={}, to={})", fmt_time(from), fmt_time(to))
        }
        PipelineOp::VSubgraph { input, cond } => {
            format!("vsubgraph({input}, {})", fmt_expr_arg("where", cond)?)
        }
        PipelineOp::ESubgraph { input, cond } => {
            format!("esubgraph({input}, {})", fmt_expr_arg("where", cond)?)
        }
        PipelineOp::VMap { input, map } => {
            format!("vmap({input}, map={})", dsl_quote(&exprs::format_map_func(map)?))
        }
        PipelineOp::EMap { input, map } => {
            format!("emap({input}, map={})", dsl_quote(&exprs::format_map_func(map)?))
        }
        PipelineOp::Agg { input, params } => {
            let mut s = format!(
                "agg({input}, dir={}, map={}, func={}, pname={}",
                params.dir.token(),
                dsl_quote(&exprs::format_expr(&params.map)?),
                params.func.name(),
                fmt_prop_key(&params.pname),
            );
            if let Some(cond) = &params.cond {
                s.push_str(&format!(", {}", fmt_expr_arg("where", cond)?));
            }
            s.push(')');
            s
        }
        PipelineOp::Union { left, right, fv, fe } => format!(
            "union({left}, {right}{}{})",
            fmt_specs("fv", fv)?,
            fmt_specs("fe", fe)?
        ),
        PipelineOp::Intersection { left, right, fv, fe } => format!(
            "intersection({left}, {right}{}{})",
            fmt_specs("fv", fv)?,
            fmt_specs("fe", fe)?
        ),
        PipelineOp::Difference { left, right } => format!("difference({left}, {right})"),
        PipelineOp::NodeA { input, by, fv, fe } => format!(
            "node_a({input}, by={}{}{})",
            fmt_groups(by)?,
            fmt_specs("fv", fv)?,
            fmt_specs("fe", fe)?
        ),
        PipelineOp::NodeW {
            input,
            window,
            qv,
            qe,
            fv,
            fe,
        } => format!(
            "node_w({input}, window={}, qv={}, qe={}{}{})",
            fmt_window(window),
            fmt_quantifier(qv)?,
            fmt_quantifier(qe)?,
            fmt_specs("fv", fv)?,
            fmt_specs("fe", fe)?
        ),
        PipelineOp::EdgeC {
            left,
            right,
            query,
            fe,
        } => {
            let (kind, cond, attrs) = match query {
                EdgeQuery::VertexPairs { cond, attrs } => ("pairs", cond, attrs),
                EdgeQuery::EdgePaths { cond, attrs } => ("paths", cond, attrs),
            };
            let mut s = format!(
                "edge_c({left}, {right}, query={kind}, {}",
                fmt_expr_arg("where", cond)?
            );
            if !attrs.assigns.is_empty() {
                s.push_str(&format!(
                    ", attrs={}",
                    dsl_quote(&exprs::format_map_func(attrs)?)
                ));
            }
            s.push_str(&fmt_specs("fe", fe)?);
            s.push(')');
            s
        }
        PipelineOp::Pregel {
            input,
            program,
            pname,
            supersteps,
        } => {
            let mut s = format!(
                "pregel({input}, {}, {}, combine={}, {}, pname={}, iter={supersteps}",
                fmt_expr_arg("init", &program.init)?,
                fmt_expr_arg("msg", &program.msg)?,
                program.combine.name(),
                fmt_expr_arg("update", &program.update)?,
                fmt_prop_key(pname),
            );
            if let Some(tol) = program.tolerance {
                s.push_str(&format!(", tol={}", exprs::fmt_float(tol)?));
            }
            s.push(')');
            s
        }
        PipelineOp::PageRank {
            input,
            pname,
            damping,
            tolerance,
            supersteps,
        } => format!(
            "pagerank({input}, pname={}, damping={}, tol={}, iter={supersteps})",
            fmt_prop_key(pname),
            exprs::fmt_float(*damping)?,
            exprs::fmt_float(*tolerance)?,
        ),
        PipelineOp::Cc { input, pname } => {
            format!("cc({input}, pname={})", fmt_prop_key(pname))
        }
    })
}

/// Formats a pipeline so that parsing the text yields an equal pipeline
/// (line numbers renumbered consecutively).
pub fn format_pipeline(p: &Pipeline) -> Result<String, String> {
    let mut out = String::new();
    for s in &p.statements {
        match s {
            Statement::Assign { name, op, .. } => {
                out.push_str(&format!("{} = {}\n", fmt_name(name)?, format_op(op)?));
            }
            Statement::Materialize { name, .. } => {
                out.push_str(&format!("materialize {}\n", fmt_name(name)?));
            }
        }
    }
    Ok(out)
}
