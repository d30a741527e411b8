//! Text form of the expression language.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! or    := and ( "||" and )*
//! and   := cmp ( "&&" cmp )*
//! cmp   := add ( ("==" | "!=" | "<=" | ">=" | "<" | ">") add )*
//! add   := mul ( ("+" | "-") mul )*
//! mul   := unary ( ("*" | "/" | "%") unary )*
//! unary := ("!" | "-") unary | primary
//! primary := "(" or ")" | "[" or "," or ")" | number | date | 'text'
//!          | "true" | "false" | "state" | "msg"
//!          | scope "." member | period "." ("start" | "end")
//!          | func "(" args ")"
//! ```
//!
//! Scopes are `v`, `e`, `v1`, `v2`, `e1`, `e2`; members are `a.NAME` (a
//! property, quoted when not an identifier), `id`, `src`, `dst`, `state`,
//! `outdeg`. Periods are `p`, `p1`, `p2`. Dates are compact `yyyy-mm-dd`
//! tokens; write subtraction with spaces to avoid them. Text literals use
//! single quotes with `\'` and `\\` escapes. `[a, b)` is an interval
//! literal.
//!
//! Map functions are semicolon-separated `name = expr` assignments.
//!
//! Formatting normalizes: negation of a numeric literal folds into the
//! literal (the parser does the same), `avg` prints as `mean`, and `v.state`
//! prints as bare `state`. Collection values have no literal syntax, so
//! formatting an expression holding one fails.

use std::fmt;

use tgraph_core::expr::{BinOp, Expr, FuncName, MapFunc, PeriodRef, Scope, UnaryOp};
use tgraph_core::PropertyValue;

/// A parse failure at a character position (0-based offset into the text).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.offset + 1, self.message)
    }
}

impl std::error::Error for ExprError {}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, ExprError> {
    Err(ExprError {
        offset,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Num(String),
    Date(String),
    Text(String),
    Sym(&'static str),
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Date(s) => format!("date `{s}`"),
            Tok::Text(_) => "text literal".to_string(),
            Tok::Sym(s) => format!("`{s}`"),
        }
    }
}

const TWO_CHAR: [&str; 6] = ["==", "!=", "<=", ">=", "&&", "||"];
const ONE_CHAR: [char; 16] = [
    '+', '-', '*', '/', '%', '<', '>', '(', ')', '[', ']', ',', '.', '!', '=', ';',
];

pub(crate) fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let at = i;
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                i += 1;
            }
            toks.push((at, Tok::Ident(s)));
            continue;
        }
        if c.is_ascii_digit() {
            if let Some(d) = lex_date(&chars, i) {
                toks.push((at, Tok::Date(d)));
                i += 10;
                continue;
            }
            let s = lex_number(&chars, &mut i).map_err(|m| ExprError {
                offset: at,
                message: m,
            })?;
            if i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                return err(i, format!("unexpected `{}` after number `{s}`", chars[i]));
            }
            toks.push((at, Tok::Num(s)));
            continue;
        }
        if c == '\'' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return err(at, "unterminated text literal"),
                    Some('\'') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => match chars.get(i + 1) {
                        Some(e @ ('\\' | '\'')) => {
                            s.push(*e);
                            i += 2;
                        }
                        _ => return err(i, "bad escape; only \\\\ and \\' are recognized"),
                    },
                    Some(other) => {
                        s.push(*other);
                        i += 1;
                    }
                }
            }
            toks.push((at, Tok::Text(s)));
            continue;
        }
        if i + 1 < chars.len() {
            let two: String = chars[i..i + 2].iter().collect();
            if let Some(sym) = TWO_CHAR.iter().find(|s| **s == two) {
                toks.push((at, Tok::Sym(sym)));
                i += 2;
                continue;
            }
        }
        if let Some(pos) = ONE_CHAR.iter().position(|s| *s == c) {
            // Index back into a static table so the token borrows 'static.
            const NAMES: [&str; 16] = [
                "+", "-", "*", "/", "%", "<", ">", "(", ")", "[", "]", ",", ".", "!", "=", ";",
            ];
            toks.push((at, Tok::Sym(NAMES[pos])));
            i += 1;
            continue;
        }
        return err(at, format!("unexpected character `{c}`"));
    }
    Ok(toks)
}

/// A compact `yyyy-mm-dd` token starting at `i`, if the next ten characters
/// have that shape and no digit follows.
fn lex_date(chars: &[char], i: usize) -> Option<String> {
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

fn lex_number(chars: &[char], i: &mut usize) -> Result<String, String> {
    let mut s = String::new();
    while *i < chars.len() && chars[*i].is_ascii_digit() {
        s.push(chars[*i]);
        *i += 1;
    }
    if chars.get(*i) == Some(&'.') && chars.get(*i + 1).is_some_and(|c| c.is_ascii_digit()) {
        s.push('.');
        *i += 1;
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            s.push(chars[*i]);
            *i += 1;
        }
    }
    if matches!(chars.get(*i), Some('e' | 'E')) {
        let mut j = *i + 1;
        if matches!(chars.get(j), Some('+' | '-')) {
            j += 1;
        }
        if chars.get(j).is_some_and(|c| c.is_ascii_digit()) {
            s.extend(chars[*i..j].iter());
            *i = j;
            while *i < chars.len() && chars[*i].is_ascii_digit() {
                s.push(chars[*i]);
                *i += 1;
            }
        }
    }
    Ok(s)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |(o, _)| *o)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == sym => {
                self.pos += 1;
                true
            }
            _ => false,
        }
    }

    fn expect_sym(&mut self, sym: &str, what: &str) -> Result<(), ExprError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            let found = self
                .peek()
                .map_or("end of input".to_string(), |t| t.describe());
            err(self.offset(), format!("expected `{sym}` {what}, found {found}"))
        }
    }

    fn or(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.and()?;
        while self.eat_sym("||") {
            let rhs = self.and()?;
            lhs = Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.cmp()?;
        while self.eat_sym("&&") {
            let rhs = self.cmp()?;
            lhs = Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cmp(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.add()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("==")) => BinOp::Eq,
                Some(Tok::Sym("!=")) => BinOp::Ne,
                Some(Tok::Sym("<=")) => BinOp::Le,
                Some(Tok::Sym(">=")) => BinOp::Ge,
                Some(Tok::Sym("<")) => BinOp::Lt,
                Some(Tok::Sym(">")) => BinOp::Gt,
                Some(Tok::Sym("=")) => {
                    return err(self.offset(), "`=` is assignment; comparison is `==`")
                }
                _ => break,
            };
            self.pos += 1;
            let rhs = self.add()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn add(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.mul()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("+")) => BinOp::Add,
                Some(Tok::Sym("-")) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.mul()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn mul(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("*")) => BinOp::Mul,
                Some(Tok::Sym("/")) => BinOp::Div,
                Some(Tok::Sym("%")) => BinOp::Mod,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat_sym("!") {
            let inner = self.unary()?;
            return Ok(Expr::Unary(UnaryOp::Not, Box::new(inner)));
        }
        if self.eat_sym("-") {
            let at = self.offset();
            let inner = self.unary()?;
            // Negative numbers are literals, not negations.
            return Ok(match inner {
                Expr::Lit(PropertyValue::Int(n)) => match n.checked_neg() {
                    Some(m) => Expr::Lit(PropertyValue::Int(m)),
                    None => return err(at, "integer literal out of range"),
                },
                Expr::Lit(PropertyValue::Float(x)) => Expr::Lit(PropertyValue::float(-x.0)),
                other => Expr::Unary(UnaryOp::Neg, Box::new(other)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        let Some(tok) = self.next() else {
            return err(at, "expected an expression, found end of input");
        };
        match tok {
            Tok::Sym("(") => {
                let inner = self.or()?;
                self.expect_sym(")", "to close the group")?;
                Ok(inner)
            }
            Tok::Sym("[") => {
                let a = self.or()?;
                self.expect_sym(",", "between interval bounds")?;
                let b = self.or()?;
                self.expect_sym(")", "to close the interval (intervals are half-open)")?;
                Ok(Expr::IntervalLit(Box::new(a), Box::new(b)))
            }
            Tok::Num(s) => parse_number(at, &s),
            Tok::Date(s) => Ok(Expr::Date(s)),
            Tok::Text(s) => Ok(Expr::Lit(PropertyValue::Text(s))),
            Tok::Ident(name) => self.ident(at, &name),
            other => err(at, format!("expected an expression, found {}", other.describe())),
        }
    }

    fn ident(&mut self, at: usize, name: &str) -> Result<Expr, ExprError> {
        match name {
            "true" => return Ok(Expr::Lit(PropertyValue::Bool(true))),
            "false" => return Ok(Expr::Lit(PropertyValue::Bool(false))),
            "state" => return Ok(Expr::State(Scope::V)),
            "msg" | "agg" => return Ok(Expr::MsgAgg),
            _ => {}
        }
        if let Some(scope) = parse_scope(name) {
            self.expect_sym(".", &format!("after scope `{name}`"))?;
            return self.member(scope);
        }
        if let Some(period) = parse_period(name) {
            self.expect_sym(".", &format!("after period `{name}`"))?;
            let at = self.offset();
            return match self.next() {
                Some(Tok::Ident(m)) if m == "start" => Ok(Expr::Start(period)),
                Some(Tok::Ident(m)) if m == "end" => Ok(Expr::End(period)),
                other => err(
                    at,
                    format!(
                        "period member must be start or end, found {}",
                        other.map_or("end of input".to_string(), |t| t.describe())
                    ),
                ),
            };
        }
        if self.peek() == Some(&Tok::Sym("(")) {
            let Some(func) = FuncName::parse(name) else {
                return err(at, format!("unknown function `{name}`"));
            };
            self.pos += 1;
            let mut args = Vec::new();
            if !self.eat_sym(")") {
                loop {
                    args.push(self.or()?);
                    if self.eat_sym(")") {
                        break;
                    }
                    self.expect_sym(",", "between arguments")?;
                }
            }
            return Ok(Expr::Call(func, args));
        }
        err(at, format!("unknown name `{name}`"))
    }

    fn member(&mut self, scope: Scope) -> Result<Expr, ExprError> {
        let at = self.offset();
        let Some(Tok::Ident(m)) = self.next() else {
            return err(at, "expected a member name after `.`");
        };
        match m.as_str() {
            "a" => {
                self.expect_sym(".", "before the property name")?;
                let at = self.offset();
                match self.next() {
                    Some(Tok::Ident(p)) => Ok(Expr::Prop(scope, p)),
                    Some(Tok::Text(p)) => Ok(Expr::Prop(scope, p)),
                    other => err(
                        at,
                        format!(
                            "expected a property name, found {}",
                            other.map_or("end of input".to_string(), |t| t.describe())
                        ),
                    ),
                }
            }
            "id" => Ok(Expr::Id(scope)),
            "src" => Ok(Expr::Src(scope)),
            "dst" => Ok(Expr::Dst(scope)),
            "state" => Ok(Expr::State(scope)),
            "outdeg" => Ok(Expr::OutDegree(scope)),
            other => err(
                at,
                format!("unknown member `{other}` (expected a, id, src, dst, state, or outdeg)"),
            ),
        }
    }
}

fn parse_scope(s: &str) -> Option<Scope> {
    Some(match s {
        "v" => Scope::V,
        "e" => Scope::E,
        "v1" => Scope::V1,
        "v2" => Scope::V2,
        "e1" => Scope::E1,
        "e2" => Scope::E2,
        _ => return None,
    })
}

fn parse_period(s: &str) -> Option<PeriodRef> {
    Some(match s {
        "p" => PeriodRef::P,
        "p1" => PeriodRef::P1,
        "p2" => PeriodRef::P2,
        _ => return None,
    })
}

fn parse_number(at: usize, s: &str) -> Result<Expr, ExprError> {
    if s.contains(['.', 'e', 'E']) {
        match s.parse::<f64>() {
            Ok(x) => Ok(Expr::Lit(PropertyValue::float(x))),
            Err(_) => err(at, format!("bad float literal `{s}`")),
        }
    } else {
        match s.parse::<i64>() {
            Ok(n) => Ok(Expr::Lit(PropertyValue::Int(n))),
            Err(_) => err(at, format!("integer literal `{s}` out of range")),
        }
    }
}

fn parser(text: &str) -> Result<Parser, ExprError> {
    Ok(Parser {
        toks: lex(text)?,
        pos: 0,
        len: text.chars().count(),
    })
}

/// Parses one expression; the whole text must be consumed.
pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    let mut p = parser(text)?;
    let e = p.or()?;
    if let Some(t) = p.peek() {
        return err(p.offset(), format!("unexpected {} after expression", t.describe()));
    }
    Ok(e)
}

/// Parses semicolon-separated `name = expr` assignments. An empty text is an
/// empty map function; a trailing semicolon is allowed.
pub fn parse_map_func(text: &str) -> Result<MapFunc, ExprError> {
    let mut p = parser(text)?;
    let mut assigns = Vec::new();
    while p.peek().is_some() {
        let at = p.offset();
        let name = match p.next() {
            Some(Tok::Ident(n)) => n,
            Some(Tok::Text(n)) => n,
            other => {
                return err(
                    at,
                    format!(
                        "expected an assignment target, found {}",
                        other.map_or("end of input".to_string(), |t| t.describe())
                    ),
                )
            }
        };
        p.expect_sym("=", "in the assignment")?;
        let expr = p.or()?;
        assigns.push((name, expr));
        if p.peek().is_some() {
            p.expect_sym(";", "between assignments")?;
        }
    }
    Ok(MapFunc::new(assigns))
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_')
}

pub(crate) fn quote_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        if c == '\'' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
    out
}

fn prop_name(s: &str) -> String {
    // Reserved words would reparse as keywords, so quote them too.
    if is_ident(s) && !matches!(s, "true" | "false" | "state" | "msg" | "agg") {
        s.to_string()
    } else {
        quote_text(s)
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => match op {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 5,
        },
        Expr::Unary(..) => 6,
        _ => 7,
    }
}

pub(crate) fn fmt_float(x: f64) -> Result<String, String> {
    if !x.is_finite() {
        return Err(format!("non-finite float {x} has no literal form"));
    }
    let mut s = format!("{x}");
    if !s.contains(['.', 'e', 'E']) {
        s.push_str(".0");
    }
    Ok(s)
}

fn fmt_expr(e: &Expr, min: u8, out: &mut String) -> Result<(), String> {
    let p = prec(e);
    if p < min {
        out.push('(');
        fmt_expr(e, 0, out)?;
        out.push(')');
        return Ok(());
    }
    match e {
        Expr::Lit(v) => match v {
            PropertyValue::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            PropertyValue::Int(n) => out.push_str(&n.to_string()),
            PropertyValue::Float(x) => out.push_str(&fmt_float(x.0)?),
            PropertyValue::Text(s) => out.push_str(&quote_text(s)),
            other => {
                return Err(format!(
                    "{} literals cannot be written in expressions",
                    other.type_name()
                ))
            }
        },
        Expr::Date(d) => {
            let chars: Vec<char> = d.chars().collect();
            if lex_date(&chars, 0).as_deref() != Some(d.as_str()) || chars.len() != 10 {
                return Err(format!("date literal `{d}` is not yyyy-mm-dd"));
            }
            out.push_str(d);
        }
        Expr::Prop(sc, name) => {
            out.push_str(sc.token());
            out.push_str(".a.");
            out.push_str(&prop_name(name));
        }
        Expr::Id(sc) => {
            out.push_str(sc.token());
            out.push_str(".id");
        }
        Expr::Src(sc) => {
            out.push_str(sc.token());
            out.push_str(".src");
        }
        Expr::Dst(sc) => {
            out.push_str(sc.token());
            out.push_str(".dst");
        }
        Expr::Start(pr) => {
            out.push_str(pr.token());
            out.push_str(".start");
        }
        Expr::End(pr) => {
            out.push_str(pr.token());
            out.push_str(".end");
        }
        Expr::IntervalLit(a, b) => {
            out.push('[');
            fmt_expr(a, 0, out)?;
            out.push_str(", ");
            fmt_expr(b, 0, out)?;
            out.push(')');
        }
        Expr::State(Scope::V) => out.push_str("state"),
        Expr::State(sc) => {
            out.push_str(sc.token());
            out.push_str(".state");
        }
        Expr::MsgAgg => out.push_str("msg"),
        Expr::OutDegree(sc) => {
            out.push_str(sc.token());
            out.push_str(".outdeg");
        }
        Expr::Unary(op, a) => {
            match op {
                UnaryOp::Not => out.push('!'),
                UnaryOp::Neg => {
                    // A numeric literal operand would reparse as a negative
                    // literal, a different tree.
                    if matches!(
                        a.as_ref(),
                        Expr::Lit(PropertyValue::Int(_) | PropertyValue::Float(_))
                    ) {
                        return Err(
                            "negated numeric literal; fold the sign into the literal".to_string()
                        );
                    }
                    out.push('-');
                }
            }
            fmt_expr(a, 6, out)?;
        }
        Expr::Binary(op, a, b) => {
            fmt_expr(a, p, out)?;
            out.push(' ');
            out.push_str(op.token());
            out.push(' ');
            fmt_expr(b, p + 1, out)?;
        }
        Expr::Call(f, args) => {
            out.push_str(f.token());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                fmt_expr(a, 0, out)?;
            }
            out.push(')');
        }
    }
    Ok(())
}

/// Formats an expression so that parsing the text yields the same tree,
/// modulo the normalizations listed in the module doc.
pub fn format_expr(e: &Expr) -> Result<String, String> {
    let mut out = String::new();
    fmt_expr(e, 0, &mut out)?;
    Ok(out)
}

/// Formats a map function as `name = expr; ...`.
pub fn format_map_func(m: &MapFunc) -> Result<String, String> {
    let parts: Vec<String> = m
        .assigns
        .iter()
        .map(|(name, e)| Ok(format!("{} = {}", prop_name(name), format_expr(e)?)))
        .collect::<Result<_, String>>()?;
    Ok(parts.join("; "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(e: &Expr) {
        let text = format_expr(e).unwrap();
        let back = parse_expr(&text).unwrap_or_else(|err| panic!("reparse `{text}`: {err}"));
        assert_eq!(&back, e, "through `{text}`");
    }

    #[test]
    fn precedence_shapes_the_tree() {
        let e = parse_expr("1 + 2 * 3 == 7 && !false").unwrap();
        let want = Expr::Binary(
            BinOp::And,
            Box::new(Expr::Binary(
                BinOp::Eq,
                Box::new(Expr::Binary(
                    BinOp::Add,
                    Box::new(Expr::Lit(PropertyValue::Int(1))),
                    Box::new(Expr::Binary(
                        BinOp::Mul,
                        Box::new(Expr::Lit(PropertyValue::Int(2))),
                        Box::new(Expr::Lit(PropertyValue::Int(3))),
                    )),
                )),
                Box::new(Expr::Lit(PropertyValue::Int(7))),
            )),
            Box::new(Expr::Unary(
                UnaryOp::Not,
                Box::new(Expr::Lit(PropertyValue::Bool(false))),
            )),
        );
        assert_eq!(e, want);
        roundtrip(&e);
    }

    #[test]
    fn scoped_access_parses() {
        assert_eq!(
            parse_expr("v.a.weight").unwrap(),
            Expr::Prop(Scope::V, "weight".into())
        );
        assert_eq!(parse_expr("e1.src").unwrap(), Expr::Src(Scope::E1));
        assert_eq!(parse_expr("p2.end").unwrap(), Expr::End(PeriodRef::P2));
        assert_eq!(parse_expr("state").unwrap(), Expr::State(Scope::V));
        assert_eq!(parse_expr("v1.state").unwrap(), Expr::State(Scope::V1));
        assert_eq!(parse_expr("msg").unwrap(), Expr::MsgAgg);
        assert_eq!(parse_expr("v2.outdeg").unwrap(), Expr::OutDegree(Scope::V2));
        assert_eq!(
            parse_expr("v.a.'odd name'").unwrap(),
            Expr::Prop(Scope::V, "odd name".into())
        );
    }

    #[test]
    fn dates_and_intervals_parse() {
        let e = parse_expr("overlaps([2015-01-15, 2015-03-15))").unwrap();
        assert_eq!(
            e,
            Expr::Call(
                FuncName::Overlaps,
                vec![Expr::IntervalLit(
                    Box::new(Expr::Date("2015-01-15".into())),
                    Box::new(Expr::Date("2015-03-15".into())),
                )]
            )
        );
        roundtrip(&e);
        // Spaced subtraction stays arithmetic.
        let sub = parse_expr("2015 - 1 - 15").unwrap();
        assert!(matches!(sub, Expr::Binary(BinOp::Sub, ..)));
    }

    #[test]
    fn negative_literals_fold() {
        assert_eq!(parse_expr("-3").unwrap(), Expr::Lit(PropertyValue::Int(-3)));
        assert_eq!(
            parse_expr("-0.5").unwrap(),
            Expr::Lit(PropertyValue::float(-0.5))
        );
        assert_eq!(
            parse_expr("1 - -3").unwrap(),
            Expr::Binary(
                BinOp::Sub,
                Box::new(Expr::Lit(PropertyValue::Int(1))),
                Box::new(Expr::Lit(PropertyValue::Int(-3))),
            )
        );
        roundtrip(&parse_expr("1 - -3").unwrap());
    }

    #[test]
    fn use_case_expressions_round_trip() {
        for text in [
            "stdev(deg) / mean(deg) * 100",
            "(mx * cnt - sm) / (cnt * cnt - 3 * cnt + 2)",
            "v.a.size > 2",
            "v1.a.weight == v2.a.weight",
            "contains(v.a.tags, 'x\\'y')",
            "has(v.a.salary) && v.a.salary >= 100",
        ] {
            // Bare aggregate names are not in scope here; wrap ones that need
            // a property scope.
            let fixed = text
                .replace("stdev(deg)", "stdev(v.a.deg)")
                .replace("mean(deg)", "mean(v.a.deg)")
                .replace("mx", "v.a.mx")
                .replace("cnt", "v.a.cnt")
                .replace("sm", "v.a.sm");
            let e = parse_expr(&fixed).unwrap();
            roundtrip(&e);
        }
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_expr("v.a.x >< 2").unwrap_err();
        assert_eq!(e.offset, 7);
        let e = parse_expr("v.b").unwrap_err();
        assert!(e.message.contains("unknown member `b`"));
        let e = parse_expr("frob(1)").unwrap_err();
        assert!(e.message.contains("unknown function `frob`"));
        let e = parse_expr("v.a.x = 2").unwrap_err();
        assert!(e.message.contains("assignment"));
        let e = parse_expr("'open").unwrap_err();
        assert!(e.message.contains("unterminated"));
    }

    #[test]
    fn map_funcs_round_trip() {
        let m = parse_map_func("cv = stdev(v.a.deg) / mean(v.a.deg) * 100; flag = true").unwrap();
        assert_eq!(m.assigns.len(), 2);
        let text = format_map_func(&m).unwrap();
        assert_eq!(parse_map_func(&text).unwrap(), m);
        assert!(parse_map_func("").unwrap().assigns.is_empty());
        assert!(parse_map_func("x = 1;").unwrap().assigns.len() == 1);
    }

    #[test]
    fn formatting_rejects_unwritable_trees() {
        assert!(format_expr(&Expr::Lit(PropertyValue::set([]))).is_err());
        assert!(format_expr(&Expr::Lit(PropertyValue::float(f64::NAN))).is_err());
        assert!(format_expr(&Expr::Unary(
            UnaryOp::Neg,
            Box::new(Expr::Lit(PropertyValue::Int(3)))
        ))
        .is_err());
        assert!(format_expr(&Expr::Date("nope".into())).is_err());
    }
}
