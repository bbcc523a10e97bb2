//! Parsing and evaluation of scalar coefficient functions over (x, y, z).
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := factor (("*"|"/") factor)* ;
//! factor := ("-")? power ;
//! power  := atom ("^" integer)? ;
//! atom   := number | "x" | "y" | "z" | "pi" | "e" | func "(" expr ")" | "(" expr ")" ;
//! func   := "exp" | "log" | "sin" | "cos" | "sqrt" ;
//! ```
//!
//! Exponents are integer literals; real powers are spelled through exp/log.
//! There is no implicit multiplication.

use std::fmt;

use thiserror::Error;

use crate::jets::{Axis, Jet, JetError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("exponent at byte {offset} must be an integer literal")]
    NonIntegerExponent { offset: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{source} in sub-expression at bytes {span:?}")]
pub struct EvalError {
    pub source: JetError,
    pub span: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuncName {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl FuncName {
    fn name(self) -> &'static str {
        match self {
            FuncName::Exp => "exp",
            FuncName::Log => "log",
            FuncName::Sin => "sin",
            FuncName::Cos => "cos",
            FuncName::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Number(f64),
    Pi,
    E,
    Var(Axis),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Func(FuncName, Box<Expr>),
}

/// Expression node with the byte range it was parsed from. Synthetic nodes
/// (built programmatically or by differentiation) carry an empty span.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: (usize, usize),
}

// Structural equality ignores spans: serialize-then-reparse must be identity.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use ExprKind::*;
        match (&self.kind, &other.kind) {
            (Number(a), Number(b)) => a == b,
            (Pi, Pi) | (E, E) => true,
            (Var(a), Var(b)) => a == b,
            (Neg(a), Neg(b)) => a == b,
            (Add(a, b), Add(c, d))
            | (Sub(a, b), Sub(c, d))
            | (Mul(a, b), Mul(c, d))
            | (Div(a, b), Div(c, d)) => a == c && b == d,
            (Pow(a, n), Pow(b, m)) => a == b && n == m,
            (Func(f, a), Func(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

fn expr(kind: ExprKind) -> Box<Expr> {
    Box::new(Expr { kind, span: (0, 0) })
}

/// A parsed, immutable coefficient function of (x, y, z).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    ast: Expr,
}

impl ScalarField {
    /// Parse an expression. The entry point of the grammar above.
    pub fn parse(src: &str) -> Result<ScalarField, ParseError> {
        let tokens = lex(src)?;
        let mut parser = Parser { tokens, pos: 0 };
        let ast = parser.expr()?;
        match parser.peek() {
            Token::Eof(_) => Ok(ScalarField { ast }),
            t => Err(ParseError::Syntax {
                offset: t.offset(),
                message: format!("unexpected {}", t.describe()),
            }),
        }
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    /// Evaluate to a jet of the given order at a point.
    pub fn eval_jet(&self, point: [f64; 3], order: usize) -> Result<Jet, EvalError> {
        eval(&self.ast, point, order)
    }

    /// Plain value; identical to the order-0 jet's value part.
    pub fn eval(&self, point: [f64; 3]) -> Result<f64, EvalError> {
        Ok(self.eval_jet(point, 0)?.value())
    }

    /// Exact symbolic partial derivative along an axis.
    pub fn derivative(&self, axis: Axis) -> ScalarField {
        ScalarField {
            ast: *diff(&self.ast, axis),
        }
    }

    // Programmatic constructors, used when canonical structures are
    // assembled from user-supplied fields.

    /// Numeric literal. Negative values are stored as a unary minus around a
    /// positive literal, matching the only shape the grammar can produce, so
    /// that serialize-then-reparse stays the identity.
    pub fn number(v: f64) -> ScalarField {
        let kind = if v == 0.0 {
            ExprKind::Number(0.0)
        } else if v < 0.0 {
            ExprKind::Neg(expr(ExprKind::Number(-v)))
        } else {
            ExprKind::Number(v)
        };
        ScalarField {
            ast: Expr { kind, span: (0, 0) },
        }
    }

    pub fn var(axis: Axis) -> ScalarField {
        ScalarField {
            ast: Expr {
                kind: ExprKind::Var(axis),
                span: (0, 0),
            },
        }
    }

    pub fn zero() -> ScalarField {
        ScalarField::number(0.0)
    }

    pub fn is_zero_literal(&self) -> bool {
        is_zero(&self.ast)
    }

    fn wrap(kind: Box<Expr>) -> ScalarField {
        ScalarField { ast: *kind }
    }

    fn boxed(&self) -> Box<Expr> {
        Box::new(self.ast.clone())
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        Self::wrap(s_add(self.boxed(), other.boxed()))
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        Self::wrap(s_sub(self.boxed(), other.boxed()))
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        Self::wrap(s_mul(self.boxed(), other.boxed()))
    }

    pub fn div(&self, other: &ScalarField) -> ScalarField {
        Self::wrap(s_div(self.boxed(), other.boxed()))
    }

    pub fn neg(&self) -> ScalarField {
        Self::wrap(s_neg(self.boxed()))
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        ScalarField::number(s).mul(self)
    }

    pub fn exp(&self) -> ScalarField {
        Self::wrap(expr(ExprKind::Func(FuncName::Exp, self.boxed())))
    }

    pub fn sqrt(&self) -> ScalarField {
        Self::wrap(expr(ExprKind::Func(FuncName::Sqrt, self.boxed())))
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print_expr(&self.ast, f, 0)
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64, usize),
    Ident(String, usize),
    Plus(usize),
    Minus(usize),
    Star(usize),
    Slash(usize),
    Caret(usize),
    LParen(usize),
    RParen(usize),
    Eof(usize),
}

impl Token {
    fn offset(&self) -> usize {
        match self {
            Token::Number(_, o)
            | Token::Ident(_, o)
            | Token::Plus(o)
            | Token::Minus(o)
            | Token::Star(o)
            | Token::Slash(o)
            | Token::Caret(o)
            | Token::LParen(o)
            | Token::RParen(o)
            | Token::Eof(o) => *o,
        }
    }

    fn describe(&self) -> String {
        match self {
            Token::Number(v, _) => format!("number `{v}`"),
            Token::Ident(s, _) => format!("identifier `{s}`"),
            Token::Plus(_) => "`+`".into(),
            Token::Minus(_) => "`-`".into(),
            Token::Star(_) => "`*`".into(),
            Token::Slash(_) => "`/`".into(),
            Token::Caret(_) => "`^`".into(),
            Token::LParen(_) => "`(`".into(),
            Token::RParen(_) => "`)`".into(),
            Token::Eof(_) => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                tokens.push(Token::Plus(i));
                i += 1;
            }
            b'-' => {
                tokens.push(Token::Minus(i));
                i += 1;
            }
            b'*' => {
                tokens.push(Token::Star(i));
                i += 1;
            }
            b'/' => {
                tokens.push(Token::Slash(i));
                i += 1;
            }
            b'^' => {
                tokens.push(Token::Caret(i));
                i += 1;
            }
            b'(' => {
                tokens.push(Token::LParen(i));
                i += 1;
            }
            b')' => {
                tokens.push(Token::RParen(i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value = text.parse::<f64>().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("invalid number `{text}`"),
                })?;
                tokens.push(Token::Number(value, start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push(Token::Ident(src[start..i].to_string(), start));
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset: i,
                    message: format!(
                        "unexpected character `{}`",
                        src[i..].chars().next().unwrap()
                    ),
                })
            }
        }
    }
    tokens.push(Token::Eof(src.len()));
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let add = match self.peek() {
                Token::Plus(_) => true,
                Token::Minus(_) => false,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            let span = (lhs.span.0, rhs.span.1);
            let (a, b) = (Box::new(lhs), Box::new(rhs));
            lhs = Expr {
                kind: if add {
                    ExprKind::Add(a, b)
                } else {
                    ExprKind::Sub(a, b)
                },
                span,
            };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let mul = match self.peek() {
                Token::Star(_) => true,
                Token::Slash(_) => false,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            let span = (lhs.span.0, rhs.span.1);
            let (a, b) = (Box::new(lhs), Box::new(rhs));
            lhs = Expr {
                kind: if mul {
                    ExprKind::Mul(a, b)
                } else {
                    ExprKind::Div(a, b)
                },
                span,
            };
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if let Token::Minus(start) = *self.peek() {
            self.bump();
            let inner = self.power()?;
            let span = (start, inner.span.1);
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !matches!(self.peek(), Token::Caret(_)) {
            return Ok(base);
        }
        self.bump();
        let negate = if matches!(self.peek(), Token::Minus(_)) {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            Token::Number(v, off) => {
                if v.fract() != 0.0 || v.abs() > i32::MAX as f64 {
                    return Err(ParseError::NonIntegerExponent { offset: off });
                }
                let n = v as i32 * if negate { -1 } else { 1 };
                let span = (base.span.0, off);
                Ok(Expr {
                    kind: ExprKind::Pow(Box::new(base), n),
                    span,
                })
            }
            t => Err(ParseError::NonIntegerExponent { offset: t.offset() }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.bump() {
            Token::Number(v, off) => Ok(Expr {
                kind: ExprKind::Number(v),
                span: (off, off),
            }),
            Token::Ident(name, off) => {
                let kind = match name.as_str() {
                    "x" => Some(ExprKind::Var(Axis::X)),
                    "y" => Some(ExprKind::Var(Axis::Y)),
                    "z" => Some(ExprKind::Var(Axis::Z)),
                    "pi" => Some(ExprKind::Pi),
                    "e" => Some(ExprKind::E),
                    _ => None,
                };
                if let Some(kind) = kind {
                    return Ok(Expr {
                        kind,
                        span: (off, off + name.len()),
                    });
                }
                let func = match name.as_str() {
                    "exp" => FuncName::Exp,
                    "log" => FuncName::Log,
                    "sin" => FuncName::Sin,
                    "cos" => FuncName::Cos,
                    "sqrt" => FuncName::Sqrt,
                    _ => return Err(ParseError::UnknownIdentifier { offset: off, name }),
                };
                match self.bump() {
                    Token::LParen(_) => {}
                    t => {
                        return Err(ParseError::Syntax {
                            offset: t.offset(),
                            message: format!("expected `(` after `{}`", func.name()),
                        })
                    }
                }
                let arg = self.expr()?;
                match self.bump() {
                    Token::RParen(end) => Ok(Expr {
                        kind: ExprKind::Func(func, Box::new(arg)),
                        span: (off, end + 1),
                    }),
                    t => Err(ParseError::Syntax {
                        offset: t.offset(),
                        message: "expected `)`".into(),
                    }),
                }
            }
            Token::LParen(start) => {
                let inner = self.expr()?;
                match self.bump() {
                    Token::RParen(end) => Ok(Expr {
                        kind: inner.kind,
                        span: (start, end + 1),
                    }),
                    t => Err(ParseError::Syntax {
                        offset: t.offset(),
                        message: "expected `)`".into(),
                    }),
                }
            }
            t => Err(ParseError::Syntax {
                offset: t.offset(),
                message: format!("unexpected {}", t.describe()),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

fn eval(node: &Expr, point: [f64; 3], order: usize) -> Result<Jet, EvalError> {
    let at = |e: JetError| EvalError {
        source: e,
        span: node.span,
    };
    match &node.kind {
        ExprKind::Number(v) => Ok(Jet::constant(point, order, *v)),
        ExprKind::Pi => Ok(Jet::constant(point, order, std::f64::consts::PI)),
        ExprKind::E => Ok(Jet::constant(point, order, std::f64::consts::E)),
        ExprKind::Var(axis) => Ok(Jet::variable(point, order, *axis)),
        ExprKind::Neg(a) => Ok(-eval(a, point, order)?),
        ExprKind::Add(a, b) => eval(a, point, order)?
            .try_add(&eval(b, point, order)?)
            .map_err(at),
        ExprKind::Sub(a, b) => eval(a, point, order)?
            .try_sub(&eval(b, point, order)?)
            .map_err(at),
        ExprKind::Mul(a, b) => eval(a, point, order)?
            .try_mul(&eval(b, point, order)?)
            .map_err(at),
        ExprKind::Div(a, b) => eval(a, point, order)?
            .try_div(&eval(b, point, order)?)
            .map_err(at),
        ExprKind::Pow(a, n) => eval(a, point, order)?.try_powi(*n).map_err(at),
        ExprKind::Func(f, a) => {
            let arg = eval(a, point, order)?;
            match f {
                FuncName::Exp => Ok(arg.exp()),
                FuncName::Sin => Ok(arg.sin()),
                FuncName::Cos => Ok(arg.cos()),
                FuncName::Log => arg.try_ln().map_err(at),
                FuncName::Sqrt => arg.try_sqrt().map_err(at),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Symbolic differentiation with light simplification
// ---------------------------------------------------------------------------

fn is_zero(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Number(v) if v == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Number(v) if v == 1.0)
}

fn s_add(a: Box<Expr>, b: Box<Expr>) -> Box<Expr> {
    if is_zero(&a) {
        return b;
    }
    if is_zero(&b) {
        return a;
    }
    expr(ExprKind::Add(a, b))
}

fn s_sub(a: Box<Expr>, b: Box<Expr>) -> Box<Expr> {
    if is_zero(&b) {
        return a;
    }
    if is_zero(&a) {
        return s_neg(b);
    }
    expr(ExprKind::Sub(a, b))
}

fn s_neg(a: Box<Expr>) -> Box<Expr> {
    if is_zero(&a) {
        return a;
    }
    if let ExprKind::Neg(inner) = a.kind {
        return inner;
    }
    expr(ExprKind::Neg(a))
}

fn s_mul(a: Box<Expr>, b: Box<Expr>) -> Box<Expr> {
    if is_zero(&a) || is_one(&b) {
        return a;
    }
    if is_zero(&b) || is_one(&a) {
        return b;
    }
    expr(ExprKind::Mul(a, b))
}

fn s_div(a: Box<Expr>, b: Box<Expr>) -> Box<Expr> {
    if is_zero(&a) || is_one(&b) {
        return a;
    }
    expr(ExprKind::Div(a, b))
}

fn diff(node: &Expr, axis: Axis) -> Box<Expr> {
    let zero = || expr(ExprKind::Number(0.0));
    let keep = |e: &Expr| Box::new(e.clone());
    match &node.kind {
        ExprKind::Number(_) | ExprKind::Pi | ExprKind::E => zero(),
        ExprKind::Var(a) => expr(ExprKind::Number(if *a == axis { 1.0 } else { 0.0 })),
        ExprKind::Neg(a) => s_neg(diff(a, axis)),
        ExprKind::Add(a, b) => s_add(diff(a, axis), diff(b, axis)),
        ExprKind::Sub(a, b) => s_sub(diff(a, axis), diff(b, axis)),
        ExprKind::Mul(a, b) => s_add(s_mul(diff(a, axis), keep(b)), s_mul(keep(a), diff(b, axis))),
        ExprKind::Div(a, b) => {
            let num = s_sub(s_mul(diff(a, axis), keep(b)), s_mul(keep(a), diff(b, axis)));
            s_div(num, expr(ExprKind::Pow(keep(b), 2)))
        }
        ExprKind::Pow(a, n) => {
            if *n == 0 {
                return zero();
            }
            let lower = if *n == 2 {
                keep(a)
            } else {
                expr(ExprKind::Pow(keep(a), n - 1))
            };
            s_mul(expr(ExprKind::Number(*n as f64)), s_mul(lower, diff(a, axis)))
        }
        ExprKind::Func(f, a) => {
            let da = diff(a, axis);
            match f {
                FuncName::Exp => s_mul(expr(ExprKind::Func(FuncName::Exp, keep(a))), da),
                FuncName::Log => s_div(da, keep(a)),
                FuncName::Sin => s_mul(expr(ExprKind::Func(FuncName::Cos, keep(a))), da),
                FuncName::Cos => s_neg(s_mul(expr(ExprKind::Func(FuncName::Sin, keep(a))), da)),
                FuncName::Sqrt => s_div(
                    da,
                    s_mul(
                        expr(ExprKind::Number(2.0)),
                        expr(ExprKind::Func(FuncName::Sqrt, keep(a))),
                    ),
                ),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Serializer (round-trips through the parser)
// ---------------------------------------------------------------------------

fn precedence(kind: &ExprKind) -> u8 {
    match kind {
        ExprKind::Add(..) | ExprKind::Sub(..) => 1,
        ExprKind::Mul(..) | ExprKind::Div(..) => 2,
        ExprKind::Neg(..) => 3,
        ExprKind::Pow(..) => 4,
        ExprKind::Number(v) if *v < 0.0 => 3,
        _ => 5,
    }
}

fn print_expr(node: &Expr, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
    let prec = precedence(&node.kind);
    let parens = prec < min_prec;
    if parens {
        write!(f, "(")?;
    }
    match &node.kind {
        ExprKind::Number(v) => write!(f, "{v}")?,
        ExprKind::Pi => write!(f, "pi")?,
        ExprKind::E => write!(f, "e")?,
        ExprKind::Var(a) => write!(f, "{}", a.name())?,
        ExprKind::Neg(a) => {
            write!(f, "-")?;
            print_expr(a, f, 4)?;
        }
        ExprKind::Add(a, b) => {
            print_expr(a, f, 1)?;
            write!(f, " + ")?;
            print_expr(b, f, 2)?;
        }
        ExprKind::Sub(a, b) => {
            print_expr(a, f, 1)?;
            write!(f, " - ")?;
            print_expr(b, f, 2)?;
        }
        ExprKind::Mul(a, b) => {
            print_expr(a, f, 2)?;
            write!(f, "*")?;
            print_expr(b, f, 3)?;
        }
        ExprKind::Div(a, b) => {
            print_expr(a, f, 2)?;
            write!(f, "/")?;
            print_expr(b, f, 3)?;
        }
        ExprKind::Pow(a, n) => {
            print_expr(a, f, 5)?;
            write!(f, "^{n}")?;
        }
        ExprKind::Func(g, a) => {
            write!(f, "{}(", g.name())?;
            print_expr(a, f, 0)?;
            write!(f, ")")?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn arithmetic_example() {
        let field = ScalarField::parse("x*y + (x^2-2)/2 * z^2").unwrap();
        assert_relative_eq!(field.eval([1.0, 1.0, 1.0]).unwrap(), 0.5);
    }

    #[test]
    fn exp_of_negated_variable() {
        let field = ScalarField::parse("exp(-x)").unwrap();
        assert_relative_eq!(field.eval([0.0, 0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn malformed_input_reports_offset() {
        match ScalarField::parse("x + * y") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn grammar_productions_accept_and_reject() {
        let accepted = [
            "1 + 2 - 3",       // expr
            "2*3/4",           // term
            "-x",              // factor
            "x^3",             // power
            "x^-2",            // power, negative exponent
            "(x + y)",         // parenthesized atom
            "pi",              // reserved constant
            "e",               // reserved constant
            "1.5e-3",          // number with fraction and exponent
            "sqrt(x + 2)",     // func
            "exp(log(x + 3))", // nested func
            "cos(sin(x))",     // func
        ];
        for src in accepted {
            assert!(ScalarField::parse(src).is_ok(), "should accept {src:?}");
        }
        let rejected = [
            "1 +",     // expr: dangling operator
            "2 * * 3", // term: double operator
            "--x",     // factor: double unary minus
            "x^y",     // power: non-literal exponent
            "x^2.5",   // power: non-integer exponent
            "(x + y",  // atom: unbalanced paren
            "2x",      // no implicit multiplication
            "sin x",   // func without parens
            "foo(3)",  // unknown identifier
            "",        // empty input
        ];
        for src in rejected {
            assert!(ScalarField::parse(src).is_err(), "should reject {src:?}");
        }
    }

    #[test]
    fn unknown_identifier_error() {
        match ScalarField::parse("3 + bar") {
            Err(ParseError::UnknownIdentifier { offset, name }) => {
                assert_eq!(offset, 4);
                assert_eq!(name, "bar");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eval_jet_examples() {
        let f = ScalarField::parse("y^2").unwrap();
        let jet = f.eval_jet([0.0, 1.0, 0.0], 2).unwrap();
        assert_relative_eq!(jet.value(), 1.0);
        assert_relative_eq!(jet.partial((0, 1, 0)).unwrap(), 2.0);
        assert_relative_eq!(jet.partial((0, 2, 0)).unwrap(), 2.0);

        let g = ScalarField::parse("z^2").unwrap();
        for p in [[0.0; 3], [1.0, -2.0, 0.5], [3.0, 0.0, -1.0]] {
            let jet = g.eval_jet(p, 2).unwrap();
            assert_relative_eq!(jet.partial((0, 0, 2)).unwrap(), 2.0);
        }
    }

    #[test]
    fn eval_jet_matches_finite_differences() {
        // d^2/dxdz exp(x z) at (1, 0, 2) against a central stencil.
        let f = ScalarField::parse("exp(x*z)").unwrap();
        let p = [1.0, 0.0, 2.0];
        let jet = f.eval_jet(p, 2).unwrap();
        let h = 1e-5;
        let ev = |dx: f64, dz: f64| ((p[0] + dx) * (p[2] + dz)).exp();
        let fd = (ev(h, h) - ev(h, -h) - ev(-h, h) + ev(-h, -h)) / (4.0 * h * h);
        assert_relative_eq!(
            jet.partial((1, 0, 1)).unwrap(),
            fd,
            epsilon = 1e-7,
            max_relative = 1e-7
        );
    }

    #[test]
    fn eval_order_zero_is_plain_arithmetic() {
        let f = ScalarField::parse("sin(x)*cos(y) + sqrt(z + 2)/3").unwrap();
        let p = [0.3, -0.4, 0.9];
        let direct = (0.3f64).sin() * (-0.4f64).cos() + (2.9f64).sqrt() / 3.0;
        assert_relative_eq!(f.eval(p).unwrap(), direct, epsilon = 1e-15);
    }

    #[test]
    fn domain_error_carries_location() {
        let f = ScalarField::parse("1 + log(x - 2)").unwrap();
        match f.eval_jet([0.0; 3], 1) {
            Err(EvalError { source, span }) => {
                assert!(matches!(source, JetError::DomainError { .. }));
                assert_eq!(span, (4, 14));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn division_by_zero_carries_location() {
        let f = ScalarField::parse("1/x").unwrap();
        match f.eval_jet([0.0; 3], 1) {
            Err(EvalError { source, .. }) => {
                assert!(matches!(source, JetError::DivisionByZeroValue(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn symbolic_derivative_matches_jet_partial() {
        let f = ScalarField::parse("exp(x*z) + sqrt(y + 2)*cos(z) - x^3/(y + 5)").unwrap();
        let p = [0.4, 0.2, -0.3];
        let jet = f.eval_jet(p, 1).unwrap();
        for axis in Axis::ALL {
            let d = f.derivative(axis);
            let idx = match axis {
                Axis::X => (1, 0, 0),
                Axis::Y => (0, 1, 0),
                Axis::Z => (0, 0, 1),
            };
            assert_relative_eq!(
                d.eval(p).unwrap(),
                jet.partial(idx).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let mk = |kind| Expr { kind, span: (0, 0) };
        // Literals are non-negative: the grammar produces negative values only
        // through unary minus, which the Neg case below covers.
        let leaf = prop_oneof![
            (0i32..40).prop_map(move |v| mk(ExprKind::Number(v as f64 / 4.0))),
            Just(mk(ExprKind::Pi)),
            Just(mk(ExprKind::E)),
            Just(mk(ExprKind::Var(Axis::X))),
            Just(mk(ExprKind::Var(Axis::Y))),
            Just(mk(ExprKind::Var(Axis::Z))),
        ];
        leaf.prop_recursive(4, 24, 2, move |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(move |(a, b)| mk(ExprKind::Add(Box::new(a), Box::new(b)))),
                (inner.clone(), inner.clone())
                    .prop_map(move |(a, b)| mk(ExprKind::Sub(Box::new(a), Box::new(b)))),
                (inner.clone(), inner.clone())
                    .prop_map(move |(a, b)| mk(ExprKind::Mul(Box::new(a), Box::new(b)))),
                (inner.clone(), inner.clone())
                    .prop_map(move |(a, b)| mk(ExprKind::Div(Box::new(a), Box::new(b)))),
                (inner.clone(), -3i32..4)
                    .prop_map(move |(a, n)| mk(ExprKind::Pow(Box::new(a), n))),
                inner
                    .clone()
                    .prop_map(move |a| mk(ExprKind::Neg(Box::new(a)))),
                (
                    prop_oneof![
                        Just(FuncName::Exp),
                        Just(FuncName::Log),
                        Just(FuncName::Sin),
                        Just(FuncName::Cos),
                        Just(FuncName::Sqrt)
                    ],
                    inner
                )
                    .prop_map(move |(f, a)| mk(ExprKind::Func(f, Box::new(a)))),
            ]
        })
    }

    proptest! {
        #[test]
        fn parse_serialize_parse_round_trip(ast in arb_expr()) {
            let field = ScalarField { ast };
            let printed = field.to_string();
            let reparsed = ScalarField::parse(&printed)
                .unwrap_or_else(|e| panic!("failed to reparse {printed:?}: {e}"));
            prop_assert_eq!(field.ast(), reparsed.ast(), "printed form: {}", printed);
        }
    }
}
