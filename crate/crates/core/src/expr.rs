//! Closed-form expressions in one variable `t`.
//!
//! The data functions `a`, `b` and `psi` of a problem are given as text and
//! parsed into an [`Expr`]. Expressions evaluate at real points and, when
//! they avoid `abs`, at complex points using principal branches.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          (right associative)
//! primary := number | 'pi' | 'e' | 't' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | sinh | cosh | exp | ln | sqrt | abs
//! ```

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

/// Syntax error with a 0-based character offset into the source text.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("syntax error at offset {offset}: {reason}")]
pub struct ParseError {
    pub offset: usize,
    pub reason: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("domain error in {node}: {reason}")]
    Domain { node: String, reason: String },
    #[error("division by zero in {node}")]
    DivisionByZero { node: String },
    #[error("overflow in {node}")]
    Overflow { node: String },
    #[error("{node} has no holomorphic extension; abs is real-only")]
    AbsNotAnalytic { node: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Const(Constant),
    Var,
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression. Immutable; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        let tokens = tokenize(src)?;
        let mut parser = Parser { tokens, pos: 0 };
        let root = parser.expr()?;
        match parser.peek() {
            Token {
                kind: TokenKind::End,
                ..
            } => Ok(Expr { root }),
            Token {
                kind: TokenKind::RParen,
                offset,
            } => Err(ParseError {
                offset: *offset,
                reason: "unbalanced parenthesis".into(),
            }),
            tok => Err(ParseError {
                offset: tok.offset,
                reason: format!("unexpected token {}", tok.kind),
            }),
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// True when no `abs` node occurs, i.e. the expression has a
    /// holomorphic extension off the real axis.
    pub fn is_abs_free(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Num(_) | Node::Const(_) | Node::Var => true,
                Node::Neg(x) => walk(x),
                Node::Binary(_, l, r) => walk(l) && walk(r),
                Node::Call(Func::Abs, _) => false,
                Node::Call(_, x) => walk(x),
            }
        }
        walk(&self.root)
    }

    pub fn eval_real(&self, t: f64) -> Result<f64, EvalError> {
        eval_real(&self.root, t)
    }

    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64, EvalError> {
        eval_complex(&self.root, z)
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

/// Fully parenthesized form; parsing it back yields the same tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Const(Constant::Pi) => f.write_str("pi"),
            Node::Const(Constant::E) => f.write_str("e"),
            Node::Var => f.write_str("t"),
            Node::Neg(x) => write!(f, "(-{x})"),
            Node::Binary(op, l, r) => {
                let sym = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                    BinOp::Pow => '^',
                };
                write!(f, "({l} {sym} {r})")
            }
            Node::Call(func, x) => write!(f, "{}({x})", func.name()),
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Num(v) => write!(f, "number {v}"),
            TokenKind::Ident(s) => write!(f, "'{s}'"),
            TokenKind::Plus => f.write_str("'+'"),
            TokenKind::Minus => f.write_str("'-'"),
            TokenKind::Star => f.write_str("'*'"),
            TokenKind::Slash => f.write_str("'/'"),
            TokenKind::Caret => f.write_str("'^'"),
            TokenKind::LParen => f.write_str("'('"),
            TokenKind::RParen => f.write_str("')'"),
            TokenKind::End => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = match ch {
            '+' => TokenKind::Plus,
            '-' => TokenKind::Minus,
            '*' => TokenKind::Star,
            '/' => TokenKind::Slash,
            '^' => TokenKind::Caret,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // exponent only when digits follow
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value = text.parse::<f64>().map_err(|_| ParseError {
                    offset: start,
                    reason: format!("malformed number '{text}'"),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Num(value),
                    offset: start,
                });
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(chars[start..i].iter().collect()),
                    offset: start,
                });
                continue;
            }
            c => {
                return Err(ParseError {
                    offset: start,
                    reason: format!("unexpected character '{c}'"),
                })
            }
        };
        tokens.push(Token {
            kind,
            offset: start,
        });
        i += 1;
    }
    tokens.push(Token {
        kind: TokenKind::End,
        offset: chars.len(),
    });
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Recursive descent

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if tok.kind != TokenKind::End {
            self.pos += 1;
        }
        tok
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.peek().kind == TokenKind::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if self.peek().kind == TokenKind::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let tok = self.bump();
        match tok.kind {
            TokenKind::Num(v) => Ok(Node::Num(v)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => match name.as_str() {
                "t" => Ok(Node::Var),
                "pi" => Ok(Node::Const(Constant::Pi)),
                "e" => Ok(Node::Const(Constant::E)),
                _ => {
                    let func = Func::from_name(&name).ok_or_else(|| ParseError {
                        offset: tok.offset,
                        reason: format!("unknown identifier '{name}'"),
                    })?;
                    let next = self.bump();
                    if next.kind != TokenKind::LParen {
                        return Err(ParseError {
                            offset: next.offset,
                            reason: format!("expected '(' after {name}"),
                        });
                    }
                    let arg = self.expr()?;
                    self.close_paren()?;
                    Ok(Node::Call(func, Box::new(arg)))
                }
            },
            TokenKind::RParen => Err(ParseError {
                offset: tok.offset,
                reason: "unbalanced parenthesis".into(),
            }),
            kind => Err(ParseError {
                offset: tok.offset,
                reason: format!("unexpected token {kind}"),
            }),
        }
    }

    fn close_paren(&mut self) -> Result<(), ParseError> {
        let tok = self.bump();
        match tok.kind {
            TokenKind::RParen => Ok(()),
            TokenKind::End => Err(ParseError {
                offset: tok.offset,
                reason: "unbalanced parenthesis".into(),
            }),
            kind => Err(ParseError {
                offset: tok.offset,
                reason: format!("unexpected token {kind}, expected ')'"),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation

/// Exponent usable by repeated multiplication.
fn integer_exponent(e: f64) -> Option<i64> {
    (e.fract() == 0.0 && e.abs() <= 1e9).then_some(e as i64)
}

trait Field: Copy + std::ops::Mul<Output = Self> {
    fn one() -> Self;
}

impl Field for f64 {
    fn one() -> Self {
        1.0
    }
}

impl Field for Complex64 {
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
}

fn ipow<T: Field>(base: T, mut n: u64) -> T {
    let mut acc = T::one();
    let mut sq = base;
    while n > 0 {
        if n & 1 == 1 {
            acc = acc * sq;
        }
        n >>= 1;
        if n > 0 {
            sq = sq * sq;
        }
    }
    acc
}

fn finite_or(v: f64, node: impl FnOnce() -> String) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Overflow { node: node() })
    }
}

fn eval_real(node: &Node, t: f64) -> Result<f64, EvalError> {
    let v = match node {
        Node::Num(v) => *v,
        Node::Const(Constant::Pi) => std::f64::consts::PI,
        Node::Const(Constant::E) => std::f64::consts::E,
        Node::Var => t,
        Node::Neg(x) => -eval_real(x, t)?,
        Node::Binary(op, l, r) => {
            let a = eval_real(l, t)?;
            let b = eval_real(r, t)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(EvalError::DivisionByZero {
                            node: node.to_string(),
                        });
                    }
                    a / b
                }
                BinOp::Pow => pow_real(a, b, node)?,
            }
        }
        Node::Call(func, x) => {
            let a = eval_real(x, t)?;
            let domain = |reason: &str| EvalError::Domain {
                node: format!("{}({a})", func.name()),
                reason: reason.into(),
            };
            match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Sinh => a.sinh(),
                Func::Cosh => a.cosh(),
                Func::Exp => a.exp(),
                Func::Ln => {
                    if a <= 0.0 {
                        return Err(domain("logarithm of a non-positive number"));
                    }
                    a.ln()
                }
                Func::Sqrt => {
                    if a < 0.0 {
                        return Err(domain("square root of a negative number"));
                    }
                    a.sqrt()
                }
                Func::Abs => a.abs(),
            }
        }
    };
    finite_or(v, || node.to_string())
}

fn pow_real(base: f64, exponent: f64, node: &Node) -> Result<f64, EvalError> {
    if let Some(n) = integer_exponent(exponent) {
        if n >= 0 {
            return Ok(ipow(base, n as u64));
        }
        if base == 0.0 {
            return Err(EvalError::DivisionByZero {
                node: node.to_string(),
            });
        }
        return Ok(1.0 / ipow(base, n.unsigned_abs()));
    }
    if base > 0.0 {
        Ok(base.powf(exponent))
    } else if base == 0.0 && exponent > 0.0 {
        Ok(0.0)
    } else {
        Err(EvalError::Domain {
            node: format!("{base}^{exponent}"),
            reason: "non-integer power of a non-positive base".into(),
        })
    }
}

fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    if b.im == 0.0 {
        Complex64::new(a.re / b.re, a.im / b.re)
    } else {
        a / b
    }
}

fn eval_complex(node: &Node, z: Complex64) -> Result<Complex64, EvalError> {
    let v = match node {
        Node::Num(v) => Complex64::new(*v, 0.0),
        Node::Const(Constant::Pi) => Complex64::new(std::f64::consts::PI, 0.0),
        Node::Const(Constant::E) => Complex64::new(std::f64::consts::E, 0.0),
        Node::Var => z,
        Node::Neg(x) => -eval_complex(x, z)?,
        Node::Binary(op, l, r) => {
            let a = eval_complex(l, z)?;
            let b = eval_complex(r, z)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b.re == 0.0 && b.im == 0.0 {
                        return Err(EvalError::DivisionByZero {
                            node: node.to_string(),
                        });
                    }
                    cdiv(a, b)
                }
                BinOp::Pow => pow_complex(a, b, node)?,
            }
        }
        Node::Call(func, x) => {
            let a = eval_complex(x, z)?;
            match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Sinh => a.sinh(),
                Func::Cosh => a.cosh(),
                Func::Exp => a.exp(),
                Func::Ln => {
                    if a.re == 0.0 && a.im == 0.0 {
                        return Err(EvalError::Domain {
                            node: format!("ln({a})"),
                            reason: "logarithm of zero".into(),
                        });
                    }
                    a.ln()
                }
                Func::Sqrt => {
                    if a.im == 0.0 && a.re >= 0.0 {
                        Complex64::new(a.re.sqrt(), 0.0)
                    } else {
                        a.sqrt()
                    }
                }
                Func::Abs => {
                    return Err(EvalError::AbsNotAnalytic {
                        node: node.to_string(),
                    })
                }
            }
        }
    };
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Overflow {
            node: node.to_string(),
        })
    }
}

fn pow_complex(base: Complex64, exponent: Complex64, node: &Node) -> Result<Complex64, EvalError> {
    if exponent.im == 0.0 {
        if let Some(n) = integer_exponent(exponent.re) {
            if n >= 0 {
                return Ok(ipow(base, n as u64));
            }
            if base.re == 0.0 && base.im == 0.0 {
                return Err(EvalError::DivisionByZero {
                    node: node.to_string(),
                });
            }
            return Ok(cdiv(Complex64::new(1.0, 0.0), ipow(base, n.unsigned_abs())));
        }
        if base.im == 0.0 && base.re > 0.0 {
            return Ok(Complex64::new(base.re.powf(exponent.re), 0.0));
        }
    }
    if base.re == 0.0 && base.im == 0.0 {
        if exponent.re > 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Err(EvalError::Domain {
            node: format!("0^({exponent})"),
            reason: "power of zero with non-positive real exponent".into(),
        });
    }
    Ok((exponent * base.ln()).exp())
}
