//! Closed-form scalar expressions in chart coordinates.
//!
//! Grammar (EBNF, also documented in the README):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = factor { ("*" | "/") factor } ;
//! factor  = unary [ "^" factor ] ;            (* right-associative *)
//! unary   = "-" unary | atom ;
//! atom    = number | "pi" | "e" | variable | function "(" expr ")" | "(" expr ")" ;
//! variable = "x1" | "x2" | "x3" | "x4" ;
//! function = "sin" | "cos" | "tan" | "sinh" | "cosh" | "tanh"
//!          | "exp" | "log" | "sqrt" | "abs" ;
//! ```
//!
//! Exponents must evaluate to integers. All error offsets are 1-based
//! character positions into the source string.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    Pi,
    E,
    /// 0-based coordinate index.
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Immutable expression tree; `pos` is the 1-based offset of the node's
/// first character in the original source.
#[derive(Debug, Clone)]
pub struct Expr {
    node: Node,
    pos: usize,
}

/// Parse `source` against a chart of dimension `dim` (3 or 4).
pub fn parse(source: &str, dim: usize) -> Result<Expr> {
    if !(dim == 3 || dim == 4) {
        return Err(Error::Invalid(format!("dimension must be 3 or 4, got {dim}")));
    }
    let tokens = lex(source)?;
    let mut parser = Parser { tokens, cursor: 0, dim };
    let expr = parser.parse_expr()?;
    match parser.peek() {
        Token::End => Ok(expr),
        tok => Err(Error::Parse {
            offset: parser.peek_pos(),
            message: format!("unexpected trailing input `{tok}`"),
        }),
    }
}

impl Expr {
    /// Evaluate at `point` (length >= chart dimension the expression was
    /// parsed against). Pure and thread-safe.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let value = self.eval_inner(point)?;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Eval {
                offset: self.pos,
                message: format!("non-finite value {value}"),
            })
        }
    }

    fn eval_inner(&self, point: &[f64]) -> Result<f64> {
        match &self.node {
            Node::Num(v) => Ok(*v),
            Node::Pi => Ok(std::f64::consts::PI),
            Node::E => Ok(std::f64::consts::E),
            Node::Var(i) => point.get(*i).copied().ok_or_else(|| Error::Eval {
                offset: self.pos,
                message: format!("point has no coordinate x{}", i + 1),
            }),
            Node::Neg(inner) => Ok(-inner.eval_inner(point)?),
            Node::Bin(op, lhs, rhs) => {
                let a = lhs.eval_inner(point)?;
                let b = rhs.eval_inner(point)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(Error::Eval {
                                offset: self.pos,
                                message: "division by zero".into(),
                            })
                        } else {
                            Ok(a / b)
                        }
                    }
                    BinOp::Pow => {
                        let rounded = b.round();
                        if (b - rounded).abs() > 1e-9 || rounded.abs() > i32::MAX as f64 {
                            Err(Error::Eval {
                                offset: self.pos,
                                message: format!("exponent {b} is not an integer"),
                            })
                        } else if a == 0.0 && rounded < 0.0 {
                            Err(Error::Eval {
                                offset: self.pos,
                                message: "zero raised to a negative power".into(),
                            })
                        } else {
                            Ok(a.powi(rounded as i32))
                        }
                    }
                }
            }
            Node::Call(func, arg) => {
                let v = arg.eval_inner(point)?;
                match func {
                    Func::Sin => Ok(v.sin()),
                    Func::Cos => Ok(v.cos()),
                    Func::Tan => Ok(v.tan()),
                    Func::Sinh => Ok(v.sinh()),
                    Func::Cosh => Ok(v.cosh()),
                    Func::Tanh => Ok(v.tanh()),
                    Func::Exp => Ok(v.exp()),
                    Func::Sqrt => {
                        if v < 0.0 {
                            Err(Error::Eval {
                                offset: self.pos,
                                message: format!("sqrt of negative value {v}"),
                            })
                        } else {
                            Ok(v.sqrt())
                        }
                    }
                    Func::Log => {
                        if v <= 0.0 {
                            Err(Error::Eval {
                                offset: self.pos,
                                message: format!("log of non-positive value {v}"),
                            })
                        } else {
                            Ok(v.ln())
                        }
                    }
                    Func::Abs => Ok(v.abs()),
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized rendering; `parse(print(e))` evaluates identically.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Num(v) => {
                if *v < 0.0 {
                    write!(f, "({v})")
                } else {
                    write!(f, "{v}")
                }
            }
            Node::Pi => write!(f, "pi"),
            Node::E => write!(f, "e"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Neg(inner) => write!(f, "(-{inner})"),
            Node::Bin(op, lhs, rhs) => write!(f, "({lhs}{}{rhs})", op.symbol()),
            Node::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

/// A complex-valued expression as an explicit (re, im) pair.
#[derive(Debug, Clone)]
pub struct ComplexExpr {
    pub re: Arc<Expr>,
    pub im: Arc<Expr>,
}

impl ComplexExpr {
    pub fn new(re: Expr, im: Expr) -> Self {
        ComplexExpr {
            re: Arc::new(re),
            im: Arc::new(im),
        }
    }

    pub fn parse(re_src: &str, im_src: &str, dim: usize) -> Result<Self> {
        Ok(ComplexExpr::new(parse(re_src, dim)?, parse(im_src, dim)?))
    }

    pub fn real(src: &str, dim: usize) -> Result<Self> {
        Ok(ComplexExpr::new(parse(src, dim)?, parse("0", dim)?))
    }

    pub fn eval(&self, point: &[f64]) -> Result<Complex64> {
        Ok(Complex64::new(self.re.eval(point)?, self.im.eval(point)?))
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
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

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "{v}"),
            Token::Ident(s) => write!(f, "{s}"),
            Token::Plus => write!(f, "+"),
            Token::Minus => write!(f, "-"),
            Token::Star => write!(f, "*"),
            Token::Slash => write!(f, "/"),
            Token::Caret => write!(f, "^"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
            Token::End => write!(f, "end of input"),
        }
    }
}

fn lex(source: &str) -> Result<Vec<(Token, usize)>> {
    let chars: Vec<char> = source.chars().collect();
    if chars.iter().all(|c| c.is_whitespace()) {
        return Err(Error::Parse {
            offset: 1,
            message: "empty expression".into(),
        });
    }
    let mut tokens = Vec::new();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1; // 1-based
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '+' => {
                tokens.push((Token::Plus, pos));
                i += 1;
            }
            '-' | '\u{2212}' => {
                tokens.push((Token::Minus, pos));
                i += 1;
            }
            '*' | '\u{00d7}' => {
                tokens.push((Token::Star, pos));
                i += 1;
            }
            '/' | '\u{00f7}' => {
                tokens.push((Token::Slash, pos));
                i += 1;
            }
            '^' => {
                tokens.push((Token::Caret, pos));
                i += 1;
            }
            '(' => {
                tokens.push((Token::LParen, pos));
                i += 1;
            }
            ')' => {
                tokens.push((Token::RParen, pos));
                i += 1;
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent part, e.g. 1.5e-3
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value = text.parse::<f64>().map_err(|_| Error::Parse {
                    offset: pos,
                    message: format!("malformed number `{text}`"),
                })?;
                tokens.push((Token::Num(value), pos));
            }
            _ if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                tokens.push((Token::Ident(text), pos));
            }
            _ => {
                return Err(Error::Parse {
                    offset: pos,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    tokens.push((Token::End, chars.len() + 1));
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    tokens: Vec<(Token, usize)>,
    cursor: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.cursor].0
    }

    fn peek_pos(&self) -> usize {
        self.tokens[self.cursor].1
    }

    fn bump(&mut self) -> (Token, usize) {
        let item = self.tokens[self.cursor].clone();
        if self.cursor + 1 < self.tokens.len() {
            self.cursor += 1;
        }
        item
    }

    fn parse_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => break,
            };
            let (_, pos) = self.bump();
            let rhs = self.parse_term()?;
            lhs = Expr {
                node: Node::Bin(op, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_factor()?;
        loop {
            let op = match self.peek() {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => break,
            };
            let (_, pos) = self.bump();
            let rhs = self.parse_factor()?;
            lhs = Expr {
                node: Node::Bin(op, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        Ok(lhs)
    }

    fn parse_factor(&mut self) -> Result<Expr> {
        let base = self.parse_unary()?;
        if matches!(self.peek(), Token::Caret) {
            let (_, pos) = self.bump();
            // right-associative: 2^3^2 = 2^(3^2)
            let exponent = self.parse_factor()?;
            return Ok(Expr {
                node: Node::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)),
                pos,
            });
        }
        Ok(base)
    }

    fn parse_unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Token::Minus) {
            let (_, pos) = self.bump();
            // exponentiation binds tighter: -2^2 = -(2^2)
            let inner = self.parse_factor()?;
            return Ok(Expr {
                node: Node::Neg(Box::new(inner)),
                pos,
            });
        }
        self.parse_atom()
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        let (token, pos) = self.bump();
        match token {
            Token::Num(v) => Ok(Expr {
                node: Node::Num(v),
                pos,
            }),
            Token::LParen => {
                let inner = self.parse_expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => self.parse_ident(&name, pos),
            other => Err(Error::Parse {
                offset: pos,
                message: format!("expected an expression, found `{other}`"),
            }),
        }
    }

    fn parse_ident(&mut self, name: &str, pos: usize) -> Result<Expr> {
        match name {
            "pi" => return Ok(Expr { node: Node::Pi, pos }),
            "e" => return Ok(Expr { node: Node::E, pos }),
            _ => {}
        }
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(index) = rest.parse::<usize>() {
                if index == 0 || index > 4 {
                    return Err(Error::Parse {
                        offset: pos,
                        message: format!("unknown identifier `{name}`"),
                    });
                }
                if index > self.dim {
                    return Err(Error::Parse {
                        offset: pos,
                        message: format!(
                            "variable x{index} exceeds chart dimension {}",
                            self.dim
                        ),
                    });
                }
                return Ok(Expr {
                    node: Node::Var(index - 1),
                    pos,
                });
            }
        }
        if let Some(func) = Func::from_name(name) {
            if !matches!(self.peek(), Token::LParen) {
                return Err(Error::Parse {
                    offset: self.peek_pos(),
                    message: format!("function `{name}` expects one parenthesized argument"),
                });
            }
            self.bump(); // (
            let arg = self.parse_expr()?;
            self.expect_rparen()?;
            return Ok(Expr {
                node: Node::Call(func, Box::new(arg)),
                pos,
            });
        }
        Err(Error::Parse {
            offset: pos,
            message: format!("unknown identifier `{name}`"),
        })
    }

    fn expect_rparen(&mut self) -> Result<()> {
        let (token, pos) = self.bump();
        if token == Token::RParen {
            Ok(())
        } else {
            Err(Error::Parse {
                offset: pos,
                message: format!("expected `)`, found `{token}`"),
            })
        }
    }
}
