//! Arithmetic expressions for vector-field components.
//!
//! Grammar, lowest to highest precedence:
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?        right-associative
//! primary := number | variable | func "(" expr ")" | "(" expr ")"
//! ```
//!
//! so `-x^2` is `-(x^2)` and `2^3^2` is `2^(3^2)`. Variables are `x`, `y`,
//! `z` (components 1 to 3) or `x1` .. `xn`.

mod lexer;

use std::fmt;

use thiserror::Error;

use lexer::{Spanned, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("variable `{name}` at position {position} refers to component {index} but the system has dimension {dim}")]
    Arity {
        name: String,
        position: usize,
        index: usize,
        dim: usize,
    },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. }
            | ParseError::UnknownIdentifier { position, .. }
            | ParseError::Arity { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("expression evaluated to a non-finite value ({value})")]
pub struct NumericError {
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
    Abs,
    Sqrt,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Tanh => v.tanh(),
            Func::Abs => v.abs(),
            Func::Sqrt => v.sqrt(),
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

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based component index.
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) | Expr::Call(_, e) => e.max_var(),
            Expr::Bin(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => p[*i],
            Expr::Neg(e) => -e.eval(p),
            Expr::Call(f, e) => f.apply(e.eval(p)),
            Expr::Bin(op, a, b) => {
                let l = a.eval(p);
                match op {
                    BinOp::Add => l + b.eval(p),
                    BinOp::Sub => l - b.eval(p),
                    BinOp::Mul => l * b.eval(p),
                    BinOp::Div => l / b.eval(p),
                    BinOp::Pow => match **b {
                        Expr::Num(n) if n.fract() == 0.0 && n.abs() <= i32::MAX as f64 => l.powi(n as i32),
                        _ => l.powf(b.eval(p)),
                    },
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_child(f, e, e.precedence() < 3)
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Bin(op, a, b) => {
                let p = self.precedence();
                let sym = match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => " * ",
                    BinOp::Div => " / ",
                    BinOp::Pow => "^",
                };
                if *op == BinOp::Pow {
                    // the base is a primary; the exponent is a unary
                    write_child(f, a, a.precedence() <= p)?;
                    f.write_str(sym)?;
                    write_child(f, b, b.precedence() < 3)
                } else {
                    write_child(f, a, a.precedence() < p)?;
                    f.write_str(sym)?;
                    write_child(f, b, b.precedence() <= p)
                }
            }
        }
    }
}

/// A parsed vector-field component.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExpr {
    ast: Expr,
    arity: usize,
}

impl FieldExpr {
    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    /// One past the highest variable index referenced.
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Evaluates without the finiteness check; used on integrator hot paths.
    #[inline]
    pub fn eval_unchecked(&self, p: &[f64]) -> f64 {
        self.ast.eval(p)
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

pub fn parse_field(text: &str, dim: usize) -> Result<FieldExpr, ParseError> {
    let toks = lexer::tokenize(text)?;
    let mut p = Parser { toks, at: 0, dim };
    let ast = p.expr()?;
    let next = p.peek();
    if next.tok != Tok::Eof {
        return Err(ParseError::Syntax {
            position: next.pos,
            expected: format!("an operator or end of input, found {}", next.tok.describe()),
        });
    }
    let arity = ast.max_var().map_or(0, |m| m + 1);
    Ok(FieldExpr { ast, arity })
}

pub fn eval_field(e: &FieldExpr, p: &[f64]) -> Result<f64, NumericError> {
    assert!(
        p.len() >= e.arity,
        "point has {} components, expression needs {}",
        p.len(),
        e.arity
    );
    let v = e.ast.eval(p);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumericError { value: v })
    }
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.at].clone();
        if t.tok != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        let t = self.peek();
        if t.tok == tok {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax {
                position: t.pos,
                expected: format!("{}, found {}", tok.describe(), t.tok.describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::lookup(&name) {
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                let index = variable_index(&name).ok_or_else(|| ParseError::UnknownIdentifier {
                    name: name.clone(),
                    position: t.pos,
                })?;
                if index >= self.dim {
                    return Err(ParseError::Arity {
                        name,
                        position: t.pos,
                        index: index + 1,
                        dim: self.dim,
                    });
                }
                Ok(Expr::Var(index))
            }
            other => Err(ParseError::Syntax {
                position: t.pos,
                expected: format!("an operand, found {}", other.describe()),
            }),
        }
    }
}

fn variable_index(name: &str) -> Option<usize> {
    match name {
        "x" => return Some(0),
        "y" => return Some(1),
        "z" => return Some(2),
        _ => {}
    }
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse::<usize>().ok().map(|k| k - 1)
}
