//! Arithmetic model expressions such as `x1 + x2 + x1*x2`.
//!
//! Variables are written 1-based (`x1` … `xd`) and stored 0-based.

mod parser;
mod poly;

use std::fmt;

use thiserror::Error;

pub use parser::{parse, ParseError, ParseErrorKind};
pub use poly::{monomials, NotPolynomial, Polynomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Var(usize),
    Num(f64),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, u32),
}

impl Node {
    pub fn var(i: usize) -> Node {
        Node::Var(i)
    }

    pub fn bin(op: BinOp, a: Node, b: Node) -> Node {
        Node::Bin(op, Box::new(a), Box::new(b))
    }
}

/// A parsed expression over `d` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    d: usize,
    root: Node,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("expected a point with {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite intermediate value")]
    NonFinite,
}

impl Expr {
    pub fn new(d: usize, root: Node) -> Self {
        Expr { d, root }
    }

    pub fn players(&self) -> usize {
        self.d
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        eval(self, point)
    }
}

/// Evaluates `e` at `point`; fails on division by zero or overflow.
pub fn eval(e: &Expr, point: &[f64]) -> Result<f64, EvalError> {
    if point.len() != e.d {
        return Err(EvalError::Dimension { expected: e.d, got: point.len() });
    }
    eval_node(&e.root, point)
}

fn eval_node(n: &Node, x: &[f64]) -> Result<f64, EvalError> {
    let out = match n {
        Node::Var(i) => x[*i],
        Node::Num(c) => *c,
        Node::Neg(a) => -eval_node(a, x)?,
        Node::Pow(a, k) => eval_node(a, x)?.powi(*k as i32),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval_node(a, x)?, eval_node(b, x)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div if b == 0.0 => return Err(EvalError::DivisionByZero),
                BinOp::Div => a / b,
            }
        }
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(EvalError::NonFinite)
    }
}

/// Fully parenthesized form that parses back to the same value.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(&self.root, f)
    }
}

fn write_node(n: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match n {
        Node::Var(i) => write!(f, "x{}", i + 1),
        Node::Num(c) if *c < 0.0 => write!(f, "(-{:?})", -c),
        Node::Num(c) => write!(f, "{c:?}"),
        Node::Neg(a) => {
            f.write_str("(-")?;
            write_node(a, f)?;
            f.write_str(")")
        }
        Node::Pow(a, k) => {
            f.write_str("(")?;
            write_node(a, f)?;
            write!(f, "^{k})")
        }
        Node::Bin(op, a, b) => {
            f.write_str("(")?;
            write_node(a, f)?;
            write!(f, " {} ", op.symbol())?;
            write_node(b, f)?;
            f.write_str(")")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_model() {
        let e = parse("x1 + x2 + x1*x2", 2).unwrap();
        assert_eq!(e.eval(&[1.0, 2.0]).unwrap(), 5.0);
    }

    #[test]
    fn zero_point_gives_constant_term() {
        let e = parse("3 + x1*x2 - 2*x2^2", 2).unwrap();
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), 3.0);
    }

    #[test]
    fn division_by_zero() {
        let e = parse("x1/x2", 2).unwrap();
        assert_eq!(e.eval(&[1.0, 0.0]), Err(EvalError::DivisionByZero));
        assert_eq!(e.eval(&[1.0]), Err(EvalError::Dimension { expected: 2, got: 1 }));
    }

    #[test]
    fn overflow_is_an_error() {
        let e = parse("x1^400", 1).unwrap();
        assert_eq!(e.eval(&[10.0]), Err(EvalError::NonFinite));
    }

    #[test]
    fn printer_is_fully_parenthesized() {
        let e = parse("-x1^2 + 0.5*x2 - 3/x1", 2).unwrap();
        assert_eq!(e.to_string(), "(((-(x1^2)) + (0.5 * x2)) - (3.0 / x1))");
        let back = parse(&e.to_string(), 2).unwrap();
        assert_eq!(back, e);
        let neg = Expr::new(1, Node::bin(BinOp::Mul, Node::Num(-2.5), Node::var(0)));
        assert_eq!(neg.to_string(), "((-2.5) * x1)");
        assert_eq!(parse(&neg.to_string(), 1).unwrap().eval(&[2.0]).unwrap(), -5.0);
    }
}
