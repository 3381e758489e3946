//! Pratt parser for model expressions.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary `-`, `^`. Binary operators
//! associate to the left except `^`, which associates to the right and takes a
//! constant non-negative integer exponent.

use std::fmt;

use thiserror::Error;

use super::{BinOp, Expr, Node};

const MAX_DEPTH: usize = 200;
const MAX_EXPONENT: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    BadNumber(String),
    VariableOutOfRange { index: u64, d: usize },
    BadExponent(String),
    TooDeep,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected {t}"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::BadNumber(s) => write!(f, "invalid number {s:?}"),
            ParseErrorKind::VariableOutOfRange { index, d } => {
                write!(f, "variable x{index} out of range (expected x1..x{d})")
            }
            ParseErrorKind::BadExponent(why) => write!(f, "exponent must be a non-negative integer constant: {why}"),
            ParseErrorKind::TooDeep => write!(f, "expression nested deeper than {MAX_DEPTH} levels"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Var(u64),
    Op(char),
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(x) => write!(f, "number {x}"),
            Tok::Var(i) => write!(f, "variable x{i}"),
            Tok::Op(c) => write!(f, "operator '{c}'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn err(offset: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { offset, kind }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((Tok::Op(b as char), start));
                i += 1;
            }
            b'(' => {
                out.push((Tok::LParen, start));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, start));
                i += 1;
            }
            b'x' => {
                i += 1;
                let digits = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i == digits {
                    return Err(err(start, ParseErrorKind::UnexpectedChar('x')));
                }
                let index = src[digits..i].parse::<u64>().unwrap_or(u64::MAX);
                out.push((Tok::Var(index), start));
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                match text.parse::<f64>() {
                    Ok(v) if v.is_finite() => out.push((Tok::Num(v), start)),
                    _ => return Err(err(start, ParseErrorKind::BadNumber(text.to_string()))),
                }
            }
            _ => {
                let c = src[start..].chars().next().unwrap_or('\u{fffd}');
                return Err(err(start, ParseErrorKind::UnexpectedChar(c)));
            }
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    d: usize,
    depth: usize,
}

/// Binding powers `(left, right)` of infix operators.
fn infix_power(op: char) -> Option<(u8, u8)> {
    match op {
        '+' | '-' => Some((1, 2)),
        '*' | '/' => Some((3, 4)),
        '^' => Some((8, 7)),
        _ => None,
    }
}

const PREFIX_MINUS: u8 = 5;

impl Parser {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, tok: &Tok, at: usize) -> ParseError {
        match tok {
            Tok::End => err(at, ParseErrorKind::UnexpectedEnd),
            other => err(at, ParseErrorKind::UnexpectedToken(other.to_string())),
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Node, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(err(self.peek().1, ParseErrorKind::TooDeep));
        }
        let (tok, at) = self.next();
        let mut lhs = match tok {
            Tok::Num(v) => Node::Num(v),
            Tok::Var(i) => {
                if i == 0 || i > self.d as u64 {
                    return Err(err(at, ParseErrorKind::VariableOutOfRange { index: i, d: self.d }));
                }
                Node::Var(i as usize - 1)
            }
            Tok::Op('-') => Node::Neg(Box::new(self.expr(PREFIX_MINUS)?)),
            Tok::LParen => {
                let inner = self.expr(0)?;
                match self.next() {
                    (Tok::RParen, _) => inner,
                    (t, at) => return Err(self.unexpected(&t, at)),
                }
            }
            t => return Err(self.unexpected(&t, at)),
        };

        loop {
            let (tok, at) = self.peek().clone();
            let op = match tok {
                Tok::Op(c) => c,
                Tok::RParen | Tok::End => break,
                t => return Err(self.unexpected(&t, at)),
            };
            let (l_bp, r_bp) = infix_power(op).expect("lexer emits only known operators");
            if l_bp < min_bp {
                break;
            }
            self.next();
            if op == '^' {
                let exp_at = self.peek().1;
                let exponent = self.expr(r_bp)?;
                lhs = Node::Pow(Box::new(lhs), constant_exponent(&exponent).map_err(|why| err(exp_at, ParseErrorKind::BadExponent(why)))?);
                continue;
            }
            let rhs = self.expr(r_bp)?;
            let op = match op {
                '+' => BinOp::Add,
                '-' => BinOp::Sub,
                '*' => BinOp::Mul,
                _ => BinOp::Div,
            };
            lhs = Node::bin(op, lhs, rhs);
        }
        self.depth -= 1;
        Ok(lhs)
    }
}

fn constant_exponent(n: &Node) -> Result<u32, String> {
    let v = fold_constant(n).ok_or_else(|| "exponent depends on a variable or divides by zero".to_string())?;
    if v < 0.0 || v.fract() != 0.0 || v > MAX_EXPONENT as f64 {
        return Err(format!("got {v}, allowed 0..={MAX_EXPONENT}"));
    }
    Ok(v as u32)
}

fn fold_constant(n: &Node) -> Option<f64> {
    let v = match n {
        Node::Var(_) => return None,
        Node::Num(c) => *c,
        Node::Neg(a) => -fold_constant(a)?,
        Node::Pow(a, k) => fold_constant(a)?.powi(*k as i32),
        Node::Bin(op, a, b) => {
            let (a, b) = (fold_constant(a)?, fold_constant(b)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div if b == 0.0 => return None,
                BinOp::Div => a / b,
            }
        }
    };
    v.is_finite().then_some(v)
}

/// Parses `src` as an expression over the variables `x1..xd`.
pub fn parse(src: &str, d: usize) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, d, depth: 0 };
    let root = p.expr(0)?;
    match p.peek().clone() {
        (Tok::End, _) => Ok(Expr::new(d, root)),
        (t, at) => Err(p.unexpected(&t, at)),
    }
}
