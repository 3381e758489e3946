use std::collections::BTreeMap;
use std::fmt;

use super::{BinOp, Expr, Node};

/// Cap on the number of terms produced while expanding a product.
const MAX_TERMS: usize = 100_000;

/// Why an expression has no polynomial normal form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NotPolynomial {
    /// Division by an expression that depends on a variable (or by zero).
    NonConstantDivision,
    /// Expansion would exceed the term budget.
    TooLarge,
}

impl fmt::Display for NotPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotPolynomial::NonConstantDivision => f.write_str("expression divides by a non-constant"),
            NotPolynomial::TooLarge => f.write_str("polynomial expansion too large"),
        }
    }
}

/// Expanded polynomial: exponent vector → coefficient, like terms merged and
/// zero coefficients dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    d: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn constant(d: usize, c: f64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(vec![0; d], c);
        }
        Polynomial { d, terms }
    }

    pub fn variable(d: usize, i: usize) -> Self {
        let mut e = vec![0; d];
        e[i] = 1;
        Polynomial { d, terms: BTreeMap::from([(e, 1.0)]) }
    }

    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = (f64, Vec<u32>)>) -> Self {
        let mut p = Polynomial { d, terms: BTreeMap::new() };
        for (c, e) in terms {
            assert_eq!(e.len(), d, "exponent vector length");
            *p.terms.entry(e).or_insert(0.0) += c;
        }
        p.prune();
        p
    }

    pub fn players(&self) -> usize {
        self.d
    }

    /// `(coefficient, exponents)` pairs in lexicographic exponent order.
    pub fn terms(&self) -> Vec<(f64, Vec<u32>)> {
        self.terms.iter().map(|(e, &c)| (c, e.clone())).collect()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> f64 {
        self.terms.get(exponents).copied().unwrap_or(0.0)
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => self.terms.get(&vec![0; self.d]).copied(),
            _ => None,
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| *c != 0.0);
    }

    fn add(mut self, other: &Polynomial, sign: f64) -> Polynomial {
        for (e, c) in &other.terms {
            *self.terms.entry(e.clone()).or_insert(0.0) += sign * c;
        }
        self.prune();
        self
    }

    fn scale(mut self, s: f64) -> Polynomial {
        self.terms.values_mut().for_each(|c| *c *= s);
        self.prune();
        self
    }

    fn mul(&self, other: &Polynomial) -> Result<Polynomial, NotPolynomial> {
        if self.terms.len().saturating_mul(other.terms.len()) > MAX_TERMS * 10 {
            return Err(NotPolynomial::TooLarge);
        }
        let mut out = Polynomial { d: self.d, terms: BTreeMap::new() };
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *out.terms.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        out.prune();
        if out.terms.len() > MAX_TERMS {
            return Err(NotPolynomial::TooLarge);
        }
        Ok(out)
    }
}

/// Expands `e` into monomials.
pub fn monomials(e: &Expr) -> Result<Polynomial, NotPolynomial> {
    expand(e.root(), e.players())
}

fn expand(n: &Node, d: usize) -> Result<Polynomial, NotPolynomial> {
    Ok(match n {
        Node::Var(i) => Polynomial::variable(d, *i),
        Node::Num(c) => Polynomial::constant(d, *c),
        Node::Neg(a) => expand(a, d)?.scale(-1.0),
        Node::Pow(a, k) => {
            let base = expand(a, d)?;
            let mut acc = Polynomial::constant(d, 1.0);
            for _ in 0..*k {
                acc = acc.mul(&base)?;
            }
            acc
        }
        Node::Bin(op, a, b) => {
            let (pa, pb) = (expand(a, d)?, expand(b, d)?);
            match op {
                BinOp::Add => pa.add(&pb, 1.0),
                BinOp::Sub => pa.add(&pb, -1.0),
                BinOp::Mul => pa.mul(&pb)?,
                BinOp::Div => match pb.as_constant() {
                    Some(c) if c != 0.0 => pa.scale(1.0 / c),
                    _ => return Err(NotPolynomial::NonConstantDivision),
                },
            }
        }
    })
}
