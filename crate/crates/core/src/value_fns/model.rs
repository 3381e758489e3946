use crate::error::{Error, Result};
use crate::expr::{monomials, parse, Expr, Polynomial};

/// A prediction function over `d` real features.
///
/// Implementations are shared across threads during game construction; a
/// model that must not be called concurrently reports `serial() == true`.
pub trait Model: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Result<f64>;

    /// Expanded polynomial form, when the model is known to be a polynomial.
    fn polynomial(&self) -> Option<&Polynomial> {
        None
    }

    fn serial(&self) -> bool {
        false
    }
}

/// A model written as an arithmetic expression.
#[derive(Clone, Debug)]
pub struct ExprModel {
    expr: Expr,
    poly: Option<Polynomial>,
}

impl ExprModel {
    pub fn new(expr: Expr) -> Self {
        let poly = monomials(&expr).ok();
        ExprModel { expr, poly }
    }

    pub fn parse(src: &str, d: usize) -> std::result::Result<Self, crate::expr::ParseError> {
        Ok(ExprModel::new(parse(src, d)?))
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl Model for ExprModel {
    fn dim(&self) -> usize {
        self.expr.players()
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.expr.eval(x).map_err(|e| Error::Model(format!("{e} at {x:?}")))
    }

    fn polynomial(&self) -> Option<&Polynomial> {
        self.poly.as_ref()
    }
}

/// A model backed by a Rust closure.
pub struct FnModel<F> {
    d: usize,
    f: F,
    poly: Option<Polynomial>,
    serial: bool,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnModel<F> {
    pub fn new(d: usize, f: F) -> Self {
        FnModel { d, f, poly: None, serial: false }
    }

    /// Declares the closure equal to `poly`, enabling closed-form paths.
    pub fn with_polynomial(mut self, poly: Polynomial) -> Self {
        assert_eq!(poly.players(), self.d);
        self.poly = Some(poly);
        self
    }

    pub fn serial(mut self) -> Self {
        self.serial = true;
        self
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Model for FnModel<F> {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        let y = (self.f)(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Model(format!("non-finite output {y} at {x:?}")))
        }
    }

    fn polynomial(&self) -> Option<&Polynomial> {
        self.poly.as_ref()
    }

    fn serial(&self) -> bool {
        self.serial
    }
}

/// Rows of background samples, each of the model's dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    rows: Vec<Vec<f64>>,
    columns: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(d) = rows.first().map(Vec::len) else {
            return Err(Error::Dataset("no rows".into()));
        };
        if d == 0 {
            return Err(Error::Dataset("rows have no columns".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Dataset(format!("row {} has {} columns, expected {d}", i + 1, row.len())));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Dataset(format!("row {} contains non-finite value {v}", i + 1)));
            }
        }
        Ok(Dataset { rows, columns: None })
    }

    pub fn with_columns(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim() {
            return Err(Error::Dataset(format!("{} column names for {} columns", names.len(), self.dim())));
        }
        self.columns = Some(names);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn columns(&self) -> Option<&[String]> {
        self.columns.as_deref()
    }
}
