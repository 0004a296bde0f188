// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Unit-aware symbolic expressions.
//!
//! Expressions stay symbolic until they are evaluated against a [`Scope`],
//! which supplies calibration constants (usually a frozen
//! [`CalibrationSnapshot`](crate::caldb::CalibrationSnapshot)) and named
//! calculations. Numeric values are doubles in SI base units.

mod eval;
mod simplify;
pub mod units;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;

pub use eval::{evaluate, evaluate_quantity, infer_type, EvalError, ValueType};
pub use simplify::simplify;
pub use units::{Dims, NonFinite, Quantity, Unit, UnknownUnit, TICK_SECONDS};

pub use crate::caldb::DateSelector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "==",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    fn apply(self, a: f64, b: f64) -> bool {
        match self {
            CompareOp::Eq => a == b,
            CompareOp::Ne => a != b,
            CompareOp::Lt => a < b,
            CompareOp::Le => a <= b,
            CompareOp::Gt => a > b,
            CompareOp::Ge => a >= b,
        }
    }
}

/// A literal number with the unit it was written in.
#[derive(Debug, Clone, PartialEq)]
pub struct Literal {
    pub value: f64,
    pub unit: Unit,
}

impl Literal {
    pub fn quantity(&self) -> Result<Quantity, NonFinite> {
        Quantity::from_unit(self.value, &self.unit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Literal(Literal),
    Bool(bool),
    /// Calibration database reference.
    Constant { name: String, date: DateSelector },
    /// Reference to a named calculation (an expression macro).
    Calculation(String),
    /// Formal input of an enclosing function or gate definition; replaced by
    /// the call argument during expansion.
    Input(String),
    Neg(Box<Expression>),
    Binary { op: BinaryOp, lhs: Box<Expression>, rhs: Box<Expression> },
    Compare { op: CompareOp, lhs: Box<Expression>, rhs: Box<Expression> },
    And(Vec<Expression>),
    Or(Vec<Expression>),
    Not(Box<Expression>),
}

impl Expression {
    /// Literal in the given unit. Panics on an unknown unit symbol; use
    /// [`Unit::parse`] for untrusted input.
    pub fn literal(value: f64, unit: &str) -> Expression {
        let unit = Unit::parse(unit).unwrap_or_else(|e| panic!("{e}"));
        Expression::Literal(Literal { value, unit })
    }

    pub fn literal_in(value: f64, unit: Unit) -> Expression {
        Expression::Literal(Literal { value, unit })
    }

    pub fn number(value: f64) -> Expression {
        Expression::literal_in(value, Unit::dimensionless())
    }

    pub fn constant(name: impl Into<String>) -> Expression {
        Expression::Constant { name: name.into(), date: DateSelector::MostRecent }
    }

    pub fn calculation(name: impl Into<String>) -> Expression {
        Expression::Calculation(name.into())
    }

    pub fn input(name: impl Into<String>) -> Expression {
        Expression::Input(name.into())
    }

    pub fn binary(op: BinaryOp, lhs: Expression, rhs: Expression) -> Expression {
        Expression::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn compare(op: CompareOp, lhs: Expression, rhs: Expression) -> Expression {
        Expression::Compare { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn pow(self, exponent: i32) -> Expression {
        Expression::binary(BinaryOp::Pow, self, Expression::number(exponent as f64))
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Expression::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Expression::Literal(_) | Expression::Bool(_))
    }

    /// Children in evaluation order.
    pub fn children(&self) -> Vec<&Expression> {
        match self {
            Expression::Literal(_)
            | Expression::Bool(_)
            | Expression::Constant { .. }
            | Expression::Calculation(_)
            | Expression::Input(_) => Vec::new(),
            Expression::Neg(c) | Expression::Not(c) => vec![c],
            Expression::Binary { lhs, rhs, .. } | Expression::Compare { lhs, rhs, .. } => vec![lhs, rhs],
            Expression::And(cs) | Expression::Or(cs) => cs.iter().collect(),
        }
    }

    /// Pre-order walk.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expression)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Replaces every `Input` node for which `lookup` yields an expression.
    pub fn substitute(&self, lookup: &impl Fn(&str) -> Option<Expression>) -> Expression {
        self.map(&mut |e| match e {
            Expression::Input(name) => lookup(name),
            _ => None,
        })
    }

    /// Bottom-up rewrite: `f` may replace a node (children are not revisited).
    pub fn map(&self, f: &mut impl FnMut(&Expression) -> Option<Expression>) -> Expression {
        if let Some(replacement) = f(self) {
            return replacement;
        }
        match self {
            Expression::Literal(_)
            | Expression::Bool(_)
            | Expression::Constant { .. }
            | Expression::Calculation(_)
            | Expression::Input(_) => self.clone(),
            Expression::Neg(c) => Expression::Neg(Box::new(c.map(f))),
            Expression::Not(c) => Expression::Not(Box::new(c.map(f))),
            Expression::Binary { op, lhs, rhs } => Expression::binary(*op, lhs.map(f), rhs.map(f)),
            Expression::Compare { op, lhs, rhs } => Expression::compare(*op, lhs.map(f), rhs.map(f)),
            Expression::And(cs) => Expression::And(cs.iter().map(|c| c.map(f)).collect()),
            Expression::Or(cs) => Expression::Or(cs.iter().map(|c| c.map(f)).collect()),
        }
    }

    pub fn inputs(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expression::Input(n) = e {
                out.insert(n.clone());
            }
        });
        out
    }

    pub fn calculations(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expression::Calculation(n) = e {
                out.insert(n.clone());
            }
        });
        out
    }
}

/// Names of every `NamedConstant` and `NamedCalculation` in the tree.
pub fn free_names(expr: &Expression) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    expr.walk(&mut |e| match e {
        Expression::Constant { name, .. } | Expression::Calculation(name) => {
            out.insert(name.clone());
        }
        _ => {}
    });
    out
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Literal(l) if l.unit.symbol().is_empty() => write!(f, "{}", l.value),
            Expression::Literal(l) => write!(f, "{} {}", l.value, l.unit),
            Expression::Bool(b) => write!(f, "{b}"),
            Expression::Constant { name, date: DateSelector::MostRecent } => f.write_str(name),
            Expression::Constant { name, date } => write!(f, "{name}@{date}"),
            Expression::Calculation(n) => write!(f, "calc:{n}"),
            Expression::Input(n) => write!(f, "${n}"),
            Expression::Neg(c) => write!(f, "-({c})"),
            Expression::Not(c) => write!(f, "not ({c})"),
            Expression::Binary { op, lhs, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
            Expression::Compare { op, lhs, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
            Expression::And(cs) | Expression::Or(cs) => {
                let sep = if matches!(self, Expression::And(_)) { " and " } else { " or " };
                let parts: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
                write!(f, "({})", parts.join(sep))
            }
        }
    }
}

macro_rules! impl_arith {
    ($trait:ident, $method:ident, $op:expr) => {
        impl ops::$trait for Expression {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                Expression::binary($op, self, rhs)
            }
        }
        impl ops::$trait<f64> for Expression {
            type Output = Expression;
            fn $method(self, rhs: f64) -> Expression {
                Expression::binary($op, self, Expression::number(rhs))
            }
        }
        impl ops::$trait<Expression> for f64 {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                Expression::binary($op, Expression::number(self), rhs)
            }
        }
    };
}

impl_arith!(Add, add, BinaryOp::Add);
impl_arith!(Sub, sub, BinaryOp::Sub);
impl_arith!(Mul, mul, BinaryOp::Mul);
impl_arith!(Div, div, BinaryOp::Div);

impl ops::Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::Neg(Box::new(self))
    }
}

/// Source of constants and calculations for evaluation.
pub trait Scope {
    fn constant(&self, name: &str, date: &DateSelector) -> Option<Quantity>;

    fn calculation(&self, _name: &str) -> Option<&Expression> {
        None
    }
}

/// Resolves nothing; literal-only expressions evaluate under it.
#[derive(Debug, Default, Clone, Copy)]
pub struct EmptyScope;

impl Scope for EmptyScope {
    fn constant(&self, _: &str, _: &DateSelector) -> Option<Quantity> {
        None
    }
}

impl Scope for BTreeMap<String, Quantity> {
    fn constant(&self, name: &str, _: &DateSelector) -> Option<Quantity> {
        self.get(name).copied()
    }
}

/// A constant source extended with named calculation definitions.
pub struct WithCalculations<'a, S: ?Sized> {
    pub base: &'a S,
    pub calculations: &'a BTreeMap<String, Expression>,
}

impl<'a, S: Scope + ?Sized> WithCalculations<'a, S> {
    pub fn new(base: &'a S, calculations: &'a BTreeMap<String, Expression>) -> Self {
        WithCalculations { base, calculations }
    }
}

impl<S: Scope + ?Sized> Scope for WithCalculations<'_, S> {
    fn constant(&self, name: &str, date: &DateSelector) -> Option<Quantity> {
        self.base.constant(name, date)
    }

    fn calculation(&self, name: &str) -> Option<&Expression> {
        self.calculations.get(name).or_else(|| self.base.calculation(name))
    }
}

/// Result of evaluating an expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Quantity(Quantity),
    Bool(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Quantity(q) => write!(f, "{q}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;

    fn pi_time() -> Expression {
        3.14159 / Expression::constant("DefaultMicrowaveRabiRate")
    }

    #[test]
    fn free_names_of_pi_time() {
        let names = free_names(&pi_time());
        assert_eq!(names.into_iter().collect::<Vec<_>>(), ["DefaultMicrowaveRabiRate"]);
        assert!(free_names(&Expression::literal(3.0, "ns")).is_empty());
    }

    #[test]
    fn free_names_of_interpolation_slope() {
        let a1 = Expression::constant("DefaultRamanIndividualDDSAmplitude");
        let a2 = a1.clone() - Expression::literal(50.0, "mV");
        let t_sweep = Expression::literal(10.0, "us");
        let p1 = (a2 - a1) / (t_sweep * Expression::constant("DDSSampleClockFrequency"));
        let names: Vec<_> = free_names(&p1).into_iter().collect();
        assert_eq!(names, ["DDSSampleClockFrequency", "DefaultRamanIndividualDDSAmplitude"]);
    }

    #[test]
    fn substitute_inputs() {
        let body = Expression::input("duration") * 2.0;
        let out = body.substitute(&|n| (n == "duration").then(|| Expression::literal(3.0, "ms")));
        assert_eq!(out, Expression::literal(3.0, "ms") * 2.0);
        assert!(out.inputs().is_empty());
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(pi_time().to_string(), "(3.14159 / DefaultMicrowaveRabiRate)");
    }
}
