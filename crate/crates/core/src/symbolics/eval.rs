// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use super::{BinaryOp, Dims, Expression, Quantity, Scope, Value};

/// Bound on nested calculation references; deeper chains are treated as cycles.
const MAX_CALCULATION_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unresolved name `{0}`")]
    UnresolvedName(String),
    #[error("unbound input `{0}`")]
    UnboundInput(String),
    #[error("dimension mismatch in `{op}`: {lhs} vs {rhs}")]
    DimensionError { op: &'static str, lhs: Dims, rhs: Dims },
    #[error("division by zero")]
    DivisionByZero,
    #[error("type error: {0}")]
    TypeError(String),
    #[error("exponent must be a dimensionless integer, got {0}")]
    NonIntegerExponent(String),
    #[error("calculation `{0}` refers to itself")]
    CalculationCycle(String),
    #[error("non-finite result")]
    NonFinite,
}

/// Static type of an expression: a quantity of known dimensions, or boolean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueType {
    Quantity(Dims),
    Bool,
}

pub fn evaluate(expr: &Expression, scope: &(impl Scope + ?Sized)) -> Result<Value, EvalError> {
    Evaluator { scope, stack: Vec::new() }.eval(expr)
}

/// Evaluates and requires a numeric result.
pub fn evaluate_quantity(expr: &Expression, scope: &(impl Scope + ?Sized)) -> Result<Quantity, EvalError> {
    match evaluate(expr, scope)? {
        Value::Quantity(q) => Ok(q),
        Value::Bool(_) => Err(EvalError::TypeError(format!("expected a quantity, `{expr}` is boolean"))),
    }
}

/// Infers the result type without computing values. Constants contribute
/// the dimensions of whatever the scope resolves them to.
pub fn infer_type(expr: &Expression, scope: &(impl Scope + ?Sized)) -> Result<ValueType, EvalError> {
    Evaluator { scope, stack: Vec::new() }.infer(expr)
}

struct Evaluator<'a, S: ?Sized> {
    scope: &'a S,
    stack: Vec<String>,
}

fn quantity(v: f64, dims: Dims) -> Result<Value, EvalError> {
    Quantity::new(v, dims).map(Value::Quantity).map_err(|_| EvalError::NonFinite)
}

fn expect_q(v: Value, ctx: &str) -> Result<Quantity, EvalError> {
    match v {
        Value::Quantity(q) => Ok(q),
        Value::Bool(_) => Err(EvalError::TypeError(format!("boolean operand to `{ctx}`"))),
    }
}

fn expect_b(v: Value, ctx: &str) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(b),
        Value::Quantity(_) => Err(EvalError::TypeError(format!("numeric operand to `{ctx}`"))),
    }
}

fn integer_exponent(q: Quantity) -> Result<i32, EvalError> {
    let v = q.si();
    if !q.dims().is_dimensionless() || v.fract() != 0.0 || v.abs() > 16.0 {
        return Err(EvalError::NonIntegerExponent(q.to_string()));
    }
    Ok(v as i32)
}

impl<'a, S: Scope + ?Sized> Evaluator<'a, S> {
    fn enter(&mut self, name: &str) -> Result<&'a Expression, EvalError> {
        let scope: &'a S = self.scope;
        if self.stack.iter().any(|n| n == name) || self.stack.len() >= MAX_CALCULATION_DEPTH {
            return Err(EvalError::CalculationCycle(name.to_string()));
        }
        let body = scope
            .calculation(name)
            .ok_or_else(|| EvalError::UnresolvedName(name.to_string()))?;
        self.stack.push(name.to_string());
        Ok(body)
    }

    fn eval(&mut self, expr: &Expression) -> Result<Value, EvalError> {
        match expr {
            Expression::Literal(l) => l.quantity().map(Value::Quantity).map_err(|_| EvalError::NonFinite),
            Expression::Bool(b) => Ok(Value::Bool(*b)),
            Expression::Constant { name, date } => self
                .scope
                .constant(name, date)
                .map(Value::Quantity)
                .ok_or_else(|| EvalError::UnresolvedName(name.clone())),
            Expression::Calculation(name) => {
                let body = self.enter(name)?;
                let out = self.eval(body);
                self.stack.pop();
                out
            }
            Expression::Input(name) => Err(EvalError::UnboundInput(name.clone())),
            Expression::Neg(c) => {
                let q = expect_q(self.eval(c)?, "-")?;
                quantity(-q.si(), q.dims())
            }
            Expression::Binary { op, lhs, rhs } => {
                let a = expect_q(self.eval(lhs)?, op.symbol())?;
                let b = expect_q(self.eval(rhs)?, op.symbol())?;
                match op {
                    BinaryOp::Add | BinaryOp::Sub => {
                        if a.dims() != b.dims() {
                            return Err(EvalError::DimensionError { op: op.symbol(), lhs: a.dims(), rhs: b.dims() });
                        }
                        let v = if *op == BinaryOp::Add { a.si() + b.si() } else { a.si() - b.si() };
                        quantity(v, a.dims())
                    }
                    BinaryOp::Mul => quantity(a.si() * b.si(), a.dims() * b.dims()),
                    BinaryOp::Div => {
                        if b.si() == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        quantity(a.si() / b.si(), a.dims() / b.dims())
                    }
                    BinaryOp::Pow => {
                        let n = integer_exponent(b)?;
                        if n < 0 && a.si() == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        quantity(a.si().powi(n), a.dims().powi(n))
                    }
                }
            }
            Expression::Compare { op, lhs, rhs } => {
                let a = expect_q(self.eval(lhs)?, op.symbol())?;
                let b = expect_q(self.eval(rhs)?, op.symbol())?;
                if a.dims() != b.dims() {
                    return Err(EvalError::DimensionError { op: op.symbol(), lhs: a.dims(), rhs: b.dims() });
                }
                Ok(Value::Bool(op.apply(a.si(), b.si())))
            }
            Expression::And(cs) => {
                let mut acc = true;
                for c in cs {
                    acc &= expect_b(self.eval(c)?, "and")?;
                }
                Ok(Value::Bool(acc))
            }
            Expression::Or(cs) => {
                let mut acc = false;
                for c in cs {
                    acc |= expect_b(self.eval(c)?, "or")?;
                }
                Ok(Value::Bool(acc))
            }
            Expression::Not(c) => Ok(Value::Bool(!expect_b(self.eval(c)?, "not")?)),
        }
    }

    fn infer(&mut self, expr: &Expression) -> Result<ValueType, EvalError> {
        let q = |t: ValueType, ctx: &str| match t {
            ValueType::Quantity(d) => Ok(d),
            ValueType::Bool => Err(EvalError::TypeError(format!("boolean operand to `{ctx}`"))),
        };
        let b = |t: ValueType, ctx: &str| match t {
            ValueType::Bool => Ok(()),
            ValueType::Quantity(_) => Err(EvalError::TypeError(format!("numeric operand to `{ctx}`"))),
        };
        Ok(match expr {
            Expression::Literal(l) => ValueType::Quantity(l.unit.dims()),
            Expression::Bool(_) => ValueType::Bool,
            Expression::Constant { name, date } => ValueType::Quantity(
                self.scope
                    .constant(name, date)
                    .ok_or_else(|| EvalError::UnresolvedName(name.clone()))?
                    .dims(),
            ),
            Expression::Calculation(name) => {
                let body = self.enter(name)?;
                let out = self.infer(body);
                self.stack.pop();
                out?
            }
            Expression::Input(name) => return Err(EvalError::UnboundInput(name.clone())),
            Expression::Neg(c) => ValueType::Quantity(q(self.infer(c)?, "-")?),
            Expression::Binary { op, lhs, rhs } => {
                let a = q(self.infer(lhs)?, op.symbol())?;
                match op {
                    BinaryOp::Add | BinaryOp::Sub => {
                        let r = q(self.infer(rhs)?, op.symbol())?;
                        if a != r {
                            return Err(EvalError::DimensionError { op: op.symbol(), lhs: a, rhs: r });
                        }
                        ValueType::Quantity(a)
                    }
                    BinaryOp::Mul => ValueType::Quantity(a * q(self.infer(rhs)?, "*")?),
                    BinaryOp::Div => ValueType::Quantity(a / q(self.infer(rhs)?, "/")?),
                    BinaryOp::Pow => {
                        // The exponent must be known statically to infer dimensions.
                        let n = match rhs.as_ref() {
                            Expression::Literal(l) => integer_exponent(
                                l.quantity().map_err(|_| EvalError::NonFinite)?,
                            )?,
                            other => return Err(EvalError::NonIntegerExponent(other.to_string())),
                        };
                        ValueType::Quantity(a.powi(n))
                    }
                }
            }
            Expression::Compare { op, lhs, rhs } => {
                let a = q(self.infer(lhs)?, op.symbol())?;
                let r = q(self.infer(rhs)?, op.symbol())?;
                if a != r {
                    return Err(EvalError::DimensionError { op: op.symbol(), lhs: a, rhs: r });
                }
                ValueType::Bool
            }
            Expression::And(cs) | Expression::Or(cs) => {
                for c in cs {
                    b(self.infer(c)?, "and/or")?;
                }
                ValueType::Bool
            }
            Expression::Not(c) => {
                b(self.infer(c)?, "not")?;
                ValueType::Bool
            }
        })
    }
}
