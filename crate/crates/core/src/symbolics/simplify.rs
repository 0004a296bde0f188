// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Constant folding ahead of snapshot binding.

use super::eval::{evaluate, EvalError};
use super::{BinaryOp, EmptyScope, Expression, Literal, Quantity, Unit, Value};

/// Folds literal-only subtrees and drops multiplications/divisions by a
/// dimensionless 1. The result evaluates bit-identically to the input under
/// every scope.
pub fn simplify(expr: &Expression) -> Result<Expression, EvalError> {
    let folded = match expr {
        Expression::Literal(_)
        | Expression::Bool(_)
        | Expression::Constant { .. }
        | Expression::Calculation(_)
        | Expression::Input(_) => return Ok(expr.clone()),
        Expression::Neg(c) => Expression::Neg(Box::new(simplify(c)?)),
        Expression::Not(c) => Expression::Not(Box::new(simplify(c)?)),
        Expression::Binary { op, lhs, rhs } => {
            let (l, r) = (simplify(lhs)?, simplify(rhs)?);
            match (op, is_unit_one(&l), is_unit_one(&r)) {
                (BinaryOp::Mul, _, true) if is_numeric(&l) => return Ok(l),
                (BinaryOp::Mul, true, _) if is_numeric(&r) => return Ok(r),
                (BinaryOp::Div, _, true) if is_numeric(&l) => return Ok(l),
                _ => Expression::binary(*op, l, r),
            }
        }
        Expression::Compare { op, lhs, rhs } => Expression::compare(*op, simplify(lhs)?, simplify(rhs)?),
        Expression::And(cs) => Expression::And(cs.iter().map(simplify).collect::<Result<_, _>>()?),
        Expression::Or(cs) => Expression::Or(cs.iter().map(simplify).collect::<Result<_, _>>()?),
    };
    if !folded.children().iter().all(|c| c.is_literal()) {
        return Ok(folded);
    }
    Ok(match evaluate(&folded, &EmptyScope)? {
        Value::Bool(b) => Expression::Bool(b),
        Value::Quantity(q) => {
            let candidates: Vec<&Unit> = folded.children().iter().filter_map(|c| c.as_literal()).map(|l| &l.unit).collect();
            Expression::Literal(literal_for(q, &candidates))
        }
    })
}

/// Expresses `q` in the first candidate unit that reproduces its SI value
/// exactly, falling back to the SI base unit.
fn literal_for(q: Quantity, candidates: &[&Unit]) -> Literal {
    for unit in candidates {
        if unit.dims() == q.dims() {
            let v = q.si() / unit.scale();
            if v * unit.scale() == q.si() {
                return Literal { value: v, unit: (*unit).clone() };
            }
        }
    }
    Literal { value: q.si(), unit: Unit::si(q.dims()) }
}

fn is_unit_one(e: &Expression) -> bool {
    matches!(e, Expression::Literal(l) if l.value == 1.0 && l.unit.is_dimensionless())
}

/// True when the node can only evaluate to a quantity.
fn is_numeric(e: &Expression) -> bool {
    matches!(
        e,
        Expression::Literal(_) | Expression::Constant { .. } | Expression::Input(_) | Expression::Neg(_) | Expression::Binary { .. }
    )
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;

    #[test]
    fn folds_literal_sum_in_operand_unit() {
        let e = Expression::literal(2.0, "MHz") + Expression::literal(2.0, "MHz");
        assert_eq!(simplify(&e).unwrap(), Expression::literal(4.0, "MHz"));
    }

    #[test]
    fn multiplication_by_one_is_identity() {
        let x = Expression::constant("x");
        assert_eq!(simplify(&(x.clone() * 1.0)).unwrap(), x);
        assert_eq!(simplify(&(1.0 * x.clone())).unwrap(), x);
        assert_eq!(simplify(&(x.clone() / 1.0)).unwrap(), x);
    }

    #[test]
    fn partial_fold_keeps_symbolic_shape() {
        let f0 = Expression::constant("RamanCarrierResonanceFrequency");
        let e = f0.clone() + (Expression::literal(1.0, "MHz") + Expression::literal(1.0, "MHz"));
        let s = simplify(&e).unwrap();
        assert_eq!(s, f0 + Expression::literal(2.0, "MHz"));
    }

    #[test]
    fn literal_dimension_errors_surface() {
        let e = Expression::literal(2.0, "MHz") + Expression::literal(2.0, "ns");
        assert!(matches!(simplify(&e), Err(EvalError::DimensionError { .. })));
    }

    #[test]
    fn folded_quotient_falls_back_to_si() {
        let e = Expression::literal(3.14159, "") / Expression::literal(1.0, "MHz");
        let s = simplify(&e).unwrap();
        let lit = s.as_literal().unwrap();
        assert_eq!(lit.unit.symbol(), "s");
        assert_eq!(lit.value, 3.14159 / 1e6);
    }
}
