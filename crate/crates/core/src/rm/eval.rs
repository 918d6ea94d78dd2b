use thiserror::Error;

use super::{BinaryOp, Expr, UnaryOp};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("integer overflow")]
    Overflow,
    #[error("type mismatch: expected {0}")]
    Type(&'static str),
    #[error("value {value} assigned to `{variable}` is outside [{low}..{high}]")]
    OutOfRange {
        variable: String,
        value: i64,
        low: i64,
        high: i64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Value {
    Int(i64),
    Bool(bool),
}

fn eval(e: &Expr, vars: &[i64]) -> Result<Value, EvalError> {
    Ok(match e {
        Expr::Int(v) => Value::Int(*v),
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Var(i) => Value::Int(vars[*i]),
        Expr::Unary(UnaryOp::Not, inner) => Value::Bool(!eval_bool(inner, vars)?),
        Expr::Unary(UnaryOp::Neg, inner) => Value::Int(
            eval_int(inner, vars)?
                .checked_neg()
                .ok_or(EvalError::Overflow)?,
        ),
        Expr::Binary(op, l, r) => match op {
            BinaryOp::Or => Value::Bool(eval_bool(l, vars)? || eval_bool(r, vars)?),
            BinaryOp::And => Value::Bool(eval_bool(l, vars)? && eval_bool(r, vars)?),
            BinaryOp::Eq | BinaryOp::Ne => {
                let same = match (eval(l, vars)?, eval(r, vars)?) {
                    (Value::Int(a), Value::Int(b)) => a == b,
                    (Value::Bool(a), Value::Bool(b)) => a == b,
                    _ => return Err(EvalError::Type("operands of the same type")),
                };
                Value::Bool(same == (*op == BinaryOp::Eq))
            }
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                let (a, b) = (eval_int(l, vars)?, eval_int(r, vars)?);
                Value::Bool(match op {
                    BinaryOp::Lt => a < b,
                    BinaryOp::Le => a <= b,
                    BinaryOp::Gt => a > b,
                    _ => a >= b,
                })
            }
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul => {
                let (a, b) = (eval_int(l, vars)?, eval_int(r, vars)?);
                let v = match op {
                    BinaryOp::Add => a.checked_add(b),
                    BinaryOp::Sub => a.checked_sub(b),
                    _ => a.checked_mul(b),
                };
                Value::Int(v.ok_or(EvalError::Overflow)?)
            }
        },
    })
}

/// Evaluates an integer expression; `vars` is indexed by global variable.
pub(crate) fn eval_int(e: &Expr, vars: &[i64]) -> Result<i64, EvalError> {
    match eval(e, vars)? {
        Value::Int(v) => Ok(v),
        Value::Bool(_) => Err(EvalError::Type("integer")),
    }
}

pub(crate) fn eval_bool(e: &Expr, vars: &[i64]) -> Result<bool, EvalError> {
    match eval(e, vars)? {
        Value::Bool(b) => Ok(b),
        Value::Int(_) => Err(EvalError::Type("boolean")),
    }
}
