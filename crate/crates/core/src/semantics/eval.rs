//! Expression evaluation over a variable lookup.

use thiserror::Error;

use super::ast::{BinOp, Expr, ExprKind, UnOp};
use crate::state_space::{Value, VarName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not bound")]
    Unbound(VarName),
    /// An output parameter read before anything was assigned to it.
    #[error("variable `{0}` has no value yet")]
    Undefined(VarName),
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("operands of `{0}` have the wrong type")]
    Type(&'static str),
    #[error("call expressions must be desugared before evaluation")]
    Call,
}

/// Where variable values come from. `post` selects the primed reading.
pub trait Lookup {
    fn value(&self, name: &VarName, post: bool) -> Option<Value>;
}

impl<F: Fn(&VarName, bool) -> Option<Value>> Lookup for F {
    fn value(&self, name: &VarName, post: bool) -> Option<Value> {
        self(name, post)
    }
}

pub fn eval(e: &Expr, env: &impl Lookup) -> Result<Value, EvalError> {
    match &e.kind {
        ExprKind::Int(i) => Ok(Value::Int(*i)),
        ExprKind::Bool(b) => Ok(Value::Bool(*b)),
        ExprKind::Label(l) => Ok(Value::Label(l.clone())),
        ExprKind::Var(n) | ExprKind::Post(n) => {
            let post = matches!(e.kind, ExprKind::Post(_));
            match env.value(n, post) {
                None => Err(EvalError::Unbound(n.clone())),
                Some(Value::Undefined) => Err(EvalError::Undefined(n.clone())),
                Some(v) => Ok(v),
            }
        }
        ExprKind::Unary(op, inner) => match (op, eval(inner, env)?) {
            (UnOp::Neg, Value::Int(i)) => i.checked_neg().map(Value::Int).ok_or(EvalError::Overflow),
            (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
            (UnOp::Neg, _) => Err(EvalError::Type("-")),
            (UnOp::Not, _) => Err(EvalError::Type("not")),
        },
        ExprKind::Binary(op, l, r) => {
            // Both operands are always evaluated: `and`/`or` do not short-circuit.
            let (l, r) = (eval(l, env)?, eval(r, env)?);
            binary(*op, l, r)
        }
        ExprKind::Call(..) => Err(EvalError::Call),
    }
}

fn binary(op: BinOp, l: Value, r: Value) -> Result<Value, EvalError> {
    use BinOp::*;
    match (op, l, r) {
        (Eq, l, r) => Ok(Value::Bool(l == r)),
        (Ne, l, r) => Ok(Value::Bool(l != r)),
        (And, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(a && b)),
        (Or, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(a || b)),
        (op, Value::Int(a), Value::Int(b)) => {
            let int = |v: Option<i64>| v.map(Value::Int).ok_or(EvalError::Overflow);
            match op {
                Add => int(a.checked_add(b)),
                Sub => int(a.checked_sub(b)),
                Mul => int(a.checked_mul(b)),
                Div | Mod if b == 0 => Err(EvalError::DivisionByZero),
                Div => int(a.checked_div_euclid(b)),
                Mod => int(a.checked_rem_euclid(b)),
                Lt => Ok(Value::Bool(a < b)),
                Le => Ok(Value::Bool(a <= b)),
                Gt => Ok(Value::Bool(a > b)),
                Ge => Ok(Value::Bool(a >= b)),
                Eq | Ne | And | Or => unreachable!("handled above"),
            }
        }
        (op, _, _) => Err(EvalError::Type(op.symbol())),
    }
}
