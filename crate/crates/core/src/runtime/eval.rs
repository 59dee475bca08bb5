//! Evaluation of lowered expressions and statements over a variable store.

use std::collections::{BTreeMap, HashMap};

use crate::diag::Diagnostic;
use crate::ir::{BinOp, Callee, Expr, Function, Stmt, UnOp};
use crate::value::Value;

use super::builtins::{self, Env};

pub type Store = HashMap<String, Value>;

/// Everything an expression may consult besides the local store.
pub struct Ctx<'a, 'e> {
    pub functions: &'a BTreeMap<String, Function>,
    pub env: &'a mut Env<'e>,
}

fn arith(msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error("E-ARITH", msg)
}

fn rt(msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error("E-RUNTIME", msg)
}

fn want_bool(v: &Value) -> Result<bool, Diagnostic> {
    v.as_bool()
        .ok_or_else(|| rt(format!("expected bool, found {}", v.kind())))
}

pub fn exec(
    stmts: &[Stmt],
    store: &mut Store,
    incoming: Option<&Value>,
    cx: &mut Ctx<'_, '_>,
) -> Result<(), Diagnostic> {
    for s in stmts {
        match s {
            Stmt::Assign { target, value } => {
                let v = eval(value, store, incoming, cx)?;
                store.insert(target.clone(), v);
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
            } => {
                let body = if want_bool(&eval(cond, store, incoming, cx)?)? {
                    then_body
                } else {
                    else_body
                };
                exec(body, store, incoming, cx)?;
            }
            Stmt::For { var, iter, body } => {
                let items = match eval(iter, store, incoming, cx)? {
                    Value::Array(items) => items,
                    other => return Err(rt(format!("cannot iterate over {}", other.kind()))),
                };
                for item in items {
                    store.insert(var.clone(), item);
                    exec(body, store, incoming, cx)?;
                }
            }
            Stmt::Eval { expr } => {
                eval(expr, store, incoming, cx)?;
            }
        }
    }
    Ok(())
}

pub fn eval(
    e: &Expr,
    store: &Store,
    incoming: Option<&Value>,
    cx: &mut Ctx<'_, '_>,
) -> Result<Value, Diagnostic> {
    Ok(match e {
        Expr::Lit { value } => value.clone(),
        Expr::Var { name } => store
            .get(name)
            .cloned()
            .ok_or_else(|| rt(format!("unbound variable `{name}`")))?,
        Expr::Param { name } => cx
            .env
            .params
            .get(name)
            .ok_or_else(|| rt(format!("unknown parameter `{name}`")))?,
        Expr::Incoming => incoming
            .cloned()
            .ok_or_else(|| rt("no incoming value outside an input transition"))?,
        Expr::Unary { op, operand } => {
            let v = eval(operand, store, incoming, cx)?;
            match (op, v) {
                (UnOp::Neg, Value::Int(i)) => {
                    Value::Int(i.checked_neg().ok_or_else(|| arith("integer overflow in negation"))?)
                }
                (UnOp::Neg, Value::Float(f)) => Value::Float(-f),
                (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
                (op, v) => return Err(rt(format!("bad operand {} for {op:?}", v.kind()))),
            }
        }
        Expr::Binary { op, lhs, rhs } => match op {
            BinOp::And => {
                let l = want_bool(&eval(lhs, store, incoming, cx)?)?;
                Value::Bool(l && want_bool(&eval(rhs, store, incoming, cx)?)?)
            }
            BinOp::Or => {
                let l = want_bool(&eval(lhs, store, incoming, cx)?)?;
                Value::Bool(l || want_bool(&eval(rhs, store, incoming, cx)?)?)
            }
            _ => {
                let l = eval(lhs, store, incoming, cx)?;
                let r = eval(rhs, store, incoming, cx)?;
                binary(*op, &l, &r)?
            }
        },
        Expr::Widen { operand } => match eval(operand, store, incoming, cx)? {
            Value::Int(i) => Value::Float(i as f64),
            v => v,
        },
        Expr::Call { callee, args } => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval(a, store, incoming, cx)?);
            }
            match callee {
                Callee::Builtin(name) => builtins::call(name, vals, cx.env)?,
                Callee::Pure(name) => call_pure(name, vals, cx)?,
            }
        }
        Expr::Index { base, index } => {
            let b = eval(base, store, incoming, cx)?;
            let i = eval(index, store, incoming, cx)?;
            let (Some(items), Some(i)) = (b.as_array(), i.as_int()) else {
                return Err(rt("indexing needs an array and an int"));
            };
            usize::try_from(i)
                .ok()
                .and_then(|i| items.get(i))
                .cloned()
                .ok_or_else(|| rt(format!("index {i} out of bounds for length {}", items.len())))?
        }
        Expr::Field { base, field } => {
            let b = eval(base, store, incoming, cx)?;
            b.as_record()
                .and_then(|r| r.get(field))
                .cloned()
                .ok_or_else(|| rt(format!("no field `{field}`")))?
        }
        Expr::Record { fields, .. } => {
            let mut r = BTreeMap::new();
            for (name, fe) in fields {
                r.insert(name.clone(), eval(fe, store, incoming, cx)?);
            }
            Value::Record(r)
        }
        Expr::Array { elems } => {
            let mut items = Vec::with_capacity(elems.len());
            for el in elems {
                items.push(eval(el, store, incoming, cx)?);
            }
            Value::Array(items)
        }
    })
}

pub fn call_pure(name: &str, args: Vec<Value>, cx: &mut Ctx<'_, '_>) -> Result<Value, Diagnostic> {
    let f = cx
        .functions
        .get(name)
        .ok_or_else(|| rt(format!("unknown function `{name}`")))?;
    if f.params.len() != args.len() {
        return Err(rt(format!("`{name}` expects {} arguments", f.params.len())));
    }
    let local: Store = f
        .params
        .iter()
        .map(|(p, _)| p.clone())
        .zip(args)
        .collect();
    eval(&f.body, &local, None, cx)
}

fn binary(op: BinOp, l: &Value, r: &Value) -> Result<Value, Diagnostic> {
    use BinOp::*;
    if matches!(op, Eq | Ne) {
        let eq = match (l, r) {
            (Value::Int(_), Value::Float(_)) | (Value::Float(_), Value::Int(_)) => {
                l.as_float() == r.as_float()
            }
            _ => l == r,
        };
        return Ok(Value::Bool(if op == Eq { eq } else { !eq }));
    }
    match (l, r) {
        (Value::Int(a), Value::Int(b)) => int_op(op, *a, *b),
        (Value::Bool(a), Value::Bool(b)) if op == BitAnd => Ok(Value::Bool(*a & *b)),
        _ => match (l.as_float(), r.as_float()) {
            (Some(a), Some(b)) => float_op(op, a, b),
            _ => Err(rt(format!(
                "bad operands {} {} {}",
                l.kind(),
                op.symbol(),
                r.kind()
            ))),
        },
    }
}

fn int_op(op: BinOp, a: i64, b: i64) -> Result<Value, Diagnostic> {
    use BinOp::*;
    let overflow = || arith(format!("integer overflow in {a} {} {b}", op.symbol()));
    let shift = |b: i64| {
        u32::try_from(b)
            .ok()
            .filter(|&s| s < 64)
            .ok_or_else(|| arith(format!("shift amount {b} out of range")))
    };
    Ok(match op {
        Add => Value::Int(a.checked_add(b).ok_or_else(overflow)?),
        Sub => Value::Int(a.checked_sub(b).ok_or_else(overflow)?),
        Mul => Value::Int(a.checked_mul(b).ok_or_else(overflow)?),
        Div | Rem if b == 0 => return Err(arith("integer division by zero")),
        Div => Value::Int(a.checked_div(b).ok_or_else(overflow)?),
        Rem => Value::Int(a.checked_rem(b).ok_or_else(overflow)?),
        Shl => Value::Int(a.checked_shl(shift(b)?).ok_or_else(overflow)?),
        Shr => Value::Int(a >> shift(b)?),
        BitAnd => Value::Int(a & b),
        Lt => Value::Bool(a < b),
        Le => Value::Bool(a <= b),
        Gt => Value::Bool(a > b),
        Ge => Value::Bool(a >= b),
        Eq | Ne | And | Or => unreachable!("handled by caller"),
    })
}

fn float_op(op: BinOp, a: f64, b: f64) -> Result<Value, Diagnostic> {
    use BinOp::*;
    Ok(match op {
        Add => Value::Float(a + b),
        Sub => Value::Float(a - b),
        Mul => Value::Float(a * b),
        Div => Value::Float(a / b),
        Rem => Value::Float(a % b),
        Lt => Value::Bool(a < b),
        Le => Value::Bool(a <= b),
        Gt => Value::Bool(a > b),
        Ge => Value::Bool(a >= b),
        Shl | Shr | BitAnd => return Err(rt(format!("`{}` needs int operands", op.symbol()))),
        Eq | Ne | And | Or => unreachable!("handled by caller"),
    })
}
