//! Builtin functions: typing rules for sema and evaluation for the runtime.
//!
//! LRU arrays are ordered from least to most recently used.

use crate::corpus::params::TeaStoreParams;
use crate::corpus::scenario::Scenario;
use crate::diag::Diagnostic;
use crate::sema::types::Ty;
use crate::value::Value;

use super::prng::Prng;

pub struct Signature {
    pub arity: usize,
    /// Reads the PRNG or the scenario; forbidden in pure and physical functions.
    pub impure: bool,
}

const TABLE: [(&str, usize, bool); 15] = [
    ("rnd_img_id", 0, true),
    ("scenario_images", 1, true),
    ("find", 2, false),
    ("lru_update", 3, false),
    ("lru_resize", 2, false),
    ("n_up_to", 1, false),
    ("empty_set", 0, false),
    ("clamp", 3, false),
    ("round", 1, false),
    ("len", 1, false),
    ("push", 2, false),
    ("max", 2, false),
    ("min", 2, false),
    ("abs", 1, false),
    ("filter_residue", 3, false),
];

/// Upper bound on arrays built by `n_up_to`.
const MAX_RANGE: i64 = 10_000_000;

pub fn is_builtin(name: &str) -> bool {
    name == "param" || TABLE.iter().any(|(n, _, _)| *n == name)
}

pub fn signature(name: &str) -> Option<Signature> {
    TABLE
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|&(_, arity, impure)| Signature { arity, impure })
}

/// Parameter types after implicit widening, and the result type.
pub struct Typed {
    pub params: Vec<Ty>,
    pub ret: Ty,
}

fn int_array() -> Ty {
    Ty::array(Ty::Int)
}

fn numeric_join(a: &Ty, b: &Ty) -> Option<Ty> {
    match (a, b) {
        (Ty::Int, Ty::Int) => Some(Ty::Int),
        (Ty::Any, t) | (t, Ty::Any) if t.is_numeric() => Some(t.clone()),
        (a, b) if a.is_numeric() && b.is_numeric() => Some(Ty::Float),
        (Ty::Any, Ty::Any) => Some(Ty::Any),
        _ => None,
    }
}

/// Types a call to builtin `name` with argument types `args` (arity already
/// checked).
pub fn type_call(name: &str, args: &[Ty]) -> Result<Typed, String> {
    let want = |params: Vec<Ty>, ret: Ty| -> Result<Typed, String> {
        for (i, (got, p)) in args.iter().zip(&params).enumerate() {
            let ok = got.fits(p) || (*got == Ty::Int && *p == Ty::Float);
            if !ok {
                return Err(format!("argument {} expects {p}, found {got}", i + 1));
            }
        }
        Ok(Typed { params, ret })
    };
    match name {
        "rnd_img_id" => want(vec![], Ty::Int),
        "scenario_images" | "n_up_to" => {
            let ret = if name == "n_up_to" { int_array() } else { Ty::Int };
            want(vec![Ty::Int], ret)
        }
        "empty_set" => want(vec![], Ty::array(Ty::Any)),
        "lru_update" => want(vec![int_array(), Ty::Int, Ty::Int], int_array()),
        "lru_resize" => want(vec![int_array(), Ty::Int], int_array()),
        "filter_residue" => want(vec![int_array(), Ty::Int, Ty::Int], int_array()),
        "clamp" => want(vec![Ty::Float, Ty::Float, Ty::Float], Ty::Float),
        "round" => want(vec![Ty::Float], Ty::Int),
        "find" => {
            let elem = match &args[1] {
                Ty::Array(e) => (**e).clone(),
                Ty::Any => Ty::Any,
                other => return Err(format!("argument 2 expects an array, found {other}")),
            };
            let elem = elem.unify(&args[0]).ok_or_else(|| {
                format!("cannot look for {} in {}", args[0], args[1])
            })?;
            Ok(Typed {
                params: vec![elem.clone(), Ty::array(elem)],
                ret: Ty::Bool,
            })
        }
        "len" => match &args[0] {
            Ty::Array(_) | Ty::Any => Ok(Typed {
                params: vec![args[0].clone()],
                ret: Ty::Int,
            }),
            other => Err(format!("argument 1 expects an array, found {other}")),
        },
        "push" => {
            let elem = match &args[0] {
                Ty::Array(e) => (**e).clone(),
                Ty::Any => Ty::Any,
                other => return Err(format!("argument 1 expects an array, found {other}")),
            };
            let elem = elem
                .unify(&args[1])
                .ok_or_else(|| format!("cannot push {} onto {}", args[1], args[0]))?;
            Ok(Typed {
                params: vec![Ty::array(elem.clone()), elem.clone()],
                ret: Ty::array(elem),
            })
        }
        "max" | "min" => {
            let t = numeric_join(&args[0], &args[1])
                .ok_or_else(|| format!("expects numbers, found {} and {}", args[0], args[1]))?;
            Ok(Typed {
                params: vec![t.clone(), t.clone()],
                ret: t,
            })
        }
        "abs" => {
            if args[0].is_numeric() || args[0] == Ty::Any {
                Ok(Typed {
                    params: vec![args[0].clone()],
                    ret: args[0].clone(),
                })
            } else {
                Err(format!("expects a number, found {}", args[0]))
            }
        }
        _ => Err(format!("unknown builtin `{name}`")),
    }
}

/// Mutable context available to impure builtins.
pub struct Env<'a> {
    pub prng: &'a mut Prng,
    pub params: &'a TeaStoreParams,
    pub scenario: &'a Scenario,
}

fn fail(name: &str, msg: impl std::fmt::Display) -> Diagnostic {
    Diagnostic::error("E-BUILTIN", format!("{name}: {msg}"))
}

fn int_arg(name: &str, v: &Value) -> Result<i64, Diagnostic> {
    v.as_int().ok_or_else(|| fail(name, format!("expected int, found {}", v.kind())))
}

fn float_arg(name: &str, v: &Value) -> Result<f64, Diagnostic> {
    v.as_float().ok_or_else(|| fail(name, format!("expected number, found {}", v.kind())))
}

fn ints_arg(name: &str, v: &Value) -> Result<Vec<i64>, Diagnostic> {
    v.int_array().ok_or_else(|| fail(name, "expected int array"))
}

/// Moves `x` to the most-recently-used end, inserting it if absent and
/// evicting from the least-recently-used end beyond `cap`.
pub fn lru_update(cache: &mut Vec<i64>, x: i64, cap: usize) {
    if let Some(pos) = cache.iter().position(|&c| c == x) {
        cache.remove(pos);
    }
    cache.push(x);
    lru_resize(cache, cap);
}

/// Evicts least-recently-used entries until `cache.len() <= cap`.
pub fn lru_resize(cache: &mut Vec<i64>, cap: usize) {
    if cache.len() > cap {
        cache.drain(..cache.len() - cap);
    }
}

/// Round half away from zero, failing outside the int range.
pub fn round_to_int(x: f64) -> Result<i64, Diagnostic> {
    let r = x.round();
    if r.is_finite() && r >= i64::MIN as f64 && r < i64::MAX as f64 {
        Ok(r as i64)
    } else {
        Err(fail("round", format!("{x} does not fit an int")))
    }
}

pub fn call(name: &str, args: Vec<Value>, env: &mut Env<'_>) -> Result<Value, Diagnostic> {
    let arg = |i: usize| &args[i];
    if args.len() != signature(name).map_or(usize::MAX, |s| s.arity) {
        return Err(fail(name, "wrong number of arguments"));
    }
    Ok(match name {
        "rnd_img_id" => {
            let n = env.params.db_size;
            if n < 1 {
                return Err(fail(name, format!("db_size must be >= 1, got {n}")));
            }
            Value::Int(env.prng.range_inclusive(1, n))
        }
        "scenario_images" => {
            let k = int_arg(name, arg(0))?;
            if k < 1 {
                return Err(fail(name, format!("request index must be >= 1, got {k}")));
            }
            Value::Int(env.scenario.images_for_round(k as u64))
        }
        "find" => {
            let hay = arg(1)
                .as_array()
                .ok_or_else(|| fail(name, "expected array"))?;
            Value::Bool(hay.contains(arg(0)))
        }
        "lru_update" => {
            let mut cache = ints_arg(name, arg(0))?;
            let x = int_arg(name, arg(1))?;
            let cap = int_arg(name, arg(2))?;
            if cap < 1 {
                return Err(fail(name, format!("capacity must be >= 1, got {cap}")));
            }
            lru_update(&mut cache, x, cap as usize);
            Value::from_ints(cache)
        }
        "lru_resize" => {
            let mut cache = ints_arg(name, arg(0))?;
            let cap = int_arg(name, arg(1))?;
            if cap < 0 {
                return Err(fail(name, format!("capacity must be >= 0, got {cap}")));
            }
            lru_resize(&mut cache, cap as usize);
            Value::from_ints(cache)
        }
        "n_up_to" => {
            let n = int_arg(name, arg(0))?;
            if !(0..=MAX_RANGE).contains(&n) {
                return Err(fail(name, format!("bound {n} outside 0..={MAX_RANGE}")));
            }
            Value::from_ints(0..n)
        }
        "empty_set" => Value::Array(Vec::new()),
        "clamp" => {
            let (x, lo, hi) = (
                float_arg(name, arg(0))?,
                float_arg(name, arg(1))?,
                float_arg(name, arg(2))?,
            );
            if lo > hi || lo.is_nan() || hi.is_nan() {
                return Err(fail(name, format!("empty interval [{lo}, {hi}]")));
            }
            Value::Float(x.clamp(lo, hi))
        }
        "round" => Value::Int(round_to_int(float_arg(name, arg(0))?)?),
        "len" => {
            let a = arg(0).as_array().ok_or_else(|| fail(name, "expected array"))?;
            Value::Int(a.len() as i64)
        }
        "push" => {
            let mut a = arg(0)
                .as_array()
                .ok_or_else(|| fail(name, "expected array"))?
                .to_vec();
            a.push(arg(1).clone());
            Value::Array(a)
        }
        "max" | "min" => match (arg(0), arg(1)) {
            (Value::Int(a), Value::Int(b)) => Value::Int(if name == "max" { *a.max(b) } else { *a.min(b) }),
            (a, b) => {
                let (a, b) = (float_arg(name, a)?, float_arg(name, b)?);
                Value::Float(if name == "max" { a.max(b) } else { a.min(b) })
            }
        },
        "abs" => match arg(0) {
            Value::Int(i) => Value::Int(
                i.checked_abs()
                    .ok_or_else(|| Diagnostic::error("E-ARITH", "integer overflow in abs"))?,
            ),
            v => Value::Float(float_arg(name, v)?.abs()),
        },
        "filter_residue" => {
            let xs = ints_arg(name, arg(0))?;
            let m = int_arg(name, arg(1))?;
            let r = int_arg(name, arg(2))?;
            if m < 1 {
                return Err(fail(name, format!("modulus must be >= 1, got {m}")));
            }
            Value::from_ints(xs.into_iter().filter(|x| x.rem_euclid(m) == r.rem_euclid(m)))
        }
        _ => return Err(fail(name, "unknown builtin")),
    })
}
