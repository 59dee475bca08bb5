//! Signal types.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordTy {
    pub name: String,
    pub fields: Vec<(String, Ty)>,
}

/// Type of a signal, variable or expression.
///
/// `Any` only appears as the element type of the empty array literal and is
/// compatible with every element type. `Str` is reserved for literal
/// arguments of `param`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ty {
    Bool,
    Int,
    Float,
    Array(Box<Ty>),
    Record(RecordTy),
    Str,
    Any,
}

pub const ACTION_REQUEST: &str = "action_request";

/// The request record exchanged between the user and the server.
pub fn action_request_ty() -> Ty {
    Ty::Record(RecordTy {
        name: ACTION_REQUEST.to_string(),
        fields: vec![
            ("isHeavyRequest".to_string(), Ty::Bool),
            ("requestPrivatePage".to_string(), Ty::Bool),
            ("providesRightAuthData".to_string(), Ty::Bool),
        ],
    })
}

/// Predeclared record types by name.
pub fn named_record(name: &str) -> Option<Ty> {
    (name == ACTION_REQUEST).then(action_request_ty)
}

impl Ty {
    pub fn array(elem: Ty) -> Ty {
        Ty::Array(Box::new(elem))
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Ty::Int | Ty::Float)
    }

    /// True if a value of type `self` may be stored where `target` is expected
    /// without conversion.
    pub fn fits(&self, target: &Ty) -> bool {
        match (self, target) {
            (Ty::Any, _) | (_, Ty::Any) => true,
            (Ty::Array(a), Ty::Array(b)) => a.fits(b),
            (a, b) => a == b,
        }
    }

    /// Most specific type covering both, used to join the branches of arrays.
    pub fn unify(&self, other: &Ty) -> Option<Ty> {
        match (self, other) {
            (Ty::Any, t) | (t, Ty::Any) => Some(t.clone()),
            (Ty::Array(a), Ty::Array(b)) => a.unify(b).map(Ty::array),
            (a, b) if a == b => Some(a.clone()),
            _ => None,
        }
    }

    /// Zero value used for variables before their first assignment.
    pub fn default_value(&self) -> Value {
        match self {
            Ty::Bool => Value::Bool(false),
            Ty::Int => Value::Int(0),
            Ty::Float => Value::Float(0.0),
            Ty::Array(_) | Ty::Any | Ty::Str => Value::Array(Vec::new()),
            Ty::Record(r) => Value::Record(
                r.fields
                    .iter()
                    .map(|(n, t)| (n.clone(), t.default_value()))
                    .collect::<BTreeMap<_, _>>(),
            ),
        }
    }

    /// Whether `v` inhabits this type.
    pub fn admits(&self, v: &Value) -> bool {
        match (self, v) {
            (Ty::Any, _) => true,
            (Ty::Bool, Value::Bool(_)) | (Ty::Int, Value::Int(_)) | (Ty::Float, Value::Float(_)) => {
                true
            }
            (Ty::Array(e), Value::Array(xs)) => xs.iter().all(|x| e.admits(x)),
            (Ty::Record(r), Value::Record(m)) => {
                m.len() == r.fields.len()
                    && r.fields.iter().all(|(n, t)| m.get(n).is_some_and(|x| t.admits(x)))
            }
            _ => false,
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Bool => f.write_str("bool"),
            Ty::Int => f.write_str("int"),
            Ty::Float => f.write_str("float"),
            Ty::Array(e) => write!(f, "{e}[]"),
            Ty::Record(r) => f.write_str(&r.name),
            Ty::Str => f.write_str("string"),
            Ty::Any => f.write_str("?"),
        }
    }
}
