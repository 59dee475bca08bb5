//! Model parameters readable from Chips code through `param("name")`.

use serde::{Deserialize, Serialize};

use crate::sema::types::Ty;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TeaStoreParams {
    pub required_response_time_s: f64,
    pub cache_search_time_s: f64,
    pub db_req_time_s: f64,
    pub cache_max_size: i64,
    pub cache_min_size: i64,
    pub db_size: i64,
    #[serde(alias = "P")]
    pub pid_p: f64,
    #[serde(alias = "I")]
    pub pid_i: f64,
    #[serde(alias = "D")]
    pub pid_d: f64,
    /// Integrate the error over measured seconds instead of rounds.
    pub pid_integrate_seconds: bool,
}

impl Default for TeaStoreParams {
    fn default() -> Self {
        TeaStoreParams {
            required_response_time_s: 4.0,
            cache_search_time_s: 0.3,
            db_req_time_s: 2.0,
            cache_max_size: 100,
            cache_min_size: 20,
            db_size: 40,
            pid_p: -1.0,
            pid_i: -0.01,
            pid_d: 0.0,
            pid_integrate_seconds: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Float,
    Int,
    Bool,
}

const SCHEMA: [(&str, Kind); 10] = [
    ("required_response_time_s", Kind::Float),
    ("cache_search_time_s", Kind::Float),
    ("db_req_time_s", Kind::Float),
    ("cache_max_size", Kind::Int),
    ("cache_min_size", Kind::Int),
    ("db_size", Kind::Int),
    ("pid_p", Kind::Float),
    ("pid_i", Kind::Float),
    ("pid_d", Kind::Float),
    ("pid_integrate_seconds", Kind::Bool),
];

fn canonical(name: &str) -> &str {
    match name {
        "P" => "pid_p",
        "I" => "pid_i",
        "D" => "pid_d",
        other => other,
    }
}

fn kind_of(name: &str) -> Option<Kind> {
    let name = canonical(name);
    SCHEMA.iter().find(|(n, _)| *n == name).map(|(_, k)| *k)
}

/// Static type of `param(name)`, or `None` for unknown names.
pub fn param_ty(name: &str) -> Option<Ty> {
    kind_of(name).map(|k| match k {
        Kind::Float => Ty::Float,
        Kind::Int => Ty::Int,
        Kind::Bool => Ty::Bool,
    })
}

pub fn param_names() -> impl Iterator<Item = &'static str> {
    SCHEMA.iter().map(|(n, _)| *n)
}

impl TeaStoreParams {
    pub fn get(&self, name: &str) -> Option<Value> {
        Some(match canonical(name) {
            "required_response_time_s" => Value::Float(self.required_response_time_s),
            "cache_search_time_s" => Value::Float(self.cache_search_time_s),
            "db_req_time_s" => Value::Float(self.db_req_time_s),
            "cache_max_size" => Value::Int(self.cache_max_size),
            "cache_min_size" => Value::Int(self.cache_min_size),
            "db_size" => Value::Int(self.db_size),
            "pid_p" => Value::Float(self.pid_p),
            "pid_i" => Value::Float(self.pid_i),
            "pid_d" => Value::Float(self.pid_d),
            "pid_integrate_seconds" => Value::Bool(self.pid_integrate_seconds),
            _ => return None,
        })
    }

    /// Sets one parameter from its textual form (`--param name=value`).
    pub fn set(&mut self, name: &str, text: &str) -> Result<(), String> {
        let kind = kind_of(name).ok_or_else(|| format!("unknown parameter `{name}`"))?;
        let bad = |what: &str| format!("parameter `{name}` expects {what}, got `{text}`");
        let text = text.trim();
        match kind {
            Kind::Float => {
                let v: f64 = text.parse().map_err(|_| bad("a number"))?;
                if !v.is_finite() {
                    return Err(bad("a finite number"));
                }
                *self.float_mut(canonical(name)) = v;
            }
            Kind::Int => {
                let v: i64 = text.parse().map_err(|_| bad("an integer"))?;
                *self.int_mut(canonical(name)) = v;
            }
            Kind::Bool => {
                self.pid_integrate_seconds = text.parse().map_err(|_| bad("true or false"))?;
            }
        }
        Ok(())
    }

    fn float_mut(&mut self, name: &str) -> &mut f64 {
        match name {
            "required_response_time_s" => &mut self.required_response_time_s,
            "cache_search_time_s" => &mut self.cache_search_time_s,
            "db_req_time_s" => &mut self.db_req_time_s,
            "pid_p" => &mut self.pid_p,
            "pid_i" => &mut self.pid_i,
            _ => &mut self.pid_d,
        }
    }

    fn int_mut(&mut self, name: &str) -> &mut i64 {
        match name {
            "cache_max_size" => &mut self.cache_max_size,
            "cache_min_size" => &mut self.cache_min_size,
            _ => &mut self.db_size,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.cache_min_size > self.cache_max_size {
            return Err(format!(
                "cache_min_size ({}) exceeds cache_max_size ({})",
                self.cache_min_size, self.cache_max_size
            ));
        }
        if self.db_size < 1 {
            return Err(format!("db_size must be at least 1, got {}", self.db_size));
        }
        if self.db_req_time_s <= self.cache_search_time_s {
            return Err(format!(
                "db_req_time_s ({}) must exceed cache_search_time_s ({})",
                self.db_req_time_s, self.cache_search_time_s
            ));
        }
        let floats = [
            self.required_response_time_s,
            self.cache_search_time_s,
            self.db_req_time_s,
            self.pid_p,
            self.pid_i,
            self.pid_d,
        ];
        if floats.iter().any(|f| !f.is_finite()) {
            return Err("parameters must be finite".to_string());
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<TeaStoreParams, String> {
        let p: TeaStoreParams = serde_json::from_str(text).map_err(|e| e.to_string())?;
        p.validate()?;
        Ok(p)
    }
}
