//! User action record and its bit-packed integer form.
//!
//! Bit 0 is the validity bit; bits 1..=3 carry isHeavyRequest,
//! requestPrivatePage and providesRightAuthData.

use serde::{Deserialize, Serialize};

use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ActionRequest {
    pub is_heavy_request: bool,
    pub request_private_page: bool,
    pub provides_right_auth_data: bool,
}

const VALID: i64 = 0x1;
const HEAVY: i64 = 0x2;
const PRIVATE: i64 = 0x4;
const AUTH: i64 = 0x8;

impl ActionRequest {
    pub fn pack(self) -> i64 {
        let mut v = VALID;
        if self.is_heavy_request {
            v |= HEAVY;
        }
        if self.request_private_page {
            v |= PRIVATE;
        }
        if self.provides_right_auth_data {
            v |= AUTH;
        }
        v
    }

    /// `None` if the validity bit is clear or unknown bits are set.
    pub fn unpack(v: i64) -> Option<ActionRequest> {
        if v & VALID == 0 || v & !(VALID | HEAVY | PRIVATE | AUTH) != 0 {
            return None;
        }
        Some(ActionRequest {
            is_heavy_request: v & HEAVY != 0,
            request_private_page: v & PRIVATE != 0,
            provides_right_auth_data: v & AUTH != 0,
        })
    }

    pub fn to_value(self) -> Value {
        Value::Record(
            [
                ("isHeavyRequest", self.is_heavy_request),
                ("requestPrivatePage", self.request_private_page),
                ("providesRightAuthData", self.provides_right_auth_data),
            ]
            .into_iter()
            .map(|(k, b)| (k.to_string(), Value::Bool(b)))
            .collect(),
        )
    }

    pub fn from_value(v: &Value) -> Option<ActionRequest> {
        let r = v.as_record()?;
        let get = |k: &str| r.get(k).and_then(Value::as_bool);
        Some(ActionRequest {
            is_heavy_request: get("isHeavyRequest")?,
            request_private_page: get("requestPrivatePage")?,
            provides_right_auth_data: get("providesRightAuthData")?,
        })
    }
}
