//! Hardware descriptor files.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardwareDescriptor {
    pub name: String,
    pub processor_count: u64,
    pub memory_bytes: u64,
    pub clock_hz: u64,
    #[serde(default)]
    pub peripherals: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDescriptor {
    name: String,
    processor_count: i64,
    memory_bytes: i64,
    clock_hz: i64,
    #[serde(default)]
    peripherals: Vec<String>,
}

/// Parses and validates a descriptor. Only presence and positivity are
/// checked.
pub fn parse_descriptor(text: &str) -> Result<HardwareDescriptor, String> {
    let raw: RawDescriptor = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let positive = |field: &str, v: i64| -> Result<u64, String> {
        if v > 0 {
            Ok(v as u64)
        } else {
            Err(format!("`{field}` must be positive, got {v}"))
        }
    };
    if raw.name.trim().is_empty() {
        return Err("`name` must not be empty".to_string());
    }
    Ok(HardwareDescriptor {
        processor_count: positive("processor_count", raw.processor_count)?,
        memory_bytes: positive("memory_bytes", raw.memory_bytes)?,
        clock_hz: positive("clock_hz", raw.clock_hz)?,
        name: raw.name,
        peripherals: raw.peripherals,
    })
}
