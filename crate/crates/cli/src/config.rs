//! Simulate options from JSON files and flags. Flags override files, files
//! override defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use chips::corpus::{Scenario, TeaStoreParams};
use chips::runtime::{SimConfig, TraceFormat};

/// JSON equivalent of the simulate flags; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    #[serde(alias = "max_rounds")]
    pub rounds: Option<u64>,
    /// Partial parameter map applied over the defaults.
    pub params: Option<serde_json::Map<String, serde_json::Value>>,
    pub scenario: Option<Scenario>,
    pub kickstarter: Option<String>,
    pub trace: Option<String>,
    pub trace_format: Option<TraceFormat>,
    pub providers: Option<usize>,
    pub cache_dump: Option<String>,
}

/// The configuration a run actually used; echoed into the trace header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Effective {
    pub model: String,
    pub providers: Option<usize>,
    pub trace_format: TraceFormat,
    pub cache_dump: Option<String>,
    #[serde(flatten)]
    pub sim: SimConfig,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Applies a flat JSON parameter map key by key.
pub fn apply_params(
    params: &mut TeaStoreParams,
    map: &serde_json::Map<String, serde_json::Value>,
) -> Result<(), String> {
    for (k, v) in map {
        let text = match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        params.set(k, &text)?;
    }
    Ok(())
}

/// Applies `name=value` overrides.
pub fn apply_param_flags(params: &mut TeaStoreParams, flags: &[String]) -> Result<(), String> {
    for f in flags {
        let (k, v) = f
            .split_once('=')
            .ok_or_else(|| format!("--param expects NAME=VALUE, got `{f}`"))?;
        params.set(k.trim(), v)?;
    }
    Ok(())
}

impl FileConfig {
    /// Overlays this file onto `base`.
    pub fn apply(&self, sim: &mut SimConfig) -> Result<(), String> {
        if let Some(s) = self.seed {
            sim.seed = s;
        }
        if let Some(r) = self.rounds {
            sim.max_rounds = r;
        }
        if let Some(p) = &self.params {
            apply_params(&mut sim.params, p)?;
        }
        if let Some(s) = &self.scenario {
            sim.scenario = s.clone();
        }
        if let Some(k) = &self.kickstarter {
            sim.kickstarter = k.clone();
        }
        if let Some(t) = &self.trace {
            sim.trace_path = Some(t.clone());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overlays_defaults() {
        let f: FileConfig = serde_json::from_str(
            r#"{"seed": 7, "max_rounds": 12, "params": {"P": -2, "db_size": "30"}}"#,
        )
        .unwrap();
        let mut sim = SimConfig::default();
        f.apply(&mut sim).unwrap();
        assert_eq!((sim.seed, sim.max_rounds), (7, 12));
        assert_eq!(sim.params.pid_p, -2.0);
        assert_eq!(sim.params.db_size, 30);
        assert_eq!(sim.params.cache_min_size, 20);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"sed": 1}"#).is_err());
        let mut p = TeaStoreParams::default();
        assert!(apply_param_flags(&mut p, &["nope=1".into()]).is_err());
        assert!(apply_param_flags(&mut p, &["db_size".into()]).is_err());
        apply_param_flags(&mut p, &["db_size=12".into()]).unwrap();
        assert_eq!(p.db_size, 12);
    }
}
