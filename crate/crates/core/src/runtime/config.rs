use serde::{Deserialize, Serialize};

use crate::corpus::{Scenario, TeaStoreParams};
use crate::diag::Diagnostic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub seed: u64,
    pub params: TeaStoreParams,
    pub scenario: Scenario,
    pub max_rounds: u64,
    pub kickstarter: String,
    pub trace_path: Option<String>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 42,
            params: TeaStoreParams::default(),
            scenario: Scenario::default(),
            max_rounds: 1000,
            kickstarter: crate::corpus::KICKSTARTER.to_string(),
            trace_path: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), Diagnostic> {
        let bad = |msg: String| Err(Diagnostic::error("E-CONFIG", msg));
        if self.max_rounds < 1 {
            return bad("max_rounds must be at least 1".into());
        }
        if let Err(msg) = self.params.validate() {
            return bad(msg);
        }
        if let Err(msg) = self.scenario.validate() {
            return bad(msg);
        }
        Ok(())
    }
}
