//! User browsing scenario: a sequence of phases with a fixed number of
//! images per request.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndMarker {
    UntilEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhaseLength {
    Rounds(u64),
    UntilEnd(EndMarker),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub images_per_request: i64,
    pub rounds: PhaseLength,
}

impl Phase {
    pub fn finite(images_per_request: i64, rounds: u64) -> Phase {
        Phase {
            images_per_request,
            rounds: PhaseLength::Rounds(rounds),
        }
    }

    pub fn until_end(images_per_request: i64) -> Phase {
        Phase {
            images_per_request,
            rounds: PhaseLength::UntilEnd(EndMarker::UntilEnd),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub phases: Vec<Phase>,
}

impl Default for Scenario {
    /// 300 wandering requests of two images, then six images per request.
    fn default() -> Self {
        Scenario {
            phases: vec![Phase::finite(2, 300), Phase::until_end(6)],
        }
    }
}

impl Scenario {
    pub fn constant(images_per_request: i64) -> Scenario {
        Scenario {
            phases: vec![Phase::until_end(images_per_request)],
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.phases.is_empty() {
            return Err("scenario needs at least one phase".to_string());
        }
        for (i, p) in self.phases.iter().enumerate() {
            if p.images_per_request < 0 {
                return Err(format!("phase {i}: images_per_request must be >= 0"));
            }
            match p.rounds {
                PhaseLength::UntilEnd(_) if i + 1 != self.phases.len() => {
                    return Err(format!("phase {i}: only the last phase may be until_end"));
                }
                PhaseLength::Rounds(0) => {
                    return Err(format!("phase {i}: rounds must be positive"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Scenario, String> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| e.to_string())?;
        s.validate()?;
        Ok(s)
    }

    /// Zero-based phase index of 1-based request `round`. Requests past the
    /// end of a fully finite scenario stay in the last phase.
    pub fn phase_index(&self, round: u64) -> usize {
        let mut end = 0u64;
        for (i, p) in self.phases.iter().enumerate() {
            match p.rounds {
                PhaseLength::UntilEnd(_) => return i,
                PhaseLength::Rounds(n) => {
                    end = end.saturating_add(n);
                    if round <= end {
                        return i;
                    }
                }
            }
        }
        self.phases.len().saturating_sub(1)
    }

    pub fn images_for_round(&self, round: u64) -> i64 {
        self.phases
            .get(self.phase_index(round))
            .map_or(0, |p| p.images_per_request)
    }

    /// First round of each phase.
    pub fn phase_starts(&self) -> Vec<u64> {
        let mut starts = Vec::new();
        let mut next = 1u64;
        for p in &self.phases {
            starts.push(next);
            if let PhaseLength::Rounds(n) = p.rounds {
                next = next.saturating_add(n);
            }
        }
        starts
    }
}
