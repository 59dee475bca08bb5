//! Deterministic execution of automaton networks.

pub mod builtins;
pub mod config;
pub mod engine;
pub mod eval;
pub mod prng;
pub mod trace;

pub use config::SimConfig;
pub use engine::{init_run, BlockHarness, RunState, Step, StepEvent};
pub use prng::Prng;
pub use trace::{Probe, Trace, TraceFormat, TraceLayout, TraceRecord};
