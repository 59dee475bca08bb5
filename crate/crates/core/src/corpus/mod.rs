//! The Adaptable TeaStore reference model, its parameters and scenario.

pub mod action;
pub mod multi;
pub mod params;
pub mod reference;
pub mod scenario;

use std::collections::BTreeMap;

use crate::automata::{assign_initial, build_network, Network};
use crate::diag::{Diagnostic, SourceMap};
use crate::frontend::{self, Program};
use crate::runtime::{init_run, Probe, SimConfig, Trace, TraceLayout};
use crate::sema::{self, SystemModel};

pub use action::ActionRequest;
pub use multi::{multi_provider_model, multi_provider_source};
pub use params::TeaStoreParams;
pub use scenario::{Phase, PhaseLength, Scenario};

pub const VERSION: &str = "v1";

pub const TEASTORE_CHIPS: &str = include_str!("../../corpus/v1/teastore.chips");
pub const TEASTORE_MULTI_CHIPS: &str = include_str!("../../corpus/v1/teastore_multi.chips");
pub const SERVER_JSON: &str = include_str!("../../corpus/v1/server.json");
pub const USER_COMPUTER_JSON: &str = include_str!("../../corpus/v1/user_computer.json");
pub const SCENARIO_DEFAULT_JSON: &str = include_str!("../../corpus/v1/scenario.default.json");
pub const PARAMS_DEFAULT_JSON: &str = include_str!("../../corpus/v1/params.default.json");

/// Instance started past its input phase.
pub const KICKSTARTER: &str = "user_instance";

/// Descriptor file contents by file name, as referenced from the corpus imports.
pub fn descriptor_files() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("server.json".to_string(), SERVER_JSON.to_string()),
        ("user_computer.json".to_string(), USER_COMPUTER_JSON.to_string()),
    ])
}

/// Maps each import alias of `program` to the matching corpus descriptor.
pub fn hw_files_for(program: &Program) -> BTreeMap<String, String> {
    let files = descriptor_files();
    program
        .imports
        .iter()
        .filter_map(|imp| {
            files
                .get(&imp.path)
                .map(|text| (imp.alias.name.clone(), text.clone()))
        })
        .collect()
}

fn parse_corpus(name: &str, text: &str) -> Program {
    let mut map = SourceMap::default();
    match frontend::parse_source(&mut map, name, text) {
        Ok(p) => p,
        Err(ds) => panic!("corpus file {name} does not parse:\n{}", map.render_all(&ds)),
    }
}

/// The shipped single-provider model.
pub fn teastore_model() -> Program {
    parse_corpus("teastore.chips", TEASTORE_CHIPS)
}

/// Parses and analyzes a corpus program against the corpus descriptors.
pub fn analyze_corpus(program: &Program) -> Result<SystemModel, Vec<Diagnostic>> {
    sema::analyze(program, &hw_files_for(program))
}

/// Source text and descriptors of a built-in model name: `teastore` or
/// `teastore-multi` (two providers).
pub fn builtin_source(name: &str) -> Option<&'static str> {
    match name {
        "teastore" => Some(TEASTORE_CHIPS),
        "teastore-multi" | "teastore_multi" => Some(TEASTORE_MULTI_CHIPS),
        _ => None,
    }
}

/// Provider instance names of the single-provider model (`providers == 0`)
/// or of the `n`-provider variant.
fn provider_names(providers: usize) -> Vec<String> {
    if providers == 0 {
        vec!["ip_instance".to_string()]
    } else {
        (1..=providers).map(multi::provider_instance).collect()
    }
}

/// Trace columns of the TeaStore model. A round ends when the web page
/// service has assembled the page, after the controller has run.
/// `providers == 0` selects the single-provider model.
pub fn trace_layout(providers: usize) -> TraceLayout {
    let ips = provider_names(providers);
    TraceLayout {
        marker: "wps_instance".into(),
        images_requested: Probe::new("tap_instance", "images_requested"),
        cache_misses: Probe::new("tap_instance", "misses"),
        response_time: Probe::new("tap_instance", "response_time"),
        error: Probe::new("pid_instance", "error"),
        integral: Probe::new("pid_instance", "integral"),
        cache_size: Probe::new(ips[0].clone(), "cache_size"),
        user_connected: Probe::new("validator_instance", "connected"),
        caches: ips.iter().map(|ip| Probe::new(ip.clone(), "cache")).collect(),
    }
}

/// The TeaStore program: single provider for `providers == 0`, otherwise
/// the multi-provider variant.
pub fn teastore_program(providers: usize) -> Result<Program, Diagnostic> {
    if providers == 0 {
        Ok(teastore_model())
    } else {
        multi_provider_model(providers)
    }
}

/// Analyzed and lowered TeaStore network with the default kickstarter.
pub fn teastore_network(providers: usize) -> Result<Network, Vec<Diagnostic>> {
    let program = teastore_program(providers).map_err(|d| vec![d])?;
    let model = analyze_corpus(&program)?;
    let network = build_network(&model).map_err(|d| vec![d])?;
    assign_initial(network, KICKSTARTER).map_err(|d| vec![d])
}

/// Runs the TeaStore experiment under `config`.
pub fn simulate(providers: usize, config: &SimConfig) -> Result<Trace, Diagnostic> {
    let mut network = teastore_network(providers).map_err(|mut ds| ds.remove(0))?;
    network.kickstarter = Some(config.kickstarter.clone());
    let mut state = init_run(network, config.clone(), Some(&trace_layout(providers)))?;
    state.run()?;
    Ok(state.trace)
}
