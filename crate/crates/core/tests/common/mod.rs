#![allow(dead_code)]

use std::collections::BTreeMap;

use chips::automata::{assign_initial, build_network, Network};
use chips::frontend::{self, Program};
use chips::sema::{self, SystemModel};
use chips::{Diagnostic, SourceMap};

pub const HOST_JSON: &str =
    r#"{"name":"host","processor_count":1,"memory_bytes":1024,"clock_hz":1000,"peripherals":[]}"#;

pub fn parse(text: &str) -> Program {
    let mut map = SourceMap::new();
    match frontend::parse_source(&mut map, "test.chips", text) {
        Ok(p) => p,
        Err(ds) => panic!("{}", map.render_all(&ds)),
    }
}

/// Every import alias resolves to a minimal valid descriptor.
pub fn hw_for(program: &Program) -> BTreeMap<String, String> {
    program
        .imports
        .iter()
        .map(|i| (i.alias.name.clone(), HOST_JSON.to_string()))
        .collect()
}

pub fn analyze(text: &str) -> Result<SystemModel, Vec<Diagnostic>> {
    let p = parse(text);
    sema::analyze(&p, &hw_for(&p))
}

pub fn analyze_ok(text: &str) -> SystemModel {
    match analyze(text) {
        Ok(m) => m,
        Err(ds) => {
            let mut map = SourceMap::new();
            map.add("test.chips", text);
            panic!("{}", map.render_all(&ds))
        }
    }
}

pub fn codes(text: &str) -> Vec<&'static str> {
    match analyze(text) {
        Ok(_) => vec![],
        Err(ds) => ds.iter().map(|d| d.code).collect(),
    }
}

pub fn network(text: &str, kickstarter: &str) -> Network {
    let model = analyze_ok(text);
    assign_initial(build_network(&model).unwrap(), kickstarter).unwrap()
}
