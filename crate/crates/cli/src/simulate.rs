use std::io::Write;
use std::path::PathBuf;

use chips::automata::Network;
use chips::corpus::{self, Scenario};
use chips::runtime::trace::{encode, TraceLayout};
use chips::runtime::{init_run, SimConfig, TraceFormat};

use crate::config::{apply_param_flags, apply_params, read_json, Effective, FileConfig};
use crate::load::{default_kickstarter, load_model_with, lower};
use crate::report::{mean, phase_ranges};
use crate::{SimulateArgs, EXIT_DEADLOCK, EXIT_DIAG, EXIT_OK, EXIT_USAGE, EXIT_XFORM};

fn usage(err: &mut dyn Write, msg: impl std::fmt::Display) -> i32 {
    let _ = writeln!(err, "error: {msg}");
    EXIT_USAGE
}

/// Whether every probe of `layout` names a variable of `network`.
fn layout_fits(network: &Network, layout: &TraceLayout) -> bool {
    let mut probes = vec![
        &layout.images_requested,
        &layout.cache_misses,
        &layout.response_time,
        &layout.error,
        &layout.integral,
        &layout.cache_size,
        &layout.user_connected,
    ];
    probes.extend(&layout.caches);
    network.index_of(&layout.marker).is_some()
        && probes.iter().all(|p| {
            network
                .automaton(&p.automaton)
                .is_some_and(|a| a.variables.iter().any(|v| v.name == p.var))
        })
}

struct Resolved {
    sim: SimConfig,
    kickstarter_set: bool,
    providers: Option<usize>,
    format: TraceFormat,
    cache_dump: Option<String>,
}

fn resolve(a: &SimulateArgs) -> Result<Resolved, String> {
    let mut sim = SimConfig::default();
    let file: FileConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => FileConfig::default(),
    };
    file.apply(&mut sim)?;
    if let Some(p) = &a.params {
        let map: serde_json::Map<String, serde_json::Value> = read_json(p)?;
        apply_params(&mut sim.params, &map)?;
    }
    if let Some(p) = &a.scenario {
        let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
        sim.scenario = Scenario::from_json(&text).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    apply_param_flags(&mut sim.params, &a.param)?;
    if let Some(s) = a.seed {
        sim.seed = s;
    }
    if let Some(r) = a.rounds {
        sim.max_rounds = r;
    }
    if let Some(k) = &a.kickstarter {
        sim.kickstarter = k.clone();
    }
    if let Some(t) = &a.trace {
        sim.trace_path = Some(t.to_string_lossy().into_owned());
    }
    sim.validate().map_err(|d| d.message)?;
    let format = match a.trace_format.as_deref() {
        Some("jsonl") => TraceFormat::Jsonl,
        Some(_) => TraceFormat::Csv,
        None => file.trace_format.unwrap_or_default(),
    };
    let providers = a.providers.map(|n| n as usize).or(file.providers);
    if providers == Some(0) {
        return Err("providers must be at least 1".into());
    }
    Ok(Resolved {
        kickstarter_set: a.kickstarter.is_some() || file.kickstarter.is_some(),
        providers,
        format,
        cache_dump: a
            .cache_dump
            .as_ref()
            .map(|p| p.to_string_lossy().into_owned())
            .or(file.cache_dump),
        sim,
    })
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut r = match resolve(a) {
        Ok(r) => r,
        Err(msg) => return usage(err, msg),
    };
    let paths = if a.paths.is_empty() {
        vec![PathBuf::from("teastore")]
    } else {
        a.paths.clone()
    };
    let loaded = match load_model_with(&paths, r.providers, err) {
        Ok(l) => l,
        Err(code) => return code,
    };
    if !r.kickstarter_set {
        r.sim.kickstarter = default_kickstarter(&loaded.model).unwrap_or_default();
    }
    let network = match lower(&loaded.model, Some(&r.sim.kickstarter)) {
        Ok(n) => n,
        Err(d) => {
            let _ = writeln!(err, "{}", loaded.map.render(&d));
            return EXIT_XFORM;
        }
    };
    let layout = match (&loaded.builtin, r.providers) {
        (Some(_), Some(n)) => corpus::trace_layout(n),
        (Some(name), None) if name != "teastore" => corpus::trace_layout(2),
        _ => corpus::trace_layout(0),
    };
    let layout = layout_fits(&network, &layout).then_some(layout);
    let model_name = loaded
        .builtin
        .clone()
        .unwrap_or_else(|| paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(" "));

    let mut state = match init_run(network, r.sim.clone(), layout.as_ref()) {
        Ok(s) => s,
        Err(d) if d.code == "E-CONFIG" => return usage(err, d),
        Err(d) => {
            let _ = writeln!(err, "{d}");
            return EXIT_DIAG;
        }
    };
    let outcome = state.run().map(|_| ());
    let trace = &state.trace;

    let effective = Effective {
        model: model_name,
        providers: r.providers,
        trace_format: r.format,
        cache_dump: r.cache_dump.clone(),
        sim: r.sim.clone(),
    };
    if let Some(path) = &r.sim.trace_path {
        let header = serde_json::to_string(&effective).expect("config serializes");
        let text = format!("# config {header}\n{}", encode(&trace.records, r.format));
        if let Err(e) = std::fs::write(path, text) {
            return usage(err, format!("cannot write {path}: {e}"));
        }
    }
    if let Some(path) = &r.cache_dump {
        let mut text = String::new();
        for snap in &trace.caches {
            text.push_str(&serde_json::to_string(snap).expect("snapshot serializes"));
            text.push('\n');
        }
        if let Err(e) = std::fs::write(path, text) {
            return usage(err, format!("cannot write {path}: {e}"));
        }
    }

    if let Err(d) = outcome {
        let _ = writeln!(err, "{d}");
        return if d.code == "E-DEADLOCK" { EXIT_DEADLOCK } else { EXIT_DIAG };
    }

    let recs = &trace.records;
    let mut line = format!("rounds={} steps={}", state.round_index, state.steps);
    if let Some(last) = recs.last() {
        let phases = phase_ranges(recs, Some(&r.sim.scenario));
        let means: Vec<String> = phases
            .iter()
            .map(|range| format!("{:.3}", mean(recs[range.clone()].iter().map(|r| r.response_time_s))))
            .collect();
        line.push_str(&format!(
            " sim_time_s={:.1} mean_response_s=[{}] final_cache_size={}",
            last.sim_time_s,
            means.join(","),
            last.cache_size
        ));
    }
    let _ = writeln!(out, "{line}");
    EXIT_OK
}
