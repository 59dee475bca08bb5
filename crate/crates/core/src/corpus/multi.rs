//! Multi-provider variant: `n` image providers behind a modulo-sharding
//! splitplug, with their outputs merged before the trace tap.

use std::fmt::Write;

use crate::diag::{Diagnostic, SourceMap};
use crate::frontend::{self, Program};

use super::TEASTORE_CHIPS;

/// Instance name of provider `k` (1-based) in the multi-provider model.
pub fn provider_instance(k: usize) -> String {
    format!("ip_instance{k}")
}

/// Source text of the `n`-provider model. Function declarations are those of
/// the single-provider corpus; only the SYSTEM section differs.
pub fn multi_provider_source(n: usize) -> Result<String, Diagnostic> {
    if n < 1 {
        return Err(Diagnostic::error(
            "E-PARAM",
            format!("provider count must be at least 1, got {n}"),
        ));
    }
    let cut = TEASTORE_CHIPS
        .find("SYSTEM {")
        .expect("corpus has a SYSTEM section");
    let mut out = TEASTORE_CHIPS[..cut].to_string();
    let ips: Vec<String> = (1..=n).map(provider_instance).collect();

    out.push_str("SYSTEM {\n");
    let mut instances = vec![
        ("user", "user_instance".to_string()),
        ("user_computer", "computer_instance".to_string()),
        ("server", "server_instance".to_string()),
        ("interpretation_module", "im_instance".to_string()),
        ("request_validator", "validator_instance".to_string()),
    ];
    instances.extend(ips.iter().map(|ip| ("image_provider", ip.clone())));
    instances.extend([
        ("trace_tap", "tap_instance".to_string()),
        ("pid_controller", "pid_instance".to_string()),
        ("web_page_service", "wps_instance".to_string()),
    ]);
    for (ty, name) in &instances {
        writeln!(out, "  {ty} {name};").unwrap();
    }
    out.push('\n');
    writeln!(out, "  link user_instance to computer_instance;").unwrap();
    for (_, name) in instances.iter().skip(3) {
        writeln!(out, "  link {name} to server_instance;").unwrap();
    }
    out.push('\n');
    out.push_str(
        "  computer_instance.in(user_instance.out[0], user_instance.out[1], user_instance.out[2]);\n\
         \x20 server_instance.in(computer_instance.out[0], computer_instance.out[1], computer_instance.out[2]);\n\
         \x20 im_instance.in(server_instance.out[0], server_instance.out[1]);\n\
         \x20 validator_instance.in(server_instance.out[0]);\n",
    );
    for ip in &ips {
        writeln!(out, "  {ip}.in(im_instance.out[0], server_instance.out[2]);").unwrap();
    }
    for ip in &ips {
        writeln!(
            out,
            "  tap_instance.in({ip}.out[0], {ip}.out[1], {ip}.out[2], im_instance.out[1]);"
        )
        .unwrap();
    }
    out.push_str(
        "  pid_instance.in(im_instance.out[2], tap_instance.out[0]);\n\
         \x20 wps_instance.in(validator_instance.out, tap_instance.out[1], pid_instance.out);\n\
         \x20 user_instance.in(wps_instance.out[0], wps_instance.out[1]);\n\n",
    );
    writeln!(out, "  splitplug(im_instance.out[0], shard_by_residue);").unwrap();
    for (port, f) in [(0, "slowest_response"), (1, "all_done"), (2, "total_misses")] {
        for ip in &ips {
            writeln!(out, "  mergeplug({ip}.out[{port}], {f});").unwrap();
        }
    }
    out.push_str("}\n");
    Ok(out)
}

/// The `n`-provider model as a parsed program.
pub fn multi_provider_model(n: usize) -> Result<Program, Diagnostic> {
    let text = multi_provider_source(n)?;
    let mut map = SourceMap::default();
    frontend::parse_source(&mut map, "teastore_multi.chips", &text).map_err(|ds| {
        panic!("generated multi-provider model does not parse:\n{}", map.render_all(&ds))
    })
}
