use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use chips::automata::{assign_initial, build_network, Network};
use chips::corpus;
use chips::frontend::{self, Program};
use chips::sema::{self, SystemModel};
use chips::{Diagnostic, SourceMap};

use crate::{EXIT_DIAG, EXIT_USAGE};

pub struct Loaded {
    pub map: SourceMap,
    pub model: SystemModel,
    /// Built-in corpus model name, if one was selected instead of files.
    pub builtin: Option<String>,
}

/// A single argument naming a built-in model rather than an existing file.
pub fn builtin_name(paths: &[PathBuf]) -> Option<String> {
    match paths {
        [p] if !p.exists() => {
            let name = p.to_str()?;
            corpus::builtin_source(name).map(|_| name.to_string())
        }
        _ => None,
    }
}

fn print_all(map: &SourceMap, diags: &[Diagnostic], err: &mut dyn Write) {
    for d in diags {
        let _ = writeln!(err, "{}", map.render(d));
    }
}

/// Reads every descriptor named by an import, relative to the importing file.
fn read_descriptors(map: &SourceMap, program: &Program) -> BTreeMap<String, String> {
    let mut hw = BTreeMap::new();
    for imp in &program.imports {
        let from = Path::new(map.name(imp.loc.0.file));
        let path = from.parent().unwrap_or(Path::new(".")).join(&imp.path);
        if let Ok(text) = std::fs::read_to_string(&path) {
            hw.insert(imp.alias.name.clone(), text);
        }
    }
    hw
}

fn builtin_program(name: &str, providers: Option<usize>, map: &mut SourceMap) -> Result<Program, Vec<Diagnostic>> {
    let text = match (name, providers) {
        ("teastore", None) => corpus::TEASTORE_CHIPS.to_string(),
        (_, Some(n)) => corpus::multi_provider_source(n).map_err(|d| vec![d])?,
        _ => corpus::builtin_source(name).expect("known builtin").to_string(),
    };
    frontend::parse_source(map, &format!("{name}.chips"), &text)
}

pub fn load_model(paths: &[PathBuf], err: &mut dyn Write) -> Result<Loaded, i32> {
    load_model_with(paths, None, err)
}

/// Parses and analyzes `paths`. `providers` selects the multi-provider
/// variant when a built-in TeaStore model is named.
pub fn load_model_with(
    paths: &[PathBuf],
    providers: Option<usize>,
    err: &mut dyn Write,
) -> Result<Loaded, i32> {
    let mut map = SourceMap::new();
    let builtin = builtin_name(paths);
    let (program, hw) = if let Some(name) = &builtin {
        match builtin_program(name, providers, &mut map) {
            Ok(p) => {
                let hw = corpus::hw_files_for(&p);
                (p, hw)
            }
            Err(ds) => {
                print_all(&map, &ds, err);
                return Err(if ds.iter().any(|d| d.code == "E-PARAM") { EXIT_USAGE } else { EXIT_DIAG });
            }
        }
    } else {
        if providers.is_some() {
            let _ = writeln!(err, "error: --providers applies to the built-in teastore model only");
            return Err(EXIT_USAGE);
        }
        let mut files = Vec::new();
        for p in paths {
            match std::fs::read_to_string(p) {
                Ok(text) => files.push((p.to_string_lossy().into_owned(), text)),
                Err(e) => {
                    let _ = writeln!(err, "error: cannot read {}: {e}", p.display());
                    return Err(EXIT_USAGE);
                }
            }
        }
        let parsed = frontend::parse_sources(
            &mut map,
            files.iter().map(|(n, t)| (n.as_str(), t.as_str())),
        );
        match parsed {
            Ok(p) => {
                let hw = read_descriptors(&map, &p);
                (p, hw)
            }
            Err(ds) => {
                print_all(&map, &ds, err);
                return Err(EXIT_DIAG);
            }
        }
    };
    match sema::analyze(&program, &hw) {
        Ok(model) => {
            print_all(&map, &model.warnings, err);
            Ok(Loaded {
                map,
                model,
                builtin,
            })
        }
        Err(ds) => {
            print_all(&map, &ds, err);
            Err(EXIT_DIAG)
        }
    }
}

/// The corpus kickstarter when the model has it, else the first instance.
pub fn default_kickstarter(model: &SystemModel) -> Option<String> {
    if model.instance(corpus::KICKSTARTER).is_some() {
        return Some(corpus::KICKSTARTER.to_string());
    }
    model.instances.first().map(|i| i.name.clone())
}

pub fn lower(model: &SystemModel, kickstarter: Option<&str>) -> Result<Network, Diagnostic> {
    let network = build_network(model)?;
    let kick = match kickstarter {
        Some(k) => k.to_string(),
        None => default_kickstarter(model).unwrap_or_default(),
    };
    assign_initial(network, &kick)
}
