//! Semantic analysis: checked functions plus the wired system model.

pub mod check;
pub mod hw;
pub mod system;
pub mod types;

use std::collections::{BTreeMap, HashMap};

pub use check::{BlockDef, BlockKind, Port};
pub use hw::{parse_descriptor, HardwareDescriptor};
pub use system::{
    resolve_plugs, validate_links, InstanceDef, MergeGroup, PlugAttachment, PlugKind, PortRef,
    Source, SplitGroup, SystemModel, Wire,
};
pub use types::Ty;

use crate::diag::Diagnostic;
use crate::frontend::ast::Program;

/// Resolves and checks `program`. `hw_files` maps each import alias to the
/// contents of the file it names.
pub fn analyze(
    program: &Program,
    hw_files: &BTreeMap<String, String>,
) -> Result<SystemModel, Vec<Diagnostic>> {
    let (checked, mut diags) = check::check_functions(program);
    let mut model = SystemModel {
        has_system: program.system.is_some(),
        functions: checked.functions,
        block_defs: checked.blocks,
        ..SystemModel::default()
    };

    let mut descriptors = BTreeMap::new();
    for imp in &program.imports {
        let alias = &imp.alias.name;
        match hw_files.get(alias) {
            None => diags.push(
                Diagnostic::error(
                    "E-HW",
                    format!("hardware descriptor `{}` for `{alias}` not found", imp.path),
                )
                .at(imp.loc.0),
            ),
            Some(text) => match parse_descriptor(text) {
                Ok(d) => {
                    descriptors.insert(alias.clone(), d);
                }
                Err(msg) => diags.push(
                    Diagnostic::error(
                        "E-HW",
                        format!("malformed hardware descriptor `{}`: {msg}", imp.path),
                    )
                    .at(imp.loc.0),
                ),
            },
        }
    }

    let Some(sys) = &program.system else {
        return if diags.is_empty() { Ok(model) } else { Err(diags) };
    };
    let mut spans = HashMap::new();
    system::build(sys, &mut model, &mut spans, &mut diags);

    for inst in &model.instances {
        if model.kind_of(&inst.name) != Some(BlockKind::Physical) {
            continue;
        }
        match descriptors.get(&inst.block) {
            Some(d) => {
                model.hardware.insert(inst.block.clone(), d.clone());
            }
            None if hw_files.contains_key(&inst.block) => {}
            None => {
                let d = Diagnostic::error(
                    "E-HW",
                    format!(
                        "physical instance `{}` has no hardware descriptor (add `import \"<file>\" as {};`)",
                        inst.name, inst.block
                    ),
                );
                diags.push(match spans.get(&inst.name) {
                    Some(s) => d.at(*s),
                    None => d,
                });
            }
        }
    }

    diags.extend(system::check_wired(&mut model, &spans));
    if let Err(ds) = system::validate_links_at(&model, &spans) {
        diags.extend(ds);
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    system::resolve_plugs_at(model, &spans)
}
