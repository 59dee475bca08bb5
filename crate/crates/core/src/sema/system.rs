//! SYSTEM section resolution: instances, wires, links and plugs.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, Span};
use crate::frontend::ast::{self, SignalRef};
use crate::ir::Function;

use super::check::{BlockDef, BlockKind};
use super::hw::HardwareDescriptor;
use super::types::Ty;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortRef {
    pub instance: String,
    pub port: usize,
}

impl PortRef {
    pub fn new(instance: impl Into<String>, port: usize) -> PortRef {
        PortRef {
            instance: instance.into(),
            port,
        }
    }
}

impl std::fmt::Display for PortRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}[{}]", self.instance, self.port)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDef {
    pub name: String,
    pub block: String,
}

/// A declared connection from an output port to an input port.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wire {
    pub producer: PortRef,
    pub consumer: PortRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlugKind {
    Split,
    Merge,
}

impl PlugKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlugKind::Split => "split",
            PlugKind::Merge => "merge",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlugDeclaration {
    pub kind: PlugKind,
    pub signal: PortRef,
    pub function: String,
}

/// A resolved plug with its fan degree (fan-out for splits, fan-in for merges).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlugAttachment {
    pub kind: PlugKind,
    pub signal: PortRef,
    pub function: String,
    pub fan: usize,
}

/// A split signal and the consumer ports it feeds, in wiring order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitGroup {
    pub signal: PortRef,
    pub function: String,
    pub consumers: Vec<PortRef>,
}

/// Producers folded into one consumer port, in mergeplug declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeGroup {
    pub consumer: PortRef,
    pub function: String,
    pub producers: Vec<PortRef>,
}

/// Where an input port gets its value after plug resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Direct(PortRef),
    /// Output `index` of split group `group`.
    Split { group: usize, index: usize },
    Merge { group: usize },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SystemModel {
    pub has_system: bool,
    pub functions: BTreeMap<String, Function>,
    pub block_defs: BTreeMap<String, BlockDef>,
    pub instances: Vec<InstanceDef>,
    pub wires: Vec<Wire>,
    /// child instance to parent instance
    pub links: BTreeMap<String, String>,
    pub plug_decls: Vec<PlugDeclaration>,
    pub plugs: Vec<PlugAttachment>,
    pub splits: Vec<SplitGroup>,
    pub merges: Vec<MergeGroup>,
    /// physical block name to descriptor
    pub hardware: BTreeMap<String, HardwareDescriptor>,
    #[serde(skip)]
    pub warnings: Vec<Diagnostic>,
}

impl SystemModel {
    pub fn instance(&self, name: &str) -> Option<&InstanceDef> {
        self.instances.iter().find(|i| i.name == name)
    }

    pub fn block_of(&self, instance: &str) -> Option<&BlockDef> {
        self.block_defs.get(&self.instance(instance)?.block)
    }

    pub fn kind_of(&self, instance: &str) -> Option<BlockKind> {
        self.block_of(instance).map(|b| b.kind)
    }

    pub fn output_ty(&self, p: &PortRef) -> Option<&Ty> {
        self.block_of(&p.instance)?.outputs.get(p.port).map(|o| &o.ty)
    }

    pub fn input_ty(&self, p: &PortRef) -> Option<&Ty> {
        self.block_of(&p.instance)?.inputs.get(p.port).map(|o| &o.ty)
    }

    /// Producers declared for `consumer`, deduplicated, in declaration order.
    pub fn producers_of(&self, consumer: &PortRef) -> Vec<&PortRef> {
        self.wires
            .iter()
            .filter(|w| w.consumer == *consumer)
            .map(|w| &w.producer)
            .collect()
    }

    /// The single effective source of every input port (requires a resolved model).
    pub fn effective_source(&self, consumer: &PortRef) -> Option<Source> {
        for (g, m) in self.merges.iter().enumerate() {
            if m.consumer == *consumer {
                return Some(Source::Merge { group: g });
            }
        }
        for (g, s) in self.splits.iter().enumerate() {
            if let Some(index) = s.consumers.iter().position(|c| c == consumer) {
                return Some(Source::Split { group: g, index });
            }
        }
        match self.producers_of(consumer).as_slice() {
            [p] => Some(Source::Direct((*p).clone())),
            _ => None,
        }
    }

    pub fn logical_instances(&self) -> impl Iterator<Item = &InstanceDef> {
        self.instances
            .iter()
            .filter(|i| self.block_defs.get(&i.block).is_some_and(|b| b.kind != BlockKind::Physical))
    }
}

fn err(code: &'static str, msg: impl Into<String>, span: Span) -> Diagnostic {
    Diagnostic::error(code, msg).at(span)
}

/// Builds instances, wires, links and raw plug declarations. `spans` keeps
/// declaration locations for later passes.
pub(crate) fn build(
    sys: &ast::SystemSection,
    model: &mut SystemModel,
    spans: &mut HashMap<String, Span>,
    diags: &mut Vec<Diagnostic>,
) {
    for inst in &sys.instances {
        let name = &inst.name.name;
        if model.instance(name).is_some() {
            diags.push(err("E-DUP", format!("duplicate instance `{name}`"), inst.name.span()));
            continue;
        }
        if !model.block_defs.contains_key(&inst.type_name.name) {
            diags.push(err(
                "E-UNDEF",
                format!("unknown block `{}`", inst.type_name.name),
                inst.type_name.span(),
            ));
            continue;
        }
        spans.insert(name.clone(), inst.name.span());
        model.instances.push(InstanceDef {
            name: name.clone(),
            block: inst.type_name.name.clone(),
        });
    }

    for link in &sys.links {
        let (c, p) = (&link.child.name, &link.parent.name);
        let mut ok = true;
        for id in [&link.child, &link.parent] {
            if model.instance(&id.name).is_none() {
                diags.push(err("E-UNDEF", format!("unknown instance `{}`", id.name), id.span()));
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        if model.links.contains_key(c) {
            diags.push(err("E-DUP", format!("`{c}` is linked twice"), link.child.span()));
            continue;
        }
        if model.kind_of(c) == Some(BlockKind::Physical)
            && model.kind_of(p) == Some(BlockKind::Physical)
        {
            model.warnings.push(
                Diagnostic::warning(
                    "W-PHYSLINK",
                    format!("physical instance `{c}` linked to physical instance `{p}`"),
                )
                .at(link.child.span()),
            );
        }
        model.links.insert(c.clone(), p.clone());
    }

    for wiring in &sys.input_wirings {
        let target = &wiring.target.name;
        let Some(block) = model.block_of(target) else {
            diags.push(err(
                "E-UNDEF",
                format!("unknown instance `{target}`"),
                wiring.target.span(),
            ));
            continue;
        };
        let n_inputs = block.inputs.len();
        if wiring.sources.len() != n_inputs {
            diags.push(err(
                "E-ARITY",
                format!(
                    "`{target}` has {n_inputs} input(s), {} wired",
                    wiring.sources.len()
                ),
                wiring.target.span(),
            ));
            continue;
        }
        for (j, src) in wiring.sources.iter().enumerate() {
            let Some(producer) = resolve_signal(model, src, diags) else {
                continue;
            };
            let consumer = PortRef::new(target.clone(), j);
            let (pt, ct) = (model.output_ty(&producer), model.input_ty(&consumer));
            if let (Some(pt), Some(ct)) = (pt, ct) {
                if !pt.fits(ct) {
                    diags.push(err(
                        "E-TYPE",
                        format!("{producer} carries {pt} but input {consumer} expects {ct}"),
                        src.loc.0,
                    ));
                    continue;
                }
            }
            let wire = Wire { producer, consumer };
            if !model.wires.contains(&wire) {
                model.wires.push(wire);
            }
        }
    }

    for (kind, decls) in [(PlugKind::Split, &sys.splitplugs), (PlugKind::Merge, &sys.mergeplugs)] {
        for d in decls {
            let Some(signal) = resolve_signal(model, &d.signal, diags) else {
                continue;
            };
            if model
                .plug_decls
                .iter()
                .any(|p| p.signal == signal && p.kind == kind)
            {
                diags.push(err(
                    "E-DUP",
                    format!("{signal} already has a {} plug", kind.as_str()),
                    d.signal.loc.0,
                ));
                continue;
            }
            spans.insert(format!("plug:{kind:?}:{signal}"), d.signal.loc.0);
            model.plug_decls.push(PlugDeclaration {
                kind,
                signal,
                function: d.function.name.clone(),
            });
        }
    }
}

fn resolve_signal(
    model: &SystemModel,
    r: &SignalRef,
    diags: &mut Vec<Diagnostic>,
) -> Option<PortRef> {
    let name = &r.instance.name;
    let Some(block) = model.block_of(name) else {
        diags.push(err("E-UNDEF", format!("unknown instance `{name}`"), r.instance.span()));
        return None;
    };
    let m = block.outputs.len();
    let port = match r.port {
        None if m == 1 => 0,
        None => {
            diags.push(err(
                "E-ARITY",
                format!("`{name}.out` is ambiguous: `{name}` has {m} outputs, use `{name}.out[k]`"),
                r.loc.0,
            ));
            return None;
        }
        Some(k) if (k as usize) < m => k as usize,
        Some(k) => {
            diags.push(err(
                "E-ARITY",
                format!("`{name}` has {m} output(s), no `out[{k}]`"),
                r.loc.0,
            ));
            return None;
        }
    };
    Some(PortRef::new(name.clone(), port))
}

/// Checks that links form a forest whose roots are physical instances and
/// that every non-physical instance is linked.
pub fn validate_links(model: &SystemModel) -> Result<(), Vec<Diagnostic>> {
    validate_links_at(model, &HashMap::new())
}

pub(crate) fn validate_links_at(
    model: &SystemModel,
    spans: &HashMap<String, Span>,
) -> Result<(), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let at = |d: Diagnostic, name: &str| match spans.get(name) {
        Some(s) => d.at(*s),
        None => d,
    };
    let mut reported_cycle: Vec<String> = Vec::new();
    for inst in model.logical_instances() {
        if !model.links.contains_key(&inst.name) {
            diags.push(at(
                Diagnostic::error(
                    "E-NOLINK",
                    format!("instance `{}` is not linked to a physical device", inst.name),
                ),
                &inst.name,
            ));
        }
    }
    for inst in &model.instances {
        let mut path = vec![inst.name.as_str()];
        let mut cur = inst.name.as_str();
        while let Some(parent) = model.links.get(cur) {
            if let Some(pos) = path.iter().position(|p| p == parent) {
                let mut cycle: Vec<String> = path[pos..].iter().map(|s| s.to_string()).collect();
                cycle.sort();
                if !reported_cycle.contains(&cycle[0]) {
                    reported_cycle.push(cycle[0].clone());
                    diags.push(at(
                        Diagnostic::error(
                            "E-LINKCYCLE",
                            format!("link cycle through {}", path[pos..].join(" -> ")),
                        ),
                        &inst.name,
                    ));
                }
                break;
            }
            path.push(parent);
            cur = parent;
        }
        let is_cycle = model.links.contains_key(cur);
        if !is_cycle
            && model.kind_of(cur) != Some(BlockKind::Physical)
            && model.links.contains_key(&inst.name)
        {
            diags.push(at(
                Diagnostic::error(
                    "E-NOLINK",
                    format!(
                        "instance `{}` is rooted at `{cur}`, which is not physical",
                        inst.name
                    ),
                ),
                &inst.name,
            ));
        }
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

fn plug_fn_check(
    model: &SystemModel,
    kind: PlugKind,
    function: &str,
    ty: &Ty,
) -> Result<(), String> {
    let f = model
        .functions
        .get(function)
        .ok_or_else(|| format!("`{function}` is not a declared pure function"))?;
    let params: Vec<&Ty> = f.params.iter().map(|(_, t)| t).collect();
    let ok = match kind {
        PlugKind::Split => {
            params.len() == 3
                && ty.fits(params[0])
                && *params[1] == Ty::Int
                && *params[2] == Ty::Int
                && f.ret.fits(ty)
        }
        PlugKind::Merge => {
            params.len() == 2 && ty.fits(params[0]) && ty.fits(params[1]) && f.ret.fits(ty)
        }
    };
    if ok {
        Ok(())
    } else {
        let want = match kind {
            PlugKind::Split => format!("({ty}, int, int) -> {ty}"),
            PlugKind::Merge => format!("({ty}, {ty}) -> {ty}"),
        };
        Err(format!("`{function}` must have signature {want}"))
    }
}

/// Groups wires into split and merge connectors and checks the plug
/// function contracts.
pub fn resolve_plugs(model: SystemModel) -> Result<SystemModel, Vec<Diagnostic>> {
    resolve_plugs_at(model, &HashMap::new())
}

pub(crate) fn resolve_plugs_at(
    mut model: SystemModel,
    spans: &HashMap<String, Span>,
) -> Result<SystemModel, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let span_of = |kind: PlugKind, sig: &PortRef| spans.get(&format!("plug:{kind:?}:{sig}")).copied();
    let located = |d: Diagnostic, s: Option<Span>| match s {
        Some(s) => d.at(s),
        None => d,
    };

    for d in &model.plug_decls {
        if d.kind == PlugKind::Split
            && model
                .plug_decls
                .iter()
                .any(|o| o.kind == PlugKind::Merge && o.signal == d.signal)
        {
            diags.push(located(
                Diagnostic::error(
                    "E-PLUGMIX",
                    format!("{} is both split and merged", d.signal),
                ),
                span_of(d.kind, &d.signal),
            ));
        }
        if let Some(ty) = model.output_ty(&d.signal).cloned() {
            if let Err(msg) = plug_fn_check(&model, d.kind, &d.function, &ty) {
                diags.push(located(Diagnostic::error("E-PLUGFN", msg), span_of(d.kind, &d.signal)));
            }
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let plug = |kind: PlugKind, sig: &PortRef| {
        model
            .plug_decls
            .iter()
            .find(|p| p.kind == kind && p.signal == *sig)
            .map(|p| p.function.clone())
    };

    let mut splits: Vec<SplitGroup> = Vec::new();
    for d in model.plug_decls.iter().filter(|d| d.kind == PlugKind::Split) {
        let consumers: Vec<PortRef> = model
            .wires
            .iter()
            .filter(|w| w.producer == d.signal)
            .map(|w| w.consumer.clone())
            .collect();
        splits.push(SplitGroup {
            signal: d.signal.clone(),
            function: d.function.clone(),
            consumers,
        });
    }

    let mut merges: Vec<MergeGroup> = Vec::new();
    let consumers: Vec<PortRef> = {
        let mut seen = Vec::new();
        for w in &model.wires {
            if !seen.contains(&w.consumer) {
                seen.push(w.consumer.clone());
            }
        }
        seen
    };
    let merge_rank = |p: &PortRef| {
        model
            .plug_decls
            .iter()
            .filter(|d| d.kind == PlugKind::Merge)
            .position(|d| d.signal == *p)
    };
    for c in &consumers {
        let producers: Vec<PortRef> = model.producers_of(c).into_iter().cloned().collect();
        let merged: Vec<Option<String>> =
            producers.iter().map(|p| plug(PlugKind::Merge, p)).collect();
        if producers.len() == 1 && merged[0].is_none() {
            continue;
        }
        if merged.iter().any(Option::is_none) {
            diags.push(located(
                Diagnostic::error(
                    "E-MULTIPROD",
                    format!(
                        "input {c} has {} producers ({}) and not all are mergeplugged",
                        producers.len(),
                        producers.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
                    ),
                ),
                spans.get(&c.instance).copied(),
            ));
            continue;
        }
        let function = merged[0].clone().unwrap();
        if merged.iter().any(|m| m.as_deref() != Some(function.as_str())) {
            diags.push(located(
                Diagnostic::error(
                    "E-PLUGFN",
                    format!("producers merged into {c} use different aggregating functions"),
                ),
                spans.get(&c.instance).copied(),
            ));
            continue;
        }
        let mut ordered = producers;
        ordered.sort_by_key(|p| merge_rank(p));
        merges.push(MergeGroup {
            consumer: c.clone(),
            function,
            producers: ordered,
        });
    }

    // an input fed by a split signal must have no other producer
    for s in &splits {
        for c in &s.consumers {
            if model.producers_of(c).len() > 1 {
                diags.push(located(
                    Diagnostic::error(
                        "E-MULTIPROD",
                        format!("input {c} is fed by split {} and other producers", s.signal),
                    ),
                    spans.get(&c.instance).copied(),
                ));
            }
        }
    }

    if !diags.is_empty() {
        return Err(diags);
    }
    model.plugs = model
        .plug_decls
        .iter()
        .map(|d| PlugAttachment {
            kind: d.kind,
            signal: d.signal.clone(),
            function: d.function.clone(),
            fan: match d.kind {
                PlugKind::Split => splits
                    .iter()
                    .find(|s| s.signal == d.signal)
                    .map_or(0, |s| s.consumers.len()),
                PlugKind::Merge => merges
                    .iter()
                    .filter(|m| m.producers.contains(&d.signal))
                    .map(|m| m.producers.len())
                    .max()
                    .unwrap_or(0),
            },
        })
        .collect();
    model.splits = splits;
    model.merges = merges;
    Ok(model)
}

/// Every input port of every instance must have at least one producer.
/// Outputs nobody consumes can never be sent, which stalls their instance;
/// they are reported as warnings on the model.
pub(crate) fn check_wired(
    model: &mut SystemModel,
    spans: &HashMap<String, Span>,
) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut warnings = Vec::new();
    for inst in &model.instances {
        let Some(block) = model.block_defs.get(&inst.block) else {
            continue;
        };
        for (k, output) in block.outputs.iter().enumerate() {
            let p = PortRef::new(inst.name.clone(), k);
            if !model.wires.iter().any(|w| w.producer == p) {
                let d = Diagnostic::warning(
                    "W-UNUSED",
                    format!(
                        "output `{}` of instance `{}` has no consumer; the instance stalls after its first update",
                        output.name, inst.name
                    ),
                );
                warnings.push(match spans.get(&inst.name) {
                    Some(s) => d.at(*s),
                    None => d,
                });
            }
        }
        for (j, input) in block.inputs.iter().enumerate() {
            let c = PortRef::new(inst.name.clone(), j);
            if model.producers_of(&c).is_empty() {
                let d = Diagnostic::error(
                    "E-UNWIRED",
                    format!("input `{}` of instance `{}` has no producer", input.name, inst.name),
                );
                diags.push(match spans.get(&inst.name) {
                    Some(s) => d.at(*s),
                    None => d,
                });
            }
        }
    }
    model.warnings.extend(warnings);
    diags
}
