use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diag::Diagnostic;
use crate::ir::{Callee, Expr, Function};
use crate::sema::{Port, PortRef, Source, SystemModel, Ty};
use crate::value::Value;

use super::automaton::{lower, transform_block, Automaton, Initial, Origin, IDLE};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoint {
    pub automaton: usize,
    pub port: usize,
}

/// Rendezvous of one output transition with the input transitions of every
/// consumer of that output. It is enabled when the producer can emit and all
/// consumers are idle. Outputs without consumers get no interaction and can
/// never be sent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub producer: Endpoint,
    pub consumers: Vec<Endpoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub automata: Vec<Automaton>,
    pub interactions: Vec<Interaction>,
    pub functions: BTreeMap<String, Function>,
    pub kickstarter: Option<String>,
}

impl Network {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.automata.iter().position(|a| a.name == name)
    }

    pub fn automaton(&self, name: &str) -> Option<&Automaton> {
        self.automata.iter().find(|a| a.name == name)
    }

    pub fn connectors(&self) -> impl Iterator<Item = &Automaton> {
        self.automata
            .iter()
            .filter(|a| !matches!(a.origin, Origin::Block { .. }))
    }

    /// Stable JSON form: struct fields in declaration order, maps sorted.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("network serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Network, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

fn split_name(g: usize) -> String {
    format!("@split{g}")
}

fn merge_name(g: usize) -> String {
    format!("@merge{g}")
}

fn ports(prefix: &str, n: usize, ty: &Ty) -> Vec<Port> {
    (0..n)
        .map(|i| Port {
            name: format!("{prefix}{i}"),
            ty: ty.clone(),
        })
        .collect()
}

fn arity_error(msg: String) -> Diagnostic {
    Diagnostic::error("E-PLUG-ARITY", msg)
}

/// One automaton per instance in declaration order, followed by one
/// connector per split group and per merge group.
pub fn build_network(model: &SystemModel) -> Result<Network, Diagnostic> {
    if !model.has_system || model.instances.is_empty() {
        return Err(Diagnostic::error(
            "E-XFORM",
            "no SYSTEM section: there is nothing to assemble",
        ));
    }
    let mut automata = Vec::new();
    for inst in &model.instances {
        let block = model.block_defs.get(&inst.block).ok_or_else(|| {
            Diagnostic::error("E-XFORM", format!("unknown block `{}`", inst.block))
        })?;
        automata.push(transform_block(block, &inst.name)?);
    }
    let index: BTreeMap<&str, usize> = model
        .instances
        .iter()
        .enumerate()
        .map(|(i, inst)| (inst.name.as_str(), i))
        .collect();
    let at = |p: &PortRef| index[p.instance.as_str()];

    let split_base = automata.len();
    for (g, s) in model.splits.iter().enumerate() {
        let n = s.consumers.len();
        if n == 0 {
            return Err(arity_error(format!("splitplug on {} has no consumers", s.signal)));
        }
        let ty = model.output_ty(&s.signal).cloned().unwrap_or(Ty::Any);
        let outputs: Vec<Expr> = (0..n)
            .map(|i| Expr::Call {
                callee: Callee::Pure(s.function.clone()),
                args: vec![
                    Expr::var("value"),
                    Expr::lit(Value::Int(i as i64)),
                    Expr::lit(Value::Int(n as i64)),
                ],
            })
            .collect();
        let input = Port {
            name: "value".into(),
            ty: ty.clone(),
        };
        automata.push(lower(
            &split_name(g),
            Origin::Split {
                function: s.function.clone(),
                fan: n,
            },
            &[input],
            &ports("out", n, &ty),
            &outputs,
            &[],
            &[],
            &[],
        )?);
    }
    let merge_base = automata.len();
    for (g, m) in model.merges.iter().enumerate() {
        let n = m.producers.len();
        if n == 0 {
            return Err(arity_error(format!("mergeplug into {} has no producers", m.consumer)));
        }
        let ty = model.input_ty(&m.consumer).cloned().unwrap_or(Ty::Any);
        let inputs = ports("in", n, &ty);
        let fold = inputs
            .iter()
            .map(|p| Expr::var(p.name.clone()))
            .reduce(|acc, v| Expr::call_pure(m.function.clone(), vec![acc, v]))
            .expect("fan-in is positive");
        automata.push(lower(
            &merge_name(g),
            Origin::Merge {
                function: m.function.clone(),
                fan: n,
            },
            &inputs,
            &ports("out", 1, &ty),
            &[fold],
            &[],
            &[],
            &[],
        )?);
    }

    // consumers of every producer port, in a deterministic order
    let mut fanout: BTreeMap<(usize, usize), Vec<Endpoint>> = BTreeMap::new();
    for (a, aut) in automata.iter().enumerate() {
        for k in 0..aut.outputs.len() {
            fanout.insert((a, k), Vec::new());
        }
    }
    let mut add = |producer: (usize, usize), consumer: Endpoint| {
        let list = fanout.get_mut(&producer).expect("producer port exists");
        if !list.contains(&consumer) {
            list.push(consumer);
        }
    };
    for (c_idx, inst) in model.instances.iter().enumerate() {
        let inputs = automata[c_idx].inputs.len();
        for j in 0..inputs {
            let consumer = PortRef::new(inst.name.clone(), j);
            let here = Endpoint {
                automaton: c_idx,
                port: j,
            };
            match model.effective_source(&consumer) {
                Some(Source::Direct(p)) => add((at(&p), p.port), here),
                Some(Source::Split { group, index }) => add((split_base + group, index), here),
                Some(Source::Merge { group }) => add((merge_base + group, 0), here),
                None => {
                    return Err(arity_error(format!(
                        "input {consumer} has no single effective producer"
                    )))
                }
            }
        }
    }
    for (g, s) in model.splits.iter().enumerate() {
        add(
            (at(&s.signal), s.signal.port),
            Endpoint {
                automaton: split_base + g,
                port: 0,
            },
        );
    }
    for (g, m) in model.merges.iter().enumerate() {
        for (k, p) in m.producers.iter().enumerate() {
            add(
                (at(p), p.port),
                Endpoint {
                    automaton: merge_base + g,
                    port: k,
                },
            );
        }
    }

    let interactions = fanout
        .into_iter()
        .filter(|(_, consumers)| !consumers.is_empty())
        .map(|((a, k), consumers)| Interaction {
            producer: Endpoint {
                automaton: a,
                port: k,
            },
            consumers,
        })
        .collect();

    Ok(Network {
        automata,
        interactions,
        functions: model.functions.clone(),
        kickstarter: None,
    })
}

/// Puts every automaton in `Idle` and presets the reception flags of
/// `kickstarter` so its update is enabled first.
pub fn assign_initial(mut network: Network, kickstarter: &str) -> Result<Network, Diagnostic> {
    let Some(k) = network.index_of(kickstarter) else {
        return Err(Diagnostic::error(
            "E-KICK",
            format!("kickstarter `{kickstarter}` is not an automaton of the network"),
        ));
    };
    for (i, a) in network.automata.iter_mut().enumerate() {
        a.initial = Initial {
            state: IDLE,
            flags_preset: i == k,
        };
    }
    network.kickstarter = Some(kickstarter.to_string());
    Ok(network)
}
