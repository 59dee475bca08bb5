use serde::{Deserialize, Serialize};

use crate::diag::Diagnostic;
use crate::ir::{Expr, Stmt};
use crate::sema::{BlockDef, Port, Ty};

pub const IDLE: usize = 0;
pub const COMPUTED: usize = 1;

/// Reception flag of input `name`.
pub fn flag_var(name: &str) -> String {
    format!("@recv_{name}")
}

/// Copy of output `k` produced by the update transition.
pub fn out_var(k: usize) -> String {
    format!("@out{k}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarRole {
    Input,
    Flag,
    Output,
    Inner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub ty: Ty,
    pub role: VarRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionKind {
    Input,
    Internal,
    Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub kind: TransitionKind,
    pub source: usize,
    pub target: usize,
    /// Input or output port index; `None` for the internal transition.
    pub port: Option<usize>,
    pub guard: Expr,
    pub action: Vec<Stmt>,
}

/// What an automaton was generated from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Origin {
    Block { block: String },
    Split { function: String, fan: usize },
    Merge { function: String, fan: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Initial {
    pub state: usize,
    /// Reception flags start raised (kickstarter only).
    pub flags_preset: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Automaton {
    pub name: String,
    pub origin: Origin,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    pub variables: Vec<Variable>,
    pub states: Vec<String>,
    pub transitions: Vec<Transition>,
    pub init_body: Vec<Stmt>,
    pub then_body: Vec<Stmt>,
    pub initial: Initial,
}

impl Automaton {
    pub fn input_transition(&self, port: usize) -> Option<usize> {
        self.find(TransitionKind::Input, Some(port))
    }

    pub fn output_transition(&self, port: usize) -> Option<usize> {
        self.find(TransitionKind::Output, Some(port))
    }

    pub fn internal_transition(&self) -> Option<usize> {
        self.find(TransitionKind::Internal, None)
    }

    fn find(&self, kind: TransitionKind, port: Option<usize>) -> Option<usize> {
        self.transitions
            .iter()
            .position(|t| t.kind == kind && t.port == port)
    }

    pub fn count(&self, kind: TransitionKind) -> usize {
        self.transitions.iter().filter(|t| t.kind == kind).count()
    }

    pub fn block_name(&self) -> Option<&str> {
        match &self.origin {
            Origin::Block { block } => Some(block),
            _ => None,
        }
    }
}

/// Builds the automaton of `instance` from its block.
pub fn transform_block(block: &BlockDef, instance: &str) -> Result<Automaton, Diagnostic> {
    lower(
        instance,
        Origin::Block {
            block: block.name.clone(),
        },
        &block.inputs,
        &block.outputs,
        &block.output_exprs,
        &block.vars,
        &block.init_body,
        &block.then_body,
    )
}

#[allow(clippy::too_many_arguments)]
pub(super) fn lower(
    name: &str,
    origin: Origin,
    inputs: &[Port],
    outputs: &[Port],
    output_exprs: &[Expr],
    inner: &[(String, Ty)],
    init_body: &[Stmt],
    then_body: &[Stmt],
) -> Result<Automaton, Diagnostic> {
    let m = outputs.len();
    if m == 0 {
        return Err(Diagnostic::error(
            "E-XFORM",
            format!("`{name}` has no outputs, so it has no output chain"),
        ));
    }
    debug_assert_eq!(output_exprs.len(), m);

    let mut variables = Vec::new();
    for p in inputs {
        variables.push(Variable {
            name: p.name.clone(),
            ty: p.ty.clone(),
            role: VarRole::Input,
        });
    }
    for p in inputs {
        variables.push(Variable {
            name: flag_var(&p.name),
            ty: Ty::Bool,
            role: VarRole::Flag,
        });
    }
    for (k, p) in outputs.iter().enumerate() {
        variables.push(Variable {
            name: out_var(k),
            ty: p.ty.clone(),
            role: VarRole::Output,
        });
    }
    for (v, ty) in inner {
        variables.push(Variable {
            name: v.clone(),
            ty: ty.clone(),
            role: VarRole::Inner,
        });
    }

    let mut states = vec!["Idle".to_string(), "Computed".to_string()];
    states.extend((1..m).map(|i| format!("Sent_{i}")));

    let mut transitions = Vec::new();
    for (j, p) in inputs.iter().enumerate() {
        transitions.push(Transition {
            kind: TransitionKind::Input,
            source: IDLE,
            target: IDLE,
            port: Some(j),
            guard: Expr::bool(true),
            action: vec![
                Stmt::assign(p.name.clone(), Expr::Incoming),
                Stmt::assign(flag_var(&p.name), Expr::bool(true)),
            ],
        });
    }
    let mut action = then_body.to_vec();
    for (k, e) in output_exprs.iter().enumerate() {
        action.push(Stmt::assign(out_var(k), e.clone()));
    }
    for p in inputs {
        action.push(Stmt::assign(flag_var(&p.name), Expr::bool(false)));
    }
    transitions.push(Transition {
        kind: TransitionKind::Internal,
        source: IDLE,
        target: COMPUTED,
        port: None,
        guard: Expr::all(inputs.iter().map(|p| Expr::var(flag_var(&p.name)))),
        action,
    });
    for k in 0..m {
        // outputs leave from Computed, then Sent_1 .. Sent_{m-1}
        let source = if k == 0 { COMPUTED } else { k + 1 };
        let target = if k + 1 == m { IDLE } else { k + 2 };
        transitions.push(Transition {
            kind: TransitionKind::Output,
            source,
            target,
            port: Some(k),
            guard: Expr::bool(true),
            action: Vec::new(),
        });
    }

    Ok(Automaton {
        name: name.to_string(),
        origin,
        inputs: inputs.to_vec(),
        outputs: outputs.to_vec(),
        variables,
        states,
        transitions,
        init_body: init_body.to_vec(),
        then_body: then_body.to_vec(),
        initial: Initial {
            state: IDLE,
            flags_preset: false,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sema::BlockKind;

    fn block(k: usize, m: usize) -> BlockDef {
        let port = |p: &str, i: usize| Port {
            name: format!("{p}{i}"),
            ty: Ty::Int,
        };
        BlockDef {
            name: "b".into(),
            kind: BlockKind::Logical,
            inputs: (0..k).map(|i| port("i", i)).collect(),
            outputs: (0..m).map(|i| port("o", i)).collect(),
            output_exprs: (0..m).map(|_| Expr::lit(crate::Value::Int(0))).collect(),
            vars: vec![],
            init_body: vec![],
            then_body: vec![],
        }
    }

    #[test]
    fn one_in_one_out() {
        let a = transform_block(&block(1, 1), "x").unwrap();
        assert_eq!(a.states, ["Idle", "Computed"]);
        assert_eq!(a.transitions.len(), 3);
        let out = &a.transitions[a.output_transition(0).unwrap()];
        assert_eq!((out.source, out.target), (COMPUTED, IDLE));
    }

    #[test]
    fn source_block_guard_is_true() {
        let a = transform_block(&block(0, 1), "src").unwrap();
        assert_eq!(a.states.len(), 2);
        let t = &a.transitions[a.internal_transition().unwrap()];
        assert_eq!(t.guard, Expr::bool(true));
    }

    #[test]
    fn output_chain_visits_every_state() {
        let a = transform_block(&block(2, 3), "x").unwrap();
        assert_eq!(a.states, ["Idle", "Computed", "Sent_1", "Sent_2"]);
        let chain: Vec<(usize, usize)> = (0..3)
            .map(|k| {
                let t = &a.transitions[a.output_transition(k).unwrap()];
                (t.source, t.target)
            })
            .collect();
        assert_eq!(chain, [(1, 2), (2, 3), (3, 0)]);
        assert_eq!(a.count(TransitionKind::Input), 2);
        assert_eq!(a.count(TransitionKind::Internal), 1);
        let flags = a.variables.iter().filter(|v| v.role == VarRole::Flag).count();
        assert_eq!(flags, 2);
    }

    #[test]
    fn no_outputs_is_rejected() {
        assert_eq!(transform_block(&block(1, 0), "x").unwrap_err().code, "E-XFORM");
    }
}
