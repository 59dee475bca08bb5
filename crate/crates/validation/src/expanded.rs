//! Explicitly state-expanded automaton of a [`BlockSpec`]: one idle state
//! per subset of received inputs instead of per-input flags.

use crate::blocks::{BlockSpec, Event, Observation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loc {
    /// Waiting for inputs; bit i set when input i has arrived.
    Idle(u32),
    /// Next output to send.
    Emit(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Label {
    Receive(usize),
    Update,
    Send(usize),
}

#[derive(Debug, Clone)]
pub struct ExpandedAutomaton {
    pub spec: BlockSpec,
    pub states: Vec<Loc>,
    pub transitions: Vec<(Loc, Label, Loc)>,
    pub loc: Loc,
    pub values: Vec<i64>,
    pub acc: i64,
    pub outs: Vec<i64>,
}

impl ExpandedAutomaton {
    pub fn new(spec: &BlockSpec) -> ExpandedAutomaton {
        let k = spec.inputs;
        let m = spec.outputs.len();
        let full = (1u32 << k) - 1;
        let mut states: Vec<Loc> = (0..=full).map(Loc::Idle).collect();
        states.extend((0..m).map(Loc::Emit));
        let mut transitions = Vec::new();
        for mask in 0..=full {
            for i in 0..k {
                transitions.push((Loc::Idle(mask), Label::Receive(i), Loc::Idle(mask | 1 << i)));
            }
        }
        transitions.push((Loc::Idle(full), Label::Update, Loc::Emit(0)));
        for j in 0..m {
            let next = if j + 1 == m { Loc::Idle(0) } else { Loc::Emit(j + 1) };
            transitions.push((Loc::Emit(j), Label::Send(j), next));
        }
        ExpandedAutomaton {
            spec: spec.clone(),
            states,
            transitions,
            loc: Loc::Idle(0),
            values: vec![0; k],
            acc: 0,
            outs: vec![0; m],
        }
    }

    fn take(&mut self, label: &Label) -> bool {
        match self.transitions.iter().find(|(s, l, _)| *s == self.loc && l == label) {
            Some(&(_, _, t)) => {
                self.loc = t;
                true
            }
            None => false,
        }
    }

    /// Applies one schedule event. `None` on arithmetic overflow.
    pub fn apply(&mut self, ev: Event) -> Option<Observation> {
        Some(match ev {
            Event::Offer(i, v) => {
                let ok = self.take(&Label::Receive(i));
                if ok {
                    self.values[i] = v;
                }
                Observation::Accepted(ok)
            }
            Event::Update => {
                let ok = self.take(&Label::Update);
                if ok {
                    self.acc = self.spec.acc_update.eval(&self.values, self.acc)?;
                    for j in 0..self.outs.len() {
                        self.outs[j] = self.spec.outputs[j].eval(&self.values, self.acc)?;
                    }
                }
                Observation::Updated(ok)
            }
            Event::Emit => {
                let Loc::Emit(j) = self.loc else {
                    return Some(Observation::Emitted(None));
                };
                self.take(&Label::Send(j));
                Observation::Emitted(Some((j, self.outs[j])))
            }
        })
    }
}
