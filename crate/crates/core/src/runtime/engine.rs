//! Deterministic execution of a network.

use serde::{Deserialize, Serialize};

use crate::automata::{flag_var, out_var, Automaton, Network, TransitionKind, VarRole};
use crate::diag::Diagnostic;
use crate::value::Value;

use super::builtins::Env;
use super::config::SimConfig;
use super::eval::{eval, exec, Ctx, Store};
use super::prng::Prng;
use super::trace::{CacheSnapshot, Trace, TraceLayout, TraceRecord};

/// A fired transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum StepEvent {
    Internal { automaton: usize },
    Interaction { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Fired(StepEvent),
    Quiescent,
}

#[derive(Debug, Clone)]
struct ResolvedProbe {
    automaton: usize,
    var: String,
}

#[derive(Debug, Clone)]
struct Layout {
    images_requested: ResolvedProbe,
    cache_misses: ResolvedProbe,
    response_time: ResolvedProbe,
    error: ResolvedProbe,
    integral: ResolvedProbe,
    cache_size: ResolvedProbe,
    user_connected: ResolvedProbe,
    caches: Vec<ResolvedProbe>,
}

#[derive(Debug, Clone)]
pub struct RunState {
    pub network: Network,
    pub stores: Vec<Store>,
    /// Current control state of every automaton.
    pub control: Vec<usize>,
    pub prng: Prng,
    pub sim_time: f64,
    pub round_index: u64,
    pub steps: u64,
    pub trace: Trace,
    pub config: SimConfig,
    marker: usize,
    layout: Option<Layout>,
}

fn init_error(a: &Automaton, d: Diagnostic) -> Diagnostic {
    Diagnostic::error("E-INIT", format!("init of `{}` failed: {}", a.name, d.message))
}

/// Fresh variable store: every variable at the default of its type.
pub fn default_store(a: &Automaton) -> Store {
    a.variables
        .iter()
        .map(|v| (v.name.clone(), v.ty.default_value()))
        .collect()
}

fn resolve(network: &Network, p: &super::trace::Probe) -> Result<ResolvedProbe, Diagnostic> {
    let automaton = network.index_of(&p.automaton).ok_or_else(|| {
        Diagnostic::error("E-INIT", format!("trace probe names unknown automaton `{}`", p.automaton))
    })?;
    let a = &network.automata[automaton];
    let known = a.variables.iter().any(|v| v.name == p.var);
    if !known {
        return Err(Diagnostic::error(
            "E-INIT",
            format!("trace probe `{}.{}` names an unknown variable", p.automaton, p.var),
        ));
    }
    Ok(ResolvedProbe {
        automaton,
        var: p.var.clone(),
    })
}

/// Executes every init body in automaton order and raises the kickstarter's
/// reception flags. Rounds are counted at the internal transition of the
/// layout marker, or of the kickstarter when there is no layout.
pub fn init_run(
    network: Network,
    config: SimConfig,
    layout: Option<&TraceLayout>,
) -> Result<RunState, Diagnostic> {
    config.validate()?;
    let kick = network.kickstarter.clone().unwrap_or_else(|| config.kickstarter.clone());
    let network = crate::automata::assign_initial(network, &kick)?;

    let mut prng = Prng::new(config.seed);
    let mut stores = Vec::with_capacity(network.automata.len());
    for a in &network.automata {
        let mut store = default_store(a);
        let mut env = Env {
            prng: &mut prng,
            params: &config.params,
            scenario: &config.scenario,
        };
        let mut cx = Ctx {
            functions: &network.functions,
            env: &mut env,
        };
        exec(&a.init_body, &mut store, None, &mut cx).map_err(|d| init_error(a, d))?;
        if a.initial.flags_preset {
            for v in a.variables.iter().filter(|v| v.role == VarRole::Flag) {
                store.insert(v.name.clone(), Value::Bool(true));
            }
        }
        stores.push(store);
    }
    let control = network.automata.iter().map(|a| a.initial.state).collect();

    let (marker, layout) = match layout {
        Some(l) => {
            let marker = network.index_of(&l.marker).ok_or_else(|| {
                Diagnostic::error("E-INIT", format!("trace marker `{}` is not an automaton", l.marker))
            })?;
            let r = |p| resolve(&network, p);
            let layout = Layout {
                images_requested: r(&l.images_requested)?,
                cache_misses: r(&l.cache_misses)?,
                response_time: r(&l.response_time)?,
                error: r(&l.error)?,
                integral: r(&l.integral)?,
                cache_size: r(&l.cache_size)?,
                user_connected: r(&l.user_connected)?,
                caches: l.caches.iter().map(r).collect::<Result<_, _>>()?,
            };
            (marker, Some(layout))
        }
        None => (network.index_of(&kick).expect("kickstarter assigned"), None),
    };

    Ok(RunState {
        network,
        stores,
        control,
        prng,
        sim_time: 0.0,
        round_index: 0,
        steps: 0,
        trace: Trace::default(),
        config,
        marker,
        layout,
    })
}

impl RunState {
    pub fn var(&self, automaton: &str, var: &str) -> Option<&Value> {
        self.stores[self.network.index_of(automaton)?].get(var)
    }

    fn guard_holds(&mut self, a: usize, t: usize) -> Result<bool, Diagnostic> {
        let tr = &self.network.automata[a].transitions[t];
        if self.control[a] != tr.source {
            return Ok(false);
        }
        let mut env = Env {
            prng: &mut self.prng,
            params: &self.config.params,
            scenario: &self.config.scenario,
        };
        let mut cx = Ctx {
            functions: &self.network.functions,
            env: &mut env,
        };
        let v = eval(&tr.guard, &self.stores[a], None, &mut cx)?;
        Ok(v.as_bool() == Some(true))
    }

    /// Whether interaction `i` can fire: the producer is at its output
    /// transition and every consumer can take its input transition.
    fn interaction_key(&mut self, i: usize) -> Result<Option<(usize, usize)>, Diagnostic> {
        let inter = self.network.interactions[i].clone();
        let p = &inter.producer;
        let Some(t) = self.network.automata[p.automaton].output_transition(p.port) else {
            return Ok(None);
        };
        if !self.guard_holds(p.automaton, t)? {
            return Ok(None);
        }
        let mut key = (p.automaton, t);
        for c in &inter.consumers {
            let Some(tc) = self.network.automata[c.automaton].input_transition(c.port) else {
                return Ok(None);
            };
            if !self.guard_holds(c.automaton, tc)? {
                return Ok(None);
            }
            key = key.min((c.automaton, tc));
        }
        Ok(Some(key))
    }

    /// Enabled event with the lowest (automaton index, transition index).
    pub fn next_event(&mut self) -> Result<Option<StepEvent>, Diagnostic> {
        let mut best: Option<((usize, usize), StepEvent)> = None;
        for a in 0..self.network.automata.len() {
            if let Some(t) = self.network.automata[a].internal_transition() {
                if best.as_ref().is_some_and(|(k, _)| *k < (a, t)) {
                    continue;
                }
                if self.guard_holds(a, t)? {
                    best = Some(((a, t), StepEvent::Internal { automaton: a }));
                }
            }
        }
        for i in 0..self.network.interactions.len() {
            if let Some(key) = self.interaction_key(i)? {
                if best.as_ref().is_none_or(|(k, _)| key < *k) {
                    best = Some((key, StepEvent::Interaction { index: i }));
                }
            }
        }
        Ok(best.map(|(_, e)| e))
    }

    /// Fires one enabled transition or interaction.
    pub fn step(&mut self) -> Result<Step, Diagnostic> {
        let Some(event) = self.next_event()? else {
            return Ok(Step::Quiescent);
        };
        self.fire(&event)?;
        self.steps += 1;
        Ok(Step::Fired(event))
    }

    fn fire(&mut self, event: &StepEvent) -> Result<(), Diagnostic> {
        match *event {
            StepEvent::Internal { automaton: a } => {
                let t = self.network.automata[a]
                    .internal_transition()
                    .expect("internal transition exists");
                self.run_action(a, t, None)?;
                if a == self.marker {
                    self.end_round()?;
                }
            }
            StepEvent::Interaction { index } => {
                let inter = self.network.interactions[index].clone();
                let p = &inter.producer;
                let value = self.stores[p.automaton]
                    .get(&out_var(p.port))
                    .cloned()
                    .expect("output variable exists");
                let t = self.network.automata[p.automaton]
                    .output_transition(p.port)
                    .expect("output transition exists");
                self.run_action(p.automaton, t, None)?;
                for c in &inter.consumers {
                    let tc = self.network.automata[c.automaton]
                        .input_transition(c.port)
                        .expect("input transition exists");
                    self.run_action(c.automaton, tc, Some(&value))?;
                }
            }
        }
        Ok(())
    }

    fn run_action(&mut self, a: usize, t: usize, incoming: Option<&Value>) -> Result<(), Diagnostic> {
        let tr = &self.network.automata[a].transitions[t];
        let mut env = Env {
            prng: &mut self.prng,
            params: &self.config.params,
            scenario: &self.config.scenario,
        };
        let mut cx = Ctx {
            functions: &self.network.functions,
            env: &mut env,
        };
        exec(&tr.action, &mut self.stores[a], incoming, &mut cx).map_err(|d| {
            Diagnostic::error(
                d.code,
                format!("in `{}`: {}", self.network.automata[a].name, d.message),
            )
        })?;
        self.control[a] = tr.target;
        Ok(())
    }

    fn end_round(&mut self) -> Result<(), Diagnostic> {
        self.round_index += 1;
        let Some(l) = &self.layout else {
            return Ok(());
        };
        let get = |p: &ResolvedProbe| -> Result<&Value, Diagnostic> {
            self.stores[p.automaton].get(&p.var).ok_or_else(|| {
                Diagnostic::error("E-RUNTIME", format!("probe variable `{}` unset", p.var))
            })
        };
        let int = |p: &ResolvedProbe| -> Result<i64, Diagnostic> {
            get(p)?
                .as_int()
                .ok_or_else(|| Diagnostic::error("E-RUNTIME", format!("probe `{}` is not an int", p.var)))
        };
        let float = |p: &ResolvedProbe| -> Result<f64, Diagnostic> {
            get(p)?
                .as_float()
                .ok_or_else(|| Diagnostic::error("E-RUNTIME", format!("probe `{}` is not a number", p.var)))
        };
        let response_time_s = float(&l.response_time)?;
        self.sim_time += response_time_s;
        let record = TraceRecord {
            round: self.round_index,
            sim_time_s: self.sim_time,
            images_requested: int(&l.images_requested)?,
            cache_misses: int(&l.cache_misses)?,
            response_time_s,
            error_s: float(&l.error)?,
            integral_term: float(&l.integral)?,
            cache_size: int(&l.cache_size)?,
            user_connected: get(&l.user_connected)?.as_bool().unwrap_or(false),
        };
        let caches = l
            .caches
            .iter()
            .map(|p| get(p).map(|v| v.int_array().unwrap_or_default()))
            .collect::<Result<Vec<_>, _>>()?;
        self.trace.records.push(record);
        if !caches.is_empty() {
            self.trace.caches.push(CacheSnapshot {
                round: self.round_index,
                caches,
            });
        }
        Ok(())
    }

    /// Steps until `max_rounds` rounds completed.
    pub fn run(&mut self) -> Result<&Trace, Diagnostic> {
        while self.round_index < self.config.max_rounds {
            if self.step()? == Step::Quiescent {
                return Err(Diagnostic::error(
                    "E-DEADLOCK",
                    format!(
                        "no transition enabled after {} steps (round {})",
                        self.steps,
                        self.round_index
                    ),
                ));
            }
        }
        Ok(&self.trace)
    }
}

/// Drives one automaton in isolation: inputs are offered one by one and
/// outputs collected, without a surrounding network.
#[derive(Debug, Clone)]
pub struct BlockHarness {
    pub automaton: Automaton,
    pub store: Store,
    pub control: usize,
    functions: std::collections::BTreeMap<String, crate::ir::Function>,
    prng: Prng,
    params: crate::corpus::TeaStoreParams,
    scenario: crate::corpus::Scenario,
}

impl BlockHarness {
    pub fn new(
        automaton: Automaton,
        functions: std::collections::BTreeMap<String, crate::ir::Function>,
        params: crate::corpus::TeaStoreParams,
        seed: u64,
    ) -> Result<BlockHarness, Diagnostic> {
        let mut h = BlockHarness {
            store: default_store(&automaton),
            control: automaton.initial.state,
            automaton,
            functions,
            prng: Prng::new(seed),
            params,
            scenario: crate::corpus::Scenario::default(),
        };
        let body = h.automaton.init_body.clone();
        h.exec(&body, None).map_err(|d| init_error(&h.automaton, d))?;
        Ok(h)
    }

    fn exec(&mut self, body: &[crate::ir::Stmt], incoming: Option<&Value>) -> Result<(), Diagnostic> {
        let mut env = Env {
            prng: &mut self.prng,
            params: &self.params,
            scenario: &self.scenario,
        };
        let mut cx = Ctx {
            functions: &self.functions,
            env: &mut env,
        };
        exec(body, &mut self.store, incoming, &mut cx)
    }

    fn enabled(&mut self, t: usize) -> Result<bool, Diagnostic> {
        let tr = &self.automaton.transitions[t];
        if tr.source != self.control {
            return Ok(false);
        }
        let mut env = Env {
            prng: &mut self.prng,
            params: &self.params,
            scenario: &self.scenario,
        };
        let mut cx = Ctx {
            functions: &self.functions,
            env: &mut env,
        };
        Ok(eval(&tr.guard, &self.store, None, &mut cx)?.as_bool() == Some(true))
    }

    fn fire(&mut self, t: usize, incoming: Option<&Value>) -> Result<(), Diagnostic> {
        let action = self.automaton.transitions[t].action.clone();
        self.exec(&action, incoming)?;
        self.control = self.automaton.transitions[t].target;
        Ok(())
    }

    /// Delivers `value` on input `port`; `false` if the input is not enabled.
    pub fn offer(&mut self, port: usize, value: Value) -> Result<bool, Diagnostic> {
        let Some(t) = self.automaton.input_transition(port) else {
            return Ok(false);
        };
        if !self.enabled(t)? {
            return Ok(false);
        }
        self.fire(t, Some(&value))?;
        Ok(true)
    }

    /// Fires the update transition if it is enabled.
    pub fn update(&mut self) -> Result<bool, Diagnostic> {
        let t = self.automaton.internal_transition().expect("internal transition");
        if !self.enabled(t)? {
            return Ok(false);
        }
        self.fire(t, None)?;
        Ok(true)
    }

    /// Fires the next output transition, returning its port and value.
    pub fn emit(&mut self) -> Result<Option<(usize, Value)>, Diagnostic> {
        for t in 0..self.automaton.transitions.len() {
            let tr = &self.automaton.transitions[t];
            if tr.kind != TransitionKind::Output {
                continue;
            }
            let port = tr.port.expect("output port");
            if self.enabled(t)? {
                let v = self.store[&out_var(port)].clone();
                self.fire(t, None)?;
                return Ok(Some((port, v)));
            }
        }
        Ok(None)
    }

    /// Runs the update and every output; `None` if the update is not enabled.
    pub fn round(&mut self) -> Result<Option<Vec<Value>>, Diagnostic> {
        if !self.update()? {
            return Ok(None);
        }
        let mut outs = Vec::new();
        while let Some((_, v)) = self.emit()? {
            outs.push(v);
        }
        Ok(Some(outs))
    }

    pub fn var(&self, name: &str) -> Option<&Value> {
        self.store.get(name)
    }

    pub fn flag(&self, input: &str) -> bool {
        self.store.get(&flag_var(input)).and_then(Value::as_bool) == Some(true)
    }
}
